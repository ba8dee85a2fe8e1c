"""Error types shared across the package.

Exit-code mapping used by the CLI: ValidationError -> 2,
ResourceBudgetError -> 3, anything else -> 4.
"""


class ValidationError(Exception):
    """Malformed input, contract violation, or out-of-range parameter."""


class ResourceBudgetError(Exception):
    """A run was refused because its estimated resource use exceeds the budget."""
