"""Benchmark cell trampoline, executed by file path with stdlib imports only.

The kernel seeds a forked child's peak-RSS high-water mark with the parent's
resident set at fork time, so a cell spawned directly from a large process
inherits that figure and reports a bogus peak. Spawning through this tiny
process caps the floor at the trampoline's own footprint instead.

argv: RESULT_PATH CMD [ARG ...]
Runs CMD inheriting stdio and environment, then writes
{"rc", "user_sys_s", "wall_s", "maxrss_bytes"} as JSON to RESULT_PATH.
Exits with CMD's return code (128+signal if it died on a signal).
"""

import json
import os
import subprocess
import sys
import time


def main(argv):
    result_path, cmd = argv[0], argv[1:]
    t0 = time.monotonic()
    proc = subprocess.Popen(cmd)
    _, status, ru = os.wait4(proc.pid, 0)
    wall = time.monotonic() - t0
    rc = os.waitstatus_to_exitcode(status)
    payload = {
        "rc": rc,
        "user_sys_s": float(ru.ru_utime + ru.ru_stime),
        "wall_s": wall,
        "maxrss_bytes": int(ru.ru_maxrss) * 1024,
    }
    with open(result_path, "w", encoding="utf-8") as f:
        json.dump(payload, f)
    return rc if rc >= 0 else 128 - rc


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
