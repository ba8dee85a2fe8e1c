"""Benchmark harness: child-process clustering cells with CPU time and
peak-RSS accounting, plus log-log growth-exponent fits.

Each cell forks the CLI in a fresh child so peak resident memory reflects
only that clustering run. CPU time is the child's user+sys total from
os.wait4; wall clock is reported separately. Children are pinned to one
BLAS thread for stable accounting. Leaders cells take a pre-found tau so
the measured run is the final pass plus the Ward stage, with the search
excluded.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import platform
import subprocess
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import oracle
from .dataset import save_dataset
from .errors import ValidationError

CSV_COLUMNS = ("method", "n", "dim", "k", "seed", "runtime_user_sys_s",
               "runtime_wall_s", "peak_mem_bytes", "status")


@dataclass
class BenchRecord:
    method: str
    n: int
    dim: int
    k: int
    seed: int
    runtime_user_sys_s: float
    runtime_wall_s: float
    peak_mem_bytes: int
    status: str
    host: str = ""
    assign_sha256: str = ""

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def host_fingerprint() -> str:
    return f"{platform.platform()}/{platform.machine()}/cpus={os.cpu_count()}"


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _canonical_method(method: str) -> str:
    m = {"agglo": "agglomerative"}.get(method, method)
    if m not in ("kmeans", "agglomerative", "leaders"):
        raise ValidationError(f"unknown method {method!r}")
    return m


def run_cell(method: str, emb_path, tok_path, out_path, k: int, seed: int,
             extra_flags=(), log_prefix=None) -> BenchRecord:
    """Run one clustering cell in a child process and account for it.

    The cell is spawned through the _measure.py trampoline because a forked
    child's peak-RSS high-water mark starts at the parent's resident set;
    spawning directly from a large caller would overstate small cells.
    """
    method = _canonical_method(method)
    cli_method = {"agglomerative": "agglo"}.get(method, method)
    runner = os.path.join(os.path.dirname(__file__), "_measure.py")
    log_prefix = str(log_prefix) if log_prefix is not None else str(out_path)
    result_path = log_prefix + ".rusage.json"
    cmd = [sys.executable, runner, result_path,
           sys.executable, "-m", "conceptmine", "cluster",
           "--method", cli_method, "--emb", str(emb_path), "--tok", str(tok_path),
           "--out", str(out_path), "--k", str(k), "--seed", str(seed),
           "--threads", "1", *map(str, extra_flags)]
    env = dict(os.environ)
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                "NUMEXPR_NUM_THREADS"):
        env[var] = "1"
    with open(log_prefix + ".stdout", "wb") as out_f, \
            open(log_prefix + ".stderr", "wb") as err_f:
        proc = subprocess.Popen(cmd, stdout=out_f, stderr=err_f, env=env)
        proc.wait()
    if not os.path.exists(result_path):
        raise RuntimeError(
            f"measurement trampoline died (exit {proc.returncode}); "
            f"see {log_prefix}.stderr")
    with open(result_path, "r", encoding="utf-8") as f:
        measured = json.load(f)
    # read sizes back from the embedding header for the record
    import struct
    with open(emb_path, "rb") as f:
        _, n, dim, _ = struct.unpack("<4sIII", f.read(16))
    if measured["rc"] == 0:
        status = "ok"
        sha = _sha256(out_path)
    else:
        status = f"exit:{measured['rc']}"
        sha = ""
    return BenchRecord(method=method, n=int(n), dim=int(dim), k=k, seed=seed,
                       runtime_user_sys_s=float(measured["user_sys_s"]),
                       runtime_wall_s=float(measured["wall_s"]),
                       peak_mem_bytes=int(measured["maxrss_bytes"]), status=status,
                       host=host_fingerprint(), assign_sha256=sha)


def fit_exponent(records: list[BenchRecord]) -> float:
    """Least-squares slope of log(cpu time) against log(N) over ok cells."""
    ok = [r for r in records if r.ok]
    if len(ok) < 3:
        raise ValidationError(
            f"insufficient successful cells for a fit: {len(ok)} < 3")
    x = np.log([r.n for r in ok])
    y = np.log([max(r.runtime_user_sys_s, 1e-9) for r in ok])
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def scaling_sweep(methods, sizes, workdir, dim=64, k=600, seed=0,
                  n_components=64, separation=6.0,
                  method_flags=None) -> tuple[list[BenchRecord], dict[str, float]]:
    """Generate one synthetic dataset per size, run every method on each,
    and fit per-method growth exponents."""
    if len(sizes) < 3:
        raise ValidationError("need >= 3 sizes per method for an exponent fit")
    methods = [_canonical_method(m) for m in methods]
    method_flags = method_flags or {}
    os.makedirs(workdir, exist_ok=True)
    paths = {}
    for n in sizes:
        emb = os.path.join(workdir, f"n{n}.lce")
        tok = os.path.join(workdir, f"n{n}.jsonl")
        if not (os.path.exists(emb) and os.path.exists(tok)):
            ds = oracle.generate(oracle.SynthConfig(
                n_points=n, dim=dim, n_components=min(n_components, n),
                separation=separation, label_skew=1.0, seed=seed))
            save_dataset(ds, emb, tok)
        paths[n] = (emb, tok)
    records = []
    for method in methods:
        for n in sizes:
            emb, tok = paths[n]
            out = os.path.join(workdir, f"{method}_n{n}.json")
            rec = run_cell(method, emb, tok, out, k=min(k, n), seed=seed,
                           extra_flags=method_flags.get(method, ()))
            records.append(rec)
    exponents = {}
    for method in methods:
        exponents[method] = fit_exponent([r for r in records if r.method == method])
    return records, exponents


def write_csv(path, records: list[BenchRecord]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(CSV_COLUMNS)
        for r in records:
            w.writerow([r.method, r.n, r.dim, r.k, r.seed,
                        f"{r.runtime_user_sys_s:.6f}", f"{r.runtime_wall_s:.6f}",
                        r.peak_mem_bytes, r.status])


def read_csv(path) -> list[dict]:
    with open(path, "r", encoding="utf-8") as f:
        return list(csv.DictReader(f))
