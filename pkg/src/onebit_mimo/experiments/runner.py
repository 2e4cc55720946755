"""
Sweep execution.

Work is split into (grid point, realization) tasks. Each task builds its
own random streams from ``(seed, labels)`` so the results never depend on
which worker ran it or in what order; per-realization numbers are merged
by index before averaging.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import subprocess
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import __version__
from ..channel import DEFAULT_CLUSTER, ArrayGeometry, generate_iid_channel, generate_physical_channel
from ..link import build_link
from ..metrics import (Constellation, SerReport, appendix_identity_check, approximate_mse,
                       estimate_ser, monte_carlo_mse, write_scatter_csv)
from ..numerics import RngStream
from ..tx import LinkConfig
from .spec import ExperimentSpec, GridPoint

__all__ = ["SweepResult", "run_experiment", "run_nm_symmetry_probe", "emit_csv", "read_csv",
           "worker_count"]

log = logging.getLogger(__name__)

#: Leading (s, s_hat) vectors kept from realization 0 for scatter output.
SCATTER_VECTORS = 250

BASE_COLUMNS = ["kind", "N", "M", "K", "rho_dB", "dac_mode", "orientation", "realizations",
                "eps_tilde", "eps_mc", "eps_mc_stderr", "ser", "ser_low", "ser_high", "symbols"]
VALIDATION_COLUMNS = ["identity_max", "bound_holds"]


@dataclass
class SweepResult:
    """Rows (one per grid point, DAC mode and orientation) plus run metadata."""

    columns: list
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    errors: list = field(default_factory=list)
    wall_times: list = field(default_factory=list)
    scatter: dict = field(default_factory=dict)

    def column(self, name, **where) -> np.ndarray:
        """Values of ``name`` over rows matching ``where`` (e.g. ``dac_mode=...``)."""
        sel = [r for r in self.rows if all(r[k] == v for k, v in where.items())]
        return np.array([r[name] for r in sel])


def worker_count(workers: int | None = None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("SIM_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _version_string() -> str:
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty", "--tags"],
                             cwd=Path(__file__).resolve().parent, capture_output=True,
                             text=True, timeout=5)
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+g{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def _metadata(spec: ExperimentSpec) -> dict:
    meta = {
        "seed": spec.seed,
        "version": _version_string(),
        "channel-model": spec.channel_model,
        "spec": json.dumps(spec.to_json(), sort_keys=True),
    }
    if spec.channel_model == "physical":
        c = DEFAULT_CLUSTER
        meta["channel-decisions"] = (
            f"paths={c.path_count}; azimuth/elevation i.i.d. uniform, full width "
            f"{c.azimuth_spread:.9g}/{c.elevation_spread:.9g} rad around broadside; "
            "angle convention=broadside; gains CN(0,1); scale 1/sqrt(paths); "
            "independent tx/rx angles")
    return meta


def _draw_channel(spec: ExperimentSpec, N: int, M: int, rep: int):
    rng = RngStream.for_task(spec.seed, "channel", N, M, rep)
    if spec.channel_model == "iid":
        return generate_iid_channel(rng, M, N)
    return generate_physical_channel(rng, ArrayGeometry.square(N), ArrayGeometry.square(M),
                                     DEFAULT_CLUSTER)


def _run_task(spec: ExperimentSpec, point: GridPoint, N: int, M: int, rep: int) -> dict:
    """All DAC modes of one realization at one (possibly swapped) grid point."""
    t0 = time.perf_counter()
    chan = _draw_channel(spec, N, M, rep)
    out = {}
    for mode in spec.dac_modes:
        cfg = LinkConfig(N, M, point.K, point.rho, dac_mode=mode)
        link = build_link(chan, cfg)
        res = {"eps_tilde": approximate_mse(link.V, link)}
        labels = (point.K, point.rho_db, rep)
        draws = spec.symbol_draws
        if spec.kind == "ser-scatter":
            if draws:
                rng = RngStream.for_task(spec.seed, "symbols", N, M, *labels)
                keep = SCATTER_VECTORS if rep == 0 else 0
                res["ser"] = estimate_ser(rng, link, link.V, Constellation.psk(16), draws,
                                          keep_pairs=keep)
        elif draws:
            rng = RngStream.for_task(spec.seed, "symbols", N, M, *labels)
            res["mc"] = monte_carlo_mse(rng, link, link.V, Constellation.gaussian(), draws)
        if spec.kind == "validation-suite":
            res["identity"] = appendix_identity_check(link, link.V)
        out[mode] = res
    out["_time"] = time.perf_counter() - t0
    return out


def _aggregate(spec, point, N, M, mode, orientation, reps) -> dict:
    per = [r[mode] for r in reps]
    row = {
        "kind": spec.kind, "N": N, "M": M, "K": point.K, "rho_dB": point.rho_db,
        "dac_mode": mode, "orientation": orientation, "realizations": len(per),
        "eps_tilde": float(np.mean([p["eps_tilde"] for p in per])),
        "eps_mc": float("nan"), "eps_mc_stderr": float("nan"),
        "ser": float("nan"), "ser_low": float("nan"), "ser_high": float("nan"), "symbols": 0,
    }
    if "mc" in per[0]:
        mcs = [p["mc"] for p in per]
        row["eps_mc"] = float(np.mean([m.eps_mc for m in mcs]))
        # Monte Carlo error of the realization average, channels held fixed
        row["eps_mc_stderr"] = float(np.sqrt(np.sum([m.eps_mc_stderr**2 for m in mcs])) / len(mcs))
        row["symbols"] = int(sum(m.draws for m in mcs))
    if "ser" in per[0]:
        merged = SerReport.merge(p["ser"] for p in per)
        row.update(ser=merged.ser, ser_low=merged.interval[0], ser_high=merged.interval[1],
                   symbols=merged.symbol_count)
    if spec.kind == "validation-suite":
        row["identity_max"] = float(max(p["identity"] for p in per))
        if "mc" in per[0]:
            row["bound_holds"] = int(row["eps_mc"] <= row["eps_tilde"] + 5 * row["eps_mc_stderr"])
        else:
            row["bound_holds"] = -1
    return row


def _execute(spec: ExperimentSpec, jobs: list, workers: int | None) -> list:
    """``jobs`` is a list of (point, N, M, rep); returns results in job order."""
    n = worker_count(workers)

    def call(job):
        point, N, M, rep = job
        try:
            return _run_task(spec, point, N, M, rep)
        except Exception as exc:  # recorded per grid point, sweep continues
            log.warning("grid point %d (N=%d, M=%d) realization %d failed: %s",
                        point.index, N, M, rep, exc)
            return exc

    if n == 1:
        return [call(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(call, jobs))


def _sweep(spec: ExperimentSpec, orientations, workers) -> SweepResult:
    columns = BASE_COLUMNS + (VALIDATION_COLUMNS if spec.kind == "validation-suite" else [])
    result = SweepResult(columns=columns, metadata=_metadata(spec))
    points = []
    for p in spec.grid():
        why = spec.problems(p)
        if why:
            result.errors.extend(f"grid point {p.index} (N={p.N}, M={p.M}, K={p.K}): {w}" for w in why)
        else:
            points.append(p)

    jobs = []
    for p in points:
        for label, (N, M) in orientations(p):
            jobs.extend((p, N, M, rep) for rep in range(spec.realizations))
    outcomes = _execute(spec, jobs, workers)

    i = 0
    for p in points:
        for label, (N, M) in orientations(p):
            reps = outcomes[i:i + spec.realizations]
            i += spec.realizations
            failed = [r for r in reps if isinstance(r, Exception)]
            if failed:
                result.errors.append(f"grid point {p.index} (N={N}, M={M}, K={p.K}): {failed[0]}")
                continue
            elapsed = float(sum(r["_time"] for r in reps))
            for mode in spec.dac_modes:
                cfg = LinkConfig(N, M, p.K, p.rho, dac_mode=mode)  # re-validates the row
                row = _aggregate(spec, p, cfg.N, cfg.M, mode, label, reps)
                result.rows.append(row)
                result.wall_times.append(elapsed)
                if spec.kind == "ser-scatter" and reps[0][mode]["ser"].pairs is not None:
                    result.scatter[(N, M, p.K, p.rho_db, mode)] = reps[0][mode]["ser"].pairs
    return result


def run_experiment(spec: ExperimentSpec, workers: int | None = None, write: bool = True) -> SweepResult:
    """
    Evaluate every feasible grid point, averaging per-realization scalars.

    Infeasible points are listed in ``result.errors`` and skipped. When
    ``spec.output_path`` is set and ``write`` is true, the CSV (and, for
    ``ser-scatter``, a ``*-scatter.csv`` companion) is written.
    """
    if spec.kind == "mse-vs-n-fixed-m":
        return run_nm_symmetry_probe(spec, workers, write)
    result = _sweep(spec, lambda p: [("NM", (p.N, p.M))], workers)
    if write and spec.output_path:
        emit_csv(result, spec.output_path)
        if result.scatter:
            _write_scatter(result, spec.output_path)
    return result


def run_nm_symmetry_probe(spec: ExperimentSpec, workers: int | None = None,
                          write: bool = True) -> SweepResult:
    """
    Run every (N, M) grid point and its transpose (M, N), emitting paired
    rows labelled ``orientation = "NM"`` and ``"MN"``.
    """
    result = _sweep(spec, lambda p: [("NM", (p.N, p.M)), ("MN", (p.M, p.N))], workers)
    if write and spec.output_path:
        emit_csv(result, spec.output_path)
    return result


def _write_scatter(result: SweepResult, output_path) -> None:
    path = Path(output_path)
    for (N, M, K, rho_db, mode), pairs in result.scatter.items():
        target = path.with_name(f"{path.stem}-scatter-N{N}-M{M}-K{K}-{mode}.csv")
        write_scatter_csv(target, {mode: pairs})


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.9g}"
    return str(v)


def emit_csv(result: SweepResult, path) -> None:
    """
    Write ``result`` as RFC 4180 CSV: ``#``-prefixed metadata lines, a
    header row, then one line per row with floats at 9 significant digits.
    Per-row wall times go into the metadata so the body stays byte-stable.
    """
    buf = io.StringIO()
    for key, value in result.metadata.items():
        buf.write(f"# {key}: {value}\r\n")
    for msg in result.errors:
        buf.write(f"# error: {msg}\r\n")
    if result.wall_times:
        buf.write("# wall-time-s: " + ",".join(f"{t:.3f}" for t in result.wall_times) + "\r\n")
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(result.columns)
    for row in result.rows:
        w.writerow([_fmt(row.get(c, "")) for c in result.columns])
    path = Path(path)
    try:
        if path.parent and not path.parent.exists():
            path.parent.mkdir(parents=True)
        path.write_text(buf.getvalue(), newline="")
    except OSError as exc:
        raise OSError(f"cannot write sweep CSV {path}: {exc}") from exc


def csv_body(path) -> str:
    """Everything after the metadata block (header and rows)."""
    with open(path, newline="") as fh:
        lines = fh.read().splitlines(keepends=True)
    return "".join(l for l in lines if not l.startswith("#"))


def read_csv(path):
    """Parse a file written by :func:`emit_csv` into ``(metadata, rows)``."""
    with open(path, newline="") as fh:
        text = fh.read()
    meta, body = {}, []
    for line in text.splitlines(keepends=True):
        if line.startswith("# "):
            key, _, value = line[2:].rstrip("\r\n").partition(": ")
            meta.setdefault(key, []).append(value)
        else:
            body.append(line)
    rows = list(csv.DictReader(io.StringIO("".join(body), newline="")))
    return {k: v[0] if len(v) == 1 else v for k, v in meta.items()}, rows
