"""
Approximate and Monte Carlo MSE, PSK detection and symbol error rate.

The approximate MSE of a combiner ``V`` is

    eps~ = 1 + tr(V^H C_r V) / K - 2 sqrt(rho) tr(Re[V^H G_rx H G_tx W]) / K

with the Gaussian-approximate ``C_r`` and ``G_rx``. It is exact in form
(only ``C_r`` and ``G_rx`` are approximated) and convex in ``V``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import binomtest

from .link import LinearizedLink, transmit
from .numerics import as_generator

__all__ = [
    "Constellation",
    "MseReport",
    "SerReport",
    "approximate_mse",
    "monte_carlo_mse",
    "appendix_identity_check",
    "detect_psk",
    "estimate_ser",
    "wilson_interval",
    "write_scatter_csv",
]

#: Upper bound on entries of one simulated block (rows x draws).
BLOCK_ENTRIES = 2**21


@dataclass(frozen=True)
class Constellation:
    """
    Data symbol alphabet: ``kind="psk"`` with ``order`` points
    ``exp(1j (2 pi k / order + offset))``, or ``kind="gaussian"`` for
    CN(0, 1) symbols.
    """

    kind: str = "psk"
    order: int = 16
    offset: float = 0.0

    def __post_init__(self):
        if self.kind not in ("psk", "gaussian"):
            raise ValueError(f"unknown constellation kind {self.kind!r}")
        if self.kind == "psk" and self.order < 2:
            raise ValueError("PSK needs at least two points")

    @classmethod
    def psk(cls, order: int = 16, offset: float = 0.0) -> "Constellation":
        return cls("psk", order, offset)

    @classmethod
    def gaussian(cls) -> "Constellation":
        return cls("gaussian", 0)

    @property
    def points(self) -> np.ndarray:
        if self.kind != "psk":
            raise ValueError("a Gaussian alphabet has no discrete points")
        return np.exp(1j * (2 * np.pi * np.arange(self.order) / self.order + self.offset))

    def sample(self, gen, K: int, draws: int):
        """Return ``(indices, symbols)``; ``indices`` is None for Gaussian data."""
        if self.kind == "gaussian":
            s = (gen.standard_normal((K, draws)) + 1j * gen.standard_normal((K, draws))) * np.sqrt(0.5)
            return None, s
        idx = gen.integers(0, self.order, size=(K, draws))
        return idx, self.points[idx]


@dataclass
class MseReport:
    eps_tilde: float
    eps_mc: float
    eps_mc_stderr: float
    draws: int


@dataclass
class SerReport:
    ser: float
    symbol_count: int
    errors: int
    per_stream: list
    interval: tuple
    calibrated: bool = False
    pairs: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.symbol_count and self.ser != self.errors / self.symbol_count:
            raise ValueError("ser must equal errors / symbol_count")

    @classmethod
    def merge(cls, reports) -> "SerReport":
        """Pool several reports (e.g. one per channel realization)."""
        reports = list(reports)
        errors = sum(r.errors for r in reports)
        count = sum(r.symbol_count for r in reports)
        per = np.mean([r.per_stream for r in reports], axis=0).tolist()
        return cls(errors / count, count, errors, per, wilson_interval(errors, count),
                   all(r.calibrated for r in reports))


def wilson_interval(errors: int, trials: int, confidence: float = 0.95) -> tuple:
    """Wilson score interval for a binomial proportion."""
    ci = binomtest(int(errors), int(trials)).proportion_ci(confidence, method="wilson")
    return float(ci.low), float(ci.high)


def _block_size(link: LinearizedLink) -> int:
    rows = max(link.config.N, link.config.M)
    return max(1, BLOCK_ENTRIES // rows)


def approximate_mse(V, link: LinearizedLink) -> float:
    """Approximate MSE of combiner ``V`` (array or ``Combiner``) on ``link``."""
    V = np.asarray(getattr(V, "V", V), dtype=complex)
    K = link.config.K
    quad = np.real(np.sum(V.conj() * (link.rx.C_r @ V)))
    cross = np.real(np.sum(V.conj() * link.B))
    return float(1.0 + quad / K - 2.0 * cross / K)


def appendix_identity_check(link: LinearizedLink, V) -> float:
    """
    ``|eps_expanded - eps~|`` where ``eps_expanded`` is assembled the long
    way: ``E[r s^H]`` from dense Bussgang gain matrices times
    ``E[s s^H] = I_K``, then ``(1/K)(tr E[s s^H] + tr(V^H C_r V)
    - 2 tr Re[V^H E[r s^H]])``. Agreement to round-off guards against the
    two code paths drifting apart.
    """
    V = np.asarray(getattr(V, "V", V), dtype=complex)
    cfg = link.config
    K = cfg.K
    Rss = np.eye(K, dtype=complex)
    G_rx = link.rx.G
    G_tx = link.tx.G
    Ers = np.sqrt(cfg.rho) * G_rx @ link.channel.H @ G_tx @ link.precoder.W @ Rss
    expanded = (np.trace(Rss).real
                + np.trace(V.conj().T @ link.rx.C_r @ V).real
                - 2.0 * np.trace(np.real(V.conj().T @ Ers))) / K
    return float(abs(expanded - approximate_mse(V, link)))


def monte_carlo_mse(rng, link: LinearizedLink, V=None, constellation: Constellation | None = None,
                    draws: int = 1000) -> MseReport:
    """
    Empirical MSE ``(1/K) ||s - V^H r||^2`` over ``draws`` end-to-end runs.

    Symbols and noise are drawn from ``rng`` block by block in a fixed
    order, so the report is a deterministic function of the stream.
    """
    if draws < 1:
        raise ValueError("draws must be >= 1")
    V = link.V if V is None else np.asarray(getattr(V, "V", V), dtype=complex)
    constellation = constellation or Constellation.gaussian()
    gen = as_generator(rng)
    K = link.config.K
    block = _block_size(link)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < draws:
        n = min(block, draws - done)
        _, S = constellation.sample(gen, K, n)
        r = transmit(link, S, gen)
        err = np.sum(np.abs(S - V.conj().T @ r) ** 2, axis=0) / K
        total += float(np.sum(err))
        total_sq += float(np.sum(err**2))
        done += n
    mean = total / draws
    var = max(total_sq / draws - mean**2, 0.0) * draws / max(draws - 1, 1)
    return MseReport(approximate_mse(V, link), mean, float(np.sqrt(var / draws)), draws)


def detect_psk(s_hat: np.ndarray, constellation: Constellation) -> np.ndarray:
    """
    Minimum-distance PSK decisions, computed as nearest phase.

    Exact ties go to the lower index; ``s_hat = 0`` maps to index 0.
    """
    if constellation.kind != "psk":
        raise ValueError("detection needs a PSK constellation")
    s_hat = np.asarray(s_hat)
    L = constellation.order
    x = np.mod((np.angle(s_hat) - constellation.offset) * L / (2 * np.pi), L)
    idx = np.ceil(x - 0.5).astype(np.int64) % L
    # x just below L - 0.5 rounds to L - 1, exactly L - 0.5 is a tie with 0
    idx = np.where(x == L - 0.5, 0, idx)
    return np.where(s_hat == 0, 0, idx)


def _calibration_gains(link, V, constellation, gen, pilot_draws):
    idx, S = constellation.sample(gen, link.config.K, pilot_draws)
    s_hat = V.conj().T @ transmit(link, S, gen)
    return np.sum(s_hat * S.conj(), axis=1) / np.sum(np.abs(S) ** 2, axis=1)


def estimate_ser(rng, link: LinearizedLink, V=None, constellation: Constellation | None = None,
                 symbol_draws: int = 10_000, calibrate: bool = False, pilot_draws: int = 1000,
                 keep_pairs: int = 0) -> SerReport:
    """
    Symbol error rate of uniform i.i.d. PSK data through the full chain.

    ``symbol_draws`` is the number of transmitted symbol *vectors*; the SER
    pools ``K * symbol_draws`` decisions. With ``calibrate=True`` a
    per-stream complex gain is first fitted by least squares on
    ``pilot_draws`` extra vectors and divided out before detection.
    ``keep_pairs`` retains that many leading (s, s_hat) vectors.
    """
    if symbol_draws < 1:
        raise ValueError("symbol_draws must be >= 1")
    V = link.V if V is None else np.asarray(getattr(V, "V", V), dtype=complex)
    constellation = constellation or Constellation.psk(16)
    if constellation.kind != "psk":
        raise ValueError("SER needs a PSK constellation")
    gen = as_generator(rng)
    K = link.config.K
    gains = np.ones(K, dtype=complex)
    if calibrate:
        gains = _calibration_gains(link, V, constellation, gen, pilot_draws)
    block = _block_size(link)
    per_stream = np.zeros(K, dtype=np.int64)
    kept_s, kept_hat = [], []
    done = 0
    while done < symbol_draws:
        n = min(block, symbol_draws - done)
        idx, S = constellation.sample(gen, K, n)
        s_hat = V.conj().T @ transmit(link, S, gen)
        det = detect_psk(s_hat / gains[:, None], constellation)
        per_stream += np.sum(det != idx, axis=1)
        if done < keep_pairs:
            m = min(n, keep_pairs - done)
            kept_s.append(S[:, :m])
            kept_hat.append(s_hat[:, :m])
        done += n
    errors = int(per_stream.sum())
    count = K * symbol_draws
    pairs = (np.concatenate(kept_s, axis=1), np.concatenate(kept_hat, axis=1)) if kept_s else None
    return SerReport(errors / count, count, errors, (per_stream / symbol_draws).tolist(),
                     wilson_interval(errors, count), calibrate, pairs)


def write_scatter_csv(path, pairs_by_mode: dict) -> None:
    """
    Write soft estimates for scatter plots.

    ``pairs_by_mode`` maps a mode label to ``(S, S_hat)`` arrays of shape
    ``(K, draws)``. Columns: stream, re_s, im_s, re_shat, im_shat, mode.
    """
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["stream", "re_s", "im_s", "re_shat", "im_shat", "mode"])
            for mode, (S, S_hat) in pairs_by_mode.items():
                K, D = S.shape
                for d in range(D):
                    for k in range(K):
                        w.writerow([k, f"{S[k, d].real:.9g}", f"{S[k, d].imag:.9g}",
                                    f"{S_hat[k, d].real:.9g}", f"{S_hat[k, d].imag:.9g}", mode])
    except OSError as exc:
        raise OSError(f"cannot write scatter file {path}: {exc}") from exc
