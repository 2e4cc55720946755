"""
Transmitter: SVD precoding, 1-bit DACs and their Bussgang linearization.

With Gaussian data ``s ~ CN(0, I_K)`` the precoded signal ``x = W s`` is
Gaussian with covariance ``C_x = W W^H``. The 1-bit DAC output
``t = Q(x)`` then decomposes as ``t = G_tx x + d_tx`` with a diagonal gain

    G_tx = sqrt(2 eta_tx / pi) Diag(C_x)^-1/2

and the arcsine law gives ``C_t = E[t t^H]`` in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import as_channel
from .numerics import elementwise_arcsine_map, svd, svd_factored

__all__ = [
    "ONE_BIT",
    "FULL_RESOLUTION",
    "DegenerateAntennaError",
    "LinkConfig",
    "Precoder",
    "TxLinearization",
    "quantize_1bit",
    "build_svd_precoder",
    "tx_linearize",
    "tx_distortion_cov",
]

ONE_BIT = "one-bit"
FULL_RESOLUTION = "full-resolution"
CONVERTER_MODES = (ONE_BIT, FULL_RESOLUTION)


class DegenerateAntennaError(ValueError):
    """An antenna receives an identically zero precoded signal."""


@dataclass(frozen=True)
class LinkConfig:
    """
    Scalar parameters of one link.

    ``eta_tx`` and ``eta_rx`` are derived, never set: ``1 / N`` keeps
    ``||t||^2 = 1`` and ``rho + 1`` matches the ADC output variance to its
    input variance for unit-variance channels as ``N`` grows.
    ``adc_mode = "full-resolution"`` is a diagnostic receiver (``r = y``).
    """

    N: int
    M: int
    K: int
    rho: float
    dac_mode: str = ONE_BIT
    adc_mode: str = ONE_BIT

    def __post_init__(self):
        for name in ("N", "M", "K"):
            if int(getattr(self, name)) != getattr(self, name) or getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive integer")
        if self.K > min(self.N, self.M):
            raise ValueError(f"K = {self.K} exceeds min(N, M) = {min(self.N, self.M)}")
        if not self.rho > 0:
            raise ValueError("rho must be positive")
        if self.dac_mode not in CONVERTER_MODES:
            raise ValueError(f"unknown dac_mode {self.dac_mode!r}")
        if self.adc_mode not in CONVERTER_MODES:
            raise ValueError(f"unknown adc_mode {self.adc_mode!r}")

    @classmethod
    def from_db(cls, N, M, K, rho_db, **kw) -> "LinkConfig":
        return cls(N, M, K, 10.0 ** (rho_db / 10.0), **kw)

    @property
    def eta_tx(self) -> float:
        return 1.0 / self.N

    @property
    def eta_rx(self) -> float:
        return self.rho + 1.0

    @property
    def rho_db(self) -> float:
        return 10.0 * np.log10(self.rho)


@dataclass
class Precoder:
    """Precoding matrix ``W`` (N x K) and its covariance ``C_x = W W^H``."""

    W: np.ndarray
    C_x: np.ndarray = None
    singular_values: np.ndarray | None = None
    rank_deficient: bool = False

    def __post_init__(self):
        self.W = np.asarray(self.W, dtype=complex)
        if self.C_x is None:
            C = self.W @ self.W.conj().T
            self.C_x = 0.5 * (C + C.conj().T)

    @property
    def N(self) -> int:
        return self.W.shape[0]

    @property
    def K(self) -> int:
        return self.W.shape[1]


@dataclass
class TxLinearization:
    """
    Bussgang linearization of the DACs.

    ``g`` holds the diagonal of ``G_tx`` (positive reals); use :attr:`G`
    for the dense matrix. In full-resolution mode ``g = 1`` and
    ``C_t = C_x``.
    """

    g: np.ndarray
    C_t: np.ndarray
    eta: float
    mode: str = ONE_BIT
    meta: dict = field(default_factory=dict)

    @property
    def G(self) -> np.ndarray:
        return np.diag(self.g.astype(complex))


def quantize_1bit(b: np.ndarray, eta: float) -> np.ndarray:
    """
    Scaled QPSK quantizer ``sqrt(eta / 2) (sgn Re b + 1j sgn Im b)``.

    Works elementwise on arrays of any shape; every output entry has
    squared magnitude ``eta``. ``sgn(0)`` is taken as ``+1`` on both rails.

    >>> quantize_1bit(np.array([1 + 1j, -2 - 3j]), 2.0)
    array([ 1.+1.j, -1.-1.j])
    """
    if not eta > 0:
        raise ValueError("quantizer scaling eta must be positive")
    b = np.asarray(b)
    a = np.sqrt(eta / 2.0)
    re = np.where(np.real(b) >= 0, a, -a)
    im = np.where(np.imag(b) >= 0, a, -a)
    return re + 1j * im


def build_svd_precoder(H, K: int, dac_mode: str = ONE_BIT) -> Precoder:
    """
    Precoder made of the ``K`` principal right singular vectors of ``H``.

    Columns are orthonormal and phase-normalized (largest-magnitude entry
    real-positive). In full-resolution mode ``W`` is scaled by ``1/sqrt(K)``
    so that ``trace(C_x) = 1``, the average-power analogue of
    ``||t||^2 = 1``.

    ``H`` may be a matrix or a :class:`ChannelRealization`; geometric
    realizations are decomposed through their low-rank factors.
    """
    if dac_mode not in CONVERTER_MODES:
        raise ValueError(f"unknown dac_mode {dac_mode!r}")
    chan = as_channel(H)
    M, N = chan.shape
    if K < 1 or K > min(M, N):
        raise ValueError(f"K = {K} must lie in [1, min(M, N) = {min(M, N)}]")

    if chan.factors is not None and chan.factors[0].shape[1] >= K:
        _, s, V = svd_factored(*chan.factors)
    else:
        _, s, V = svd(chan.H)
    W = V[:, :K]
    smax = s[0] if s.size else 0.0
    rank_deficient = bool(s[K - 1] <= 1e-10 * smax) if smax > 0 else True
    if dac_mode == FULL_RESOLUTION:
        W = W / np.sqrt(K)
    return Precoder(W=W, singular_values=s[:K].copy(), rank_deficient=rank_deficient)


def tx_linearize(precoder: Precoder, config: LinkConfig) -> TxLinearization:
    """
    Closed-form Bussgang gain and arcsine-law output covariance of the DACs.

    Raises
    ------
    DegenerateAntennaError
        Some diagonal entry of ``C_x`` is ``<= 1e-14`` times the largest.
    """
    C_x = precoder.C_x
    if config.dac_mode == FULL_RESOLUTION:
        return TxLinearization(g=np.ones(C_x.shape[0]), C_t=C_x.copy(), eta=config.eta_tx,
                               mode=FULL_RESOLUTION)
    d = np.real(np.diagonal(C_x))
    dmax = np.max(d) if d.size else 0.0
    bad = np.flatnonzero(d <= 1e-14 * dmax) if dmax > 0 else np.arange(d.size)
    if bad.size:
        raise DegenerateAntennaError(
            f"precoder feeds zero power to {bad.size} antenna(s), first index {bad[0]}")
    eta = config.eta_tx
    g = np.sqrt(2.0 * eta / np.pi) / np.sqrt(d)
    C_t = (2.0 / np.pi) * eta * elementwise_arcsine_map(C_x)
    return TxLinearization(g=g, C_t=C_t, eta=eta, mode=ONE_BIT)


def tx_distortion_cov(lin: TxLinearization, precoder: Precoder) -> np.ndarray:
    """Covariance of the DAC distortion, ``C_t - G_tx C_x G_tx``."""
    GCG = lin.g[:, None] * precoder.C_x * lin.g[None, :]
    out = lin.C_t - GCG
    return 0.5 * (out + out.conj().T)
