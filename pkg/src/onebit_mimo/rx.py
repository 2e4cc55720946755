"""
Receiver: channel pass, 1-bit ADCs, Gaussian-approximate Bussgang
linearization and the combiner minimizing the approximate MSE.

``y = sqrt(rho) H t + z`` is not Gaussian because ``t`` is a vector of
QPSK symbols, but each entry of ``H t`` sums ``N`` of them. Treating ``y``
as ``CN(0, C_y)`` gives the closed forms

    C_y       = rho H C_t H^H + I_M
    G_rx      ~ sqrt(2 eta_rx / pi) Diag(C_y)^-1/2
    C_r       ~ (2 / pi) eta_rx arcsine_map(C_y)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import as_channel
from .numerics import as_generator, elementwise_arcsine_map, hermitian_solve
from .tx import FULL_RESOLUTION, ONE_BIT, LinkConfig, Precoder, TxLinearization, quantize_1bit

__all__ = [
    "RxLinearization",
    "Combiner",
    "simulate_rx_signal",
    "rx_linearize",
    "rx_distortion_cov",
    "optimal_combiner",
]


@dataclass
class RxLinearization:
    """``C_y``, the diagonal of ``G_rx_tilde`` (``g``) and ``C_r_tilde``."""

    C_y: np.ndarray
    g: np.ndarray
    C_r: np.ndarray
    eta: float
    mode: str = ONE_BIT

    @property
    def G(self) -> np.ndarray:
        return np.diag(self.g.astype(complex))


@dataclass
class Combiner:
    V: np.ndarray

    def __post_init__(self):
        self.V = np.asarray(self.V, dtype=complex)
        if not np.all(np.isfinite(self.V)):
            raise FloatingPointError("combining matrix has non-finite entries")

    def apply(self, r: np.ndarray) -> np.ndarray:
        """Soft estimates ``V^H r`` (``r`` may hold one draw per column)."""
        return self.V.conj().T @ r


def simulate_rx_signal(rng, H, t: np.ndarray, rho: float, eta_rx: float | None = None,
                       adc_mode: str = ONE_BIT):
    """
    Pass ``t`` through the channel, add fresh unit-variance noise and
    quantize with the ADCs.

    ``t`` is a vector or an ``(N, draws)`` block. Returns ``(y, r)``; with
    ``adc_mode="full-resolution"`` ``r`` is ``y`` itself.
    """
    chan = as_channel(H)
    t = np.asarray(t, dtype=complex)
    gen = as_generator(rng)
    shape = (chan.M,) + t.shape[1:]
    z = (gen.standard_normal(shape) + 1j * gen.standard_normal(shape)) * np.sqrt(0.5)
    y = np.sqrt(rho) * chan.matmul(t) + z
    if adc_mode == FULL_RESOLUTION:
        return y, y
    return y, quantize_1bit(y, rho + 1.0 if eta_rx is None else eta_rx)


def rx_linearize(H, tx_lin: TxLinearization, config: LinkConfig) -> RxLinearization:
    """Closed-form receiver quantities under the Gaussian approximation of ``y``."""
    chan = as_channel(H)
    C_y = config.rho * chan.sandwich(tx_lin.C_t)
    C_y[np.diag_indices_from(C_y)] += 1.0
    eta = config.eta_rx
    if config.adc_mode == FULL_RESOLUTION:
        return RxLinearization(C_y=C_y, g=np.ones(chan.M), C_r=C_y.copy(), eta=eta,
                               mode=FULL_RESOLUTION)
    d = np.real(np.diagonal(C_y))
    g = np.sqrt(2.0 * eta / np.pi) / np.sqrt(d)
    C_r = (2.0 / np.pi) * eta * elementwise_arcsine_map(C_y)
    return RxLinearization(C_y=C_y, g=g, C_r=C_r, eta=eta)


def rx_distortion_cov(rx_lin: RxLinearization) -> np.ndarray:
    """Approximate ADC distortion covariance ``C_r - G_rx C_y G_rx``."""
    out = rx_lin.C_r - rx_lin.g[:, None] * rx_lin.C_y * rx_lin.g[None, :]
    return 0.5 * (out + out.conj().T)


def signal_gain(H, tx_lin: TxLinearization, rx_lin: RxLinearization, precoder: Precoder,
                rho: float) -> np.ndarray:
    """Linear part of ``r`` in ``s``: ``sqrt(rho) G_rx H G_tx W`` (M x K)."""
    chan = as_channel(H)
    return np.sqrt(rho) * rx_lin.g[:, None] * chan.matmul(tx_lin.g[:, None] * precoder.W)


def optimal_combiner(H, tx_lin: TxLinearization, rx_lin: RxLinearization,
                     precoder: Precoder, config: LinkConfig) -> Combiner:
    """
    Minimizer of the approximate MSE over ``V``:
    ``V = sqrt(rho) C_r^-1 G_rx H G_tx W``, computed by a Cholesky solve.
    """
    B = signal_gain(H, tx_lin, rx_lin, precoder, config.rho)
    return Combiner(hermitian_solve(rx_lin.C_r, B, name="C_r_tilde"))
