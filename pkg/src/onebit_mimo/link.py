"""Bundle of everything derived from one channel realization."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, as_channel
from .rx import Combiner, RxLinearization, optimal_combiner, rx_linearize, signal_gain, simulate_rx_signal
from .tx import FULL_RESOLUTION, LinkConfig, Precoder, TxLinearization, build_svd_precoder, quantize_1bit, tx_linearize

__all__ = ["LinearizedLink", "build_link", "apply_dac", "transmit"]


@dataclass
class LinearizedLink:
    config: LinkConfig
    channel: ChannelRealization
    precoder: Precoder
    tx: TxLinearization
    rx: RxLinearization
    B: np.ndarray  # sqrt(rho) G_rx H G_tx W
    combiner: Combiner | None = None

    @property
    def H(self) -> np.ndarray:
        return self.channel.H

    @property
    def W(self) -> np.ndarray:
        return self.precoder.W

    @property
    def V(self) -> np.ndarray:
        if self.combiner is None:
            raise AttributeError("link was built without a combiner")
        return self.combiner.V


def build_link(channel, config: LinkConfig, precoder: Precoder | None = None,
               combiner: bool = True) -> LinearizedLink:
    """
    Precode (SVD unless ``precoder`` is given), linearize both converters
    and, by default, attach the optimal combiner.
    """
    chan = as_channel(channel)
    if chan.shape != (config.M, config.N):
        raise ValueError(f"channel is {chan.shape}, config expects {(config.M, config.N)}")
    if precoder is None:
        precoder = build_svd_precoder(chan, config.K, config.dac_mode)
    tx = tx_linearize(precoder, config)
    rx = rx_linearize(chan, tx, config)
    B = signal_gain(chan, tx, rx, precoder, config.rho)
    link = LinearizedLink(config, chan, precoder, tx, rx, B)
    if combiner:
        link.combiner = optimal_combiner(chan, tx, rx, precoder, config)
    return link


def apply_dac(x: np.ndarray, config: LinkConfig) -> np.ndarray:
    if config.dac_mode == FULL_RESOLUTION:
        return x
    return quantize_1bit(x, config.eta_tx)


def transmit(link: LinearizedLink, S: np.ndarray, rng) -> np.ndarray:
    """Run data block ``S`` (K x draws) through the chain; returns ``r``."""
    cfg = link.config
    t = apply_dac(link.precoder.W @ S, cfg)
    _, r = simulate_rx_signal(rng, link.channel, t, cfg.rho, cfg.eta_rx, cfg.adc_mode)
    return r
