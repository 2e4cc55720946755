"""
Doubly 1-bit quantized massive MIMO link simulation.

A transmitter with ``N`` antennas and 1-bit DACs sends ``K`` streams to a
receiver with ``M`` antennas and 1-bit ADCs. The package linearizes both
quantizers with the Bussgang decomposition, evaluates the resulting
closed-form approximate MSE and its optimal linear combiner, and checks
them against Monte Carlo simulation of the full chain.

Typical use::

    from onebit_mimo import (LinkConfig, RngStream, generate_iid_channel,
                             build_link, approximate_mse)

    cfg = LinkConfig.from_db(N=64, M=64, K=8, rho_db=10)
    link = build_link(generate_iid_channel(RngStream(1), 64, 64), cfg)
    approximate_mse(link.V, link)
"""

__version__ = "0.1.0"

from .numerics import (DomainError, IllConditionedError, NumericsError, RngStream,
                       SvdConvergenceError, elementwise_arcsine_map, hermitian_solve,
                       sample_complex_gaussian, svd, svd_factored)
from .channel import (DEFAULT_CLUSTER, ArrayGeometry, ChannelRealization, ScattererCluster,
                      draw_cluster_angles, dump_channel, generate_iid_channel,
                      generate_physical_channel, load_channel, upa_steering_vector)
from .tx import (FULL_RESOLUTION, ONE_BIT, DegenerateAntennaError, LinkConfig, Precoder,
                 TxLinearization, build_svd_precoder, quantize_1bit, tx_distortion_cov,
                 tx_linearize)
from .rx import (Combiner, RxLinearization, optimal_combiner, rx_distortion_cov, rx_linearize,
                 simulate_rx_signal)
from .link import LinearizedLink, build_link, transmit
from .metrics import (Constellation, MseReport, SerReport, appendix_identity_check,
                      approximate_mse, detect_psk, estimate_ser, monte_carlo_mse,
                      wilson_interval, write_scatter_csv)
