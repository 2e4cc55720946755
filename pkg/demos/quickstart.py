"""
Quickstart: one doubly 1-bit link from channel to soft estimates.

Run with ``python3 demos/quickstart.py``. Takes a few seconds.
"""

# %%
# A 20 x 20 planar array on each side, 100 scatterers, K = 8 streams at 10 dB.
import numpy as np

from onebit_mimo import (ArrayGeometry, Constellation, LinkConfig, RngStream, approximate_mse,
                         build_link, estimate_ser, generate_physical_channel, monte_carlo_mse)

geo = ArrayGeometry.square(400)
channel = generate_physical_channel(RngStream(seed=1, stream_id=0), geo, geo)
print("channel", channel.H.shape, "mean |h|^2 =", np.mean(np.abs(channel.H) ** 2).round(3))

# %%
# build_link does the SVD precoder, both Bussgang linearizations and the
# MSE-optimal combiner in one go.
config = LinkConfig.from_db(N=400, M=400, K=8, rho_db=10.0)
link = build_link(channel, config)
print("eps~ (closed form)      =", round(approximate_mse(link.V, link), 4))

# %%
# The closed form is an upper bound on the simulated MSE.
report = monte_carlo_mse(RngStream(1, 1), link, draws=2000)
print(f"eps  (Monte Carlo)      = {report.eps_mc:.4f} +- {report.eps_mc_stderr:.4f}")

# %%
# Same link with an unquantized transmitter for comparison.
full = build_link(channel, LinkConfig.from_db(400, 400, 8, 10.0, dac_mode="full-resolution"))
print("eps~ (full-res DACs)    =", round(approximate_mse(full.V, full), 4))

# %%
# 16-PSK symbol error rate with nearest-phase detection.
for name, lk in (("1-bit DACs/ADCs", link), ("1-bit ADCs only", full)):
    ser = estimate_ser(RngStream(1, 2), lk, constellation=Constellation.psk(16), symbol_draws=5000)
    lo, hi = ser.interval
    print(f"SER {name:16s} = {ser.ser:.4f}  (95% Wilson {lo:.4f} .. {hi:.4f})")
