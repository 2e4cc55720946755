"""
MSE versus array size N = M, both DAC modes.

Prints a table and writes ``mse_vs_antennas.csv``. Each realization at
N = M = 1600 takes about a second on one core, so the default of
5 realizations finishes in a couple of minutes; pass ``--realizations``
for smoother curves.
"""

import argparse

from onebit_mimo.experiments import ExperimentSpec, run_experiment
from onebit_mimo.experiments.figures import ARRAY_SIZES

parser = argparse.ArgumentParser(description=__doc__.splitlines()[1])
parser.add_argument("--realizations", type=int, default=5)
parser.add_argument("--draws", type=int, default=500, help="Monte Carlo symbol vectors per channel")
parser.add_argument("--out", default="mse_vs_antennas.csv")
args = parser.parse_args()

# %%
# K = 16 streams at 10 dB, N = M from 400 to 1600.
spec = ExperimentSpec("mse-vs-nm", N=ARRAY_SIZES, K=[16], rho_db=[10.0],
                      realizations=args.realizations, symbol_draws=args.draws,
                      dac_modes=["one-bit", "full-resolution"], seed=1, output_path=args.out)
result = run_experiment(spec)

# %%
# eps~ should fall with N = M, sit above eps, and the 1-bit ADC baseline
# should stay within a factor of two.
print(f"{'N = M':>6} {'eps~ 1-bit':>11} {'eps 1-bit':>10} {'eps ADC-only':>13} {'ratio':>6}")
for n in ARRAY_SIZES:
    one = result.column("eps_mc", N=n, dac_mode="one-bit")[0]
    tilde = result.column("eps_tilde", N=n, dac_mode="one-bit")[0]
    full = result.column("eps_mc", N=n, dac_mode="full-resolution")[0]
    print(f"{n:6d} {tilde:11.4f} {one:10.4f} {full:13.4f} {full / one:6.2f}")
print("wrote", args.out)
