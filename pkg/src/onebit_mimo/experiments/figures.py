"""
Preset sweeps for the four published plots.

1. MSE vs N = M, both DAC modes, approximate and Monte Carlo.
2. Approximate MSE vs N for fixed M, plus the transposed (M, N) runs.
3. Approximate MSE vs number of streams K.
4. 16-PSK soft estimates and SER vs N = M, both DAC modes.

``scale="reduced"`` keeps desk runtimes (minutes on one core);
``scale="full"`` uses 10^3 channel realizations and is a long job.
"""

from __future__ import annotations

from .spec import ExperimentSpec

__all__ = ["FIGURES", "figure_spec"]

ARRAY_SIZES = [400, 576, 784, 1024, 1296, 1600]
BOTH_DACS = ["one-bit", "full-resolution"]

_REALIZATIONS = {"reduced": 50, "full": 1000}


def figure_spec(number: int, scale: str = "reduced", seed: int = 1, output_path=None) -> ExperimentSpec:
    if scale not in _REALIZATIONS:
        raise ValueError(f"scale must be 'reduced' or 'full', got {scale!r}")
    reps = _REALIZATIONS[scale]
    if number == 1:
        return ExperimentSpec("mse-vs-nm", N=ARRAY_SIZES, K=[16], rho_db=[10.0],
                              realizations=reps, symbol_draws=1000, dac_modes=BOTH_DACS,
                              seed=seed, output_path=output_path)
    if number == 2:
        return ExperimentSpec("mse-vs-n-fixed-m", N=ARRAY_SIZES, M=[400, 1024, 1600], K=[16],
                              rho_db=[10.0], realizations=reps, symbol_draws=0,
                              seed=seed, output_path=output_path)
    if number == 3:
        return ExperimentSpec("mse-vs-k", N=[400, 1024, 1600], K=[2, 4, 8, 16, 32, 64],
                              rho_db=[10.0], realizations=reps, symbol_draws=0,
                              seed=seed, output_path=output_path)
    if number == 4:
        # 2.5e4 vectors x 8 streams = 2e5 symbols per realization at reduced scale
        draws = 25_000 if scale == "reduced" else 125_000
        return ExperimentSpec("ser-scatter", N=[400, 1024, 1600], K=[8], rho_db=[10.0],
                              realizations=10 if scale == "reduced" else 100,
                              symbol_draws=draws, dac_modes=BOTH_DACS,
                              seed=seed, output_path=output_path)
    raise ValueError(f"no figure {number}; choose 1-4")


FIGURES = {
    1: "MSE for 1-bit DACs/ADCs and full-resolution DACs/1-bit ADCs vs N = M",
    2: "Approximate MSE vs N for M in {400, 1024, 1600}, with N and M switched",
    3: "Approximate MSE vs number of data streams K",
    4: "Soft-estimated 16-PSK symbols and SER vs N = M",
}
