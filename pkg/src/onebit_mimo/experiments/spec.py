"""Declarative sweep description and its JSON form."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from ..tx import CONVERTER_MODES, ONE_BIT

__all__ = ["KINDS", "SpecError", "ExperimentSpec", "GridPoint", "load_spec"]

KINDS = ("mse-vs-nm", "mse-vs-n-fixed-m", "mse-vs-k", "ser-scatter", "validation-suite")
PAIRED_KINDS = ("mse-vs-nm", "mse-vs-k", "ser-scatter", "validation-suite")
CHANNEL_MODELS = ("physical", "iid")

_TOP_KEYS = {"experiment-kind", "parameter-grid", "channel-model", "realizations",
             "symbol-draws", "dac-modes", "seed", "output-path"}
_GRID_KEYS = {"N", "M", "K", "rho_dB"}


class SpecError(ValueError):
    """Malformed experiment description."""


@dataclass(frozen=True)
class GridPoint:
    index: int
    N: int
    M: int
    K: int
    rho_db: float

    @property
    def rho(self) -> float:
        return 10.0 ** (self.rho_db / 10.0)


@dataclass
class ExperimentSpec:
    """
    One sweep. Paired kinds (everything except ``mse-vs-n-fixed-m``) zip
    ``N`` with ``M`` (``M`` defaults to ``N``); ``mse-vs-n-fixed-m`` takes
    the Cartesian product. ``K`` and ``rho_db`` are always crossed in.

    ``symbol_draws`` is the number of data vectors simulated per channel
    realization (Monte Carlo MSE, or SER for ``ser-scatter``); 0 skips
    the Monte Carlo part.
    """

    kind: str
    N: list
    K: list
    rho_db: list = field(default_factory=lambda: [10.0])
    M: list | None = None
    channel_model: str = "physical"
    realizations: int = 50
    symbol_draws: int = 100_000
    dac_modes: list = field(default_factory=lambda: [ONE_BIT])
    seed: int = 0
    output_path: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SpecError(f"unknown experiment-kind {self.kind!r}; expected one of {KINDS}")
        if self.channel_model not in CHANNEL_MODELS:
            raise SpecError(f"unknown channel-model {self.channel_model!r}")
        for name in ("N", "K", "rho_db"):
            if not isinstance(getattr(self, name), (list, tuple)) or not getattr(self, name):
                raise SpecError(f"{name} must be a non-empty list")
        if self.M is not None and (not isinstance(self.M, (list, tuple)) or not self.M):
            raise SpecError("M must be a non-empty list when given")
        for name in ("N", "K"):
            for v in getattr(self, name):
                if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                    raise SpecError(f"{name} entries must be positive integers, got {v!r}")
        for v in self.M or []:
            if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                raise SpecError(f"M entries must be positive integers, got {v!r}")
        if self.kind in PAIRED_KINDS and self.M is not None and len(self.M) not in (1, len(self.N)):
            raise SpecError(f"{self.kind} pairs N with M: lists must have equal length")
        if not isinstance(self.realizations, int) or self.realizations < 1:
            raise SpecError("realizations must be a positive integer")
        if not isinstance(self.symbol_draws, int) or self.symbol_draws < 0:
            raise SpecError("symbol-draws must be a non-negative integer")
        if not self.dac_modes or any(m not in CONVERTER_MODES for m in self.dac_modes):
            raise SpecError(f"dac-modes must be a non-empty subset of {CONVERTER_MODES}")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise SpecError("seed must be a 64-bit unsigned integer")

    def grid(self) -> list:
        """All grid points in evaluation order, feasible or not."""
        if self.kind in PAIRED_KINDS:
            Ms = self.M or self.N
            if len(Ms) == 1:
                Ms = Ms * len(self.N)
            pairs = list(zip(self.N, Ms))
        else:
            pairs = list(itertools.product(self.N, self.M or self.N))
        combos = [(n, m, k, r) for (n, m) in pairs for k in self.K for r in self.rho_db]
        return [GridPoint(i, n, m, k, float(r)) for i, (n, m, k, r) in enumerate(combos)]

    def problems(self, point: GridPoint) -> list:
        """Reasons a grid point cannot be simulated (empty if feasible)."""
        out = []
        if point.K > min(point.N, point.M):
            out.append(f"K = {point.K} exceeds min(N, M) = {min(point.N, point.M)}")
        if self.channel_model == "physical":
            for name, v in (("N", point.N), ("M", point.M)):
                if math.isqrt(v) ** 2 != v:
                    out.append(f"{name} = {v} is not a perfect square (square planar array)")
        return out

    def validate(self) -> list:
        """Human-readable list of infeasible grid points."""
        msgs = []
        for p in self.grid():
            for why in self.problems(p):
                msgs.append(f"grid point {p.index} (N={p.N}, M={p.M}, K={p.K}, rho_dB={p.rho_db:g}): {why}")
        return msgs

    def to_json(self) -> dict:
        grid = {"N": list(self.N), "K": list(self.K), "rho_dB": list(self.rho_db)}
        if self.M is not None:
            grid["M"] = list(self.M)
        return {
            "experiment-kind": self.kind,
            "parameter-grid": grid,
            "channel-model": self.channel_model,
            "realizations": self.realizations,
            "symbol-draws": self.symbol_draws,
            "dac-modes": list(self.dac_modes),
            "seed": self.seed,
            "output-path": self.output_path,
        }

    @classmethod
    def from_json(cls, data: dict) -> "ExperimentSpec":
        if not isinstance(data, dict):
            raise SpecError("experiment spec must be a JSON object")
        unknown = set(data) - _TOP_KEYS
        if unknown:
            raise SpecError(f"unknown keys in experiment spec: {sorted(unknown)}")
        for key in ("experiment-kind", "parameter-grid"):
            if key not in data:
                raise SpecError(f"missing required key {key!r}")
        grid = data["parameter-grid"]
        if not isinstance(grid, dict):
            raise SpecError("parameter-grid must be an object")
        unknown = set(grid) - _GRID_KEYS
        if unknown:
            raise SpecError(f"unknown keys in parameter-grid: {sorted(unknown)}")
        for key in ("N", "K"):
            if key not in grid:
                raise SpecError(f"parameter-grid needs {key!r}")
        kw = {
            "kind": data["experiment-kind"],
            "N": grid["N"],
            "K": grid["K"],
            "M": grid.get("M"),
        }
        if "rho_dB" in grid:
            kw["rho_db"] = grid["rho_dB"]
        for key, attr in (("channel-model", "channel_model"), ("realizations", "realizations"),
                          ("symbol-draws", "symbol_draws"), ("dac-modes", "dac_modes"),
                          ("seed", "seed"), ("output-path", "output_path")):
            if key in data:
                kw[attr] = data[key]
        return cls(**kw)


def load_spec(path) -> ExperimentSpec:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: invalid JSON ({exc})") from exc
    return ExperimentSpec.from_json(data)
