"""
Channel matrices for the point-to-point link.

Two generators are provided:

* :func:`generate_physical_channel` -- a discrete physical (geometric)
  channel between two square uniform planar arrays, built as a sum of
  ``P`` planar-wave paths scattered by one cluster between broadsides
  that face each other.
* :func:`generate_iid_channel` -- i.i.d. CN(0, 1) entries, used by the
  validation suites.

Both return a :class:`ChannelRealization`. For geometric channels the
realization also keeps the rank-``P`` factorization ``H = L @ R^H``, which
downstream code uses to avoid O(N^3) work at N = 1600.

Conventions
-----------
Antenna ``(p, q)`` of a ``side x side`` array sits at ``spacing * (p, q)``
wavelengths and is stored at flat index ``p * side + q``.

Two angle conventions are supported by :func:`upa_steering_vector`:

``"broadside"`` (default)
    Azimuth and elevation are both deviations from the array normal; the
    direction cosines along ``p`` and ``q`` are ``cos(el) sin(az)`` and
    ``sin(el)``. An angle spread in both coordinates then covers a
    two-dimensional patch of directions around broadside.
``"spherical"``
    Elevation is the polar angle measured from the normal and azimuth the
    rotation about it: direction cosines ``sin(el) cos(az)`` and
    ``sin(el) sin(az)``.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .numerics import RngStream, as_generator

__all__ = [
    "ArrayGeometry",
    "ScattererCluster",
    "ChannelRealization",
    "DEFAULT_CLUSTER",
    "upa_steering_vector",
    "upa_steering_matrix",
    "draw_cluster_angles",
    "generate_physical_channel",
    "generate_iid_channel",
    "dump_channel",
    "load_channel",
]

CONVENTIONS = ("broadside", "spherical")


@dataclass(frozen=True)
class ArrayGeometry:
    """Square ``side x side`` uniform planar array."""

    side: int
    spacing: float = 0.5

    def __post_init__(self):
        if int(self.side) != self.side or self.side < 1:
            raise ValueError(f"array side must be a positive integer, got {self.side}")
        if self.spacing <= 0:
            raise ValueError("antenna spacing must be positive")

    @property
    def count(self) -> int:
        return self.side * self.side

    @classmethod
    def square(cls, antennas: int, spacing: float = 0.5) -> "ArrayGeometry":
        """Geometry with ``antennas`` elements; ``antennas`` must be a perfect square."""
        side = int(round(np.sqrt(antennas)))
        if side * side != antennas:
            raise ValueError(f"{antennas} antennas cannot form a square planar array")
        return cls(side, spacing)


@dataclass(frozen=True)
class ScattererCluster:
    """
    A scatterer cluster seen from both arrays.

    ``azimuth_spread`` and ``elevation_spread`` are the *full widths* of
    the angular intervals, centred on ``center = (azimuth, elevation)``.
    """

    path_count: int = 100
    azimuth_spread: float = np.pi / 3
    elevation_spread: float = np.pi / 3
    center: tuple = (0.0, 0.0)

    def __post_init__(self):
        if self.path_count < 1:
            raise ValueError("a cluster needs at least one path")
        if self.azimuth_spread <= 0 or self.elevation_spread <= 0:
            raise ValueError("angle spreads must be positive")


#: Default scatterer geometry: 100 paths, angles within
#: pi/6 of broadside in azimuth and elevation (full width pi/3).
DEFAULT_CLUSTER = ScattererCluster(100, np.pi / 3, np.pi / 3, (0.0, 0.0))


@dataclass
class ChannelRealization:
    """
    One draw of the ``M x N`` channel matrix and what produced it.

    ``factors``, when present, is a pair ``(L, R)`` with ``H = L @ R^H``.
    """

    H: np.ndarray
    geometry_tx: ArrayGeometry | None = None
    geometry_rx: ArrayGeometry | None = None
    cluster: ScattererCluster | None = None
    seed_record: tuple = (None, None)
    factors: tuple | None = field(default=None, repr=False)
    model: str = "iid"
    convention: str | None = None

    @property
    def shape(self):
        return self.H.shape

    @property
    def M(self) -> int:
        return self.H.shape[0]

    @property
    def N(self) -> int:
        return self.H.shape[1]

    def matmul(self, X: np.ndarray) -> np.ndarray:
        """``H @ X``, through the low-rank factors when they are cheaper."""
        if self.factors is not None:
            L, R = self.factors
            if L.shape[1] < min(self.M, self.N):
                return L @ (R.conj().T @ X)
        return self.H @ X

    def sandwich(self, C: np.ndarray) -> np.ndarray:
        """``H @ C @ H^H`` for Hermitian ``C``; returned exactly Hermitian."""
        if self.factors is not None:
            L, R = self.factors
            if L.shape[1] < min(self.M, self.N):
                core = R.conj().T @ C @ R
                out = L @ core @ L.conj().T
                return 0.5 * (out + out.conj().T)
        HC = self.H @ C
        out = HC @ self.H.conj().T
        return 0.5 * (out + out.conj().T)


def as_channel(H) -> ChannelRealization:
    """Wrap a bare matrix so it can be used where a realization is expected."""
    if isinstance(H, ChannelRealization):
        return H
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2:
        raise ValueError(f"channel must be a matrix, got shape {H.shape}")
    return ChannelRealization(H=H, model="given")


def _direction_cosines(azimuth, elevation, convention):
    if convention == "broadside":
        return np.cos(elevation) * np.sin(azimuth), np.sin(elevation)
    if convention == "spherical":
        return np.sin(elevation) * np.cos(azimuth), np.sin(elevation) * np.sin(azimuth)
    raise ValueError(f"unknown angle convention {convention!r}; expected one of {CONVENTIONS}")


def upa_steering_matrix(geometry: ArrayGeometry, azimuth, elevation,
                        convention: str = "broadside") -> np.ndarray:
    """Steering vectors for many directions, stacked as columns (``side^2 x P``)."""
    azimuth = np.atleast_1d(np.asarray(azimuth, dtype=float))
    elevation = np.atleast_1d(np.asarray(elevation, dtype=float))
    u, v = _direction_cosines(azimuth, elevation, convention)
    grid = np.arange(geometry.side)
    p = np.repeat(grid, geometry.side)
    q = np.tile(grid, geometry.side)
    phase = 2 * np.pi * geometry.spacing * (np.outer(p, u) + np.outer(q, v))
    return np.exp(1j * phase)


def upa_steering_vector(geometry: ArrayGeometry, azimuth: float, elevation: float,
                        convention: str = "broadside") -> np.ndarray:
    """
    Far-field response of a square UPA to a planar wave.

    Entry ``p * side + q`` is ``exp(2j pi spacing (p u + q v))`` where
    ``(u, v)`` are the direction cosines of ``(azimuth, elevation)`` under
    ``convention`` (see the module docstring). All entries have unit
    magnitude and broadside ``(0, 0)`` gives the all-ones vector.
    """
    return upa_steering_matrix(geometry, azimuth, elevation, convention)[:, 0]


def draw_cluster_angles(rng, cluster: ScattererCluster) -> np.ndarray:
    """
    Draw ``path_count`` (azimuth, elevation) pairs, i.i.d. uniform over
    ``center +- spread / 2`` in each coordinate.

    Returns an array of shape ``(path_count, 2)``.
    """
    gen = as_generator(rng)
    P = cluster.path_count
    az = cluster.center[0] + cluster.azimuth_spread * (gen.random(P) - 0.5)
    el = cluster.center[1] + cluster.elevation_spread * (gen.random(P) - 0.5)
    return np.column_stack([az, el])


def _seed_record(rng):
    if isinstance(rng, RngStream):
        return (rng.seed, rng.stream_id)
    return (None, None)


def generate_physical_channel(rng, geo_tx: ArrayGeometry, geo_rx: ArrayGeometry,
                              cluster: ScattererCluster = DEFAULT_CLUSTER,
                              N: int | None = None, M: int | None = None,
                              convention: str = "broadside") -> ChannelRealization:
    """
    Discrete physical channel between two UPAs.

    ``H = P^-1/2 * sum_p g_p a_rx(theta_p^rx) a_tx(theta_p^tx)^H`` with path
    gains ``g_p ~ CN(0, 1)`` and independent transmit/receive angle draws
    per path. Since steering entries have unit magnitude,
    ``E|H_mn|^2 = 1`` without per-realization rescaling.

    Draw order from ``rng`` is fixed: transmit angles, receive angles,
    then path gains.
    """
    if N is not None and N != geo_tx.count:
        raise ValueError(f"transmit array has {geo_tx.count} antennas, N = {N} requested")
    if M is not None and M != geo_rx.count:
        raise ValueError(f"receive array has {geo_rx.count} antennas, M = {M} requested")
    gen = as_generator(rng)
    P = cluster.path_count
    ang_tx = draw_cluster_angles(gen, cluster)
    ang_rx = draw_cluster_angles(gen, cluster)
    gains = (gen.standard_normal(P) + 1j * gen.standard_normal(P)) * np.sqrt(0.5)
    A_tx = upa_steering_matrix(geo_tx, ang_tx[:, 0], ang_tx[:, 1], convention)
    A_rx = upa_steering_matrix(geo_rx, ang_rx[:, 0], ang_rx[:, 1], convention)
    L = A_rx * (gains / np.sqrt(P))
    H = L @ A_tx.conj().T
    return ChannelRealization(
        H=H,
        geometry_tx=geo_tx,
        geometry_rx=geo_rx,
        cluster=cluster,
        seed_record=_seed_record(rng),
        factors=(L, A_tx),
        model="physical",
        convention=convention,
    )


def generate_iid_channel(rng, M: int, N: int) -> ChannelRealization:
    """``M x N`` channel with i.i.d. CN(0, 1) entries."""
    if M < 1 or N < 1:
        raise ValueError("channel dimensions must be positive")
    gen = as_generator(rng)
    H = (gen.standard_normal((M, N)) + 1j * gen.standard_normal((M, N))) * np.sqrt(0.5)
    return ChannelRealization(H=H, seed_record=_seed_record(rng), model="iid")


# Binary dump: little-endian header then M*N complex entries in row-major
# order as interleaved float64 (re, im).
_MAGIC = b"H1BCHAN1"
_HEADER = struct.Struct("<8sQQQQ")  # magic, M, N, seed, stream_id
_NO_SEED = 2**64 - 1


def dump_channel(realization: ChannelRealization, path) -> None:
    """Write ``realization.H`` to ``path`` in the documented binary layout."""
    M, N = realization.H.shape
    seed, stream = realization.seed_record
    header = _HEADER.pack(_MAGIC, M, N,
                          _NO_SEED if seed is None else int(seed),
                          _NO_SEED if stream is None else int(stream))
    body = np.ascontiguousarray(realization.H, dtype="<c16").tobytes()
    path = Path(path)
    try:
        path.write_bytes(header + body)
    except OSError as exc:
        raise OSError(f"cannot write channel dump {path}: {exc}") from exc


def load_channel(path) -> ChannelRealization:
    """Read a file produced by :func:`dump_channel`."""
    data = Path(path).read_bytes()
    magic, M, N, seed, stream = _HEADER.unpack_from(data)
    if magic != _MAGIC:
        raise ValueError(f"{path}: not a channel dump (bad magic)")
    body = data[_HEADER.size:]
    if len(body) != 16 * M * N:
        raise ValueError(f"{path}: expected {16 * M * N} payload bytes, found {len(body)}")
    H = np.frombuffer(body, dtype="<c16").reshape(M, N).astype(complex)
    record = (None if seed == _NO_SEED else seed, None if stream == _NO_SEED else stream)
    return ChannelRealization(H=H, seed_record=record, model="loaded")
