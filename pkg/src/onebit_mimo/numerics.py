"""
Dense complex linear algebra and seeded random sampling.

Matrices and vectors are plain ``numpy.ndarray`` objects of dtype
``complex128``. Every function here is pure given its inputs and the
explicit :class:`RngStream`; nothing keeps module-level state.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.linalg import lapack

__all__ = [
    "NumericsError",
    "DomainError",
    "IllConditionedError",
    "SvdConvergenceError",
    "RngStream",
    "derive_stream_id",
    "as_generator",
    "is_hermitian",
    "svd",
    "svd_factored",
    "hermitian_solve",
    "elementwise_arcsine_map",
    "sample_complex_gaussian",
]

#: Relative tolerance (w.r.t. max |entry|) used for Hermitian checks.
HERMITIAN_RTOL = 1e-10
#: Normalized arcsine arguments within this distance of +-1 are clamped.
ARCSINE_CLAMP_TOL = 1e-9
#: Largest admissible 1-norm condition estimate in :func:`hermitian_solve`.
MAX_CONDITION = 1e12


class NumericsError(ArithmeticError):
    """Base class for numerical failures raised by this package."""


class DomainError(NumericsError, ValueError):
    """Input outside the mathematical domain of an operation."""


class IllConditionedError(NumericsError):
    """A Hermitian system is numerically singular."""


class SvdConvergenceError(NumericsError):
    """LAPACK's SVD driver failed to converge."""


# xxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxx
# xxxxx Random streams xxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxx
# xxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxx
def derive_stream_id(*parts) -> int:
    """
    Hash an arbitrary tuple of labels into a 64-bit stream id.

    The hash is stable across processes and Python versions (unlike the
    builtin ``hash``), so ``derive_stream_id("grid", 3, 17, "noise")``
    always names the same substream.
    """
    text = "\x1f".join(repr(p) for p in parts).encode()
    return int.from_bytes(hashlib.blake2b(text, digest_size=8).digest(), "little")


@dataclass
class RngStream:
    """
    A reproducible random stream identified by ``(seed, stream_id)``.

    Two streams with equal ``(seed, stream_id)`` yield bitwise-identical
    sequences; distinct ids are mapped through numpy's ``SeedSequence``
    spawn mechanism, which gives statistically independent PCG64 streams.

    Examples
    --------
    >>> a = RngStream(7, 1).generator.standard_normal(3)
    >>> b = RngStream(7, 1).generator.standard_normal(3)
    >>> bool((a == b).all())
    True
    """

    seed: int
    stream_id: int = 0
    _gen: np.random.Generator | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            value = getattr(self, name)
            if not 0 <= int(value) < 2**64:
                raise ValueError(f"{name} must be a 64-bit unsigned integer, got {value}")

    @property
    def generator(self) -> np.random.Generator:
        if self._gen is None:
            ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_id),))
            self._gen = np.random.Generator(np.random.PCG64(ss))
        return self._gen

    @classmethod
    def for_task(cls, seed: int, *parts) -> "RngStream":
        """Stream for a labelled task, e.g. ``for_task(seed, grid, rep, "channel")``."""
        return cls(seed, derive_stream_id(*parts))

    def spawn(self, *parts) -> "RngStream":
        """Child stream keyed by this stream's id plus extra labels."""
        return RngStream(self.seed, derive_stream_id(self.stream_id, *parts))


def as_generator(rng) -> np.random.Generator:
    """Accept an :class:`RngStream`, a ``Generator`` or an int seed."""
    if isinstance(rng, RngStream):
        return rng.generator
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None or isinstance(rng, (int, np.integer)):
        return np.random.default_rng(rng)
    raise TypeError(f"cannot build a random generator from {type(rng).__name__}")


# xxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxx
# xxxxx Linear algebra xxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxx
# xxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxx
def is_hermitian(A: np.ndarray, rtol: float = HERMITIAN_RTOL) -> bool:
    """Entrywise ``A == A^H`` check relative to the largest entry magnitude."""
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        return False
    scale = np.max(np.abs(A)) if A.size else 0.0
    if scale == 0.0:
        return True
    return bool(np.max(np.abs(A - A.conj().T)) <= rtol * scale)


def _fix_column_phase(V: np.ndarray, U: np.ndarray | None = None):
    # make the largest-magnitude entry of each column of V real-positive
    idx = np.argmax(np.abs(V), axis=0)
    pivots = V[idx, np.arange(V.shape[1])]
    mags = np.abs(pivots)
    phase = np.where(mags > 0, pivots / np.where(mags > 0, mags, 1.0), 1.0)
    V = V * phase.conj()
    if U is not None:
        U = U * phase.conj()
    return V, U


def svd(A: np.ndarray, full_matrices: bool = False):
    """
    Singular value decomposition ``A = U @ diag(s) @ V^H``.

    Parameters
    ----------
    A : ndarray, shape (m, n)
        Finite complex (or real) matrix.
    full_matrices : bool
        Return square ``U`` and ``V`` instead of the thin factors.

    Returns
    -------
    U : ndarray, shape (m, k)
    s : ndarray, shape (k,)
        Singular values in descending order.
    V : ndarray, shape (n, k)
        Right singular vectors as *columns* (not ``V^H``). Each column's
        largest-magnitude entry is real-positive and ``U`` carries the
        matching phase, so the output does not depend on the LAPACK build.

    Raises
    ------
    DomainError
        Non-finite input.
    SvdConvergenceError
        The divide-and-conquer driver (``gesdd``) and the fallback QR
        iteration driver (``gesvd``) both failed. Iteration caps are
        LAPACK's own (``30 * n`` sweeps for the bidiagonal QR step).
    """
    A = np.asarray(A, dtype=complex)
    if not np.all(np.isfinite(A)):
        raise DomainError("svd: input contains non-finite entries")
    try:
        U, s, Vh = scipy.linalg.svd(A, full_matrices=full_matrices, lapack_driver="gesdd")
    except np.linalg.LinAlgError:
        try:
            U, s, Vh = scipy.linalg.svd(A, full_matrices=full_matrices, lapack_driver="gesvd")
        except np.linalg.LinAlgError as exc:
            raise SvdConvergenceError(f"svd of {A.shape} matrix did not converge") from exc
    V = Vh.conj().T
    k = len(s)
    V_k, U_k = _fix_column_phase(V[:, :k], U[:, :k])
    V = np.concatenate([V_k, V[:, k:]], axis=1)
    U = np.concatenate([U_k, U[:, k:]], axis=1)
    return U, s, V


def svd_factored(left: np.ndarray, right: np.ndarray):
    """
    Thin SVD of ``A = left @ right^H`` without forming ``A``.

    For ``left`` of shape (m, p) and ``right`` of shape (n, p) the cost is
    O((m + n) p^2) instead of O(m n min(m, n)); this is what makes the
    1600-antenna geometric channel (p = 100 paths) cheap to precode.
    The returned factors follow the same conventions as :func:`svd` and
    have ``min(m, n, p)`` columns.
    """
    left = np.asarray(left, dtype=complex)
    right = np.asarray(right, dtype=complex)
    if left.shape[1] != right.shape[1]:
        raise ValueError("svd_factored: inner dimensions differ")
    if not (np.all(np.isfinite(left)) and np.all(np.isfinite(right))):
        raise DomainError("svd_factored: input contains non-finite entries")
    Ql, Rl = scipy.linalg.qr(left, mode="economic")
    Qr, Rr = scipy.linalg.qr(right, mode="economic")
    Uc, s, Vc = svd(Rl @ Rr.conj().T)
    k = min(left.shape[0], right.shape[0], left.shape[1])
    U = Ql @ Uc[:, :k]
    V = Qr @ Vc[:, :k]
    V, U = _fix_column_phase(V, U)
    return U, s[:k], V


def hermitian_solve(A: np.ndarray, B: np.ndarray, name: str = "A") -> np.ndarray:
    """
    Solve ``A X = B`` for Hermitian positive definite ``A`` via Cholesky.

    Parameters
    ----------
    A : ndarray, shape (n, n)
    B : ndarray, shape (n,) or (n, k)
    name : str
        Label used in error messages (e.g. ``"C_r_tilde"``).

    Raises
    ------
    IllConditionedError
        ``A`` is not numerically positive definite, or its 1-norm
        condition estimate exceeds ``1e12``.
    """
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"hermitian_solve: {name} must be square, got {A.shape}")
    if B.shape[0] != A.shape[0]:
        raise ValueError(f"hermitian_solve: {name} is {A.shape}, right-hand side is {B.shape}")
    try:
        c, lower = scipy.linalg.cho_factor(A, lower=False, check_finite=True)
    except np.linalg.LinAlgError as exc:
        raise IllConditionedError(f"{name} is not positive definite (Cholesky failed)") from exc
    anorm = np.max(np.sum(np.abs(A), axis=0))
    rcond, info = lapack.zpocon(c, anorm)
    if info != 0 or rcond * MAX_CONDITION < 1.0:
        cond = np.inf if rcond == 0 else 1.0 / rcond
        raise IllConditionedError(f"{name} is numerically singular (condition estimate {cond:.3g} > {MAX_CONDITION:g})")
    return scipy.linalg.cho_solve((c, lower), B)


def elementwise_arcsine_map(C: np.ndarray) -> np.ndarray:
    """
    Arcsine law kernel of a Hermitian covariance.

    Returns ``arcsin(D^-1/2 Re[C] D^-1/2) + 1j * arcsin(D^-1/2 Im[C] D^-1/2)``
    with ``D = Diag(C)``. Scaled by ``2 * eta / pi`` this is the covariance
    of the 1-bit quantized version of a zero-mean circular Gaussian vector
    with covariance ``C``.

    Normalized arguments within ``1e-9`` of the unit interval are clamped;
    larger excursions mean ``C`` is not PSD and raise :class:`DomainError`.

    >>> elementwise_arcsine_map(np.eye(2)).real.round(6)
    array([[1.570796, 0.      ],
           [0.      , 1.570796]])
    """
    C = np.asarray(C, dtype=complex)
    d = np.real(np.diagonal(C))
    if np.any(d <= 0) or not np.all(np.isfinite(d)):
        raise DomainError("arcsine map: diagonal entries must be strictly positive")
    inv = 1.0 / np.sqrt(d)
    X = C * np.outer(inv, inv)
    # arcsin is infinitely steep at 1: a rounding error of 1e-16 on the unit
    # diagonal would move the output by 1e-8, so pin it exactly
    X[np.diag_indices_from(X)] = 1.0
    re, im = X.real, X.imag
    worst = max(np.max(np.abs(re)), np.max(np.abs(im)))
    if worst > 1.0 + ARCSINE_CLAMP_TOL:
        raise DomainError(f"arcsine map: normalized entry of magnitude {worst:.12g} exceeds 1 (input not PSD)")
    out = np.arcsin(np.clip(re, -1.0, 1.0)) + 1j * np.arcsin(np.clip(im, -1.0, 1.0))
    # the real rail is even and the imaginary rail odd in the transposition,
    # so symmetrizing only removes rounding asymmetry of the input
    return 0.5 * (out + out.conj().T)


def sample_complex_gaussian(rng, length: int, covariance: np.ndarray | None = None,
                            draws: int | None = None) -> np.ndarray:
    """
    Draw circularly-symmetric complex Gaussian vectors.

    Parameters
    ----------
    rng : RngStream or numpy Generator
    length : int
        Vector length.
    covariance : ndarray, shape (length, length), optional
        Hermitian PSD covariance. Identity when omitted.
    draws : int, optional
        If given, return ``draws`` independent vectors as the columns of a
        ``(length, draws)`` array.
    """
    gen = as_generator(rng)
    shape = (length,) if draws is None else (length, draws)
    z = (gen.standard_normal(shape) + 1j * gen.standard_normal(shape)) * np.sqrt(0.5)
    if covariance is None:
        return z
    C = np.asarray(covariance, dtype=complex)
    if C.shape != (length, length):
        raise ValueError(f"covariance must be {length}x{length}, got {C.shape}")
    if not is_hermitian(C):
        raise DomainError("covariance is not Hermitian")
    w, Q = np.linalg.eigh(0.5 * (C + C.conj().T))
    scale = max(np.max(np.abs(w)), 0.0) if w.size else 0.0
    if w.size and np.min(w) < -1e-10 * max(scale, 1e-300):
        raise DomainError(f"covariance is not PSD (smallest eigenvalue {np.min(w):.3g})")
    root = Q * np.sqrt(np.clip(w, 0.0, None))
    return root @ z
