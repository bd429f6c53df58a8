"""Dense linear algebra on truncated single-mode Fock spaces.

Operators are plain ``numpy`` complex arrays of shape ``(cutoff, cutoff)`` and
states are 1-D complex arrays.  Joint spaces are built with
:func:`tensor_product`, which keeps the left factor slowest-varying, so a
joint index reads ``(internal, cm, stretch)`` from most to least significant.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import reduce
from typing import Union

import numpy as np

from .errors import DimensionError, ExpmConvergenceError, TruncationError, TruncationWarning

# Largest operator that tensor_product will materialise (4096**2 complex ~ 268 MB).
MAX_OPERATOR_DIM = 4096
# Largest joint state vector.
MAX_STATE_DIM = 1 << 20

DEFAULT_CUTOFF = 64
EXPM_TOL = 1e-12

_EXPM_THETA = 0.5
_EXPM_MAX_TERMS = 40
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class FockSpace:
    """Fock levels ``|0>, ..., |cutoff-1>`` of one motional mode."""

    cutoff: int = DEFAULT_CUTOFF

    def __post_init__(self):
        if int(self.cutoff) != self.cutoff or self.cutoff < 1:
            raise ValueError(f"cutoff must be a positive integer, got {self.cutoff!r}")


SpaceLike = Union[FockSpace, int]


def _cutoff(space: SpaceLike) -> int:
    if isinstance(space, FockSpace):
        return space.cutoff
    return FockSpace(int(space)).cutoff


def annihilation_op(space: SpaceLike) -> np.ndarray:
    """Lowering operator with ``a[n-1, n] = sqrt(n)``."""
    d = _cutoff(space)
    return np.diag(np.sqrt(np.arange(1, d, dtype=float)), 1).astype(complex)


def creation_op(space: SpaceLike) -> np.ndarray:
    return annihilation_op(space).conj().T


def number_op(space: SpaceLike) -> np.ndarray:
    return np.diag(np.arange(_cutoff(space), dtype=float)).astype(complex)


def identity(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=complex)


def adjoint(op: np.ndarray) -> np.ndarray:
    return np.asarray(op).conj().T


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def basis_state(space: SpaceLike, n: int) -> np.ndarray:
    d = _cutoff(space)
    if not 0 <= n < d:
        raise ValueError(f"Fock level {n} outside cutoff {d}")
    psi = np.zeros(d, dtype=complex)
    psi[n] = 1.0
    return psi


def vacuum(space: SpaceLike) -> np.ndarray:
    return basis_state(space, 0)


def normalize(psi: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise ValueError("cannot normalise the zero vector")
    return psi / norm


def tensor_product(*factors: np.ndarray) -> np.ndarray:
    """Kronecker product of states or of operators, left factor slowest.

    All factors must be of the same kind (all 1-D or all 2-D).

    Raises
    ------
    DimensionError
        Mixed kinds, or the product exceeds ``MAX_OPERATOR_DIM`` /
        ``MAX_STATE_DIM``.
    """
    if not factors:
        raise ValueError("tensor_product needs at least one factor")
    arrays = [np.asarray(f) for f in factors]
    ndims = {a.ndim for a in arrays}
    if len(ndims) != 1 or ndims.pop() not in (1, 2):
        raise DimensionError("tensor_product operands must all be vectors or all be matrices")
    dim = math.prod(a.shape[0] for a in arrays)
    if arrays[0].ndim == 2:
        if any(a.shape[0] != a.shape[1] for a in arrays):
            raise DimensionError("operators must be square")
        if dim > MAX_OPERATOR_DIM:
            raise DimensionError(
                f"joint operator dimension {dim} exceeds MAX_OPERATOR_DIM={MAX_OPERATOR_DIM}"
            )
    elif dim > MAX_STATE_DIM:
        raise DimensionError(f"joint state dimension {dim} exceeds MAX_STATE_DIM={MAX_STATE_DIM}")
    return reduce(np.kron, arrays)


def matrix_exponential(a: np.ndarray, tol: float = EXPM_TOL) -> np.ndarray:
    """Scaling-and-squaring Taylor evaluation of ``exp(a)``.

    The matrix is scaled by ``2**-s`` until its 1-norm is at most 0.5, the
    Taylor series is summed until the remainder bound drops below
    ``tol * 2**-s`` and the result is squared ``s`` times.

    Raises
    ------
    ExpmConvergenceError
        If ``2**s`` squarings would amplify rounding beyond ``tol``, or the
        series does not meet its bound within the term budget.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"matrix_exponential needs a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix_exponential: non-finite entries")
    n = a.shape[0]
    ident = np.eye(n, dtype=complex)
    norm = np.linalg.norm(a, 1)
    if norm == 0.0:
        return ident

    s = max(0, math.ceil(math.log2(norm / _EXPM_THETA)))
    if _EPS * 2.0**s > tol:
        raise ExpmConvergenceError(
            f"1-norm {norm:.3g} needs {s} squarings; tol={tol:g} is below the rounding floor"
        )
    target = tol / 2.0**s
    b = a / 2.0**s
    bnorm = norm / 2.0**s

    result = ident.copy()
    term = ident
    for j in range(1, _EXPM_MAX_TERMS + 1):
        term = (term @ b) / j
        result += term
        remainder = bnorm ** (j + 1) / math.factorial(j + 1) / (1.0 - bnorm / (j + 2))
        if remainder <= target:
            break
    else:
        raise ExpmConvergenceError(f"Taylor series did not reach {target:.3g} in {_EXPM_MAX_TERMS} terms")

    for _ in range(s):
        result = result @ result
    if not np.all(np.isfinite(result)):
        raise ExpmConvergenceError("matrix_exponential overflowed")
    return result


def displacement_generator(space: SpaceLike, k: int, chi: complex) -> np.ndarray:
    """``chi * a_dag**k - conj(chi) * a**k`` on the truncated space."""
    if int(k) != k or k < 1:
        raise ValueError(f"sideband order k must be a positive integer, got {k!r}")
    ak = np.linalg.matrix_power(annihilation_op(space), int(k))
    return chi * ak.conj().T - np.conj(chi) * ak


def displacement_op(space: SpaceLike, k: int, chi: complex, tol: float = EXPM_TOL) -> np.ndarray:
    """Generalised displacement ``exp(chi a_dag^k - chi* a^k)``.

    ``k=1`` is the ordinary displacement, ``k=2`` the squeeze operator in the
    ``exp(xi a_dag^2 - xi* a^2)`` convention.  Orders above two work the same
    way but are experimental.  The generator is anti-Hermitian, so the
    truncated result is unitary; keep the excitation well below the cutoff.
    """
    return matrix_exponential(displacement_generator(space, k, chi), tol)


def coherent_state(space: SpaceLike, alpha: complex) -> np.ndarray:
    """Coherent state from the Poisson amplitudes, renormalised on the truncated space.

    Emits :class:`TruncationWarning` when more than 1e-10 of the population
    falls outside the cutoff.
    """
    d = _cutoff(space)
    amps = np.empty(d, dtype=complex)
    amps[0] = np.exp(-abs(alpha) ** 2 / 2)
    for n in range(1, d):
        amps[n] = amps[n - 1] * alpha / np.sqrt(n)
    norm2 = float(np.vdot(amps, amps).real)
    if 1.0 - norm2 > 1e-10:
        warnings.warn(
            f"coherent state alpha={alpha} loses {1.0 - norm2:.2e} beyond cutoff {d}",
            TruncationWarning,
            stacklevel=2,
        )
    return amps / np.sqrt(norm2)


def squeezed_vacuum_state(space: SpaceLike, xi: complex, tol: float = 1e-10) -> np.ndarray:
    """``exp(xi a_dag^2 - xi* a^2)|0>``, renormalised.

    Raises :class:`TruncationError` when the top two Fock levels hold more
    than ``tol`` of the population.
    """
    d = _cutoff(space)
    psi = displacement_op(space, 2, xi)[:, 0]
    top = float(np.sum(np.abs(psi[max(0, d - 2):]) ** 2))
    if top > tol:
        raise TruncationError(f"squeezed vacuum xi={xi} has {top:.2e} population at the cutoff {d}")
    return normalize(psi)
