"""Sideband-driven evolution of an ion register coupled to one or two modes.

The effective interaction is

    H = sum_drives (2 eta^k Omega / k!) Jx (c^k + c_dag^k)

with hbar = 1.  Two propagators are provided:

* :func:`propagator_numerical` exponentiates an assembled Hamiltonian, and
  :class:`DriveFactoredPropagator` does the same drive by drive (the drive
  terms commute) for joint spaces too large to hold as one dense matrix;
* :func:`propagator_closed_form` builds one conditional displacement per Jx
  product eigenstate, ``U = sum_s |s><s| (x) prod_modes D_k(-i g m(s) t)``.

The closed form is fixed by ``exp(-iHt)``; its displacement amplitude is the
negative of ``m * (2i eta^k Omega / k!) * t``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import fock
from .errors import DimensionError, TruncationError, TruncationWarning
from .fock import FockSpace
from .spin import IonRegister, collective_spin_ops, jx_product_basis

MODE_NAMES = ("cm", "stretch")
STRETCH_FREQUENCY_RATIO = math.sqrt(3.0)
NORM_TOL = 1e-10


def lamb_dicke_cm(q: float, m_ion: float, nu: float, n_ions: int, hbar: float = 1.0) -> float:
    """CM-mode Lamb-Dicke parameter ``q sqrt(hbar / (2 N m nu))``."""
    if min(q, m_ion, nu, n_ions, hbar) <= 0:
        raise ValueError("lamb_dicke_cm inputs must all be positive")
    return q * math.sqrt(hbar / (2.0 * n_ions * m_ion * nu))


def stretch_lamb_dicke(eta: float) -> float:
    """Stretch-mode Lamb-Dicke parameter for two ions, ``eta / 3**(1/4)``."""
    return eta * 3.0**-0.25


@dataclass(frozen=True)
class TrapConfig:
    nu: float
    n_ions: int
    q: float | None = None
    m_ion: float | None = None
    hbar: float = 1.0

    def __post_init__(self):
        if self.nu <= 0:
            raise ValueError("trap frequency must be positive")
        IonRegister(self.n_ions)

    @property
    def nu_r(self) -> float:
        return STRETCH_FREQUENCY_RATIO * self.nu

    def lamb_dicke(self) -> float:
        if self.q is None or self.m_ion is None:
            raise ValueError("q and m_ion are needed to derive the Lamb-Dicke parameter")
        return lamb_dicke_cm(self.q, self.m_ion, self.nu, self.n_ions, self.hbar)


@dataclass(frozen=True)
class DriveConfig:
    """Bichromatic k-th sideband drive on one mode.

    ``rabi`` is the single-field coupling; :attr:`coupling` is the prefactor
    ``2 eta^k rabi / k!`` multiplying ``Jx (c^k + c_dag^k)``.
    """

    k: int
    eta: float
    rabi: float
    mode: str = "cm"

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"sideband order must be a positive integer, got {self.k!r}")
        if self.eta <= 0:
            raise ValueError("Lamb-Dicke parameter must be positive")
        if self.mode not in MODE_NAMES:
            raise ValueError(f"mode must be one of {MODE_NAMES}, got {self.mode!r}")

    @property
    def coupling(self) -> float:
        return 2.0 * self.eta**self.k * self.rabi / math.factorial(self.k)

    def chi(self, m: float, t: float) -> complex:
        """Conditional displacement amplitude for Jx eigenvalue ``m`` after time ``t``."""
        return -1j * self.coupling * m * t


def tetrachromatic_drives(k: int, eta: float, rabi: float, rabi_r: float) -> list[DriveConfig]:
    return [
        DriveConfig(k, eta, rabi, "cm"),
        DriveConfig(k, stretch_lamb_dicke(eta), rabi_r, "stretch"),
    ]


@dataclass(frozen=True)
class JointSpace:
    """``internal (x) cm [(x) stretch]``, internal index slowest."""

    register: IonRegister
    modes: tuple = (FockSpace(),)

    def __post_init__(self):
        modes = tuple(FockSpace(m) if isinstance(m, int) else m for m in self.modes)
        object.__setattr__(self, "modes", modes)
        if not 1 <= len(modes) <= 2:
            raise ValueError("a joint space carries one (cm) or two (cm, stretch) modes")
        if len(modes) == 2 and self.register.n_ions < 2:
            raise ValueError("a single ion has no stretch mode")

    @classmethod
    def build(cls, n_ions: int, cutoffs: Sequence[int]) -> "JointSpace":
        return cls(IonRegister(n_ions), tuple(FockSpace(c) for c in cutoffs))

    @property
    def cutoffs(self) -> tuple:
        return tuple(m.cutoff for m in self.modes)

    @property
    def motional_dim(self) -> int:
        return math.prod(self.cutoffs)

    @property
    def dim(self) -> int:
        return self.register.internal_dim * self.motional_dim

    @property
    def shape(self) -> tuple:
        return (self.register.internal_dim, *self.cutoffs)

    @property
    def mode_names(self) -> tuple:
        return MODE_NAMES[: len(self.modes)]

    def mode_index(self, name: str) -> int:
        if name not in self.mode_names:
            raise ValueError(f"mode {name!r} not present in joint space {self.mode_names}")
        return self.mode_names.index(name)

    def column_index(self, internal: int, *levels: int) -> int:
        return int(np.ravel_multi_index((internal, *levels), self.shape))


def _check_drives(js: JointSpace, drives: Sequence[DriveConfig]) -> None:
    if not drives:
        raise ValueError("at least one drive is required")
    seen = set()
    for d in drives:
        js.mode_index(d.mode)
        if d.mode in seen:
            raise ValueError(f"mode {d.mode!r} driven twice")
        seen.add(d.mode)


def _quadrature_power(space: FockSpace, k: int) -> np.ndarray:
    ak = np.linalg.matrix_power(fock.annihilation_op(space), k)
    return ak + ak.conj().T


def drive_hamiltonian(register: IonRegister, space: FockSpace, drive: DriveConfig) -> np.ndarray:
    """One drive term on ``internal (x) driven mode`` only."""
    jx = collective_spin_ops(register)[0]
    return drive.coupling * fock.tensor_product(jx, _quadrature_power(space, drive.k))


def effective_hamiltonian(js: JointSpace, drives: Sequence[DriveConfig]) -> np.ndarray:
    """Dense effective Hamiltonian on the whole joint space."""
    _check_drives(js, drives)
    jx = collective_spin_ops(js.register)[0]
    h = None
    for d in drives:
        factors = [fock.identity(c) for c in js.cutoffs]
        factors[js.mode_index(d.mode)] = _quadrature_power(js.modes[js.mode_index(d.mode)], d.k)
        term = d.coupling * fock.tensor_product(jx, *factors)
        h = term if h is None else h + term
    return h


def propagator_numerical(h: np.ndarray, t: float, tol: float = fock.EXPM_TOL) -> np.ndarray:
    """``exp(-i h t)`` by dense matrix exponential."""
    return fock.matrix_exponential(-1j * t * np.asarray(h), tol)


def _as_columns(psi: np.ndarray, dim: int) -> tuple[np.ndarray, bool]:
    psi = np.asarray(psi, dtype=complex)
    if psi.shape[0] != dim or psi.ndim not in (1, 2):
        raise DimensionError(f"state of shape {psi.shape} does not match joint dimension {dim}")
    return (psi[:, None], True) if psi.ndim == 1 else (psi, False)


@dataclass
class ConditionalPropagator:
    """Closed-form propagator stored as one displacement per distinct Jx eigenvalue.

    ``blocks[m]`` holds the per-mode unitaries for eigenvalue ``m``.  The
    object never materialises the joint matrix unless :meth:`to_dense` is
    called.
    """

    js: JointSpace
    basis: np.ndarray
    ms: np.ndarray
    blocks: dict = field(default_factory=dict)

    def _mode_ops(self, p: int) -> tuple:
        return self.blocks[float(self.ms[p])]

    @property
    def is_identity(self) -> bool:
        return all(np.array_equal(op, np.eye(len(op))) for ops in self.blocks.values() for op in ops)

    def apply(self, psi: np.ndarray) -> np.ndarray:
        """Apply to a state or to a ``(dim, B)`` block of column vectors."""
        if self.is_identity:
            _as_columns(psi, self.js.dim)
            return np.array(psi, dtype=complex)
        cols, squeeze = _as_columns(psi, self.js.dim)
        nb = cols.shape[1]
        x = cols.reshape(self.js.register.internal_dim, -1)
        # Rotate the internal index into the Jx product basis (real orthogonal).
        x = (self.basis.T @ x).reshape(self.js.register.internal_dim, *self.js.cutoffs, nb)
        out = np.empty_like(x)
        for p in range(len(self.ms)):
            y = x[p]
            ops = self._mode_ops(p)
            y = np.tensordot(ops[0], y, axes=(1, 0))
            if len(ops) == 2:
                y = np.moveaxis(np.tensordot(ops[1], y, axes=(1, 1)), 0, 1)
            out[p] = y
        out = (self.basis @ out.reshape(self.js.register.internal_dim, -1)).reshape(self.js.dim, nb)
        return out[:, 0] if squeeze else out

    def columns(self, indices: Sequence[int]) -> np.ndarray:
        """Selected columns ``U[:, indices]`` without forming ``U``.

        The result is a transposed view of a C-ordered ``(len(indices), dim)``
        array, so ``columns(idx).T`` is contiguous.
        """
        indices = np.asarray(indices, dtype=int)
        coords = np.unravel_index(indices, self.js.shape)
        nb, nint = len(indices), self.js.register.internal_dim
        weights = self.basis[coords[0], :]  # <p|c> for each column, shape (B, P)
        z = np.empty((nb, nint, self.js.motional_dim), dtype=complex)
        for p in range(nint):
            ops = self._mode_ops(p)
            vec = ops[0][:, coords[1]].T * weights[:, p, None]  # (B, d1)
            if len(ops) == 2:
                vec = (vec[:, :, None] * ops[1][:, coords[2]].T[:, None, :]).reshape(nb, -1)
            z[:, p] = vec
        # rotate the Jx-basis index back onto the computational internal basis
        return np.matmul(self.basis, z).reshape(nb, self.js.dim).T

    def to_dense(self) -> np.ndarray:
        if self.js.dim > fock.MAX_OPERATOR_DIM:
            raise DimensionError(f"joint dimension {self.js.dim} too large to materialise")
        u = np.zeros((self.js.dim, self.js.dim), dtype=complex)
        for p in range(len(self.ms)):
            proj = np.outer(self.basis[:, p], self.basis[:, p])
            u += fock.tensor_product(proj, *self._mode_ops(p))
        return u


def propagator_closed_form(
    js: JointSpace,
    drives: Sequence[DriveConfig],
    t: float,
    tail_fraction: float = 0.25,
    tail_tol: float = 1e-10,
) -> ConditionalPropagator:
    """Conditional-displacement propagator for duration ``t``.

    Warns with :class:`TruncationWarning` if the vacuum image of any
    displacement leaves more than ``tail_tol`` in the top ``tail_fraction``
    of its Fock levels.
    """
    _check_drives(js, drives)
    basis, ms = jx_product_basis(js.register)
    by_mode = {d.mode: d for d in drives}
    blocks = {}
    for m in sorted(set(ms.tolist())):
        ops = []
        for name, space in zip(js.mode_names, js.modes):
            d = by_mode.get(name)
            if d is None:
                ops.append(fock.identity(space.cutoff))
                continue
            op = fock.displacement_op(space, d.k, d.chi(m, t))
            top = max(1, math.ceil(tail_fraction * space.cutoff))
            leak = float(np.sum(np.abs(op[-top:, 0]) ** 2))
            if leak > tail_tol:
                warnings.warn(
                    f"displacement for m={m} on mode {name} leaks {leak:.2e} into the top Fock levels",
                    TruncationWarning,
                    stacklevel=2,
                )
            ops.append(op)
        blocks[float(m)] = tuple(ops)
    return ConditionalPropagator(js, basis, ms, blocks)


@dataclass
class DriveFactoredPropagator:
    """``exp(-iHt)`` as a product of per-drive dense exponentials.

    The drive terms share the ``Jx`` factor and act on different modes, so
    they commute and ``exp(-i(H1 + H2)t) = exp(-i H1 t) exp(-i H2 t)``.  Each
    factor is a brute-force exponential of an assembled matrix on
    ``internal (x) mode``.
    """

    js: JointSpace
    factors: dict  # mode name -> dense unitary on internal (x) that mode

    def _factor(self, name: str) -> np.ndarray:
        d = self.js.cutoffs[self.js.mode_index(name)]
        return self.factors.get(name, fock.identity(self.js.register.internal_dim * d))

    def apply(self, psi: np.ndarray) -> np.ndarray:
        cols, squeeze = _as_columns(psi, self.js.dim)
        nb = cols.shape[1]
        nint = self.js.register.internal_dim
        x = cols.reshape(*self.js.shape, nb)
        d1 = self.js.cutoffs[0]
        u1 = self._factor("cm").reshape(nint, d1, nint, d1)
        x = np.tensordot(u1, x, axes=([2, 3], [0, 1]))
        if len(self.js.modes) == 2:
            d2 = self.js.cutoffs[1]
            u2 = self._factor("stretch").reshape(nint, d2, nint, d2)
            x = np.moveaxis(np.tensordot(u2, x, axes=([2, 3], [0, 2])), 1, 2)
        out = x.reshape(self.js.dim, nb)
        return out[:, 0] if squeeze else out

    def columns(self, indices: Sequence[int]) -> np.ndarray:
        """Selected columns; like :meth:`ConditionalPropagator.columns` the result is a transposed view."""
        indices = np.asarray(indices, dtype=int)
        if len(self.js.modes) == 1:
            return np.ascontiguousarray(self._factor("cm")[:, indices].T).T
        nint = self.js.register.internal_dim
        d1, d2 = self.js.cutoffs
        u1 = self._factor("cm").reshape(nint * d1, nint, d1)
        u2 = self._factor("stretch").reshape(nint, d2, nint, d2)
        c, n1, n2 = np.unravel_index(indices, self.js.shape)
        # stretch factor on a basis column is a column pick; the cm factor then
        # contracts over the intermediate internal index.
        left = np.moveaxis(u1[:, :, n1], 2, 0)  # (B, nint*d1, nint)
        right = np.moveaxis(u2[:, :, c, n2], 2, 0)  # (B, nint, d2)
        return (left @ right).reshape(len(indices), -1).T


def propagator_drive_factored(
    js: JointSpace, drives: Sequence[DriveConfig], t: float, tol: float = fock.EXPM_TOL
) -> DriveFactoredPropagator:
    _check_drives(js, drives)
    factors = {}
    for d in drives:
        space = js.modes[js.mode_index(d.mode)]
        factors[d.mode] = propagator_numerical(drive_hamiltonian(js.register, space, d), t, tol)
    return DriveFactoredPropagator(js, factors)


def evolve(state: np.ndarray, u, tol: float = NORM_TOL) -> np.ndarray:
    """Apply a propagator (dense matrix or propagator object) to a state.

    Raises
    ------
    DimensionError
        Shapes disagree.
    TruncationError
        The norm changes by more than ``tol``.
    """
    state = np.asarray(state, dtype=complex)
    if hasattr(u, "apply"):
        out = u.apply(state)
    else:
        u = np.asarray(u)
        if u.ndim != 2 or u.shape[1] != state.shape[0]:
            raise DimensionError(f"operator {u.shape} cannot act on state of length {state.shape[0]}")
        out = u @ state
    before, after = np.linalg.norm(state), np.linalg.norm(out)
    if abs(after - before) > tol:
        raise TruncationError(f"norm changed from {before:.15f} to {after:.15f}")
    return out
