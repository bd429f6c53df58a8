"""Internal (pseudo-spin) space of an ion register.

Basis ordering is fixed: ion 1 is the most significant bit, ``|d> -> 0`` and
``|u> -> 1``.  Outcome bitstrings use the letters ``d`` and ``u``
(``"du"`` is ion 1 down, ion 2 up).  Jx product eigenstates are labelled by
sign strings over ``+``/``-``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import reduce
from typing import Iterator, Sequence, Union

import numpy as np

MAX_IONS = 10

_SIGMA_PLUS = np.array([[0, 0], [1, 0]], dtype=complex)  # |u><d| in (d, u) order
_HADAMARD = np.array([[1, 1], [1, -1]], dtype=float) / np.sqrt(2)

SignsLike = Union[str, Sequence[int]]


@dataclass(frozen=True)
class IonRegister:
    n_ions: int

    def __post_init__(self):
        if int(self.n_ions) != self.n_ions or not 1 <= self.n_ions <= MAX_IONS:
            raise ValueError(f"n_ions must be an integer in [1, {MAX_IONS}], got {self.n_ions!r}")

    @property
    def internal_dim(self) -> int:
        return 2**self.n_ions


@dataclass(frozen=True)
class JxEigenlabel:
    signs: tuple
    m: float

    def __str__(self):
        return "".join("+" if s > 0 else "-" for s in self.signs)


def parse_bitstring(register: IonRegister, outcome: str) -> int:
    """Index of the computational basis state named by a ``d``/``u`` string."""
    if not isinstance(outcome, str) or len(outcome) != register.n_ions or set(outcome) - {"d", "u"}:
        raise ValueError(
            f"outcome must be a string of {register.n_ions} characters from 'd'/'u', got {outcome!r}"
        )
    return int(outcome.replace("d", "0").replace("u", "1"), 2)


def format_bitstring(register: IonRegister, index: int) -> str:
    if not 0 <= index < register.internal_dim:
        raise ValueError(f"basis index {index} out of range")
    return format(index, f"0{register.n_ions}b").replace("0", "d").replace("1", "u")


def all_bitstrings(register: IonRegister) -> list[str]:
    return [format_bitstring(register, i) for i in range(register.internal_dim)]


def parse_signs(register: IonRegister, signs: SignsLike) -> tuple:
    if isinstance(signs, str):
        if set(signs) - {"+", "-"}:
            raise ValueError(f"sign string may only contain '+' and '-', got {signs!r}")
        values = tuple(1 if c == "+" else -1 for c in signs)
    else:
        values = tuple(int(s) for s in signs)
        if any(s not in (1, -1) for s in values):
            raise ValueError(f"signs must be +1 or -1, got {signs!r}")
    if len(values) != register.n_ions:
        raise ValueError(f"expected {register.n_ions} signs, got {len(values)}")
    return values


def _embed(register: IonRegister, j: int, op: np.ndarray) -> np.ndarray:
    if not 1 <= j <= register.n_ions:
        raise IndexError(f"ion index {j} outside 1..{register.n_ions}")
    factors = [np.eye(2, dtype=complex)] * register.n_ions
    factors[j - 1] = op
    return reduce(np.kron, factors)


def flip_ops(register: IonRegister, j: int) -> tuple[np.ndarray, np.ndarray]:
    """``(sigma_plus_j, sigma_minus_j)`` for ion ``j`` (1-based)."""
    up = _embed(register, j, _SIGMA_PLUS)
    return up, up.conj().T


def collective_spin_ops(register: IonRegister) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Collective ``(Jx, Jy, Jz)``.

    ``Jx = sum(s+ + s-)/2``, ``Jy = sum(s+ - s-)/(2i)`` and ``Jz`` is half the
    population difference ``|u><u| - |d><d|`` summed over ions.
    """
    dim = register.internal_dim
    jx = np.zeros((dim, dim), dtype=complex)
    jy = np.zeros((dim, dim), dtype=complex)
    jz = np.zeros((dim, dim), dtype=complex)
    half_z = np.diag([-0.5, 0.5]).astype(complex)
    for j in range(1, register.n_ions + 1):
        up, down = flip_ops(register, j)
        jx += (up + down) / 2
        jy += (up - down) / 2j
        jz += _embed(register, j, half_z)
    return jx, jy, jz


def sign_patterns(register: IonRegister) -> Iterator[tuple]:
    """All sign patterns in basis order of :func:`jx_product_basis` (``+`` before ``-``)."""
    return itertools.product((1, -1), repeat=register.n_ions)


def jx_product_eigenstate(register: IonRegister, signs: SignsLike) -> tuple[np.ndarray, float]:
    """Product state ``(x)_j (|d> + s_j|u>)/sqrt(2)`` and its Jx eigenvalue ``sum(s)/2``."""
    values = parse_signs(register, signs)
    factors = [np.array([1.0, s], dtype=complex) / np.sqrt(2) for s in values]
    return reduce(np.kron, factors), sum(values) / 2


def jx_product_basis(register: IonRegister) -> tuple[np.ndarray, np.ndarray]:
    """Columns are the Jx product eigenstates in :func:`sign_patterns` order.

    Returns the real orthogonal basis matrix and the matching eigenvalues.
    """
    basis = reduce(np.kron, [_HADAMARD] * register.n_ions)
    ms = np.array([sum(s) / 2 for s in sign_patterns(register)])
    return basis, ms


def jx_labels(register: IonRegister) -> list[JxEigenlabel]:
    return [JxEigenlabel(s, sum(s) / 2) for s in sign_patterns(register)]


def internal_projector(register: IonRegister, outcome: str) -> np.ndarray:
    idx = parse_bitstring(register, outcome)
    proj = np.zeros((register.internal_dim,) * 2, dtype=complex)
    proj[idx, idx] = 1.0
    return proj


def internal_state(register: IonRegister, label: str) -> np.ndarray:
    """Internal state from a label.

    Accepts a ``d``/``u`` bitstring, a ``+``/``-`` sign string, or
    ``bell_pp`` for ``(|dd..d> + |uu..u>)/sqrt(2)``.
    """
    dim = register.internal_dim
    if label == "bell_pp":
        psi = np.zeros(dim, dtype=complex)
        psi[0] = psi[-1] = 1 / np.sqrt(2)
        return psi
    if label and set(label) <= {"+", "-"}:
        return jx_product_eigenstate(register, label)[0]
    psi = np.zeros(dim, dtype=complex)
    psi[parse_bitstring(register, label)] = 1.0
    return psi
