"""State diagnostics: overlaps, parity, quadratures, Fock statistics, Wigner grids.

Quadratures follow ``X_theta = (a e^{-i theta} + a_dag e^{i theta}) / 2`` so
the vacuum variance is 1/4.  Phase-space points are ``alpha = x + i p`` in
the same units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import fock
from .dynamics import JointSpace
from .errors import DimensionError

WIGNER_BOUND = 2 / np.pi


def fidelity(psi: np.ndarray, phi: np.ndarray) -> float:
    """``|<psi|phi>|^2``, clipped into [0, 1]."""
    psi, phi = np.asarray(psi), np.asarray(phi)
    if psi.shape != phi.shape:
        raise DimensionError(f"fidelity of states with shapes {psi.shape} and {phi.shape}")
    return float(min(1.0, abs(np.vdot(psi, phi)) ** 2))


def parity_expectation(psi: np.ndarray) -> float:
    probs = np.abs(np.asarray(psi)) ** 2
    signs = np.where(np.arange(len(probs)) % 2 == 0, 1.0, -1.0)
    return float(signs @ probs)


def number_distribution(psi: np.ndarray) -> np.ndarray:
    return np.abs(np.asarray(psi)) ** 2


def truncation_tail(psi: np.ndarray, fraction: float = 0.25) -> float:
    """Population in the top ``fraction`` of Fock levels (at least one level)."""
    if not 0 < fraction <= 1:
        raise ValueError("fraction must lie in (0, 1]")
    probs = number_distribution(psi)
    top = max(1, math.ceil(fraction * len(probs)))
    return float(probs[-top:].sum())


def mode_distribution(joint: np.ndarray, js: JointSpace, mode: str) -> np.ndarray:
    """Marginal Fock distribution of one mode of a joint state."""
    probs = np.abs(np.asarray(joint).reshape(js.shape)) ** 2
    axis = 1 + js.mode_index(mode)
    others = tuple(i for i in range(probs.ndim) if i != axis)
    return probs.sum(axis=others)


def mode_tails(joint: np.ndarray, js: JointSpace, fraction: float = 0.25) -> dict:
    out = {}
    for name in js.mode_names:
        dist = mode_distribution(joint, js, name)
        out[name] = truncation_tail(np.sqrt(dist), fraction)
    return out


def reduced_density_matrix(joint: np.ndarray, js: JointSpace, keep: str) -> np.ndarray:
    """Partial trace keeping ``"internal"`` or one mode name."""
    joint = np.asarray(joint)
    if joint.shape != (js.dim,):
        raise DimensionError(f"joint state of shape {joint.shape} does not match dimension {js.dim}")
    x = joint.reshape(js.shape)
    axis = 0 if keep == "internal" else 1 + js.mode_index(keep)
    x = np.moveaxis(x, axis, 0).reshape(js.shape[axis], -1)
    return x @ x.conj().T


def reduced_internal_overlap(joint: np.ndarray, js: JointSpace, target_internal: np.ndarray) -> float:
    """``<target| rho_internal |target>`` with the motion traced out."""
    target = np.asarray(target_internal)
    if target.shape != (js.register.internal_dim,):
        raise DimensionError("target internal state has the wrong dimension")
    rho = reduced_density_matrix(joint, js, "internal")
    return float(np.vdot(target, rho @ target).real)


def _moments(psi: np.ndarray):
    a = fock.annihilation_op(len(psi))
    mean_a = np.vdot(psi, a @ psi)
    mean_a2 = np.vdot(psi, a @ (a @ psi))
    n = float(np.vdot(psi, fock.number_op(len(psi)) @ psi).real)
    anti = float(np.vdot(psi, (a @ a.conj().T) @ psi).real) + n  # <a a_dag + a_dag a>
    return mean_a, mean_a2, anti


def quadrature_variance(psi: np.ndarray, theta: float) -> float:
    psi = np.asarray(psi, dtype=complex)
    a = fock.annihilation_op(len(psi))
    x = (a * np.exp(-1j * theta) + a.conj().T * np.exp(1j * theta)) / 2
    xpsi = x @ psi
    mean = np.vdot(psi, xpsi).real
    return float(np.vdot(xpsi, xpsi).real - mean**2)


@dataclass(frozen=True)
class SqueezingAxes:
    theta_min: float
    var_min: float
    theta_max: float
    var_max: float


def squeezing_axes(psi: np.ndarray) -> SqueezingAxes:
    """Angles (in [0, pi)) and values of the extremal quadrature variances.

    With ``C = <a^2> - <a>^2`` and ``D = <a a_dag + a_dag a> - 2|<a>|^2`` the
    variance is ``(D + 2 Re(C e^{-2i theta})) / 4``.
    """
    mean_a, mean_a2, anti = _moments(np.asarray(psi, dtype=complex))
    c = mean_a2 - mean_a**2
    d = anti - 2 * abs(mean_a) ** 2
    theta_max = (np.angle(c) / 2) % np.pi
    return SqueezingAxes(
        theta_min=float((theta_max + np.pi / 2) % np.pi),
        var_min=float((d - 2 * abs(c)) / 4),
        theta_max=float(theta_max),
        var_max=float((d + 2 * abs(c)) / 4),
    )


def compression_exponent(psi: np.ndarray, squeeze_magnitude: float) -> float:
    """Measured ``c`` in ``sigma_min / sigma_vacuum = exp(-c |xi|)``.

    Lets callers report the compression produced by a given squeeze
    parameter without assuming a convention for it.
    """
    if squeeze_magnitude <= 0:
        raise ValueError("squeeze magnitude must be positive")
    var_min = squeezing_axes(psi).var_min
    return float(-0.5 * math.log(4 * var_min) / squeeze_magnitude)


@dataclass
class WignerGrid:
    xs: np.ndarray
    ps: np.ndarray
    values: np.ndarray  # values[i, j] at (xs[j], ps[i])
    flagged: np.ndarray  # True where the displaced state reached the cutoff

    @property
    def resolution(self) -> int:
        return len(self.xs)

    def integral(self) -> float:
        dx = self.xs[1] - self.xs[0] if len(self.xs) > 1 else 1.0
        dp = self.ps[1] - self.ps[0] if len(self.ps) > 1 else 1.0
        return float(self.values.sum() * dx * dp)


def _pure_components(state: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        return np.ones(1), state[None, :]
    w, v = np.linalg.eigh(state)
    keep = w > 1e-14
    return w[keep], v[:, keep].T


def wigner_grid(
    state: np.ndarray,
    xs: np.ndarray,
    ps: np.ndarray,
    tail_fraction: float = 0.25,
    tail_tol: float = 1e-8,
) -> WignerGrid:
    """Wigner function by displaced parity, ``W = (2/pi) <D(-alpha)^dag P D(-alpha)>``.

    ``state`` is a single-mode state vector or density matrix.  Every grid
    point is one displacement, evaluated through a single diagonalisation of
    the real generator ``a - a_dag``.  Points whose displaced state leaves
    more than ``tail_tol`` in the top Fock levels are flagged, and all values
    are clamped to ``[-2/pi, 2/pi]``.
    """
    weights, comps = _pure_components(state)
    d = comps.shape[1]
    xs = np.asarray(xs, dtype=float)
    ps = np.asarray(ps, dtype=float)
    alpha = xs[None, :] + 1j * ps[:, None]
    r = np.abs(alpha).ravel()
    theta = np.angle(alpha).ravel()

    a = fock.annihilation_op(d)
    lam, vecs = np.linalg.eigh(1j * (a - a.conj().T))
    levels = np.arange(d)
    parity = np.where(levels % 2 == 0, 1.0, -1.0)
    top = max(1, math.ceil(tail_fraction * d))

    values = np.zeros(len(r))
    tails = np.zeros(len(r))
    for w, psi in zip(weights, comps):
        # D(-alpha) = R(theta) exp(r (a - a_dag)) R(theta)^dag with R = diag(e^{i theta n});
        # the outer R only rephases Fock amplitudes.
        rotated = np.exp(-1j * np.outer(theta, levels)) * psi[None, :]
        coeffs = rotated @ vecs.conj()
        displaced = (coeffs * np.exp(-1j * np.outer(r, lam))) @ vecs.T
        probs = np.abs(displaced) ** 2
        values += w * (probs @ parity)
        tails = np.maximum(tails, probs[:, -top:].sum(axis=1))
    values = np.clip(WIGNER_BOUND * values, -WIGNER_BOUND, WIGNER_BOUND)
    shape = alpha.shape
    return WignerGrid(xs, ps, values.reshape(shape), (tails > tail_tol).reshape(shape))


def wigner_value(state: np.ndarray, alpha: complex) -> float:
    return float(wigner_grid(state, [alpha.real], [alpha.imag]).values[0, 0])
