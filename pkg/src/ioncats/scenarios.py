"""Named preparation protocols, internal-state measurement and analytic targets.

Every protocol starts from the motional vacuum, applies the closed-form
propagator for a time ``tau`` and, for the measured protocols, projects the
ions onto one basis outcome.  The result is compared with an analytic target
built from coherent and squeezed states.

Amplitude convention
--------------------
Exponentiating the Hamiltonian as ``exp(-iHt)`` gives the Jx eigenvalue ``m``
the displacement ``-m (2i eta^k Omega / k!) tau``, the negative of the
textbook ``alpha = i eta Omega tau`` labelling.  All target families are
symmetric under ``alpha -> -alpha`` up to relabelling the branches, so
:func:`reference_state` uses the propagator's sign by default and offers
``convention="literal"`` for the literal labels.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace
from typing import Callable, Sequence

import numpy as np

from . import fock
from .analysis import fidelity, mode_tails, reduced_internal_overlap
from .dynamics import (
    DriveConfig,
    JointSpace,
    evolve,
    propagator_closed_form,
    stretch_lamb_dicke,
    tetrachromatic_drives,
)
from .errors import DegenerateOutcomeError, TruncationError
from .spin import IonRegister, format_bitstring, internal_state, jx_product_eigenstate, parse_bitstring

TAIL_BOUND = 1e-10
MIN_PROBABILITY = 1e-14

# Jx eigenvectors of two spins, coefficients on (dd, du, ud, uu).
PHI = {
    1: np.array([1, 1, 1, 1]) / 2,
    2: np.array([1, -1, -1, 1]) / 2,
    3: np.array([1, 1, -1, -1]) / 2,
    4: np.array([1, -1, 1, -1]) / 2,
}


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    n_ions: int = 1
    k: int = 1
    eta: float = 0.1
    rabi: float = 1.0
    rabi_r: float = 1.0
    tau: float = 2.0
    cutoffs: tuple = (fock.DEFAULT_CUTOFF,)
    initial: str = "d"
    outcome: str | None = None

    def params(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "name"}
        out["cutoffs"] = list(self.cutoffs)
        return out


@dataclass
class MeasurementRecord:
    outcome: str
    probability: float
    post_state: np.ndarray


@dataclass
class ScenarioResult:
    spec: ScenarioSpec
    space: JointSpace
    drives: list
    joint_state: np.ndarray
    target_state: np.ndarray  # post-measurement state for measured protocols
    measurement: MeasurementRecord | None
    tails: dict
    reference_fidelity: float
    wall_time: float
    diagnostics: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ScenarioDef:
    description: str
    two_mode: bool
    defaults: dict
    target: Callable
    free: tuple = ()  # parameters besides eta/rabi/rabi_r/tau/cutoffs a caller may change


def drives_for(spec: ScenarioSpec) -> list[DriveConfig]:
    if len(spec.cutoffs) == 2:
        return tetrachromatic_drives(spec.k, spec.eta, spec.rabi, spec.rabi_r)
    return [DriveConfig(spec.k, spec.eta, spec.rabi, "cm")]


def joint_space(spec: ScenarioSpec) -> JointSpace:
    return JointSpace.build(spec.n_ions, spec.cutoffs)


def amplitude(spec: ScenarioSpec, mode: str, m: float, convention: str = "propagator") -> complex:
    """Displacement (or squeeze) amplitude of the branch with Jx eigenvalue ``m``."""
    drive = {d.mode: d for d in drives_for(spec)}[mode]
    literal = m * 1j * drive.coupling * spec.tau
    if convention == "literal":
        return literal
    if convention == "propagator":
        return -literal
    raise ValueError(f"unknown amplitude convention {convention!r}")


def _motional(spec: ScenarioSpec, amps: Sequence[complex]) -> np.ndarray:
    if spec.k == 1:
        parts = [fock.coherent_state(c, a) for c, a in zip(spec.cutoffs, amps)]
    else:
        parts = [fock.squeezed_vacuum_state(c, a) for c, a in zip(spec.cutoffs, amps)]
    return fock.tensor_product(*parts)


def _vac2(spec):
    return fock.tensor_product(*[fock.vacuum(c) for c in spec.cutoffs])


def _normalised(vec: np.ndarray) -> np.ndarray:
    norm2 = float(np.vdot(vec, vec).real)
    if norm2 < MIN_PROBABILITY:
        raise DegenerateOutcomeError("reference state vanishes for these amplitudes")
    return vec / np.sqrt(norm2)


def _single_ion_amps(spec, conv):
    return amplitude(spec, "cm", 0.5, conv)


def _two_mode_amps(spec, conv):
    return amplitude(spec, "cm", 1.0, conv), amplitude(spec, "stretch", 1.0, conv)


def _cat(spec, conv):
    # (|+>|a> + |->|-a>)/sqrt(2); the squeezed variant has the same shape.
    a = _single_ion_amps(spec, conv)
    plus = jx_product_eigenstate(IonRegister(1), "+")[0]
    minus = jx_product_eigenstate(IonRegister(1), "-")[0]
    return (np.kron(plus, _motional(spec, [a])) + np.kron(minus, _motional(spec, [-a]))) / np.sqrt(2)


def _even_odd(spec, conv):
    a = _single_ion_amps(spec, conv)
    sign = 1 if spec.outcome == "d" else -1
    return fock.coherent_state(spec.cutoffs[0], a) + sign * fock.coherent_state(spec.cutoffs[0], -a)


def _squeeze_only(spec, conv):
    reg = IonRegister(spec.n_ions)
    s, m = jx_product_eigenstate(reg, spec.initial)
    return np.kron(s, _motional(spec, [amplitude(spec, "cm", m, conv)]))


def _four_component(spec, conv):
    a, b = _two_mode_amps(spec, conv)
    ab, mab, vac = _motional(spec, [a, b]), _motional(spec, [-a, -b]), _vac2(spec)
    return (np.kron(PHI[1], ab) + np.kron(PHI[2], mab) + np.kron(PHI[3], vac) + np.kron(PHI[4], vac)) / 2


def _bell(spec, conv):
    a, b = _two_mode_amps(spec, conv)
    return (np.kron(PHI[1], _motional(spec, [a, b])) + np.kron(PHI[2], _motional(spec, [-a, -b]))) / np.sqrt(2)


def _ecs(sign):
    def build(spec, conv):
        a, b = _two_mode_amps(spec, conv)
        return _motional(spec, [a, b]) + sign * _motional(spec, [-a, -b])

    return build


def _sleepy(spec, conv):
    a, b = _two_mode_amps(spec, conv)
    sign = 1 if spec.outcome == "dd" else -1
    return _motional(spec, [a, b]) + _motional(spec, [-a, -b]) + sign * 2 * _vac2(spec)


_ONE = {"n_ions": 1, "k": 1, "tau": 2.0, "cutoffs": (64,), "initial": "d"}
_TWO = {"n_ions": 2, "k": 1, "tau": 2.0, "cutoffs": (64, 64), "initial": "dd"}

CATALOG: dict[str, ScenarioDef] = {
    "single_ion_cat": ScenarioDef("one ion, first sidebands: (|+>|a> + |->|-a>)/sqrt2", False, _ONE, _cat),
    "even_odd_cat": ScenarioDef(
        "single_ion_cat then detect d (even cat) or u (odd cat)",
        False,
        {**_ONE, "outcome": "d"},
        _even_odd,
        ("outcome",),
    ),
    "entangled_squeezed": ScenarioDef(
        "one ion, second sidebands: (|+>|xi> + |->|-xi>)/sqrt2", False, {**_ONE, "k": 2, "tau": 5.0}, _cat
    ),
    "squeeze_only": ScenarioDef(
        "Jx eigenstate input: squeezing without entangling the ions",
        False,
        {**_ONE, "k": 2, "tau": 5.0, "initial": "+"},
        _squeeze_only,
        ("n_ions", "initial"),
    ),
    "two_ion_four_component": ScenarioDef(
        "two ions, CM + stretch drives from |dd>|00>", True, _TWO, _four_component
    ),
    "entangled_coherent_minus": ScenarioDef(
        "four-component state, detect du or ud: |a,b> - |-a,-b>",
        True,
        {**_TWO, "outcome": "du"},
        _ecs(-1),
        ("outcome",),
    ),
    "entangled_coherent_plus": ScenarioDef(
        "Bell input, detect dd: |a,b> + |-a,-b>",
        True,
        {**_TWO, "initial": "bell_pp", "outcome": "dd"},
        _ecs(+1),
        ("outcome",),
    ),
    "sleepy_cat": ScenarioDef(
        "four-component state, detect dd (+) or uu (-): |a,b> + |-a,-b> +- 2|00>",
        True,
        {**_TWO, "outcome": "dd"},
        _sleepy,
        ("outcome",),
    ),
    "bell_initialized": ScenarioDef(
        "Bell input (|dd> + |uu>)/sqrt2 under CM + stretch drives",
        True,
        {**_TWO, "initial": "bell_pp"},
        _bell,
    ),
}

_TUNABLE = ("eta", "rabi", "rabi_r", "tau", "cutoffs")
_MEASURED_OUTCOMES = {
    "even_odd_cat": ("d", "u"),
    "entangled_coherent_minus": ("du", "ud"),
    "entangled_coherent_plus": ("dd", "uu", "du", "ud"),
    "sleepy_cat": ("dd", "uu"),
}


def make_spec(name: str, **overrides) -> ScenarioSpec:
    """Catalog defaults for ``name`` with validated overrides."""
    if name not in CATALOG:
        raise ValueError(f"unknown scenario {name!r}; choose from {sorted(CATALOG)}")
    entry = CATALOG[name]
    allowed = set(_TUNABLE) | set(entry.free)
    unknown = set(overrides) - allowed
    if unknown:
        raise ValueError(f"scenario {name!r} does not accept {sorted(unknown)}")
    params = {**entry.defaults, **overrides}
    params["cutoffs"] = tuple(int(c) for c in np.atleast_1d(params["cutoffs"]))
    if len(params["cutoffs"]) == 1 and entry.two_mode:
        params["cutoffs"] = params["cutoffs"] * 2
    spec = ScenarioSpec(name=name, **params)
    validate_spec(spec)
    return spec


def validate_spec(spec: ScenarioSpec) -> None:
    entry = CATALOG.get(spec.name)
    if entry is None:
        raise ValueError(f"unknown scenario {spec.name!r}")
    if spec.tau < 0:
        raise ValueError("tau must be non-negative")
    if spec.eta <= 0:
        raise ValueError("eta must be positive")
    if entry.two_mode:
        if spec.n_ions != 2 or len(spec.cutoffs) != 2:
            raise ValueError(f"{spec.name} needs two ions and two cutoffs")
        if spec.k != 1:
            raise ValueError(f"{spec.name} is defined for first sidebands only")
    elif len(spec.cutoffs) != 1:
        raise ValueError(f"{spec.name} drives a single mode")
    if spec.name == "squeeze_only" and (spec.k != 2 or set(spec.initial) - {"+", "-"}):
        raise ValueError("squeeze_only needs k=2 and a +/- sign-pattern initial state")
    if spec.name in _MEASURED_OUTCOMES and spec.outcome not in _MEASURED_OUTCOMES[spec.name]:
        raise ValueError(f"{spec.name} accepts outcomes {_MEASURED_OUTCOMES[spec.name]}, got {spec.outcome!r}")
    if spec.name not in _MEASURED_OUTCOMES and spec.outcome is not None:
        raise ValueError(f"{spec.name} does not measure the ions")
    IonRegister(spec.n_ions)
    internal_state(IonRegister(spec.n_ions), spec.initial)


def reference_components(spec: ScenarioSpec, convention: str = "propagator") -> np.ndarray:
    """The analytic target before normalisation."""
    validate_spec(spec)
    return CATALOG[spec.name].target(spec, convention)


def reference_state(spec: ScenarioSpec, convention: str = "propagator") -> np.ndarray:
    return _normalised(reference_components(spec, convention))


def initial_state(spec: ScenarioSpec) -> np.ndarray:
    reg = IonRegister(spec.n_ions)
    return np.kron(internal_state(reg, spec.initial), _vac2(spec))


def measure_internal(joint: np.ndarray, js: JointSpace, outcome: str) -> MeasurementRecord:
    """Project the ions onto a basis outcome; return its probability and the motional state.

    Raises
    ------
    DegenerateOutcomeError
        If the outcome probability is below 1e-14.
    """
    joint = np.asarray(joint, dtype=complex)
    if joint.shape != (js.dim,):
        raise ValueError(f"joint state of shape {joint.shape} does not match dimension {js.dim}")
    row = joint.reshape(js.register.internal_dim, js.motional_dim)[parse_bitstring(js.register, outcome)]
    prob = float(np.vdot(row, row).real)
    if prob < MIN_PROBABILITY:
        raise DegenerateOutcomeError(f"outcome {outcome!r} has probability {prob:.3e}")
    return MeasurementRecord(outcome, min(prob, 1.0), row / np.sqrt(prob))


def outcome_probabilities(joint: np.ndarray, js: JointSpace) -> dict:
    rows = np.asarray(joint).reshape(js.register.internal_dim, js.motional_dim)
    probs = np.sum(np.abs(rows) ** 2, axis=1)
    return {format_bitstring(js.register, i): float(p) for i, p in enumerate(probs)}


def run_scenario(spec: ScenarioSpec, tail_bound: float = TAIL_BOUND) -> ScenarioResult:
    """Prepare, evolve for ``spec.tau``, optionally measure, and score against the target.

    Raises
    ------
    ValueError
        Invalid spec.
    TruncationError
        Any mode keeps more than ``tail_bound`` in its top quarter of levels.
    """
    validate_spec(spec)
    start = time.perf_counter()
    js = joint_space(spec)
    drives = drives_for(spec)
    psi0 = initial_state(spec)
    u = propagator_closed_form(js, drives, spec.tau)
    joint = evolve(psi0, u)
    tails = mode_tails(joint, js)
    worst = max(tails.values())
    if worst > tail_bound:
        raise TruncationError(f"truncation tail {worst:.2e} exceeds {tail_bound:g}; raise the cutoffs")

    record = measure_internal(joint, js, spec.outcome) if spec.outcome else None
    target = record.post_state if record else joint
    fid = fidelity(target, reference_state(spec))

    diagnostics = {}
    if record:
        diagnostics["probability"] = record.probability
    if spec.name == "squeeze_only":
        s, m = jx_product_eigenstate(js.register, spec.initial)
        diagnostics["m"] = m
        diagnostics["internal_overlap"] = reduced_internal_overlap(joint, js, s)
        diagnostics["squeezing_generated"] = m != 0
    return ScenarioResult(
        spec=spec,
        space=js,
        drives=drives,
        joint_state=joint,
        target_state=target,
        measurement=record,
        tails=tails,
        reference_fidelity=fid,
        wall_time=time.perf_counter() - start,
        diagnostics=diagnostics,
    )


def squeeze_only(spec: ScenarioSpec) -> ScenarioResult:
    """Squeeze the CM mode while the ions stay in one Jx eigenstate.

    A zero-eigenvalue input generates no squeezing; this is reported through
    ``diagnostics["squeezing_generated"]`` rather than raised.
    """
    if spec.name != "squeeze_only":
        spec = replace(spec, name="squeeze_only")
    return run_scenario(spec)


def run_batch(specs: Sequence[ScenarioSpec], max_workers: int | None = None) -> list[ScenarioResult]:
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(run_scenario, specs))


def scenario_schema(name: str) -> dict:
    entry = CATALOG[name]
    tunable = set(_TUNABLE) | set(entry.free)
    schema = {}
    for key, value in entry.defaults.items():
        schema[key] = {"default": list(value) if isinstance(value, tuple) else value, "tunable": key in tunable}
    for key in ("eta", "rabi", "rabi_r"):
        schema[key] = {"default": getattr(ScenarioSpec, key), "tunable": True}
    if name in _MEASURED_OUTCOMES:
        schema["outcome"]["choices"] = list(_MEASURED_OUTCOMES[name])
    return schema


def two_mode_literal_amplitudes(spec: ScenarioSpec) -> tuple[complex, complex]:
    """``(2i eta Omega tau, 2i eta_r Omega_r tau)`` as written for the two-ion protocols."""
    return 2j * spec.eta * spec.rabi * spec.tau, 2j * stretch_lamb_dicke(spec.eta) * spec.rabi_r * spec.tau
