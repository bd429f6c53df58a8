"""Self-check suite behind ``ioncats verify``.

Each check compares the simulator against an independent route: dense
``exp(-iHt)`` for the propagator, analytic overlaps and index-level
projections for the prepared states.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

import numpy as np

from . import fock
from .analysis import fidelity, parity_expectation, squeezing_axes
from .dynamics import (
    DriveConfig,
    DriveFactoredPropagator,
    JointSpace,
    drive_hamiltonian,
    effective_hamiltonian,
    propagator_closed_form,
    propagator_numerical,
    tetrachromatic_drives,
)
from .scenarios import (
    amplitude,
    drives_for,
    joint_space,
    make_spec,
    measure_internal,
    reference_components,
    reference_state,
    run_scenario,
)
from .spin import IonRegister, jx_product_eigenstate


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    tolerance: float
    detail: str = ""
    figures: dict = field(default_factory=dict)


def column_deficits(u_a, u_b, indices, chunk: int = 64) -> tuple[float, float]:
    """Largest per-column fidelity deficit and largest entry difference."""
    worst_def, worst_diff = 0.0, 0.0
    for start in range(0, len(indices), chunk):
        idx = indices[start : start + chunk]
        a, b = u_a.columns(idx).T, u_b.columns(idx).T  # one row per column
        ac = a.conj()
        overlap = np.abs(np.einsum("ij,ij->i", ac, b)) ** 2
        norms = np.einsum("ij,ij->i", ac, a).real * np.einsum("ij,ij->i", b.conj(), b).real
        worst_def = max(worst_def, float(np.max(1 - overlap / norms)))
        worst_diff = max(worst_diff, float(np.max(np.abs(a - b))))
    return worst_def, worst_diff


class _Dense:
    def __init__(self, u):
        self.u = u

    def columns(self, idx):
        return self.u[:, idx]


def low_columns(js: JointSpace, nmax: int) -> np.ndarray:
    ranges = [range(js.register.internal_dim)] + [range(min(nmax, c - 1) + 1) for c in js.cutoffs]
    return np.array([js.column_index(*c) for c in itertools.product(*ranges)])


def propagator_sweep(
    cutoff: int = 64,
    nmax: int = 16,
    ions=(1, 2, 3),
    orders=(1, 2),
    taus=(0.5, 2.0, 5.0),
    eta: float = 0.1,
    rabi: float = 1.0,
    rabi_r: float = 1.0,
) -> list[dict]:
    """Closed form against brute-force exponentials over a parameter grid.

    Single-mode cases exponentiate the assembled Hamiltonian.  Two-mode cases
    (two or more ions) exponentiate each assembled drive term and multiply,
    which is exact because the terms commute.
    """
    rows = []
    for n_ions, k, tau in itertools.product(ions, orders, taus):
        reg = IonRegister(n_ions)
        cm = DriveConfig(k, eta, rabi, "cm")
        js1 = JointSpace.build(n_ions, (cutoff,))
        u_cm = propagator_numerical(effective_hamiltonian(js1, [cm]), tau)
        closed = propagator_closed_form(js1, [cm], tau)
        dfc, diff = column_deficits(closed, _Dense(u_cm), low_columns(js1, nmax))
        rows.append({"n_ions": n_ions, "k": k, "tau": tau, "modes": 1, "deficit": dfc, "max_diff": diff})
        if n_ions < 2:
            continue
        drives = tetrachromatic_drives(k, eta, rabi, rabi_r)
        js2 = JointSpace.build(n_ions, (cutoff, cutoff))
        u_r = propagator_numerical(drive_hamiltonian(reg, fock.FockSpace(cutoff), drives[1]), tau)
        numerical = DriveFactoredPropagator(js2, {"cm": u_cm, "stretch": u_r})
        closed = propagator_closed_form(js2, drives, tau)
        dfc, diff = column_deficits(closed, numerical, low_columns(js2, nmax))
        rows.append({"n_ions": n_ions, "k": k, "tau": tau, "modes": 2, "deficit": dfc, "max_diff": diff})
    return rows


def projection_oracle(joint: np.ndarray, n_ions: int, motional_dim: int, outcome: str) -> float:
    """Outcome probability by decoding every joint index bit by bit."""
    total = 0.0
    for index, amp in enumerate(joint):
        internal = index // motional_dim
        bits = "".join("u" if (internal >> (n_ions - 1 - j)) & 1 else "d" for j in range(n_ions))
        if bits == outcome:
            total += abs(amp) ** 2
    return total


def coherent_gram_norm2(coeffs, amplitudes) -> float:
    """``||sum_i c_i |a_i, b_i>||^2`` from analytic coherent-state overlaps."""
    total = 0.0 + 0.0j
    for (ci, (ai, bi)), (cj, (aj, bj)) in itertools.product(zip(coeffs, amplitudes), repeat=2):
        ov = np.exp(
            -(abs(ai) ** 2 + abs(aj) ** 2 + abs(bi) ** 2 + abs(bj) ** 2) / 2
            + np.conj(ai) * aj
            + np.conj(bi) * bj
        )
        total += np.conj(ci) * cj * ov
    return float(total.real)


def jx_branch(joint: np.ndarray, js: JointSpace, signs: str) -> np.ndarray:
    """Normalised motional state conditioned on a Jx product eigenstate."""
    s = jx_product_eigenstate(js.register, signs)[0]
    branch = s.conj() @ np.asarray(joint).reshape(js.register.internal_dim, -1)
    return branch / np.linalg.norm(branch)


def scenario_figures(cutoff: int = 64) -> dict:
    """Figures of merit behind criteria 2-9, at one cutoff."""
    c1, c2 = (cutoff,), (cutoff, cutoff)
    f = {}
    f["cat_fidelity"] = run_scenario(make_spec("single_ion_cat", cutoffs=c1)).reference_fidelity

    for outcome in ("d", "u"):
        r = run_scenario(make_spec("even_odd_cat", cutoffs=c1, outcome=outcome))
        psi = r.target_state
        f[f"parity_{outcome}"] = parity_expectation(psi)
        wrong = psi[1::2] if outcome == "d" else psi[0::2]
        f[f"wrong_parity_population_{outcome}"] = float(np.sum(np.abs(wrong) ** 2))
        f[f"probability_{outcome}"] = r.measurement.probability

    for label, rabi in (("default", 1.0), ("strong", 10.0)):
        r = run_scenario(make_spec("entangled_squeezed", cutoffs=c1, rabi=rabi))
        js = r.space
        axes = {}
        for s in ("+", "-"):
            branch = jx_branch(r.joint_state, js, s)
            f[f"odd_population_{label}{s}"] = float(np.sum(np.abs(branch[1::2]) ** 2))
            axes[s] = squeezing_axes(branch)
            f[f"uncertainty_product_{label}{s}"] = axes[s].var_min * axes[s].var_max
        f[f"axis_gap_{label}"] = float((axes["+"].theta_min - axes["-"].theta_min) % np.pi)

    r = run_scenario(make_spec("squeeze_only", cutoffs=c1))
    f["squeeze_only_overlap"] = r.diagnostics["internal_overlap"]

    four = run_scenario(make_spec("two_ion_four_component", cutoffs=c2))
    f["four_component_fidelity"] = four.reference_fidelity

    js = four.space
    a, b = amplitude_pair(four.spec)
    big = 2 * abs(a) ** 2 + 2 * abs(b) ** 2
    for name, outcome, source in (
        ("minus", "du", four.joint_state),
        ("minus_ud", "ud", four.joint_state),
    ):
        spec = make_spec("entangled_coherent_minus", cutoffs=c2, outcome=outcome)
        rec = measure_internal(source, js, outcome)
        f[f"ecs_{name}_fidelity"] = fidelity(rec.post_state, reference_state(spec))
        f[f"ecs_{name}_probability"] = rec.probability
        f[f"ecs_{name}_oracle_probability"] = projection_oracle(source, 2, js.motional_dim, outcome)
    bell = run_scenario(make_spec("bell_initialized", cutoffs=c2))
    plus_spec = make_spec("entangled_coherent_plus", cutoffs=c2)
    rec_plus = measure_internal(bell.joint_state, js, "dd")
    f["ecs_plus_fidelity"] = fidelity(rec_plus.post_state, reference_state(plus_spec))
    f["ecs_plus_probability"] = rec_plus.probability
    f["ecs_plus_oracle_probability"] = projection_oracle(bell.joint_state, 2, js.motional_dim, "dd")
    minus_vec = reference_components(make_spec("entangled_coherent_minus", cutoffs=c2))
    plus_vec = reference_components(plus_spec)
    f["ecs_minus_norm2"] = float(np.vdot(minus_vec, minus_vec).real)
    f["ecs_minus_norm2_formula"] = 2 * (1 - np.exp(-big))
    f["ecs_plus_norm2"] = float(np.vdot(plus_vec, plus_vec).real)
    f["ecs_plus_norm2_formula"] = 2 * (1 + np.exp(-big))
    post_minus = measure_internal(four.joint_state, js, "du").post_state
    f["ecs_overlap"] = abs(np.vdot(post_minus, rec_plus.post_state))

    for label, overrides in (
        ("default", {}),
        ("equal", {"rabi_r": 3.0**0.25}),
        ("long", {"tau": 3.0, "rabi_r": 0.5}),
    ):
        for outcome, sign in (("dd", 1), ("uu", -1)):
            spec = make_spec("sleepy_cat", cutoffs=c2, outcome=outcome, **overrides)
            vec = reference_components(spec)
            aa = amplitude_pair(spec)
            gram = coherent_gram_norm2([1, 1, 2 * sign], [aa, (-aa[0], -aa[1]), (0, 0)])
            f[f"sleepy_N_{label}_{outcome}"] = 1 / np.sqrt(np.vdot(vec, vec).real)
            f[f"sleepy_N_oracle_{label}_{outcome}"] = 1 / np.sqrt(gram)
            f[f"sleepy_fidelity_{label}_{outcome}"] = run_scenario(spec).reference_fidelity

    probs = {o: projection_oracle(bell.joint_state, 2, js.motional_dim, o) for o in ("du", "ud", "uu")}
    f["bell_p_du"], f["bell_p_ud"] = probs["du"], probs["ud"]
    rec_uu = measure_internal(bell.joint_state, js, "uu")
    f["bell_uu_vs_minus_fidelity"] = fidelity(
        rec_uu.post_state, reference_state(make_spec("entangled_coherent_minus", cutoffs=c2))
    )
    f["bell_fidelity"] = bell.reference_fidelity
    return f


def amplitude_pair(spec) -> tuple[complex, complex]:
    return amplitude(spec, "cm", 1.0), amplitude(spec, "stretch", 1.0)


def unitarity_deviation(spec) -> float:
    """``max |U^dag U - I|`` over columns with every mode level at most cutoff/2."""
    js = joint_space(spec)
    u = propagator_closed_form(js, drives_for(spec), spec.tau)
    nint = js.register.internal_dim
    subs = [np.arange(c // 2 + 1) for c in js.cutoffs]
    worst = 0.0
    # U^dag U = sum_p |p><p| (x) prod_modes D_p^dag D_p because the Jx basis is orthonormal.
    grams = {m: [(op.conj().T @ op)[np.ix_(s, s)] for op, s in zip(ops, subs)] for m, ops in u.blocks.items()}
    eye = np.eye(int(np.prod([len(s) for s in subs])))
    for c, cp in itertools.product(range(nint), repeat=2):
        acc = -eye if c == cp else np.zeros_like(eye)
        for p in range(nint):
            w = u.basis[c, p] * u.basis[cp, p]
            if w == 0:
                continue
            g = grams[float(u.ms[p])]
            acc = acc + w * (np.kron(g[0], g[1]) if len(g) == 2 else g[0])
        worst = max(worst, float(np.max(np.abs(acc))))
    return worst


def run_checks(deep: bool = False, cutoff: int = 64) -> list[Check]:
    checks = []
    start = time.perf_counter()
    rows = propagator_sweep(cutoff=cutoff)
    elapsed = time.perf_counter() - start
    worst = max(r["deficit"] for r in rows)
    checks.append(
        Check(
            "1 propagator equivalence",
            worst < 1e-8 and elapsed < 60,
            worst,
            1e-8,
            f"{len(rows)} cases, max entry diff {max(r['max_diff'] for r in rows):.1e}, {elapsed:.1f}s",
        )
    )

    f = scenario_figures(cutoff)
    checks.append(Check("2 cat state", 1 - f["cat_fidelity"] <= 1e-8, 1 - f["cat_fidelity"], 1e-8))

    dev = max(abs(f["parity_d"] - 1), abs(f["parity_u"] + 1))
    wrong = max(f["wrong_parity_population_d"], f["wrong_parity_population_u"])
    checks.append(Check("3 even/odd cats", dev <= 1e-10 and wrong < 1e-12, dev, 1e-10, f"opposite parity {wrong:.1e}"))

    odd = max(v for k, v in f.items() if k.startswith("odd_population"))
    prod = max(abs(v - 1 / 16) for k, v in f.items() if k.startswith("uncertainty_product"))
    gap = max(abs(f[f"axis_gap_{x}"] - np.pi / 2) for x in ("default", "strong"))
    checks.append(
        Check(
            "4 entangled squeezing",
            odd < 1e-12 and prod <= 1e-8 and gap <= 1e-6,
            prod,
            1e-8,
            f"odd population {odd:.1e}, axis gap error {gap:.1e}",
        )
    )

    dev = abs(f["squeeze_only_overlap"] - 1)
    checks.append(Check("5 squeeze without entanglement", dev <= 1e-10, dev, 1e-10))

    dfc = 1 - f["four_component_fidelity"]
    checks.append(Check("6 four-component cat", dfc <= 1e-8, dfc, 1e-8))

    worst7 = max(
        1 - f["ecs_minus_fidelity"],
        1 - f["ecs_minus_ud_fidelity"],
        1 - f["ecs_plus_fidelity"],
        abs(f["ecs_minus_norm2"] - f["ecs_minus_norm2_formula"]),
        abs(f["ecs_plus_norm2"] - f["ecs_plus_norm2_formula"]),
        abs(f["ecs_minus_probability"] - f["ecs_minus_oracle_probability"]),
        abs(f["ecs_minus_ud_probability"] - f["ecs_minus_ud_oracle_probability"]),
        abs(f["ecs_plus_probability"] - f["ecs_plus_oracle_probability"]),
        f["ecs_overlap"],
    )
    checks.append(Check("7 entangled coherent states", worst7 <= 1e-10, worst7, 1e-10))

    worst8 = max(
        abs(f[k] - f[k.replace("sleepy_N_", "sleepy_N_oracle_")])
        for k in f
        if k.startswith("sleepy_N_") and "oracle" not in k
    )
    checks.append(Check("8 normalisation constant", worst8 <= 1e-10, worst8, 1e-10))

    p_bad = max(f["bell_p_du"], f["bell_p_ud"])
    dfc9 = 1 - f["bell_uu_vs_minus_fidelity"]
    checks.append(
        Check(
            "9 Bell-initialised protocol",
            p_bad < 1e-12 and dfc9 <= 1e-10,
            p_bad,
            1e-12,
            f"P(du)={f['bell_p_du']:.3e} P(ud)={f['bell_p_ud']:.3e}; uu vs |a,b> - |-a,-b> deficit {dfc9:.3e}",
        )
    )

    unit = max(
        unitarity_deviation(make_spec(name, cutoffs=(cutoff,) * (2 if two else 1)))
        for name, two in (("single_ion_cat", False), ("entangled_squeezed", False), ("bell_initialized", True))
    )
    detail = f"max |U^dag U - I| {unit:.1e}"
    passed10 = unit < 1e-9
    value10 = unit
    if deep:
        doubled = scenario_figures(2 * cutoff)
        drift = max(abs(f[k] - doubled[k]) for k in f)
        passed10 = passed10 and drift < 1e-9
        value10 = max(unit, drift)
        detail += f", cutoff-doubling drift {drift:.1e}"
    else:
        detail += " (convergence needs --deep)"
    checks.append(Check("10 convergence & unitarity", passed10, value10, 1e-9, detail))
    return checks
