"""File formats: state/result JSON, scenario config files, CSV grids."""

from __future__ import annotations

import csv
import json
import os
import tempfile
from pathlib import Path

import numpy as np

FORMAT_VERSION = 1
_KEY_ALIASES = {
    "n": "n_ions",
    "N": "n_ions",
    "omega": "rabi",
    "Omega": "rabi",
    "omega_r": "rabi_r",
    "Omega_r": "rabi_r",
    "cutoff": "cutoffs",
    "t": "tau",
}


def ordering(n_ions: int, n_modes: int) -> str:
    names = ["cm", "stretch"][:n_modes]
    return ",".join((["internal"] if n_ions else []) + names)


def encode_amplitudes(psi: np.ndarray) -> list:
    # float repr round-trips exactly, so JSON keeps every bit
    return [[float(z.real), float(z.imag)] for z in np.asarray(psi, dtype=complex)]


def decode_amplitudes(pairs) -> np.ndarray:
    arr = np.asarray(pairs, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("amplitudes must be a list of [re, im] pairs")
    return arr[:, 0] + 1j * arr[:, 1]


def state_to_dict(psi: np.ndarray, n_ions: int, cutoffs) -> dict:
    return {
        "format": FORMAT_VERSION,
        "n_ions": int(n_ions),
        "cutoffs": [int(c) for c in cutoffs],
        "ordering": ordering(n_ions, len(cutoffs)),
        "amplitudes": encode_amplitudes(psi),
    }


def state_from_dict(doc: dict) -> tuple[np.ndarray, int, tuple]:
    """Return ``(amplitudes, n_ions, cutoffs)`` from a state, result or measurement document."""
    if "amplitudes" not in doc and "post_state" in doc:
        doc = doc["post_state"]
    try:
        n_ions = int(doc["n_ions"])
        cutoffs = tuple(int(c) for c in doc["cutoffs"])
        psi = decode_amplitudes(doc["amplitudes"])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"not a state document: missing {exc}") from None
    expected = (2**n_ions if n_ions else 1) * int(np.prod(cutoffs))
    if len(psi) != expected:
        raise ValueError(f"state has {len(psi)} amplitudes, metadata implies {expected}")
    return psi, n_ions, cutoffs


def read_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def read_state(path) -> tuple[np.ndarray, int, tuple]:
    return state_from_dict(read_json(path))


def write_json_atomic(path, doc: dict) -> None:
    """Write ``doc`` next to ``path`` and rename into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=1, sort_keys=True)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _parse_value(raw: str):
    raw = raw.strip()
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        pass
    if "," in raw:
        return [_parse_value(part) for part in raw.split(",")]
    return raw.strip("'\"")


def parse_config_text(text: str) -> dict:
    """Parse a JSON document or ``key = value`` lines (``#`` starts a comment)."""
    stripped = text.strip()
    if stripped.startswith("{"):
        try:
            doc = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise ValueError(f"malformed JSON config: {exc}") from None
    else:
        doc = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"config line {lineno}: expected 'key = value', got {line!r}")
            key, value = line.split("=", 1)
            doc[key.strip()] = _parse_value(value)
    if not isinstance(doc, dict):
        raise ValueError("config must be a mapping")
    out = {}
    for key, value in doc.items():
        key = _KEY_ALIASES.get(key, key)
        if key == "cutoffs" and not isinstance(value, list):
            value = [value]
        out[key] = value
    return out


def load_config(path) -> dict:
    return parse_config_text(Path(path).read_text(encoding="utf-8"))


def measurement_to_dict(record, cutoffs) -> dict:
    return {
        "outcome": record.outcome,
        "probability": float(record.probability),
        "post_state": state_to_dict(record.post_state, 0, cutoffs),
    }


def result_to_dict(result) -> dict:
    """Deterministic JSON view of a ScenarioResult (wall time excluded)."""
    js = result.space
    doc = state_to_dict(result.joint_state, js.register.n_ions, js.cutoffs)
    doc.update(
        {
            "name": result.spec.name,
            "params": result.spec.params(),
            "tails": {k: float(v) for k, v in result.tails.items()},
            "fidelity": float(result.reference_fidelity),
            "diagnostics": {k: (v if isinstance(v, bool) else float(v)) for k, v in result.diagnostics.items()},
        }
    )
    if result.measurement is not None:
        doc["measurement"] = measurement_to_dict(result.measurement, js.cutoffs)
    return doc


def write_wigner_csv(path, grid) -> None:
    """Header row holds x values; each following row starts with its p value."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["p\\x"] + [repr(float(x)) for x in grid.xs])
        for p, row in zip(grid.ps, grid.values):
            writer.writerow([repr(float(p))] + [repr(float(v)) for v in row])


def read_wigner_csv(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    xs = np.array([float(v) for v in rows[0][1:]])
    ps = np.array([float(r[0]) for r in rows[1:]])
    values = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
    return xs, ps, values


def wigner_to_dict(grid) -> dict:
    return {
        "xs": grid.xs.tolist(),
        "ps": grid.ps.tolist(),
        "values": grid.values.tolist(),
        "flagged": grid.flagged.tolist(),
    }


def write_distribution_csv(path, probs) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "P"])
        for n, p in enumerate(probs):
            writer.writerow([n, repr(float(p))])
