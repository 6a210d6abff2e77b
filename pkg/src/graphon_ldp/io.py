"""File formats: graphon/CDF/rate JSON, edge-list text, degree inputs.

All floats are serialized with 17 significant digits so that files
round-trip bit-exactly and identical runs produce byte-identical outputs.
"""

from __future__ import annotations

import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from .degree import BetaVector, DegreeFunction, DegreeSequence
from .errors import InvalidInput
from .graphon import LabeledGraph, StepCDF, StepGraphon
from .rates import RateValue


def _fmt_float(x: float) -> str:
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    if math.isnan(x):
        return '"nan"'
    return format(float(x), ".17g")


def dumps_json(obj, indent: int = 0, _level: int = 0) -> str:
    """JSON text with floats at 17 significant digits; deterministic order."""
    pad = "\n" + " " * (indent * (_level + 1)) if indent else ""
    end = "\n" + " " * (indent * _level) if indent else ""
    sep = "," + (pad if indent else " ")
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        inner = sep.join(dumps_json(x, indent, _level + 1) for x in obj)
        return "[" + pad + inner + end + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        inner = sep.join(
            json.dumps(str(k)) + ": " + dumps_json(v, indent, _level + 1)
            for k, v in obj.items()
        )
        return "{" + pad + inner + end + "}"
    raise InvalidInput(f"cannot serialize {type(obj).__name__}")


def write_json(path, obj, indent: int = 2) -> None:
    Path(path).write_text(dumps_json(obj, indent=indent) + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())


# ---------------------------------------------------------------------------
# Graphons


def graphon_to_dict(w: StepGraphon) -> dict:
    return {"block_weights": w.block_weights, "values": w.values}


def graphon_from_dict(data: dict) -> StepGraphon:
    try:
        return StepGraphon(
            np.asarray(data["block_weights"], dtype=float),
            np.asarray(data["values"], dtype=float),
        )
    except KeyError as exc:
        raise InvalidInput(f"graphon JSON missing key {exc}") from exc


def save_graphon(path, w: StepGraphon) -> None:
    write_json(path, graphon_to_dict(w))


def load_graphon(path) -> StepGraphon:
    return graphon_from_dict(read_json(path))


# ---------------------------------------------------------------------------
# Graphs: whitespace edge-list text with a header line "n <count>"


def graph_to_text(g: LabeledGraph) -> str:
    lines = [f"n {g.n}"]
    lines.extend(f"{i + 1} {j + 1}" for i, j in g.edges())
    return "\n".join(lines) + "\n"


def graph_from_text(text: str) -> LabeledGraph:
    tokens = text.split()
    if len(tokens) < 2 or tokens[0] != "n":
        raise InvalidInput('graph text must start with a header line "n <count>"')
    try:
        n = int(tokens[1])
        rest = [int(t) for t in tokens[2:]]
    except ValueError as exc:
        raise InvalidInput("graph text contains non-integer tokens") from exc
    if len(rest) % 2 != 0:
        raise InvalidInput("dangling vertex in edge list")
    edges = [(rest[i] - 1, rest[i + 1] - 1) for i in range(0, len(rest), 2)]
    return LabeledGraph.from_edges(n, edges)


def save_graph(path, g: LabeledGraph) -> None:
    Path(path).write_text(graph_to_text(g))


def load_graph(path) -> LabeledGraph:
    return graph_from_text(Path(path).read_text())


# ---------------------------------------------------------------------------
# Step CDFs


def cdf_to_dict(f: StepCDF) -> dict:
    return {"jumps": f.jumps, "cdf": f.cdf}


def cdf_from_dict(data: dict) -> StepCDF:
    try:
        return StepCDF(np.asarray(data["jumps"], float), np.asarray(data["cdf"], float))
    except KeyError as exc:
        raise InvalidInput(f"cdf JSON missing key {exc}") from exc


# ---------------------------------------------------------------------------
# Degree sequences and degree functions


def load_degree_sequence(path) -> DegreeSequence:
    """JSON array or one-integer-per-line text."""
    text = Path(path).read_text().strip()
    if text.startswith("["):
        values = json.loads(text)
    else:
        values = [int(tok) for tok in text.split()]
    return DegreeSequence.from_iterable(values)


def save_degree_sequence(path, d: DegreeSequence) -> None:
    write_json(path, [int(x) for x in d.d])


def degree_function_from_dict(data: dict) -> DegreeFunction:
    try:
        return DegreeFunction(
            np.asarray(data["breakpoints"], float),
            np.asarray(data["values"], float),
            float(data["c1"]),
            float(data["c2"]),
        )
    except KeyError as exc:
        raise InvalidInput(f"degree function JSON missing key {exc}") from exc


def degree_function_to_dict(d: DegreeFunction) -> dict:
    return {
        "breakpoints": d.breakpoints,
        "values": d.values,
        "c1": d.c1,
        "c2": d.c2,
    }


def load_degree_function(path) -> DegreeFunction:
    return degree_function_from_dict(read_json(path))


# ---------------------------------------------------------------------------
# Rate values and beta vectors


def rate_value_to_dict(rv: RateValue) -> dict:
    value = "inf" if math.isinf(rv.value) else rv.value
    cert = list(rv.certificate) if rv.certificate is not None else None
    return {"value": value, "certificate": cert}


def rate_value_from_dict(data: dict) -> RateValue:
    raw = data["value"]
    value = float("inf") if raw == "inf" else float(raw)
    cert = data.get("certificate")
    return RateValue(value, tuple(cert) if cert is not None else None)


def beta_to_dict(bv: BetaVector) -> dict:
    return {"beta": bv.beta, "residual": bv.residual}


def beta_from_dict(data: dict) -> BetaVector:
    return BetaVector(np.asarray(data["beta"], float), float(data["residual"]))


# ---------------------------------------------------------------------------
# Run manifests


def sha256_file(path) -> str:
    h = hashlib.sha256()
    h.update(Path(path).read_bytes())
    return h.hexdigest()


def build_manifest(command: str, params: dict, inputs, seed=None) -> dict:
    from . import __version__

    return {
        "command": command,
        "package_version": __version__,
        "python_version": sys.version.split()[0],
        "numpy_version": np.__version__,
        "seed": seed,
        "parameters": params,
        "inputs": {str(p): sha256_file(p) for p in inputs},
    }
