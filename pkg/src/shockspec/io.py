"""JSON model files and deterministic number formatting.

A model file looks like::

    {"dimension": 2,
     "pieces": [{"Q": [["1", "0"], ["0", "2"]], "u_star": ["0", "-1"]}, ...],
     "interfaces": [{"normal": ["0", "1"], "offset": "0"}, ...],
     "crossings": [["0", "0"]]}

Numbers are written as decimal strings (plain JSON numbers are accepted on
input).  ``Q`` may be nested rows or a flat row-major list.
"""
from __future__ import annotations

import hashlib
import json
from importlib import resources

import numpy as np

from .errors import MalformedInput, ShockSpecError
from .model import build_heteroclinic, build_model


def _num(x, where):
    if isinstance(x, bool):
        raise MalformedInput("expected a number", where)
    if isinstance(x, (int, float)):
        return float(x)
    if isinstance(x, str):
        try:
            return float(x.strip())
        except ValueError:
            pass
    raise MalformedInput(f"expected a decimal number, got {x!r}", where)


def _vec(x, n, where):
    if not isinstance(x, list) or len(x) != n:
        raise MalformedInput(f"expected a list of {n} numbers", where)
    return np.array([_num(v, f"{where}[{i}]") for i, v in enumerate(x)])


def _mat(x, n, where):
    if isinstance(x, list) and len(x) == n * n and all(not isinstance(v, list) for v in x):
        return _vec(x, n * n, where).reshape(n, n)
    if not isinstance(x, list) or len(x) != n:
        raise MalformedInput(f"expected {n} rows or {n * n} row-major entries", where)
    return np.array([_vec(r, n, f"{where}[{i}]") for i, r in enumerate(x)])


def _field(d, key, where):
    if not isinstance(d, dict) or key not in d:
        raise MalformedInput(f"missing field {key!r}", where)
    return d[key]


def model_from_dict(data, source="model"):
    """Build ``(model, heteroclinic)`` from parsed JSON; errors carry the field location."""
    n = _field(data, "dimension", source)
    if not isinstance(n, (int, str)) or isinstance(n, bool):
        raise MalformedInput("dimension must be an integer", f"{source}.dimension")
    try:
        n = int(n)
    except ValueError:
        raise MalformedInput("dimension must be an integer", f"{source}.dimension") from None
    if n < 1:
        raise MalformedInput("dimension must be positive", f"{source}.dimension")
    pieces_in = _field(data, "pieces", source)
    faces_in = _field(data, "interfaces", source)
    cross_in = _field(data, "crossings", source)
    for key, val in (("pieces", pieces_in), ("interfaces", faces_in), ("crossings", cross_in)):
        if not isinstance(val, list):
            raise MalformedInput("expected a list", f"{source}.{key}")
    pieces = []
    for i, p in enumerate(pieces_in):
        w = f"{source}.pieces[{i}]"
        pieces.append((_mat(_field(p, "Q", w), n, w + ".Q"), _vec(_field(p, "u_star", w), n, w + ".u_star")))
    faces = []
    for i, s in enumerate(faces_in):
        w = f"{source}.interfaces[{i}]"
        faces.append((_vec(_field(s, "normal", w), n, w + ".normal"), _num(_field(s, "offset", w), w + ".offset")))
    crossings = [_vec(c, n, f"{source}.crossings[{i}]") for i, c in enumerate(cross_in)]
    model = build_model(pieces, faces)
    return model, build_heteroclinic(model, crossings)


def load_model(path):
    """Read a model file; raises :class:`MalformedInput` with a location on bad input."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"invalid JSON: {exc.msg}", f"{path}:{exc.lineno}:{exc.colno}") from None
    except OSError as exc:
        raise MalformedInput(str(exc.strerror or exc), str(path)) from None
    return model_from_dict(data, str(path))


def fmt(x):
    """Shortest round-trip decimal string of a float (``'nan'``, ``'inf'`` for non-finite)."""
    x = float(x)
    if np.isnan(x):
        return "nan"
    if np.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def model_to_dict(model, het, description=None):
    d = {}
    if description:
        d["description"] = description
    d.update({
        "dimension": model.dim,
        "pieces": [{"Q": [[fmt(v) for v in row] for row in p.Q], "u_star": [fmt(v) for v in p.u_star]}
                   for p in model.pieces],
        "interfaces": [{"normal": [fmt(v) for v in s.normal], "offset": fmt(s.offset)}
                       for s in model.interfaces],
        "crossings": [[fmt(v) for v in het.points[0]]],
    })
    return d


def dumps(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def config_hash(config):
    """sha256 of the canonical JSON form of a configuration mapping."""
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def fixture_path(name):
    """Path of a bundled fixture file (``name`` with or without ``.json``)."""
    if not name.endswith(".json"):
        name += ".json"
    ref = resources.files("shockspec") / "fixtures" / name
    if not ref.is_file():
        raise ShockSpecError(f"no bundled fixture named {name!r}")
    return str(ref)


def fixture_names():
    root = resources.files("shockspec") / "fixtures"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))
