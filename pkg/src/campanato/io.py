"""GridFunction files.

CSV: a header line ``# n=<dim> side=<real> res=<ints>`` (optionally
``lower=<reals>``) followed by one sample per line, row-major, every cell.

JSON: ``{"dimension", "side", "resolution", "mask"?, "samples", "lower"?}``
where ``mask`` is a row-major 0/1 list and ``samples`` lists the active
cells only, row-major.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .grid import Domain, GridError, GridFunction


class FormatError(GridError):
    """Malformed GridFunction file."""


def _ints(text):
    return tuple(int(v) for v in text.split(",") if v)


def _floats(text):
    return tuple(float(v) for v in text.split(",") if v)


def _fmt(values) -> str:
    return ",".join(repr(float(v)) if isinstance(v, float) else str(v) for v in values)


def dumps_csv(f: GridFunction) -> str:
    if f.domain.mask is not None:
        raise FormatError("CSV cannot carry a mask; use JSON")
    d = f.domain
    header = f"# n={d.n} side={d.side[0]!r} res={_fmt(d.resolution)}"
    if any(d.lower):
        header += f" lower={_fmt(d.lower)}"
    body = "\n".join(repr(float(v)) for v in f.values.reshape(-1))
    return header + "\n" + body + "\n"


def loads_csv(text: str) -> GridFunction:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("#"):
        raise FormatError("missing '# n=... side=... res=...' header")
    fields = {}
    for tok in lines[0][1:].split():
        if "=" not in tok:
            raise FormatError(f"malformed header token {tok!r}")
        k, v = tok.split("=", 1)
        fields[k] = v
    try:
        n = int(fields["n"])
        side = float(fields["side"])
        res = _ints(fields["res"])
        lower = _floats(fields["lower"]) if "lower" in fields else None
    except (KeyError, ValueError) as exc:
        raise FormatError(f"malformed header: {lines[0]!r}") from exc
    if len(res) == 1:
        res = res * n
    try:
        samples = np.array([float(v) for v in lines[1:]])
    except ValueError as exc:
        raise FormatError(f"non-numeric sample: {exc}") from exc
    expected = int(np.prod(res))
    if samples.size != expected:
        raise FormatError(f"sample count mismatch: expected {expected}, got {samples.size}")
    dom = Domain(n, side=tuple(side * r / res[0] for r in res), resolution=res, lower=lower)
    return GridFunction(dom, samples.reshape(res))


def to_json_dict(f: GridFunction) -> dict:
    d = f.domain
    out = {
        "dimension": d.n,
        "side": d.side[0],
        "resolution": list(d.resolution),
        "lower": list(d.lower),
        "samples": f.samples.tolist(),
    }
    if d.mask is not None:
        out["mask"] = d.mask.reshape(-1).astype(int).tolist()
    return out


def from_json_dict(obj: dict) -> GridFunction:
    try:
        n = int(obj["dimension"])
        side = float(obj["side"])
        res = tuple(int(r) for r in np.ravel(obj["resolution"]))
        samples = np.asarray(obj["samples"], dtype=float).reshape(-1)
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed GridFunction JSON: {exc}") from exc
    if len(res) == 1:
        res = res * n
    mask = None
    if obj.get("mask") is not None:
        mask = np.asarray(obj["mask"], dtype=bool).reshape(-1)
        if mask.size != int(np.prod(res)):
            raise FormatError(f"mask size mismatch: expected {int(np.prod(res))}, got {mask.size}")
        mask = mask.reshape(res)
    dom = Domain(n, side=tuple(side * r / res[0] for r in res), resolution=res, lower=obj.get("lower"), mask=mask)
    if samples.size != dom.n_active:
        raise FormatError(f"sample count mismatch: expected {dom.n_active}, got {samples.size}")
    return GridFunction(dom, samples)


def ingest(path, fmt: str | None = None) -> GridFunction:
    """Read a GridFunction; the format defaults to the file suffix."""
    path = Path(path)
    fmt = fmt or path.suffix.lstrip(".").lower()
    text = path.read_text()
    if fmt == "csv":
        return loads_csv(text)
    if fmt == "json":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid JSON: {exc}") from exc
        return from_json_dict(obj)
    raise FormatError(f"unknown format {fmt!r}")


def emit(f: GridFunction, path, fmt: str | None = None) -> Path:
    path = Path(path)
    fmt = fmt or path.suffix.lstrip(".").lower()
    if fmt == "csv":
        path.write_text(dumps_csv(f))
    elif fmt == "json":
        path.write_text(json.dumps(to_json_dict(f)) + "\n")
    else:
        raise FormatError(f"unknown format {fmt!r}")
    return path
