"""JSON encodings; every rational is a "p/q" string, never a float."""
from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

from ._rational import QQ, format_rational, parse_rational
from .fields import poly_ring
from .flatcalc import PolyOperator, PolySymbol
from .repspace import RepSpec

__all__ = [
    "poly_to_json",
    "poly_from_json",
    "symbol_to_json",
    "symbol_from_json",
    "operator_to_json",
    "operator_from_json",
    "connection_to_json",
    "connection_from_json",
    "dumps",
    "write_json",
    "read_json",
]


def _exp_key(exp) -> str:
    return ",".join(str(e) for e in exp)


def _parse_exp(key: str, m: int) -> tuple:
    parts = tuple(int(p) for p in key.split(",")) if key else ()
    if len(parts) != m or any(p < 0 for p in parts):
        raise ValueError(f"bad exponent key {key!r} for m={m}")
    return parts


def poly_to_json(p, m: int) -> dict:
    """x-polynomial as ``{"e1,...,em": "p/q"}``."""
    out = {}
    for mon, c in sorted(p.items(), key=lambda t: tuple(-e for e in t[0])):
        if any(mon[m:]):
            raise ValueError("only polynomials in x are serialisable")
        out[_exp_key(mon[:m])] = format_rational(c)
    return out


def poly_from_json(data: dict, m: int):
    R = poly_ring(m)[0]
    z = (0,) * (2 * m)
    d = {}
    for key, value in data.items():
        c = parse_rational(value) if isinstance(value, str) else QQ.convert(value)
        if c:
            d[_parse_exp(key, m) + z] = c
    return R.from_dict(d)


def _hom_to_json(F) -> dict:
    coeffs = {}
    for (alpha, b, a), poly in F.items():
        coeffs[f"{_exp_key(alpha)}|{b},{a}"] = poly_to_json(poly, F.m)
    return {"fiber": {"m": F.m, "rep1": F.v1.to_json(), "rep2": F.v2.to_json()}, "coeffs": coeffs}


def _hom_from_json(cls, data: dict):
    fiber = data["fiber"]
    m = int(fiber["m"])
    v1, v2 = RepSpec.from_json(fiber["rep1"]), RepSpec.from_json(fiber["rep2"])
    coeffs = {}
    n1, n2 = v1.dim(m), v2.dim(m)
    for key, poly in data.get("coeffs", {}).items():
        multi, _, hom = key.partition("|")
        b, a = (int(t) for t in (hom or "0,0").split(","))
        if not (0 <= b < n2 and 0 <= a < n1):
            raise ValueError(f"hom index {hom!r} out of range")
        coeffs[(_parse_exp(multi, m), b, a)] = poly_from_json(poly, m)
    return cls.from_coeffs(m, v1, v2, coeffs)


def symbol_to_json(T: PolySymbol) -> dict:
    return _hom_to_json(T)


def symbol_from_json(data: dict) -> PolySymbol:
    return _hom_from_json(PolySymbol, data)


def operator_to_json(D: PolyOperator) -> dict:
    out = _hom_to_json(D)
    out["order"] = D.order
    return out


def operator_from_json(data: dict) -> PolyOperator:
    return _hom_from_json(PolyOperator, data)


def connection_to_json(c) -> dict:
    """Indices in the "i,j,k" keys are 1-based, as in Gamma^i_{jk}."""
    gamma = {}
    for (i, j, k), p in c.items():
        gamma[f"{i + 1},{j + 1},{k + 1}"] = poly_to_json(p, c.m)
    return {"m": c.m, "gamma": gamma}


def connection_from_json(data: dict):
    from .cartancurved import ProjConnection

    m = int(data["m"])
    gamma = {}
    for key, poly in data.get("gamma", {}).items():
        idx = tuple(int(t) - 1 for t in key.split(","))
        if len(idx) != 3:
            raise ValueError(f"bad index key {key!r}")
        p = poly_from_json(poly, m)
        canon = (idx[0], min(idx[1:]), max(idx[1:]))
        if canon in gamma and gamma[canon] != p:
            raise ValueError(f"Gamma entry {key} contradicts its symmetric partner")
        gamma[canon] = p
    return ProjConnection(m, gamma)


def dumps(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def write_json(path, data) -> None:
    """Atomic write: temp file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(dumps(data))
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def read_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
