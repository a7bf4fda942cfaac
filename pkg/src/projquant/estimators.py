"""Estimator-style front end over the functional core.

``fit`` validates the configuration and certifies that the pair is not
critical up to ``k_max``; ``transform`` quantizes symbols into operators and
``inverse_transform`` is the symbol map (the inverse of the quantization).
"""
from __future__ import annotations

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._rational import as_rational
from .cartancurved import ProjConnection, normal_cartan, quantize_curved
from .casimir import criticality
from .flatcalc import PolyOperator, PolySymbol, principal_symbol
from .quantflat import CriticalPairError, flat_table, quantize_flat
from .repspace import RepSpec, density, with_shift

__all__ = ["FlatQuantizer", "CurvedQuantizer", "parse_rep", "validate_pair"]


def parse_rep(rep) -> RepSpec:
    """Accept a RepSpec, its JSON dict, or ``"density:w"``, ``"sym:p:w"``, ``"ext:p:w"``."""
    if rep is None:
        return density(0)
    if isinstance(rep, RepSpec):
        return rep
    if isinstance(rep, dict):
        return RepSpec.from_json(rep)
    if isinstance(rep, str):
        parts = rep.strip().split(":")
        base = parts[0].lower()
        if base in ("density", "trivial"):
            if len(parts) > 2:
                raise ValueError(f"bad representation {rep!r}")
            return density(as_rational(parts[1]) if len(parts) == 2 else 0)
        if base in ("sym", "ext"):
            if len(parts) not in (2, 3):
                raise ValueError(f"bad representation {rep!r}")
            p = int(parts[1])
            return RepSpec(base, p, as_rational(parts[2]) if len(parts) == 3 else 0)
        raise ValueError(f"unknown representation {rep!r}")
    raise TypeError(f"cannot interpret {type(rep).__name__} as a representation")


def validate_pair(m, rep1, rep2, delta=None, k_max=0) -> tuple[RepSpec, RepSpec]:
    if not isinstance(m, int) or isinstance(m, bool) or m < 2:
        raise ValueError("m must be an integer >= 2")
    if not isinstance(k_max, int) or isinstance(k_max, bool) or k_max < 0:
        raise ValueError("k_max must be a non-negative integer")
    v1, v2 = parse_rep(rep1), parse_rep(rep2)
    v1.dim(m)
    v2.dim(m)
    if delta is not None:
        v2 = with_shift(v1, v2, as_rational(delta), m)
    return v1, v2


def _as_list(X):
    if isinstance(X, (PolySymbol, PolyOperator)):
        return [X], True
    return list(X), False


class _QuantizerBase(TransformerMixin, BaseEstimator):
    def _check_symbol(self, T):
        if not isinstance(T, PolySymbol):
            raise TypeError(f"expected PolySymbol, got {type(T).__name__}")
        if T.m != self.m or T.v1 != self.rep1_ or T.v2 != self.rep2_:
            raise ValueError("symbol does not match the fitted representations")
        if T.degree > self.k_max:
            raise ValueError(f"symbol degree {T.degree} exceeds k_max={self.k_max}")

    def _quantize(self, T):
        raise NotImplementedError

    def transform(self, X):
        check_is_fitted(self, "criticality_")
        items, single = _as_list(X)
        out = []
        for T in items:
            self._check_symbol(T)
            out.append(self._quantize(T))
        return out[0] if single else out

    def inverse_transform(self, X):
        """Symbol map: peel principal symbols off until the operator is exhausted."""
        check_is_fitted(self, "criticality_")
        items, single = _as_list(X)
        out = []
        for D in items:
            if not isinstance(D, PolyOperator):
                raise TypeError(f"expected PolyOperator, got {type(D).__name__}")
            total = PolySymbol.empty(D.m, D.v1, D.v2)
            rest = D
            while not rest.is_zero():
                S = principal_symbol(rest)
                total = total + S
                rest = rest - self._quantize(S)
            out.append(total)
        return out[0] if single else out

    def _fit_pair(self):
        self.rep1_, self.rep2_ = validate_pair(self.m, self.rep1, self.rep2, self.delta, self.k_max)
        report = criticality(self.rep1_, self.rep2_, self.m, self.k_max)
        if report.critical:
            raise CriticalPairError("the pair is critical up to k_max", report)
        self.criticality_ = report


class FlatQuantizer(_QuantizerBase):
    """sl(m+1)-equivariant quantization on R^m."""

    def __init__(self, m=2, rep1=None, rep2=None, delta=None, k_max=3):
        self.m = m
        self.rep1 = rep1
        self.rep2 = rep2
        self.delta = delta
        self.k_max = k_max

    def fit(self, X=None, y=None):
        self._fit_pair()
        return self

    def _quantize(self, T):
        return quantize_flat(T)

    def tables(self):
        check_is_fitted(self, "criticality_")
        return {k: flat_table(self.m, k, self.rep1_, self.rep2_) for k in range(self.k_max + 1)}


class CurvedQuantizer(_QuantizerBase):
    """Natural projectively equivariant quantization for a polynomial connection."""

    def __init__(self, connection=None, rep1=None, rep2=None, delta=None, k_max=2):
        self.connection = connection
        self.rep1 = rep1
        self.rep2 = rep2
        self.delta = delta
        self.k_max = k_max

    @property
    def m(self):
        return self.connection.m if self.connection is not None else None

    def fit(self, X=None, y=None):
        if not isinstance(self.connection, ProjConnection):
            raise TypeError("connection must be a ProjConnection")
        self._fit_pair()
        self.cartan_ = normal_cartan(self.connection)
        return self

    def _quantize(self, T):
        return quantize_curved(self.connection, T)
