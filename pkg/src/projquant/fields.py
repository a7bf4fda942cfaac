"""Tensor-valued polynomial fields, the common currency of the flat and curved calculus.

A :class:`Field` is a finite sum ``sum_comp P_comp(x, eta, xi) e_comp`` where
``e_comp`` runs over a basis of a tensor product of *slots* and each ``P`` is a
polynomial in three groups of m variables:

* ``x``    -- base coordinates;
* ``eta``  -- g_1 fiber coordinates of the partial trivialisation (curved case);
* ``xi``   -- either momenta of a symbol (``sym=True``: they span S^k R^m and
  transform under gl(m)) or derivative markers of an operator (``sym=False``:
  ``xi^alpha`` stands for ``d^alpha`` applied to the argument, inert under gl(m)).

Each slot is a gl(m)-module given by sparse generator matrices, or inert.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from sympy.polys.rings import ring

from ._rational import QQ, as_rational
from .repspace import FiberSpace, RepSpec, generator_action

__all__ = ["Field", "Slot", "FiberMap", "poly_ring", "rep_slot", "dual_slot", "vector_slot", "covector_slot", "inert_slot"]


@lru_cache(maxsize=None)
def poly_ring(m: int):
    names = [f"x{i + 1}" for i in range(m)] + [f"eta{i + 1}" for i in range(m)] + [f"xi{i + 1}" for i in range(m)]
    R, *gens = ring(",".join(names), QQ)
    return R, tuple(gens)


@dataclass(frozen=True)
class Slot:
    name: str
    dim: int
    action: dict | None  # {(i, j): {col: ((row, coeff), ...)}} or None for inert

    def __hash__(self):
        return hash((self.name, self.dim))

    def __eq__(self, other):
        return isinstance(other, Slot) and (self.name, self.dim) == (other.name, other.dim)


@lru_cache(maxsize=None)
def rep_slot(spec: RepSpec, m: int, tag: str = "") -> Slot:
    return Slot(f"V{tag}:{spec.base}{spec.p}@{spec.weight}", spec.dim(m), generator_action(spec, m))


@lru_cache(maxsize=None)
def dual_slot(spec: RepSpec, m: int, tag: str = "") -> Slot:
    action = {}
    for key, cols in generator_action(spec, m).items():
        dual: dict[int, list] = {}
        for c, entries in cols.items():
            for r, v in entries:
                dual.setdefault(r, []).append((c, -v))
        action[key] = {c: tuple(e) for c, e in dual.items()}
    return Slot(f"V{tag}*:{spec.base}{spec.p}@{spec.weight}", spec.dim(m), action)


@lru_cache(maxsize=None)
def vector_slot(m: int) -> Slot:
    return Slot("R^m", m, {(i, j): {j: ((i, QQ(1)),)} for i in range(m) for j in range(m)})


@lru_cache(maxsize=None)
def covector_slot(m: int) -> Slot:
    return Slot("R^m*", m, {(i, j): {i: ((j, QQ(-1)),)} for i in range(m) for j in range(m)})


@lru_cache(maxsize=None)
def inert_slot(dim: int, name: str = "inert") -> Slot:
    return Slot(name, dim, None)


def _acc(store: dict, comp, poly):
    if not poly:
        return
    cur = store.get(comp)
    store[comp] = poly if cur is None else cur + poly


class Field:
    __slots__ = ("m", "slots", "sym", "terms", "meta")

    def __init__(self, m: int, slots: tuple, terms: dict | None = None, sym: bool = True, meta=None):
        self.m = m
        self.slots = tuple(slots)
        self.sym = sym
        self.meta = meta
        self.terms = {c: p for c, p in (terms or {}).items() if p}

    # -- construction -------------------------------------------------------
    @property
    def ring(self):
        return poly_ring(self.m)[0]

    @property
    def gens(self):
        return poly_ring(self.m)[1]

    def x(self, i):
        return self.gens[i]

    def eta(self, i):
        return self.gens[self.m + i]

    def xi(self, i):
        return self.gens[2 * self.m + i]

    def _new(self, terms, slots=None, sym=None) -> Field:
        out = object.__new__(type(self))
        out.m = self.m
        out.slots = self.slots if slots is None else tuple(slots)
        out.sym = self.sym if sym is None else sym
        out.meta = self.meta
        out.terms = {c: p for c, p in terms.items() if p}
        return out

    def zero(self) -> Field:
        return self._new({})

    # -- vector space structure ---------------------------------------------
    def _compatible(self, other):
        if not isinstance(other, Field):
            return False
        if other.m != self.m or other.slots != self.slots or other.sym != self.sym:
            raise ValueError("incompatible fields")
        return True

    def __add__(self, other):
        if not self._compatible(other):
            return NotImplemented
        out = dict(self.terms)
        for c, p in other.terms.items():
            _acc(out, c, p)
        return self._new(out)

    def __sub__(self, other):
        if not self._compatible(other):
            return NotImplemented
        out = dict(self.terms)
        for c, p in other.terms.items():
            _acc(out, c, -p)
        return self._new(out)

    def __neg__(self):
        return self._new({c: -p for c, p in self.terms.items()})

    def scale(self, c) -> Field:
        c = as_rational(c)
        if not c:
            return self.zero()
        return self._new({k: p * c for k, p in self.terms.items()})

    def __mul__(self, c):
        return self.scale(c)

    __rmul__ = __mul__

    def mul_poly(self, poly) -> Field:
        if not poly:
            return self.zero()
        return self._new({k: p * poly for k, p in self.terms.items()})

    def __eq__(self, other):
        if not isinstance(other, Field):
            return NotImplemented
        return (
            self.m == other.m
            and self.slots == other.slots
            and self.sym == other.sym
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.m, self.slots, self.sym, frozenset((c, frozenset(p.items())) for c, p in self.terms.items())))

    def is_zero(self) -> bool:
        return not self.terms

    def __repr__(self):
        inner = ", ".join(f"{c}: {p.as_expr()}" for c, p in sorted(self.terms.items()))
        return f"{type(self).__name__}({{{inner}}})"

    # -- calculus -------------------------------------------------------------
    def diff(self, var: int) -> Field:
        g = self.gens[var]
        return self._new({c: p.diff(g) for c, p in self.terms.items()})

    def dx(self, j: int) -> Field:
        """Total derivative in x_j; in operator mode also raises the derivative marker."""
        g = self.gens[j]
        if self.sym:
            return self._new({c: p.diff(g) for c, p in self.terms.items()})
        xi = self.xi(j)
        return self._new({c: p.diff(g) + p * xi for c, p in self.terms.items()})

    def deta(self, j: int) -> Field:
        return self.diff(self.m + j)

    def rho_gen(self, i: int, j: int) -> Field:
        """rho_*(E_ij) acting on every slot (and on xi when ``sym``)."""
        out: dict = {}
        for comp, poly in self.terms.items():
            for s, slot in enumerate(self.slots):
                if slot.action is None:
                    continue
                for r, v in slot.action[(i, j)].get(comp[s], ()):
                    _acc(out, comp[:s] + (r,) + comp[s + 1 :], poly * v)
        if self.sym:
            xi_i, xi_j = self.xi(i), self.xi(j)
            for comp, poly in self.terms.items():
                _acc(out, comp, xi_i * poly.diff(xi_j))
        return self._new(out)

    def rho(self, A) -> Field:
        """rho_*(A) for an m x m matrix of rationals or polynomials (pointwise)."""
        R = self.ring
        acc = self.zero()
        for i in range(self.m):
            for j in range(self.m):
                a = A[i][j]
                if not a:
                    continue
                g = self.rho_gen(i, j)
                if isinstance(a, type(R.one)):
                    acc = acc + g.mul_poly(a)
                else:
                    acc = acc + g.scale(a)
        return acc

    # -- slots --------------------------------------------------------------
    def add_slot(self, slot: Slot, position: int | None = None) -> Field:
        """Reinterpret as having an extra slot fixed at index 0 (used to seed tensor families)."""
        pos = len(self.slots) if position is None else position
        slots = self.slots[:pos] + (slot,) + self.slots[pos:]
        return self._new({c[:pos] + (0,) + c[pos:]: p for c, p in self.terms.items()}, slots=slots)

    def component(self, position: int, index: int) -> Field:
        """Restrict a slot to one basis index and drop that slot."""
        slots = self.slots[:position] + self.slots[position + 1 :]
        out = {c[:position] + c[position + 1 :]: p for c, p in self.terms.items() if c[position] == index}
        return self._new(out, slots=slots)

    @classmethod
    def stack(cls, parts: list[Field], slot: Slot, position: int) -> Field:
        """Inverse of :meth:`component`: parts[i] becomes slot index i at ``position``."""
        first = parts[0]
        out: dict = {}
        for idx, part in enumerate(parts):
            if part.slots != first.slots:
                raise ValueError("cannot stack fields with different slots")
            for c, p in part.terms.items():
                _acc(out, c[:position] + (idx,) + c[position:], p)
        slots = first.slots[:position] + (slot,) + first.slots[position:]
        return first._new(out, slots=slots)

    def map_slot(self, position: int, matrix: dict) -> Field:
        """Apply ``{col: ((row, coeff), ...)}`` to one slot; coefficients may be polynomials."""
        out: dict = {}
        for comp, poly in self.terms.items():
            for r, v in matrix.get(comp[position], ()):
                _acc(out, comp[:position] + (r,) + comp[position + 1 :], poly * v)
        return self._new(out)

    # -- grading in xi and eta ------------------------------------------------
    def xi_degree_part(self, k: int) -> Field:
        m2 = 2 * self.m
        R = self.ring
        out = {}
        for c, p in self.terms.items():
            d = {mon: v for mon, v in p.items() if sum(mon[m2:]) == k}
            if d:
                out[c] = R.from_dict(d)
        return self._new(out)

    def xi_degrees(self) -> set[int]:
        m2 = 2 * self.m
        return {sum(mon[m2:]) for p in self.terms.values() for mon in p}

    def eta_degree(self) -> int:
        m = self.m
        return max((sum(mon[m : 2 * m]) for p in self.terms.values() for mon in p), default=0)

    def is_eta_free(self) -> bool:
        return self.eta_degree() == 0

    def at_eta_zero(self) -> Field:
        m = self.m
        R = self.ring
        out = {}
        for c, p in self.terms.items():
            d = {mon: v for mon, v in p.items() if not any(mon[m : 2 * m])}
            if d:
                out[c] = R.from_dict(d)
        return self._new(out)

    def x_degree(self) -> int:
        m = self.m
        return max((sum(mon[:m]) for p in self.terms.values() for mon in p), default=0)

    def with_sym(self, sym: bool, slots=None) -> Field:
        return self._new(dict(self.terms), slots=slots, sym=sym)


class FiberMap:
    """Constant linear map between fibers, sparse on basis keys ``(alpha, comp)``.

    Acts pointwise (in x and eta) on fields whose xi variables are symbol
    momenta and whose first two slots are (V2, V1*); any further slots are
    carried along untouched.  Keys outside the domain are sent to 0.
    """

    __slots__ = ("table",)

    def __init__(self, table: dict | None = None):
        self.table = {k: tuple((t, c) for t, c in v if c) for k, v in (table or {}).items()}

    @classmethod
    def from_matrix(cls, M, source: FiberSpace, target: FiberSpace) -> FiberMap:
        table: dict = {}
        rows = M.to_sdm() if hasattr(M, "to_sdm") else None
        if rows is not None:
            for r, cols in rows.items():
                for c, v in cols.items():
                    al, b, a = source.basis[c]
                    tal, tb, ta = target.basis[r]
                    table.setdefault((al, (b, a)), []).append(((tal, (tb, ta)), v))
        return cls(table)

    def apply(self, F: Field) -> Field:
        m2 = 2 * F.m
        R = F.ring
        raw: dict = {}
        table = self.table
        for comp, poly in F.terms.items():
            head, tail = comp[:2], comp[2:]
            for mon, coeff in poly.items():
                images = table.get((mon[m2:], head))
                if not images:
                    continue
                base = mon[:m2]
                for (tal, tcomp), v in images:
                    d = raw.setdefault(tcomp + tail, {})
                    tm = base + tal
                    nv = d.get(tm, 0) + coeff * v
                    if nv:
                        d[tm] = nv
                    else:
                        d.pop(tm, None)
        return F._new({c: R.from_dict(d) for c, d in raw.items() if d})

    def __add__(self, other: FiberMap) -> FiberMap:
        table = {k: list(v) for k, v in self.table.items()}
        for k, v in other.table.items():
            table.setdefault(k, []).extend(v)
        return FiberMap(_merge(table))

    def scale(self, c) -> FiberMap:
        c = as_rational(c)
        return FiberMap({k: [(t, v * c) for t, v in vals] for k, vals in self.table.items()})

    def compose(self, other: FiberMap) -> FiberMap:
        """self after other."""
        table: dict = {}
        for k, vals in other.table.items():
            for mid, v in vals:
                for t, w in self.table.get(mid, ()):
                    table.setdefault(k, []).append((t, v * w))
        return FiberMap(_merge(table))

    def to_matrix(self, source: FiberSpace, target: FiberSpace):
        from ._linalg import sparse

        entries: dict = {}
        for c, (al, b, a) in enumerate(source.basis):
            for (tal, (tb, ta)), v in self.table.get((al, (b, a)), ()):
                r = target.index[(tal, tb, ta)]
                entries.setdefault(r, {})
                entries[r][c] = entries[r].get(c, 0) + v
        return sparse(entries, (target.dim, source.dim))


def _merge(table):
    out = {}
    for k, vals in table.items():
        acc: dict = {}
        for t, v in vals:
            acc[t] = acc.get(t, 0) + v
        out[k] = [(t, v) for t, v in acc.items() if v]
    return out
