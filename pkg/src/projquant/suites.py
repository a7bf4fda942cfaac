"""Invariant suites: each identity is checked exactly and reported with a counterexample.

The randomized parts draw from ``random.Random(seed)`` only, so a report is a
pure function of its configuration.
"""
from __future__ import annotations

import logging
import random
import time
from dataclasses import dataclass, field

from . import flatcalc
from ._rational import QQ, format_rational
from .cartancurved import (
    ProjConnection,
    commutator_defect,
    equivariance_defect,
    LiftedFunction,
    normal_cartan,
    quantize_curved,
    weyl_equivalent,
)
from .casimir import casimir_direct, n_operator
from .fields import poly_ring
from .flatcalc import PolySymbol, monomial, proj_vector_field, vector_field_bracket
from .liecore import bracket, build_dual_bases, e_vec, eps_raw, killing, random_element
from .quantflat import (
    brute_force_quantization,
    check_symbol_preservation,
    flat_table,
    full_table,
    quantize_flat,
    verify_equivariance,
)
from .repspace import FiberSpace, RepSpec, alpha_eigenvalue, casimir_blocks, density, multi_indices, with_shift
from .serialization import connection_to_json, operator_to_json, poly_to_json, symbol_to_json

__all__ = [
    "Check",
    "SuiteReport",
    "SUITES",
    "run_suite",
    "random_poly",
    "random_symbol",
    "random_connection",
    "random_one_form",
    "DEFAULT_PAIRS",
    "crochet_suite",
    "gamma_suite",
    "casimir_suite",
    "tech_suite",
    "flat_equivariance_suite",
    "curved_invariance_suite",
]

log = logging.getLogger(__name__)

# densities, a vector/covector pair and a pair of second-order tensors
DEFAULT_PAIRS = (
    (density(QQ(1, 3)), density(QQ(-1, 2))),
    (RepSpec("sym", 1, QQ(1, 2)), RepSpec("ext", 1, QQ(0))),
    (RepSpec("ext", 2, QQ(2, 3)), RepSpec("sym", 2, QQ(1, 5))),
)


@dataclass
class Check:
    name: str
    passed: bool
    config: dict = field(default_factory=dict)
    counterexample: dict | None = None

    def to_json(self) -> dict:
        out = {"name": self.name, "passed": self.passed, "config": self.config}
        if self.counterexample is not None:
            out["counterexample"] = self.counterexample
        return out


@dataclass
class SuiteReport:
    suite: str
    config: dict
    checks: list = field(default_factory=list)
    findings: dict = field(default_factory=dict)
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def add(self, name, passed, config=None, counterexample=None) -> bool:
        self.checks.append(Check(name, bool(passed), config or {}, None if passed else counterexample))
        return bool(passed)

    def to_json(self) -> dict:
        # elapsed time is deliberately left out so reports stay byte-identical
        return {
            "suite": self.suite,
            "config": self.config,
            "passed": self.passed,
            "n_checks": len(self.checks),
            "n_failed": len(self.failures),
            "findings": self.findings,
            "checks": [c.to_json() for c in self.checks],
        }


# -- random inputs ------------------------------------------------------------------


def random_poly(m: int, rng: random.Random, degree: int = 2, terms: int = 3, bound: int = 3):
    R = poly_ring(m)[0]
    p = R(QQ(rng.randint(-bound, bound)))
    for _ in range(terms):
        exp = [0] * m
        for _ in range(rng.randint(0, degree)):
            exp[rng.randrange(m)] += 1
        p += QQ(rng.randint(-bound, bound), rng.randint(1, 3)) * monomial(m, exp)
    return p


def random_symbol(m: int, v1: RepSpec, v2: RepSpec, k: int, rng: random.Random, entries: int = 3, degree: int = 2):
    """Homogeneous symbol of degree k with a few random polynomial entries."""
    alphas = multi_indices(m, k)
    n1, n2 = v1.dim(m), v2.dim(m)
    coeffs = {}
    for _ in range(entries):
        key = (rng.choice(alphas), rng.randrange(n2), rng.randrange(n1))
        coeffs[key] = coeffs.get(key, 0) + random_poly(m, rng, degree)
    T = PolySymbol.from_coeffs(m, v1, v2, coeffs)
    if T.is_zero():
        T = PolySymbol.from_coeffs(m, v1, v2, {(alphas[0], 0, 0): poly_ring(m)[0].one})
    return T


def random_one_form(m: int, rng: random.Random, degree: int = 2) -> list:
    return [random_poly(m, rng, degree) for _ in range(m)]


def random_connection(m: int, rng: random.Random, degree: int = 1) -> ProjConnection:
    gamma = {}
    for i in range(m):
        for j in range(m):
            for k in range(j, m):
                gamma[(i, j, k)] = random_poly(m, rng, degree, terms=2)
    return ProjConnection(m, gamma)


def _rep_pair_json(v1, v2):
    return [v1.to_json(), v2.to_json()]


def _sym_json(T):
    return symbol_to_json(T)


# -- suites -----------------------------------------------------------------------------


def crochet_suite(ms=(2, 3, 4, 5), seed: int = 0, n_jacobi: int = 100) -> SuiteReport:
    """Jacobi identity, dual-basis Gram matrix, sum_r [e_r, eps^r] = -E/2, and X^{[h,h']}."""
    rng = random.Random(seed)
    rep = SuiteReport("crochet", {"m": list(ms), "seed": seed, "n_jacobi": n_jacobi})
    signs = {}
    for m in ms:
        cfg = {"m": m}
        bad = None
        for _ in range(n_jacobi):
            a, b, c = (random_element(m, rng) for _ in range(3))
            jac = bracket(a, bracket(b, c)) + bracket(b, bracket(c, a)) + bracket(c, bracket(a, b))
            if not jac.is_zero():
                bad = {"triple": [a.to_json(), b.to_json(), c.to_json()], "jacobiator": jac.to_json()}
                break
        rep.add("jacobi", bad is None, cfg, bad)

        fam = build_dual_bases(m)
        basis, dual = fam.basis(), fam.dual()
        bad = None
        for i, u in enumerate(basis):
            for j, w in enumerate(dual):
                val = killing(u, w)
                if val != (1 if i == j else 0):
                    bad = {"i": i, "j": j, "value": format_rational(val)}
                    break
            if bad:
                break
        rep.add("gram", bad is None, cfg, bad)

        acc = bracket(fam.e[0], fam.eps[0])
        for r in range(1, m):
            acc = acc + bracket(fam.e[r], fam.eps[r])
        target = fam.euler.scale(QQ(-1, 2))
        rep.add("crochet", acc == target, cfg, {"sum": acc.to_json(), "expected": target.to_json()})

        # realization sign: X^{[h,h']} against the bracket of vector fields
        plus = minus = True
        for _ in range(10):
            h, g = random_element(m, rng), random_element(m, rng)
            lhs = proj_vector_field(bracket(h, g))
            rhs = vector_field_bracket(proj_vector_field(h), proj_vector_field(g))
            plus &= lhs == rhs
            minus &= lhs == rhs.scale(-1)
        sign = 1 if plus else -1 if minus else 0
        signs[m] = sign
        rep.add("realization-homomorphism", sign == 1, cfg, {"sign": sign})
    rep.findings["realization_sign"] = {str(m): s for m, s in signs.items()}
    return rep


def gamma_suite(ms=(2, 3), k_max: int = 3, pairs=DEFAULT_PAIRS, n_random: int = 120, seed: int = 0) -> SuiteReport:
    """Closed-form gamma against the conjugation oracle, plus its structural properties."""
    rng = random.Random(seed)
    rep = SuiteReport(
        "gamma",
        {"m": list(ms), "k_max": k_max, "pairs": [_rep_pair_json(*p) for p in pairs], "n_random": n_random, "seed": seed},
    )
    configs = [(m, v1, v2, k) for m in ms for v1, v2 in pairs for k in range(k_max + 1)]
    for n in range(n_random):
        m, v1, v2, k = configs[n % len(configs)]
        cfg = {"m": m, "pair": _rep_pair_json(v1, v2), "k": k}
        T = random_symbol(m, v1, v2, k, rng)
        h = random_element(m, rng, grades=(-1, 0, 1))
        closed = flatcalc.gamma_apply(h, T)
        oracle = flatcalc.gamma_oracle(h, T)
        ok = rep.add("closed-form-vs-oracle", closed == oracle, cfg,
                     {"h": h.to_json(), "symbol": _sym_json(T), "closed": _sym_json(closed), "oracle": _sym_json(oracle)})
        if not ok:
            continue
        h0 = random_element(m, rng, grades=(-1, 0))
        g0 = flatcalc.gamma_apply(h0, T)
        rep.add("vanishes-on-g-1+g0", g0.is_zero() and flatcalc.gamma_oracle(h0, T).is_zero(), cfg,
                {"h": h0.to_json(), "symbol": _sym_json(T), "image": _sym_json(g0)})
        h1, h2 = random_element(m, rng, grades=(1,)), random_element(m, rng, grades=(1,))
        a = flatcalc.gamma_apply(h1, flatcalc.gamma_apply(h2, T))
        b = flatcalc.gamma_apply(h2, flatcalc.gamma_apply(h1, T))
        rep.add("commutativity", a == b, cfg, {"h1": h1.to_json(), "h2": h2.to_json(), "symbol": _sym_json(T)})
        rep.add("degree-lowering", closed.xi_degrees() <= ({k - 1} if k else set()), cfg,
                {"h": h.to_json(), "degrees": sorted(closed.xi_degrees())})
        p = random_poly(m, rng, 2)
        rep.add("constant-coefficients", flatcalc.gamma_apply(h, T.mul_poly(p)) == closed.mul_poly(p), cfg,
                {"h": h.to_json(), "symbol": _sym_json(T), "multiplier": poly_to_json(p, m)})
    return rep


def _block_symbols(fiber: FiberSpace, rng):
    """One symbol per Casimir block: a projector column times a random polynomial."""
    out = []
    for b in casimir_blocks(fiber).blocks:
        cols = [r for r in b.projector.transpose().to_list() if any(r)]
        vec = cols[rng.randrange(len(cols))]
        out.append((b, PolySymbol.from_vector(fiber, vec, random_poly(fiber.m, rng, 2))))
    return out


def casimir_suite(ms=(2, 3), k_max: int = 3, pairs=DEFAULT_PAIRS,
                  deltas=(QQ(1, 7), QQ(-2, 5), QQ(3, 11), QQ(5, 13), QQ(-7, 3)), seed: int = 0) -> SuiteReport:
    """casimir_direct = alpha_{k,s} Id blockwise; also decides which sign of delta is right."""
    rng = random.Random(seed)
    rep = SuiteReport("casimir", {"m": list(ms), "k_max": k_max, "pairs": [_rep_pair_json(*p) for p in pairs],
                                  "deltas": [format_rational(d) for d in deltas], "seed": seed})
    literal_ok, flipped_ok = True, True
    for m in ms:
        for v1, v2 in pairs:
            for d in deltas:
                w2 = with_shift(v1, v2, d, m)
                for k in range(k_max + 1):
                    fiber = FiberSpace(m, k, v1, w2)
                    for b, T in _block_symbols(fiber, rng):
                        C = casimir_direct(T)
                        good = C == T.scale(b.alpha)
                        literal_ok &= good
                        flipped_ok &= C == T.scale(alpha_eigenvalue(k, b.cprime, -d, m))
                        rep.add("casimir-eigenvalue", good,
                                {"m": m, "pair": _rep_pair_json(v1, w2), "delta": format_rational(d), "k": k, "block": b.index},
                                {"alpha": format_rational(b.alpha), "symbol": _sym_json(T), "image": _sym_json(C)})
    rep.findings["delta_sign"] = "literal" if literal_ok and not flipped_ok else "undetermined"
    rep.add("delta-sign-determined", literal_ok and not flipped_ok, {},
            {"literal": literal_ok, "flipped": flipped_ok})
    return rep


def tech_suite(ms=(2, 3), k_max: int = 3, pairs=DEFAULT_PAIRS, seed: int = 0) -> SuiteReport:
    """[gamma(h), C] against 2 sum_i gamma(eps^i) rho_*([h, e_i]) for every h in a basis of g_1.

    rho_*(B) is the fiber action entering L_X T = X.grad T - rho_*(DX) T. Besides
    the identity as stated, the suite checks the steps of its derivation:
    [gamma(h), N] = 0, [gamma(h), C] = -[L_h, N] and the order-zero part of
    [L_h, N]. The last step flips a sign, so the stated form fails while the
    signed form ``tech-identity-signed`` holds.
    """
    rng = random.Random(seed)
    rep = SuiteReport("tech", {"m": list(ms), "k_max": k_max, "pairs": [_rep_pair_json(*p) for p in pairs], "seed": seed})
    stated_ok = signed_ok = True
    for m in ms:
        fam = build_dual_bases(m)
        for v1, v2 in pairs:
            for k in range(k_max + 1):
                T = random_symbol(m, v1, v2, k, rng, entries=4)
                CT, NT = casimir_direct(T), n_operator(T)
                for j in range(m):
                    h = eps_raw(m, j)
                    cfg = {"m": m, "pair": _rep_pair_json(v1, v2), "k": k, "h": j}
                    g = lambda S: flatcalc.gamma_apply(h, S)
                    L = lambda S: flatcalc.lie_derivative(proj_vector_field(h), S)
                    gC = g(CT) - casimir_direct(g(T))
                    gN = g(NT) - n_operator(g(T))
                    LN = L(NT) - n_operator(L(T))
                    rhs = T.zero()
                    for i in range(m):
                        rhs = rhs + flatcalc.gamma_apply(fam.eps[i], T.rho(bracket(h, e_vec(m, i)).A))
                    rhs = rhs.scale(2)
                    payload = {"symbol": _sym_json(T), "lhs": _sym_json(gC), "rhs": _sym_json(rhs)}
                    stated_ok &= rep.add("tech-identity", gC == rhs, cfg, payload)
                    signed_ok &= rep.add("tech-identity-signed", gC == -rhs, cfg, payload)
                    rep.add("gamma-N-commute", gN.is_zero(), cfg, {"symbol": _sym_json(T), "commutator": _sym_json(gN)})
                    rep.add("gamma-C-equals-minus-L-N", gC == -LN, cfg, {"symbol": _sym_json(T)})
                    rep.add("L-N-order-zero", LN == rhs, cfg, {"symbol": _sym_json(T), "LN": _sym_json(LN)})
    rep.findings["tech_sign"] = "stated" if stated_ok else "negated" if signed_ok else "neither"
    return rep


def flat_equivariance_suite(ms=(2,), k_max: int = 3, pairs=None, deltas=(QQ(1, 7), QQ(-2, 5), QQ(3, 11)),
                            coeff_degree: int = 3, brute_force: bool = True, seed: int = 0) -> SuiteReport:
    """quantize_flat is sl(m+1)-equivariant and agrees with the brute-force oracle."""
    pairs = pairs or ((density(QQ(2)), density(QQ(0))),)
    rep = SuiteReport("flat-equivariance", {"m": list(ms), "k_max": k_max, "pairs": [_rep_pair_json(*p) for p in pairs],
                                            "deltas": [format_rational(d) for d in deltas],
                                            "coeff_degree": coeff_degree, "brute_force": brute_force, "seed": seed})
    for m in ms:
        for v1, v2 in pairs:
            for d in deltas:
                w2 = with_shift(v1, v2, d, m)
                for k in range(k_max + 1):
                    cfg = {"m": m, "pair": _rep_pair_json(v1, w2), "delta": format_rational(d), "k": k}
                    res = verify_equivariance(quantize_flat, m, k, v1, w2, coeff_degree)
                    rep.add("equivariance", res.passed, dict(cfg, checked=res.checked), res.counterexample)
                    if brute_force:
                        bf = brute_force_quantization(k, v1, w2, m)
                        same = bf.unique and full_table(bf) == flat_table(m, k, v1, w2)
                        rep.add("brute-force-agreement", same, cfg,
                                {"unique": bf.unique, "rank": bf.rank, "unknowns": bf.unknowns,
                                 "certificate": bf.certificate()})
                    for T in _symbols_for_preservation(m, v1, w2, k):
                        D = quantize_flat(T)
                        rep.add("symbol-preservation", check_symbol_preservation(T, D), cfg,
                                {"symbol": _sym_json(T), "operator": operator_to_json(D)})
    return rep


def _symbols_for_preservation(m, v1, v2, k):
    R = poly_ring(m)[0]
    x = poly_ring(m)[1]
    fiber = FiberSpace(m, k, v1, v2)
    yield PolySymbol.from_coeffs(m, v1, v2, {key: R.one + x[0] * x[m - 1] for key in fiber.basis})


def curved_invariance_suite(m: int = 2, k_max: int = 2, pairs=None, n_instances: int = 5, seed: int = 0,
                            flat_ms=(2,), check_defects: bool = True) -> SuiteReport:
    """Flat reduction, projective invariance, the equivariance defect and the commutator identity."""
    rng = random.Random(seed)
    pairs = pairs or ((density(QQ(2)), density(QQ(-3, 7))),)
    rep = SuiteReport("curved-invariance", {"m": m, "k_max": k_max, "pairs": [_rep_pair_json(*p) for p in pairs],
                                            "n_instances": n_instances, "seed": seed, "flat_m": list(flat_ms)})
    for mm in flat_ms:
        for v1, v2 in pairs:
            for k in range(k_max + 1):
                T = random_symbol(mm, v1, v2, k, rng)
                Dc, Df = quantize_curved(ProjConnection.flat(mm), T), quantize_flat(T)
                rep.add("flat-reduction", Dc == Df, {"m": mm, "pair": _rep_pair_json(v1, v2), "k": k},
                        {"symbol": _sym_json(T), "curved": operator_to_json(Dc), "flat": operator_to_json(Df)})
    g1 = [eps_raw(m, j) for j in range(m)]
    curved_differs = 0
    for n in range(n_instances):
        c = random_connection(m, rng, 1)
        alpha = random_one_form(m, rng, 2)
        c2 = c.weyl_shift(alpha)
        rep.add("weyl-witness", weyl_equivalent(c, c2).equivalent, {"instance": n}, {"connection": connection_to_json(c)})
        cd = normal_cartan(c)
        for v1, v2 in pairs:
            for k in range(k_max + 1):
                cfg = {"instance": n, "pair": _rep_pair_json(v1, v2), "k": k}
                T = random_symbol(m, v1, v2, k, rng)
                D1, D2 = quantize_curved(c, T), quantize_curved(c2, T)
                rep.add("projective-invariance", D1 == D2, cfg,
                        {"connection": connection_to_json(c), "alpha": [poly_to_json(a, m) for a in alpha],
                         "symbol": _sym_json(T), "lhs": operator_to_json(D1), "rhs": operator_to_json(D2)})
                if D1 != quantize_flat(T):
                    curved_differs += 1
                rep.add("symbol-preservation", check_symbol_preservation(T, D1), cfg,
                        {"connection": connection_to_json(c), "symbol": _sym_json(T), "operator": operator_to_json(D1)})
                if not check_defects:
                    continue
                TL = LiftedFunction.from_symbol(T)
                f = LiftedFunction.argument(m, v1)
                h = g1[n % m].scale(rng.randint(1, 3)) + g1[(n + 1) % m].scale(rng.randint(-2, 2))
                dfx = equivariance_defect(cd, h, TL, f)
                rep.add("equivariance-defect", dfx.is_zero(), cfg,
                        {"connection": connection_to_json(c), "h": h.to_json(), "symbol": _sym_json(T)})
                com = commutator_defect(cd, h, TL)
                rep.add("commutator", com.is_zero(), cfg,
                        {"connection": connection_to_json(c), "h": h.to_json(), "symbol": _sym_json(T)})
    # guards against a vacuous pass: the curved operators must really differ from the flat ones
    rep.findings["curved_differs_from_flat"] = curved_differs
    return rep


SUITES = {
    "crochet": crochet_suite,
    "gamma": gamma_suite,
    "casimir": casimir_suite,
    "tech": tech_suite,
    "flat-equivariance": flat_equivariance_suite,
    "curved-invariance": curved_invariance_suite,
}


def run_suite(name: str, **kwargs) -> SuiteReport:
    try:
        fn = SUITES[name]
    except KeyError:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}") from None
    t0 = time.perf_counter()
    rep = fn(**kwargs)
    rep.elapsed = time.perf_counter() - t0
    log.info("suite %s: %d checks, %d failed, %.2fs", name, len(rep.checks), len(rep.failures), rep.elapsed)
    return rep
