"""Differential calculi of the crossed product from the two operators.

Universal forms are words ``a0 dx1 a1 dx2 ...``; ``pi_eval`` replaces every
``dx`` by the commutator with the chosen operator.  Relations are checked as
identities of :class:`~kronecker_triples.hilbert.BlockOperator` on a window,
exactly when all coefficients are Gaussian rationals with formal phases.

Normalization: with derivatives ``i(ak+bl)``, ``i(bk-al)`` the commutators
carry an explicit factor ``i``; ``[Qt,U_j]^2 = +U_j^2`` in this convention
and ``(-i[Qt,U_j])^2 = -U_j^2`` in the real-matrix convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath
import numpy as np
import sympy

from .algebra import AlgebraElement, CrossedProductAlgebra, FoliationParams, equals, random_element
from .hilbert import (BlockOperator, ModeIndex, SectionVector, assemble, commutator, operator_difference,
                      pi, to_dense, window)
from .scalars import GaussianRational, I, PhaseExponent, Phased
from .spectral import dirac_operator, eta_vector, gamma, mixed_lambda

__all__ = [
    "RelationReport",
    "Diff",
    "FormWord",
    "d",
    "form",
    "pi_eval",
    "OmegaElement",
    "reduce_word",
    "algebra_relations",
    "check_linear_relations",
    "dirac_relations",
    "freeness_certificate",
    "omega2_separation",
    "higher_degree_vanishing",
    "leibniz_check",
    "dirac_commutator_table",
    "weighted_gamma",
    "generation_matrix",
    "generation_probe",
    "sign_variant_checks",
    "relation_suite",
]

EXACT, WITHIN, VIOLATED = "exact", "within-tolerance", "violated"


@dataclass
class RelationReport:
    relation: str
    status: str
    max_residual: float = 0.0
    witness: ModeIndex | None = None
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.status in (EXACT, WITHIN)

    def to_json(self) -> dict:
        return {
            "relation": self.relation,
            "status": self.status,
            "max_residual": self.max_residual,
            "witness": None if self.witness is None else list(self.witness),
            "detail": self.detail,
        }


def compare(relation: str, A: BlockOperator, B: BlockOperator, radius: int, tol: float = 1e-10,
            values=None, detail: str = "") -> RelationReport:
    exact, worst, witness = operator_difference(A, B, radius, values)
    if exact:
        return RelationReport(relation, EXACT, 0.0, None, detail)
    status = WITHIN if worst <= tol else VIOLATED
    return RelationReport(relation, status, worst, witness if status == VIOLATED else None, detail)


def _combine(relation: str, reports: Sequence[RelationReport], detail: str = "") -> RelationReport:
    if any(r.status == VIOLATED for r in reports):
        bad = max((r for r in reports if r.status == VIOLATED), key=lambda r: r.max_residual)
        return RelationReport(relation, VIOLATED, bad.max_residual, bad.witness, detail or bad.detail)
    worst = max((r.max_residual for r in reports), default=0.0)
    status = EXACT if all(r.status == EXACT for r in reports) else WITHIN
    return RelationReport(relation, status, worst, None, detail)


# -- universal forms -----------------------------------------------------------

@dataclass(frozen=True)
class Diff:
    """Differential marker ``d(x)``."""

    arg: AlgebraElement


@dataclass(frozen=True)
class FormWord:
    factors: tuple = ()

    @property
    def degree(self) -> int:
        return sum(isinstance(f, Diff) for f in self.factors)

    def __mul__(self, other) -> "FormWord":
        if isinstance(other, FormWord):
            return FormWord(self.factors + other.factors)
        return FormWord(self.factors + (other,))

    def __rmul__(self, other) -> "FormWord":
        return FormWord((other,) + self.factors)


def d(x: AlgebraElement) -> FormWord:
    return FormWord((Diff(x),))


def form(*factors) -> FormWord:
    out = FormWord()
    for f in factors:
        out = out * f
    return out


def pi_eval(w: FormWord, op: BlockOperator) -> BlockOperator:
    """``pi(a0)[op, pi(a1)] pi(a2) ...`` for the word ``a0 da1 a2 ...``."""
    result = None
    for f in w.factors:
        factor = commutator(op, f.arg) if isinstance(f, Diff) else pi(f, op.dim)
        result = factor if result is None else result @ factor
    return BlockOperator.identity(op.dim) if result is None else result


# -- symbolic reduction in the calculus of the first-order operator ------------

class OmegaElement:
    """``sum a_w du_{w1} du_{w2} ...`` with left algebra coefficients.

    ``quotient=True`` applies ``du_j du_j = 0`` (the calculus);
    ``quotient=False`` applies ``du_j du_j = U_j^2`` which holds for the
    represented commutators, so the reduced element has the same image.
    """

    def __init__(self, algebra: CrossedProductAlgebra, terms=None, quotient: bool = True):
        self.algebra = algebra
        self.quotient = quotient
        self.terms: dict[tuple[int, ...], AlgebraElement] = {}
        for gens, a in (terms or {}).items():
            self._add(tuple(gens), a)

    def _add(self, gens: tuple[int, ...], a: AlgebraElement):
        for g2, sign, extra in self._normal(gens):
            c = a if extra is None else a * extra
            c = c if sign > 0 else -c
            cur = self.terms.get(g2)
            new = c if cur is None else cur + c
            if new.is_zero():
                self.terms.pop(g2, None)
            else:
                self.terms[g2] = new

    def _normal(self, gens: tuple[int, ...]):
        """Yield ``(sorted gens, sign, algebra factor)`` after anticommuting and squaring."""
        gens = list(gens)
        sign = 1
        # bubble sort with sign
        for i in range(len(gens)):
            for j in range(len(gens) - 1 - i):
                if gens[j] > gens[j + 1]:
                    gens[j], gens[j + 1] = gens[j + 1], gens[j]
                    sign = -sign
        extra = None
        out: list[int] = []
        for g in gens:
            if out and out[-1] == g:
                if self.quotient:
                    return
                out.pop()
                sq = self.algebra.u1 * self.algebra.u1 if g == 1 else self.algebra.u2 * self.algebra.u2
                extra = sq if extra is None else extra * sq
            else:
                out.append(g)
        yield tuple(out), sign, extra

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degrees(self) -> set[int]:
        return {len(g) for g in self.terms}


def _move_left(algebra: CrossedProductAlgebra, gens: tuple[int, ...], x: AlgebraElement) -> AlgebraElement:
    """``w x = x' w``: ``du_1 v_t = e^{-iat} v_t du_1``, ``du_2 v_t = e^{-ibt} v_t du_2``, ``u`` commute."""
    if not gens:
        return x
    reg = algebra.registry
    n1, n2 = gens.count(1), gens.count(2)
    out = {}
    for (t, k, l), c in x.terms.items():
        out[(t, k, l)] = c.times_phase(reg.phase_of_frequency(t, -n1, -n2))
    return AlgebraElement(algebra, out)


def _differential(x: AlgebraElement) -> list[tuple[AlgebraElement, int]]:
    """``d(c v_t u1^k u2^l) = k c v_t u1^{k-1} u2^l du1 + l c v_t u1^k u2^{l-1} du2``."""
    alg = x.algebra
    parts = []
    for (t, k, l), c in x.terms.items():
        if k:
            parts.append((AlgebraElement(alg, {(t, k - 1, l): c * k}), 1))
        if l:
            parts.append((AlgebraElement(alg, {(t, k, l - 1): c * l}), 2))
    return parts


def reduce_word(w: FormWord, algebra: CrossedProductAlgebra, quotient: bool = True) -> OmegaElement:
    """Normal form ``sum a_w du_w`` of a universal word in the first-order calculus."""
    state = OmegaElement(algebra, {(): algebra.one}, quotient)
    for f in w.factors:
        nxt = OmegaElement(algebra, quotient=quotient)
        for gens, a in state.terms.items():
            if isinstance(f, Diff):
                for coeff, j in _differential(f.arg):
                    nxt._add(gens + (j,), a * _move_left(algebra, gens, coeff))
            else:
                nxt._add(gens, a * _move_left(algebra, gens, f))
        state = nxt
    return state


def omega_to_operator(el: OmegaElement, op: BlockOperator) -> BlockOperator:
    alg = el.algebra
    total = BlockOperator.zero(op.dim)
    for gens, a in el.terms.items():
        w = FormWord((a,))
        for g in gens:
            w = w * Diff(alg.u1 if g == 1 else alg.u2)
        total = total + pi_eval(w, op)
    return total


# -- relation suites ---------------------------------------------------------------

def algebra_relations(alg: CrossedProductAlgebra, radius: int = 2) -> list[RelationReport]:
    """Defining relations of the algebra, in normal form and in the representation."""
    reg = alg.registry
    T = reg.symbols[0]
    u1, u2, vT = alg.u1, alg.u2, alg.v(T)
    S = reg.symbols[1] if reg.size > 1 else {T: Fraction(1, 2)}
    vS = alg.v(S)
    tv = reg.vector(T)
    ea = Phased.phase(reg.phase_of_frequency(tv, 1, 0))
    eb = Phased.phase(reg.phase_of_frequency(tv, 0, 1))
    sum_time = {s: q for s, q in zip(reg.symbols, (p + q for p, q in zip(reg.vector(T), reg.vector(S))))}
    cases = [
        ("u1 u2 = u2 u1", u1 * u2, u2 * u1),
        ("v_t u1 = e^{iat} u1 v_t", vT * u1, (u1 * vT) * ea),
        ("v_t u2 = e^{ibt} u2 v_t", vT * u2, (u2 * vT) * eb),
        ("v_t v_s = v_{t+s}", vT * vS, alg.v(sum_time)),
        ("u1 u1* = 1", u1 * u1.star(), alg.one),
        ("u2 u2* = 1", u2 * u2.star(), alg.one),
        ("v_t v_t* = 1", vT * vT.star(), alg.one),
    ]
    out = []
    for name, x, y in cases:
        ok = equals(x, y)
        rep = compare(name + " [represented]", pi(x), pi(y), radius)
        status = EXACT if ok and rep.status == EXACT else (rep.status if ok else VIOLATED)
        out.append(RelationReport(name, status, rep.max_residual, rep.witness))
    return out


def check_linear_relations(params: FoliationParams, alg: CrossedProductAlgebra | None = None,
                           radius: int = 3, tamper: bool = False) -> list[RelationReport]:
    """Bimodule, anticommutation and square relations for the first-order operator."""
    alg = alg or CrossedProductAlgebra(params)
    Q = assemble(params, "Qtilde", tamper=tamper)
    reg = alg.registry
    T = reg.symbols[0]
    tv = reg.vector(T)
    U = {1: alg.u1, 2: alg.u2}
    C = {j: commutator(Q, U[j]) for j in (1, 2)}
    PU = {j: pi(U[j]) for j in (1, 2)}
    vT = alg.v(T)
    PV = pi(vT)
    out = []
    for j in (1, 2):
        for k in (1, 2):
            out.append(compare(f"U{j}[Q,U{k}] = [Q,U{k}]U{j}", PU[j] @ C[k], C[k] @ PU[j], radius))
    for j, freq in ((1, (1, 0)), (2, (0, 1))):
        ph = Phased.phase(reg.phase_of_frequency(tv, *freq))
        out.append(compare(f"V_t[Q,U{j}] = e^{{i{'ab'[j - 1]}t}}[Q,U{j}]V_t", PV @ C[j], (C[j] @ PV).scale(ph),
                           radius))
    out.append(compare("[Q,U1][Q,U2] = -[Q,U2][Q,U1]", C[1] @ C[2], -(C[2] @ C[1]), radius))
    anti = np.array([[0, 0, 0, -1], [0, 0, -1, 0], [0, 1, 0, 0], [1, 0, 0, 0]], dtype=object)
    out.append(compare("[Q,U1][Q,U2] = antidiag (x) s1 s2", C[1] @ C[2], BlockOperator.constant(anti, (1, 1)),
                       radius))
    out.append(compare("[Q,V_t] = 0", commutator(Q, vT), BlockOperator.zero(), radius))
    out.append(compare("[Q,1] = 0", commutator(Q, alg.one), BlockOperator.zero(), radius))
    for j in (1, 2):
        Cn = C[j].scale(-I)
        out.append(compare(f"(-i[Q,U{j}])^2 = -U{j}^2", Cn @ Cn, -(PU[j] @ PU[j]), radius,
                           detail="real-matrix normalization"))
        out.append(compare(f"[Q,U{j}]^2 = +U{j}^2", C[j] @ C[j], PU[j] @ PU[j], radius,
                           detail="derivative convention i(ak+bl), i(bk-al)"))
    for j in (1, 2):
        Us = U[j].star()
        out.append(compare(f"[Q,U{j}*] = -U{j}*[Q,U{j}]U{j}*", commutator(Q, Us), -(pi(Us) @ C[j] @ pi(Us)),
                           radius))
    return out


def _exact_table_probe(params: FoliationParams, r, p, s, q, k, l, branch: str) -> bool:
    """Exact (sympy radicals) check of the commutator table on one fiber block."""
    a = sympy.Rational(params.a.numerator, params.a.denominator)
    b = sympy.Rational(params.b.numerator, params.b.denominator)

    def data(kk, ll):
        if kk == 0 and ll == 0:
            return sympy.Integer(0), sympy.Integer(1), sympy.zeros(2)
        X, Y = a * kk + b * ll, b * kk - a * ll
        L = sympy.sqrt(X ** 4 + Y ** 2)
        sq = sympy.sqrt(L)
        blk = sympy.Matrix([[-X ** 2, sympy.I * Y], [-sympy.I * Y, X ** 2]]) / sq
        return sq, (-X ** 2 - sympy.I * Y) / L, blk

    def eta(kk, ll, br):
        _, g, _ = data(kk, ll)
        return sympy.Matrix([1, -1]) / 2 if br == "+" else g * sympy.Matrix([1, 1]) / 2

    K = (k + s, l + q)
    Kp = (K[0] + r, K[1] + p)
    v = eta(k, l, branch)
    sK, gK, DK = data(*K)
    s0, g0, D0 = data(k, l)
    _, gKp, _ = data(*Kp)
    lhs = DK * v - D0 * v
    if branch == "+":
        rhs = (sK * gK - s0 * g0) / gKp * eta(*Kp, "-")
    else:
        rhs = (sK * g0 - s0 * gK) / gK * eta(*Kp, "+")
    return all(sympy.simplify(sympy.expand(e)) == 0 for e in (lhs - rhs))


def weighted_gamma(params: FoliationParams, k: int, l: int, dps: int | None = None):
    """``sqrt(lam_kl) gamma_kl = (-X^2 - iY) / (X^4 + Y^2)^{1/4}`` (0 at the origin)."""
    if k == 0 and l == 0:
        return mpmath.mpc(0) if dps else 0j
    if dps:
        with mpmath.workdps(dps):
            a, b = _mp(params.a), _mp(params.b)
            X, Y = a * k + b * l, b * k - a * l
            return mpmath.mpc(-X * X, -Y) / mpmath.root(X ** 4 + Y * Y, 4)
    lam = mixed_lambda(params, k, l)
    return math.sqrt(lam) * gamma(params, k, l).value


def _mp(x):
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


def dirac_commutator_table(params: FoliationParams, r: int, p: int, s: int, q: int, k: int, l: int,
                           family: int, branch: str, alt_minus: bool = False) -> SectionVector:
    """``U1^r U2^p [D, U1^s U2^q] eta_{kl+-}`` as a multiple of ``eta_{k+r+s, l+p+q, -+}``.

    ``+``: ``(sqrt(lam_K) g_K - sqrt(lam_kl) g_kl) / g_{K'}``;
    ``-``: ``(sqrt(lam_K) g_kl - sqrt(lam_kl) g_K) / g_K``, with ``K = (k+s, l+q)``
    and ``K' = K + (r, p)``.  ``alt_minus`` uses the ``+`` coefficient for both.
    """
    K = (k + s, l + q)
    Kp = (K[0] + r, K[1] + p)
    g0, gK, gKp = (gamma(params, *x).value for x in ((k, l), K, Kp))
    s0, sK = (math.sqrt(mixed_lambda(params, *x)) for x in ((k, l), K))
    if branch == "+" or alt_minus:
        coeff = (sK * gK - s0 * g0) / gKp
    else:
        coeff = (sK * g0 - s0 * gK) / gK
    target = "-" if branch == "+" else "+"
    return eta_vector(params, *Kp, family, target).scale(coeff)


def _table_composed(params: FoliationParams, alg: CrossedProductAlgebra, D: BlockOperator, r, p, s, q, k, l,
                   family, branch) -> SectionVector:
    W = alg.monomial(k=s, l=q)
    left = pi(alg.monomial(k=r, l=p))
    return (left @ commutator(D, W)).apply(eta_vector(params, k, l, family, branch))


def dirac_relations(params: FoliationParams, alg: CrossedProductAlgebra | None = None, radius: int = 3,
                    tol: float = 1e-10, probe: int = 2, exact_probe: Sequence[tuple] | None = None,
                    ) -> list[RelationReport]:
    alg = alg or CrossedProductAlgebra(params)
    D = dirac_operator(params)
    reg = alg.registry
    T = reg.symbols[0]
    tv = reg.vector(T)
    vT = alg.v(T)
    out = [compare("[D,V_t] = 0", commutator(D, vT), BlockOperator.zero(), radius)]
    for j, x, freq in ((1, alg.u1, (1, 0)), (2, alg.u2, (0, 1))):
        Cj = commutator(D, x)
        ph = Phased.phase(reg.phase_of_frequency(tv, *freq))
        out.append(compare(f"V_t[D,U{j}] = e^{{i{'ab'[j - 1]}t}}[D,U{j}]V_t", pi(vT) @ Cj,
                           (Cj @ pi(vT)).scale(ph), radius, tol))
        xs = x.star()
        out.append(compare(f"[D,U{j}*] = -U{j}*[D,U{j}]U{j}*", commutator(D, xs), -(pi(xs) @ Cj @ pi(xs)),
                           radius, tol))
    # commutator table: closed form vs composed operators
    reports = []
    rng = range(-probe, probe + 1)
    for r, p, s, q in [(0, 0, 1, 0), (0, 0, 0, 1), (1, 0, 1, 0), (0, 1, 1, 1), (-1, 2, 2, -1), (1, 1, -1, 1)]:
        for k in rng:
            for l in rng:
                for fam in (1, 2):
                    for br in "+-":
                        lhs = _table_composed(params, alg, D, r, p, s, q, k, l, fam, br)
                        rhs = dirac_commutator_table(params, r, p, s, q, k, l, fam, br)
                        res = (lhs - rhs).max_abs({})
                        st = WITHIN if res <= tol else VIOLATED
                        reports.append(RelationReport("table", st, res,
                                                      None if st != VIOLATED else ModeIndex(k, l, fam)))
    table = _combine("U1^r U2^p [D,U1^s U2^q] eta table", reports)
    if params.is_rational and table.status != VIOLATED:
        probes = exact_probe or [(0, 0, 1, 0, 1, 2), (1, 2, 1, 1, -2, 3), (2, -1, 0, 1, 0, 0),
                                 (0, 0, 1, 0, -1, 0), (-1, 1, 2, 1, 1, -1)]
        if all(_exact_table_probe(params, *pr, br) for pr in probes for br in "+-"):
            table = RelationReport(table.relation, EXACT, 0.0, None,
                                   f"exact on {len(probes) * 2} radical probes; composed operators agree "
                                   f"within {table.max_residual:.1e}")
        else:
            table = RelationReport(table.relation, VIOLATED, table.max_residual, None, "radical probe failed")
    out.append(table)
    return out


def sign_variant_checks(params: FoliationParams, radius: int = 2) -> list[RelationReport]:
    """Sign and normalization variants of the identities (expected to be violated)."""
    alg = CrossedProductAlgebra(params)
    Q = assemble(params, "Qtilde")
    out = []
    for j, x in ((1, alg.u1), (2, alg.u2)):
        C = commutator(Q, x)
        out.append(compare(f"[Q,U{j}]^2 = -U{j}^2 (unnormalized)", C @ C, -(pi(x) @ pi(x)), radius))
    reps = []
    D = dirac_operator(params)
    for k in range(-radius, radius + 1):
        for l in range(-radius, radius + 1):
            lhs = _table_composed(params, alg, D, 1, 0, 1, 0, k, l, 1, "-")
            rhs = dirac_commutator_table(params, 1, 0, 1, 0, k, l, 1, "-", alt_minus=True)
            res = (lhs - rhs).max_abs({})
            reps.append(RelationReport("", WITHIN if res <= 1e-10 else VIOLATED, res,
                                       None if res <= 1e-10 else ModeIndex(k, l, 1)))
    out.append(_combine("eta_- table with the + coefficient", reps))
    return out


# -- freeness / two-forms -------------------------------------------------------------

@dataclass
class FreenessCertificate:
    which: str
    passed: bool
    count: int
    min_modulus: float
    max_modulus: float
    exact: bool
    detail: str = ""
    witness: tuple | None = None

    def to_json(self) -> dict:
        return {k: v for k, v in self.__dict__.items()}


def freeness_certificate(params: FoliationParams, alg: CrossedProductAlgebra | None = None,
                         ij_range: Iterable[int] = range(-2, 3), modes: int = 2,
                         times: Sequence | None = None) -> FreenessCertificate:
    """2x2 systems from ``a V_t U1^i U2^j [Q,U1] + b V_s U1^{i+1} U2^{j-1} [Q,U2]`` acting on ``e1_{kl}``."""
    alg = alg or CrossedProductAlgebra(params)
    ij = list(ij_range)
    if not ij:
        raise ValueError("degenerate probe family: empty coefficient range")
    reg = alg.registry
    times = times or [reg.symbols[0], {reg.symbols[0]: Fraction(-1, 2)}]
    Q = assemble(params, "Qtilde")
    C1, C2 = commutator(Q, alg.u1), commutator(Q, alg.u2)
    count, exact = 0, True
    lo, hi, witness = math.inf, 0.0, None
    for i in ij:
        for j in ij:
            for t in times:
                for t2 in times:
                    A = pi(alg.monomial(t, i, j)) @ C1
                    B = pi(alg.monomial(t2, i + 1, j - 1)) @ C2
                    for k, l in window(modes):
                        e1 = SectionVector.basis(k, l, 1)
                        va, vb = A.apply(e1), B.apply(e1)
                        tgt = (k + i + 1, l + j)
                        M = [[va.coeffs.get(ModeIndex(*tgt, c), Phased()),
                              vb.coeffs.get(ModeIndex(*tgt, c), Phased())] for c in (2, 3)]
                        det = M[0][0] * M[1][1] - M[0][1] * M[1][0]
                        count += 1
                        # a single formal phase times a constant: modulus is |constant|
                        if len(det.terms) != 1:
                            exact = False
                            mod = 0.0
                        else:
                            (c,) = det.terms.values()
                            if isinstance(c, GaussianRational):
                                exact = exact and c.abs2() == 1
                            else:
                                exact = False
                            mod = abs(c)
                        if mod < lo:
                            lo, witness = mod, (i, j, k, l)
                        hi = max(hi, mod)
    passed = abs(lo - 1) <= 1e-12 and abs(hi - 1) <= 1e-12
    return FreenessCertificate("Omega1_Qtilde", passed, count, lo, hi, exact,
                               "determinant = (a^2+b^2) x phase", witness)


def omega2_separation(params: FoliationParams, alg: CrossedProductAlgebra | None = None, samples: int = 50,
                      seed: int = 0, radius: int = 3, dense_radius: int = 2) -> FreenessCertificate:
    """``pi(a)[Q,U1][Q,U2]`` is component-antidiagonal, ``pi(algebra)`` is component-diagonal."""
    alg = alg or CrossedProductAlgebra(params)
    rng = np.random.default_rng(seed)
    Q = assemble(params, "Qtilde")
    K = commutator(Q, alg.u1) @ commutator(Q, alg.u2)
    values = {atom: 0.37 * (n + 1) for n, atom in enumerate(alg.registry.atoms())}
    diag_mask = np.zeros((4, 4), dtype=bool)
    np.fill_diagonal(diag_mask, True)
    overlap, exact, nonzero = 0.0, True, True
    witness = None
    for n in range(samples):
        a = random_element(alg, rng, n_terms=int(rng.integers(1, 4)))
        P = pi(a) @ K
        seen = False
        for k, l in window(radius):
            for s in P.shifts:
                blk = P.fiber(k, l, s)
                for (r, c), e in np.ndenumerate(blk):
                    if r == c and not e.is_zero():
                        exact = False
                        overlap = max(overlap, e.l1())
                        witness = witness or (n, k, l)
                    if r != c and not e.is_zero():
                        seen = True
        nonzero = nonzero and (seen or a.is_zero())
        if n < 3:
            dense = to_dense(P, dense_radius, values)
            m = dense.matrix
            comp = np.array([md.comp for md in dense.modes])
            same = comp[:, None] == comp[None, :]
            overlap = max(overlap, float(np.abs(m[same]).max(initial=0.0)))
    passed = exact and overlap == 0.0 and nonzero
    return FreenessCertificate("Omega2_Qtilde", passed, samples, overlap, overlap, exact,
                               "max |diagonal-component entry| of pi(a)[Q,U1][Q,U2]", witness)


def higher_degree_vanishing(params: FoliationParams, alg: CrossedProductAlgebra | None = None, words: int = 200,
                            seed: int = 0, max_degree: int = 4, spot_checks: int = 6,
                            radius: int = 2) -> RelationReport:
    """Random words of degree 3..max_degree reduce to 0; spot-check images against the unreduced words."""
    if max_degree < 3:
        raise ValueError("degree must be at least 3")
    alg = alg or CrossedProductAlgebra(params)
    rng = np.random.default_rng(seed)
    Q = assemble(params, "Qtilde")
    gens = [alg.u1, alg.u2, alg.u1.star(), alg.u2.star(), alg.u1 * alg.u2]
    failures = 0
    spot = []
    witness = None
    for n in range(words):
        deg = int(rng.integers(3, max_degree + 1))
        factors = [random_element(alg, rng, n_terms=2)]
        for _ in range(deg):
            g = gens[int(rng.integers(len(gens)))]
            if rng.random() < 0.3:
                g = g * random_element(alg, rng, n_terms=1, max_power=1)
            factors.append(Diff(g))
            if rng.random() < 0.5:
                factors.append(random_element(alg, rng, n_terms=1))
        w = FormWord(tuple(factors))
        if not reduce_word(w, alg).is_zero():
            failures += 1
            witness = witness or n
        if n < spot_checks:
            raw = reduce_word(w, alg, quotient=False)
            spot.append(compare("spot", pi_eval(w, Q), omega_to_operator(raw, Q), radius))
    if failures:
        return RelationReport("Omega^k = 0 for k >= 3", VIOLATED, float(failures), None,
                              f"{failures} of {words} words did not reduce to 0 (first #{witness})")
    sp = _combine("spot", spot)
    status = EXACT if sp.status == EXACT else sp.status
    return RelationReport("Omega^k = 0 for k >= 3", status, sp.max_residual, sp.witness,
                          f"{words} words reduced to 0; {len(spot)} operator images matched the reduction")


def leibniz_check(params: FoliationParams, op_kind: str = "Qtilde", alg: CrossedProductAlgebra | None = None,
                  samples: int = 5, seed: int = 0, radius: int = 2, tol: float = 1e-10) -> RelationReport:
    """``pi(d(xy)) = pi(dx y) + pi(x dy)`` for random ``x, y``."""
    alg = alg or CrossedProductAlgebra(params)
    rng = np.random.default_rng(seed)
    op = assemble(params, "Qtilde") if op_kind == "Qtilde" else dirac_operator(params)
    reps = []
    for _ in range(samples):
        x = random_element(alg, rng, n_terms=2, max_power=1)
        y = random_element(alg, rng, n_terms=2, max_power=1)
        lhs = pi_eval(d(x * y), op)
        rhs = pi_eval(form(d(x), y), op) + pi_eval(form(x, d(y)), op)
        reps.append(compare("leibniz", lhs, rhs, radius, tol))
    return _combine(f"Leibniz d(xy) = dx y + x dy [{op_kind}]", reps)


# -- determinant evidence for the Dirac calculus ---------------------------------------

def generation_matrix(params: FoliationParams, s: int, q: int, k0: int, dps: int = 50) -> mpmath.matrix:
    """``C_{k,(m,n)} = sqrt(lam) gamma at (k+s-m, q-n) minus the same at (k, 0)``, rows ``k0..k0+sq-1``."""
    n = s * q
    with mpmath.workdps(dps):
        M = mpmath.matrix(n, n)
        for row in range(n):
            k = k0 + row
            base = weighted_gamma(params, k, 0, dps)
            for m in range(s):
                for nn in range(q):
                    M[row, m * q + nn] = weighted_gamma(params, k + s - m, q - nn, dps) - base
    return M


@dataclass
class ProbeReport:
    s: int
    q: int
    k_range: tuple[int, int]
    min_abs_det: float
    witness_k: int | None
    threshold: float
    passed: bool
    dets: list[float] = field(default_factory=list)
    delegated: bool = False

    def to_json(self) -> dict:
        return dict(self.__dict__)


def generation_probe(params: FoliationParams, s: int, q: int, k_range: Iterable[int], threshold: float = 1e-8,
                     dps: int = 60) -> ProbeReport:
    """Minimum ``|det C|`` over the probed range (finite evidence only)."""
    ks = list(k_range)
    if s > 4 or q > 4:
        raise ValueError("probe limited to s, q <= 4")
    if not ks:
        return ProbeReport(s, q, (0, -1), math.inf, None, threshold, True)
    if q == 0:
        from .hankel import hankel_det, h_function
        f = h_function(params, dps=dps)
        dets = [float(abs(hankel_det(f, list(range(k + 1, k + 1 + s)), s - 1, dps=dps))) for k in ks]
        delegated = True
    else:
        dets = []
        with mpmath.workdps(dps):
            for k in ks:
                dets.append(float(abs(mpmath.det(generation_matrix(params, s, q, k, dps)))))
        delegated = False
    i = int(np.argmin(dets))
    return ProbeReport(s, q, (ks[0], ks[-1]), dets[i], ks[i], threshold, dets[i] > threshold, dets, delegated)


# -- aggregate -----------------------------------------------------------------------------

def relation_suite(params: FoliationParams, alg: CrossedProductAlgebra | None = None, radius: int = 3,
                   tamper: bool = False) -> list[RelationReport]:
    """Algebra, first-order calculus and Dirac commutator relations."""
    alg = alg or CrossedProductAlgebra(params)
    out = algebra_relations(alg)
    out += check_linear_relations(params, alg, radius, tamper=tamper)
    out += dirac_relations(params, alg, radius)
    return out
