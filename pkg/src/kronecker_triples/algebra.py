"""Normal-form arithmetic in the crossed product O(T^2) x R.

The algebra is presented by unitaries ``u1, u2`` and ``v_t`` with

    u1 u2 = u2 u1,   v_t u1 = e^{iat} u1 v_t,   v_t u2 = e^{ibt} u2 v_t,
    v_t v_s = v_{t+s}.

Every element is stored as a finite sum of ordered monomials
``v_t u1^k u2^l`` with :class:`~kronecker_triples.scalars.Phased`
coefficients.  Times live in the rational span of finitely many registered
symbols, so ``t`` is a vector of rationals and the phase ``e^{-i(ka+lb)s}``
produced when reordering is a rational combination of the atoms
``a*T`` and ``b*T``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping, Sequence

from .scalars import GaussianRational, PhaseExponent, Phased

__all__ = [
    "FoliationParams",
    "TimeRegistry",
    "CrossedProductAlgebra",
    "AlgebraElement",
    "NonGenericError",
    "RegistryMismatch",
    "multiply",
    "star",
    "equals",
]


class NonGenericError(ValueError):
    """Exact phase comparison requested for non-generic parameters."""


class RegistryMismatch(ValueError):
    """Operands were built over different parameter/time registries."""


def _rationalize(x):
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    return float(x)


@dataclass(frozen=True)
class FoliationParams:
    """Slope data ``(a, b)`` of the Kronecker flow, ``a > 0``, ``a^2 + b^2 = 1``.

    ``mode='exact'`` keeps phases formal (atoms independent over Q);
    ``mode='numeric'`` compares evaluated phases in double precision.
    ``genericity_flag`` asserts that ``b/a`` is to be treated as irrational.
    """

    a: Fraction | float
    b: Fraction | float
    mode: str = "exact"
    genericity_flag: bool = True

    def __post_init__(self):
        object.__setattr__(self, "a", _rationalize(self.a))
        object.__setattr__(self, "b", _rationalize(self.b))
        if self.mode not in ("exact", "numeric"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if not self.a > 0:
            raise ValueError("a must be positive")
        norm = self.a * self.a + self.b * self.b
        if self.is_rational:
            if norm != 1:
                raise ValueError(f"a^2 + b^2 = {norm}, expected exactly 1")
        elif abs(float(norm) - 1.0) > 1e-12:
            raise ValueError(f"a^2 + b^2 = {float(norm)!r}, expected 1 within 1e-12")

    @classmethod
    def pythagorean(cls, p: int, q: int, mode: str = "exact", genericity_flag: bool = True):
        """``a = p/sqrt(p^2+q^2)``, ``b = q/sqrt(p^2+q^2)``; exact if the norm is a square."""
        n2 = p * p + q * q
        r = math.isqrt(n2)
        if r * r == n2:
            return cls(Fraction(p, r), Fraction(q, r), mode, genericity_flag)
        s = math.sqrt(n2)
        return cls(p / s, q / s, mode, genericity_flag)

    @property
    def is_rational(self) -> bool:
        return isinstance(self.a, Fraction) and isinstance(self.b, Fraction)

    def X(self, k: int, l: int):
        """Leaf-direction frequency ``ak + bl`` of the mode ``e_{kl}``."""
        return self.a * k + self.b * l

    def Y(self, k: int, l: int):
        """Transversal frequency ``bk - al`` of the mode ``e_{kl}``."""
        return self.b * k - self.a * l


@dataclass(frozen=True)
class TimeRegistry:
    """Finite set of independent time symbols ``T_1..T_m``.

    Numeric values are optional and only used to evaluate phases.
    """

    symbols: tuple[str, ...] = ("T1",)
    values: tuple[float, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(self.symbols))
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError("time symbols must be distinct")
        if self.values is not None:
            vals = tuple(float(v) for v in self.values)
            if len(vals) != len(self.symbols):
                raise ValueError("one value per time symbol required")
            object.__setattr__(self, "values", vals)

    @property
    def size(self) -> int:
        return len(self.symbols)

    def a_atom(self, m: int) -> str:
        return f"a*{self.symbols[m]}"

    def b_atom(self, m: int) -> str:
        return f"b*{self.symbols[m]}"

    def atoms(self) -> list[str]:
        out = []
        for m in range(self.size):
            out += [self.a_atom(m), self.b_atom(m)]
        return out

    def vector(self, t) -> tuple[Fraction, ...]:
        """Coerce a time value (name, mapping name->q, or sequence) to a rational vector."""
        if isinstance(t, str):
            if t not in self.symbols:
                raise KeyError(f"unregistered time symbol {t!r}")
            return tuple(Fraction(int(s == t)) for s in self.symbols)
        if isinstance(t, Mapping):
            unknown = set(t) - set(self.symbols)
            if unknown:
                raise KeyError(f"unregistered time symbols {sorted(unknown)}")
            return tuple(Fraction(t.get(s, 0)) for s in self.symbols)
        vec = tuple(Fraction(q) for q in t)
        if len(vec) != self.size:
            raise ValueError(f"time vector of length {len(vec)}, registry has {self.size}")
        return vec

    def phase_of_frequency(self, t: Sequence[Fraction], ka, lb) -> PhaseExponent:
        """Exponent of ``e^{i(ka*a + lb*b) t}`` for integer (or rational) ``ka``, ``lb``."""
        coeffs = {}
        for m, q in enumerate(t):
            if q:
                if ka:
                    coeffs[self.a_atom(m)] = Fraction(ka) * q
                if lb:
                    coeffs[self.b_atom(m)] = Fraction(lb) * q
        return PhaseExponent(coeffs)

    def numeric_values(self, params: FoliationParams) -> dict[str, float]:
        if self.values is None:
            raise ValueError("time registry has no numeric values")
        out = {}
        for m, v in enumerate(self.values):
            out[self.a_atom(m)] = float(params.a) * v
            out[self.b_atom(m)] = float(params.b) * v
        return out


@dataclass(frozen=True)
class CrossedProductAlgebra:
    """Context object: parameters plus time registry, and generator factory."""

    params: FoliationParams
    registry: TimeRegistry = field(default_factory=TimeRegistry)

    @property
    def zero_time(self) -> tuple[Fraction, ...]:
        return (Fraction(0),) * self.registry.size

    def monomial(self, t=None, k: int = 0, l: int = 0, coeff=1) -> "AlgebraElement":
        tv = self.zero_time if t is None else self.registry.vector(t)
        return AlgebraElement(self, {(tv, int(k), int(l)): Phased.lift(coeff)})

    def scalar(self, c) -> "AlgebraElement":
        return self.monomial(coeff=c)

    @property
    def one(self) -> "AlgebraElement":
        return self.monomial()

    @property
    def zero(self) -> "AlgebraElement":
        return AlgebraElement(self, {})

    @property
    def u1(self) -> "AlgebraElement":
        return self.monomial(k=1)

    @property
    def u2(self) -> "AlgebraElement":
        return self.monomial(l=1)

    def v(self, t) -> "AlgebraElement":
        return self.monomial(t=t)

    def phase(self, exponent: PhaseExponent, coeff=1) -> Phased:
        return Phased.phase(exponent, coeff)

    def atom_values(self) -> dict[str, float]:
        return self.registry.numeric_values(self.params)


MonomialKey = tuple  # (t: tuple[Fraction, ...], k: int, l: int)


class AlgebraElement:
    """Normal-form element ``sum c * v_t u1^k u2^l`` (immutable)."""

    __slots__ = ("algebra", "terms")

    def __init__(self, algebra: CrossedProductAlgebra, terms: Mapping[MonomialKey, object]):
        self.algebra = algebra
        clean = {}
        for key, c in terms.items():
            c = Phased.lift(c)
            if not c.is_zero():
                clean[key] = c
        self.terms = clean

    # -- arithmetic ---------------------------------------------------------
    def _check(self, other: "AlgebraElement"):
        if not isinstance(other, AlgebraElement):
            raise TypeError(f"expected AlgebraElement, got {type(other).__name__}")
        if other.algebra != self.algebra:
            raise RegistryMismatch("elements belong to different parameter/time registries")

    def __add__(self, other) -> "AlgebraElement":
        if not isinstance(other, AlgebraElement):
            other = self.algebra.scalar(other)
        self._check(other)
        out = dict(self.terms)
        for key, c in other.terms.items():
            out[key] = out[key] + c if key in out else c
        return AlgebraElement(self.algebra, out)

    __radd__ = __add__

    def __neg__(self) -> "AlgebraElement":
        return AlgebraElement(self.algebra, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other) -> "AlgebraElement":
        return self + (-other)

    def __rsub__(self, other) -> "AlgebraElement":
        return (-self) + other

    def __mul__(self, other) -> "AlgebraElement":
        if isinstance(other, AlgebraElement):
            return multiply(self, other)
        return AlgebraElement(self.algebra, {k: c * Phased.lift(other) for k, c in self.terms.items()})

    def __rmul__(self, other) -> "AlgebraElement":
        return AlgebraElement(self.algebra, {k: Phased.lift(other) * c for k, c in self.terms.items()})

    def __pow__(self, n: int) -> "AlgebraElement":
        if n < 0:
            return star(self) ** (-n)  # valid for monomials (unitaries)
        out = self.algebra.one
        for _ in range(n):
            out = out * self
        return out

    def star(self) -> "AlgebraElement":
        return star(self)

    def equals(self, other: "AlgebraElement", tol: float = 1e-12) -> bool:
        return equals(self, other, tol)

    # -- inspection ---------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def normalized(self) -> "AlgebraElement":
        return AlgebraElement(self.algebra, self.terms)

    def structurally_equal(self, other: "AlgebraElement") -> bool:
        self._check(other)
        return (self - other).is_zero()

    def shifts(self) -> set[tuple[int, int]]:
        return {(k, l) for (_, k, l) in self.terms}

    def __repr__(self) -> str:
        if not self.terms:
            return "AlgebraElement(0)"
        syms = self.algebra.registry.symbols
        parts = []
        for (t, k, l), c in sorted(self.terms.items()):
            tt = "+".join(f"{q}{s}" for q, s in zip(t, syms) if q) or "0"
            parts.append(f"{c!r}*v[{tt}]u1^{k}u2^{l}")
        return "AlgebraElement(" + " + ".join(parts) + ")"

    # -- serialization ------------------------------------------------------
    def to_records(self) -> list[dict]:
        """One record per (monomial, phase) pair; rationals written as ``"p/q"`` strings."""
        atoms = self.algebra.registry.atoms()
        recs = []
        for (t, k, l), c in sorted(self.terms.items()):
            for ph, coeff in sorted(c.terms.items(), key=lambda kv: kv[0].items):
                extra = set(ph.atoms()) - set(atoms)
                if extra:
                    raise ValueError(f"phase uses atoms outside the registry: {sorted(extra)}")
                rec = {
                    "t": [str(q) for q in t],
                    "k": k,
                    "l": l,
                    "phase": [str(ph.coefficient(a)) for a in atoms],
                }
                if isinstance(coeff, GaussianRational):
                    rec["re"], rec["im"] = str(coeff.re), str(coeff.im)
                else:
                    rec["re"], rec["im"] = coeff.real, coeff.imag
                recs.append(rec)
        return recs

    def to_json(self) -> str:
        return json.dumps(self.to_records())

    @classmethod
    def from_records(cls, algebra: CrossedProductAlgebra, records: Iterable[Mapping]) -> "AlgebraElement":
        atoms = algebra.registry.atoms()
        out = algebra.zero
        for rec in records:
            re, im = rec["re"], rec["im"]
            if isinstance(re, str) or isinstance(im, str) or (isinstance(re, int) and isinstance(im, int)):
                coeff = GaussianRational(Fraction(re), Fraction(im))
            else:
                coeff = complex(re, im)
            ph = PhaseExponent(zip(atoms, (Fraction(q) for q in rec["phase"])))
            out = out + algebra.monomial(tuple(Fraction(q) for q in rec["t"]), rec["k"], rec["l"],
                                         Phased.phase(ph, coeff))
        return out

    @classmethod
    def from_json(cls, algebra: CrossedProductAlgebra, text: str) -> "AlgebraElement":
        return cls.from_records(algebra, json.loads(text))


def _reorder_phase(algebra: CrossedProductAlgebra, k: int, l: int, s) -> PhaseExponent:
    # u1^k u2^l v_s = e^{-i(ka+lb)s} v_s u1^k u2^l
    return algebra.registry.phase_of_frequency(s, -k, -l)


def multiply(x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
    """Normal form of ``x*y``."""
    x._check(y)
    alg = x.algebra
    out: dict = {}
    for (t1, k1, l1), c1 in x.terms.items():
        for (t2, k2, l2), c2 in y.terms.items():
            key = (tuple(p + q for p, q in zip(t1, t2)), k1 + k2, l1 + l2)
            val = (c1 * c2).times_phase(_reorder_phase(alg, k1, l1, t2))
            out[key] = out[key] + val if key in out else val
    return AlgebraElement(alg, out)


def star(x: AlgebraElement) -> AlgebraElement:
    """Involution: conjugate-linear anti-automorphism with unitary generators."""
    alg = x.algebra
    out: dict = {}
    for (t, k, l), c in x.terms.items():
        # (v_t u1^k u2^l)^* = u1^{-k} u2^{-l} v_{-t} = e^{-i(ka+lb)t} v_{-t} u1^{-k} u2^{-l}
        neg_t = tuple(-q for q in t)
        val = c.conjugate().times_phase(_reorder_phase(alg, -k, -l, neg_t))
        key = (neg_t, -k, -l)
        out[key] = out[key] + val if key in out else val
    return AlgebraElement(alg, out)


def equals(x: AlgebraElement, y: AlgebraElement, tol: float = 1e-12) -> bool:
    """Equality of normal forms.

    Exact mode compares formal phases termwise and refuses non-generic
    parameters; numeric mode evaluates phases and compares within ``tol``.
    """
    x._check(y)
    params = x.algebra.params
    diff = x - y
    if params.mode == "exact":
        if not params.genericity_flag:
            raise NonGenericError("non-generic parameters: formal phase equality is not faithful")
        return diff.is_zero()
    values = x.algebra.atom_values() if x.algebra.registry.values is not None else None
    return all(abs(c.evaluate(values)) <= tol for c in diff.terms.values())


def random_element(algebra: CrossedProductAlgebra, rng, n_terms: int = 3, max_power: int = 2,
                   max_time: int = 2, phased: bool = True) -> AlgebraElement:
    """Random element with small Gaussian-integer coefficients (test/probe helper)."""
    out = algebra.zero
    m = algebra.registry.size
    atoms = algebra.registry.atoms()
    for _ in range(n_terms):
        t = tuple(Fraction(int(rng.integers(-max_time, max_time + 1)), int(rng.integers(1, 3)))
                  for _ in range(m))
        k = int(rng.integers(-max_power, max_power + 1))
        l = int(rng.integers(-max_power, max_power + 1))
        c = GaussianRational(int(rng.integers(-3, 4)), int(rng.integers(-3, 4)))
        if c == 0:
            c = GaussianRational(1)
        coeff = Phased.const(c)
        if phased and atoms and rng.random() < 0.5:
            atom = atoms[int(rng.integers(len(atoms)))]
            coeff = coeff.times_phase(PhaseExponent.atom(atom, int(rng.integers(-2, 3))))
        out = out + algebra.monomial(t, k, l, coeff)
    return out

