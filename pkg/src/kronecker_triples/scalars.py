"""Exact scalars: Gaussian rationals and formal phase sums.

Every coefficient that appears in the crossed-product algebra and in the
operators acting on the lattice is an element of the group ring
``C[Phases]``: a finite sum ``sum_j c_j exp(i phi_j)`` where each ``phi_j`` is
a rational combination of named *phase atoms* (``a*T1``, ``b*T1``,
``2pi*theta`` ...).  Treating atoms as linearly independent over Q makes
equality decidable, which is what the generic (irrational) case requires.

Coefficients are either :class:`GaussianRational` (exact) or plain
``complex`` (numeric).  Mixing the two promotes to ``complex``.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping, Union

__all__ = [
    "GaussianRational",
    "I",
    "PhaseExponent",
    "Phased",
    "as_coeff",
    "coeff_abs",
    "coeff_is_exact",
]


class GaussianRational:
    """Complex number with rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @staticmethod
    def _lift(other):
        if isinstance(other, GaussianRational):
            return other
        if isinstance(other, (int, Rational)):
            return GaussianRational(other)
        return None

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return complex(self) + other
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._lift(other)
        if o is None:
            return complex(self) * other
        return GaussianRational(self.re * o.re - self.im * o.im,
                                self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._lift(other)
        if o is None:
            return complex(self) / other
        n = o.abs2()
        if n == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return self * GaussianRational(o.re / n, -o.im / n)

    def __rtruediv__(self, other):
        o = self._lift(other)
        if o is None:
            return other / complex(self)
        return o / self

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return complex(self) ** n
        if n < 0:
            return GaussianRational(1) / (self ** -n)
        out, base = GaussianRational(1), self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def __abs__(self) -> float:
        return math.sqrt(self.abs2())

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    def __eq__(self, other) -> bool:
        o = self._lift(other)
        if o is None:
            if isinstance(other, (float, complex)):
                return complex(self) == other
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self) -> int:
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __repr__(self) -> str:
        if self.im == 0:
            return f"GaussianRational({self.re})"
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self) -> str:
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"({self.re}{sign}{abs(self.im)}i)"


I = GaussianRational(0, 1)

Coeff = Union[GaussianRational, complex]


def as_coeff(x) -> Coeff:
    """Normalize a number to a coefficient (exact when possible)."""
    if isinstance(x, GaussianRational):
        return x
    if isinstance(x, (int, Rational)):
        return GaussianRational(x)
    return complex(x)


def coeff_is_exact(c) -> bool:
    return isinstance(c, GaussianRational)


def coeff_abs(c) -> float:
    return abs(c)


class PhaseExponent:
    """Rational combination ``sum q_atom * atom`` standing for ``exp(i*phi)``."""

    __slots__ = ("items", "_hash")

    def __init__(self, coeffs: Mapping[str, object] | Iterable = ()):
        if isinstance(coeffs, Mapping):
            pairs = coeffs.items()
        else:
            pairs = coeffs
        merged: dict[str, Fraction] = {}
        for atom, q in pairs:
            merged[atom] = merged.get(atom, Fraction(0)) + Fraction(q)
        self.items = tuple(sorted((a, q) for a, q in merged.items() if q != 0))
        self._hash = hash(self.items)

    @classmethod
    def atom(cls, name: str, q=1) -> "PhaseExponent":
        return cls({name: q})

    def __add__(self, other: "PhaseExponent") -> "PhaseExponent":
        return PhaseExponent(self.items + other.items)

    def __neg__(self) -> "PhaseExponent":
        return PhaseExponent((a, -q) for a, q in self.items)

    def __sub__(self, other: "PhaseExponent") -> "PhaseExponent":
        return self + (-other)

    def scaled(self, q) -> "PhaseExponent":
        q = Fraction(q)
        return PhaseExponent((a, q * c) for a, c in self.items)

    def is_zero(self) -> bool:
        return not self.items

    def coefficient(self, atom: str) -> Fraction:
        return dict(self.items).get(atom, Fraction(0))

    def atoms(self) -> tuple[str, ...]:
        return tuple(a for a, _ in self.items)

    def evaluate(self, values: Mapping[str, float]) -> float:
        try:
            return sum(float(q) * values[a] for a, q in self.items)
        except KeyError as exc:
            raise ValueError(f"no numeric value for phase atom {exc.args[0]!r}") from None

    def __eq__(self, other) -> bool:
        return isinstance(other, PhaseExponent) and self.items == other.items

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        if not self.items:
            return "PhaseExponent(0)"
        return "PhaseExponent(" + " + ".join(f"{q}*{a}" for a, q in self.items) + ")"


ZERO_PHASE = PhaseExponent()


class Phased:
    """Finite sum ``sum_phi c_phi * exp(i*phi)`` with formal phases."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[PhaseExponent, object] | None = None):
        clean: dict[PhaseExponent, Coeff] = {}
        if terms:
            for ph, c in terms.items():
                c = as_coeff(c)
                if c != 0:
                    clean[ph] = c
        self.terms = clean

    @classmethod
    def const(cls, c) -> "Phased":
        return cls({ZERO_PHASE: c})

    @classmethod
    def phase(cls, exponent: PhaseExponent, c=1) -> "Phased":
        return cls({exponent: c})

    @staticmethod
    def lift(x) -> "Phased":
        if isinstance(x, Phased):
            return x
        return Phased.const(x)

    def __add__(self, other) -> "Phased":
        o = Phased.lift(other)
        out = dict(self.terms)
        for ph, c in o.terms.items():
            out[ph] = out[ph] + c if ph in out else c
        return Phased(out)

    __radd__ = __add__

    def __neg__(self) -> "Phased":
        return Phased({ph: -c for ph, c in self.terms.items()})

    def __sub__(self, other) -> "Phased":
        return self + (-Phased.lift(other))

    def __rsub__(self, other) -> "Phased":
        return Phased.lift(other) - self

    def __mul__(self, other) -> "Phased":
        if not isinstance(other, Phased):
            c = as_coeff(other)
            return Phased({ph: v * c for ph, v in self.terms.items()})
        out: dict[PhaseExponent, Coeff] = {}
        for p1, c1 in self.terms.items():
            for p2, c2 in other.terms.items():
                ph = p1 + p2
                v = c1 * c2
                out[ph] = out[ph] + v if ph in out else v
        return Phased(out)

    __rmul__ = __mul__

    def times_phase(self, exponent: PhaseExponent) -> "Phased":
        if exponent.is_zero():
            return self
        return Phased({ph + exponent: c for ph, c in self.terms.items()})

    def conjugate(self) -> "Phased":
        return Phased({-ph: c.conjugate() for ph, c in self.terms.items()})

    def is_zero(self) -> bool:
        return not self.terms

    def is_exact(self) -> bool:
        return all(coeff_is_exact(c) for c in self.terms.values())

    def is_constant(self) -> bool:
        return all(ph.is_zero() for ph in self.terms)

    def l1(self) -> float:
        """Sum of coefficient moduli; an upper bound for ``|value|``."""
        return sum(abs(c) for c in self.terms.values())

    def evaluate(self, values: Mapping[str, float] | None = None) -> complex:
        total = 0j
        for ph, c in self.terms.items():
            if ph.is_zero():
                total += complex(c)
            else:
                if values is None:
                    raise ValueError("formal phase present but no numeric atom values given")
                total += complex(c) * cmath.exp(1j * ph.evaluate(values))
        return total

    def __eq__(self, other) -> bool:
        if not isinstance(other, Phased):
            try:
                other = Phased.lift(other)
            except TypeError:
                return NotImplemented
        return (self - other).is_zero()

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __repr__(self) -> str:
        if not self.terms:
            return "Phased(0)"
        parts = []
        for ph, c in sorted(self.terms.items(), key=lambda kv: kv[0].items):
            parts.append(str(c) if ph.is_zero() else f"{c}*e^(i[{ph!r}])")
        return "Phased(" + " + ".join(parts) + ")"
