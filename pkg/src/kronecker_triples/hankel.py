"""Hankel-type determinants and exponential-polynomial sequence fitting.

A sequence ``f`` has vanishing ``(k+1) x (k+1)`` determinants
``det[f(i_p + q)]`` for every row tuple exactly when it satisfies a linear
recurrence of order ``<= k``.  Such sequences are either

* ``f1(i) = beta^i * sum_j alpha_j i^j``  (one root of full multiplicity), or
* ``f2(i) = sum_j alpha_j beta_j^i``       (distinct roots).

:func:`classify` recovers the model from samples, exactly when the samples
are Gaussian rationals and the characteristic roots are rational.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Callable, Iterable, Sequence

import mpmath
import numpy as np
import sympy

from .algebra import FoliationParams
from .scalars import GaussianRational

__all__ = [
    "hankel_det",
    "SequenceSamples",
    "SequenceModel",
    "NEITHER",
    "generate",
    "classify",
    "h_function",
    "h_hankel_scan",
    "binomial_identity",
    "single_root_residuals",
]

NEITHER = "neither"


def _is_exact(x) -> bool:
    return isinstance(x, (GaussianRational, int, Rational)) and not isinstance(x, bool)


def _gr(x) -> GaussianRational:
    return x if isinstance(x, GaussianRational) else GaussianRational(x)


def _exact_det(rows: list[list[GaussianRational]]) -> GaussianRational:
    m = [list(map(_gr, r)) for r in rows]
    n = len(m)
    det = GaussianRational(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c]), None)
        if piv is None:
            return GaussianRational(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = -det
        p = m[c][c]
        det = det * p
        for r in range(c + 1, n):
            if m[r][c]:
                fct = m[r][c] / p
                m[r] = [x - fct * y for x, y in zip(m[r], m[c])]
    return det


def _exact_solve(A: list[list], b: list) -> list[GaussianRational] | None:
    n = len(A)
    m = [list(map(_gr, row)) + [_gr(v)] for row, v in zip(A, b)]
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c]), None)
        if piv is None:
            return None
        m[c], m[piv] = m[piv], m[c]
        p = m[c][c]
        m[c] = [x / p for x in m[c]]
        for r in range(n):
            if r != c and m[r][c]:
                fct = m[r][c]
                m[r] = [x - fct * y for x, y in zip(m[r], m[c])]
    return [m[r][n] for r in range(n)]


def hankel_matrix(f: Callable[[int], object], rows: Sequence[int], k: int) -> list[list]:
    return [[f(i + q) for q in range(k + 1)] for i in rows]


def hankel_det(f: Callable[[int], object], rows: Sequence[int], k: int | None = None, dps: int | None = None):
    """``det[f(i_p + q)]_{p,q=0..k}``.

    Exact (``GaussianRational``) when every entry is a Gaussian rational,
    ``mpmath`` at ``dps`` digits when requested, double precision otherwise.
    """
    rows = list(rows)
    k = len(rows) - 1 if k is None else k
    if len(rows) != k + 1:
        raise ValueError(f"need {k + 1} row indices, got {len(rows)}")
    if len(set(rows)) != len(rows):
        raise ValueError("row indices must be distinct")
    M = hankel_matrix(f, rows, k)
    if all(_is_exact(x) for r in M for x in r):
        return _exact_det(M)
    if dps:
        with mpmath.workdps(dps):
            return mpmath.det(mpmath.matrix([[mpmath.mpmathify(_plain(x)) for x in r] for r in M]))
    return complex(np.linalg.det(np.array([[complex(x) for x in r] for r in M], dtype=complex)))


def _plain(x):
    if isinstance(x, GaussianRational):
        return mpmath.mpc(mpmath.mpf(x.re.numerator) / x.re.denominator,
                          mpmath.mpf(x.im.numerator) / x.im.denominator)
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return x


# -- models --------------------------------------------------------------------------

@dataclass(frozen=True)
class SequenceSamples:
    """Values ``f(i0), f(i0+1), ...``; at least ``2k`` of them for order ``k``."""

    i0: int
    values: tuple
    order: int

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        if self.order < 1:
            raise ValueError("order must be positive")
        if len(self.values) < 2 * self.order:
            raise ValueError(f"order {self.order} needs at least {2 * self.order} samples")

    def __call__(self, i: int):
        return self.values[i - self.i0]

    @property
    def indices(self) -> range:
        return range(self.i0, self.i0 + len(self.values))

    @property
    def exact(self) -> bool:
        return all(_is_exact(v) for v in self.values)


@dataclass(frozen=True)
class SequenceModel:
    kind: str  # "f1" or "f2"
    betas: tuple
    alphas: tuple

    @property
    def beta(self):
        return self.betas[0] if self.kind == "f1" else None

    @property
    def order(self) -> int:
        return len(self.alphas)

    def __call__(self, i: int):
        if self.kind == "f1":
            b = self.betas[0]
            return (b ** i) * sum((a * (i ** j) for j, a in enumerate(self.alphas)), GaussianRational(0))
        return sum((a * (b ** i) for a, b in zip(self.alphas, self.betas)), GaussianRational(0))

    def same_as(self, other: "SequenceModel", tol: float = 0.0) -> bool:
        """Equality of parameters, ``beta_j`` up to permutation for ``f2``."""
        if self.order == 1 and other.order == 1 and self.kind != other.kind:
            # alpha beta^i is both shapes at once
            other = SequenceModel(self.kind, other.betas, other.alphas)
        if self.kind != other.kind or len(self.betas) != len(other.betas):
            return False

        def close(x, y):
            return x == y if tol == 0 else abs(complex(x) - complex(y)) <= tol

        if self.kind == "f1":
            return close(self.betas[0], other.betas[0]) and len(self.alphas) == len(other.alphas) and \
                all(close(x, y) for x, y in zip(self.alphas, other.alphas))
        remaining = list(zip(other.betas, other.alphas))
        for b, a in zip(self.betas, self.alphas):
            hit = next((n for n, (b2, a2) in enumerate(remaining) if close(b, b2) and close(a, a2)), None)
            if hit is None:
                return False
            remaining.pop(hit)
        return True


def generate(model: SequenceModel, i0: int, n: int, order: int | None = None) -> SequenceSamples:
    order = order or max(model.order, 1)
    return SequenceSamples(i0, tuple(model(i) for i in range(i0, i0 + n)), order)


# -- classification ---------------------------------------------------------------

def _recurrence(samples: SequenceSamples, r: int, tol: float):
    """Coefficients ``c`` with ``f(n+r) = sum_j c_j f(n+j)`` from the leading ``r x r`` system."""
    vals = samples.values
    A = [[vals[p + q] for q in range(r)] for p in range(r)]
    b = [vals[p + r] for p in range(r)]
    if samples.exact:
        if not _exact_det(A):
            return None
        return _exact_solve(A, b)
    M = np.array(A, dtype=complex)
    scale = max(1.0, float(np.abs(M).max())) ** r
    if abs(np.linalg.det(M)) <= tol * scale:
        return None
    return [complex(x) for x in np.linalg.solve(M, np.array(b, dtype=complex))]


def _recurrence_holds(samples: SequenceSamples, c, tol: float) -> bool:
    vals = samples.values
    r = len(c)
    for n in range(len(vals) - r):
        pred = sum((cj * vals[n + j] for j, cj in enumerate(c)), GaussianRational(0))
        if samples.exact:
            if pred != vals[n + r]:
                return False
        elif abs(complex(pred) - complex(vals[n + r])) > tol * max(1.0, abs(complex(vals[n + r]))):
            return False
    return True


def _roots(c, exact: bool, tol: float) -> list[tuple[object, int]]:
    """Roots with multiplicities of ``x^r - sum c_j x^j``."""
    r = len(c)
    if exact:
        x = sympy.Symbol("x")
        poly = x ** r - sum(
            (sympy.Rational(cj.re.numerator, cj.re.denominator)
             + sympy.I * sympy.Rational(cj.im.numerator, cj.im.denominator)) * x ** j
            for j, cj in enumerate(c))
        found = sympy.roots(sympy.Poly(sympy.expand(poly), x))
        if sum(found.values()) == r:
            out = []
            for root, mult in found.items():
                re, im = sympy.re(root), sympy.im(root)
                if not (re.is_Rational and im.is_Rational):
                    break
                out.append((GaussianRational(Fraction(int(re.p), int(re.q)), Fraction(int(im.p), int(im.q))), mult))
            else:
                return out
    coeffs = [1] + [-complex(cj) for cj in reversed(list(c))]
    rts = np.roots(coeffs) if r else np.array([])
    groups: list[list[complex]] = []
    for z in rts:
        for g in groups:
            if abs(z - g[0]) <= max(1e-6, math.sqrt(tol)) * max(1.0, abs(z)):
                g.append(z)
                break
        else:
            groups.append([z])
    return [(complex(np.mean(g)), len(g)) for g in groups]


def single_root_residuals(samples: SequenceSamples, beta, order: int) -> list:
    """``sum_j beta^{r-j} f(i+j) (-1)^j C(r, j)`` over the sample window (``r = order``)."""
    vals = samples.values
    out = []
    for n in range(len(vals) - order):
        out.append(sum(((beta ** (order - j)) * vals[n + j] * ((-1) ** j * math.comb(order, j))
                        for j in range(order + 1)), GaussianRational(0)))
    return out


def _solve(A, b, exact: bool):
    if exact:
        return _exact_solve(A, b)
    sol, *_ = np.linalg.lstsq(np.array(A, dtype=complex), np.array([complex(v) for v in b]), rcond=None)
    return [complex(x) for x in sol]


def _fits(model: SequenceModel, samples: SequenceSamples, tol: float) -> bool:
    for i, v in zip(samples.indices, samples.values):
        m = model(i)
        if samples.exact and all(_is_exact(x) for x in model.betas + model.alphas):
            if m != v:
                return False
        elif abs(complex(m) - complex(v)) > tol * max(1.0, abs(complex(v))):
            return False
    return True


def classify(samples: SequenceSamples, tol: float = 1e-9):
    """Return the minimal-order :class:`SequenceModel` reproducing the samples, or ``"neither"``."""
    exact = samples.exact
    vals = samples.values
    if all((v == 0) if exact else abs(complex(v)) <= tol for v in vals):
        return SequenceModel("f2", (), ())
    zero = GaussianRational(0) if exact else 0j
    for r in range(1, samples.order + 1):
        c = _recurrence(samples, r, tol)
        if c is None or not _recurrence_holds(samples, c, tol):
            continue
        if (c[0] == 0) if exact else abs(complex(c[0])) <= tol:
            continue  # zero root: not an exponential model on Z
        roots = _roots(c, exact, tol)
        idx = list(samples.indices)[:r]
        if len(roots) == 1:
            beta, _ = roots[0]
            res = single_root_residuals(samples, beta, r)
            if not all((x == 0) if isinstance(x, GaussianRational) and isinstance(beta, GaussianRational)
                       else abs(complex(x)) <= tol * max(1.0, max(abs(complex(v)) for v in vals)) for x in res):
                continue
            g = [vals[n] / (beta ** i) for n, i in enumerate(idx)]
            A = [[(i ** j) for j in range(r)] for i in idx]
            alphas = _solve(A, g, exact and isinstance(beta, GaussianRational))
            model = SequenceModel("f1", (beta,), tuple(alphas))
        elif all(m == 1 for _, m in roots):
            betas = [b for b, _ in roots]
            use_exact = exact and all(isinstance(b, GaussianRational) for b in betas)
            A = [[(b ** i) for b in betas] for i in idx]
            alphas = _solve(A, [vals[n] for n in range(r)], use_exact)
            if alphas is None:
                continue
            model = SequenceModel("f2", tuple(betas), tuple(alphas))
        else:
            return NEITHER  # mixed multiplicities: outside both families
        if _fits(model, samples, tol):
            return model
    return NEITHER


# -- the difference sequence of sqrt(lambda) gamma along l = 0 ----------------------

def h_function(params: FoliationParams, dps: int | None = None) -> Callable[[int], object]:
    """``h(i) = w(i, 0) - w(i-1, 0)`` with ``w = sqrt(lam) * gamma`` (``w(0,0) = 0``)."""
    from .calculus import weighted_gamma

    def h(i: int):
        return weighted_gamma(params, i, 0, dps) - weighted_gamma(params, i - 1, 0, dps)

    return h


@dataclass
class ScanReport:
    k: int
    kind: str  # "consecutive" or "random"
    count: int
    min_abs_det: float
    witness: tuple | None
    threshold: float

    @property
    def passed(self) -> bool:
        return self.min_abs_det > self.threshold

    def to_json(self) -> dict:
        return {"k": self.k, "rows": self.kind, "count": self.count, "min_abs_det": self.min_abs_det,
                "witness": list(self.witness) if self.witness else None, "threshold": self.threshold,
                "passed": self.passed}


def h_hankel_scan(params: FoliationParams, k_max: int = 3, index_range: int = 20, threshold: float = 1e-6,
                random_tuples: int = 400, seed: int = 0, dps: int = 60, exhaustive_limit: int = 2000,
                ) -> list[ScanReport]:
    """Minimum ``|det[h(i_p + q)]|`` over consecutive and random/exhaustive row tuples, ``|i| <= index_range``."""
    if k_max > 5:
        raise ValueError("k_max limited to 5")
    h = h_function(params, dps)
    cache: dict[int, object] = {}

    def hc(i):
        if i not in cache:
            cache[i] = h(i)
        return cache[i]

    rng = np.random.default_rng(seed)
    idx = list(range(-index_range, index_range + 1))
    out = []
    for k in range(1, k_max + 1):
        consecutive = [tuple(range(i0, i0 + k + 1)) for i0 in idx]
        n_comb = math.comb(len(idx), k + 1)
        if n_comb <= exhaustive_limit:
            others = list(itertools.combinations(idx, k + 1))
            kind = "exhaustive"
        else:
            others = {tuple(sorted(rng.choice(idx, size=k + 1, replace=False).tolist()))
                      for _ in range(random_tuples)}
            others = sorted(others)
            kind = "random"
        for label, tuples in (("consecutive", consecutive), (kind, others)):
            best, wit = math.inf, None
            for rows in tuples:
                v = float(abs(hankel_det(hc, rows, k, dps=dps)))
                if v < best:
                    best, wit = v, rows
            out.append(ScanReport(k, label, len(tuples), best, wit, threshold))
    return out


def binomial_identity(r_max: int = 10) -> list[tuple[int, int, int]]:
    """Triples ``(r, s, sum_j (-1)^j C(r,j) j^s)`` for ``s < r <= r_max`` (all zero)."""
    return [(r, s, sum((-1) ** j * math.comb(r, j) * j ** s for j in range(r + 1)))
            for r in range(1, r_max + 1) for s in range(r)]
