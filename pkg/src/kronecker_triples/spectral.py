"""Closed-form eigen-data of the first-order, mixed and Dirac operators.

With ``X = ak + bl`` and ``Y = bk - al`` the fiber of the first-order
signature operator over ``(k, l)`` has eigenvalues ``+-sqrt(X^2 + Y^2)``,
the mixed operator has ``+-lam`` with ``lam = sqrt(X^4 + Y^2)``, and the
Dirac operator ``D = Q |Q|^{-1/2}`` has ``+-sqrt(lam)``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import mpmath
import numpy as np
import sympy

from .algebra import FoliationParams
from .hilbert import BlockOperator, SectionVector, assemble, fiber_operator, window
from .scalars import Phased

__all__ = [
    "SpectralPair",
    "GammaDatum",
    "WeylCount",
    "LinearSpectrum",
    "MixedSpectrum",
    "linear_spectrum",
    "linear_eigenvalue_exact",
    "mixed_lambda",
    "gamma",
    "mixed_spectrum",
    "eta_vector",
    "dirac_operator",
    "dirac_operator_spectral",
    "dirac_action",
    "weyl_count",
    "count_linear",
    "count_dirac",
    "count_torus",
    "spectrum_rows",
    "write_csv",
    "dirac_constant",
]

SQRT_2PI = math.sqrt(2 * math.pi)


@dataclass(frozen=True)
class SpectralPair:
    k: int
    l: int
    branch: str  # "+" or "-"
    family: int
    eigenvalue: float
    eigenvector: SectionVector

    @property
    def sign(self) -> int:
        return 1 if self.branch == "+" else -1


@dataclass(frozen=True)
class GammaDatum:
    k: int
    l: int
    branch: str
    value: complex


@dataclass
class WeylCount:
    operator: str
    radii: list[float]
    counts: list[int]
    fitted_exponent: float = float("nan")
    fit_residual: float = float("nan")
    fitted_constant: float = float("nan")
    expected_constant: float | None = None

    def to_json(self) -> dict:
        return {
            "operator": self.operator,
            "R": self.radii,
            "N": self.counts,
            "exponent": self.fitted_exponent,
            "residual": self.fit_residual,
            "constant": self.fitted_constant,
            "heuristic_constant": self.expected_constant,
        }


def _f(x) -> float:
    return float(x)


# -- first-order operator ---------------------------------------------------

@dataclass(frozen=True)
class LinearSpectrum:
    k: int
    l: int
    lam_plus: float
    lam_minus: float
    pairs: tuple[SpectralPair, ...]


def linear_eigenvalue_exact(params: FoliationParams, k: int, l: int) -> sympy.Expr:
    """``lam^+_{kl}`` as an exact sympy number (rational parameters only)."""
    if not params.is_rational:
        raise ValueError("exact eigenvalues need rational parameters")
    X, Y = params.X(k, l), params.Y(k, l)
    s = X * X + Y * Y
    return sympy.sqrt(sympy.Rational(s.numerator, s.denominator))


def _linear_raw(params: FoliationParams, k: int, l: int) -> list[tuple[int, int, np.ndarray]]:
    X, Y = _f(params.X(k, l)), _f(params.Y(k, l))
    lam = math.hypot(X, Y)
    x, y = X / lam, Y / lam
    # (branch sign, family, unnormalized vector on components 1..4)
    return [
        (1, 1, np.array([-1j * y, 0, 1, 1j * x])),
        (1, 2, np.array([-1j * x, 1, 0, -1j * y])),
        (-1, 1, np.array([1, -1j * x, -1j * y, 0])),
        (-1, 2, np.array([0, -1j * y, 1j * x, 1])),
    ]


def _orthonormalize(vectors: Sequence[np.ndarray]) -> list[np.ndarray]:
    out: list[np.ndarray] = []
    for v in vectors:
        w = np.asarray(v, dtype=complex).copy()
        for u in out:
            w = w - np.vdot(u, w) * u
        out.append(w / np.linalg.norm(w))
    return out


def linear_spectrum(params: FoliationParams, k: int, l: int) -> LinearSpectrum:
    """Eigenvalues ``+-sqrt(X^2+Y^2)`` and an orthonormal eigenbasis of the fiber."""
    if k == 0 and l == 0:
        pairs = tuple(
            SpectralPair(0, 0, "+" if c in (1, 4) else "-", 1 if c in (1, 3) else 2, 0.0,
                         SectionVector.basis(0, 0, c))
            for c in (1, 3, 4, 2)
        )
        return LinearSpectrum(0, 0, 0.0, 0.0, pairs)
    lam = math.hypot(_f(params.X(k, l)), _f(params.Y(k, l)))
    raw = _linear_raw(params, k, l)
    pairs = []
    for sign in (1, -1):
        group = [r for r in raw if r[0] == sign]
        for (s, fam, _), vec in zip(group, _orthonormalize([g[2] for g in group])):
            pairs.append(SpectralPair(k, l, "+" if s > 0 else "-", fam, s * lam,
                                      SectionVector.from_fiber(k, l, vec)))
    return LinearSpectrum(k, l, lam, -lam, tuple(pairs))


# -- mixed operator -----------------------------------------------------------

def mixed_lambda(params: FoliationParams, k: int, l: int) -> float:
    X, Y = _f(params.X(k, l)), _f(params.Y(k, l))
    return math.sqrt(X ** 4 + Y * Y)


def gamma(params: FoliationParams, k: int, l: int, branch: str = "+") -> GammaDatum:
    """``gamma_{kl+-} = (-X^2 - iY) / lam_{kl+-}``; ``gamma_{00+} := 1`` by convention."""
    sign = 1 if branch == "+" else -1
    if k == 0 and l == 0:
        return GammaDatum(0, 0, branch, complex(sign))
    X, Y = _f(params.X(k, l)), _f(params.Y(k, l))
    lam = math.sqrt(X ** 4 + Y * Y)
    return GammaDatum(k, l, branch, complex(-X * X, -Y) / (sign * lam))


_FAMILY_SLOTS = {1: (0, 2), 2: (3, 1)}  # (slot of gamma+1, slot of gamma-1)
_KERNEL = {(1, "+"): 1, (1, "-"): 3, (2, "+"): 4, (2, "-"): 2}


def _mixed_fiber_vector(g: complex, family: int) -> np.ndarray:
    v = np.zeros(4, dtype=complex)
    p, m = _FAMILY_SLOTS[family]
    v[p] = 0.5 * (g + 1)
    v[m] = 0.5 * (g - 1)
    return v


@dataclass(frozen=True)
class MixedSpectrum:
    k: int
    l: int
    lam_plus: float
    lam_minus: float
    gamma_plus: complex
    gamma_minus: complex
    pairs: tuple[SpectralPair, ...]

    def vector(self, family: int, branch: str) -> SectionVector:
        for p in self.pairs:
            if p.family == family and p.branch == branch:
                return p.eigenvector
        raise KeyError((family, branch))

    def change_of_basis_det(self) -> complex:
        """``det [[g+ + 1, g+ - 1], [g- + 1, g- - 1]]``."""
        gp, gm = self.gamma_plus, self.gamma_minus
        return (gp + 1) * (gm - 1) - (gp - 1) * (gm + 1)


def mixed_spectrum(params: FoliationParams, k: int, l: int) -> MixedSpectrum:
    if k == 0 and l == 0:
        pairs = tuple(SpectralPair(0, 0, br, fam, 0.0, SectionVector.basis(0, 0, c))
                      for (fam, br), c in _KERNEL.items())
        return MixedSpectrum(0, 0, 0.0, 0.0, 1.0, -1.0, pairs)
    lam = mixed_lambda(params, k, l)
    gp, gm = gamma(params, k, l, "+").value, gamma(params, k, l, "-").value
    pairs = []
    for fam in (1, 2):
        for br, g, s in (("+", gp, 1), ("-", gm, -1)):
            pairs.append(SpectralPair(k, l, br, fam, s * lam,
                                      SectionVector.from_fiber(k, l, _mixed_fiber_vector(g, fam))))
    return MixedSpectrum(k, l, lam, -lam, gp, gm, tuple(pairs))


def eta_vector(params: FoliationParams, k: int, l: int, family: int, branch: str) -> SectionVector:
    """``eta_{kl+-} = (e_{kl+} +- e_{kl-}) / 2`` using ``gamma_{00+} = 1`` at the origin."""
    gp = gamma(params, k, l, "+").value
    ep = _mixed_fiber_vector(gp, family)
    em = _mixed_fiber_vector(-gp, family)
    v = 0.5 * (ep + em) if branch == "+" else 0.5 * (ep - em)
    return SectionVector.from_fiber(k, l, v)


# -- Dirac operator ------------------------------------------------------------

def dirac_operator(params: FoliationParams) -> BlockOperator:
    """``D = Q / sqrt(lam)`` fiberwise (zero on the kernel)."""
    Q = assemble(params, "Qmixed")

    @lru_cache(maxsize=16384)
    def fn(k, l):
        m = np.empty((4, 4), dtype=object)
        if k == 0 and l == 0:
            m[:] = [[Phased() for _ in range(4)] for _ in range(4)]
            return m
        s = math.sqrt(mixed_lambda(params, k, l))
        for idx, e in np.ndenumerate(Q.fiber(k, l)):
            m[idx] = Phased.const(e.evaluate() / s) if not e.is_zero() else Phased()
        return m

    return BlockOperator(4, {(0, 0): fn}, "D")


def dirac_operator_spectral(params: FoliationParams, k: int, l: int) -> np.ndarray:
    """Independent fiber of ``Q (Q^2)^{-1/4}`` through a numerical eigendecomposition."""
    q = fiber_operator(assemble(params, "Qmixed"), k, l)
    w, V = np.linalg.eigh(q)
    scale = np.where(np.abs(w) > 1e-14, np.sign(w) * np.sqrt(np.abs(w)), 0.0)
    return (V * scale) @ V.conj().T


def dirac_action(params: FoliationParams, family: int, k: int, l: int, branch: str) -> SpectralPair:
    """``D e^{(f)}_{kl+-} = +-sqrt(lam) e^{(f)}_{kl+-}``."""
    ms = mixed_spectrum(params, k, l)
    vec = ms.vector(family, branch)
    s = math.sqrt(ms.lam_plus)
    return SpectralPair(k, l, branch, family, s if branch == "+" else -s, vec)


# -- counting ---------------------------------------------------------------------

def count_linear(R: float) -> int:
    """``4 * #{(k,l) : k^2 + l^2 <= R^2}``."""
    if R < 0:
        return 0
    R2 = R * R
    kmax = math.floor(R)
    total = 0
    for k in range(-kmax, kmax + 1):
        rest = R2 - k * k
        m = math.isqrt(math.floor(rest))
        while (m + 1) ** 2 <= rest:
            m += 1
        total += 2 * m + 1
    return 4 * total


def count_torus(R: float) -> int:
    """Eigenvalues ``+-sqrt(2pi) |(k,l)|`` of modulus ``<= R``; two per lattice point."""
    return count_linear(R / SQRT_2PI) // 2


def _dirac_f(a: float, b: float, k: np.ndarray, l: np.ndarray) -> np.ndarray:
    X = a * k + b * l
    Y = b * k - a * l
    return X ** 4 + Y * Y


def count_dirac(params: FoliationParams, R: float) -> int:
    """``4 * #{(k,l) : X^4 + Y^2 <= R^4}``, by per-row interval search."""
    a, b = _f(params.a), _f(params.b)
    R4 = R ** 4 * (1 + 1e-13)
    span = int(math.ceil(R + R * R)) + 2
    ks = np.arange(-span, span + 1, dtype=np.float64)
    lo = np.full(ks.shape, -2 * span - 2, dtype=np.int64)
    hi = np.full(ks.shape, 2 * span + 2, dtype=np.int64)
    # integer ternary search for the row minimum of the convex f(k, .)
    while np.any(hi - lo > 2):
        m1 = lo + (hi - lo) // 3
        m2 = hi - (hi - lo) // 3
        left = _dirac_f(a, b, ks, m1) < _dirac_f(a, b, ks, m2)
        hi = np.where(left, m2, hi)
        lo = np.where(left, lo, m1)
    cand = np.stack([lo, lo + 1, hi])
    vals = _dirac_f(a, b, ks[None, :], cand)
    arg = cand[np.argmin(vals, axis=0), np.arange(ks.size)]
    inside = _dirac_f(a, b, ks, arg) <= R4
    ks, arg = ks[inside], arg[inside]
    if ks.size == 0:
        return 0
    bound = 2 * span + 2

    def edge(direction: int) -> np.ndarray:
        # largest step s >= 0 with f(k, arg + direction*s) <= R4
        good = np.zeros(ks.shape, dtype=np.int64)
        bad = np.full(ks.shape, bound, dtype=np.int64)
        while np.any(bad - good > 1):
            mid = (good + bad) // 2
            ok = _dirac_f(a, b, ks, arg + direction * mid) <= R4
            good = np.where(ok, mid, good)
            bad = np.where(ok, bad, mid)
        return good

    return int(4 * np.sum(edge(1) + edge(-1) + 1))


def count_dirac_bruteforce(params: FoliationParams, R: float) -> int:
    a, b = _f(params.a), _f(params.b)
    span = int(math.ceil(R + R * R)) + 1
    k, l = np.meshgrid(np.arange(-span, span + 1), np.arange(-span, span + 1), indexing="ij")
    return int(4 * np.count_nonzero(_dirac_f(a, b, k.astype(float), l.astype(float)) <= R ** 4 * (1 + 1e-13)))


def dirac_constant() -> float:
    """Lattice-area heuristic ``N_D(R) / R^3 -> 16 * int_0^1 sqrt(1 - s^4) ds``."""
    return float(16 * mpmath.quad(lambda s: mpmath.sqrt(1 - s ** 4), [0, 1]))


def _fit(radii: Sequence[float], counts: Sequence[int]) -> tuple[float, float, float]:
    x = np.log(np.asarray(radii, dtype=float))
    y = np.log(np.asarray(counts, dtype=float))
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, icpt), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ np.array([slope, icpt])
    return float(slope), float(np.sqrt(np.mean(resid ** 2))), float(math.exp(icpt))


def weyl_count(operator: str, R_max: float, params: FoliationParams | None = None,
               grid: Sequence[float] | None = None, n_points: int = 24, R_min: float = 10.0) -> WeylCount:
    """Eigenvalue counts ``N(R)`` on a geometric grid and a log-log exponent fit.

    ``operator`` is ``Qtilde``/``linear``, ``Dirac``/``dirac`` or ``Torus``/``torus``.
    Radii below ``R_min`` are excluded from the fit.
    """
    kind = operator.lower()
    if R_max < 5:
        raise ValueError("R_max must be at least 5")
    if kind in ("qtilde", "linear"):
        counter, expected = count_linear, 4 * math.pi
    elif kind in ("dirac", "d"):
        if params is None:
            raise ValueError("Dirac counts need foliation parameters")
        counter, expected = (lambda R: count_dirac(params, R)), dirac_constant()
    elif kind == "torus":
        counter, expected = count_torus, 1.0
    else:
        raise ValueError(f"unknown operator {operator!r}")
    if kind == "torus":
        R_min = R_min * SQRT_2PI
    if grid is None:
        lo = min(R_min, R_max)
        grid = list(np.geomspace(lo, R_max, n_points)) if R_max > lo else [R_max]
    radii = [float(r) for r in sorted(grid)]
    counts = [counter(r) for r in radii]
    fit_r = [r for r in radii if r >= R_min * (1 - 1e-12)]
    fit_n = [n for r, n in zip(radii, counts) if r >= R_min * (1 - 1e-12)]
    wc = WeylCount(operator, radii, counts, expected_constant=expected)
    if len(fit_r) >= 2 and min(fit_n) > 0:
        wc.fitted_exponent, wc.fit_residual, wc.fitted_constant = _fit(fit_r, fit_n)
    return wc


# -- tables ---------------------------------------------------------------------------

def spectrum_rows(params: FoliationParams | None, operator: str, N: int) -> list[tuple]:
    """Rows ``(k, l, family, branch, eigenvalue)`` sorted by eigenvalue then index."""
    rows = []
    for k, l in window(N):
        if operator == "linear":
            lam = math.hypot(_f(params.X(k, l)), _f(params.Y(k, l)))
            for fam in (1, 2):
                rows += [(k, l, fam, "+", lam), (k, l, fam, "-", -lam)]
        elif operator == "mixed":
            lam = mixed_lambda(params, k, l)
            for fam in (1, 2):
                rows += [(k, l, fam, "+", lam), (k, l, fam, "-", -lam)]
        elif operator == "dirac":
            s = math.sqrt(mixed_lambda(params, k, l))
            for fam in (1, 2):
                rows += [(k, l, fam, "+", s), (k, l, fam, "-", -s)]
        elif operator == "torus":
            s = SQRT_2PI * math.hypot(k, l)
            rows += [(k, l, 1, "+", s), (k, l, 1, "-", -s)]
        else:
            raise ValueError(f"unknown operator {operator!r}")
    rows.sort(key=lambda r: (r[4], r[0], r[1], r[2], r[3]))
    return rows


def write_csv(rows: Iterable[tuple], stream) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["k", "l", "family", "branch", "eigenvalue"])
    for k, l, fam, br, ev in rows:
        w.writerow([k, l, fam, br, repr(float(ev) + 0.0)])


def rows_to_json(rows: Iterable[tuple]) -> list[dict]:
    return [{"k": k, "l": l, "family": f, "branch": b, "eigenvalue": float(e)} for k, l, f, b, e in rows]
