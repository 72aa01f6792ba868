"""Lattice representation of the algebra and of the geometric operators.

``L^2(T^2, E)`` is identified with four copies of ``L^2(T^2)`` spanned by
``e^c_{kl}``, ``c = 1..4`` standing for the frames ``1, tau, nu, tau(x)nu``.
Every operator in play maps the fiber over ``(k, l)`` to the fiber over
``(k, l) + shift`` by a small matrix depending on ``(k, l)``; a
:class:`BlockOperator` stores one matrix-valued function per shift and is
only densified on demand.

Derivative convention: ``e_{kl} = exp(i(k th1 + l th2))``, hence
``d/dx -> i(ak + bl)`` and ``d/dy -> i(bk - al)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Iterator, Mapping, NamedTuple, TextIO

import numpy as np

from .algebra import AlgebraElement, CrossedProductAlgebra, FoliationParams
from .scalars import GaussianRational, Phased

__all__ = [
    "ModeIndex",
    "SectionVector",
    "BlockOperator",
    "DenseOperator",
    "WindowTooLarge",
    "pi",
    "apply_algebra",
    "diff_ops",
    "assemble",
    "commutator",
    "to_dense",
    "write_triplets",
    "operator_difference",
    "window",
]

COMPONENTS = ("1", "tau", "nu", "tau*nu")
DENSE_LIMIT = 12_000


class WindowTooLarge(MemoryError):
    pass


class ModeIndex(NamedTuple):
    k: int
    l: int
    comp: int  # 1-based


def window(radius: int) -> Iterator[tuple[int, int]]:
    for k in range(-radius, radius + 1):
        for l in range(-radius, radius + 1):
            yield k, l


def _zero(dim: int) -> np.ndarray:
    m = np.empty((dim, dim), dtype=object)
    for i in range(dim):
        for j in range(dim):
            m[i, j] = Phased()
    return m


def _scalar_matrix(dim: int, c) -> np.ndarray:
    m = _zero(dim)
    c = Phased.lift(c)
    for i in range(dim):
        m[i, i] = c
    return m


def _i_times(x):
    if isinstance(x, (int,)) or hasattr(x, "denominator"):
        return GaussianRational(0, x)
    return complex(0.0, float(x))


@dataclass(frozen=True)
class SectionVector:
    """Finitely supported vector over modes ``e^c_{kl}`` with leakage bookkeeping."""

    coeffs: Mapping[ModeIndex, Phased] = field(default_factory=dict)
    leakage: float = 0.0
    dim: int = 4

    def __post_init__(self):
        clean = {}
        for m, c in self.coeffs.items():
            c = Phased.lift(c)
            if not c.is_zero():
                clean[ModeIndex(*m)] = c
        object.__setattr__(self, "coeffs", clean)

    @classmethod
    def basis(cls, k: int, l: int, comp: int, dim: int = 4) -> "SectionVector":
        return cls({ModeIndex(k, l, comp): Phased.const(1)}, dim=dim)

    @classmethod
    def from_fiber(cls, k: int, l: int, vec: Iterable, dim: int = 4) -> "SectionVector":
        return cls({ModeIndex(k, l, c + 1): Phased.lift(v) for c, v in enumerate(vec)}, dim=dim)

    def __add__(self, other: "SectionVector") -> "SectionVector":
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            out[m] = out[m] + c if m in out else c
        return SectionVector(out, self.leakage + other.leakage, self.dim)

    def __sub__(self, other: "SectionVector") -> "SectionVector":
        return self + other.scale(-1)

    def scale(self, c) -> "SectionVector":
        c = Phased.lift(c)
        return SectionVector({m: c * v for m, v in self.coeffs.items()}, self.leakage, self.dim)

    __rmul__ = scale

    def fibers(self) -> set[tuple[int, int]]:
        return {(m.k, m.l) for m in self.coeffs}

    def fiber(self, k: int, l: int, values=None) -> np.ndarray:
        out = np.zeros(self.dim, dtype=complex)
        for c in range(self.dim):
            v = self.coeffs.get(ModeIndex(k, l, c + 1))
            if v is not None:
                out[c] = v.evaluate(values)
        return out

    def norm(self, values=None) -> float:
        return float(np.sqrt(sum(abs(c.evaluate(values)) ** 2 for c in self.coeffs.values())))

    def inner(self, other: "SectionVector", values=None) -> complex:
        """``<self|other>``, antilinear in the first slot."""
        total = 0j
        for m, c in self.coeffs.items():
            d = other.coeffs.get(m)
            if d is not None:
                total += np.conj(c.evaluate(values)) * d.evaluate(values)
        return total

    def max_abs(self, values=None) -> float:
        if not self.coeffs:
            return 0.0
        if values is None and all(c.is_constant() for c in self.coeffs.values()):
            values = {}
        if values is None:
            return max(c.l1() for c in self.coeffs.values())
        return max(abs(c.evaluate(values)) for c in self.coeffs.values())

    def is_zero(self) -> bool:
        return not self.coeffs


FiberFn = Callable[[int, int], np.ndarray]


class BlockOperator:
    """``sum_shift`` of fiber maps ``(k,l) -> M_shift(k,l)`` sending fiber ``(k,l)`` to ``(k,l)+shift``."""

    __slots__ = ("dim", "blocks", "label")

    def __init__(self, dim: int, blocks: Mapping[tuple[int, int], FiberFn], label: str = ""):
        self.dim = dim
        self.blocks = dict(blocks)
        self.label = label

    # -- constructors -------------------------------------------------------
    @classmethod
    def zero(cls, dim: int = 4) -> "BlockOperator":
        return cls(dim, {}, "0")

    @classmethod
    def identity(cls, dim: int = 4) -> "BlockOperator":
        m = _scalar_matrix(dim, 1)
        return cls(dim, {(0, 0): lambda k, l: m}, "1")

    @classmethod
    def constant(cls, matrix, shift=(0, 0), multiplier: Callable[[int, int], object] | None = None,
                 label: str = "") -> "BlockOperator":
        """``matrix (x) (shift composed with a per-mode multiplier)``."""
        base = np.asarray(matrix, dtype=object)
        dim = base.shape[0]
        lifted = np.empty_like(base)
        for idx, v in np.ndenumerate(base):
            lifted[idx] = Phased.lift(v)
        if multiplier is None:
            return cls(dim, {tuple(shift): lambda k, l: lifted}, label)

        def fn(k, l):
            return lifted * Phased.lift(multiplier(k, l))

        return cls(dim, {tuple(shift): fn}, label)

    # -- algebra ------------------------------------------------------------
    def fiber(self, k: int, l: int, shift=(0, 0)) -> np.ndarray:
        fn = self.blocks.get(tuple(shift))
        return _zero(self.dim) if fn is None else fn(k, l)

    @property
    def shifts(self) -> set[tuple[int, int]]:
        return set(self.blocks)

    def _combine(self, other: "BlockOperator", sign: int, label: str) -> "BlockOperator":
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        blocks = dict(self.blocks)
        for s, g in other.blocks.items():
            f = blocks.get(s)
            if f is None:
                blocks[s] = g if sign > 0 else (lambda k, l, g=g: -g(k, l))
            else:
                blocks[s] = (lambda k, l, f=f, g=g: f(k, l) + g(k, l)) if sign > 0 else \
                    (lambda k, l, f=f, g=g: f(k, l) - g(k, l))
        return BlockOperator(self.dim, blocks, label)

    def __add__(self, other: "BlockOperator") -> "BlockOperator":
        return self._combine(other, 1, f"({self.label}+{other.label})")

    def __sub__(self, other: "BlockOperator") -> "BlockOperator":
        return self._combine(other, -1, f"({self.label}-{other.label})")

    def __neg__(self) -> "BlockOperator":
        return self.scale(-1)

    def scale(self, c) -> "BlockOperator":
        c = Phased.lift(c)
        return BlockOperator(self.dim, {s: (lambda k, l, f=f: f(k, l) * c) for s, f in self.blocks.items()},
                             f"{c!r}*{self.label}")

    def __rmul__(self, c) -> "BlockOperator":
        return self.scale(c)

    def __matmul__(self, other: "BlockOperator") -> "BlockOperator":
        """Composition ``self o other``."""
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        parts: dict[tuple[int, int], list] = {}
        for (sa, ta), f in self.blocks.items():
            for (sb, tb), g in other.blocks.items():
                parts.setdefault((sa + sb, ta + tb), []).append((f, g, sb, tb))
        blocks = {}
        for shift, terms in parts.items():
            @lru_cache(maxsize=8192)
            def fn(k, l, terms=terms):
                acc = None
                for f, g, sb, tb in terms:
                    m = f(k + sb, l + tb) @ g(k, l)
                    acc = m if acc is None else acc + m
                return acc
            blocks[shift] = fn
        return BlockOperator(self.dim, blocks, f"{self.label}{other.label}")

    def apply(self, psi: SectionVector, radius: int | None = None) -> SectionVector:
        out: dict[ModeIndex, Phased] = {}
        leak = psi.leakage
        by_fiber: dict[tuple[int, int], dict[int, Phased]] = {}
        for m, c in psi.coeffs.items():
            by_fiber.setdefault((m.k, m.l), {})[m.comp - 1] = c
        for (k, l), comps in by_fiber.items():
            for (s, t), f in self.blocks.items():
                mat = f(k, l)
                tk, tl = k + s, l + t
                inside = radius is None or (abs(tk) <= radius and abs(tl) <= radius)
                for r in range(self.dim):
                    acc = Phased()
                    for c, v in comps.items():
                        e = mat[r, c]
                        if not e.is_zero():
                            acc = acc + e * v
                    if acc.is_zero():
                        continue
                    if inside:
                        key = ModeIndex(tk, tl, r + 1)
                        out[key] = out[key] + acc if key in out else acc
                    else:
                        leak += acc.l1() ** 2
        return SectionVector(out, leak, self.dim)

    def __repr__(self) -> str:
        return f"BlockOperator(dim={self.dim}, shifts={sorted(self.blocks)}, label={self.label!r})"


# -- representation of the algebra ------------------------------------------

def pi(x: AlgebraElement, dim: int = 4) -> BlockOperator:
    """Diagonal action ``id (x) (v_t s1^k s2^l)`` of an algebra element."""
    reg = x.algebra.registry
    grouped: dict[tuple[int, int], list] = {}
    for (t, k, l), c in x.terms.items():
        grouped.setdefault((k, l), []).append((t, c))
    blocks = {}
    for (k, l), items in grouped.items():
        @lru_cache(maxsize=8192)
        def fn(k0, l0, k=k, l=l, items=tuple(items)):
            # V_t e_{k0+k, l0+l} = e^{i(a(k0+k) + b(l0+l)) t} e_{...}
            total = Phased()
            for t, c in items:
                total = total + c.times_phase(reg.phase_of_frequency(t, k0 + k, l0 + l))
            return _scalar_matrix(dim, total)
        blocks[(k, l)] = fn
    return BlockOperator(dim, blocks, "pi")


def apply_algebra(x: AlgebraElement, psi: SectionVector, radius: int | None = None) -> SectionVector:
    return pi(x, psi.dim).apply(psi, radius)


# -- geometric operators -----------------------------------------------------

_DIFF_SLOTS = {
    # which: list of (row, col, derivative, sign)  (0-based, target row <- source col)
    "dL": [(1, 0, "x", 1), (3, 2, "x", 1)],
    "dH": [(2, 0, "y", 1), (3, 1, "y", -1)],
    "dL_star": [(0, 1, "x", -1), (2, 3, "x", -1)],
    "dH_star": [(0, 2, "y", -1), (1, 3, "y", 1)],
}


def _derivative(params: FoliationParams, which: str, k: int, l: int):
    return _i_times(params.X(k, l) if which == "x" else params.Y(k, l))


def diff_ops(params: FoliationParams, which: str) -> BlockOperator:
    """Longitudinal/transversal differentials and their adjoints."""
    if which not in _DIFF_SLOTS:
        raise ValueError(f"unknown differential {which!r}; expected one of {sorted(_DIFF_SLOTS)}")
    slots = _DIFF_SLOTS[which]

    @lru_cache(maxsize=8192)
    def fn(k, l):
        m = _zero(4)
        for r, c, d, sign in slots:
            m[r, c] = Phased.const(sign * _derivative(params, d, k, l))
        return m

    return BlockOperator(4, {(0, 0): fn}, which)


_PARITY = np.diag([1, 1, -1, -1])  # (-1)^{N-degree} on 1, tau, nu, tau*nu


def assemble(params: FoliationParams, which: str, tamper: bool = False) -> BlockOperator:
    """``Qtilde``, ``QL``, ``QH`` or the mixed signature operator ``Qmixed``.

    ``Qmixed = QL (-1)^{dN} - QH``: the sign of the transversal part is the
    one whose eigenvectors are the ``gamma``-vectors of the mixed spectrum.
    ``tamper`` flips one matrix entry (negative-control hook).
    """
    dL, dLs = diff_ops(params, "dL"), diff_ops(params, "dL_star")
    dH, dHs = diff_ops(params, "dH"), diff_ops(params, "dH_star")
    if which == "Qtilde":
        op = dL + dLs + dH + dHs
    elif which == "QL":
        op = dL @ dLs - dLs @ dL
    elif which == "QH":
        op = dH + dHs
    elif which == "Qmixed":
        parity = BlockOperator.constant(_PARITY)
        op = (dL @ dLs - dLs @ dL) @ parity - (dH + dHs)
    else:
        raise ValueError(f"unknown operator {which!r}")
    op = _materialize(op, which)
    if tamper:
        op = _tampered(op)
    return op


def _materialize(op: BlockOperator, label: str) -> BlockOperator:
    fns = {s: lru_cache(maxsize=16384)(f) for s, f in op.blocks.items()}
    return BlockOperator(op.dim, fns, label)


def _tampered(op: BlockOperator) -> BlockOperator:
    base = op.blocks[(0, 0)]

    def fn(k, l):
        m = base(k, l).copy()
        m[0, 1] = -m[0, 1]
        return m

    return BlockOperator(op.dim, {**op.blocks, (0, 0): fn}, op.label + "[tampered]")


def commutator(op: BlockOperator, x: AlgebraElement | BlockOperator) -> BlockOperator:
    """``op o pi(x) - pi(x) o op``."""
    px = x if isinstance(x, BlockOperator) else pi(x, op.dim)
    return _materialize(op @ px - px @ op, f"[{op.label},x]")


# -- comparison and densification -------------------------------------------

def operator_difference(A: BlockOperator, B: BlockOperator, radius: int, values=None):
    """Compare ``A`` and ``B`` fiberwise on ``|k|,|l| <= radius``.

    Returns ``(exact, max_residual, witness)`` where ``exact`` means every
    entry of ``A - B`` vanishes identically (formal phases), the residual is
    the largest entry modulus (coefficient l1-norm when phases are formal),
    and ``witness`` is the source mode of the worst entry.
    """
    exact = True
    worst, witness = 0.0, None
    shifts = A.shifts | B.shifts
    for k, l in window(radius):
        for s in shifts:
            d = A.fiber(k, l, s) - B.fiber(k, l, s)
            for (r, c), e in np.ndenumerate(d):
                if e.is_zero():
                    continue
                exact = False
                if values is not None or e.is_constant():
                    val = abs(e.evaluate(values or {}))
                else:
                    val = e.l1()
                if val > worst or witness is None:
                    worst, witness = val, ModeIndex(k, l, c + 1)
    return exact, worst, witness


@dataclass(frozen=True)
class DenseOperator:
    matrix: np.ndarray
    modes: list[ModeIndex]
    boundary: np.ndarray  # True where some shift of the operator leaves the window
    radius: int
    dim: int

    def index(self, m: ModeIndex) -> int:
        return mode_position(m, self.radius, self.dim)

    def interior(self) -> np.ndarray:
        return ~self.boundary


def mode_position(m: ModeIndex, radius: int, dim: int) -> int:
    side = 2 * radius + 1
    return ((m.k + radius) * side + (m.l + radius)) * dim + (m.comp - 1)


def to_dense(op: BlockOperator, radius: int, values: Mapping[str, float] | None = None,
             limit: int = DENSE_LIMIT) -> DenseOperator:
    """Dense matrix on the window basis ``|k|,|l| <= radius`` (k-major, then l, then component)."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    side = 2 * radius + 1
    n = op.dim * side * side
    if n > limit:
        raise WindowTooLarge(f"window of dimension {n} exceeds the dense limit {limit}")
    mat = np.zeros((n, n), dtype=complex)
    modes = [ModeIndex(k, l, c + 1) for k, l in window(radius) for c in range(op.dim)]
    reach = max((max(abs(s), abs(t)) for s, t in op.shifts), default=0)
    boundary = np.array([max(abs(m.k), abs(m.l)) > radius - reach for m in modes])
    for k, l in window(radius):
        for (s, t), f in op.blocks.items():
            tk, tl = k + s, l + t
            if abs(tk) > radius or abs(tl) > radius:
                continue
            block = f(k, l)
            for (r, c), e in np.ndenumerate(block):
                if e.is_zero():
                    continue
                mat[mode_position(ModeIndex(tk, tl, r + 1), radius, op.dim),
                    mode_position(ModeIndex(k, l, c + 1), radius, op.dim)] = e.evaluate(values)
    return DenseOperator(mat, modes, boundary, radius, op.dim)


def write_triplets(dense: DenseOperator, stream: TextIO, tol: float = 0.0) -> int:
    """Coordinate export ``row col re im``; returns the number of entries written."""
    stream.write(f"# mode ordering: index = ((k+{dense.radius})*{2 * dense.radius + 1}"
                 f" + (l+{dense.radius}))*{dense.dim} + (comp-1); radius={dense.radius}; dim={dense.dim}\n")
    stream.write("# row col re im\n")
    count = 0
    rows, cols = np.nonzero(np.abs(dense.matrix) > tol)
    for r, c in zip(rows, cols):
        z = dense.matrix[r, c]
        stream.write(f"{r} {c} {z.real!r} {z.imag!r}\n")
        count += 1
    return count


def fiber_operator(op: BlockOperator, k: int, l: int, values=None) -> np.ndarray:
    """Complex fiber matrix of a shift-free operator."""
    block = op.fiber(k, l)
    out = np.zeros(block.shape, dtype=complex)
    for idx, e in np.ndenumerate(block):
        out[idx] = e.evaluate(values)
    return out


def algebra_of(x: AlgebraElement) -> CrossedProductAlgebra:
    return x.algebra
