"""Maximal-torus weight analysis of harmonic cubics

The torus element g(r, s) rotates the (x1, x2)-plane by 2 pi r and the
(x3, x4)-plane by 2 pi s. With z1 = x1 + i x2 and z2 = x3 + i x4 the complex
cubic of weight (a, b) is an eigenvector of act(g, .) with eigenvalue
exp(2 pi i (a r + b s)), so g fixes V_(a,b) exactly when a r + b s is an integer.

Weyl chamber: images under swapping r and s and under negating either
coordinate mod 1 are identified. Every class meets the region
0 <= s <= min(r, 1 - r); the representative is the lexicographically
largest image inside it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .cubics import (
    WEIGHT_POLYS,
    HarmonicCubic,
    act,
    coordinates,
    fixed_subspace,
    from_coordinates,
    rep_matrix,
    torus_rotation,
    weight_cubic_parts,
)
from .errors import ValidationError
from .quat4 import SO4Matrix
from .utils import logger

# name -> (a, b): the condition a r + b s in Z, which is the weight it fixes
CONDITIONS: dict[str, tuple[int, int]] = {
    "3r": (3, 0),
    "r": (1, 0),
    "2r+s": (2, 1),
    "2r-s": (2, -1),
    "2s+r": (1, 2),
    "2s-r": (-1, 2),
    "3s": (0, 3),
    "s": (0, 1),
}
WEIGHT_INDEX = {w: n for n, (w, _) in enumerate(WEIGHT_POLYS)}
FIX_TOL = 1e-10


@dataclass(frozen=True, order=True)
class TorusElement:
    """(r, s) in [0, 1)^2 as reduced fractions"""

    r: Fraction
    s: Fraction

    def __post_init__(self):
        for name in ("r", "s"):
            value = getattr(self, name)
            if isinstance(value, float):
                raise ValidationError(f"torus coordinate {name} must be rational, got {value}")
            object.__setattr__(self, name, Fraction(value) % 1)

    @classmethod
    def parse(cls, text: str) -> TorusElement:
        """From "r,s", e.g. "2/3,1/6".

        Raises:
            ValidationError: If the text is not two rationals
        """
        try:
            r, s = (Fraction(part.strip()) for part in text.split(","))
        except (ValueError, ZeroDivisionError):
            raise ValidationError(f"Expected 'r,s' with rational r, s, got {text!r}") from None
        return cls(r, s)

    def __str__(self) -> str:
        return f"({self.r},{self.s})"

    def to_json(self) -> list[str]:
        return [str(self.r), str(self.s)]


def element_order(g: TorusElement) -> int:
    return math.lcm(g.r.denominator, g.s.denominator)


def torus_matrix(g: TorusElement) -> SO4Matrix:
    """Matrix A with act(A, V_(a,b)) = exp(2 pi i (a r + b s)) V_(a,b)."""
    return SO4Matrix.from_numpy(torus_rotation(float(g.r), float(g.s)))


def satisfied_conditions(g: TorusElement) -> list[str]:
    """The conditions a r + b s in Z that hold, in canonical order."""
    return [name for name, (a, b) in CONDITIONS.items() if (a * g.r + b * g.s).denominator == 1]


def condition_rank(names: list[str]) -> int:
    if not names:
        return 0
    return int(np.linalg.matrix_rank(np.array([CONDITIONS[n] for n in names], dtype=float)))


@dataclass
class FixedCubicBasis:
    """Harmonic cubics fixed by a torus element"""

    element: TorusElement
    conditions: list[str]
    basis: list[HarmonicCubic]
    max_residual: float = 0.0

    @property
    def dim(self) -> int:
        return len(self.basis)

    def to_json(self) -> dict:
        return {
            "element": self.element.to_json(),
            "conditions": self.conditions,
            "dim": self.dim,
            "max_residual": self.max_residual,
            "basis": [b.to_json() for b in self.basis],
        }


def fixed_cubic_basis(g: TorusElement) -> FixedCubicBasis:
    """Re and Im of the weight cubics whose condition g satisfies, each checked fixed."""
    conditions = satisfied_conditions(g)
    basis: list[HarmonicCubic] = []
    for name in conditions:
        basis.extend(weight_cubic_parts(WEIGHT_INDEX[CONDITIONS[name]]))
    matrix = torus_matrix(g)
    worst = 0.0
    for cubic in basis:
        diff = act(matrix, cubic.to_float()) - cubic.to_float()
        worst = max(worst, diff.norm() / cubic.norm())
    if worst > FIX_TOL:
        logger.warn(f"weight cubics of {g} are not fixed (residual {worst:.3g})")
    return FixedCubicBasis(g, conditions, basis, worst)


def kernel_dim(g: TorusElement, rtol: float = 1e-9) -> int:
    """dim ker(rep(g) - I), computed independently of the weight bookkeeping."""
    return len(fixed_subspace([torus_matrix(g)], exact=False, rtol=rtol))


@dataclass(frozen=True)
class WeightVector:
    """Complex cubic of weight (a, b), by its real and imaginary parts"""

    weight: tuple[int, int]
    real: HarmonicCubic
    imag: HarmonicCubic


def weight_decomposition() -> dict[tuple[int, int], WeightVector]:
    """All 16 weights: the 8 listed weight cubics and their conjugates."""
    out: dict[tuple[int, int], WeightVector] = {}
    for n, (weight, _) in enumerate(WEIGHT_POLYS):
        re, im = weight_cubic_parts(n)
        out[weight] = WeightVector(weight, re, im)
        opposite = (-weight[0], -weight[1])
        out[opposite] = WeightVector(opposite, re, im.scale(-1))
    return out


def weight_basis_matrix() -> tuple[list[tuple[int, int]], np.ndarray]:
    """Weights and the 16x16 complex matrix whose columns are their coordinates."""
    labels, columns = [], []
    for weight, vec in weight_decomposition().items():
        labels.append(weight)
        columns.append(coordinates(vec.real) + 1j * coordinates(vec.imag))
    return labels, np.array(columns).T


def rep_in_weight_basis(g: TorusElement) -> tuple[list[tuple[int, int]], np.ndarray]:
    """rep(g) conjugated into the weight basis (diagonal)."""
    labels, w = weight_basis_matrix()
    return labels, np.linalg.solve(w, rep_matrix(torus_matrix(g)) @ w)


def eigenvalue(weight: tuple[int, int], g: TorusElement) -> complex:
    a, b = weight
    phase = (a * g.r + b * g.s) % 1
    return complex(np.exp(2j * np.pi * float(phase)))


def character(g: TorusElement) -> float:
    """Trace of rep(g) from the weights: sum of 2 cos(2 pi (a r + b s))."""
    return float(sum(eigenvalue(w, g).real for w in weight_decomposition()))


def weyl_images(g: TorusElement) -> set[TorusElement]:
    out = set()
    for r, s in ((g.r, g.s), (g.s, g.r)):
        for sr in (1, -1):
            for ss in (1, -1):
                out.add(TorusElement(sr * r, ss * s))
    return out


def in_chamber(g: TorusElement) -> bool:
    return 0 <= g.s <= min(g.r, 1 - g.r)


def weyl_reduce(g: TorusElement) -> TorusElement:
    """Lexicographically largest Weyl image with 0 <= s <= min(r, 1 - r)."""
    return max(h for h in weyl_images(g) if in_chamber(h))


@dataclass(frozen=True)
class ScanEntry:
    order: int
    element: TorusElement
    fixed_dim: int
    conditions: tuple[str, ...]

    def to_json(self) -> dict:
        return {
            "order": self.order,
            "element": self.element.to_json(),
            "fixed_dim": self.fixed_dim,
            "conditions": list(self.conditions),
        }


@dataclass
class ScanResult:
    max_den: int
    points_scanned: int
    max_order: int
    entries: list[ScanEntry] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "max_den": self.max_den,
            "points_scanned": self.points_scanned,
            "max_order": self.max_order,
            "entries": [e.to_json() for e in self.entries],
        }


def enumerate_small_orders(max_den: int = 60) -> ScanResult:
    """Torus elements of order <= max_den fixing a cubic beyond a single weight pair.

    Scans every (i/n, j/n) of exact order n in the chamber and keeps those
    satisfying two linearly independent conditions. Hits are collected per
    Weyl class; the result is sorted by decreasing order, then fixed dimension.

    Raises:
        ValidationError: If max_den < 1
    """
    if max_den < 1:
        raise ValidationError("max_den must be >= 1")
    logger.info(f"Scanning torus elements with denominators <= {max_den}")
    classes: dict[TorusElement, ScanEntry] = {}
    scanned = 0
    for n in range(1, max_den + 1):
        for i in range(n):
            for j in range(min(i, n - i) + 1):
                if math.gcd(math.gcd(i, j), n) != 1:
                    continue
                scanned += 1
                hits = [name for name, (a, b) in CONDITIONS.items() if (a * i + b * j) % n == 0]
                if len(hits) < 2 or condition_rank(hits) < 2:
                    continue
                rep = weyl_reduce(TorusElement(Fraction(i, n), Fraction(j, n)))
                if rep not in classes:
                    conds = satisfied_conditions(rep)
                    classes[rep] = ScanEntry(element_order(rep), rep, 2 * len(conds), tuple(conds))
    entries = sorted(classes.values(), key=lambda e: (-e.order, e.fixed_dim, e.element))
    max_order = max((e.order for e in entries), default=0)
    logger.info(f"Scanned {scanned} elements: {len(entries)} classes, max order {max_order}")
    return ScanResult(max_den, scanned, max_order, entries)


def generic_fixed_cubic(g: TorusElement, rng: np.random.Generator) -> HarmonicCubic:
    """Random combination of the fixed basis of g."""
    basis = fixed_cubic_basis(g).basis
    if not basis:
        raise ValidationError(f"{g} fixes no harmonic cubic")
    coeffs = rng.standard_normal(len(basis))
    return from_coordinates(sum(c * coordinates(b) for c, b in zip(coeffs, basis)))

