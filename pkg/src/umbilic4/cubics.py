"""Harmonic cubics on R^4 as an SO(4)-module

Cubics are stored by their 20 monomial coefficients, monomials x_i x_j x_k
with i <= j <= k in lexicographic order (x1^3, x1^2 x2, ..., x4^3). The fully
symmetric tensor is h_ijk = c_m / mult(m), so P(x) = h_ijk x_i x_j x_k.

Inner product: the apolar product <P, Q> = sum h^P_ijk h^Q_ijk. It is
O(4)-invariant and proportional to the L2 product on S^3 for harmonic cubics.

Action: (A.P)(x) = P(xA) with x a row vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cache
from itertools import combinations_with_replacement, permutations

import numpy as np
import scipy.linalg
import sympy as sp

from .errors import ClassificationError, ValidationError
from .field import ZERO, AlgebraicScalar, is_exact, scalar_from_json, scalar_to_json
from .quat4 import FiniteGroup, SO4Matrix, closure

MONOMIALS: tuple[tuple[int, int, int], ...] = tuple(combinations_with_replacement(range(4), 3))
INDEX = {m: n for n, m in enumerate(MONOMIALS)}
MULT = tuple(len(set(permutations(m))) for m in MONOMIALS)
HARMONIC_TOL = 1e-12

SKEW_PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


def monomial_name(m: tuple[int, int, int]) -> str:
    parts = []
    for v in sorted(set(m)):
        e = m.count(v)
        parts.append(f"x{v + 1}" + (f"^{e}" if e > 1 else ""))
    return "*".join(parts)


def monomials() -> list[str]:
    """Canonical monomial order, as names."""
    return [monomial_name(m) for m in MONOMIALS]


def _sorted_index(*idx: int) -> int:
    return INDEX[tuple(sorted(idx))]


@dataclass(frozen=True)
class LinearForm:
    """l(x) = sum coeffs[k] x_k"""

    coeffs: tuple

    def is_zero(self, tol: float = HARMONIC_TOL) -> bool:
        if all(is_exact(c) for c in self.coeffs):
            return not any(self.coeffs)
        return all(abs(float(c)) < tol for c in self.coeffs)


@dataclass(frozen=True)
class SymmetricCubic:
    """Cubic form on R^4 by its 20 monomial coefficients"""

    coeffs: tuple

    def __post_init__(self):
        if len(self.coeffs) != 20:
            raise ValidationError(f"a cubic needs 20 coefficients, got {len(self.coeffs)}")
        if all(is_exact(c) for c in self.coeffs):
            coeffs = tuple(AlgebraicScalar.coerce(c) for c in self.coeffs)
        else:
            coeffs = tuple(float(c) for c in self.coeffs)
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def zero(cls, exact: bool = True):
        return cls(tuple(ZERO if exact else 0.0 for _ in range(20)))

    @classmethod
    def monomial(cls, *idx: int, exact: bool = True):
        """The monomial x_{i} x_{j} x_{k} with zero-based indices."""
        c = [0] * 20
        c[_sorted_index(*idx)] = 1
        return cls(tuple(c) if exact else tuple(float(x) for x in c))

    @classmethod
    def from_vector(cls, v) -> SymmetricCubic:
        return cls(tuple(float(x) for x in np.asarray(v, dtype=float).reshape(20)))

    @classmethod
    def from_tensor(cls, h: np.ndarray):
        """From a 4x4x4 array; the array is symmetrized first."""
        h = np.asarray(h, dtype=float)
        sym = sum(np.transpose(h, p) for p in permutations(range(3))) / 6.0
        return cls(tuple(MULT[n] * float(sym[m]) for n, m in enumerate(MONOMIALS)))

    @classmethod
    def from_expr(cls, expr) -> SymmetricCubic:
        """From a sympy expression (or string) in x1..x4.

        Raises:
            ValidationError: If the expression is not a cubic form in x1..x4
        """
        xs = sp.symbols("x1:5")
        try:
            poly = sp.Poly(sp.sympify(expr), *xs)
        except (sp.SympifyError, sp.PolynomialError) as e:
            raise ValidationError(f"Not a polynomial in x1..x4: {expr}") from e
        coeffs: list = [0] * 20
        for powers, coef in poly.terms():
            if coef == 0:
                continue
            if sum(powers) != 3:
                raise ValidationError(f"Not homogeneous of degree 3: {expr}")
            idx = tuple(v for v in range(4) for _ in range(powers[v]))
            coeffs[INDEX[idx]] = _sympy_scalar(coef)
        return cls(tuple(coeffs))

    @classmethod
    def from_json(cls, data) -> SymmetricCubic:
        if isinstance(data, dict):
            data = data.get("coeffs")
        if not isinstance(data, (list, tuple)):
            raise ValidationError("cubic JSON needs a 'coeffs' list of 20 entries")
        return cls(tuple(scalar_from_json(x) for x in data))

    @property
    def is_exact(self) -> bool:
        return isinstance(self.coeffs[0], AlgebraicScalar)

    def to_float(self):
        return type(self)(tuple(float(c) for c in self.coeffs))

    def vector(self) -> np.ndarray:
        return np.array([float(c) for c in self.coeffs], dtype=float)

    def tensor(self) -> np.ndarray:
        h = np.zeros((4, 4, 4))
        for n, m in enumerate(MONOMIALS):
            value = float(self.coeffs[n]) / MULT[n]
            for p in set(permutations(m)):
                h[p] = value
        return h

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.einsum("ijk,...i,...j,...k->...", self.tensor(), x, x, x)

    def to_expr(self):
        xs = sp.symbols("x1:5")
        total = sp.Integer(0)
        for n, m in enumerate(MONOMIALS):
            c = self.coeffs[n]
            if not c:
                continue
            coef = _scalar_to_sympy(c)
            total += coef * xs[m[0]] * xs[m[1]] * xs[m[2]]
        return total

    def to_json(self) -> dict:
        return {"monomials": monomials(), "coeffs": [scalar_to_json(c) for c in self.coeffs]}

    def norm(self) -> float:
        return math.sqrt(abs(float(inner(self, self))))

    def __add__(self, other: SymmetricCubic):
        return SymmetricCubic(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: SymmetricCubic):
        return SymmetricCubic(tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def scale(self, k) -> SymmetricCubic:
        return SymmetricCubic(tuple(c * k for c in self.coeffs))

    def __str__(self) -> str:
        return str(self.to_expr())


class HarmonicCubic(SymmetricCubic):
    """Symmetric cubic with vanishing Laplacian (traceless tensor)"""

    def __post_init__(self):
        super().__post_init__()
        lap = laplacian(self)
        if self.is_exact:
            ok = lap.is_zero()
        else:
            scale = max(1.0, float(np.max(np.abs(self.vector()))))
            ok = lap.is_zero(HARMONIC_TOL * scale)
        if not ok:
            raise ValidationError(f"cubic is not harmonic (laplacian {lap.coeffs})")

    def __add__(self, other):
        out = SymmetricCubic.__add__(self, other)
        return HarmonicCubic(out.coeffs) if isinstance(other, HarmonicCubic) else out

    def __sub__(self, other):
        out = SymmetricCubic.__sub__(self, other)
        return HarmonicCubic(out.coeffs) if isinstance(other, HarmonicCubic) else out

    def scale(self, k) -> HarmonicCubic:
        return HarmonicCubic(SymmetricCubic.scale(self, k).coeffs)


def _sympy_scalar(coef):
    if coef.is_Float:
        return float(coef)
    if coef.is_Rational:
        return Fraction(int(coef.p), int(coef.q))
    parts = sp.expand(coef).as_coefficients_dict()
    slots = {sp.Integer(1): 0, sp.sqrt(2): 1, sp.sqrt(5): 2, sp.sqrt(10): 3}
    if all(k in slots and v.is_Rational for k, v in parts.items()):
        c = [Fraction(0)] * 4
        for k, v in parts.items():
            c[slots[k]] += Fraction(int(v.p), int(v.q))
        return AlgebraicScalar(*c)
    return float(coef)


def _scalar_to_sympy(c):
    if isinstance(c, AlgebraicScalar):
        roots = (sp.Integer(1), sp.sqrt(2), sp.sqrt(5), sp.sqrt(10))
        return sum(sp.Rational(q.numerator, q.denominator) * r for q, r in zip(c.coeffs, roots))
    return sp.Float(float(c))


def inner(p: SymmetricCubic, q: SymmetricCubic):
    """Apolar inner product sum_m c^P_m c^Q_m / mult(m)."""
    exact = p.is_exact and q.is_exact
    total = ZERO if exact else 0.0
    for n in range(20):
        a, b = p.coeffs[n], q.coeffs[n]
        if not (a and b):
            continue
        if exact:
            total = total + a * b * Fraction(1, MULT[n])
        else:
            total += float(a) * float(b) / MULT[n]
    return total


def laplacian(p: SymmetricCubic) -> LinearForm:
    """Delta P as the linear form with coefficients 6 sum_i h_iik."""
    out = []
    for k in range(4):
        acc = ZERO if p.is_exact else 0.0
        for i in range(4):
            n = _sorted_index(i, i, k)
            c = p.coeffs[n]
            if c:
                acc = acc + c * Fraction(6, MULT[n]) if p.is_exact else acc + 6.0 * float(c) / MULT[n]
        out.append(acc)
    return LinearForm(tuple(out))


def times_norm_squared(form: LinearForm, exact: bool) -> SymmetricCubic:
    """|x|^2 * l(x)."""
    c: list = [ZERO if exact else 0.0] * 20
    for k, lk in enumerate(form.coeffs):
        if not lk:
            continue
        for i in range(4):
            c[_sorted_index(i, i, k)] = c[_sorted_index(i, i, k)] + lk
    return SymmetricCubic(tuple(c))


def harmonic_project(p: SymmetricCubic) -> HarmonicCubic:
    """H = P - |x|^2 (Delta P)/12, the harmonic part of P."""
    lap = laplacian(p)
    scaled = LinearForm(tuple(c * Fraction(1, 12) if p.is_exact else float(c) / 12.0 for c in lap.coeffs))
    trace_part = times_norm_squared(scaled, p.is_exact)
    return HarmonicCubic(SymmetricCubic.__sub__(p, trace_part).coeffs)


def _columns(a: SO4Matrix) -> list[list[tuple[int, AlgebraicScalar]]]:
    """Nonzero entries of each column: x_j -> sum_i a_ij x_i."""
    return [[(i, a[i, j]) for i in range(4) if a[i, j]] for j in range(4)]


def _act_exact(a: SO4Matrix, p: SymmetricCubic) -> SymmetricCubic:
    cols = _columns(a)
    out: list = [ZERO] * 20
    for n, (i, j, k) in enumerate(MONOMIALS):
        c = p.coeffs[n]
        if not c:
            continue
        for pi, ai in cols[i]:
            ci = c * ai
            for pj, aj in cols[j]:
                cij = ci * aj
                for pk, ak in cols[k]:
                    idx = _sorted_index(pi, pj, pk)
                    out[idx] = out[idx] + cij * ak
    return SymmetricCubic(tuple(out))


def act_tensor(a: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Tensor form of the action: h'_ijk = h_abc a_ia a_jb a_kc."""
    return np.einsum("abc,ia,jb,kc->ijk", h, a, a, a)


def act(a: SO4Matrix | np.ndarray, p: SymmetricCubic) -> SymmetricCubic:
    """(A.P)(x) = P(xA); exact when both inputs are exact.

    Returns a HarmonicCubic when P is harmonic.
    """
    if isinstance(a, SO4Matrix) and a.is_exact and p.is_exact:
        out = _act_exact(a, p)
    else:
        mat = a.to_numpy() if isinstance(a, SO4Matrix) else np.asarray(a, dtype=float)
        out = SymmetricCubic.from_tensor(act_tensor(mat, p.tensor()))
    if isinstance(p, HarmonicCubic):
        if out.is_exact:
            return HarmonicCubic(out.coeffs)
        return harmonic_project(out)
    return out


# -- fixed harmonic basis ------------------------------------------------------

# Complex monomials z1^a z1b^b z2^c z2b^d with z1 = x1 + i x2, z2 = x3 + i x4.
WEIGHT_POLYS: tuple[tuple[tuple[int, int], tuple[tuple[complex, tuple[int, int, int, int]], ...]], ...] = (
    ((3, 0), ((1, (3, 0, 0, 0)),)),
    ((2, 1), ((1, (2, 0, 1, 0)),)),
    ((1, 2), ((1, (1, 0, 2, 0)),)),
    ((0, 3), ((1, (0, 0, 3, 0)),)),
    ((2, -1), ((1, (2, 0, 0, 1)),)),
    ((1, 0), ((1, (2, 1, 0, 0)), (-2, (1, 0, 1, 1)))),
    ((0, 1), ((1, (0, 0, 2, 1)), (-2, (1, 1, 1, 0)))),
    ((-1, 2), ((1, (0, 1, 2, 0)),)),
)

_LINEAR = {
    0: {(1, 0, 0, 0): 1, (0, 1, 0, 0): 1j},
    1: {(1, 0, 0, 0): 1, (0, 1, 0, 0): -1j},
    2: {(0, 0, 1, 0): 1, (0, 0, 0, 1): 1j},
    3: {(0, 0, 1, 0): 1, (0, 0, 0, 1): -1j},
}


def _poly_mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            out[e] = out.get(e, 0) + ca * cb
    return out


@cache
def complex_weight_cubic(n: int) -> tuple[tuple[int, int], tuple[complex, ...]]:
    """Weight and 20 complex monomial coefficients of the n-th weight cubic."""
    weight, terms = WEIGHT_POLYS[n]
    total: dict = {}
    for coef, powers in terms:
        poly = {(0, 0, 0, 0): coef}
        for var, e in enumerate(powers):
            for _ in range(e):
                poly = _poly_mul(poly, _LINEAR[var])
        for mono, c in poly.items():
            total[mono] = total.get(mono, 0) + c
    coeffs = [0j] * 20
    for mono, c in total.items():
        idx = tuple(v for v in range(4) for _ in range(mono[v]))
        coeffs[INDEX[idx]] += c
    return weight, tuple(complex(c) for c in coeffs)


def weight_cubic_parts(n: int) -> tuple[HarmonicCubic, HarmonicCubic]:
    """Real and imaginary parts of the n-th weight cubic, exact integer coefficients."""
    _, coeffs = complex_weight_cubic(n)
    re = HarmonicCubic(tuple(Fraction(round(c.real)) for c in coeffs))
    im = HarmonicCubic(tuple(Fraction(round(c.imag)) for c in coeffs))
    return re, im


@cache
def orthonormal_basis_tensors() -> np.ndarray:
    """(16, 4, 4, 4) tensors of the normalized Re/Im weight cubics."""
    out = []
    for n in range(len(WEIGHT_POLYS)):
        for part in weight_cubic_parts(n):
            t = part.tensor()
            out.append(t / np.sqrt(np.sum(t * t)))
    return np.array(out)


def orthonormal_basis() -> list[HarmonicCubic]:
    return [HarmonicCubic(SymmetricCubic.from_tensor(t).coeffs) for t in orthonormal_basis_tensors()]


def coordinates(p: SymmetricCubic) -> np.ndarray:
    """Coordinates of the harmonic part of P in the orthonormal basis."""
    return np.einsum("aijk,ijk->a", orthonormal_basis_tensors(), p.tensor())


def from_coordinates(v) -> HarmonicCubic:
    t = np.einsum("a,aijk->ijk", np.asarray(v, dtype=float), orthonormal_basis_tensors())
    return harmonic_project(SymmetricCubic.from_tensor(t))


def rep_matrix(a: SO4Matrix | np.ndarray) -> np.ndarray:
    """16x16 matrix of act(A, .) in the orthonormal harmonic basis."""
    mat = a.to_numpy() if isinstance(a, SO4Matrix) else np.asarray(a, dtype=float)
    basis = orthonormal_basis_tensors()
    moved = np.einsum("bpqr,ip,jq,kr->bijk", basis, mat, mat, mat)
    return np.einsum("aijk,bijk->ab", basis, moved)


def rep20_exact(a: SO4Matrix) -> list[list[AlgebraicScalar]]:
    """Exact 20x20 matrix of act(A, .) on monomial coefficients (column per monomial)."""
    cols = []
    for n in range(20):
        e = [ZERO] * 20
        e[n] = AlgebraicScalar(1)
        cols.append(_act_exact(a, SymmetricCubic(tuple(e))).coeffs)
    return [[cols[j][i] for j in range(20)] for i in range(20)]


def _laplacian_rows() -> list[list[Fraction]]:
    rows = []
    for k in range(4):
        row = [Fraction(0)] * 20
        for i in range(4):
            n = _sorted_index(i, i, k)
            row[n] += Fraction(6, MULT[n])
        rows.append(row)
    return rows


def rref(rows: list[list], ncols: int) -> tuple[list[list], list[int]]:
    """Reduced row echelon form over AlgebraicScalar; returns rows and pivots."""
    m = [[AlgebraicScalar.coerce(x) for x in row] for row in rows]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(m)) if m[i][c]), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        inv = m[r][c].inverse()
        m[r] = [x * inv if x else x for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [x - f * y if y else x for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def exact_kernel(rows: list[list], ncols: int) -> list[list[AlgebraicScalar]]:
    """Kernel basis, itself in reduced echelon form (leading entry 1)."""
    reduced, pivots = rref(rows, ncols)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [ZERO] * ncols
        v[f] = AlgebraicScalar(1)
        for row, pc in zip(reduced, pivots):
            v[pc] = -row[f]
        basis.append(v)
    if not basis:
        return []
    canonical, _ = rref(basis, ncols)
    return canonical


def fixed_subspace(gens: list[SO4Matrix], exact: bool | None = None, rtol: float = 1e-9) -> list[HarmonicCubic]:
    """Basis of the harmonic cubics fixed by every generator.

    Exact path (all generators exact): reduced echelon basis over
    Q(sqrt2, sqrt5), each vector normalized to leading coefficient 1.
    Numeric path: orthonormal basis from scipy's null_space.

    Raises:
        ValidationError: On an empty generator list
    """
    if not gens:
        raise ValidationError("fixed_subspace needs at least one generator")
    if exact is None:
        exact = all(g.is_exact for g in gens)
    if exact:
        rows: list[list] = []
        for g in gens:
            rep = rep20_exact(g)
            for i in range(20):
                rows.append([rep[i][j] - (1 if i == j else 0) for j in range(20)])
        rows.extend(_laplacian_rows())
        return [HarmonicCubic(tuple(v)) for v in exact_kernel(rows, 20)]
    stacked = np.vstack([rep_matrix(g) - np.eye(16) for g in gens])
    kernel = scipy.linalg.null_space(stacked, rcond=rtol)
    return [from_coordinates(kernel[:, n]) for n in range(kernel.shape[1])]


# -- Lie algebra ---------------------------------------------------------------


def skew_basis() -> list[np.ndarray]:
    """E_1..E_6 with E[p, q] = 1, E[q, p] = -1 over the pairs (p, q)."""
    out = []
    for p, q in SKEW_PAIRS:
        e = np.zeros((4, 4))
        e[p, q], e[q, p] = 1.0, -1.0
        out.append(e)
    return out


def algebra_act_tensor(x: np.ndarray, h: np.ndarray) -> np.ndarray:
    return (
        np.einsum("ai,ibc->abc", x, h)
        + np.einsum("bj,ajc->abc", x, h)
        + np.einsum("ck,abk->abc", x, h)
    )


def algebra_act(x: np.ndarray, p: SymmetricCubic) -> SymmetricCubic:
    """d/dt at 0 of P(x exp(tX)).

    Raises:
        ValidationError: If X is not skew-symmetric
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (4, 4) or np.max(np.abs(x + x.T)) > 1e-12:
        raise ValidationError("algebra_act needs a skew-symmetric 4x4 matrix")
    out = SymmetricCubic.from_tensor(algebra_act_tensor(x, p.tensor()))
    return harmonic_project(out) if isinstance(p, HarmonicCubic) else out


@dataclass
class StabilizerReport:
    """Identity component of the stabilizer, as a Lie algebra"""

    algebra_dim: int
    algebra_basis: list[np.ndarray]
    checked_groups: dict[str, bool] = field(default_factory=dict)
    singular_values: list[float] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "algebra_dim": self.algebra_dim,
            "algebra_basis": [[float(v) for v in x.reshape(16)] for x in self.algebra_basis],
            "checked_groups": dict(self.checked_groups),
            "singular_values": [float(s) for s in self.singular_values],
        }


def group_residuals(p: SymmetricCubic, elements) -> list[float]:
    """||g.P - P|| / ||P|| for each element (absolute when P = 0)."""
    h = p.tensor()
    scale = float(np.sqrt(np.sum(h * h))) or 1.0
    out = []
    for g in elements:
        mat = g.to_numpy() if isinstance(g, SO4Matrix) else np.asarray(g, dtype=float)
        diff = act_tensor(mat, h) - h
        out.append(float(np.sqrt(np.sum(diff * diff))) / scale)
    return out


def stabilizer_algebra(
    p: SymmetricCubic,
    rtol: float = 1e-9,
    groups: list[FiniteGroup] | None = None,
    group_tol: float = 1e-9,
) -> StabilizerReport:
    """Kernel of X -> X.P over so(4), from the 64x6 matrix of algebra_act."""
    h = p.tensor()
    basis = skew_basis()
    mat = np.stack([algebra_act_tensor(e, h).reshape(64) for e in basis], axis=1)
    _, sv, vt = np.linalg.svd(mat)
    smax = float(sv[0]) if sv.size else 0.0
    if smax == 0.0:
        kernel = np.eye(6)
    else:
        kernel = vt[sv < rtol * smax].T
    algebra = [sum(kernel[a, n] * basis[a] for a in range(6)) for n in range(kernel.shape[1])]
    checked = {}
    for g in groups or []:
        checked[g.display_label] = max(group_residuals(p, g.elements), default=0.0) < group_tol
    return StabilizerReport(len(algebra), algebra, checked, [float(s) for s in sv])


# -- orbit recognition ---------------------------------------------------------

ORBIT_LABELS = ("SO(4)", "SO(3)", "O(2)-speed-(1,2)", "SO(2)⋉S3", "O(2)-reducible", "SO(2)")


def _fixes(p: SymmetricCubic, mat: np.ndarray, tol: float) -> bool:
    return group_residuals(p, [mat])[0] < tol


def _plane_rotation(u: np.ndarray, v: np.ndarray, angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return (
        np.eye(4)
        + (c - 1.0) * (np.outer(u, u) + np.outer(v, v))
        + s * (np.outer(v, u) - np.outer(u, v))
    )


def _reflection_axes(p: SymmetricCubic, k1: np.ndarray, k2: np.ndarray) -> list[float]:
    """Candidate reflection axes from the harmonics of P on the kernel plane."""
    phis = np.arange(8) * (2 * np.pi / 8)
    samples = p.evaluate(np.outer(np.cos(phis), k1) + np.outer(np.sin(phis), k2))
    spectrum = np.fft.rfft(samples)
    axes = []
    if abs(spectrum[1]) > 1e-12:
        phi1 = -np.angle(spectrum[1])
        axes += [phi1, phi1 + np.pi / 2]
    if abs(spectrum[3]) > 1e-12:
        phi3 = -np.angle(spectrum[3])
        axes += [(phi3 + k * np.pi) / 3 for k in range(3)]
    return axes or [0.0]


def classify_continuous_orbit(p: SymmetricCubic, rtol: float = 1e-9, check_tol: float = 1e-9) -> str:
    """Name of the continuous stabilizer of P.

    One of SO(4) (P = 0), SO(3), O(2)-speed-(1,2), SO(2)⋉S3, O(2)-reducible,
    SO(2). A one-dimensional stabilizer is put in torus form to read its
    rotation speeds p <= q; for p = 0 the discrete extensions decide.

    Raises:
        ClassificationError: If the stabilizer is discrete, of dimension
            2, 4 or 5, or its speeds match no case
    """
    report = stabilizer_algebra(p, rtol)
    dim = report.algebra_dim
    if dim == 6:
        return "SO(4)"
    if dim == 3:
        return "SO(3)"
    if dim != 1:
        raise ClassificationError(
            f"not on a continuous-stabilizer orbit (stabilizer algebra dim {dim})"
        )
    x = report.algebra_basis[0]
    evals, evecs = np.linalg.eigh(-x @ x)
    speeds = np.sqrt(np.clip(evals, 0.0, None))
    p_speed = 0.5 * (speeds[0] + speeds[1])
    q_speed = 0.5 * (speeds[2] + speeds[3])
    if q_speed <= 0 or abs(speeds[0] - speeds[1]) > 1e-6 * q_speed or abs(speeds[2] - speeds[3]) > 1e-6 * q_speed:
        raise ClassificationError("not on a continuous-stabilizer orbit (inconsistent speeds)")
    ratio = p_speed / q_speed
    if abs(ratio - 0.5) < 1e-6:
        return "O(2)-speed-(1,2)"
    if ratio > 1e-6:
        raise ClassificationError(f"not on a continuous-stabilizer orbit (speed ratio {ratio:.6g})")

    k1, k2 = evecs[:, 0], evecs[:, 1]
    w2 = evecs[:, 3]
    if _fixes(p, _plane_rotation(k1, k2, 2 * np.pi / 3), check_tol):
        return "SO(2)⋉S3"
    flip_w = np.eye(4) - 2.0 * np.outer(w2, w2)
    for psi in _reflection_axes(p, k1, k2):
        n = -math.sin(psi) * k1 + math.cos(psi) * k2
        reflection = (np.eye(4) - 2.0 * np.outer(n, n)) @ flip_w
        if _fixes(p, reflection, check_tol):
            return "O(2)-reducible"
    return "SO(2)"


# -- discrete families (*) and (**) --------------------------------------------


def plane_map_matrix(alpha1: float, alpha2: float, conj1: bool = False, conj2: bool = False) -> np.ndarray:
    """Matrix A with (A.P)(z) = P(e^{i a1} z1', e^{i a2} z2'), z' = z or conj(z).

    z1 = x1 + i x2, z2 = x3 + i x4.
    """
    m = np.zeros((4, 4))
    for block, (alpha, conj) in enumerate(((alpha1, conj1), (alpha2, conj2))):
        c, s = math.cos(alpha), math.sin(alpha)
        sub = np.array([[c, s], [s, -c]]) if conj else np.array([[c, -s], [s, c]])
        m[2 * block:2 * block + 2, 2 * block:2 * block + 2] = sub
    return m.T


def torus_rotation(r: float, s: float) -> np.ndarray:
    return plane_map_matrix(2 * math.pi * r, 2 * math.pi * s)


def star_cubic(r, s, u, v) -> HarmonicCubic:
    """r Re z1^3 + s x3(|z2|^2 - 2|z1|^2) + u(x3^3 - 3x3x4^2) + v(x4^3 - 3x3^2x4)."""
    x1, x2, x3, x4 = sp.symbols("x1:5")
    expr = (
        sp.sympify(r) * (x1**3 - 3 * x1 * x2**2)
        + sp.sympify(s) * x3 * (x3**2 + x4**2 - 2 * x1**2 - 2 * x2**2)
        + sp.sympify(u) * (x3**3 - 3 * x3 * x4**2)
        + sp.sympify(v) * (x4**3 - 3 * x3**2 * x4)
    )
    return harmonic_project(SymmetricCubic.from_expr(expr).to_float())


def doublestar_cubic(r, s, u, v) -> HarmonicCubic:
    """u Re z1^3 + v Im z1^3 + r Re(z1^2 z2) + s Re(z1 z2^2)."""
    x1, x2, x3, x4 = sp.symbols("x1:5")
    expr = (
        sp.sympify(u) * (x1**3 - 3 * x1 * x2**2)
        + sp.sympify(v) * (3 * x1**2 * x2 - x2**3)
        + sp.sympify(r) * ((x1**2 - x2**2) * x3 - 2 * x1 * x2 * x4)
        + sp.sympify(s) * (x1 * (x3**2 - x4**2) - 2 * x2 * x3 * x4)
    )
    return harmonic_project(SymmetricCubic.from_expr(expr).to_float())


@dataclass
class LemmaVerdict:
    """Predicted stabilizer label of a (*) or (**) cubic, checked element by element"""

    family: str
    label: str
    condition: str
    verified: bool
    group_order: int | None
    residuals: dict[str, float] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "label": self.label,
            "condition": self.condition,
            "verified": self.verified,
            "group_order": self.group_order,
            "residuals": dict(self.residuals),
        }


def _flip_angle(c: complex) -> float:
    """alpha with Re(c w^3) invariant under w -> e^{i alpha} conj(w)."""
    return -2.0 * math.atan2(c.imag, c.real) / 3.0


def _zero(x: float, tol: float) -> bool:
    return abs(x) < tol


def _order18(c1: complex, c2: complex) -> list[np.ndarray]:
    a1, a2 = _flip_angle(c1), _flip_angle(c2)
    out = []
    for k1 in range(3):
        for k2 in range(3):
            out.append(plane_map_matrix(2 * math.pi * k1 / 3, 2 * math.pi * k2 / 3))
            out.append(plane_map_matrix(a1 + 2 * math.pi * k1 / 3, a2 + 2 * math.pi * k2 / 3, True, True))
    return out


def check_lemma_stabilizers(family: str, params: dict, tol: float = 1e-9) -> LemmaVerdict:
    """Label the stabilizer of a (*) or (**) cubic and verify it with explicit elements.

    (*)  r Re z1^3 + s x3(|z2|^2 - 2|z1|^2) + u Re z2^3 - v Im z2^3:
         continuous if r = 0 or s = u = v = 0; order-18 if s = 0; D3 if v = 0;
         Z3 otherwise.
    (**) u Re z1^3 + v Im z1^3 + r Re(z1^2 z2) + s Re(z1 z2^2):
         continuous if r = s = 0, u = v = r = 0 or u = v = s = 0; D6 if r = 0;
         D3 if s = 0; Z3 otherwise.

    Raises:
        ValidationError: On an unknown family or missing parameter
    """
    try:
        r, s, u, v = (float(params[k]) for k in ("r", "s", "u", "v"))
    except KeyError as e:
        raise ValidationError(f"lemma family needs parameter {e}") from None
    except (TypeError, ValueError) as e:
        raise ValidationError(f"lemma parameters must be real numbers: {e}") from None
    eps = 1e-12
    family = {"*": "star", "**": "doublestar"}.get(family, family)

    if family == "star":
        cubic = star_cubic(r, s, u, v)
        flip = plane_map_matrix(0.0, 0.0, True, True)
        g = torus_rotation(2 / 3, 0)
        if _zero(r, eps) or (_zero(s, eps) and _zero(u, eps) and _zero(v, eps)):
            label, condition = "continuous", "r=0" if _zero(r, eps) else "s=u=v=0"
            gens: list[np.ndarray] = []
            extra = {}
        elif _zero(s, eps):
            label, condition = "order-18", "s=0"
            gens = _order18(complex(r, 0.0), complex(u, v))
            extra = {}
        elif _zero(v, eps):
            label, condition = "D3", "v=0"
            gens = [g, flip]
            extra = {}
        else:
            label, condition = "Z3", "generic"
            gens = [g]
            extra = {"excluded-flip": group_residuals(cubic, [flip])[0]}
    elif family == "doublestar":
        cubic = doublestar_cubic(r, s, u, v)
        c = complex(u, -v)
        uv_zero = _zero(u, eps) and _zero(v, eps)
        if (_zero(r, eps) and _zero(s, eps)) or (uv_zero and (_zero(r, eps) or _zero(s, eps))):
            label, extra = "continuous", {}
            condition = "r=s=0" if _zero(r, eps) and _zero(s, eps) else ("u=v=r=0" if _zero(r, eps) else "u=v=s=0")
            gens = []
        elif _zero(r, eps):
            alpha = _flip_angle(c)
            label, condition = "D6", "r=0"
            gens = [torus_rotation(2 / 3, 1 / 6), plane_map_matrix(alpha, -alpha / 2, True, True)]
            extra = {}
        elif _zero(s, eps):
            alpha = _flip_angle(c)
            label, condition = "D3", "s=0"
            gens = [torus_rotation(1 / 3, 1 / 3), plane_map_matrix(alpha, -2 * alpha, True, True)]
            extra = {}
        else:
            label, condition = "Z3", "generic"
            gens = [torus_rotation(1 / 3, 1 / 3)]
            extra = {}
    else:
        raise ValidationError(f"Unknown lemma family '{family}' (expected star or doublestar)")

    residuals = {f"g{n}": res for n, res in enumerate(group_residuals(cubic, gens))}
    residuals.update(extra)
    verified = all(res < tol for key, res in residuals.items() if key.startswith("g"))
    if label == "continuous":
        verified = stabilizer_algebra(cubic).algebra_dim >= 1
        order = None
    else:
        order = len(closure([SO4Matrix.from_numpy(m) for m in gens]))
    return LemmaVerdict(family, label, condition, verified, order, residuals)
