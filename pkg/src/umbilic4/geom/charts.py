"""Parameterized special Lagrangian 4-folds in C^4 = R^8

Points of R^8 are ordered (x1, x2, x3, x4, y1, y2, y3, y4) with z_k = x_k + i y_k.
Each family is written once as sympy expressions in the chart parameters
u1..u4; the map and its Jacobian are lambdified to numpy.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.optimize
import sympy as sp

from ..errors import DomainError, ValidationError
from ..utils import is_finite_array, rng_for

U = sp.symbols("u1:5", real=True)
W = sp.Symbol("w")
_A, _B = sp.symbols("a b", real=True)

FAMILIES = (
    "flat-plane",
    "control-plane",
    "harvey-lawson",
    "hl-torus",
    "octahedral-cone",
    "asympt-conical",
    "product-r2",
    "product-curves",
)

SAMPLE_MARGIN = 0.05


@dataclass(frozen=True, eq=False)
class ImmersionChart:
    """A map from a parameter box into R^8 with its Jacobian.

    `frame_kind` names the adapted frame of the family: "theta" (first
    parameter direction), "torus" (orbit normal plus Klein-four orbit
    directions) or "" (plain QR frame).
    """

    label: str
    params: dict
    lo: np.ndarray
    hi: np.ndarray
    phase: float
    frame_kind: str
    _map: Callable = field(repr=False)
    _jac: Callable = field(repr=False)
    jacobian_mode: str = "analytic"
    fd_h: float = 1e-5
    transform: np.ndarray = field(default_factory=lambda: np.eye(8))
    offset: np.ndarray = field(default_factory=lambda: np.zeros(8))

    def contains(self, u) -> bool:
        u = np.asarray(u, dtype=float)
        return bool(np.all(u >= self.lo) and np.all(u <= self.hi))

    def _check(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.shape != (4,):
            raise ValidationError(f"{self.label} needs 4 parameters, got shape {u.shape}")
        if not self.contains(u):
            raise DomainError(f"{u.tolist()} lies outside the {self.label} domain {self.lo.tolist()}..{self.hi.tolist()}")
        return u

    def raw_point(self, u) -> np.ndarray:
        x = np.asarray(self._map(np.asarray(u, dtype=float)), dtype=float).reshape(8)
        return self.transform @ x + self.offset

    def raw_jacobian(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if self.jacobian_mode == "fd":
            cols = []
            for j in range(4):
                e = np.zeros(4)
                e[j] = self.fd_h
                cols.append((self.raw_point(u + e) - self.raw_point(u - e)) / (2 * self.fd_h))
            return np.stack(cols, axis=1)
        jac = np.asarray(self._jac(u), dtype=float).reshape(8, 4)
        return self.transform @ jac

    def point(self, u) -> np.ndarray:
        return self.raw_point(self._check(u))

    def jacobian(self, u) -> np.ndarray:
        return self.raw_jacobian(self._check(u))

    def with_fd_jacobian(self, h: float = 1e-5) -> ImmersionChart:
        return replace(self, jacobian_mode="fd", fd_h=h)

    def moved(self, unitary: np.ndarray, b=None) -> ImmersionChart:
        """The chart followed by z -> U z + b, U in SU(4).

        Raises:
            ValidationError: If U is not special unitary
        """
        unitary = np.asarray(unitary, dtype=complex)
        if unitary.shape != (4, 4) or np.max(np.abs(unitary.conj().T @ unitary - np.eye(4))) > 1e-10:
            raise ValidationError("rigid motion needs a unitary 4x4 matrix")
        if abs(np.linalg.det(unitary) - 1.0) > 1e-10:
            raise ValidationError("rigid motion needs determinant 1")
        real = np.block([[unitary.real, -unitary.imag], [unitary.imag, unitary.real]])
        shift = np.zeros(8) if b is None else np.concatenate([np.real(b), np.imag(b)])
        return replace(self, transform=real @ self.transform, offset=real @ self.offset + shift)

    def sample_points(self, n: int, seed: int = 0) -> np.ndarray:
        """n deterministic interior points, away from the box faces."""
        rng = rng_for(seed, len(self.label))
        span = self.hi - self.lo
        lo = self.lo + SAMPLE_MARGIN * span
        return lo + rng.random((n, 4)) * (1 - 2 * SAMPLE_MARGIN) * span

    def center(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    def describe(self) -> dict:
        return {
            "family": self.label,
            "params": {k: (v if isinstance(v, (int, float, str)) else str(v)) for k, v in self.params.items()},
            "domain": [self.lo.tolist(), self.hi.tolist()],
            "phase": self.phase,
            "jacobian": self.jacobian_mode,
        }


def _compile(label, params, exprs, lo, hi, phase=0.0, frame_kind="") -> ImmersionChart:
    vec = sp.Matrix(exprs)
    jac = vec.jacobian(sp.Matrix(U))
    f = sp.lambdify([U], vec, "numpy")
    j = sp.lambdify([U], jac, "numpy")

    def as_map(u):
        return np.array(f(u), dtype=float).reshape(8)

    def as_jac(u):
        out = np.array(j(u), dtype=float).reshape(8, 4)
        if not is_finite_array(out):
            raise DomainError(f"{label} Jacobian is not finite at {list(u)}")
        return out

    return ImmersionChart(label, dict(params), np.asarray(lo, float), np.asarray(hi, float), phase, frame_kind, as_map, as_jac)


def _torus_point(radii, angles) -> list:
    """z_k = r_k e^{i a_k} as [x1..x4, y1..y4]."""
    return [r * sp.cos(a) for r, a in zip(radii, angles)] + [r * sp.sin(a) for r, a in zip(radii, angles)]


def _holomorphic(text: str, name: str):
    """Parse f(w); returns (Re, Im) of f(a - i b) in the real symbols a, b."""
    try:
        f = sp.sympify(text, locals={"w": W})
    except (sp.SympifyError, TypeError) as e:
        raise ValidationError(f"{name} must be an expression in w, got {text!r}") from e
    extra = f.free_symbols - {W}
    if extra:
        raise ValidationError(f"{name} may only use the variable w, found {sorted(map(str, extra))}")
    return sp.expand_complex(f.subs(W, _A - sp.I * _B)).as_real_imag()


def _graph_curve(text: str, name: str, a, b) -> tuple:
    """Curve v = f(u) with u = x1 - i x2, v = y1 + i y2 in one C^2 factor."""
    re, im = _holomorphic(text, name)
    return a, b, re.subs({_A: a, _B: b}), im.subs({_A: a, _B: b})


def _float_param(params: dict, key: str, default=None) -> float:
    if key not in params:
        if default is None:
            raise ValidationError(f"missing parameter '{key}'")
        return default
    try:
        return float(params[key])
    except (TypeError, ValueError):
        raise ValidationError(f"parameter '{key}' must be a number, got {params[key]!r}") from None


def _theta_margin(params: dict) -> float:
    m = _float_param(params, "theta_margin", 1e-2)
    if not 0 < m < math.pi / 8:
        raise DomainError(f"theta_margin must lie in (0, pi/8), got {m}")
    return m


def _flat_plane(params):
    exprs = [U[0], U[1], U[2], U[3], 0, 0, 0, 0]
    return _compile("flat-plane", params, exprs, [-1] * 4, [1] * 4)


def _control_plane(params):
    """span(dx1, dy2, dx3, dy4): Lagrangian for I, not J-complex."""
    exprs = [U[0], 0, U[2], 0, 0, U[1], 0, U[3]]
    return _compile("control-plane", params, exprs, [-1] * 4, [1] * 4)


def _sphere_point():
    y2 = U[1] ** 2 + U[2] ** 2 + U[3] ** 2
    d = 1 + y2
    return [(1 - y2) / d, 2 * U[1] / d, 2 * U[2] / d, 2 * U[3] / d]


def _harvey_lawson(params):
    """{lambda x : x in S^3, Im lambda^4 = c}, lambda = rho(theta) e^{i(theta + sign(c) pi/8)}."""
    c = _float_param(params, "c", 1.0)
    x = _sphere_point()
    if c == 0:
        exprs = [U[0] * xi for xi in x] + [0] * 4
        return _compile("harvey-lawson", {"c": c}, exprs, [0.5, -0.5, -0.5, -0.5], [1.5, 0.5, 0.5, 0.5], frame_kind="theta")
    m = _theta_margin(params)
    theta = U[0]
    rho = (abs(sp.nsimplify(c)) / sp.cos(4 * theta)) ** sp.Rational(1, 4)
    phi = theta + sp.sign(c) * sp.pi / 8
    exprs = [rho * sp.cos(phi) * xi for xi in x] + [rho * sp.sin(phi) * xi for xi in x]
    lo = [-math.pi / 8 + m, -0.5, -0.5, -0.5]
    hi = [math.pi / 8 - m, 0.5, 0.5, 0.5]
    return _compile("harvey-lawson", {"c": c, "theta_margin": m}, exprs, lo, hi, frame_kind="theta")


def _hl_torus(params):
    """|z0|^2 - |zk|^2 = c, Re(z0 z1 z2 z3) = a; parameters (rho, theta1..3)."""
    a = _float_param(params, "a", 2 ** 0.2)
    c = _float_param(params, "c", 0.0)
    floor = math.sqrt(max(-c, 0.0)) + 1e-9

    def reach(rho):
        return rho**3 * math.sqrt(c + rho * rho) - abs(a) / 0.9

    rho_min = floor + 0.1 if a == 0 else scipy.optimize.brentq(reach, floor, floor + 10 + abs(a))
    lo = [rho_min, -0.5, -0.5, -0.5]
    hi = [rho_min + 0.5, 0.5, 0.5, 0.5]
    rho = U[0]
    r0 = sp.sqrt(sp.nsimplify(c) + rho**2)
    theta0 = sp.acos(sp.nsimplify(a) / (rho**3 * r0)) - U[1] - U[2] - U[3]
    exprs = _torus_point([r0, rho, rho, rho], [theta0, U[1], U[2], U[3]])
    return _compile("hl-torus", {"a": a, "c": c}, exprs, lo, hi, frame_kind="torus")


def _octahedral_cone(params):
    """Cone over T+: |zk| = rho/2, theta0 + ... + theta3 = pi/2."""
    rho = U[0]
    theta0 = sp.pi / 2 - U[1] - U[2] - U[3]
    exprs = _torus_point([rho / 2] * 4, [theta0, U[1], U[2], U[3]])
    lo, hi = [0.5, -0.5, -0.5, -0.5], [1.5, 0.5, 0.5, 0.5]
    phase = _float_param(params, "phase", 0.0)
    return _compile("octahedral-cone", {"phase": phase}, exprs, lo, hi, phase, "torus")


def _asympt_conical(params):
    """{lambda u : u in T+, Re lambda^4 = c}, lambda = (c / cos 4phi)^(1/4) e^{i phi}."""
    c = _float_param(params, "c", 1.0)
    if c <= 0:
        raise DomainError(f"asympt-conical needs c > 0, got {c}")
    m = _theta_margin(params)
    phi = U[0]
    rho = (sp.nsimplify(c) / sp.cos(4 * phi)) ** sp.Rational(1, 4)
    theta0 = sp.pi / 2 - U[1] - U[2] - U[3]
    exprs = _torus_point([rho / 2] * 4, [phi + t for t in (theta0, U[1], U[2], U[3])])
    lo = [-math.pi / 8 + m, -0.5, -0.5, -0.5]
    hi = [math.pi / 8 - m, 0.5, 0.5, 0.5]
    return _compile("asympt-conical", {"c": c, "theta_margin": m}, exprs, lo, hi, math.pi / 2, "torus")


def _product_r2(params):
    """Sigma x R^2 with Sigma the graph y1 + i y2 = f(x1 - i x2)."""
    f = str(params.get("f", "w**2"))
    x1, x2, y1, y2 = _graph_curve(f, "f", U[0], U[1])
    exprs = [x1, x2, U[2], U[3], y1, y2, 0, 0]
    return _compile("product-r2", {"f": f}, exprs, [0.2, -0.3, -1, -1], [0.8, 0.3, 1, 1])


def _product_curves(params):
    """Product of two curves v = f(u) in (z1, z2) and v = g(u) in (z3, z4)."""
    f = str(params.get("f", "w**2"))
    g = str(params.get("g", "w**3"))
    x1, x2, y1, y2 = _graph_curve(f, "f", U[0], U[1])
    x3, x4, y3, y4 = _graph_curve(g, "g", U[2], U[3])
    exprs = [x1, x2, x3, x4, y1, y2, y3, y4]
    return _compile("product-curves", {"f": f, "g": g}, exprs, [0.2, -0.3, 0.2, -0.3], [0.8, 0.3, 0.8, 0.3])


_BUILDERS = {
    "flat-plane": _flat_plane,
    "control-plane": _control_plane,
    "harvey-lawson": _harvey_lawson,
    "hl-torus": _hl_torus,
    "octahedral-cone": _octahedral_cone,
    "asympt-conical": _asympt_conical,
    "product-r2": _product_r2,
    "product-curves": _product_curves,
}

_ALLOWED = {
    "flat-plane": set(),
    "control-plane": set(),
    "harvey-lawson": {"c", "theta_margin"},
    "hl-torus": {"a", "c"},
    "octahedral-cone": {"phase"},
    "asympt-conical": {"c", "theta_margin"},
    "product-r2": {"f"},
    "product-curves": {"f", "g"},
}


def make_family(label: str, params: dict | None = None) -> ImmersionChart:
    """Chart of a named family.

    Raises:
        ValidationError: On an unknown family or parameter
        DomainError: If the parameters leave the family's domain
    """
    if label not in _BUILDERS:
        raise ValidationError(f"Unknown family '{label}' (expected one of {', '.join(FAMILIES)})")
    params = dict(params or {})
    unknown = sorted(set(params) - _ALLOWED[label])
    if unknown:
        raise ValidationError(f"Unknown parameter(s) for {label}: {', '.join(unknown)}")
    return _BUILDERS[label](params)


def random_special_unitary(rng: np.random.Generator) -> np.ndarray:
    """Haar-random U(4) element rescaled to determinant 1."""
    z = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    q, r = np.linalg.qr(z)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    return q / np.linalg.det(q) ** 0.25
