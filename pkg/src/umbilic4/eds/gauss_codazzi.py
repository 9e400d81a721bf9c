"""Numerical Gauss and Codazzi residuals of a coframe / cubic pair

A pair is given in coordinates x on a box: the coframe w_i = W_il dx_l and
the cubic h_ijk in that coframe. The Levi-Civita form alpha is solved from
dw_i = -alpha_ij ^ w_j, beta_ij = h_ijk w_k, and the residuals

    G = d alpha + alpha ^ alpha - beta ^ beta
    C = d beta + beta ^ alpha + alpha ^ beta

are evaluated on the dual frame by central differences.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np
import sympy as sp

from ..errors import FrameError, ValidationError
from ..utils import is_finite_array

COFRAME_RANK_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class CoframePair:
    """Coframe W(x) (4x4), cubic h(x) (4x4x4) and optionally dW(x) [i, l, m] = d_m W_il"""

    label: str
    coframe: Callable[[np.ndarray], np.ndarray]
    cubic: Callable[[np.ndarray], np.ndarray]
    coframe_jacobian: Callable[[np.ndarray], np.ndarray] | None = None

    def rotated(self, rotation: np.ndarray) -> CoframePair:
        """The pair in the coframe R w, with the cubic transformed to match."""
        rot = np.asarray(rotation, dtype=float)
        jac = self.coframe_jacobian
        return CoframePair(
            f"{self.label}-rotated",
            lambda x: rot @ self.coframe(x),
            lambda x: np.einsum("ai,bj,ck,ijk->abc", rot, rot, rot, self.cubic(x)),
            (lambda x: np.einsum("ai,ilm->alm", rot, jac(x))) if jac is not None else None,
        )

    def scaled(self, factor: float) -> CoframePair:
        return CoframePair(
            f"{self.label}-x{factor:g}",
            self.coframe,
            lambda x: factor * self.cubic(x),
            self.coframe_jacobian,
        )


def flat_pair() -> CoframePair:
    """Euclidean coframe dx with zero cubic."""
    return CoframePair(
        "flat",
        lambda x: np.eye(4),
        lambda x: np.zeros((4, 4, 4)),
        lambda x: np.zeros((4, 4, 4)),
    )


def so3_pair(c: float = 1.0, scale: float = 1.0) -> CoframePair:
    """Metric and cubic of the SO(3)-invariant family in coordinates (theta, y1, y2, y3).

    With K = cos(4 theta)^(5/4):
        w1 = d theta / (c K),  w_(a+1) = 2 cos(4 theta)^(-1/4) dy_a / (c (1 + |y|^2)),
        h111 = -3 c K,  h_1aa = c K,
    so that g = (d theta^2 + cos^2(4 theta) d sigma^2) / (c^2 cos^(5/2)(4 theta))
    with d sigma^2 the round S^3 metric in a stereographic chart. `scale`
    multiplies the cubic (scale != 1 breaks the Gauss equation).

    Raises:
        ValidationError: If c <= 0
    """
    if not c > 0:
        raise ValidationError("so3_pair needs c > 0")
    theta, y1, y2, y3 = coords = sp.symbols("theta y1 y2 y3", real=True)
    cos4 = sp.cos(4 * theta)
    conf = 2 * cos4 ** sp.Rational(-1, 4) / (c * (1 + y1**2 + y2**2 + y3**2))
    w = sp.diag(1 / (c * cos4 ** sp.Rational(5, 4)), conf, conf, conf)
    jac = sp.MutableDenseNDimArray.zeros(4, 4, 4)
    for i, l, m in itertools.product(range(4), repeat=3):
        jac[i, l, m] = sp.diff(w[i, l], coords[m])
    w_fn = sp.lambdify([coords], w, "numpy")
    jac_fn = sp.lambdify([coords], jac.tolist(), "numpy")
    k_fn = sp.lambdify([coords], c * cos4 ** sp.Rational(5, 4), "numpy")

    def cubic(x):
        k = float(k_fn(x)) * scale
        h = np.zeros((4, 4, 4))
        h[0, 0, 0] = -3 * k
        for a in range(1, 4):
            h[0, a, a] = h[a, 0, a] = h[a, a, 0] = k
        return h

    return CoframePair(
        f"so3(c={c:g})" if scale == 1 else f"so3(c={c:g})-x{scale:g}",
        lambda x: np.array(w_fn(x), dtype=float),
        cubic,
        lambda x: np.array(jac_fn(x), dtype=float),
    )


def box_grid(lo, hi, n: int) -> np.ndarray:
    """n^4 points of the box [lo, hi] (n = 1 gives the center)."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if lo.shape != (4,) or hi.shape != (4,) or np.any(hi < lo):
        raise ValidationError("box_grid needs 4-vectors with lo <= hi")
    if n < 1:
        raise ValidationError("grid size must be >= 1")
    axes = [np.linspace(a, b, n) if n > 1 else np.array([(a + b) / 2]) for a, b in zip(lo, hi)]
    return np.array(list(itertools.product(*axes)))


SO3_BOX = (np.array([-0.1, -0.3, -0.3, -0.3]), np.array([0.1, 0.3, 0.3, 0.3]))


def _coframe_jacobian(pair: CoframePair, x: np.ndarray, h: float) -> np.ndarray:
    if pair.coframe_jacobian is not None:
        return pair.coframe_jacobian(x)
    out = np.zeros((4, 4, 4))
    for m in range(4):
        e = np.zeros(4)
        e[m] = h
        out[:, :, m] = (pair.coframe(x + e) - pair.coframe(x - e)) / (2 * h)
    return out


def connection_forms(pair: CoframePair, x: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Coordinate components A[i, j, l], B[i, j, l] of alpha_ij and beta_ij at x.

    Raises:
        FrameError: If the coframe is singular or not finite at x
    """
    w = pair.coframe(x)
    if not is_finite_array(w):
        raise FrameError(f"{pair.label}: coframe is not finite at {x.tolist()}")
    sv = np.linalg.svd(w, compute_uv=False)
    if sv[0] == 0 or sv[-1] / sv[0] < COFRAME_RANK_TOL:
        raise FrameError(f"{pair.label}: coframe is degenerate at {x.tolist()}")
    e = np.linalg.inv(w)
    dw = _coframe_jacobian(pair, x, h)
    # dw_i(d_l, d_m) = d_l W_im - d_m W_il
    dw_coord = np.transpose(dw, (0, 2, 1)) - dw
    t = np.einsum("ilm,lp,mq->ipq", dw_coord, e, e)
    # a_ijk = (T_ijk + T_jki - T_kij) / 2
    a = 0.5 * (t + np.transpose(t, (2, 0, 1)) - np.transpose(t, (1, 2, 0)))
    return np.einsum("ijk,kl->ijl", a, w), np.einsum("ijk,kl->ijl", pair.cubic(x), w)


def _wedge(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """(P ^ Q)_ij = sum_k P_ik ^ Q_kj on coordinate 1-forms, as [i, j, l, m]."""
    pq = np.einsum("ikl,kjm->ijlm", p, q)
    return pq - np.transpose(pq, (0, 1, 3, 2))


def _exterior_derivative(field_at: Callable[[np.ndarray], np.ndarray], x: np.ndarray, h: float) -> np.ndarray:
    """d of a matrix of 1-forms [i, j, l] by central differences, as [i, j, l, m]."""
    grad = np.zeros((4, 4, 4, 4))
    for m in range(4):
        e = np.zeros(4)
        e[m] = h
        grad[..., m] = (field_at(x + e) - field_at(x - e)) / (2 * h)
    # (dF)_lm = d_l F_m - d_m F_l
    return np.transpose(grad, (0, 1, 3, 2)) - grad


@dataclass(frozen=True)
class GaussCodazziResult:
    pair: str
    h: float
    points: int
    gauss: float
    codazzi: float

    @property
    def residual(self) -> float:
        return max(self.gauss, self.codazzi)

    def to_json(self) -> dict:
        return {
            "pair": self.pair,
            "h": self.h,
            "points": self.points,
            "gauss": self.gauss,
            "codazzi": self.codazzi,
        }


def gauss_codazzi_residual(pair: CoframePair, grid: np.ndarray, h: float = 1e-3) -> GaussCodazziResult:
    """Max over the grid of the Frobenius norms of G and C on the dual frame.

    Raises:
        ValidationError: On a non-positive h or an empty grid
        FrameError: If the coframe degenerates at a grid point
    """
    if not h > 0:
        raise ValidationError("h must be positive")
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    if grid.size == 0 or grid.shape[1] != 4:
        raise ValidationError("grid must be a non-empty array of 4-vectors")

    gauss = codazzi = 0.0
    for x in grid:
        alpha, beta = connection_forms(pair, x, h)
        d_alpha = _exterior_derivative(lambda y: connection_forms(pair, y, h)[0], x, h)
        d_beta = _exterior_derivative(lambda y: connection_forms(pair, y, h)[1], x, h)
        g2 = d_alpha + _wedge(alpha, alpha) - _wedge(beta, beta)
        c2 = d_beta + _wedge(beta, alpha) + _wedge(alpha, beta)
        e = np.linalg.inv(pair.coframe(x))
        g_frame = np.einsum("ijlm,lp,mq->ijpq", g2, e, e)
        c_frame = np.einsum("ijlm,lp,mq->ijpq", c2, e, e)
        gauss = max(gauss, float(np.sqrt(np.sum(g_frame**2))))
        codazzi = max(codazzi, float(np.sqrt(np.sum(c_frame**2))))
    return GaussCodazziResult(pair.label, h, len(grid), gauss, codazzi)


def residual_order(pair: CoframePair, grid: np.ndarray, hs=(2e-3, 1e-3)) -> dict:
    """Observed order of the residual under the given step refinement."""
    values = [gauss_codazzi_residual(pair, grid, h).residual for h in hs]
    orders = [
        float(np.log(v1 / v2) / np.log(h1 / h2)) if v1 > 0 and v2 > 0 else float("nan")
        for h1, h2, v1, v2 in zip(hs, hs[1:], values, values[1:])
    ]
    return {"h": list(hs), "residuals": values, "orders": orders, "order": orders[-1]}
