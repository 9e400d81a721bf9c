"""Acceptance battery: every module check against the configured tolerances"""

from __future__ import annotations

import math
import time
from collections.abc import Callable
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from .config import RunConfig
from .cubics import (
    INDEX,
    SymmetricCubic,
    fixed_subspace,
    from_coordinates,
    stabilizer_algebra,
)
from .eds import (
    SO3_BOX,
    box_grid,
    cartan_characters,
    conserved_report,
    flat_pair,
    flow,
    gauss_codazzi_residual,
    get_system,
    integrator_order,
    load_tableau,
    mixed_partial_check,
    octa_exact,
    residual_order,
    so3_pair,
    unit_path,
)
from .eds.tableau import SHIPPED
from .errors import ValidationError
from .field import AlgebraicScalar
from .geom import (
    adapted_frame,
    align,
    convergence_order,
    fundamental_cubic,
    hl_invariants,
    hyperkahler_check,
    make_family,
    sl_residual,
    symmetry_check,
)
from .quat4 import ADVERTISED_ORDERS, build_so4_subgroup, group_closure_order, minus_identity
from .torus import TorusElement, enumerate_small_orders, fixed_cubic_basis, kernel_dim
from .utils import logger, rng_for

MODULES = ("groups", "cubics", "torus", "geom", "eds", "hyperkahler")

FIXED_DIMS = {"T": 2, "O": 1, "O+": 1, "I": 1, "I+": 1}

# the six continuous-stabilizer normal forms and their stabilizer dimensions
CANONICAL_CUBICS = (
    ("0", 6),
    ("x1*(x1**2 - x2**2 - x3**2 - x4**2)", 3),
    ("(x1**2 - x2**2)*x3 + 2*x1*x2*x4", 1),
    ("x1**3 - 3*x1*x2**2", 1),
    ("x1**3 - 3*x1*x2**2 + 3*x1*(x1**2 + x2**2 - 2*x3**2 - 2*x4**2)", 1),
    ("x1**3 - 3*x1*x2**2 + (3*x1**2*x2 - x2**3) + 3*x1*(x1**2 + x2**2 - 2*x3**2 - 2*x4**2)", 1),
)

TORUS_REPRESENTATIVES = (
    ((Fraction(2, 3), Fraction(1, 6)), 4),
    ((Fraction(3, 5), Fraction(1, 5)), 4),
    ((Fraction(1, 2), Fraction(1, 4)), 4),
    ((Fraction(2, 3), Fraction(0)), 6),
    ((Fraction(2, 3), Fraction(1, 3)), 8),
    ((Fraction(1, 2), Fraction(0)), 8),
)

CALIBRATED_FAMILIES = (
    ("harvey-lawson", {"c": 1.0}),
    ("hl-torus", {}),
    ("octahedral-cone", {}),
    ("asympt-conical", {"c": 1.0}),
    ("product-curves", {}),
)

ORDER_WINDOW_2 = (1.5, 2.5)
ORDER_WINDOW_3 = (2.5, 3.5)
ORDER_WINDOW_4 = (3.5, 4.5)

TETRA_INIT = {"r": 0.9**5, "s": 0.9}
O2_INIT = {"r": 0.5, "v": 0.1, "t1": -0.3, "t2": 0.1}
O2_MIXED_INIT = {"r": 2.0, "v": 0.3, "t1": 0.2, "t2": 0.1}
D3_INIT = {"r": 1.0, "s": 1.0, "t1": 0.0, "t2": 0.0, "t3": 0.0, "t4": 0.0, "t5": 0.0}
FLOW_STEP = 1e-3


@dataclass
class CriterionResult:
    """One acceptance check"""

    name: str
    module: str
    passed: bool
    measured: Any
    tolerance: Any
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "module": self.module,
            "passed": self.passed,
            "measured": self.measured,
            "tolerance": self.tolerance,
            "detail": self.detail,
        }

    def row(self) -> dict:
        return {
            "module": self.module,
            "name": self.name,
            "passed": self.passed,
            "measured": self.measured,
            "tolerance": self.tolerance,
        }


Criterion = Callable[[RunConfig], list[CriterionResult]]
CRITERIA: dict[str, list[Criterion]] = {m: [] for m in MODULES}


def criterion(module: str) -> Callable[[Criterion], Criterion]:
    def register(fn: Criterion) -> Criterion:
        CRITERIA[module].append(fn)
        return fn

    return register


def _below(name: str, module: str, measured: float, tolerance: float, **detail) -> CriterionResult:
    return CriterionResult(name, module, bool(measured < tolerance), measured, tolerance, detail)


def _above(name: str, module: str, measured: float, threshold: float, **detail) -> CriterionResult:
    return CriterionResult(name, module, bool(measured > threshold), measured, {"min": threshold}, detail)


def _within(name: str, module: str, measured: float | None, window: tuple[float, float], **detail) -> CriterionResult:
    lo, hi = window
    ok = measured is not None and not math.isnan(measured) and lo <= measured <= hi
    return CriterionResult(name, module, ok, measured, list(window), detail)


def _equal(name: str, module: str, measured, expected, **detail) -> CriterionResult:
    return CriterionResult(name, module, measured == expected, measured, expected, detail)


# -- groups --------------------------------------------------------------------


@criterion("groups")
def group_orders(config: RunConfig) -> list[CriterionResult]:
    out = []
    for label, expected in ADVERTISED_ORDERS.items():
        group = build_so4_subgroup(label, cap=config.closure_cap)
        order = group_closure_order(list(group.generators), config.closure_cap)
        has_minus = group.contains(minus_identity())
        out.append(CriterionResult(
            f"{label} closes exactly at order {expected} without -I",
            "groups",
            group.exact and order == expected == group.order and not has_minus,
            order,
            expected,
            {"exact": group.exact, "contains_minus_identity": has_minus},
        ))
    return out


# -- cubics --------------------------------------------------------------------


def icosahedral_cubic() -> SymmetricCubic:
    """x1(x1^2 - x2^2 - x3^2 - x4^2) + 2 sqrt5 x2 x3 x4, exactly."""
    coeffs: list = [0] * 20
    coeffs[INDEX[(0, 0, 0)]] = 1
    for k in (1, 2, 3):
        coeffs[INDEX[(0, k, k)]] = -1
    coeffs[INDEX[(1, 2, 3)]] = AlgebraicScalar(0, 0, 2, 0)
    return SymmetricCubic(tuple(coeffs))


def exactly_proportional(p: SymmetricCubic, q: SymmetricCubic) -> bool:
    if not (p.is_exact and q.is_exact):
        return False
    pivot = next((n for n, c in enumerate(q.coeffs) if c), None)
    if pivot is None or not p.coeffs[pivot]:
        return False
    return all(a * q.coeffs[pivot] == b * p.coeffs[pivot] for a, b in zip(p.coeffs, q.coeffs))


@criterion("cubics")
def fixed_dimensions(config: RunConfig) -> list[CriterionResult]:
    out = []
    bases = {}
    for label, expected in FIXED_DIMS.items():
        group = build_so4_subgroup(label, cap=config.closure_cap)
        bases[label] = fixed_subspace(list(group.generators), exact=True)
        out.append(_equal(f"{label} fixes a {expected}-dimensional space of cubics", "cubics", len(bases[label]), expected))
    basis = bases["I+"]
    proportional = len(basis) == 1 and exactly_proportional(basis[0], icosahedral_cubic())
    out.append(CriterionResult(
        "I+ fixed cubic is x1(x1^2-x2^2-x3^2-x4^2) + 2 sqrt5 x2x3x4",
        "cubics",
        proportional,
        [str(c) for c in basis[0].coeffs] if basis else None,
        "exact proportionality",
    ))
    return out


@criterion("cubics")
def stabilizer_dimensions(config: RunConfig) -> list[CriterionResult]:
    out = []
    for n, (expr, expected) in enumerate(CANONICAL_CUBICS, start=1):
        cubic = SymmetricCubic.from_expr(expr) if expr != "0" else SymmetricCubic.zero(exact=False)
        dim = stabilizer_algebra(cubic.to_float(), config.kernel_rtol).algebra_dim
        out.append(_equal(f"normal form {n} has a {expected}-dimensional stabilizer", "cubics", dim, expected, cubic=expr))
    dims = [
        stabilizer_algebra(from_coordinates(rng_for(config.seed, n).standard_normal(16)), config.kernel_rtol).algebra_dim
        for n in range(20)
    ]
    out.append(_equal("20 random cubics have discrete stabilizers", "cubics", max(dims), 0, dims=dims))
    return out


# -- torus ---------------------------------------------------------------------


@criterion("torus")
def torus_fixed_dimensions(config: RunConfig) -> list[CriterionResult]:
    out = []
    for (r, s), expected in TORUS_REPRESENTATIVES:
        g = TorusElement(r, s)
        weights = fixed_cubic_basis(g).dim
        kernel = kernel_dim(g, config.kernel_rtol)
        out.append(CriterionResult(
            f"g({r}, {s}) fixes {expected} cubics",
            "torus",
            weights == kernel == expected,
            {"weights": weights, "kernel": kernel},
            expected,
        ))
    return out


@criterion("torus")
def torus_scan(config: RunConfig) -> list[CriterionResult]:
    scan = enumerate_small_orders(config.max_den)
    return [CriterionResult(
        f"no torus element of order > 6 and denominator <= {config.max_den} fixes a larger space",
        "torus",
        scan.max_order <= 6,
        scan.max_order,
        {"max": 6},
        {"classes": len(scan.entries), "points_scanned": scan.points_scanned},
    )]


# -- geom ----------------------------------------------------------------------


def _worst_calibration(chart, points) -> float:
    worst = 0.0
    for u in points:
        res = sl_residual(chart, u)
        worst = max(worst, res.omega, res.im_omega)
    return worst


@criterion("geom")
def calibration(config: RunConfig) -> list[CriterionResult]:
    out = []
    for label, params in CALIBRATED_FAMILIES:
        chart = make_family(label, params)
        points = chart.sample_points(config.samples, config.seed)
        out.append(_below(f"{label} is calibrated", "geom", _worst_calibration(chart, points), config.tol("calibration")))
        fd = chart.with_fd_jacobian(1e-5)
        out.append(_below(f"{label} is calibrated (FD Jacobian)", "geom", _worst_calibration(fd, points), config.tol("calibration_fd")))
    cone = make_family("octahedral-cone")
    wrong = min(sl_residual(cone, u, phase=math.pi / 2).im_omega for u in cone.sample_points(config.samples, config.seed))
    out.append(_above("octahedral-cone is not calibrated at phase pi/2", "geom", wrong, config.tol("phase_negative")))
    return out


def _tetrahedral_residual(label: str, params: dict, config: RunConfig) -> tuple[float, int]:
    chart = make_family(label, params)
    u = chart.center()
    extract = fundamental_cubic(chart, u, config.fd_step)
    h = align(extract, adapted_frame(chart, u))
    group = build_so4_subgroup("T")
    worst = max(symmetry_check(h, group.elements).values())
    dim = stabilizer_algebra(SymmetricCubic.from_tensor(h), config.extract_rtol).algebra_dim
    return worst, dim


@criterion("geom")
def fundamental_cubics(config: RunConfig) -> list[CriterionResult]:
    out = []
    flat = make_family("flat-plane")
    out.append(_below("flat plane has zero cubic", "geom", fundamental_cubic(flat, flat.center(), config.fd_step).norm, config.tol("flat_cubic")))

    hl = make_family("harvey-lawson", {"c": 1.0})
    extract = fundamental_cubic(hl, hl.center(), config.fd_step)
    out.append(_below("harvey-lawson cubic is symmetric", "geom", extract.symmetry_defect, config.tol("cubic_symmetry")))
    out.append(_below("harvey-lawson cubic is traceless", "geom", extract.trace_defect, config.tol("cubic_trace")))
    dim = stabilizer_algebra(extract.harmonic(), config.extract_rtol).algebra_dim
    out.append(_equal("harvey-lawson cubic has SO(3) symmetry", "geom", dim, 3))
    order = convergence_order(hl, hl.center())["order"]
    out.append(_within("cubic extraction converges at second order", "geom", order, ORDER_WINDOW_2))

    for label, params in (("hl-torus", {}), ("asympt-conical", {"c": 1.0})):
        worst, dim = _tetrahedral_residual(label, params, config)
        out.append(_below(f"{label} cubic is T-invariant in the torus frame", "geom", worst, config.tol("tetra_symmetry")))
        out.append(_equal(f"{label} cubic has a discrete stabilizer", "geom", dim, 0))
    return out


@criterion("geom")
def harvey_lawson_invariant(config: RunConfig) -> list[CriterionResult]:
    chart = make_family("harvey-lawson", {"c": 1.0})
    values = [hl_invariants(chart, [theta, 0.0, 0.0, 0.0], config.fd_step).conserved for theta in (-0.2, 0.0, 0.2)]
    spread = (max(values) - min(values)) / abs(values[1])
    return [_below("harvey-lawson r^(8/5) + t^2 r^(-2/5) is constant", "geom", spread, config.tol("hl_invariant"), values=values)]


# -- eds -----------------------------------------------------------------------


def _drift(label: str, init: dict, path: list[dict]) -> dict[str, float]:
    system = get_system(label)
    return conserved_report(system, flow(system, init, path, FLOW_STEP))


@criterion("eds")
def conserved_quantities(config: RunConfig) -> list[CriterionResult]:
    out = []
    cases = (
        ("so3-case", {"r": 1.0, "t": 0.0}, unit_path(), "drift_so3"),
        ("d3-conical", D3_INIT, [{"dir": a, "length": 0.25} for a in (1, 2, 3, 4)], "drift_d3"),
        ("o2-case", O2_INIT, [{"dir": 1, "length": 0.5}, {"dir": 2, "length": 0.5}], "drift_o2"),
        ("tetra-case", TETRA_INIT, unit_path(), "drift_tetra"),
    )
    for label, init, path, tol in cases:
        for quantity, drift in _drift(label, init, path).items():
            out.append(_below(f"{label} conserves {quantity}", "eds", drift, config.tol(tol)))

    system = get_system("octa-case")
    traj = flow(system, {"s": 1.0}, unit_path(), FLOW_STEP)
    error = float(np.max(np.abs(traj.states[:, 0] - octa_exact(1.0, traj.arclength))))
    out.append(_below("octa-case follows s0 / (1 + s0 tau)", "eds", error, config.tol("drift_octa")))

    order = integrator_order(get_system("so3-case"), {"r": 1.0, "t": 0.0}, unit_path())
    out.append(_within("integrator drift is fourth order", "eds", order["order"], ORDER_WINDOW_4, drifts=order["drifts"]))
    return out


@criterion("eds")
def compatibility(config: RunConfig) -> list[CriterionResult]:
    system = get_system("o2-case")
    residual = system.bracket_residual(1, 2)
    nonzero = sum(1 for e in residual if e != 0)
    report = mixed_partial_check(system, O2_MIXED_INIT)
    return [
        _equal("o2-case frame brackets close symbolically", "eds", nonzero, 0),
        _within("o2-case mixed-partial defect is second order", "eds", report.raw_order, ORDER_WINDOW_2, raw=report.raw),
        _within("o2-case corrected defect is third order", "eds", report.corrected_order, ORDER_WINDOW_3, corrected=report.corrected),
    ]


@criterion("eds")
def gauss_codazzi(config: RunConfig) -> list[CriterionResult]:
    grid = box_grid(*SO3_BOX, config.gc_grid)
    flat = gauss_codazzi_residual(flat_pair(), grid)
    so3 = gauss_codazzi_residual(so3_pair(), grid)
    order = residual_order(so3_pair(), grid)
    negative = gauss_codazzi_residual(so3_pair(scale=1.1), grid)
    return [
        _below("flat pair satisfies Gauss-Codazzi", "eds", flat.residual, config.tol("gc_flat")),
        _below("SO(3) pair satisfies Gauss-Codazzi", "eds", so3.residual, config.tol("gc_so3"), gauss=so3.gauss, codazzi=so3.codazzi),
        _within("Gauss-Codazzi residual converges at second order", "eds", order["order"], ORDER_WINDOW_2, residuals=order["residuals"]),
        _above("scaled SO(3) cubic violates Gauss-Codazzi", "eds", negative.residual, config.tol("gc_negative")),
    ]


@criterion("eds")
def characters(config: RunConfig) -> list[CriterionResult]:
    out = []
    for name in SHIPPED:
        tableau = load_tableau(name)
        first = cartan_characters(tableau, config.trials, config.seed)
        again = cartan_characters(tableau, config.trials, config.seed)
        out.append(CriterionResult(
            f"{name} tableau characters",
            "eds",
            bool(first.matches) and first.characters == again.characters,
            list(first.characters),
            list(tableau.expected or ()),
            {"rank": first.rank},
        ))
    return out


# -- hyperkahler ---------------------------------------------------------------


@criterion("hyperkahler")
def hyperkahler(config: RunConfig) -> list[CriterionResult]:
    out = []
    for label in ("product-curves", "product-r2"):
        chart = make_family(label)
        worst = max(max(hyperkahler_check(chart, u)) for u in chart.sample_points(config.samples, config.seed))
        out.append(_below(f"{label} is zeta1- and zeta3-isotropic", "hyperkahler", worst, config.tol("hyperkahler")))
    control = make_family("control-plane")
    zeta3 = hyperkahler_check(control, control.center())[1]
    out.append(_above("control plane is not zeta3-isotropic", "hyperkahler", zeta3, config.tol("hyperkahler_negative")))
    return out


# -- runner --------------------------------------------------------------------


@dataclass
class SuiteResult:
    results: list[CriterionResult]
    seconds: dict[str, float]

    @property
    def passed(self) -> int:
        return sum(1 for r in self.results if r.passed)

    @property
    def failed(self) -> int:
        return len(self.results) - self.passed

    def checks(self) -> dict[str, bool]:
        return {f"{r.module}: {r.name}": r.passed for r in self.results}

    def to_json(self) -> dict:
        return {"criteria": [r.to_json() for r in self.results]}


def run_suite(config: RunConfig, modules: list[str] | None = None) -> SuiteResult:
    """Run the selected modules' criteria in canonical order.

    Raises:
        ValidationError: On an unknown module name
    """
    selected = list(modules) if modules else list(MODULES)
    unknown = sorted(set(selected) - set(MODULES))
    if unknown:
        raise ValidationError(f"Unknown suite module(s): {', '.join(unknown)} (expected {', '.join(MODULES)})")
    results: list[CriterionResult] = []
    seconds: dict[str, float] = {}
    for module in MODULES:
        if module not in selected:
            continue
        logger.info(f"Running {module} criteria")
        start = time.perf_counter()
        for check in CRITERIA[module]:
            try:
                results.extend(check(config))
            except Exception as e:
                logger.error(f"{module}: {check.__name__} raised {type(e).__name__}: {e}")
                results.append(CriterionResult(
                    check.__name__.replace("_", " "), module, False, None, None,
                    {"error": f"{type(e).__name__}: {e}"},
                ))
        seconds[module] = round(time.perf_counter() - start, 6)
    failed = [r for r in results if not r.passed]
    for r in failed:
        logger.warn(f"{r.module}: {r.name} failed (measured {r.measured}, tolerance {r.tolerance})")
    return SuiteResult(results, seconds)
