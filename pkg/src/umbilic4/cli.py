#!/usr/bin/env python3
"""Umbilic4 CLI - one subcommand group per module"""

import json
import sys
import time
from contextlib import contextmanager

import click

from . import __version__
from .config import FORMATS, RunConfig, load_config, with_overrides
from .cubics import (
    SymmetricCubic,
    check_lemma_stabilizers,
    classify_continuous_orbit,
    fixed_subspace,
    stabilizer_algebra,
)
from .eds import (
    SO3_BOX,
    SYSTEMS,
    box_grid,
    cartan_characters,
    conserved_report,
    flat_pair,
    flow,
    gauss_codazzi_residual,
    get_system,
    load_tableau,
    mixed_partial_check,
    residual_order,
    so3_pair,
)
from .errors import ClassificationError, ValidationError
from .field import scalar_to_json
from .geom import (
    FAMILIES,
    convergence_order,
    fundamental_cubic,
    hyperkahler_check,
    make_family,
    random_special_unitary,
    sl_residual,
)
from .quat4 import (
    ADVERTISED_ORDERS,
    build_binary_subgroup,
    build_so4_subgroup,
    group_to_json,
    minus_identity,
    normalize_label,
)
from .report import make_report, write_report
from .suite import MODULES, run_suite
from .torus import TorusElement, enumerate_small_orders, fixed_cubic_basis, kernel_dim
from .utils import logger, rng_for

# system -> tolerance on its first integrals
DRIFT_TOLERANCES = {
    "so3-case": "drift_so3",
    "d3-conical": "drift_d3",
    "o2-case": "drift_o2",
    "tetra-case": "drift_tetra",
}


@contextmanager
def handled(action: str):
    """Map failures to exit codes: 2 for rejected input, 1 for anything else."""
    try:
        yield
    except click.UsageError:
        raise
    except (ValidationError, FileNotFoundError) as e:
        logger.error(f"{action} rejected: {e}")
        sys.exit(2)
    except Exception as e:
        logger.error(f"{action} failed: {e}")
        sys.exit(1)


def parse_json(text: str | None, what: str, default=None):
    if text is None:
        return default
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ValidationError(f"{what} is not valid JSON: {e}") from None


def read_cubic(coeffs: str | None, expr: str | None) -> SymmetricCubic:
    if (coeffs is None) == (expr is None):
        raise click.UsageError("Give exactly one of --coeffs and --expr")
    if expr is not None:
        return SymmetricCubic.from_expr(expr)
    return SymmetricCubic.from_json(parse_json(coeffs, "--coeffs"))


def emit(config: RunConfig, command: str, results, started: float,
         checks: dict[str, bool] | None = None, rows: list[dict] | None = None) -> None:
    """Write the report; exit 1 if any check failed."""
    report = make_report(command, config, results, checks, time.perf_counter() - started, rows)
    write_report(report, config.format, config.output)
    if not report.ok:
        logger.error(f"{report.failed} check(s) outside tolerance")
        sys.exit(1)


@click.group()
@click.version_option(version=__version__, prog_name="umbilic4")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), help="TOML file with an [umbilic4] section")
@click.option("--seed", type=int, help="Seed for every randomized procedure")
@click.option("--tol-scale", type=float, help="Multiplier applied to every tolerance")
@click.option("--format", "fmt", type=click.Choice(FORMATS), help="Report format")
@click.option("--output", "-o", type=click.Path(dir_okay=False), help="Write the report here instead of stdout")
@click.option("--quiet", "-q", is_flag=True, help="Suppress progress messages")
@click.pass_context
def main(ctx, config_path, seed, tol_scale, fmt, output, quiet):
    """Umbilic4: SO(4) harmonic cubics and special Lagrangian 4-fold checks

    \b
    Exit codes:
      0  every check passed
      1  a check fell outside its tolerance, or a computation failed
      2  invalid input or configuration

    \b
    Environment variables:
      UMBILIC4_SEED       - default seed
      UMBILIC4_TOL_SCALE  - default tolerance multiplier
    """
    logger.quiet = quiet
    with handled("Configuration"):
        config = load_config(config_path)
        ctx.obj = with_overrides(config, seed=seed, tol_scale=tol_scale, format=fmt, output=output)


# -- groups --------------------------------------------------------------------


@main.group()
def groups():
    """Finite subgroups of SO(4) and of the unit quaternions"""


@groups.command("build")
@click.option("--label", required=True, help="T, O, O+, I, I+, cyclic or dihedral")
@click.option("--params", help='Family parameters as JSON, e.g. {"m": 3, "n": 5, "r": 2, "s": 1}')
@click.pass_obj
def groups_build(config: RunConfig, label: str, params: str | None):
    """Build a subgroup by closure of its generators

    \b
    Examples:
      umbilic4 groups build --label O+
      umbilic4 groups build --label cyclic --params '{"m": 3, "n": 3, "r": 1, "s": 1}'
    """
    started = time.perf_counter()
    with handled("Group construction"):
        group = build_so4_subgroup(label, parse_json(params, "--params", {}), config.closure_cap)
        checks = {"-I is not an element": not group.contains(minus_identity(group.exact))}
        key = normalize_label(label)
        if key in ADVERTISED_ORDERS:
            checks[f"order is {ADVERTISED_ORDERS[key]}"] = group.order == ADVERTISED_ORDERS[key]
        emit(config, "groups build", group_to_json(group), started, checks)


@groups.command("binary")
@click.option("--label", required=True, type=click.Choice(["C", "D", "T", "O", "I"], case_sensitive=False))
@click.option("--n", type=int, help="n for C_n and D_n")
@click.pass_obj
def groups_binary(config: RunConfig, label: str, n: int | None):
    """List a binary polyhedral (or cyclic / dicyclic) quaternion group"""
    started = time.perf_counter()
    with handled("Quaternion group"):
        quats = build_binary_subgroup(label, n)
        results = {
            "label": label.upper() + (str(n) if n else ""),
            "order": len(quats),
            "elements": [[scalar_to_json(c) for c in q.components] for q in quats],
        }
        emit(config, "groups binary", results, started)


# -- cubic ---------------------------------------------------------------------


@main.group()
def cubic():
    """Harmonic cubics: stabilizers, fixed subspaces and normal forms"""


@cubic.command("stabilizer")
@click.option("--coeffs", help="20 coefficients as JSON, in the canonical monomial order")
@click.option("--expr", help="Polynomial in x1..x4, e.g. 'x1**3 - 3*x1*x2**2'")
@click.pass_obj
def cubic_stabilizer(config: RunConfig, coeffs: str | None, expr: str | None):
    """Lie algebra of the stabilizer of a cubic

    \b
    Examples:
      umbilic4 cubic stabilizer --expr 'x1*(x1**2 - x2**2 - x3**2 - x4**2)'
      umbilic4 cubic stabilizer --coeffs '[0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0]'
    """
    started = time.perf_counter()
    with handled("Stabilizer"):
        report = stabilizer_algebra(read_cubic(coeffs, expr).to_float(), config.kernel_rtol)
        emit(config, "cubic stabilizer", report.to_json(), started)


@cubic.command("fixed")
@click.option("--group", "label", required=True, help="T, O, O+, I, I+, cyclic or dihedral")
@click.option("--params", help="Family parameters as JSON")
@click.pass_obj
def cubic_fixed(config: RunConfig, label: str, params: str | None):
    """Basis of the harmonic cubics fixed by a group (exact when the group is)"""
    started = time.perf_counter()
    with handled("Fixed subspace"):
        group = build_so4_subgroup(label, parse_json(params, "--params", {}), config.closure_cap)
        basis = fixed_subspace(list(group.generators), rtol=config.kernel_rtol)
        results = {
            "group": group.display_label,
            "exact": group.exact,
            "dim": len(basis),
            "basis": [b.to_json() for b in basis],
        }
        emit(config, "cubic fixed", results, started)


@cubic.command("classify")
@click.option("--coeffs", help="20 coefficients as JSON")
@click.option("--expr", help="Polynomial in x1..x4")
@click.pass_obj
def cubic_classify(config: RunConfig, coeffs: str | None, expr: str | None):
    """Name the continuous stabilizer of a cubic (exit 1 if it has none)"""
    started = time.perf_counter()
    with handled("Classification"):
        p = read_cubic(coeffs, expr).to_float()
        try:
            results = {"label": classify_continuous_orbit(p, config.kernel_rtol), "reason": None}
        except ClassificationError as e:
            results = {"label": None, "reason": str(e)}
        emit(config, "cubic classify", results, started, {"classified": results["label"] is not None})


@cubic.command("lemma")
@click.option("--family", required=True, type=click.Choice(["star", "doublestar", "*", "**"]))
@click.option("--params", required=True, help='{"r": .., "s": .., "u": .., "v": ..}')
@click.pass_obj
def cubic_lemma(config: RunConfig, family: str, params: str):
    """Predicted stabilizer of a (*) or (**) cubic, verified element by element

    \b
    Examples:
      umbilic4 cubic lemma --family star --params '{"r": 1, "s": 1, "u": 1, "v": 0}'
    """
    started = time.perf_counter()
    with handled("Lemma check"):
        verdict = check_lemma_stabilizers(family, parse_json(params, "--params"), config.tol("kernel"))
        emit(config, "cubic lemma", verdict.to_json(), started, {"verified": verdict.verified})


# -- torus ---------------------------------------------------------------------


@main.group()
def torus():
    """Maximal-torus weights of harmonic cubics"""


@torus.command("scan")
@click.option("--max-den", type=int, help="Largest denominator scanned (default from config)")
@click.option("--json", "as_json", is_flag=True, help="Shorthand for --format json")
@click.pass_obj
def torus_scan(config: RunConfig, max_den: int | None, as_json: bool):
    """Enumerate torus elements fixing cubics beyond one weight pair

    \b
    Examples:
      umbilic4 torus scan --max-den 60 --json
      umbilic4 --format csv torus scan --max-den 12
    """
    started = time.perf_counter()
    with handled("Torus scan"):
        config = with_overrides(config, max_den=max_den, format="json" if as_json else None)
        scan = enumerate_small_orders(config.max_den)
        rows = [
            {"order": e.order, "r": str(e.element.r), "s": str(e.element.s),
             "fixed_dim": e.fixed_dim, "conditions": " ".join(e.conditions)}
            for e in scan.entries
        ]
        emit(config, "torus scan", scan.to_json(), started, rows=rows)


@torus.command("fixed")
@click.option("--element", required=True, help='Torus element "r,s", e.g. "2/3,1/6"')
@click.pass_obj
def torus_fixed(config: RunConfig, element: str):
    """Fixed cubics of g(r, s), cross-checked against the kernel of rep(g) - I"""
    started = time.perf_counter()
    with handled("Torus fixed subspace"):
        g = TorusElement.parse(element)
        basis = fixed_cubic_basis(g)
        kernel = kernel_dim(g, config.kernel_rtol)
        results = {**basis.to_json(), "kernel_dim": kernel}
        emit(config, "torus fixed", results, started, {"weights agree with kernel": basis.dim == kernel})


# -- geom ----------------------------------------------------------------------


@main.group()
def geom():
    """Special Lagrangian families: calibration and fundamental cubics"""


@geom.command("verify")
@click.option("--family", required=True, type=click.Choice(FAMILIES))
@click.option("--params", help="Family parameters as JSON")
@click.option("--samples", type=int, help="Number of sample points (default from config)")
@click.option("--fd", "fd_jacobian", is_flag=True, help="Use finite-difference Jacobians (h=1e-5)")
@click.option("--move", is_flag=True, help="Apply a seeded random SU(4) motion first")
@click.option("--report", "report_path", type=click.Path(dir_okay=False), help="Alias for --output")
@click.pass_obj
def geom_verify(config: RunConfig, family: str, params: str | None, samples: int | None,
                fd_jacobian: bool, move: bool, report_path: str | None):
    """Calibration residuals, cubic invariants and stabilizers at sample points

    \b
    Examples:
      umbilic4 geom verify --family harvey-lawson --params '{"c": 1}' --samples 20
      umbilic4 geom verify --family product-curves --fd --report out.json
    """
    started = time.perf_counter()
    with handled("Geometry check"):
        config = with_overrides(config, samples=samples, output=report_path)
        chart = make_family(family, parse_json(params, "--params", {}))
        if move:
            chart = chart.moved(random_special_unitary(rng_for(config.seed)))
        if fd_jacobian:
            chart = chart.with_fd_jacobian(1e-5)
        tol = config.tol("calibration_fd" if fd_jacobian else "calibration")

        points = []
        calibrated = True
        for u in chart.sample_points(config.samples, config.seed):
            res = sl_residual(chart, u)
            zeta1, zeta3 = hyperkahler_check(chart, u)
            entry = {"u": u.tolist(), **res.to_json(), "zeta1": zeta1, "zeta3": zeta3}
            if max(res.omega, res.im_omega) < tol:
                extract = fundamental_cubic(chart, u, config.fd_step)
                entry["cubic"] = {
                    "norm": extract.norm,
                    "symmetry_defect": extract.symmetry_defect,
                    "trace_defect": extract.trace_defect,
                    "stabilizer_dim": stabilizer_algebra(extract.harmonic(), config.extract_rtol).algebra_dim,
                }
            else:
                calibrated = False
            points.append(entry)

        results = {"chart": chart.describe(), "points": points}
        if calibrated and not fd_jacobian:
            results["convergence"] = convergence_order(chart, chart.center())
        checks = {"calibrated at every sample": calibrated}
        emit(config, "geom verify", results, started, checks)


# -- eds -----------------------------------------------------------------------


@main.group()
def eds():
    """Structure-equation flows, Gauss-Codazzi residuals, Cartan characters"""


@eds.command("flow")
@click.option("--system", "label", required=True, type=click.Choice(SYSTEMS))
@click.option("--init", required=True, help='Initial state (and parameters) as JSON, e.g. {"r": 1, "t": 0}')
@click.option("--path", default='[{"dir": 1, "length": 1.0}]', show_default=True, help="Segments as JSON")
@click.option("--step", type=float, default=1e-3, show_default=True)
@click.option("--every", type=int, default=100, show_default=True, help="Keep every k-th sample in the report")
@click.pass_obj
def eds_flow(config: RunConfig, label: str, init: str, path: str, step: float, every: int):
    """Integrate a system along a coframe path and report first-integral drift

    \b
    Examples:
      umbilic4 eds flow --system so3-case --init '{"r": 1, "t": 0}'
      umbilic4 eds flow --system o2-case --init '{"r": 0.5, "v": 0.1, "t1": -0.3, "t2": 0.1}' \\
          --path '[{"dir": 1, "length": 0.5}, {"dir": 2, "length": 0.5}]'
    """
    started = time.perf_counter()
    with handled("Flow"):
        system = get_system(label)
        traj = flow(system, parse_json(init, "--init"), parse_json(path, "--path"), step)
        drift = conserved_report(system, traj) if system.conserved else {}
        results = {**traj.to_json(every), "drift": drift}
        checks = {}
        if label in DRIFT_TOLERANCES:
            tol = config.tol(DRIFT_TOLERANCES[label])
            checks = {f"{q} drift below {tol:g}": d < tol for q, d in drift.items()}
        emit(config, "eds flow", results, started, checks)


@eds.command("mixed")
@click.option("--system", "label", required=True, type=click.Choice(SYSTEMS))
@click.option("--init", required=True, help="State (and parameters) as JSON")
@click.option("--pair", help='Directions as "a,b" (default 1,2)')
@click.pass_obj
def eds_mixed(config: RunConfig, label: str, init: str, pair: str | None):
    """Commutator defect of two flows under step halving"""
    started = time.perf_counter()
    with handled("Mixed-partial check"):
        directions = None
        if pair is not None:
            try:
                a, b = (int(x) for x in pair.split(","))
            except ValueError:
                raise ValidationError(f'--pair must look like "1,2", got {pair!r}') from None
            directions = (a, b)
        report = mixed_partial_check(get_system(label), parse_json(init, "--init"), directions)
        emit(config, "eds mixed", report.to_json(), started)


@eds.command("gc")
@click.option("--pair", "pair_name", type=click.Choice(["flat", "so3"]), default="so3", show_default=True)
@click.option("--h", "h", type=float, default=1e-3, show_default=True, help="Finite-difference step")
@click.option("--grid", type=int, help="Points per axis of the box (default from config)")
@click.option("--scale", type=float, default=1.0, show_default=True, help="Multiply the cubic (negative control)")
@click.pass_obj
def eds_gc(config: RunConfig, pair_name: str, h: float, grid: int | None, scale: float):
    """Gauss and Codazzi residuals of a coframe / cubic pair

    \b
    Examples:
      umbilic4 eds gc --pair so3 --h 1e-3 --grid 3
      umbilic4 eds gc --pair so3 --scale 1.1    # expected to fail
    """
    started = time.perf_counter()
    with handled("Gauss-Codazzi check"):
        config = with_overrides(config, gc_grid=grid)
        pair = flat_pair() if pair_name == "flat" else so3_pair()
        if scale != 1.0:
            pair = pair.scaled(scale)
        points = box_grid(*SO3_BOX, config.gc_grid)
        result = gauss_codazzi_residual(pair, points, h)
        results = result.to_json()
        if pair_name == "so3" and scale == 1.0:
            results["convergence"] = residual_order(pair, points, (2 * h, h))
        tol = config.tol("gc_flat" if pair_name == "flat" else "gc_so3")
        emit(config, "eds gc", results, started, {f"residual below {tol:g}": result.residual < tol})


@eds.command("characters")
@click.option("--tableau", required=True, help="so2s3, d3-conical, z3-case2 or a JSON file")
@click.option("--trials", type=int, help="Random flags (default from config)")
@click.option("--seed", type=int, help="Flag seed; takes precedence over the global --seed and UMBILIC4_SEED")
@click.pass_obj
def eds_characters(config: RunConfig, tableau: str, trials: int | None, seed: int | None):
    """Cartan characters of a tableau from random flags

    \b
    Examples:
      umbilic4 eds characters --tableau z3-case2 --trials 32 --seed 0
    """
    started = time.perf_counter()
    with handled("Character computation"):
        config = with_overrides(config, trials=trials, seed=seed)
        result = cartan_characters(load_tableau(tableau), config.trials, config.seed)
        checks = {} if result.matches is None else {"characters match expected": result.matches}
        emit(config, "eds characters", result.to_json(), started, checks)


# -- suite ---------------------------------------------------------------------


@main.group()
def suite():
    """Acceptance battery"""


@suite.command("acceptance")
@click.option("--filter", "modules", multiple=True, type=click.Choice(MODULES), help="Run only these modules")
@click.pass_obj
def suite_acceptance(config: RunConfig, modules: tuple[str, ...]):
    """Run every acceptance criterion and emit a pass/fail table

    \b
    Examples:
      umbilic4 suite acceptance
      umbilic4 --format pretty suite acceptance --filter torus
      UMBILIC4_TOL_SCALE=0.01 umbilic4 suite acceptance --filter geom   # exit 1
    """
    started = time.perf_counter()
    with handled("Acceptance suite"):
        result = run_suite(config, list(modules) or None)
        report = make_report("suite acceptance", config, result.to_json(), result.checks(),
                             time.perf_counter() - started, [r.row() for r in result.results])
        report.timing["modules"] = result.seconds
        write_report(report, config.format, config.output)
        if report.ok:
            logger.success(f"All {report.passed} criteria passed")
        else:
            logger.error(f"{report.failed} of {report.passed + report.failed} criteria failed")
            sys.exit(1)


if __name__ == "__main__":
    main()
