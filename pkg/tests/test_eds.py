"""Tests for structure-equation flows, Gauss-Codazzi residuals and tableaux."""

import json

import numpy as np
import pytest

from umbilic4.eds import (
    SO3_BOX,
    SYSTEMS,
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
    parse_path,
    parse_tableau,
    residual_order,
    so3_pair,
    unit_path,
)
from umbilic4.eds.tableau import SHIPPED
from umbilic4.errors import DomainError, FrameError, ValidationError
from umbilic4.suite import D3_INIT, O2_INIT, O2_MIXED_INIT, TETRA_INIT
from umbilic4.utils import rng_for

SO3_INIT = {"r": 1.0, "t": 0.0}
PRODUCT_INIT = {"r": 1.0, "v": 1.0, "t1": 0.0, "t2": 0.0, "t3": 0.0, "t4": 0.0}


def drift(label: str, init: dict, path: list[dict]) -> dict[str, float]:
    system = get_system(label)
    return conserved_report(system, flow(system, init, path, 1e-3))


class TestSystems:
    """Tests for the system registry and symbolic checks."""

    def test_registry(self):
        assert set(SYSTEMS) == {
            "so3-case", "o2-case", "tetra-case", "octa-case", "d3-conical", "product-case", "so2s3-case"
        }
        assert get_system("so3-case") is get_system("so3-case")

    def test_unknown_system(self):
        with pytest.raises(ValidationError, match="Unknown system"):
            get_system("g2-case")

    def test_o2_brackets_close(self):
        residual = get_system("o2-case").bracket_residual(1, 2)
        assert all(entry == 0 for entry in residual)

    def test_describe(self):
        info = get_system("d3-conical").describe()
        assert info["directions"] == 4
        assert info["params"] == ["m1", "m2", "m3", "m4"]
        assert not info["closed"]

    def test_pack_errors(self):
        system = get_system("so3-case")
        with pytest.raises(ValidationError, match="missing initial value"):
            system.pack({"r": 1.0})
        with pytest.raises(ValidationError, match="unknown variable"):
            system.pack({"r": 1.0, "t": 0.0, "q": 2.0})
        with pytest.raises(ValidationError, match="non-numeric"):
            system.pack({"r": "one", "t": 0.0})

    def test_parameters_default_to_zero(self):
        _, p = get_system("d3-conical").pack(D3_INIT)
        np.testing.assert_array_equal(p, np.zeros(4))


class TestPaths:
    """Tests for coframe path parsing."""

    def test_directions(self):
        (seg,) = parse_path(get_system("o2-case"), [{"dir": 2, "length": -0.5}])
        assert seg.coeffs == (0.0, 1.0)
        assert seg.length == -0.5

    def test_coefficients(self):
        (seg,) = parse_path(get_system("o2-case"), [{"coeffs": [0.6, 0.8], "length": 1}])
        assert seg.coeffs == (0.6, 0.8)

    @pytest.mark.parametrize("path", [
        [{"dir": 2, "length": 1}],
        [{"dir": 1}],
        [{"dir": 1, "coeffs": [1], "length": 1}],
        [{"coeffs": [1, 0], "length": 1}],
        [{"dir": 1, "length": float("inf")}],
        {"dir": 1, "length": 1},
    ])
    def test_rejects(self, path):
        with pytest.raises(ValidationError):
            parse_path(get_system("so3-case"), path)


class TestFlow:
    """Tests for the fixed-step flows and their first integrals."""

    def test_so3_drift(self):
        assert max(drift("so3-case", SO3_INIT, unit_path()).values()) < 1e-8

    def test_tetra_drift(self):
        assert drift("tetra-case", TETRA_INIT, unit_path())["r/s^5"] < 1e-8

    def test_o2_drift(self):
        path = [{"dir": 1, "length": 0.5}, {"dir": 2, "length": 0.5}]
        assert max(drift("o2-case", O2_INIT, path).values()) < 1e-7

    def test_d3_drift(self):
        path = [{"dir": a, "length": 0.25} for a in (1, 2, 3, 4)]
        assert max(drift("d3-conical", D3_INIT, path).values()) < 1e-7

    def test_octa_exact(self):
        traj = flow(get_system("octa-case"), {"s": 1.0}, unit_path(), 1e-3)
        assert traj.boundary is None
        assert traj.arclength[-1] == pytest.approx(1.0)
        np.testing.assert_allclose(traj.states[:, 0], octa_exact(1.0, traj.arclength), atol=1e-10)
        assert traj.final["s"] == pytest.approx(0.5)

    def test_integrator_order(self):
        order = integrator_order(get_system("so3-case"), SO3_INIT, unit_path())
        assert 3.5 <= order["order"] <= 4.5

    def test_order_needs_integral(self):
        with pytest.raises(ValidationError, match="no conserved quantity"):
            integrator_order(get_system("octa-case"), {"s": 1.0}, unit_path())

    def test_boundary_halts_flow(self):
        """Flowing tetra-case backwards reaches s = r and stops there."""
        traj = flow(get_system("tetra-case"), TETRA_INIT, unit_path(length=-5.0), 1e-3)
        assert traj.boundary is not None
        assert traj.boundary.arclength < 5.0
        assert traj.boundary.arclength == traj.arclength[-1]
        assert np.all(np.isfinite(traj.states))

    def test_inadmissible_start(self):
        with pytest.raises(DomainError, match="not admissible"):
            flow(get_system("so3-case"), {"r": -1.0, "t": 0.0}, unit_path())

    def test_rejects_step(self):
        with pytest.raises(ValidationError, match="step must be positive"):
            flow(get_system("so3-case"), SO3_INIT, unit_path(), 0.0)

    def test_zero_length_segment(self):
        traj = flow(get_system("so3-case"), SO3_INIT, unit_path(length=0.0))
        assert len(traj.arclength) == 1

    def test_trajectory_json(self):
        traj = flow(get_system("octa-case"), {"s": 1.0}, unit_path(), 0.125)
        data = traj.to_json(every=3)
        assert data["steps"] == 8
        assert data["samples"][-1]["arclength"] == 1.0
        assert len(data["samples"]) == 4


class TestMixedPartials:
    """Tests for commutator defects of two-step flows."""

    def test_o2_orders(self):
        report = mixed_partial_check(get_system("o2-case"), O2_MIXED_INIT)
        assert 1.5 <= report.raw_order <= 2.5
        assert 2.5 <= report.corrected_order <= 3.5

    def test_single_direction(self):
        report = mixed_partial_check(get_system("so3-case"), SO3_INIT)
        assert report.pair is None
        assert report.raw == [0.0, 0.0, 0.0]
        assert report.raw_order is None

    def test_commuting_product_directions(self):
        report = mixed_partial_check(get_system("product-case"), PRODUCT_INIT, pair=(1, 3))
        assert report.raw == [0.0, 0.0, 0.0]
        assert report.raw_order is None
        assert report.corrected is None

    def test_bad_pair(self):
        with pytest.raises(ValidationError, match="pair must satisfy"):
            mixed_partial_check(get_system("o2-case"), O2_MIXED_INIT, pair=(2, 1))


class TestGaussCodazzi:
    """Tests for the Gauss and Codazzi residuals."""

    @pytest.fixture(scope="class")
    def grid(self):
        return box_grid(*SO3_BOX, 3)

    def test_flat(self, grid):
        assert gauss_codazzi_residual(flat_pair(), grid).residual < 1e-12

    def test_so3(self, grid):
        result = gauss_codazzi_residual(so3_pair(), grid)
        assert result.gauss < 1e-4
        assert result.codazzi < 1e-4
        assert result.points == 81

    def test_scaled_cubic_fails(self, grid):
        assert gauss_codazzi_residual(so3_pair(scale=1.1), grid).residual > 0.1

    def test_rotated_frame(self):
        q, r = np.linalg.qr(rng_for(3).standard_normal((4, 4)))
        q = q * np.sign(np.diag(r))
        pair = so3_pair().rotated(q)
        assert gauss_codazzi_residual(pair, box_grid(*SO3_BOX, 2)).residual < 1e-4

    def test_order(self):
        order = residual_order(so3_pair(), box_grid(*SO3_BOX, 2))
        assert 1.5 <= order["order"] <= 2.5

    def test_degenerate_coframe(self):
        pair = flat_pair()
        singular = type(pair)("singular", lambda x: np.zeros((4, 4)), pair.cubic, pair.coframe_jacobian)
        with pytest.raises(FrameError, match="degenerate"):
            gauss_codazzi_residual(singular, box_grid(*SO3_BOX, 1))

    def test_validation(self):
        with pytest.raises(ValidationError):
            so3_pair(c=0.0)
        with pytest.raises(ValidationError):
            box_grid(*SO3_BOX, 0)
        with pytest.raises(ValidationError):
            gauss_codazzi_residual(flat_pair(), np.zeros((0, 4)))
        with pytest.raises(ValidationError):
            gauss_codazzi_residual(flat_pair(), box_grid(*SO3_BOX, 1), h=0.0)

    def test_box_center(self):
        np.testing.assert_array_equal(box_grid(*SO3_BOX, 1), np.zeros((1, 4)))


class TestTableaux:
    """Tests for tableau parsing and Cartan characters."""

    @pytest.mark.parametrize("name", sorted(SHIPPED))
    def test_shipped_characters(self, name):
        tableau = load_tableau(name)
        result = cartan_characters(tableau, trials=8, seed=0)
        assert result.matches
        assert sum(result.characters) == result.rank

    def test_known_values(self):
        assert cartan_characters(load_tableau("so2s3")).characters == (2, 0, 0, 0)
        assert cartan_characters(load_tableau("d3-conical")).characters == (4, 0, 0, 0)

    def test_deterministic(self):
        tableau = load_tableau("z3-case2")
        assert cartan_characters(tableau, 4, 1) == cartan_characters(tableau, 4, 1)

    def test_negated_entries(self):
        tableau = parse_tableau({"pi": ["p", "q"], "entries": [["-q", "p"], ["p", "q/2"]]})
        np.testing.assert_array_equal(tableau.coeffs[0, 0], [0.0, -1.0])
        np.testing.assert_array_equal(tableau.coeffs[1, 1], [0.0, 0.5])
        assert tableau.pi_names == ("p", "q")

    def test_definitions_and_params(self):
        tableau = parse_tableau({
            "pi": ["a", "b"],
            "params": {"k": 2},
            "definitions": {"d": "k*a + b"},
            "entries": [["d", "0"], ["0", "a"]],
        })
        np.testing.assert_array_equal(tableau.coeffs[0, 0], [2.0, 1.0])
        assert tableau.expected is None
        assert cartan_characters(tableau).matches is None

    @pytest.mark.parametrize(("data", "message"), [
        ({"pi": ["p"], "entries": [["p**2"]]}, "not linear"),
        ({"pi": ["p"], "entries": [["p + 1"]]}, "not linear"),
        ({"pi": ["p"], "entries": [["q"]]}, "unknown symbols"),
        ({"pi": ["p"], "entries": [["p", "p"], ["p"]]}, "rectangular"),
        ({"entries": [["p"]]}, "needs 'pi'"),
    ])
    def test_rejects(self, data, message):
        with pytest.raises(ValidationError, match=message):
            parse_tableau(data)

    def test_load_from_file(self, tmp_path):
        path = tmp_path / "t.json"
        path.write_text(json.dumps({"pi": ["p", "q"], "entries": [["p", "q"]], "expected": [1, 1]}))
        assert cartan_characters(load_tableau(path)).matches

    def test_missing_file(self):
        with pytest.raises(ValidationError, match="neither a file"):
            load_tableau("no-such-tableau.json")

    def test_rejects_trials(self):
        with pytest.raises(ValidationError):
            cartan_characters(load_tableau("so2s3"), trials=0)
