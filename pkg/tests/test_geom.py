"""Tests for the explicit special Lagrangian families."""

import math

import numpy as np
import pytest

from umbilic4.cubics import stabilizer_algebra
from umbilic4.errors import DomainError, ExtractionError, FrameError, ValidationError
from umbilic4.geom import (
    FAMILIES,
    adapted_frame,
    align,
    convergence_order,
    fundamental_cubic,
    hl_invariants,
    hyperkahler_check,
    make_family,
    random_special_unitary,
    sl_residual,
    symmetry_check,
)
from umbilic4.quat4 import build_so4_subgroup
from umbilic4.utils import rng_for


def worst_residual(chart, points) -> float:
    return max(max(sl_residual(chart, u).omega, sl_residual(chart, u).im_omega) for u in points)


class TestFamilies:
    """Tests for family construction and domains."""

    def test_all_families_build(self):
        for label in FAMILIES:
            chart = make_family(label)
            assert chart.point(chart.center()).shape == (8,)
            assert chart.jacobian(chart.center()).shape == (8, 4)

    def test_unknown_family(self):
        with pytest.raises(ValidationError, match="Unknown family"):
            make_family("catenoid")

    def test_unknown_parameter(self):
        with pytest.raises(ValidationError, match="Unknown parameter"):
            make_family("flat-plane", {"c": 1})

    def test_non_numeric_parameter(self):
        with pytest.raises(ValidationError, match="must be a number"):
            make_family("harvey-lawson", {"c": "big"})

    def test_asympt_conical_needs_positive_c(self):
        with pytest.raises(DomainError):
            make_family("asympt-conical", {"c": -1.0})

    def test_theta_margin_range(self):
        with pytest.raises(DomainError):
            make_family("harvey-lawson", {"c": 1.0, "theta_margin": 1.0})

    def test_outside_box(self):
        chart = make_family("flat-plane")
        with pytest.raises(DomainError, match="outside"):
            chart.point([2.0, 0.0, 0.0, 0.0])

    def test_wrong_shape(self):
        with pytest.raises(ValidationError, match="needs 4 parameters"):
            make_family("flat-plane").point([0.0, 0.0])

    def test_samples_are_deterministic_and_inside(self):
        chart = make_family("hl-torus")
        a, b = chart.sample_points(5, seed=3), chart.sample_points(5, seed=3)
        np.testing.assert_array_equal(a, b)
        assert all(chart.contains(u) for u in a)

    def test_describe(self):
        info = make_family("octahedral-cone").describe()
        assert info["family"] == "octahedral-cone"
        assert info["phase"] == 0.0
        assert info["jacobian"] == "analytic"


class TestCalibration:
    """Tests for the special Lagrangian residuals."""

    @pytest.mark.parametrize(("label", "params"), [
        ("flat-plane", {}),
        ("harvey-lawson", {"c": 1.0}),
        ("harvey-lawson", {"c": -1.0}),
        ("hl-torus", {}),
        ("octahedral-cone", {}),
        ("asympt-conical", {"c": 1.0}),
        ("product-r2", {}),
        ("product-curves", {}),
    ])
    def test_calibrated(self, label, params):
        chart = make_family(label, params)
        assert worst_residual(chart, chart.sample_points(5)) < 1e-8

    @pytest.mark.parametrize(("label", "params"), [
        ("product-r2", {"f": "w"}),
        ("product-r2", {"f": "w**2"}),
        ("product-curves", {"f": "w", "g": "w**3"}),
    ])
    def test_graph_curves_have_phase_zero(self, label, params):
        """Graphs v = f(x1 - i x2) are calibrated at phase 0, not pi/2."""
        chart = make_family(label, params)
        u = chart.center()
        assert sl_residual(chart, u).im_omega < 1e-10
        assert sl_residual(chart, u, phase=math.pi / 2).im_omega > 0.9

    def test_fd_jacobian(self):
        chart = make_family("harvey-lawson", {"c": 1.0}).with_fd_jacobian(1e-5)
        assert chart.jacobian_mode == "fd"
        assert worst_residual(chart, chart.sample_points(5)) < 1e-5

    def test_wrong_phase(self):
        chart = make_family("octahedral-cone")
        assert sl_residual(chart, chart.center(), phase=math.pi / 2).im_omega > 0.1

    def test_wrong_phase_blocks_extraction(self):
        chart = make_family("octahedral-cone", {"phase": math.pi / 2})
        with pytest.raises(ExtractionError, match="not special Lagrangian"):
            fundamental_cubic(chart, chart.center())

    def test_rigid_motion_preserves_calibration(self):
        unitary = random_special_unitary(rng_for(7))
        chart = make_family("harvey-lawson", {"c": 1.0}).moved(unitary, b=np.array([1, 2, 0, 0j]))
        assert worst_residual(chart, chart.sample_points(5)) < 1e-8

    def test_rigid_motion_validation(self):
        chart = make_family("flat-plane")
        with pytest.raises(ValidationError, match="unitary"):
            chart.moved(2 * np.eye(4))
        with pytest.raises(ValidationError, match="determinant"):
            chart.moved(np.diag([-1.0, 1.0, 1.0, 1.0]))


class TestFundamentalCubic:
    """Tests for the finite-difference fundamental cubic."""

    def test_flat_plane(self):
        chart = make_family("flat-plane")
        assert fundamental_cubic(chart, chart.center()).norm < 1e-10

    def test_harvey_lawson(self):
        chart = make_family("harvey-lawson", {"c": 1.0})
        extract = fundamental_cubic(chart, chart.center())
        assert extract.symmetry_defect < 1e-6
        assert extract.trace_defect < 1e-5
        assert extract.norm > 0.1
        assert stabilizer_algebra(extract.harmonic(), 1e-6).algebra_dim == 3

    @pytest.mark.parametrize(("label", "params"), [
        ("harvey-lawson", {"c": 1.0}),
        ("hl-torus", {}),
        ("asympt-conical", {"c": 1.0}),
    ])
    def test_convergence_order(self, label, params):
        """Coarse Richardson steps report their symmetry defect instead of raising."""
        chart = make_family(label, params)
        result = convergence_order(chart, chart.center())
        assert 1.5 <= result["order"] <= 2.5
        defects = result["symmetry_defects"]
        assert len(defects) == 3
        assert defects[2] < defects[0]

    def test_convergence_needs_three_steps(self):
        chart = make_family("harvey-lawson", {"c": 1.0})
        with pytest.raises(ValidationError):
            convergence_order(chart, chart.center(), steps=(1e-2, 5e-3))

    def test_hl_torus_tetrahedral_symmetry(self):
        chart = make_family("hl-torus")
        u = chart.center()
        h = align(fundamental_cubic(chart, u), adapted_frame(chart, u))
        residuals = symmetry_check(h, build_so4_subgroup("T").elements)
        assert max(residuals.values()) < 1e-4

    def test_align_rejects_foreign_frame(self):
        chart = make_family("harvey-lawson", {"c": 1.0})
        extract = fundamental_cubic(chart, chart.center())
        with pytest.raises(FrameError):
            align(extract, np.eye(8)[:, :4])

    def test_adapted_frame_is_orthonormal(self):
        chart = make_family("asympt-conical", {"c": 1.0})
        frame = adapted_frame(chart, chart.center())
        np.testing.assert_allclose(frame.T @ frame, np.eye(4), atol=1e-10)


class TestHarveyLawsonInvariant:
    """Tests for the conserved quantity along the Harvey-Lawson family."""

    def test_constant_in_theta(self):
        chart = make_family("harvey-lawson", {"c": 1.0})
        values = [hl_invariants(chart, [theta, 0.0, 0.0, 0.0]).conserved for theta in (-0.2, 0.2)]
        assert values[0] == pytest.approx(values[1], rel=1e-3)

    def test_needs_harvey_lawson(self):
        chart = make_family("flat-plane")
        with pytest.raises(ValidationError):
            hl_invariants(chart, chart.center())


class TestHyperkahler:
    """Tests for zeta1 and zeta3 isotropy."""

    @pytest.mark.parametrize("label", ["product-r2", "product-curves"])
    def test_products_are_isotropic(self, label):
        chart = make_family(label)
        for u in chart.sample_points(5):
            assert max(hyperkahler_check(chart, u)) < 1e-8

    def test_control_plane(self):
        chart = make_family("control-plane")
        zeta1, zeta3 = hyperkahler_check(chart, chart.center())
        assert zeta1 < 1e-12
        assert zeta3 == pytest.approx(1.0)
