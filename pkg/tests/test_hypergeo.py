"""Hypersurface geometry: splittings, curvature forms, minimality."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

import coiso
from coiso import (
    ExtensionQualityError,
    UnnormalizedDefiningFunctionError,
    cylinder,
    ellipsoid,
    from_polynomial,
    hyperplane,
    leaf_minimality,
    leafwise_mean_curvature,
    levi_form,
    normal_convention_matrix,
    second_fundamental_form,
    sphere,
    tangent_splitting,
    transverse_curvature_bracket,
    transverse_curvature_sff,
)

P_AXIS = np.array([1.0, 0.0, 0.0, 0.0])


def fixture_points(y, count, seed):
    return y.sample_points(count, seed)


# ---------------------------------------------------------------------------
# tangent splitting


def test_splitting_hyperplane():
    y = hyperplane(2)
    spl = tangent_splitting(y, P_AXIS)
    assert_allclose(spl.nu, [1, 0, 0, 0], atol=1e-12)
    assert_allclose(spl.x_rho, [0, 0, 1, 0], atol=1e-12)
    z2 = np.zeros((4, 2))
    z2[1, 0] = z2[3, 1] = 1.0
    assert coiso.spans_equal(spl.njf, coiso.Subspace(z2))


def test_splitting_sphere():
    y = sphere(2)
    spl = tangent_splitting(y, P_AXIS)
    assert_allclose(spl.nu, [1, 0, 0, 0], atol=1e-12)
    assert_allclose(spl.x_rho, [0, 0, 1, 0], atol=1e-12)
    assert spl.frame.k == 1
    # e_n along X_rho, f_n = -nu
    assert_allclose(spl.frame.e[:, 1], spl.x_rho, atol=1e-12)
    assert_allclose(spl.frame.f[:, 1], -spl.nu, atol=1e-12)


def test_splitting_cylinder_j_invariance():
    y = cylinder(2)
    spl = tangent_splitting(y, P_AXIS)
    j = coiso.standard_space(2).j
    jb = j @ spl.njf.basis
    resid = jb - spl.njf.project(jb)
    assert np.max(np.abs(resid)) < 1e-10


def test_splitting_rejects_bad_gradient_in_strict_mode():
    y = coiso.LevelSetHypersurface(
        n=2, rho=lambda x: float(2 * x[0]), grad=lambda x: np.array([2.0, 0, 0, 0]),
        hess=lambda x: np.zeros((4, 4)), strict=True)
    with pytest.raises(UnnormalizedDefiningFunctionError):
        tangent_splitting(y, np.array([0.5, 0, 0, 0]))


# ---------------------------------------------------------------------------
# second fundamental form


def test_sff_hyperplane_vanishes():
    y = hyperplane(2)
    blocks = second_fundamental_form(y, P_AXIS)
    assert np.max(np.abs(blocks.full)) < 1e-12


def test_sff_sphere_is_minus_identity_against_outward_normal():
    y = sphere(2)
    blocks = second_fundamental_form(y, P_AXIS)
    s_nu = normal_convention_matrix(blocks, y.unit_normal(P_AXIS))
    assert_allclose(s_nu, -np.eye(3), atol=1e-10)


def test_sff_ellipsoid_axis_principal_curvatures():
    a1, a2 = 1.0, 1.3
    y = ellipsoid([a1, a2])
    blocks = second_fundamental_form(y, P_AXIS)
    s_nu = normal_convention_matrix(blocks, y.unit_normal(P_AXIS))
    # classical oracle: level-set curvatures a1/a_j^2 at the a1 axis point
    expected = sorted([-a1 / a1 ** 2, -a1 / a2 ** 2, -a1 / a2 ** 2])
    assert_allclose(sorted(np.linalg.eigvalsh(s_nu)), expected, atol=1e-10)


def test_sff_symmetries_on_fixtures():
    for y in (sphere(2), cylinder(2), ellipsoid([1.0, 1.3]), sphere(3)):
        for p in fixture_points(y, 6, 2):
            blocks = second_fundamental_form(y, p)
            assert blocks.symmetry_residual() < 1e-6


# ---------------------------------------------------------------------------
# leafwise mean curvature


def test_mean_curvature_hyperplane():
    mc = leafwise_mean_curvature(hyperplane(2), P_AXIS)
    assert mc.alpha_norm < 1e-12
    assert np.max(np.abs(mc.h_vector)) < 1e-12


def test_mean_curvature_sphere():
    y = sphere(2)
    mc = leafwise_mean_curvature(y, P_AXIS)
    assert_allclose(mc.h_vector, -y.unit_normal(P_AXIS), atol=1e-10)
    assert abs(mc.alpha_norm - 1.0) < 1e-10
    assert mc.formula_residual < 1e-6


def test_mean_curvature_radius_scaling():
    for r in (0.5, 2.0):
        y = sphere(2, radius=r)
        p = np.array([r, 0.0, 0.0, 0.0])
        mc = leafwise_mean_curvature(y, p)
        assert abs(mc.alpha_norm - 1.0 / r) < 1e-9


def test_mean_curvature_cylinder():
    mc = leafwise_mean_curvature(cylinder(2), P_AXIS)
    assert abs(mc.alpha_norm - 1.0) < 1e-10


def test_mean_curvature_formula_consistency_everywhere():
    for y in (sphere(2), cylinder(2), ellipsoid([1.0, 1.3])):
        for p in fixture_points(y, 8, 5):
            mc = leafwise_mean_curvature(y, p)
            assert mc.formula_residual < 1e-6


# ---------------------------------------------------------------------------
# Levi form


def test_levi_hyperplane_flat():
    lv = levi_form(hyperplane(2), P_AXIS)
    assert np.max(np.abs(lv.hermitian)) < 1e-12
    assert not lv.positive_definite


def test_levi_sphere_unit_value():
    lv = levi_form(sphere(2), P_AXIS)
    assert_allclose(lv.two_form, [[0, 1], [-1, 0]], atol=1e-10)
    assert_allclose(lv.eigenvalues, [1.0, 1.0], atol=1e-10)
    assert lv.positive_definite


def test_levi_sphere_fd_route():
    y = sphere(2, analytic=False, h=1e-5)
    lv = levi_form(y, P_AXIS)
    assert_allclose(lv.eigenvalues, [1.0, 1.0], atol=1e-4)


def test_levi_cylinder_flat_directions():
    lv = levi_form(cylinder(2), P_AXIS)
    assert np.max(np.abs(lv.hermitian)) < 1e-10


# ---------------------------------------------------------------------------
# transverse curvature


def test_curvature_hyperplane_zero():
    y = hyperplane(2)
    br = transverse_curvature_bracket(y, P_AXIS)
    sf = transverse_curvature_sff(y, P_AXIS)
    assert np.max(np.abs(br.components)) < 1e-10
    assert np.max(np.abs(sf.components)) < 1e-10


def test_curvature_sphere_matches_levi_with_convention_factor():
    # the honest bracket doubles the 1/2-convention Levi value and points
    # against it in sign: F(X, JX) = -2 levi(X, JX)
    y = sphere(2)
    br = transverse_curvature_bracket(y, P_AXIS)
    lv = levi_form(y, P_AXIS)
    f_xjx = br.components[0, 1, 0]
    assert abs(f_xjx / (-2.0) - lv.hermitian[0, 0]) < 1e-3


def test_curvature_cylinder_flat_pair():
    br = transverse_curvature_bracket(cylinder(2), P_AXIS)
    assert np.max(np.abs(br.components)) < 1e-4


def test_curvature_two_routes_agree():
    for y in (sphere(2), cylinder(2), ellipsoid([1.0, 1.3]), sphere(3)):
        for p in fixture_points(y, 4, 7):
            br = transverse_curvature_bracket(y, p)
            sf = transverse_curvature_sff(y, p)
            assert np.max(np.abs(br.components - sf.components)) < 1e-3


def test_curvature_extension_scheme_independence():
    y = sphere(2)
    p = y.project(np.array([0.4, 0.8, -0.2, 0.3]))
    b1 = transverse_curvature_bracket(y, p, scheme="projection")
    b2 = transverse_curvature_bracket(y, p, scheme="transport")
    assert np.max(np.abs(b1.components - b2.components)) < 1e-3


def test_curvature_type_decomposition_reassembles():
    for y in (sphere(2), ellipsoid([1.0, 1.3]), sphere(3)):
        p = fixture_points(y, 1, 3)[0]
        sf = transverse_curvature_sff(y, p)
        assert np.max(np.abs(sf.reassembled() - sf.components)) < 1e-6


def test_curvature_is_type_11_on_fixtures():
    for y in (sphere(2), cylinder(2), ellipsoid([1.0, 1.3]), sphere(3),
              ellipsoid([1.0, 1.2, 0.8])):
        for p in fixture_points(y, 3, 9):
            sf = transverse_curvature_sff(y, p)
            assert np.max(np.abs(sf.f20)) < 1e-6
            assert np.max(np.abs(sf.f02)) < 1e-6
            assert coiso.is_integrable_prekahler(y, p)


# ---------------------------------------------------------------------------
# minimality


def test_minimality_hyperplane():
    res = leaf_minimality(hyperplane(2), P_AXIS)
    assert res.minimal
    assert res.curvature_norm < 1e-10


def test_minimality_sphere_great_circle_leaves():
    y = sphere(2)
    for p in fixture_points(y, 5, 13):
        res = leaf_minimality(y, p)
        assert res.minimal
        assert res.curvature_norm < 1e-5


def test_minimality_ellipsoid_fails_generically():
    y = ellipsoid([1.0, 1.3])
    p = y.project(np.array([0.7, 0.8, 0.5, 0.6]))
    res = leaf_minimality(y, p)
    assert not res.minimal
    assert res.curvature_norm > 1e-2
    assert res.consistency_residual < 1e-4 * max(1.0, res.curvature_norm)


# ---------------------------------------------------------------------------
# frame independence of scalar outputs


def test_scalar_outputs_frame_independent():
    y = ellipsoid([1.0, 1.3])
    p = y.project(np.array([0.3, 0.9, -0.4, 0.5]))
    spl = tangent_splitting(y, p)
    g = coiso.rng(17)
    base_alpha = leafwise_mean_curvature(y, p).alpha_norm
    base_levi = sorted(levi_form(y, p).eigenvalues)
    base_f = transverse_curvature_sff(y, p).norm()
    for _ in range(5):
        phase = g.uniform(0, 2 * np.pi)
        sign = g.choice([-1.0, 1.0])
        e_new = np.concatenate([
            np.cos(phase) * spl.frame.e[:, :1] + np.sin(phase) * spl.frame.f[:, :1],
            sign * spl.frame.e[:, 1:],
        ], axis=1)
        fr = coiso.AdaptedFrame(k=1, e=e_new, f=coiso.standard_space(2).j @ e_new)
        mc = leafwise_mean_curvature(y, p, frame=fr)
        assert abs(mc.alpha_norm - base_alpha) < 1e-6
        lv = levi_form(y, p, frame=fr)
        assert np.max(np.abs(np.array(sorted(lv.eigenvalues)) - base_levi)) < 1e-6
        sf = transverse_curvature_sff(y, p, frame=fr)
        assert abs(sf.norm() - base_f) < 1e-6


# ---------------------------------------------------------------------------
# finite-difference convergence


def levi_entry(h):
    y = sphere(2, analytic=False, h=h)
    return levi_form(y, P_AXIS).hermitian[0, 0]


def sff_entry(h):
    y = sphere(2, analytic=False, h=h)
    return second_fundamental_form(y, P_AXIS).a[0, 0, 0]


def test_fd_convergence_order():
    for entry in (levi_entry, sff_entry):
        d1 = abs(entry(2e-3) - entry(1e-3))
        d2 = abs(entry(1e-3) - entry(5e-4))
        order = math.log2(d1 / d2)
        assert order >= 1.8


# ---------------------------------------------------------------------------
# polynomial defining functions


def test_polynomial_fixture_matches_hyperplane():
    terms = [{"exponents": [1, 0, 0, 0], "coeff": 1.0}]
    y = from_polynomial(2, terms, strict=True)
    blocks = second_fundamental_form(y, P_AXIS)
    assert np.max(np.abs(blocks.full)) < 1e-12
    lv = levi_form(y, P_AXIS)
    assert np.max(np.abs(lv.hermitian)) < 1e-12


def test_polynomial_quadric_matches_ellipsoid():
    a1, a2 = 1.0, 1.3
    terms = [
        {"exponents": [2, 0, 0, 0], "coeff": 1 / a1 ** 2},
        {"exponents": [0, 2, 0, 0], "coeff": 1 / a2 ** 2},
        {"exponents": [0, 0, 2, 0], "coeff": 1 / a1 ** 2},
        {"exponents": [0, 0, 0, 2], "coeff": 1 / a2 ** 2},
    ]
    y = from_polynomial(2, terms)
    ref = ellipsoid([a1, a2])
    p = ref.project(np.array([0.7, 0.8, 0.5, 0.6]))
    got = second_fundamental_form(y, p).full
    want = second_fundamental_form(ref, p).full
    assert_allclose(got, want, atol=1e-9)


def test_polynomial_degree_bound():
    with pytest.raises(ValueError):
        from_polynomial(1, [{"exponents": [7, 0], "coeff": 1.0}])


# ---------------------------------------------------------------------------
# product fixture: multi-dimensional leaves


def test_product_numeric_matches_cubic_oracle():
    gp = coiso.random_graph_product(11, l=2, m=1)
    for x in (np.array([0.2, -0.3]), np.array([-0.1, 0.4])):
        num = gp.sff_numeric(x)
        orc = gp.sff_oracle(x)
        assert np.max(np.abs(num.full - orc.full)) < 1e-8


def test_product_leaf_trilinear_symmetry():
    # <S(X,Y), JZ> symmetric under any permutation of the leaf vectors,
    # including the pairing index
    gp = coiso.random_graph_product(23, l=2, m=1)
    blocks = gp.sff_numeric(np.array([0.15, 0.25]))
    a = blocks.a[:, 1:, 1:]   # normals alpha x kernel (beta, gamma)
    l = a.shape[0]
    worst = 0.0
    for al in range(l):
        worst = max(worst, float(np.max(np.abs(a[al] - a[al].T))))
        for be in range(l):
            for ga in range(l):
                worst = max(worst, abs(a[al][be, ga] - a[be][al, ga]))
    assert worst < 1e-5
