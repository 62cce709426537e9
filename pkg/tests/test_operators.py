"""Twisted operators: derivative oracles, adjointness, solver, boundary chain."""

import numpy as np
import pytest

from gaugekit import (
    ALGEBRA_DIM,
    Connection,
    OneForm,
    Section,
    boundary_operator_T,
    boundary_operator_T0,
    build_chart,
    codiff_A,
    d_A,
    green_A,
    horizontal_project,
    horizontality_ratio,
    l2_inner,
    l2_norm,
    laplacian_A,
    random_smooth_field,
    ritz_smallest,
)
from gaugekit.algebra import coeff_bracket, coeff_to_matrix, matrix_to_coeff
from gaugekit.fields import flat_d
from gaugekit.operators import SolveInfo, bracket_dot, codiff_2form, d_A_cell, hodge_star


def _rand_conn(ch, seed, scale=0.3):
    return Connection(ch, random_smooth_field(ch, "oneform", seed, scale=scale))


def test_twisted_derivative_componentwise_oracle(ann32):
    # d_A f = flat d f + [A, f], the bracket recomputed by matrix arithmetic
    A = _rand_conn(ann32, 1)
    f = random_smooth_field(ann32, "section", 2)
    got = d_A(f, A)
    flat = flat_d(f)
    for ax in range(ann32.n):
        a = A.eta.data[..., ax, :]
        mats = coeff_to_matrix(a) @ coeff_to_matrix(f.data) - coeff_to_matrix(
            f.data
        ) @ coeff_to_matrix(a)
        oracle = flat.data[..., ax, :] + matrix_to_coeff(mats)
        np.testing.assert_allclose(got.data[..., ax, :], oracle, atol=1e-13)


def test_flat_connection_reduces_to_flat_derivative(ann32):
    f = random_smooth_field(ann32, "section", 3)
    got = d_A(f, None)
    np.testing.assert_allclose(got.data, flat_d(f).data, atol=1e-15)


def test_bracket_dot_inverse_metric_weight(ann64):
    # alpha = e1 dtheta, beta = e2 dtheta: product is g^{tt} [e1, e2]
    th, r = ann64.mesh()
    a = np.zeros(ann64.shape + (2, ALGEBRA_DIM))
    b = np.zeros(ann64.shape + (2, ALGEBRA_DIM))
    a[..., 0, 0] = 1.0
    b[..., 0, 1] = 1.0
    prod = bracket_dot(OneForm(ann64, a), OneForm(ann64, b))
    e1 = np.eye(ALGEBRA_DIM)[0]
    e2 = np.eye(ALGEBRA_DIM)[1]
    oracle = (1.0 / r**2)[..., None] * coeff_bracket(e1, e2)
    np.testing.assert_allclose(prod.data, oracle, atol=1e-13)


def test_bracket_dot_of_equal_arguments_vanishes(ann32):
    al = random_smooth_field(ann32, "oneform", 5)
    prod = bracket_dot(al, al)
    assert float(np.max(np.abs(prod.data))) < 1e-14


def test_codifferential_is_exact_adjoint(ann32):
    rng_seeds = range(12)
    for A in (Connection.flat(ann32), _rand_conn(ann32, 9)):
        for k in rng_seeds:
            f = random_smooth_field(ann32, "section", 100 + k)
            g = random_smooth_field(ann32, "section", 200 + k)
            eg = d_A_cell(g, A)
            ip1 = l2_inner(d_A_cell(f, A), eg, "cell")
            ip2 = l2_inner(f, codiff_A(eg, A, form="adjoint"))
            assert abs(ip1 - ip2) <= 1e-12 * max(abs(ip1), 1.0)


def test_pointwise_codifferential_consistent_at_h2():
    errs, hs = [], []
    for n in (32, 64):
        ch = build_chart("annulus", (n, n))
        A = _rand_conn(ch, 4)
        w = random_smooth_field(ch, "oneform", 6)
        a = codiff_A(w, A, form="adjoint")
        p = codiff_A(w, A, form="pointwise")
        ii = ch.interior_slice()
        errs.append(float(np.max(np.abs(a.data[ii] - p.data[ii]))))
        hs.append(max(ch.h))
    order = np.log(errs[0] / errs[1]) / np.log(hs[0] / hs[1])
    assert order > 1.5


def test_laplacian_manufactured_solution_slab():
    # A = 0, f = sin(pi x_n) e1: Delta f = pi^2 sin(pi x_n) e1
    errs = []
    for n in (32, 64):
        ch = build_chart("periodic_slab", (n, n))
        x = ch.mesh()[-1]
        f = Section(ch, np.sin(np.pi * x)[..., None] * np.eye(ALGEBRA_DIM)[0])
        lap = laplacian_A(f, None, form="adjoint")
        oracle = np.pi**2 * f.data
        ii = ch.interior_slice()
        errs.append(float(np.max(np.abs(lap.data[ii] - oracle[ii]))))
    assert errs[1] < errs[0] / 3.0
    assert errs[1] < 0.02 * np.pi**2


def test_energy_positive_and_symmetric(ann32):
    A = _rand_conn(ann32, 7)
    for k in range(25):
        f = random_smooth_field(ann32, "section", 300 + k)
        g = random_smooth_field(ann32, "section", 400 + k)
        lf, lg = laplacian_A(f, A), laplacian_A(g, A)
        assert l2_inner(lf, f) > 0
        s = l2_inner(lf, g) - l2_inner(f, lg)
        assert abs(s) < 1e-11 * max(abs(l2_inner(lf, g)), 1.0)


def test_green_solves_manufactured_problem():
    ch = build_chart("periodic_slab", (48, 48))
    x = ch.mesh()[-1]
    u = Section(ch, np.sin(np.pi * x)[..., None] * np.eye(ALGEBRA_DIM)[0])
    g = Section(ch, np.pi**2 * u.data)
    sol = green_A(g, None, tol=1e-10)
    err = l2_norm(sol - u) / l2_norm(u)
    assert err < 2e-3


def test_green_matches_dense_direct_solve():
    # assemble the operator column by column on a small grid and compare
    # the iterative inverse against numpy's dense factorization
    ch = build_chart("annulus", (16, 16))
    A = _rand_conn(ch, 8, scale=0.2)
    shape = ch.shape + (ALGEBRA_DIM,)
    interior = np.ones(shape, dtype=bool)
    for fc in ch.faces:
        interior[ch.face_slice(fc)] = False
    idx = np.where(interior.reshape(-1))[0]
    ndof = idx.size
    mat = np.zeros((ndof, ndof))
    for col, flat_i in enumerate(idx):
        e = np.zeros(shape)
        e.reshape(-1)[flat_i] = 1.0
        le = laplacian_A(Section(ch, e), A)
        mat[:, col] = le.data.reshape(-1)[idx]
    rhs_field = random_smooth_field(ch, "section", 10)
    x = np.zeros(shape)
    x.reshape(-1)[idx] = np.linalg.solve(mat, rhs_field.data.reshape(-1)[idx])
    sol = green_A(rhs_field, A, tol=1e-12)
    assert float(np.max(np.abs(sol.data - x))) < 1e-8


def test_cg_reports_converged_residual(ann32):
    info = SolveInfo()
    g = random_smooth_field(ann32, "section", 11)
    green_A(g, None, tol=1e-10, info=info)
    assert info.residual <= 1e-10
    assert info.iterations > 0


def test_projector_outputs_horizontal_fields():
    # the residual codifferential of a projected form is O(h^2); the second
    # projection is then an O(h^2) correction of the first
    ratios, idems, hs = [], [], []
    for n in (32, 64):
        ch = build_chart("annulus", (n, n))
        A = _rand_conn(ch, 12)
        eta = random_smooth_field(ch, "oneform", 13)
        al = horizontal_project(eta, A, tol=1e-11)
        ratios.append(horizontality_ratio(al, A))
        again = horizontal_project(al, A, tol=1e-11)
        idems.append(float(np.max(np.abs(again.data - al.data))) / al.sup())
        hs.append(max(ch.h))
    assert ratios[0] < 0.05 and ratios[1] < 0.05  # curvature gate level
    order = np.log(ratios[0] / ratios[1]) / np.log(hs[0] / hs[1])
    assert order > 1.2
    assert idems[1] < idems[0] / 2.0


def test_projector_preserves_tangential_traces(ann32):
    # subtracting d_A gamma with gamma|_faces = 0 can only move the normal
    # slot on the boundary; tangential (Dirichlet) slots must be untouched
    A = _rand_conn(ann32, 24)
    eta = random_smooth_field(ann32, "oneform", 25)
    al = horizontal_project(eta, A, tol=1e-11)
    for fc in ann32.faces:
        sl = ann32.face_slice(fc)
        tang = al.data[sl][..., : ann32.n - 1, :]
        np.testing.assert_allclose(tang, eta.data[sl][..., : ann32.n - 1, :], atol=1e-9)


def test_hodge_star_euclidean_closed_form():
    ch = build_chart("periodic_slab", (16, 16), length=1.0, height=1.0)
    dx1 = np.zeros(ch.shape + (2, ALGEBRA_DIM))
    dx1[..., 0, 0] = 1.0
    dx2 = np.zeros(ch.shape + (2, ALGEBRA_DIM))
    dx2[..., 1, 0] = 1.0
    s1 = hodge_star(OneForm(ch, dx1))
    s2 = hodge_star(OneForm(ch, dx2))
    np.testing.assert_allclose(s1.data, dx2, atol=1e-14)
    np.testing.assert_allclose(s2.data, -dx1, atol=1e-14)


def test_double_star_signature(ann32, shell12):
    w2 = random_smooth_field(ann32, "oneform", 14)
    ss = hodge_star(hodge_star(w2))
    np.testing.assert_allclose(ss.data, -w2.data, atol=1e-13)
    w3 = random_smooth_field(shell12, "oneform", 15)
    ss3 = hodge_star(hodge_star(w3))
    np.testing.assert_allclose(ss3.data, w3.data, atol=1e-13)


def test_codiff_squared_vanishes_flat_case():
    # the untwisted codifferential squares to zero; discretely the star-route
    # composition telescopes, so the defect is pure roundoff (the twisted
    # version instead picks up a curvature contraction and is not zero)
    from gaugekit.fields import TwoForm

    for n in (32, 64):
        ch = build_chart("annulus", (n, n))
        th, r = ch.mesh()
        data = np.zeros(ch.shape + TwoForm.value_shape(ch))
        data[..., 0, 0] = np.sin(th) * np.sin(np.pi * (r - 0.5) / 0.5)
        data[..., 0, 2] = np.cos(2 * th) * (r - 0.5) * (1.0 - r)
        w = TwoForm(ch, data)
        dd = codiff_A(codiff_2form(w, None), None, form="pointwise")
        assert float(np.max(np.abs(dd.data))) < 1e-12


def test_obstruction_chain_manufactured_value():
    # slab, A = 0, f = sin(pi x_n) e1: the chain returns pi^3 e1 at x_n = 0
    errs = []
    for n in (48, 96):
        ch = build_chart("periodic_slab", (n, n))
        x = ch.mesh()[-1]
        f = Section(ch, np.sin(np.pi * x)[..., None] * np.eye(ALGEBRA_DIM)[0])
        T = boundary_operator_T(f, None)
        errs.append(float(np.max(np.abs(T.values[0][..., 0] - np.pi**3))))
    assert errs[1] < errs[0] / 3.0
    assert errs[1] < 0.02 * np.pi**3


def test_flat_boundary_operator_kernel_profile():
    # phi'(r0) = -2 H(r0) phi(r0) puts phi e1 in the kernel on the inner face
    errs = []
    for n in (64, 128):
        ch = build_chart("annulus", (n, n))
        r = ch.mesh()[-1]
        r0 = ch.coords[1][0]
        phi = np.exp(-2.0 * (r - r0) / r0)
        f = Section(ch, phi[..., None] * np.eye(ALGEBRA_DIM)[0])
        t0 = boundary_operator_T0(f)
        errs.append(float(np.max(np.abs(t0.values[0]))))
    assert errs[1] < errs[0] / 3.0
    assert errs[1] < 5e-3


def test_boundary_operators_are_linear(ann32):
    A = _rand_conn(ann32, 18)
    f1 = random_smooth_field(ann32, "section", 19)
    f2 = random_smooth_field(ann32, "section", 20)
    both = boundary_operator_T(Section(ann32, f1.data + f2.data), A)
    t1 = boundary_operator_T(f1, A)
    t2 = boundary_operator_T(f2, A)
    for side in (0, 1):
        lhs = both.values[side]
        rhs = t1.values[side] + t2.values[side]
        scale = max(float(np.max(np.abs(lhs))), 1.0)
        assert float(np.max(np.abs(lhs - rhs))) < 1e-12 * scale


def test_interior_supported_fields_have_zero_trace():
    ch = build_chart("annulus", (64, 64))
    A = _rand_conn(ch, 21)
    th, r = ch.mesh()
    r0, r1 = ch.coords[1][0], ch.coords[1][-1]
    s = (r - r0) / (r1 - r0)
    prof = np.where((s > 0.35) & (s < 0.65), np.sin(np.pi * (s - 0.35) / 0.3) ** 2, 0.0)
    f = Section(ch, (prof * np.cos(th))[..., None] * np.eye(ALGEBRA_DIM)[2])
    t0 = boundary_operator_T0(f)
    T = boundary_operator_T(f, A)
    for side in (0, 1):
        assert float(np.max(np.abs(t0.values[side]))) == 0.0
        assert float(np.max(np.abs(T.values[side]))) == 0.0


def test_smallest_ritz_value_matches_slab_mode():
    # Dirichlet ground mode sin(pi x_n) with unit height: lambda = pi^2
    ch = build_chart("periodic_slab", (32, 32))
    lam, mode = ritz_smallest(Connection.flat(ch), tol=1e-8, solve_tol=1e-10)
    assert abs(lam - np.pi**2) / np.pi**2 < 0.01
    x = ch.mesh()[-1]
    prof = np.abs(mode.data).max(axis=(0, -1))
    oracle = np.sin(np.pi * x[0, :])
    np.testing.assert_allclose(prof / prof.max(), oracle, atol=0.01)


def test_expansion_identity_converges():
    from gaugekit.harness import _expansion_rhs

    ratios, hs = [], []
    for n in (32, 64):
        ch = build_chart("annulus", (n, n))
        A = _rand_conn(ch, 22)
        f = random_smooth_field(ch, "section", 23)
        lhs = laplacian_A(f, A, form="adjoint")
        rhs = _expansion_rhs(f, A)
        ii = ch.interior_slice()
        num = float(np.max(np.abs(lhs.data[ii] - rhs.data[ii])))
        den = max(float(np.max(np.abs(lhs.data[ii]))), 1e-30)
        ratios.append(num / den)
        hs.append(max(ch.h))
    order = np.log(ratios[0] / ratios[1]) / np.log(hs[0] / hs[1])
    assert order > 1.5
