"""Fields: inner products, boundary traces, seeded smoothness, dump format."""

import numpy as np
import pytest

from gaugekit import (
    ALGEBRA_DIM,
    OneForm,
    RankMismatch,
    ScalarField,
    Section,
    build_chart,
    check_dbc,
    dump_field,
    l2_inner,
    l2_norm,
    load_field,
    random_smooth_field,
)
from gaugekit.fields import flat_d, normal_component, trace_boundary


def _unit_section(ch, k):
    data = np.zeros(ch.shape + (ALGEBRA_DIM,))
    data[..., k] = 1.0
    return Section(ch, data)


def test_inner_product_positive_and_symmetric(ann32):
    rng = np.random.default_rng(0)
    for _ in range(10):
        u = Section(ann32, rng.standard_normal(ann32.shape + (ALGEBRA_DIM,)))
        v = Section(ann32, rng.standard_normal(ann32.shape + (ALGEBRA_DIM,)))
        assert l2_inner(u, u) > 0
        s = abs(l2_inner(u, v) - l2_inner(v, u))
        assert s < 1e-12 * max(1.0, abs(l2_inner(u, v)))
    zero = Section(ann32, np.zeros(ann32.shape + (ALGEBRA_DIM,)))
    assert l2_inner(zero, zero) == 0.0
    assert l2_norm(zero) == 0.0


def test_constant_sections_on_unit_slab_are_orthonormal():
    ch = build_chart("periodic_slab", (16, 16), length=1.0, height=1.0)
    for i in range(ALGEBRA_DIM):
        for j in range(ALGEBRA_DIM):
            ip = l2_inner(_unit_section(ch, i), _unit_section(ch, j))
            assert abs(ip - (1.0 if i == j else 0.0)) < 1e-12


def test_inner_product_rejects_rank_mixing(ann32):
    u = _unit_section(ann32, 0)
    w = OneForm(ann32, np.zeros(ann32.shape + (2, ALGEBRA_DIM)))
    with pytest.raises(RankMismatch):
        l2_inner(u, w)


def test_dbc_trivial_cases(ann32):
    zero = Section(ann32, np.zeros(ann32.shape + (ALGEBRA_DIM,)))
    ok, worst = check_dbc(zero)
    assert ok and worst == 0.0

    # dr e1: only the (free) normal slot is populated
    dr = np.zeros(ann32.shape + (2, ALGEBRA_DIM))
    dr[..., 1, 0] = 1.0
    ok, worst = check_dbc(OneForm(ann32, dr))
    assert ok and worst == 0.0

    # dtheta e1: a unit tangential violation
    dth = np.zeros(ann32.shape + (2, ALGEBRA_DIM))
    dth[..., 0, 0] = 1.0
    ok, worst = check_dbc(OneForm(ann32, dth))
    assert not ok and abs(worst - 1.0) < 1e-15


def test_flat_d_kills_constants(ann32):
    c = Section(ann32, np.ones(ann32.shape + (ALGEBRA_DIM,)))
    d = flat_d(c)
    assert float(np.max(np.abs(d.data))) < 1e-13


def test_flat_d_matches_analytic_derivative():
    errs = []
    for n in (32, 64):
        ch = build_chart("annulus", (n, n))
        th, r = ch.mesh()
        f = Section(ch, np.sin(th)[..., None] * np.eye(ALGEBRA_DIM)[1])
        d = flat_d(f)
        errs.append(float(np.max(np.abs(d.data[..., 0, 1] - np.cos(th)))))
    assert errs[0] < 0.01 and errs[1] < errs[0] / 3.0


def test_trace_boundary_samples_faces(ann32):
    th, r = ann32.mesh()
    f = Section(ann32, r[..., None] * np.eye(ALGEBRA_DIM)[0])
    tb = trace_boundary(f)
    r0, r1 = ann32.coords[1][0], ann32.coords[1][-1]
    np.testing.assert_allclose(tb.values[0][..., 0], r0, atol=1e-14)
    np.testing.assert_allclose(tb.values[1][..., 0], r1, atol=1e-14)


def test_normal_component_orientation(ann32):
    # dr e1 pairs with the inward normal: +e1 inside, -e1 outside (g_rr = 1)
    data = np.zeros(ann32.shape + (2, ALGEBRA_DIM))
    data[..., 1, 0] = 1.0
    nc = normal_component(OneForm(ann32, data))
    np.testing.assert_allclose(nc.values[0][..., 0], 1.0, atol=1e-14)
    np.testing.assert_allclose(nc.values[1][..., 0], -1.0, atol=1e-14)
    assert float(np.max(np.abs(nc.values[0][..., 1:]))) == 0.0


def test_random_fields_deterministic(ann32):
    a = random_smooth_field(ann32, "oneform", 42)
    b = random_smooth_field(ann32, "oneform", 42)
    assert np.array_equal(a.data, b.data)
    c = random_smooth_field(ann32, "oneform", 43)
    assert not np.array_equal(a.data, c.data)


def test_random_fields_satisfy_dbc(ann32):
    for seed in range(8):
        for rank in ("section", "oneform"):
            f = random_smooth_field(ann32, rank, seed, dbc=True)
            ok, worst = check_dbc(f, tol=1e-14)
            assert ok, f"{rank} seed {seed} violates by {worst:.2e}"


def test_random_fields_decorrelate_across_seeds(ann64):
    fields = [random_smooth_field(ann64, "section", s) for s in range(20)]
    norms = [l2_norm(f) for f in fields]
    cors = []
    for i in range(20):
        for j in range(i + 1, 20):
            cors.append(abs(l2_inner(fields[i], fields[j])) / (norms[i] * norms[j]))
    assert np.mean(cors) < 0.9


def test_dump_reload_roundtrip(tmp_path, ann32):
    f = random_smooth_field(ann32, "oneform", 7)
    path = tmp_path / "field.txt"
    dump_field(f, str(path), seed=7)
    g = load_field(str(path))
    assert g.chart.kind == ann32.kind and g.chart.shape == ann32.shape
    np.testing.assert_allclose(g.data, f.data, atol=1e-15)
