"""Exact eigenpairs: enumeration, PDE identity, analytic integrals
against Gauss quadrature, and discrete images."""

import numpy as np
import pytest

from rrteig.errors import AmbiguousCluster
from rrteig.exact import (
    FieldSample,
    align_exact_representative,
    enumerate_exact,
    field_for_mode,
    l2_project_exact,
    rt_interpolate_exact,
)
from rrteig.mesh import build_mesh, uniform_mesh

PI = np.pi
_GX, _GW = np.polynomial.legendre.leggauss(24)


def _quad2d(f, x0, x1, y0, y1):
    xm, xh = (x0 + x1) / 2, (x1 - x0) / 2
    ym, yh = (y0 + y1) / 2, (y1 - y0) / 2
    xg, yg = np.meshgrid(xm + xh * _GX, ym + yh * _GX)
    return float(xh * yh * np.sum(np.outer(_GW, _GW) * f(xg, yg)))


def test_enumeration_square():
    """First eigenvalues on [0, pi]^2: 2, 5, 5, 8, 10, 10, 13, 13, 17, 17, 18."""
    ex = enumerate_exact((PI, PI), count=11)
    np.testing.assert_allclose(
        [e.value for e in ex], [2, 5, 5, 8, 10, 10, 13, 13, 17, 17, 18],
        rtol=1e-12,
    )
    mults = [e.multiplicity for e in ex]
    assert mults == [1, 2, 2, 1, 2, 2, 2, 2, 2, 2, 1]


def test_lambda_50_multiplicity_three():
    """50 = 25 + 25 = 1 + 49: one (5,5) family plus a (1,7) pair."""
    ex = enumerate_exact((PI, PI), count=60)
    fifty = [e for e in ex if abs(e.value - 50.0) < 1e-9]
    assert len(fifty) == 3
    e = fifty[0]
    assert e.multiplicity == 3
    freqs = [(f.m, f.n) for f in e.frequencies]
    # sorted by m^4 + n^4: (5,5) -> 1250 before (1,7) -> 2402
    assert freqs == [(5, 5), (1, 7)]
    assert sorted(e.modes()) == [(1, 7), (5, 5), (7, 1)]


def test_enumeration_rectangle_domain():
    """On [0,1] x [0,2]: lambda = pi^2 (m^2 + n^2/4)."""
    ex = enumerate_exact((1.0, 2.0), count=4)
    want = sorted(
        PI**2 * (m * m + n * n / 4.0) for m in (1, 2) for n in (1, 2, 3)
    )[:4]
    np.testing.assert_allclose([e.value for e in ex], want, rtol=1e-12)


def test_eigenfunction_pde_identity():
    """-(u_xx + u_yy) = lambda u pointwise, and Dirichlet boundary zero."""
    fld = field_for_mode(2, 3)
    rng = np.random.default_rng(0)
    x = rng.uniform(0, PI, 50)
    y = rng.uniform(0, PI, 50)
    np.testing.assert_allclose(
        -(fld.uxx(x, y) + fld.uyy(x, y)), fld.value * fld.u(x, y),
        rtol=1e-12, atol=1e-12,
    )
    t = np.linspace(0, PI, 17)
    for bx, by in ((0 * t, t), (PI + 0 * t, t), (t, 0 * t), (t, PI + 0 * t)):
        np.testing.assert_allclose(fld.u(bx, by), 0.0, atol=1e-12)


def test_unit_l2_norm():
    for m, n in ((1, 1), (2, 3)):
        fld = field_for_mode(m, n)
        nrm2 = _quad2d(lambda x, y: fld.u(x, y) ** 2, 0, PI, 0, PI)
        assert nrm2 == pytest.approx(1.0, rel=1e-12)


def test_analytic_integrals_vs_quadrature():
    """Closed-form cell integrals agree with an independent Gauss oracle."""
    ex = enumerate_exact((PI, PI), count=2)[1]  # lambda = 5 cluster
    rng = np.random.default_rng(1)
    c = rng.standard_normal(2)
    fld = FieldSample(ex, c / np.linalg.norm(c))
    cell = (0.3, 1.1, 0.4, 0.9)
    assert fld.cell_integral_u(*cell) == pytest.approx(
        _quad2d(fld.u, *cell), rel=1e-12
    )
    assert fld.cell_integral_uxx_sq(*cell) == pytest.approx(
        _quad2d(lambda x, y: fld.uxx(x, y) ** 2, *cell), rel=1e-12
    )
    assert fld.cell_integral_uyy_sq(*cell) == pytest.approx(
        _quad2d(lambda x, y: fld.uyy(x, y) ** 2, *cell), rel=1e-12
    )


def test_mean_flux_vs_quadrature():
    fld = field_for_mode(2, 1)
    t, w = (_GX + 1) / 2, _GW / 2
    y0, y1, xi = 0.4, 0.9, 1.3
    want = np.sum(w * -fld.ux(xi, y0 + (y1 - y0) * t))
    assert fld.mean_flux_x(xi, y0, y1) == pytest.approx(want, rel=1e-12)
    x0, x1, yj = 0.1, 0.8, 2.0
    want = np.sum(w * -fld.uy(x0 + (x1 - x0) * t, yj))
    assert fld.mean_flux_y(yj, x0, x1) == pytest.approx(want, rel=1e-12)


def test_commuting_interpolation_identity(mesh_a0):
    """B sigma_I equals the exact cell integrals of div sigma = lambda u."""
    from rrteig.assembly import assemble_mixed

    system = assemble_mixed(mesh_a0)
    for m, n in ((1, 1), (2, 1)):
        fld = field_for_mode(m, n)
        sigma_i = rt_interpolate_exact(mesh_a0, fld)
        got = system.B @ sigma_i
        want = np.empty(mesh_a0.n_cells)
        nx, ny = mesh_a0.node_x, mesh_a0.node_y
        for j in range(mesh_a0.n2):
            for i in range(mesh_a0.n1):
                want[mesh_a0.cell_index(i, j)] = fld.value * (
                    fld.cell_integral_u(nx[i], nx[i + 1], ny[j], ny[j + 1])
                )
        assert np.max(np.abs(got - want)) <= 1e-12


def test_l2_projection_means(mesh_c0):
    fld = field_for_mode(1, 2)
    proj = l2_project_exact(mesh_c0, fld)
    nx, ny = mesh_c0.node_x, mesh_c0.node_y
    i, j = 2, 1
    area = (nx[i + 1] - nx[i]) * (ny[j + 1] - ny[j])
    want = _quad2d(fld.u, nx[i], nx[i + 1], ny[j], ny[j + 1]) / area
    assert proj[mesh_c0.cell_index(i, j)] == pytest.approx(want, rel=1e-12)


def test_align_representative_recovers_mode(mesh_a0, pairs_a0):
    """The aligned field for a simple eigenvalue is +/- the single mode."""
    ex = enumerate_exact((PI, PI), count=6)
    fld = align_exact_representative(pairs_a0[0], ex[0], mesh_a0)
    assert abs(abs(fld.coeffs[0]) - 1.0) < 1e-6


def test_align_representative_cluster_unit(mesh_a0, pairs_a0):
    ex = enumerate_exact((PI, PI), count=6)
    f1 = align_exact_representative(pairs_a0[1], ex[1], mesh_a0)
    f2 = align_exact_representative(pairs_a0[2], ex[2], mesh_a0)
    assert np.linalg.norm(f1.coeffs) == pytest.approx(1.0, rel=1e-12)
    # the two discrete members pick (nearly) orthogonal representatives
    assert abs(np.dot(f1.coeffs, f2.coeffs)) < 1e-6


def test_align_wrong_eigenvalue_raises(mesh_a0, pairs_a0):
    ex = enumerate_exact((PI, PI), count=6)
    with pytest.raises(AmbiguousCluster):
        align_exact_representative(pairs_a0[3], ex[0], mesh_a0)
