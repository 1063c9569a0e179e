import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lwrdg.config import BoundarySpec, InitialCondition, NetworkConfig, RoadSpec, SolverConfig
from lwrdg.dg import (Mesh1D, RoadState, basis_tables, dg_residual, evaluate, project_initial,
                      sample, trace_left, trace_right)
from lwrdg.errors import ConfigError, DomainError
from lwrdg.fundamental_diagram import GREENSHIELDS as F1
from lwrdg.fundamental_diagram import FluxModel, godunov_array, lax_friedrichs_array
from lwrdg.limiters import TvbConfig
from lwrdg.network import run

PSI = [lambda x: np.ones_like(x), lambda x: x, lambda x: x**2 - 1 / 3, lambda x: x**3 - 0.6 * x]


def test_basis_orthogonal_and_mass():
    xq, wq = np.polynomial.legendre.leggauss(12)
    for k in range(4):
        tabs = basis_tables(k)
        for l in range(k + 1):
            assert np.allclose(tabs.phi_q[l], PSI[l](tabs.xq), atol=1e-15)
            for m in range(k + 1):
                ip = np.sum(wq * PSI[l](xq) * PSI[m](xq))
                expected = tabs.mass[l] if l == m else 0.0
                assert ip == pytest.approx(expected, abs=1e-14)
    assert basis_tables(3).mass == pytest.approx([2.0, 2 / 3, 8 / 45, 8 / 175])


def test_lobatto_nodes():
    assert len(basis_tables(0).x_gl) == 2 and len(basis_tables(1).x_gl) == 2
    assert len(basis_tables(2).x_gl) == 3 and len(basis_tables(3).x_gl) == 3
    assert basis_tables(2).w_gl.sum() == pytest.approx(1.0)
    with pytest.raises(ConfigError):
        basis_tables(4)


def test_mesh():
    m = Mesh1D.uniform(1.0, 2.0, 40)
    assert m.n_cells == 40 and m.edges[0] == 1.0 and m.edges[-1] == 2.0
    assert math.fsum(m.widths) == pytest.approx(1.0, abs=1e-13)
    assert list(m.locate([1.0, 1.0249, 1.5, 2.0])) == [0, 0, 20, 39]
    with pytest.raises(ConfigError):
        Mesh1D.uniform(0, 1, 0)
    with pytest.raises(ConfigError):
        RoadState(m, 1, np.zeros((40, 3)))


def test_project_constant_exact():
    st_ = project_initial(Mesh1D.uniform(0, 1, 7), 2, lambda x: 0.66 + 0 * x)
    assert np.all(st_.coeffs[:, 0] == 0.66) and np.all(st_.coeffs[:, 1:] == 0.0)


def test_project_linear_one_cell():
    st_ = project_initial(Mesh1D.uniform(0, 1, 1), 1, lambda x: x)
    # x = 0.5 + 0.5 xi on the single cell
    assert st_.coeffs[0] == pytest.approx([0.5, 0.5], abs=1e-15)
    st_ = project_initial(Mesh1D.uniform(0, 1, 1), 2, lambda x: x * x)
    # x^2 = 1/3 + 1/2 xi + 1/4 psi_2 on [0,1]
    assert st_.coeffs[0] == pytest.approx([1 / 3, 0.5, 0.25], abs=1e-14)


def test_project_sine_cell_averages():
    mesh = Mesh1D.uniform(0, 1, 10)
    st_ = project_initial(mesh, 1, lambda x: 0.5 + 0.5 * np.sin(2 * np.pi * x))
    e = mesh.edges
    # closed-form antiderivative 0.5 x - cos(2 pi x) / (4 pi)
    prim = 0.5 * e - np.cos(2 * np.pi * e) / (4 * np.pi)
    assert np.max(np.abs(st_.averages - np.diff(prim) / mesh.widths)) <= 1e-12


@given(st.integers(0, 3), st.lists(st.floats(-1, 1), min_size=4, max_size=4))
def test_project_reproduces_polynomials(k, c):
    c = np.array(c[: k + 1])
    mesh = Mesh1D.uniform(0, 1, 3)
    tabs = basis_tables(k)

    def poly(x):
        j = np.clip((x * 3).astype(int), 0, 2)
        xi = (x - mesh.centers[j]) / (0.5 * mesh.widths[j])
        return sum(c[l] * PSI[l](xi) for l in range(k + 1))

    st_ = project_initial(mesh, k, poly)
    assert np.allclose(st_.coeffs, np.tile(c, (3, 1)), atol=1e-13)


def test_traces():
    m = Mesh1D.uniform(0, 1, 1)
    s1 = RoadState(m, 1, np.array([[0.5, 0.1]]))
    assert trace_right(s1, 0) == pytest.approx(0.6) and trace_left(s1, 0) == pytest.approx(0.4)
    s2 = RoadState(m, 2, np.array([[0.5, 0.0, 0.3]]))
    assert trace_left(s2, 0) == pytest.approx(0.7) and trace_right(s2, 0) == pytest.approx(0.7)
    s0 = RoadState(m, 0, np.array([[0.66]]))
    assert trace_left(s0, 0) == 0.66 == trace_right(s0, 0)
    with pytest.raises(DomainError):
        trace_left(s0, 1)


@given(st.integers(0, 3), arrays(float, (5, 4), elements=st.floats(-1, 1)))
def test_traces_match_dense_evaluation(k, c):
    mesh = Mesh1D.uniform(0, 1, 5)
    state = RoadState(mesh, k, c[:, : k + 1])
    tabs = basis_tables(k)
    for j in range(5):
        left = state.coeffs[j] @ tabs.values([-1.0])[:, 0]
        right = state.coeffs[j] @ tabs.values([1.0])[:, 0]
        assert abs(trace_left(state, j) - left) <= 1e-14
        assert abs(trace_right(state, j) - right) <= 1e-14
    # evaluate at cell centres gives the even part of the expansion
    centers = evaluate(state, mesh.centers)
    expect = state.coeffs[:, 0] - (state.coeffs[:, 2] / 3 if k >= 2 else 0)
    assert np.allclose(centers, expect, atol=1e-14)


@pytest.mark.parametrize("flux", ["lf", "godunov"])
@pytest.mark.parametrize("k", range(4))
def test_constant_state_is_steady(backend, flux, k):
    mesh = Mesh1D.uniform(0, 1, 16)
    for c in (0.0, 0.3, 0.5, 0.9):
        state = RoadState(mesh, k, np.column_stack([np.full(16, c)] + [np.zeros(16)] * k))
        fb = F1.f(c)
        res = dg_residual(state, F1, fb, fb, flux)
        # weak-form residual, before the inverse mass matrix and 2/dx scaling
        weak = res * basis_tables(k).mass * (0.5 * mesh.widths)[:, None]
        assert np.max(np.abs(weak)) <= 1e-14
        assert np.max(np.abs(res[:, 0])) <= 1e-14


@pytest.mark.parametrize("flux", ["lf", "godunov"])
def test_p0_is_finite_volume(backend, flux):
    rng = np.random.default_rng(1)
    mesh = Mesh1D.uniform(0, 1, 30)
    u = rng.uniform(0, 1, 30)
    state = RoadState(mesh, 0, u[:, None])
    res = dg_residual(state, F1, 0.1, 0.2, flux)[:, 0]
    num = lax_friedrichs_array if flux == "lf" else godunov_array
    F = np.concatenate(([0.1], num(F1, u[:-1], u[1:]), [0.2]))
    assert np.allclose(res, -np.diff(F) / mesh.widths, atol=1e-13)


@given(st.integers(0, 3), arrays(float, (8, 4), elements=st.floats(0, 1)),
       st.floats(0, 0.25), st.floats(0, 0.25))
def test_local_conservation(k, c, fl, fr):
    mesh = Mesh1D.uniform(0, 1, 8)
    c = c[:, : k + 1].copy()
    c[:, 1:] *= 0.2
    state = RoadState(mesh, k, c)
    tabs = basis_tables(k)
    res = dg_residual(state, F1, fl, fr, "lf")
    F = np.concatenate(([fl], lax_friedrichs_array(F1, c[:-1] @ tabs.psi_right, c[1:] @ tabs.psi_left), [fr]))
    assert np.max(np.abs(res[:, 0] * mesh.widths + np.diff(F))) <= 1e-14


def _linear_model():
    return FluxModel(f=lambda r: 1.0 * np.asarray(r), f_prime=lambda r: np.ones_like(np.asarray(r, float)),
                     rho_max=1.0, sigma=1.0, lf_alpha=1.0, name="linear")


@given(st.integers(0, 3), arrays(float, (6, 4), elements=st.floats(-1, 1)))
def test_quadrature_exact_for_linear_flux(k, c):
    # with f = rho the volume term is int rho_h dpsi, a polynomial of degree 2k-1
    mesh = Mesh1D.uniform(0, 1, 6)
    state = RoadState(mesh, k, c[:, : k + 1])
    res = dg_residual(state, _linear_model(), 0.0, 0.0, "lf")
    xe, we = np.polynomial.legendre.leggauss(20)
    tabs = basis_tables(k)
    vals = state.coeffs @ tabs.values(xe)
    dpsi = np.array([np.polynomial.Polynomial(np.polynomial.legendre.leg2poly(
        np.polynomial.legendre.Legendre.basis(l).coef)).deriv()(xe) for l in range(k + 1)])
    lead = np.array([math.factorial(2 * l) / (2.0**l * math.factorial(l) ** 2) for l in range(k + 1)])
    vol = (vals * we) @ (dpsi / lead[:, None]).T
    tr_r, tr_l = state.coeffs @ tabs.psi_right, state.coeffs @ tabs.psi_left
    F = np.concatenate(([0.0], tr_r[:-1], [0.0]))  # upwind for unit speed
    expect = (vol - F[1:, None] * tabs.psi_right + F[:-1, None] * tabs.psi_left)
    expect *= tabs.inv_mass * (2.0 / mesh.widths)[:, None]
    assert np.allclose(res, expect, atol=1e-12)


def test_generic_path_matches_quadratic_kernel(backend):
    rng = np.random.default_rng(5)
    generic = FluxModel(f=F1.f, f_prime=F1.f_prime, rho_max=1.0, sigma=0.5, lf_alpha=1.0)
    for k in range(4):
        c = rng.uniform(0, 1, (12, k + 1))
        c[:, 1:] *= 0.1
        state = RoadState(Mesh1D.uniform(0, 1, 12), k, c)
        for flux in ("lf", "godunov"):
            a = dg_residual(state, F1, 0.1, 0.2, flux)
            b = dg_residual(state, generic, 0.1, 0.2, flux)
            assert np.max(np.abs(a - b)) <= 1e-12


def test_unknown_flux_rejected():
    state = RoadState(Mesh1D.uniform(0, 1, 2), 0, np.zeros((2, 1)))
    with pytest.raises(ConfigError):
        dg_residual(state, F1, 0, 0, "roe")


def test_linear_advection_converges_at_order_two():
    errs = []
    for n in (20, 40, 80):
        road = RoadSpec("1", 0.0, 1.0, _linear_model(), n, InitialCondition.sine(0.5, 0.25, 2.0))
        cfg = NetworkConfig((road,), (), (BoundarySpec("1", "periodic"),),
                            SolverConfig(degree=1, t_end=0.5, cfl={1: 0.3}, bp=False,
                                         tvb=TvbConfig(enabled=False)))
        st_ = run(cfg).state.roads[0]
        xq, wq = np.polynomial.legendre.leggauss(4)
        x = st_.mesh.centers[:, None] + 0.5 * st_.mesh.widths[:, None] * xq
        vals = st_.coeffs @ basis_tables(1).values(xq)
        exact = 0.5 + 0.25 * np.sin(2 * np.pi * (x - 0.5))
        errs.append(np.sum(0.5 * st_.mesh.widths[:, None] * wq * np.abs(vals - exact)))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(np.abs(orders - 2.0) < 0.2), orders


def test_sample():
    state = RoadState(Mesh1D.uniform(0, 1, 2), 1, np.array([[0.2, 0.1], [0.6, 0.0]]))
    x, rho, avg = sample(state, 2)
    assert x == pytest.approx([0.125, 0.375, 0.625, 0.875])
    assert rho == pytest.approx([0.15, 0.25, 0.6, 0.6])
    assert list(avg) == [0.2, 0.2, 0.6, 0.6]
