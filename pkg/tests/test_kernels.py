import numpy as np
import pytest

from lwrdg import _pykernels, kernels
from lwrdg.dg import basis_tables

pytestmark = pytest.mark.skipif(not kernels.COMPILED_AVAILABLE, reason="compiled core not built")


@pytest.fixture
def core():
    from lwrdg import _core
    return _core


def _coeffs(rng, n, k):
    c = rng.uniform(0, 1, (n, k + 1))
    c[:, 1:] = rng.uniform(-0.2, 0.2, (n, k))
    return np.ascontiguousarray(c)


@pytest.mark.parametrize("k", range(4))
@pytest.mark.parametrize("flux_kind", [kernels.FLUX_LF, kernels.FLUX_GODUNOV])
def test_residual_agrees(core, k, flux_kind):
    rng = np.random.default_rng(k)
    t = basis_tables(k)
    c = _coeffs(rng, 50, k)
    w = np.full(50, 0.02)
    outs = []
    for mod in (_pykernels, core):
        out = np.empty_like(c)
        mod.residual_quadratic(c, w, t.phi_q, t.dphi_q, t.wq, t.psi_right, t.psi_left, t.inv_mass,
                               1.0, 1.0, flux_kind, 0.1, 0.2, out)
        outs.append(out)
    assert np.max(np.abs(outs[0] - outs[1])) <= 1e-12 * np.max(np.abs(outs[0]))


@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize("periodic", [False, True])
@pytest.mark.parametrize("M", [0.0, 10.0])
def test_tvb_agrees(core, k, periodic, M):
    rng = np.random.default_rng(10 + k)
    t = basis_tables(k)
    c = _coeffs(rng, 60, k)
    w = np.full(60, 1 / 60)
    a, b = c.copy(), c.copy()
    na = _pykernels.tvb_limit(a, w, t.psi_right, t.psi_left, M, periodic)
    nb = core.tvb_limit(b, w, t.psi_right, t.psi_left, M, periodic)
    assert na == nb and na > 0
    assert np.max(np.abs(a - b)) <= 1e-14


@pytest.mark.parametrize("k", range(4))
def test_bp_agrees(core, k):
    rng = np.random.default_rng(20 + k)
    t = basis_tables(k)
    c = _coeffs(rng, 80, k)
    c[:, 1:] *= 3
    a, b = c.copy(), c.copy()
    assert _pykernels.bp_limit(a, t.phi_gl, 0.0, 1.0, 1e-12) == core.bp_limit(b, t.phi_gl, 0.0, 1.0, 1e-12) == -1
    assert np.max(np.abs(a - b)) <= 1e-15
    c[17, 0] = 1.5
    assert core.bp_limit(c.copy(), t.phi_gl, 0.0, 1.0, 1e-12) == 17


def test_minmod_agrees(core):
    rng = np.random.default_rng(3)
    for _ in range(1000):
        a1, a2, a3 = rng.normal(size=3)
        thr = abs(rng.normal()) * 0.5
        assert core.minmod_bar(a1, a2, a3, thr) == float(_pykernels.minmod_bar(a1, a2, a3, thr))


def test_lp_scan_agrees(core):
    cons = np.array([[0.4, 0.3, 0.2], [0.6, 0.7, 0.25]])
    args = (0.0, 0.2, 0.0, 0.15, 1e-3, cons, 2e-3, 0.5, 0.5)
    a = _pykernels.lp_grid_scan(*args)
    b = core.lp_grid_scan(*args)
    assert np.allclose(a, b, atol=1e-15)


def test_use_switches_backend():
    with kernels.use("python"):
        assert kernels.backend_name() == "python"
    with kernels.use("compiled"):
        assert kernels.backend_name() == "compiled"
    with pytest.raises(ValueError):
        with kernels.use("fortran"):
            pass
