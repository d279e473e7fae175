"""Smoke tests for the python bindings against the compiled core."""

import math

import pytest

coopmc = pytest.importorskip("coopmc")


def table_setup(k=2):
    topo = coopmc.build_symmetric_ring(k)
    params = coopmc.DiffusionParams()
    params.s_a = 2000
    params.s_b = 150
    timing = coopmc.ProtocolTiming()
    return topo, params, timing


def test_geometry():
    topo = coopmc.build_symmetric_ring(3)
    assert topo.num_receivers() == 3
    assert coopmc.is_symmetric(topo)
    assert topo.tx_rx_distance(0) == pytest.approx(2.088061301782110, rel=1e-9)
    assert coopmc.distance(coopmc.Vec3(0, 0, 0), coopmc.Vec3(1.6, 0.48, 0)) == pytest.approx(
        1.6704490414256880, rel=1e-12
    )
    asym = coopmc.build_asymmetric_line(3)
    assert not coopmc.is_symmetric(asym)


def test_channel_against_scipy():
    scipy_stats = pytest.importorskip("scipy.stats")
    for mean in (0.3, 2.5, 17.0):
        for k in (0, 2, 9, 30):
            assert coopmc.poisson_cdf(k, mean) == pytest.approx(
                float(scipy_stats.poisson.cdf(k, mean)), rel=1e-10
            )
    # sphere observation vs numerical integration of the Gaussian kernel
    integrate = pytest.importorskip("scipy.integrate")
    t, r, d, D = 3e-5, 0.225e-6, 0.6e-6, 5e-9

    def integrand(mu, rho):
        return (
            rho
            * rho
            * math.exp(-(rho * rho + d * d - 2 * rho * d * mu) / (4 * D * t))
        )

    val, _ = integrate.dblquad(integrand, 0, r, -1, 1, epsabs=1e-16, epsrel=1e-10)
    pref = (4 * math.pi * D * t) ** -1.5 * 2 * math.pi
    assert coopmc.p_ob_sphere(t, r, d, D) == pytest.approx(pref * val, rel=1e-6)


def test_gains_and_error_report():
    topo, params, timing = table_setup()
    gains = coopmc.build_gains(topo, params, timing, 4)
    assert gains.symmetric()
    assert gains.tx_rx[0][1] < gains.tx_rx[0][0]

    thr = coopmc.Thresholds.shared(2, 3, 4)
    rep = coopmc.average_error(topo, params, timing, thr, 4, 0.5)
    assert rep.averaging == "exact"
    assert 0.0 <= rep.qbar_fc <= 1.0
    assert len(rep.q_fc) == 4
    for j in range(4):
        assert rep.q_fc[j] == pytest.approx(0.5 * rep.q_md[j] + 0.5 * rep.q_fa[j], abs=1e-12)


def test_simulation_determinism_and_agreement():
    topo, params, timing = table_setup()
    thr = coopmc.Thresholds.shared(2, 3, 4)
    sim = coopmc.SimConfig()
    sim.trials = 300
    sim.rng_seed = 12

    a = coopmc.estimate_error(topo, params, timing, thr, 4, 0.5, sim)
    b = coopmc.estimate_error(topo, params, timing, thr, 4, 0.5, sim)
    assert a.qbar == b.qbar
    assert list(a.err_when_1) == list(b.err_when_1)

    rep = coopmc.average_error(topo, params, timing, thr, 4, 0.5)
    # loose 4-sigma agreement on a small run
    assert abs(a.qbar - rep.qbar_fc) <= 4.0 * max(a.se_pooled, 1e-6)


def test_schemes_and_optimizer():
    topo, params, timing = table_setup(1)
    single = coopmc.single_link_error(topo, params, timing, 3, 3, 0.5)
    assert 0.0 <= single.qbar_fc <= 1.0

    topo3, params3, timing3 = table_setup(3)
    thr = coopmc.Thresholds.shared(3, 3, 2)
    maj = coopmc.majority_rule_error(topo3, params3, timing3, thr, 2, 3, 0.5)
    assert 0.0 <= maj.qbar_fc <= 1.0

    res = coopmc.optimize_sd(topo3, params3, timing3, 3, 0.5, 1, 8, 1, 8)
    assert 1 <= res.xi_rx_star <= 8
    assert 1 <= res.xi_fc_star <= 8
    assert res.evaluations == 64
    assert 0.0 <= res.q_star <= 1.0
