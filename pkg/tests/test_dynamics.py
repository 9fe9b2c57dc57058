import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from mobsir.analysis import final_size
from mobsir.dynamics import (CLAMP_TOL, CompartmentState, EpidemicParams, IntegratorConfig,
                             RecoveryMode, _clamp, classical_sir, derivatives, seed_state,
                             simulate, step)
from mobsir.exceptions import ConfigurationError, ShapeError, StiffnessError
from mobsir.network import MobilityNetwork, SeedStrategy, select_seed


def isolated(N=1000.0):
    return MobilityNetwork.from_arrays([N], np.zeros((1, 1)))


def pair():
    # 50 people per day travel from location 2 to location 1 (0-based: flows[0, 1])
    return MobilityNetwork.from_arrays([1000.0, 1000.0], [[0.0, 50.0], [0.0, 0.0]])


@st.composite
def scenarios(draw):
    n = draw(st.integers(1, 5))
    N = np.array(draw(st.lists(st.floats(100, 1e5), min_size=n, max_size=n)))
    u = np.array(draw(st.lists(st.floats(0, 1), min_size=n * n, max_size=n * n))).reshape(n, n)
    flows = u * 0.05 * N[np.newaxis, :]
    np.fill_diagonal(flows, 0.0)
    net = MobilityNetwork.from_arrays(N, flows)
    params = EpidemicParams(draw(st.floats(0, 1)), draw(st.floats(0, 1)), draw(st.floats(0, 1)),
                            draw(st.sampled_from(list(RecoveryMode))))
    seed = draw(st.integers(0, n - 1))
    frac = draw(st.floats(1e-4, 0.5))
    scheme = draw(st.sampled_from(["euler", "rk4"]))
    return net, params, seed_state(net, seed, frac), IntegratorConfig(scheme, 0.1, 15.0)


class TestDerivatives:
    def test_no_infection_no_change(self, net16):
        st0 = CompartmentState(0, net16.populations, np.zeros(16), np.zeros(16))
        for d in derivatives(st0, net16, EpidemicParams(0.7, 0.3, 1.0)):
            assert not d.any()

    def test_isolated_location(self):
        st0 = CompartmentState(0, [900.0], [100.0], [0.0])
        dS, dI, dR = derivatives(st0, isolated(), EpidemicParams(0.3, 0.1, 1.0))
        assert dS[0] == pytest.approx(-27.0, abs=1e-12)
        assert dI[0] == pytest.approx(17.0, abs=1e-12)
        assert dR[0] == pytest.approx(10.0, abs=1e-12)

    def test_normalized_recovery(self):
        st0 = CompartmentState(0, [900.0], [100.0], [0.0])
        dS, dI, dR = derivatives(st0, isolated(), EpidemicParams(0.3, 0.1, 1.0, "normalized"))
        assert dR[0] == pytest.approx(0.01, abs=1e-15)
        assert dI[0] == pytest.approx(27.0 - 0.01, abs=1e-12)

    def test_imported_infection(self):
        st0 = CompartmentState(0, [1000.0, 900.0], [0.0, 100.0], [0.0, 0.0])
        dS, _, _ = derivatives(st0, pair(), EpidemicParams(0.3, 0.1, 1.0))
        # 1 * 1000 * (50 * 100/1000) * 0.3 / (1000 + 50)
        assert dS[0] == pytest.approx(-1500.0 / 1050.0, rel=1e-14)

    def test_alpha_scales_import(self):
        st0 = CompartmentState(0, [1000.0, 900.0], [0.0, 100.0], [0.0, 0.0])
        full = derivatives(st0, pair(), EpidemicParams(0.3, 0.1, 1.0))[0][0]
        half = derivatives(st0, pair(), EpidemicParams(0.3, 0.1, 0.5))[0][0]
        assert half == pytest.approx(0.5 * full, rel=1e-14)
        assert derivatives(st0, pair(), EpidemicParams(0.3, 0.1, 0.0))[0][0] == 0.0

    def test_rates_sum_to_zero(self, net16):
        N = net16.populations
        rng = np.random.default_rng(0)
        I = rng.uniform(0, 0.3, 16) * N
        R = rng.uniform(0, 0.3, 16) * N
        st0 = CompartmentState(0, N - I - R, I, R)
        dS, dI, dR = derivatives(st0, net16, EpidemicParams(0.6, 0.2, 0.8))
        np.testing.assert_allclose(dS + dI + dR, 0.0, atol=1e-12 * N.max())

    def test_dimension_mismatch(self, net16):
        with pytest.raises(ShapeError):
            derivatives(CompartmentState(0, [1.0], [0.0], [0.0]), net16, EpidemicParams(0.1, 0.1))

    @pytest.mark.parametrize("kw", [dict(beta=1.2), dict(mu=-0.1), dict(alpha=2.0)])
    def test_param_bounds(self, kw):
        base = dict(beta=0.3, mu=0.1, alpha=1.0)
        base.update(kw)
        with pytest.raises(ConfigurationError):
            EpidemicParams(**base)


class TestStep:
    def test_zero_derivatives(self, net16):
        N = net16.populations
        st0 = CompartmentState(2.0, N, np.zeros(16), np.zeros(16))
        st1 = step(st0, net16, EpidemicParams(0.5, 0.2), IntegratorConfig("rk4", 0.1, 1))
        assert st1.t == pytest.approx(2.1)
        np.testing.assert_array_equal(st1.S, N)

    def test_euler_hand_arithmetic(self):
        st0 = CompartmentState(0, [900.0], [100.0], [0.0])
        st1 = step(st0, isolated(), EpidemicParams(0.3, 0.1), IntegratorConfig("euler", 0.1, 1))
        assert st1.S[0] == pytest.approx(897.3, abs=1e-9)
        assert st1.I[0] == pytest.approx(101.7, abs=1e-9)
        assert st1.R[0] == pytest.approx(1.0, abs=1e-12)

    def test_euler_rk4_gap_is_second_order(self, net16):
        params = EpidemicParams(0.5, 0.2, 1.0)
        traj = simulate(net16, params, seed_state(net16, 0), IntegratorConfig(horizon=25))
        mid = traj.final
        gaps = []
        for dt in (0.2, 0.1, 0.05):
            e = step(mid, net16, params, IntegratorConfig("euler", dt, dt))
            r = step(mid, net16, params, IntegratorConfig("rk4", dt, dt))
            gaps.append(np.abs(e.I - r.I).max())
        assert gaps[0] / gaps[1] == pytest.approx(4.0, rel=0.05)
        assert gaps[1] / gaps[2] == pytest.approx(4.0, rel=0.05)

    def test_stiffness_error(self):
        st0 = CompartmentState(0, [500.0], [500.0], [0.0])
        with pytest.raises(StiffnessError, match="dt"):
            step(st0, isolated(), EpidemicParams(1.0, 0.1), IntegratorConfig("euler", 5.0, 5.0))

    def test_clamp(self):
        y = np.array([[1.0, -0.5 * CLAMP_TOL], [0.0, 2.0]])
        out = _clamp(y, 0.0)
        assert out[0, 1] == 0.0 and out.min() == 0.0
        with pytest.raises(StiffnessError):
            _clamp(np.array([-2 * CLAMP_TOL]), 0.0)


class TestSimulate:
    def test_length_and_spacing(self, net16):
        integ = IntegratorConfig("rk4", 0.1, 300)
        traj = simulate(net16, EpidemicParams(0.5, 0.2), seed_state(net16, 3), integ)
        assert len(traj) == 3001
        assert traj.t[0] == 0.0
        np.testing.assert_allclose(np.diff(traj.t), 0.1, rtol=1e-12)
        assert len(simulate(net16, EpidemicParams(0.5, 0.2), seed_state(net16, 3),
                            IntegratorConfig("rk4", 0.3, 1.0))) == 4

    def test_zero_infection_constant(self, net16):
        N = net16.populations
        st0 = CompartmentState(0, N, np.zeros(16), np.zeros(16))
        traj = simulate(net16, EpidemicParams(0.9, 0.1), st0, IntegratorConfig(horizon=20))
        assert np.all(traj.S == N) and not traj.I.any() and not traj.R.any()

    def test_no_transmission(self, net16):
        traj = simulate(net16, EpidemicParams(0.0, 0.2), seed_state(net16, 5, 0.1),
                        IntegratorConfig(horizon=50))
        assert np.all(traj.S == traj.S[0])
        assert np.all(np.diff(traj.I, axis=0) <= 0)
        assert np.all(np.diff(traj.R, axis=0) >= 0)

    def test_alpha_zero_is_classical(self, net16):
        integ = IntegratorConfig("rk4", 0.1, 300)
        N = net16.populations
        rng = np.random.default_rng(5)
        I0 = rng.uniform(0, 0.01, 16) * N
        init = CompartmentState(0, N - I0, I0, np.zeros(16))
        traj = simulate(net16, EpidemicParams(0.5, 0.2, 0.0), init, integ)
        s, i, r = traj.fractions()
        for k in range(16):
            ref = classical_sir(init.S[k] / N[k], I0[k] / N[k], 0.0, 0.5, 0.2, integ)
            assert np.abs(s[:, k] - ref.S[:, 0]).max() <= 1e-9
            assert np.abs(i[:, k] - ref.I[:, 0]).max() <= 1e-9
            assert np.abs(r[:, k] - ref.R[:, 0]).max() <= 1e-9

    def test_rejects_unbalanced_initial_state(self, net16):
        N = net16.populations
        with pytest.raises(ConfigurationError):
            simulate(net16, EpidemicParams(0.5, 0.2), CompartmentState(0, N, N * 0.1, 0 * N))

    def test_deterministic(self, net16):
        a = simulate(net16, EpidemicParams(0.5, 0.2, 0.7), seed_state(net16, 2), IntegratorConfig(horizon=40))
        b = simulate(net16, EpidemicParams(0.5, 0.2, 0.7), seed_state(net16, 2), IntegratorConfig(horizon=40))
        assert a.S.tobytes() == b.S.tobytes() and a.I.tobytes() == b.I.tobytes()
        assert a.network_fingerprint == net16.fingerprint()

    def test_permutation_symmetry(self, net16):
        order = np.random.default_rng(9).permutation(16)
        params = EpidemicParams(0.5, 0.2, 0.9)
        integ = IntegratorConfig(horizon=80)
        base = simulate(net16, params, seed_state(net16, int(order[4])), integ)
        perm = simulate(net16.permuted(order), params, seed_state(net16.permuted(order), 4), integ)
        for a, b in ((base.S, perm.S), (base.I, perm.I), (base.R, perm.R)):
            np.testing.assert_allclose(b, a[:, order], rtol=1e-10, atol=1e-7)

    @settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
    @given(scenarios())
    def test_invariants(self, case):
        net, params, init, integ = case
        traj = simulate(net, params, init, integ)
        N = net.populations
        total = traj.S + traj.I + traj.R
        assert np.all(np.abs(total - N) <= 1e-6 * N)
        assert np.all(np.diff(traj.S, axis=0) <= 0)
        assert np.all(np.diff(traj.R, axis=0) >= 0)
        assert traj.S.min() >= 0 and traj.I.min() >= 0 and traj.R.min() >= 0


class TestClassical:
    def test_no_infection(self):
        traj = classical_sir(1.0, 0.0, 0.0, 0.5, 0.2, IntegratorConfig(horizon=10))
        assert np.all(traj.S == 1.0) and not traj.I.any()

    def test_conservation(self):
        traj = classical_sir(0.99, 0.01, 0.0, 0.8, 0.1, IntegratorConfig(horizon=200))
        assert np.abs(traj.S + traj.I + traj.R - 1.0).max() <= 1e-12

    def test_final_size(self):
        traj = classical_sir(1 - 1e-4, 1e-4, 0.0, 0.5, 0.2, IntegratorConfig(horizon=300))
        assert traj.R[-1, 0] == pytest.approx(final_size(2.5), abs=1e-3)

    def test_fractions_must_sum_to_one(self):
        with pytest.raises(ConfigurationError):
            classical_sir(0.5, 0.1, 0.0, 0.5, 0.2)

    def test_vectorized_columns_are_independent(self):
        integ = IntegratorConfig(horizon=50)
        i0 = np.array([0.0, 1e-3, 0.05])
        many = classical_sir(1 - i0, i0, 0.0, 0.5, 0.2, integ)
        assert many.S.shape == (501, 3)
        for k, v in enumerate(i0):
            one = classical_sir(1 - v, v, 0.0, 0.5, 0.2, integ)
            np.testing.assert_array_equal(many.I[:, k], one.I[:, 0])


class TestSeedState:
    def test_counts(self):
        net = MobilityNetwork.from_arrays([10000.0, 500.0, 2000.0], np.zeros((3, 3)))
        st0 = seed_state(net, 0, 0.001)
        assert st0.I[0] == pytest.approx(10.0) and st0.S[0] == pytest.approx(9990.0)
        np.testing.assert_array_equal(st0.I[1:], 0.0)
        np.testing.assert_array_equal(st0.S[1:], [500.0, 2000.0])
        np.testing.assert_array_equal(st0.R, 0.0)
        np.testing.assert_array_equal(st0.totals, net.populations)

    def test_invalid(self, net16):
        with pytest.raises(IndexError):
            seed_state(net16, 16)
        with pytest.raises(ConfigurationError):
            seed_state(net16, 0, 1.0)

    def test_with_strategy(self, net16):
        k = select_seed(net16, SeedStrategy("strongest"))
        assert seed_state(net16, k).I.argmax() == k
