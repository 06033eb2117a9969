import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import bitraj as bt
from bitraj import errors

from conftest import SIGMA_X, SIGMA_Z, oracle_propagator, oracle_heisenberg


def two_segment_schedule(seed=0):
    rng = np.random.default_rng(seed)
    def herm():
        g = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        return 0.5 * (g + g.conj().T)
    return bt.HamiltonianSchedule(((0.0, 1.0, herm()), (1.0, 2.0, herm())))


class TestPropagator:
    def test_rabi_half_turn(self, rabi):
        u = bt.propagator(rabi.schedule, 0.0, np.pi).matrix
        np.testing.assert_allclose(u, -1j * SIGMA_X, atol=1e-12)

    def test_empty_interval_is_identity(self):
        sched = two_segment_schedule()
        u = bt.propagator(sched, 0.7, 0.7).matrix
        np.testing.assert_array_equal(u, np.eye(2))

    def test_piecewise_product(self):
        sched = two_segment_schedule(seed=3)
        u = bt.propagator(sched, 0.0, 2.0).matrix
        expected = oracle_propagator(sched, 0.0, 2.0)
        np.testing.assert_allclose(u, expected, atol=1e-12)

    def test_reversed_interval_raises(self):
        sched = two_segment_schedule()
        with pytest.raises(errors.DegenerateInterval):
            bt.propagator(sched, 1.5, 0.5)

    def test_out_of_horizon(self):
        sched = two_segment_schedule()
        with pytest.raises(errors.OutOfHorizon):
            bt.propagator(sched, 0.0, 3.0)
        with pytest.raises(errors.OutOfHorizon):
            bt.propagator(sched, -0.5, 1.0)

    def test_substeps_do_not_change_piecewise_result(self):
        sched = two_segment_schedule(seed=5)
        u1 = bt.propagator(sched, 0.0, 2.0, substeps=1).matrix
        u8 = bt.propagator(sched, 0.0, 2.0, substeps=8).matrix
        np.testing.assert_allclose(u1, u8, atol=1e-12)

    def test_cocycle_and_inverse(self):
        sched = two_segment_schedule(seed=7)
        u20 = bt.propagator(sched, 0.0, 2.0).matrix
        u21 = bt.propagator(sched, 1.0, 2.0).matrix
        u10 = bt.propagator(sched, 0.0, 1.0).matrix
        assert np.linalg.norm(u20 - u21 @ u10, 2) <= 1e-9
        np.testing.assert_allclose(u10.conj().T @ u10, np.eye(2), atol=1e-9)

    @settings(max_examples=30, deadline=None)
    @given(
        seed=st.integers(min_value=0, max_value=1000),
        t_a=st.floats(min_value=0.0, max_value=2.0),
        t_b=st.floats(min_value=0.0, max_value=2.0),
    )
    def test_unitarity_property(self, seed, t_a, t_b):
        sched = two_segment_schedule(seed=seed)
        lo, hi = sorted((t_a, t_b))
        u = bt.propagator(sched, lo, hi).matrix
        assert np.linalg.norm(u.conj().T @ u - np.eye(2), 2) <= 1e-9


class TestHeisenbergProjector:
    def test_time_zero_unchanged(self, rabi):
        p = bt.heisenberg_projector(rabi, 1.0, 0.0)
        np.testing.assert_array_equal(p, rabi.pvm.projector(1.0))

    def test_commuting_static_hamiltonian(self):
        sc = bt.QuantumScenario(
            2,
            bt.HamiltonianSchedule.from_static(0.7 * SIGMA_Z),
            bt.DensityOperator(np.diag([0.5, 0.5])),
            bt.ObservablePVM.pauli_z(),
        )
        for t in (0.3, 1.1, 4.0):
            p = bt.heisenberg_projector(sc, 1.0, t)
            np.testing.assert_allclose(p, sc.pvm.projector(1.0), atol=1e-12)

    def test_rabi_half_turn_swaps_projectors(self, rabi):
        p = bt.heisenberg_projector(rabi, 1.0, np.pi)
        np.testing.assert_allclose(p, rabi.pvm.projector(-1.0), atol=1e-12)

    def test_matches_oracle(self, rabi):
        p = bt.heisenberg_projector(rabi, -1.0, 1.3)
        np.testing.assert_allclose(p, oracle_heisenberg(rabi, -1.0, 1.3), atol=1e-12)
        assert np.linalg.norm(p @ p - p, 2) <= 1e-10

    def test_unknown_outcome(self, rabi):
        with pytest.raises(errors.UnknownOutcome):
            bt.heisenberg_projector(rabi, 3.0, 0.5)


class TestOperatorNorm:
    def test_half_sigma_x(self):
        assert bt.operator_norm(SIGMA_X / 2) == pytest.approx(0.5, abs=1e-14)

    def test_zero_matrix(self):
        assert bt.operator_norm(np.zeros((3, 3))) == 0.0

    def test_matches_power_iteration(self):
        rng = np.random.default_rng(3)
        g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        h = 0.5 * (g + g.conj().T)
        v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        v /= np.linalg.norm(v)
        for _ in range(3000):
            v = h @ h @ v
            v /= np.linalg.norm(v)
        power_estimate = float(np.sqrt(np.real(np.vdot(v, h @ h @ v))))
        assert bt.operator_norm(h) == pytest.approx(power_estimate, abs=1e-10)

    def test_non_square(self):
        with pytest.raises(errors.NonSquare):
            bt.operator_norm(np.zeros((2, 3)))


class TestPropagatorCache:
    def test_hit_is_bitwise_equal(self):
        sched = two_segment_schedule(seed=11)
        cache = bt.PropagatorCache(sched)
        first = cache.propagator(0.0, 1.5)
        again = cache.propagator(0.0, 1.5)
        assert again is first
        fresh = bt.propagator(sched, 0.0, 1.5)
        np.testing.assert_array_equal(first.matrix, fresh.matrix)

    def test_keys_include_substeps(self):
        sched = two_segment_schedule(seed=13)
        cache = bt.PropagatorCache(sched)
        cache.propagator(0.0, 1.0, substeps=1)
        cache.propagator(0.0, 1.0, substeps=2)
        assert len(cache) == 2

    def test_concurrent_reads(self):
        from concurrent.futures import ThreadPoolExecutor

        sched = two_segment_schedule(seed=17)
        cache = bt.PropagatorCache(sched)
        reference = bt.propagator(sched, 0.0, 2.0).matrix

        def task(_):
            return cache.propagator(0.0, 2.0).matrix

        with ThreadPoolExecutor(max_workers=8) as pool:
            results = list(pool.map(task, range(32)))
        for r in results:
            np.testing.assert_array_equal(r, reference)
