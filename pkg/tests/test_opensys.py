import numpy as np
import pytest

import bitraj as bt
from bitraj import errors
from bitraj._linalg import vec, unvec

from conftest import SIGMA_X, SIGMA_Z, static_scenario


def standard_model(coupling=0.5, omega=1.0):
    return bt.OpenModel(
        h_sys=0.5 * SIGMA_Z,
        v_sys=SIGMA_X,
        coupling=coupling,
        environment=bt.rabi_scenario(omega),
    )


def commuting_environment_model(coupling=0.7):
    env = static_scenario(
        np.diag([0.4, -0.3]), np.diag([0.35, 0.65]), bt.ObservablePVM.pauli_z()
    )
    return bt.OpenModel(h_sys=0.5 * SIGMA_Z, v_sys=SIGMA_X, coupling=coupling, environment=env)


class TestSuperoperator:
    def test_sandwich_matches_direct_product(self):
        rng = np.random.default_rng(0)
        x = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        y = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        s = bt.Superoperator.from_sandwich(x, y)
        np.testing.assert_allclose(s.apply(a), x @ a @ y, atol=1e-12)

    def test_identity(self):
        rho = np.diag([0.2, 0.8])
        s = bt.Superoperator.identity(2)
        np.testing.assert_array_equal(s.apply(rho), rho)

    def test_vec_convention_round_trip(self):
        a = np.arange(9, dtype=complex).reshape(3, 3)
        np.testing.assert_array_equal(unvec(vec(a), 3), a)
        # column stacking: first d entries are the first column
        np.testing.assert_array_equal(vec(a)[:3], a[:, 0])

    def test_choi_of_unitary_conjugation(self):
        rng = np.random.default_rng(1)
        g = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        q, _ = np.linalg.qr(g)
        s = bt.Superoperator.from_sandwich(q, q.conj().T)
        choi = bt.choi_matrix(s)
        evals = np.linalg.eigvalsh(0.5 * (choi + choi.conj().T))
        assert evals.min() >= -1e-12
        assert np.trace(choi) == pytest.approx(2.0, abs=1e-12)
        assert sum(e > 1e-9 for e in evals) == 1  # rank one


class TestOpenModel:
    def test_coupling_operator_from_pvm(self):
        model = standard_model()
        np.testing.assert_allclose(model.coupling_operator, SIGMA_Z)

    def test_non_hermitian_system_rejected(self):
        with pytest.raises(errors.ValidationError) as err:
            bt.OpenModel(
                h_sys=np.array([[0, 1], [0, 0]], dtype=complex),
                v_sys=SIGMA_X,
                coupling=0.1,
                environment=bt.rabi_scenario(),
            )
        assert err.value.has(errors.NonHermitian)

    def test_from_dict(self):
        cfg = {
            "dimension": 2,
            "hamiltonian": {"type": "preset", "name": "rabi", "omega": 1.0},
            "initial_state": {"type": "pure", "vector": [[1, 0], [0, 0]]},
            "observable": {"type": "pauli_z"},
            "system": {
                "h_o": [[[0.5, 0], 0], [0, [-0.5, 0]]],
                "v_o": [[0, [1, 0]], [[1, 0], 0]],
                "lambda": 0.5,
            },
        }
        model = bt.OpenModel.from_dict(cfg)
        assert model.system_dim == 2
        assert model.coupling == 0.5

    def test_from_dict_requires_system_keys(self):
        with pytest.raises(errors.ParseError, match="lambda"):
            bt.OpenModel.from_dict(
                {
                    "dimension": 2,
                    "hamiltonian": {"type": "preset", "name": "rabi"},
                    "initial_state": {"type": "pure", "vector": [[1, 0], [0, 0]]},
                    "observable": {"type": "pauli_z"},
                    "system": {"h_o": [[0, 0], [0, 0]], "v_o": [[0, 0], [0, 0]]},
                }
            )


class TestExactJointMap:
    def test_decoupled_tensor_factorization(self):
        model = standard_model(coupling=0.0)
        t = 1.3
        exact = bt.exact_joint_map(model, t)
        u = bt.propagator(
            bt.HamiltonianSchedule.from_static(model.h_sys), 0.0, t
        ).matrix
        expected = bt.Superoperator.from_sandwich(u, u.conj().T)
        assert exact.distance(expected) <= 1e-12

    def test_time_zero_is_identity(self):
        model = standard_model()
        assert bt.exact_joint_map(model, 0.0).distance(bt.Superoperator.identity(2)) <= 1e-12

    def test_trace_preserving_and_completely_positive(self):
        model = standard_model()
        exact = bt.exact_joint_map(model, 1.0)
        assert exact.trace_preservation_defect() <= 1e-12
        choi = bt.choi_matrix(exact)
        evals = np.linalg.eigvalsh(0.5 * (choi + choi.conj().T))
        assert evals.min() >= -1e-9

    def test_dimension_guard(self):
        env = bt.random_scenario(9, seed=0)
        model = bt.OpenModel(
            h_sys=np.zeros((8, 8)), v_sys=np.eye(8), coupling=0.1, environment=env
        )
        with pytest.raises(errors.DimensionTooLarge):
            bt.exact_joint_map(model, 1.0)


class TestBitrajectoryMap:
    def test_decoupled_is_exact_for_any_step_count(self):
        model = standard_model(coupling=0.0)
        exact = bt.exact_joint_map(model, 1.0)
        for n in (1, 3, 16):
            approx = bt.bitrajectory_map(model, 1.0, n)
            assert approx.distance(exact) <= 1e-10

    def test_commuting_environment_is_exact(self):
        model = commuting_environment_model()
        exact = bt.exact_joint_map(model, 1.2)
        for n in (1, 2, 8, 32):
            approx = bt.bitrajectory_map(model, 1.2, n)
            assert approx.distance(exact) <= 1e-8

    def test_enumerate_and_contract_agree(self):
        model = standard_model()
        for n in (1, 2, 4):
            a = bt.bitrajectory_map(model, 0.9, n, method="enumerate")
            b = bt.bitrajectory_map(model, 0.9, n, method="contract")
            assert a.distance(b) <= 1e-12

    def test_enumeration_cap(self):
        model = standard_model()
        with pytest.raises(errors.EnumerationTooLarge):
            bt.bitrajectory_map(model, 1.0, 64, method="enumerate")

    def test_trace_and_hermiticity_preservation(self):
        model = standard_model()
        rng = np.random.default_rng(2)
        g = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        rho = g @ g.conj().T
        rho /= np.trace(rho).real
        for n in (1, 4, 16, 64):
            approx = bt.bitrajectory_map(model, 1.0, n)
            assert approx.trace_preservation_defect() <= 1e-8
            out = approx.apply(rho)
            assert np.abs(out - out.conj().T).max() <= 1e-10
            assert np.trace(out).real == pytest.approx(1.0, abs=1e-8)

    def test_first_order_convergence(self):
        model = standard_model()
        study = bt.convergence_study(model, 1.0, [8, 16, 32])
        assert study[0].error > study[1].error > study[2].error
        # first order in the step size
        assert study[2].error <= study[0].error / 2


class TestConvergenceStudy:
    def test_reports_every_requested_step_count(self):
        model = standard_model(coupling=0.0)
        study = bt.convergence_study(model, 1.0, [2, 4, 8])
        assert [p.n_steps for p in study] == [2, 4, 8]
        for p in study:
            assert p.error <= 1e-10

    def test_requires_ascending_steps(self):
        model = standard_model()
        with pytest.raises(errors.DimensionMismatch):
            bt.convergence_study(model, 1.0, [8, 4])
