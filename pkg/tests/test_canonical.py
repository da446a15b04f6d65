"""Tests for the diagonal-T canonical form and the local-filtering normal form."""

import numpy as np
import pytest

import bellbound as bb
from conftest import partial_trace_meter, partial_trace_signal, random_unitary

I2 = np.eye(2)


class TestCanonicalForm:
    def test_werner_is_already_canonical(self):
        cf = bb.canonical_form(bb.werner(0.82))
        np.testing.assert_allclose(cf.diag, [-0.82, -0.82, -0.82], atol=1e-12)
        np.testing.assert_allclose(cf.o_signal, np.eye(3))
        np.testing.assert_allclose(cf.o_meter, np.eye(3))
        np.testing.assert_allclose(cf.u_signal, I2)

    def test_rotated_singlet_recovers_unit_diagonal(self, rng):
        singlet = bb.werner(1.0)
        for _ in range(5):
            rotated = bb.apply_local_unitary(singlet, random_unitary(rng), random_unitary(rng))
            cf = bb.canonical_form(rotated)
            np.testing.assert_allclose(np.abs(cf.diag), [1.0, 1.0, 1.0], atol=1e-10)
            back = bb.apply_local_unitary(cf.state_bar, cf.u_signal, cf.u_meter)
            assert np.max(np.abs(back.matrix - rotated.matrix)) < 1e-10

    def test_negative_determinant_t_gets_one_sign_flip(self):
        # Phi+ has T = diag(1, -1, 1), det T = -1: proper rotations need a sign in diag
        state = bb.bell_diagonal([1.0, 0.0, 0.0, 0.0])
        cf = bb.canonical_form(state)
        assert np.prod(np.sign(cf.diag)) == -1.0
        assert abs(np.linalg.det(cf.o_signal) - 1.0) < 1e-10
        assert abs(np.linalg.det(cf.o_meter) - 1.0) < 1e-10

    def test_diagonal_but_unordered_t_gets_permuted(self):
        # lambda = (0.4, 0.3, 0.2, 0.1) gives T = diag(0.2, 0.0, 0.4)
        state = bb.bell_diagonal([0.4, 0.3, 0.2, 0.1])
        cf = bb.canonical_form(state)
        np.testing.assert_allclose(np.abs(cf.diag), [0.4, 0.2, 0.0], atol=1e-12)
        t = bb.decompose(state).T
        assert np.max(np.abs(cf.o_signal @ np.diag(cf.diag) @ cf.o_meter.T - t)) < 1e-10
        back = bb.apply_local_unitary(cf.state_bar, cf.u_signal, cf.u_meter)
        assert np.max(np.abs(back.matrix - state.matrix)) < 1e-10

    def test_random_states_factorization_and_invariants(self, rng):
        for seed in range(40):
            state = bb.random_state(seed, 1 + seed % 4)
            t = bb.decompose(state).T
            cf = bb.canonical_form(state)
            assert np.max(np.abs(cf.o_signal @ np.diag(cf.diag) @ cf.o_meter.T - t)) < 1e-10
            assert abs(np.linalg.det(cf.o_signal) - 1.0) < 1e-10
            assert abs(np.linalg.det(cf.o_meter) - 1.0) < 1e-10
            squares = cf.diag**2
            assert squares[0] >= squares[1] - 1e-12 >= squares[2] - 2e-12
            t_bar = bb.decompose(cf.state_bar).T
            assert np.max(np.abs(t_bar - np.diag(np.diag(t_bar)))) < 1e-10
            assert abs(bb.bell_max(cf.state_bar) - bb.bell_max(state)) < 1e-10
            back = bb.apply_local_unitary(cf.state_bar, cf.u_signal, cf.u_meter)
            assert np.max(np.abs(back.matrix - state.matrix)) < 1e-10


class TestFilterNormalForm:
    def test_bell_diagonal_input_is_untouched(self):
        state = bb.bell_diagonal([0.1, 0.2, 0.3, 0.4])
        result = bb.filter_normal_form(state)
        assert result.iterations == 0
        np.testing.assert_allclose(result.f_signal, I2, atol=1e-12)
        np.testing.assert_allclose(result.f_meter, I2, atol=1e-12)
        np.testing.assert_allclose(result.state_out.matrix, state.matrix, atol=1e-12)
        assert result.success_probability == pytest.approx(1.0, abs=1e-12)

    def test_partially_entangled_pure_state_distills_to_maximal(self):
        # known Procrustean filtering: cos(a)|HH> + sin(a)|VV> filters to a Bell state
        for alpha_deg in (10.0, 30.0, 40.0):
            alpha = np.radians(alpha_deg)
            ket = np.zeros(4, dtype=complex)
            ket[0], ket[3] = np.cos(alpha), np.sin(alpha)
            state = bb.validate_state(np.outer(ket, ket.conj()))
            result = bb.filter_normal_form(state)
            assert result.b_max_out == pytest.approx(2 * np.sqrt(2), abs=1e-6)
            assert result.b_max_out >= result.b_max_in - 1e-9
            rho = result.state_out.matrix
            np.testing.assert_allclose(partial_trace_meter(rho), I2 / 2, atol=1e-8)
            np.testing.assert_allclose(partial_trace_signal(rho), I2 / 2, atol=1e-8)

    def test_pure_product_state_raises_singular_reduction(self):
        hh = np.zeros((4, 4), dtype=complex)
        hh[0, 0] = 1.0
        with pytest.raises(bb.SingularReduction):
            bb.filter_normal_form(bb.validate_state(hh))

    def test_max_iter_exhaustion_raises(self):
        state = bb.random_state(7, 4)
        with pytest.raises(bb.NoConvergence):
            bb.filter_normal_form(state, max_iter=1)

    def test_random_states_filter_properties(self):
        for seed in range(30):
            state = bb.random_state(seed, 4)
            result = bb.filter_normal_form(state)
            rho = result.state_out.matrix
            np.testing.assert_allclose(partial_trace_meter(rho), I2 / 2, atol=1e-8)
            np.testing.assert_allclose(partial_trace_signal(rho), I2 / 2, atol=1e-8)
            assert result.b_max_out >= result.b_max_in - 1e-9
            for f in (result.f_signal, result.f_meter):
                assert abs(np.linalg.svd(f, compute_uv=False)[0] - 1.0) < 1e-10
            assert 0.0 < result.success_probability <= 1.0 + 1e-12
            # convergence is monotone (non-strict) in the per-iteration deviation log
            log = result.deviation_log
            assert all(a >= b - 1e-12 for a, b in zip(log, log[1:]))
            t_out = bb.decompose(result.state_out).T
            assert np.max(np.abs(t_out - np.diag(np.diag(t_out)))) < 1e-8


class TestSaturateAfterFilter:
    def test_werner_is_its_own_normal_form(self):
        result, check = bb.saturate_after_filter(bb.werner(0.82))
        assert result.iterations == 0
        assert check.sum_of_squares == pytest.approx(1.3448, abs=1e-10)
        assert abs(check.slack) < 1e-10

    def test_maximally_mixed(self):
        result, check = bb.saturate_after_filter(bb.validate_state(np.eye(4) / 4))
        assert check.sum_of_squares < 1e-14
        assert check.bound < 1e-14

    def test_random_full_rank_states_saturate_after_filtering(self):
        for seed in range(20):
            _, check = bb.saturate_after_filter(bb.random_state(seed, 4))
            assert abs(check.slack) < 1e-6
