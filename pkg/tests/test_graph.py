import itertools

import numpy as np
import pytest

from privrdv.graph import (
    augmented_transition_matrix,
    derive_quantities,
    ergodicity_coefficient,
    validate_graph,
    weight_violations,
)
from tests.conftest import SEC4_WEIGHTS


class TestValidation:
    def test_reference_graph_is_valid(self):
        g = validate_graph(SEC4_WEIGHTS)
        np.testing.assert_allclose(g.degrees, [0.6, 0.5, 0.8, 0.8, 0.5])

    def test_asymmetric_rejected(self):
        w = SEC4_WEIGHTS.copy()
        w[0, 1] = 0.25
        with pytest.raises(ValueError, match="asymmetric"):
            validate_graph(w)

    def test_self_loop_rejected(self):
        w = SEC4_WEIGHTS.copy()
        w[2, 2] = 0.1
        with pytest.raises(ValueError, match="self-loop"):
            validate_graph(w)

    def test_negative_weight_rejected(self):
        w = SEC4_WEIGHTS.copy()
        w[0, 1] = w[1, 0] = -0.3
        with pytest.raises(ValueError, match="negative weight"):
            validate_graph(w)

    def test_row_sum_one_rejected(self):
        # two nodes joined by a full-unit weight: d_1 = 1.0 exactly
        with pytest.raises(ValueError, match="row sum >= 1"):
            validate_graph([[0.0, 1.0], [1.0, 0.0]])

    def test_disconnected_rejected(self):
        w = np.zeros((4, 4))
        w[0, 1] = w[1, 0] = 0.4
        w[2, 3] = w[3, 2] = 0.4
        with pytest.raises(ValueError, match="disconnected"):
            validate_graph(w)

    def test_non_square_rejected(self):
        assert weight_violations(np.zeros((2, 3)))

    def test_all_violations_reported(self):
        w = SEC4_WEIGHTS.copy()
        w[0, 0] = 0.2          # self-loop
        w[1, 2] = -0.2         # negative, and asymmetric vs w[2,1]
        problems = weight_violations(w)
        text = " ".join(problems)
        assert "self-loop" in text and "negative" in text and "asymmetric" in text


class TestDerivedQuantities:
    def test_alpha_complements_degree_exactly(self, sec4_graph, sec4_derived):
        assert (sec4_derived.alpha + sec4_graph.degrees == 1.0).all()
        np.testing.assert_allclose(sec4_derived.alpha, [0.4, 0.5, 0.2, 0.2, 0.5])

    def test_update_matrix_row_stochastic(self, sec4_derived):
        W = sec4_derived.W
        assert (W >= 0).all()
        np.testing.assert_allclose(W.sum(axis=1), 1.0, atol=1e-12)

    def test_positivity_horizon_by_matrix_power_oracle(self, sec4_derived):
        # exhaustively inspect W^m for m = 1, 2, 3
        W = sec4_derived.W
        assert not (np.linalg.matrix_power(W, 1) > 0).all()
        assert not (np.linalg.matrix_power(W, 2) > 0).all()
        assert (np.linalg.matrix_power(W, 3) > 0).all()
        assert sec4_derived.L == 4

    def test_epsilon_floor_regression_value(self, sec4_derived):
        # direct matrix-product oracle: min entry of W^3 (I - D)
        W3 = np.linalg.matrix_power(sec4_derived.W, 3)
        oracle = (W3 @ np.diag(sec4_derived.alpha)).min()
        assert sec4_derived.epsilon_floor == pytest.approx(oracle, abs=1e-15)
        assert sec4_derived.epsilon_floor == pytest.approx(0.015, abs=1e-12)
        assert sec4_derived.epsilon_floor > 0

    def test_every_entry_dominates_floor(self, sec4_derived):
        W3 = np.linalg.matrix_power(sec4_derived.W, 3)
        prod = W3 @ np.diag(sec4_derived.alpha)
        assert (prod >= sec4_derived.epsilon_floor - 1e-15).all()

    def test_complete_triangle_has_horizon_two(self):
        w = np.full((3, 3), 0.3)
        np.fill_diagonal(w, 0.0)
        assert derive_quantities(validate_graph(w)).L == 2

    def test_single_robot(self):
        d = derive_quantities(validate_graph([[0.0]]))
        assert d.L == 1 and d.epsilon_floor == 1.0


class TestAugmentedMatrix:
    def test_all_transmit_duplicates_block_rows(self, sec4_graph):
        M = augmented_transition_matrix(sec4_graph, np.ones(5))
        np.testing.assert_array_equal(M[:5], M[5:])
        np.testing.assert_allclose(M[:5, :5], np.diag(1 - sec4_graph.degrees))
        np.testing.assert_allclose(M[:5, 5:], sec4_graph.weights)

    def test_no_transmit_holds_outputs(self, sec4_graph):
        M = augmented_transition_matrix(sec4_graph, np.zeros(5))
        np.testing.assert_array_equal(M[5:, :5], np.zeros((5, 5)))
        np.testing.assert_array_equal(M[5:, 5:], np.eye(5))

    def test_row_stochastic_for_every_pattern(self, sec4_graph):
        # summation oracle over all 2^5 transmission patterns
        for bits in itertools.product((0, 1), repeat=5):
            M = augmented_transition_matrix(sec4_graph, np.array(bits))
            assert (M >= 0).all()
            np.testing.assert_allclose(M.sum(axis=1), 1.0, atol=1e-12)

    def test_bad_gamma_rejected(self, sec4_graph):
        with pytest.raises(ValueError, match="0/1"):
            augmented_transition_matrix(sec4_graph, np.full(5, 0.5))


class TestErgodicityCoefficient:
    def test_identical_rows_give_zero(self):
        row = np.array([0.2, 0.3, 0.5])
        assert ergodicity_coefficient(np.tile(row, (3, 1))) == 0.0

    def test_identity_gives_one(self):
        assert ergodicity_coefficient(np.eye(4)) == 1.0

    def test_window_power_certifies_contraction(self, sec4_graph, sec4_derived):
        M = augmented_transition_matrix(sec4_graph, np.ones(5))
        tau = ergodicity_coefficient(np.linalg.matrix_power(M, sec4_derived.L))
        assert tau <= 1 - sec4_derived.epsilon_floor
        assert tau == pytest.approx(0.5626, abs=1e-12)

    def test_submultiplicative_on_random_products(self, sec4_graph):
        gen = np.random.default_rng(0)
        for _ in range(25):
            g1, g2 = gen.integers(0, 2, size=(2, 5))
            m1 = augmented_transition_matrix(sec4_graph, g1)
            m2 = augmented_transition_matrix(sec4_graph, g2)
            t12 = ergodicity_coefficient(m1 @ m2)
            assert t12 <= ergodicity_coefficient(m1) * ergodicity_coefficient(m2) + 1e-12

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError, match="sum"):
            ergodicity_coefficient(np.ones((3, 3)))
        with pytest.raises(ValueError, match="negative"):
            ergodicity_coefficient(np.array([[1.5, -0.5], [0.5, 0.5]]))
        with pytest.raises(ValueError, match="square"):
            ergodicity_coefficient(np.ones((2, 3)) / 3)
