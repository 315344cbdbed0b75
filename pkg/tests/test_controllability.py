import numpy as np
import pytest
import sympy

from linres import (
    FullRankError,
    ReservoirSpec,
    analyze,
    build_cyclic,
    build_delay_line,
    build_random,
    build_reservoir,
    controllability_matrix,
    cyclic_controllability_tilde,
    expected_column_norms,
    indistinguishability_demo,
)
from linres.controllability import (
    TRAILING_ENERGY_THRESHOLD,
    nullspace_profile,
    older_share,
    trailing_energy,
)
from linres.topology import Reservoir


class TestMatrix:
    def test_delay_line_identity(self):
        assert np.array_equal(controllability_matrix(build_delay_line(9, 1.0)), np.eye(9))

    def test_ring_columns(self):
        R = build_cyclic(7, 0.8, input_seed=2)
        C = controllability_matrix(R)
        for k in range(7):
            np.testing.assert_allclose(C[:, k], 0.8**k * np.roll(R.w, k), rtol=1e-14)

    def test_first_column_exact(self):
        R = build_random(5, 0.9, seed=1, input_seed=2)
        assert np.array_equal(controllability_matrix(R)[:, 0], R.w)

    def test_two_by_two(self):
        R = build_random(2, 0.9, seed=3, input_seed=4)
        np.testing.assert_allclose(controllability_matrix(R)[:, 1], R.W @ R.w, rtol=1e-15)

    def test_pair_arguments(self):
        R = build_random(4, 0.9, seed=3, input_seed=4)
        assert np.array_equal(controllability_matrix(R.W, R.w), controllability_matrix(R))


class TestAnalyze:
    def test_delay_line(self):
        rep = analyze(controllability_matrix(build_delay_line(20, 1.0)))
        assert rep.rank == 20 and rep.nullity == 0

    def test_ring_full_rank(self):
        rep = analyze(controllability_matrix(build_cyclic(100, 0.99, input_seed=7)))
        assert rep.rank == 100

    def test_periodic_input_weights_degenerate(self):
        spec = ReservoirSpec("cyclic", 4, 1.0)
        W = build_cyclic(4, 1.0).W
        R = Reservoir(spec, W, np.array([1.0, 2.0, 1.0, 2.0]))
        C = controllability_matrix(R)
        exact = sympy.Matrix(C.astype(int)).rank()
        assert exact == 2
        assert analyze(C).rank == exact

    def test_report_fields(self):
        R = build_random(30, 0.95, seed=2, input_seed=3)
        rep = analyze(controllability_matrix(R))
        assert rep.rank + rep.nullspace.shape[1] == 30
        assert np.all(np.diff(rep.singular_values) <= 0)
        np.testing.assert_allclose(rep.column_norms, np.linalg.norm(rep.C, axis=0))
        assert rep.rank_tolerance == pytest.approx(rep.singular_values[0] * 30 * np.finfo(float).eps)
        doc = rep.to_dict()
        assert doc["rank"] == rep.rank and len(doc["singular_values"]) == 30

    def test_custom_tolerance(self):
        rep = analyze(np.diag([1.0, 0.1, 1e-5]), tol=1e-3)
        assert rep.rank == 2 and rep.rank_tolerance == 1e-3


class TestColumnNorms:
    def test_rho_one(self):
        np.testing.assert_array_equal(expected_column_norms(1.0, 6), np.ones(6))

    def test_half(self):
        np.testing.assert_array_equal(expected_column_norms(0.5, 4), [1, 0.5, 0.25, 0.125])

    @pytest.mark.slow
    def test_random_profile(self):
        ratios = []
        for seed in range(10):
            R = build_random(1000, 0.9, seed=seed, input_seed=1000 + seed)
            C = controllability_matrix(R)[:, :31]
            ratios.append(np.linalg.norm(C, axis=0) / expected_column_norms(0.9, 31))
        mean = np.mean(ratios, axis=0)
        assert np.all((mean >= 0.7) & (mean <= 1.4))

    @pytest.mark.slow
    def test_log_norms_decrease(self):
        good = 0
        for seed in range(10):
            R = build_random(1000, 0.9, seed=seed, input_seed=1000 + seed)
            norms = analyze(controllability_matrix(R)).column_norms
            good += np.all(np.diff(np.log(norms[5:])) < 0)
        assert good >= 9


class TestTilde:
    def test_unit_vector(self):
        np.testing.assert_array_equal(cyclic_controllability_tilde([1.0, 0.0, 0.0]), np.eye(3))

    def test_columns_are_shifts(self, rng):
        w = rng.standard_normal(6)
        Ct = cyclic_controllability_tilde(w)
        W = build_cyclic(6, 1.0).W
        for i in range(6):
            np.testing.assert_array_equal(Ct[:, i], np.linalg.matrix_power(W, i) @ w)

    def test_full_rank_for_generic_w(self, rng):
        for _ in range(100):
            w = rng.standard_normal(50)
            # circulant singular values are the DFT magnitudes of w
            assert np.min(np.abs(np.fft.fft(w))) > 0
            assert analyze(cyclic_controllability_tilde(w)).rank == 50


class TestNullspace:
    @pytest.mark.parametrize("kind", ["random", "wigner", "cyclic", "delay"])
    def test_nullspace_action(self, kind):
        R = build_reservoir(ReservoirSpec(kind, 60, 0.99, seed=5, input_seed=6))
        rep = analyze(controllability_matrix(R))
        if rep.nullity:
            res = np.linalg.norm(rep.C @ rep.nullspace, axis=0)
            assert np.all(res <= 10 * rep.rank_tolerance)

    @pytest.mark.parametrize("kind", ["random", "wigner"])
    def test_nullspace_lives_in_the_older_past(self, kind):
        for seed in range(5):
            R = build_reservoir(ReservoirSpec(kind, 100, 0.99, seed=seed, input_seed=50 + seed))
            rep = analyze(controllability_matrix(R))
            assert rep.nullity > 0
            assert older_share(rep) >= TRAILING_ENERGY_THRESHOLD
            prof = nullspace_profile(rep)
            assert prof.sum() == pytest.approx(1.0)
            assert prof[: rep.rank // 2].sum() < 0.01

    def test_trailing_energy_per_vector(self):
        R = build_reservoir(ReservoirSpec("random", 100, 0.99, seed=0, input_seed=50))
        e = trailing_energy(analyze(controllability_matrix(R)))
        assert np.all((e >= 0) & (e <= 1 + 1e-12))
        assert np.median(e) > 0.5

    def test_full_rank_profile(self):
        rep = analyze(np.eye(3))
        assert older_share(rep) == 0.0 and not np.any(nullspace_profile(rep))


class TestIndistinguishability:
    def test_wigner(self, rng):
        R = build_reservoir(ReservoirSpec("wigner", 100, 0.99, seed=1, input_seed=2))
        s1 = rng.standard_normal(100)
        x1, x2 = indistinguishability_demo(R, s1, 0)
        assert np.linalg.norm(x1 - x2) / np.linalg.norm(x1) <= 1e-8

    def test_ring_is_full_rank(self, rng):
        with pytest.raises(FullRankError):
            indistinguishability_demo(build_cyclic(100, 0.99, input_seed=3), rng.standard_normal(100))

    def test_identity(self):
        with pytest.raises(FullRankError):
            indistinguishability_demo(np.eye(4), np.ones(4))

    def test_matrix_input(self):
        x1, x2 = indistinguishability_demo(np.ones((2, 2)), np.array([1.0, 0.0]))
        np.testing.assert_allclose(x1, x2, atol=1e-14)


def test_rank_ordering():
    ranks = {k: [] for k in ("cyclic", "random", "wigner")}
    for seed in range(10):
        for k in ranks:
            R = build_reservoir(ReservoirSpec(k, 100, 0.995, seed=seed, input_seed=100 + seed))
            ranks[k].append(analyze(controllability_matrix(R)).rank)
    mean = {k: np.mean(v) for k, v in ranks.items()}
    assert mean["cyclic"] == 100
    assert mean["cyclic"] >= mean["random"] >= mean["wigner"]
