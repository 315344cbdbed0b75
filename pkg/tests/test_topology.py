import json
import warnings

import numpy as np
import pytest

from linres import (
    Reservoir,
    ReservoirSpec,
    RescaleMode,
    TopologyKind,
    ValidationError,
    build_cyclic,
    build_delay_line,
    build_random,
    build_reservoir,
    build_wigner,
    check_aperiodic,
)
from linres.linalg_core import max_singular_value, spectral_radius


class TestDelayLine:
    def test_small(self):
        R = build_delay_line(3, 1.0)
        np.testing.assert_array_equal(R.W, [[0, 0, 0], [1, 0, 0], [0, 1, 0]])
        np.testing.assert_array_equal(R.w, [1, 0, 0])

    @pytest.mark.parametrize("n,rho", [(2, 1.0), (7, 0.5), (30, 0.9)])
    def test_nilpotent(self, n, rho):
        W = build_delay_line(n, rho).W
        assert not np.any(np.linalg.matrix_power(W, n))

    def test_spectral_radius_zero(self):
        assert spectral_radius(build_delay_line(3, 0.5).W) == pytest.approx(0.0, abs=1e-12)

    def test_no_wraparound(self):
        assert build_delay_line(5, 0.7).W[0, 4] == 0

    def test_too_small(self):
        with pytest.raises(ValidationError):
            build_delay_line(1, 1.0)


class TestCyclic:
    def test_square_is_shift_by_two(self):
        W2 = np.linalg.matrix_power(build_cyclic(3, 1.0).W, 2)
        expected = np.zeros((3, 3))
        for j in range(3):
            expected[(j + 2) % 3, j] = 1
        np.testing.assert_array_equal(W2, expected)

    def test_spectral_radius(self):
        assert spectral_radius(build_cyclic(4, 0.9).W) == pytest.approx(0.9, abs=1e-12)

    def test_fourth_power_identity(self):
        np.testing.assert_array_equal(np.linalg.matrix_power(build_cyclic(4, 1.0).W, 4), np.eye(4))

    @pytest.mark.parametrize("n,rho", [(4, 0.9), (9, 0.5), (25, 0.99)])
    def test_nth_power(self, n, rho):
        Wn = np.linalg.matrix_power(build_cyclic(n, rho).W, n)
        np.testing.assert_allclose(Wn, rho**n * np.eye(n), atol=1e-12)

    def test_structure(self):
        W = build_cyclic(6, 0.3).W
        assert set(np.unique(W)) == {0.0, 0.3}
        assert np.all(np.count_nonzero(W, axis=1) == 1)

    def test_input_weights_aperiodic(self):
        for seed in range(20):
            assert check_aperiodic(build_cyclic(8, 0.9, input_seed=seed).w)


class TestRandom:
    def test_spectral_radius_band(self):
        inside = 0
        msv = []
        for seed in range(20):
            W = build_random(500, 0.8, seed=seed).W
            inside += 0.7 <= spectral_radius(W) <= 0.9
            msv.append(max_singular_value(W))
        assert inside >= 18
        assert 1.4 <= np.mean(msv) <= 1.8

    def test_exact_rescale(self):
        R = build_random(100, 0.8, seed=4, rescale_mode=RescaleMode.EXACT_SPECTRAL_RADIUS)
        assert spectral_radius(R.W) == pytest.approx(0.8, abs=1e-8)

    def test_exact_msv_rescale(self):
        R = build_random(100, 0.8, seed=4, rescale_mode="exact-msv")
        assert max_singular_value(R.W) == pytest.approx(0.8, abs=1e-10)

    def test_entry_variance(self):
        n, rho = 300, 0.9
        W = build_random(n, rho, seed=11).W
        assert W.var() == pytest.approx(rho**2 / n, rel=0.1)

    def test_input_weight_variance(self):
        w = build_random(2000, 0.9, input_seed=3).w
        assert w.var() == pytest.approx(1 / 2000, rel=0.1)

    def test_seed_scales(self):
        a = build_random(20, 0.5, seed=9).W
        b = build_random(20, 0.25, seed=9).W
        np.testing.assert_allclose(a, 2 * b, rtol=0, atol=0)


class TestWigner:
    def test_symmetric(self):
        for seed in range(5):
            W = build_wigner(50, 0.9, seed=seed).W
            assert np.array_equal(W, W.T)
        W = build_wigner(50, 0.9, seed=1, rescale_mode="exact").W
        assert np.array_equal(W, W.T)

    def test_radius_equals_msv(self):
        for seed in range(5):
            W = build_wigner(500, 0.8, seed=seed).W
            ratio = spectral_radius(W) / max_singular_value(W)
            assert 0.99 <= ratio <= 1.0 + 1e-12

    def test_spectral_radius_band(self):
        radii = [spectral_radius(build_wigner(500, 0.8, seed=s).W) for s in range(20)]
        assert all(0.7 <= r <= 0.9 for r in radii)

    def test_diagonal_half_spread(self):
        W = build_wigner(800, 1.0, seed=2).W
        off = W[np.triu_indices(800, 1)]
        assert np.diag(W).std() / off.std() == pytest.approx(0.5, rel=0.1)


class TestAperiodic:
    def test_examples(self):
        assert check_aperiodic([1, 2, 3])
        assert not check_aperiodic([1, 2, 1, 2])
        assert not check_aperiodic(np.zeros(4))

    def test_gaussian_never_periodic(self):
        rng = np.random.default_rng(0)
        assert all(check_aperiodic(rng.standard_normal(100)) for _ in range(1000))


class TestSpec:
    def test_rejects_bad_values(self):
        with pytest.raises(ValidationError):
            ReservoirSpec("random", 1, 0.5)
        with pytest.raises(ValidationError):
            ReservoirSpec("random", 5, 0.0)
        with pytest.raises(ValidationError):
            ReservoirSpec("random", 5, 0.5, seed=-1)
        with pytest.raises(ValidationError):
            ReservoirSpec("ring-ish", 5, 0.5)

    def test_warns_above_one(self):
        with pytest.warns(RuntimeWarning):
            ReservoirSpec("cyclic", 5, 1.2)

    def test_no_warning_at_one(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            ReservoirSpec("cyclic", 5, 1.0)

    def test_parse_aliases(self):
        assert TopologyKind.parse("ring") is TopologyKind.CYCLIC
        assert RescaleMode.parse("exact") is RescaleMode.EXACT_SPECTRAL_RADIUS


@pytest.mark.parametrize("kind", list(TopologyKind))
def test_deterministic_and_json_roundtrip(kind):
    spec = ReservoirSpec(kind, 12, 0.7, seed=2**63 + 5, input_seed=17)
    a, b = build_reservoir(spec), build_reservoir(spec)
    assert a.W.tobytes() == b.W.tobytes() and a.w.tobytes() == b.w.tobytes()
    doc = json.loads(a.to_json())
    assert set(doc) == {"kind", "n", "rho", "seed", "input_seed", "rescale_mode", "W", "w"}
    c = Reservoir.from_json(a.to_json())
    assert c.spec == spec
    assert c.W.tobytes() == a.W.tobytes() and c.w.tobytes() == a.w.tobytes()


def test_from_json_rejects_shape_mismatch():
    doc = json.loads(build_delay_line(3).to_json())
    doc["w"] = [1.0, 0.0]
    with pytest.raises(ValidationError):
        Reservoir.from_json(json.dumps(doc))


def test_kinds_share_input_weights():
    w = [build_reservoir(ReservoirSpec(k, 10, 0.9, seed=1, input_seed=5)).w
         for k in ("cyclic", "random", "wigner")]
    assert np.array_equal(w[0], w[1]) and np.array_equal(w[1], w[2])
