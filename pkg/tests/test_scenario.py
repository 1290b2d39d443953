import numpy as np
import pytest
from numpy.testing import assert_allclose

from arisopt.errors import InvalidInput
from arisopt.scenario import (
    ScenarioConfig,
    dbm_to_watts,
    generate_channels,
    load_config,
    parse_power,
    path_loss_gain,
    rician_matrix,
    save_config,
    split_budget,
    split_budget_passive,
)


class TestPathLoss:
    def test_reference_distance(self):
        assert_allclose(path_loss_gain(1.0, -30.0, 2.2), 1e-3)

    def test_square_law(self):
        assert_allclose(path_loss_gain(10.0, -30.0, 2.0), 1e-5)

    def test_steep_exponent(self):
        assert_allclose(path_loss_gain(100.0, -30.0, 3.5), 1e-3 * 100 ** (-3.5))

    def test_nonpositive_distance(self):
        with pytest.raises(InvalidInput):
            path_loss_gain(0.0, -30.0, 2.0)


class TestRician:
    def test_los_limit(self):
        rng = np.random.default_rng(0)
        los = np.exp(1j * rng.uniform(0, 2 * np.pi, (4, 3)))
        out = rician_matrix(4, 3, 1e12, los, rng)
        assert np.max(np.abs(out - los)) < 1e-5

    def test_rayleigh_unit_energy(self):
        rng = np.random.default_rng(1)
        los = np.ones((10, 10))
        samples = [np.abs(rician_matrix(10, 10, 0.0, los, rng)) ** 2 for _ in range(1000)]
        assert abs(np.mean(samples) - 1.0) < 0.02

    def test_nlos_variance_half_at_k1(self):
        rng = np.random.default_rng(2)
        los = np.ones((8, 8))
        w_los = np.sqrt(0.5)
        nlos = [rician_matrix(8, 8, 1.0, los, rng) - w_los * los for _ in range(1500)]
        var = np.mean(np.abs(np.asarray(nlos)) ** 2)
        assert abs(var - 0.5) < 0.01

    def test_negative_factor_rejected(self):
        with pytest.raises(InvalidInput):
            rician_matrix(2, 2, -0.1, np.ones((2, 2)), np.random.default_rng(0))


class TestGenerateChannels:
    def test_shapes(self):
        cfg = ScenarioConfig(M=16, N=4, K=3, seed=42)
        ch = generate_channels(cfg, np.random.default_rng(42))
        assert ch.G.shape == (16, 4)
        assert ch.h.shape == (3, 16)
        assert ch.f.shape == (3, 4)

    def test_determinism(self):
        cfg = ScenarioConfig(seed=5)
        a = generate_channels(cfg, np.random.default_rng(5))
        b = generate_channels(cfg, np.random.default_rng(5))
        assert np.array_equal(a.G, b.G)
        assert np.array_equal(a.h, b.h)
        assert np.array_equal(a.f, b.f)

    def test_mean_link_energy(self):
        cfg = ScenarioConfig(M=8, N=4, K=1, seed=3)
        d = np.linalg.norm(np.subtract(cfg.ris_pos, cfg.bs_pos))
        expected = 8 * 4 * path_loss_gain(d, cfg.c0_db, cfg.pl_exp_bs_ris)
        rng = np.random.default_rng(3)
        total = 0.0
        draws = 10000
        for _ in range(draws):
            total += np.sum(np.abs(generate_channels(cfg, rng).G) ** 2)
        assert abs(total / draws - expected) < 0.02 * expected

    def test_users_inside_disk(self):
        cfg = ScenarioConfig(K=20, user_radius=5.0, seed=9)
        ch = generate_channels(cfg, np.random.default_rng(9))
        dist = np.linalg.norm(ch.user_pos - np.asarray(cfg.user_center), axis=1)
        assert np.all(dist <= cfg.user_radius + 1e-12)
        assert np.all(ch.user_pos[:, 2] == cfg.user_center[2])


class TestBudgets:
    def test_even_split_covers_budget(self):
        cfg = ScenarioConfig()
        p_t, p_a, active = split_budget(cfg)
        assert active
        total = cfg.xi_t * p_t + cfg.xi_a * p_a + cfg.M * (cfg.p_sw + cfg.p_dc)
        assert_allclose(total, cfg.p_budget, rtol=1e-12)

    def test_starved_budget_disables_ris(self):
        cfg = ScenarioConfig(p_budget=dbm_to_watts(10.0))
        p_t, p_a, active = split_budget(cfg)
        assert not active and p_a == 0.0
        assert_allclose(cfg.xi_t * p_t, cfg.p_budget)

    def test_passive_budget(self):
        cfg = ScenarioConfig()
        p_t, active = split_budget_passive(cfg)
        assert active
        assert_allclose(cfg.xi_t * p_t + cfg.M * cfg.p_sw, cfg.p_budget)

    def test_fraction_rule(self):
        cfg = ScenarioConfig(split_rule="fraction=0.7")
        p_t, p_a, _ = split_budget(cfg)
        assert_allclose(cfg.xi_t * p_t / (cfg.xi_t * p_t + cfg.xi_a * p_a), 0.7)


class TestConfigIO:
    def test_parse_power_units(self):
        assert_allclose(parse_power("20 dBm"), 0.1)
        assert_allclose(parse_power("9dBW"), 10 ** 0.9)
        assert_allclose(parse_power("5 mW"), 5e-3)
        assert_allclose(parse_power("0.25 W"), 0.25)
        assert_allclose(parse_power(1e-11), 1e-11)

    def test_roundtrip(self, tmp_path):
        cfg = ScenarioConfig(M=8, K=2, p_budget=parse_power("23 dBm"), seed=77)
        path = tmp_path / "scenario.cfg"
        save_config(cfg, path)
        assert load_config(path) == cfg

    def test_file_with_units_and_comments(self, tmp_path):
        path = tmp_path / "s.cfg"
        path.write_text(
            "# scenario overrides\n"
            "M = 8\n"
            "p_budget = 30 dBm   # one watt\n"
            "sigma_k_sq = -70 dBm\n"
            "bs_pos = 0, 0, 12\n"
        )
        cfg = load_config(path)
        assert cfg.M == 8
        assert_allclose(cfg.p_budget, 1.0)
        assert_allclose(cfg.sigma_k_sq, 1e-10)
        assert cfg.bs_pos == (0.0, 0.0, 12.0)

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("unknown_field = 3\n")
        with pytest.raises(InvalidInput):
            load_config(path)

    def test_invariants_enforced(self):
        with pytest.raises(InvalidInput):
            ScenarioConfig(kappa_t=1.5)
        with pytest.raises(InvalidInput):
            ScenarioConfig(xi_t=0.5)
        with pytest.raises(InvalidInput):
            ScenarioConfig(M=0)
