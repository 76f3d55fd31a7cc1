from __future__ import annotations

import math

import numpy as np
import pytest

from aiskintojas.nodes.explainer import DEFAULT_PARAMS, ALPHA_PARAMETERS, choice_matrix
from aiskintojas.nodes.inference_fit import (
    ABLATION_PRESETS,
    Ablation,
    FitConfig,
    StepRule,
    fit,
    from_unconstrained,
    gradient,
    negative_log_likelihood,
    penalized_objective,
    to_unconstrained,
)
from aiskintojas.nodes.simulate import simulate_dataset
from aiskintojas.nodes.stats import r_squared
from aiskintojas.utils.errors import DomainError
from aiskintojas.utils.responses import Dataset, scenario_counts

ZERO_ALPHAS = DEFAULT_PARAMS.with_values(
    alpha_explanandum=0.0, alpha_latents=0.0, alpha_social_confident=0.0, alpha_social_insecure=0.0
)


def test_nll_of_uniform_model(golden):
    tactful = golden.for_group("tactful")
    assert negative_log_likelihood(ZERO_ALPHAS, tactful) == pytest.approx(12 * math.log(4), abs=1e-12)


def test_nll_accepts_counts(golden):
    tactful = golden.for_group("tactful")
    counts = scenario_counts(tactful)
    assert negative_log_likelihood(DEFAULT_PARAMS, counts) == pytest.approx(
        negative_log_likelihood(DEFAULT_PARAMS, tactful)
    )


def test_nll_empty_dataset():
    with pytest.raises(DomainError):
        negative_log_likelihood(DEFAULT_PARAMS, Dataset(records=()))


def test_penalty_is_l1_on_alphas(golden):
    cfg = FitConfig(l1_lambda=0.5)
    tactful = golden.for_group("tactful")
    expected = negative_log_likelihood(DEFAULT_PARAMS, tactful) + 0.5 * (1 + 1 + 0 + 5)
    assert penalized_objective(DEFAULT_PARAMS, tactful, cfg) == pytest.approx(expected)


def test_unconstrained_roundtrip():
    cfg = FitConfig()
    back = from_unconstrained(to_unconstrained(DEFAULT_PARAMS), cfg)
    for name in ("prior_excess", "prior_virus", *ALPHA_PARAMETERS):
        assert getattr(back, name) == pytest.approx(getattr(DEFAULT_PARAMS, name), abs=1e-14)


def test_gradient_zero_on_pinned_coordinates(golden):
    cfg = FitConfig(ablation=ABLATION_PRESETS["no-regret-no-inference"])
    g = gradient(DEFAULT_PARAMS, golden.for_group("tactful"), cfg)
    assert g.shape == (6,)
    assert g[3] == 0.0 and g[4] == 0.0 and g[5] == 0.0
    assert np.any(g[:3] != 0.0)


def test_gradient_matches_one_sided_difference(golden):
    tactful = golden.for_group("tactful")
    cfg = FitConfig()
    g = gradient(DEFAULT_PARAMS, tactful, cfg)
    h = 1e-6
    theta = to_unconstrained(DEFAULT_PARAMS)
    for i in range(6):
        up = theta.copy()
        up[i] += h
        numeric = (
            negative_log_likelihood(from_unconstrained(up, cfg), tactful)
            - negative_log_likelihood(DEFAULT_PARAMS, tactful)
        ) / h
        assert g[i] == pytest.approx(numeric, abs=1e-4)


def test_ablation_df():
    assert {name: FitConfig(ablation=a).n_pinned() for name, a in ABLATION_PRESETS.items()} == {
        "no-regret": 2,
        "no-inference": 1,
        "no-regret-no-inference": 3,
        "no-understanding": 1,
    }


def test_config_validation():
    with pytest.raises(DomainError):
        FitConfig(restarts=0)
    with pytest.raises(DomainError):
        FitConfig(l1_lambda=-1.0)
    with pytest.raises(DomainError):
        FitConfig(seed=-1)


def test_fit_is_deterministic(golden, quick_config):
    tactful = golden.for_group("tactful")
    a = fit(tactful, quick_config)
    b = fit(tactful, quick_config)
    assert a == b


def test_fit_not_worse_than_any_start(golden, quick_config):
    res = fit(golden.for_group("candid"), quick_config)
    assert len(res.initial_objectives) == quick_config.restarts
    assert res.penalized_objective <= min(res.initial_objectives) + 1e-12
    assert res.nll == pytest.approx(negative_log_likelihood(res.params, golden.for_group("candid")))


def test_ablated_weights_stay_zero(golden, quick_config):
    cfg = quick_config.with_ablation(frozenset({Ablation.REGRET, Ablation.EXPLANANDUM}))
    res = fit(golden.for_group("tactful"), cfg)
    assert res.params.alpha_social_confident == 0.0
    assert res.params.alpha_social_insecure == 0.0
    assert res.params.alpha_explanandum == 0.0


def test_large_penalty_zeroes_all_alphas(golden):
    cfg = FitConfig(l1_lambda=1000.0, restarts=2, max_iterations=50, seed=1)
    res = fit(golden.for_group("tactful"), cfg)
    for name in ALPHA_PARAMETERS:
        assert getattr(res.params, name) == 0.0


def test_warm_start_is_never_lost(golden):
    tactful = golden.for_group("tactful")
    cfg = FitConfig(restarts=1, max_iterations=1, seed=0)
    res = fit(tactful, cfg, warm_starts=[DEFAULT_PARAMS])
    assert len(res.initial_objectives) == 2
    assert res.penalized_objective <= penalized_objective(DEFAULT_PARAMS, tactful, cfg) + 1e-9


def test_fit_rejects_mixed_groups(golden, quick_config):
    with pytest.raises(DomainError, match="tactful"):
        fit(golden, quick_config)


def test_fit_rejects_empty(quick_config):
    with pytest.raises(DomainError):
        fit(Dataset(records=()), quick_config)


def test_fit_carries_fixed_configuration(golden, quick_config):
    res = fit(golden.for_group("tactful"), quick_config)
    assert res.params.epsilon == quick_config.epsilon
    assert res.params.temperature == quick_config.temperature
    assert res.config is quick_config


@pytest.mark.slow
def test_parameter_recovery():
    data = simulate_dataset(DEFAULT_PARAMS, 200, "tactful", seed=7)
    res = fit(data, FitConfig(restarts=20, l1_lambda=0.005, seed=7))
    assert res.converged
    assert r_squared(choice_matrix(DEFAULT_PARAMS), choice_matrix(res.params)) >= 0.98
    assert res.params.alpha_social_insecure > res.params.alpha_social_confident


def test_social_partials_equal_for_symmetric_data():
    counts = np.array(
        [
            [3, 1, 4, 2],
            [2, 5, 0, 3],
            [6, 1, 1, 2],
        ]
    )
    symmetric = np.vstack([counts, counts])
    params = DEFAULT_PARAMS.with_values(alpha_social_confident=2.0, alpha_social_insecure=2.0)
    g = gradient(params, symmetric, FitConfig())
    assert g[4] == pytest.approx(g[5], rel=1e-7, abs=1e-9)
    assert g[4] != 0.0


def test_gradient_matches_wider_central_difference_at_random_points():
    data = simulate_dataset(DEFAULT_PARAMS, 25, "tactful", seed=13)
    counts = scenario_counts(data)
    cfg = FitConfig()
    rng = np.random.default_rng(101)
    h = 1e-4
    for _ in range(10):
        theta = np.concatenate([rng.uniform(-3.0, 3.0, size=2), rng.uniform(-2.0, 2.0, size=4)])
        params = from_unconstrained(theta, cfg)
        g = gradient(params, counts, cfg)
        numeric = np.zeros(6)
        for i in range(6):
            up = theta.copy()
            dn = theta.copy()
            up[i] += h
            dn[i] -= h
            numeric[i] = (
                negative_log_likelihood(from_unconstrained(up, cfg), counts)
                - negative_log_likelihood(from_unconstrained(dn, cfg), counts)
            ) / (2.0 * h)
        np.testing.assert_allclose(g, numeric, rtol=1e-4, atol=1e-5)


def test_gradient_with_penalty_adds_l1_subgradient(golden):
    tactful = golden.for_group("tactful")
    cfg = FitConfig(l1_lambda=0.5)
    params = DEFAULT_PARAMS.with_values(alpha_latents=-1.0)
    smooth = gradient(params, tactful, cfg)
    full = gradient(params, tactful, cfg, include_penalty=True)
    # alpha_social_confident = 0: subgradientas 0.
    np.testing.assert_allclose(full - smooth, [0.0, 0.0, 0.5, -0.5, 0.0, 0.5], atol=1e-12)


def test_fully_pinned_model_is_uniform(golden, quick_config):
    tactful = golden.for_group("tactful")
    cfg = quick_config.with_ablation(frozenset(Ablation))
    res = fit(tactful, cfg)
    for name in ALPHA_PARAMETERS:
        assert getattr(res.params, name) == 0.0
    assert res.nll == pytest.approx(len(tactful) * math.log(4), abs=1e-9)
    assert res.converged


def test_fixed_step_rule_descends(golden):
    tactful = golden.for_group("tactful")
    cfg = FitConfig(step_rule=StepRule.FIXED, step_size=0.01, restarts=2, max_iterations=300, seed=4)
    res = fit(tactful, cfg)
    assert res.penalized_objective < min(res.initial_objectives)
    assert res.config.step_rule is StepRule.FIXED
