"""Gydytojo agentas: trys naudingumo nariai kiekvienam pasakymui ir softmax pasirinkimas.

V(u) = a_explanandum * Pr(S | u) + a_latents * Pr(tiesa | u, S) - a_social^R * c_social(u)
Pr(u) ~ exp(temperature * V(u))
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import NamedTuple

import numpy as np
from scipy.special import log_softmax, softmax

from aiskintojas.nodes.causal_core import (
    UTTERANCES,
    CounterfactualMode,
    LikelihoodTable,
    Utterance,
    condition_on_sick,
    consistency_mask,
    counterfactual_array,
    expected_regret,
    independent_prior,
    prob_sick,
    restrict,
)
from aiskintojas.utils.errors import DomainError
from aiskintojas.utils.scenarios import SCENARIOS, TRUTHS, Scenario, Temperament, truth_index


class SocialCostConvention(str, Enum):
    # regret: c = 1 - E[Pr(S_cf=1)]; literal: c = E[Pr(S_cf=1)].
    REGRET = "regret"
    LITERAL = "literal"


@dataclass(frozen=True)
class ModelOptions:
    counterfactual_mode: CounterfactualMode = CounterfactualMode.TWIN
    latents_given_sick: bool = True
    regret_given_sick: bool = True
    social_cost_convention: SocialCostConvention = SocialCostConvention.REGRET


FREE_PARAMETERS: tuple[str, ...] = (
    "prior_excess",
    "prior_virus",
    "alpha_explanandum",
    "alpha_latents",
    "alpha_social_confident",
    "alpha_social_insecure",
)

ALPHA_PARAMETERS: tuple[str, ...] = FREE_PARAMETERS[2:]


@dataclass(frozen=True)
class ParamSet:
    """6 laisvi parametrai ir fiksuota konfiguracija (epsilon, temperatura, modelio variantas)."""

    prior_excess: float
    prior_virus: float
    alpha_explanandum: float
    alpha_latents: float
    alpha_social_confident: float
    alpha_social_insecure: float
    epsilon: float = 0.001
    temperature: float = 1.0
    options: ModelOptions = field(default_factory=ModelOptions)

    def __post_init__(self) -> None:
        for name in ("prior_excess", "prior_virus"):
            p = getattr(self, name)
            if not 0.0 < p < 1.0:
                raise DomainError(f"{name} turi buti intervale (0,1), gauta {p}")
        for name in ALPHA_PARAMETERS:
            if not np.isfinite(getattr(self, name)):
                raise DomainError(f"{name} turi buti baigtinis skaicius")
        if not 0.0 < self.epsilon < 0.125:
            raise DomainError(f"epsilon turi buti intervale (0, 0.125), gauta {self.epsilon}")
        if not (np.isfinite(self.temperature) and self.temperature > 0):
            raise DomainError(f"temperature turi buti teigiama, gauta {self.temperature}")

    def table(self) -> LikelihoodTable:
        return LikelihoodTable.standard(self.epsilon)

    def alpha_social(self, temperament: Temperament) -> float:
        if temperament is Temperament.INSECURE:
            return self.alpha_social_insecure
        return self.alpha_social_confident

    def free_vector(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in FREE_PARAMETERS], dtype=float)

    def with_values(self, **changes: object) -> ParamSet:
        return replace(self, **changes)


# Pavyzdinis rinkinys: takto reikalaujantis gydytojas ir nesaugus pacientas.
DEFAULT_PARAMS = ParamSet(
    prior_excess=0.1,
    prior_virus=0.1,
    alpha_explanandum=1.0,
    alpha_latents=1.0,
    alpha_social_confident=0.0,
    alpha_social_insecure=5.0,
)


@dataclass(frozen=True, eq=False)
class ChoiceDistribution:
    probs: np.ndarray

    def __post_init__(self) -> None:
        p = np.array(self.probs, dtype=float)
        if p.shape != (len(UTTERANCES),):
            raise DomainError(f"tikimasi {len(UTTERANCES)} tikimybiu, gauta {p.shape}")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise DomainError("pasirinkimo tikimybes turi buti neneigiamos ir sudeti 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    def __getitem__(self, utterance: Utterance) -> float:
        return float(self.probs[UTTERANCES.index(utterance)])

    def argmax(self) -> Utterance:
        return UTTERANCES[int(np.argmax(self.probs))]

    def as_dict(self) -> dict[str, float]:
        return {u.label: float(p) for u, p in zip(UTTERANCES, self.probs)}


class UtilityTerms(NamedTuple):
    explanandum: float
    latents: float
    social: float


def _table(params: ParamSet, table: LikelihoodTable | None) -> LikelihoodTable:
    return table if table is not None else params.table()


def _belief_after(params: ParamSet, scenario: Scenario, u: Utterance):
    prior = independent_prior(params.prior_excess, params.prior_virus)
    return restrict(prior, scenario.truth, u)


def v_explanandum(
    params: ParamSet, scenario: Scenario, u: Utterance, table: LikelihoodTable | None = None
) -> float:
    """Pr(S=1 | u): tikejimas atnaujintas tik pasakymu, be S salygos."""
    return prob_sick(_belief_after(params, scenario, u), _table(params, table))


def v_latents(
    params: ParamSet, scenario: Scenario, u: Utterance, table: LikelihoodTable | None = None
) -> float:
    """Tikrojo pasaulio aposteriorine tikimybe."""
    belief = _belief_after(params, scenario, u)
    if params.options.latents_given_sick:
        belief = condition_on_sick(belief, _table(params, table))
    return belief.weight(scenario.truth)


def social_cost(
    params: ParamSet, scenario: Scenario, u: Utterance, table: LikelihoodTable | None = None
) -> float:
    opts = params.options
    regret = expected_regret(
        _belief_after(params, scenario, u),
        _table(params, table),
        opts.counterfactual_mode,
        given_sick=opts.regret_given_sick,
    )
    if opts.social_cost_convention is SocialCostConvention.LITERAL:
        return 1.0 - regret
    return regret


def utility_terms(
    params: ParamSet, scenario: Scenario, u: Utterance, table: LikelihoodTable | None = None
) -> UtilityTerms:
    return UtilityTerms(
        explanandum=v_explanandum(params, scenario, u, table),
        latents=v_latents(params, scenario, u, table),
        social=social_cost(params, scenario, u, table),
    )


def total_utility(
    params: ParamSet, scenario: Scenario, u: Utterance, table: LikelihoodTable | None = None
) -> float:
    terms = utility_terms(params, scenario, u, table)
    return (
        params.alpha_explanandum * terms.explanandum
        + params.alpha_latents * terms.latents
        - params.alpha_social(scenario.temperament) * terms.social
    )


def softmax_choice(utilities: np.ndarray, temperature: float = 1.0) -> np.ndarray:
    # scipy atima maksimuma pries eksponentes.
    return softmax(temperature * np.asarray(utilities, dtype=float))


def choice_distribution(
    params: ParamSet, scenario: Scenario, table: LikelihoodTable | None = None
) -> ChoiceDistribution:
    utilities = [total_utility(params, scenario, u, table) for u in UTTERANCES]
    return ChoiceDistribution(softmax_choice(np.array(utilities), params.temperature))


# --- Vektorizuotas kelias (naudojamas pritaikymui) ---

_MASKS = np.array([[consistency_mask(t, u) for u in UTTERANCES] for t in TRUTHS])
_TRUTH_E = np.array([t.excess for t in TRUTHS])
_TRUTH_V = np.array([t.virus for t in TRUTHS])
_SCENARIO_TRUTH = np.array([truth_index(s.truth) for s in SCENARIOS])
_SCENARIO_INSECURE = np.array([s.temperament is Temperament.INSECURE for s in SCENARIOS])


def feature_array(
    prior_excess: float,
    prior_virus: float,
    table: LikelihoodTable,
    options: ModelOptions = ModelOptions(),
) -> np.ndarray:
    """(3 tiesos, 4 pasakymai, 3 nariai) masyvas: explanandum, latents, social."""
    prior = np.outer([1.0 - prior_excess, prior_excess], [1.0 - prior_virus, prior_virus])
    t = table.as_array()

    restricted = prior * _MASKS
    restricted = restricted / restricted.sum(axis=(2, 3), keepdims=True)
    joint = restricted * t
    explanandum = joint.sum(axis=(2, 3))
    posterior = joint / explanandum[..., None, None]

    lat_belief = posterior if options.latents_given_sick else restricted
    latents = lat_belief[
        np.arange(len(TRUTHS))[:, None],
        np.arange(len(UTTERANCES))[None, :],
        _TRUTH_E[:, None],
        _TRUTH_V[:, None],
    ]

    reg_belief = posterior if options.regret_given_sick else restricted
    cf_expected = (reg_belief * counterfactual_array(table, options.counterfactual_mode)).sum(axis=(2, 3))
    if options.social_cost_convention is SocialCostConvention.LITERAL:
        social = cf_expected
    else:
        social = 1.0 - cf_expected

    return np.stack([explanandum, latents, social], axis=-1)


def utility_matrix(params: ParamSet, table: LikelihoodTable | None = None) -> np.ndarray:
    """(6 scenarijai, 4 pasakymai) bendras naudingumas, SCENARIOS tvarka."""
    feats = feature_array(params.prior_excess, params.prior_virus, _table(params, table), params.options)
    per_scenario = feats[_SCENARIO_TRUTH]
    alpha_social = np.where(_SCENARIO_INSECURE, params.alpha_social_insecure, params.alpha_social_confident)
    return (
        params.alpha_explanandum * per_scenario[..., 0]
        + params.alpha_latents * per_scenario[..., 1]
        - alpha_social[:, None] * per_scenario[..., 2]
    )


def choice_matrix(params: ParamSet, table: LikelihoodTable | None = None) -> np.ndarray:
    return softmax(params.temperature * utility_matrix(params, table), axis=1)


def log_choice_matrix(params: ParamSet, table: LikelihoodTable | None = None) -> np.ndarray:
    return log_softmax(params.temperature * utility_matrix(params, table), axis=1)
