"""Didziausio tiketinumo parametru pritaikymas su L1 reguliarizacija.

Optimizuojama neapribotose koordinatese
theta = (logit prior_excess, logit prior_virus, a_expl, a_lat, a_soc_conf, a_soc_ins).
Glotni dalis (NLL) leidziasi gradientu (centriniai baigtiniai skirtumai),
L1 dalis tvarkoma proksimaliniu minkstuoju slenksciu tik alpha koordinatems.
"""
from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np
from scipy.special import expit, logit

from aiskintojas.nodes.explainer import (
    ALPHA_PARAMETERS,
    FREE_PARAMETERS,
    ModelOptions,
    ParamSet,
    log_choice_matrix,
)
from aiskintojas.utils.errors import DomainError, NumericError
from aiskintojas.utils.responses import Dataset, scenario_counts


logger = logging.getLogger(__name__)


class Ablation(str, Enum):
    REGRET = "regret"
    LATENTS = "latents"
    EXPLANANDUM = "explanandum"


# Kurios theta koordinatės prisegamos prie 0.
_PINNED_INDICES: dict[Ablation, tuple[int, ...]] = {
    Ablation.REGRET: (4, 5),
    Ablation.LATENTS: (3,),
    Ablation.EXPLANANDUM: (2,),
}

ABLATION_PRESETS: dict[str, frozenset[Ablation]] = {
    "no-regret": frozenset({Ablation.REGRET}),
    "no-inference": frozenset({Ablation.LATENTS}),
    "no-regret-no-inference": frozenset({Ablation.REGRET, Ablation.LATENTS}),
    "no-understanding": frozenset({Ablation.EXPLANANDUM}),
}

_N_THETA = len(FREE_PARAMETERS)
_ALPHA_SLICE = slice(2, _N_THETA)
_LOGIT_BOUND = 30.0


class StepRule(str, Enum):
    FIXED = "fixed"
    ADAPTIVE = "adaptive"


@dataclass(frozen=True)
class FitConfig:
    l1_lambda: float = 0.005
    restarts: int = 20
    max_iterations: int = 5000
    convergence_tol: float = 1e-8
    step_rule: StepRule = StepRule.ADAPTIVE
    step_size: float = 0.01
    seed: int = 0
    ablation: frozenset[Ablation] = frozenset()
    finite_difference_h: float = 1e-5
    # Fiksuota (nepritaikoma) modelio konfiguracija.
    epsilon: float = 0.001
    temperature: float = 1.0
    options: ModelOptions = field(default_factory=ModelOptions)

    def __post_init__(self) -> None:
        if not (self.l1_lambda >= 0 and math.isfinite(self.l1_lambda)):
            raise DomainError(f"l1_lambda turi buti >= 0, gauta {self.l1_lambda}")
        if self.restarts < 1:
            raise DomainError(f"restarts turi buti >= 1, gauta {self.restarts}")
        if self.max_iterations < 1:
            raise DomainError(f"max_iterations turi buti >= 1, gauta {self.max_iterations}")
        for name in ("convergence_tol", "step_size", "finite_difference_h"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} turi buti teigiamas")
        if not 0 <= self.seed < 2**64:
            raise DomainError(f"seed turi buti 64 bitu neneigiamas sveikasis skaicius, gauta {self.seed}")
        object.__setattr__(self, "ablation", frozenset(Ablation(a) for a in self.ablation))

    def pinned_mask(self) -> np.ndarray:
        mask = np.zeros(_N_THETA, dtype=bool)
        for a in self.ablation:
            mask[list(_PINNED_INDICES[a])] = True
        return mask

    def n_pinned(self) -> int:
        return int(self.pinned_mask().sum())

    def with_ablation(self, ablation: frozenset[Ablation]) -> FitConfig:
        return replace(self, ablation=ablation)


@dataclass(frozen=True)
class FitResult:
    params: ParamSet
    nll: float
    penalized_objective: float
    converged: bool
    restart_index: int
    iterations: int
    initial_objectives: tuple[float, ...] = ()
    config: FitConfig = field(default_factory=FitConfig)

    @property
    def log_likelihood(self) -> float:
        return -self.nll


# --- Koordinaciu transformacijos ---

def to_unconstrained(params: ParamSet) -> np.ndarray:
    theta = params.free_vector()
    theta[0] = logit(params.prior_excess)
    theta[1] = logit(params.prior_virus)
    return theta


def from_unconstrained(theta: np.ndarray, config: FitConfig) -> ParamSet:
    return ParamSet(
        prior_excess=float(expit(theta[0])),
        prior_virus=float(expit(theta[1])),
        alpha_explanandum=float(theta[2]),
        alpha_latents=float(theta[3]),
        alpha_social_confident=float(theta[4]),
        alpha_social_insecure=float(theta[5]),
        epsilon=config.epsilon,
        temperature=config.temperature,
        options=config.options,
    )


def _counts(data: Dataset | np.ndarray) -> np.ndarray:
    if isinstance(data, Dataset):
        if len(data) == 0:
            raise DomainError("tuscias duomenu rinkinys")
        return scenario_counts(data)
    counts = np.asarray(data)
    if counts.sum() <= 0:
        raise DomainError("tuscias duomenu rinkinys")
    return counts


def _nll_counts(params: ParamSet, counts: np.ndarray) -> float:
    logp = log_choice_matrix(params)
    # 0 * log(0) laikome 0.
    return float(-(counts * np.where(counts > 0, logp, 0.0)).sum())


def _l1(alphas: np.ndarray, l1_lambda: float) -> float:
    return float(l1_lambda * np.abs(alphas).sum())


def negative_log_likelihood(params: ParamSet, data: Dataset | np.ndarray) -> float:
    """-sum ln Pr(pasirinktas pasakymas | scenarijus). Priima ir (6,4) skaiciu masyva."""
    return _nll_counts(params, _counts(data))


def penalized_objective(params: ParamSet, data: Dataset | np.ndarray, config: FitConfig) -> float:
    alphas = np.array([getattr(params, n) for n in ALPHA_PARAMETERS])
    return negative_log_likelihood(params, data) + _l1(alphas, config.l1_lambda)


class _Objective:
    """Glotni dalis theta koordinatese su fiksuotais skaiciais."""

    def __init__(self, counts: np.ndarray, config: FitConfig) -> None:
        self.counts = counts
        self.config = config
        self.pinned = config.pinned_mask()

    def smooth(self, theta: np.ndarray) -> float:
        val = _nll_counts(from_unconstrained(theta, self.config), self.counts)
        if not math.isfinite(val):
            raise NumericError(f"nebaigtine tikslo funkcijos reiksme taske {theta.tolist()}")
        return val

    def penalty(self, theta: np.ndarray) -> float:
        return _l1(theta[_ALPHA_SLICE], self.config.l1_lambda)

    def grad(self, theta: np.ndarray) -> np.ndarray:
        h = self.config.finite_difference_h
        g = np.zeros(_N_THETA)
        for i in range(_N_THETA):
            if self.pinned[i]:
                continue
            up = theta.copy()
            dn = theta.copy()
            up[i] += h
            dn[i] -= h
            g[i] = (self.smooth(up) - self.smooth(dn)) / (2.0 * h)
        return g

    def prox(self, theta: np.ndarray, step: float) -> np.ndarray:
        out = theta.copy()
        a = out[_ALPHA_SLICE]
        out[_ALPHA_SLICE] = np.sign(a) * np.maximum(np.abs(a) - step * self.config.l1_lambda, 0.0)
        out[self.pinned] = 0.0
        # expit(30) < 1: priorai lieka grieztai (0,1) viduje.
        out[:2] = np.clip(out[:2], -_LOGIT_BOUND, _LOGIT_BOUND)
        return out


def gradient(
    params: ParamSet,
    data: Dataset | np.ndarray,
    config: FitConfig,
    *,
    include_penalty: bool = False,
) -> np.ndarray:
    """Glotnios dalies gradientas neapribotose koordinatese (ilgis 6).

    Prisegtu koordinaciu dedamosios lygios 0. Su include_penalty pridedamas
    L1 subgradientas (0 taske alpha = 0).
    """
    obj = _Objective(_counts(data), config)
    theta = to_unconstrained(params)
    g = obj.grad(theta)
    if include_penalty:
        sub = np.zeros(_N_THETA)
        sub[_ALPHA_SLICE] = config.l1_lambda * np.sign(theta[_ALPHA_SLICE])
        sub[obj.pinned] = 0.0
        g = g + sub
    return g


@dataclass(frozen=True)
class _RestartOutcome:
    theta: np.ndarray
    objective: float
    converged: bool
    iterations: int
    initial_objective: float


def _initial_theta(config: FitConfig, restart_index: int) -> np.ndarray:
    rng = np.random.default_rng([config.seed, restart_index])
    theta = np.concatenate([rng.uniform(-3.0, 3.0, size=2), rng.uniform(-2.0, 2.0, size=4)])
    theta[config.pinned_mask()] = 0.0
    return theta


def _descend(obj: _Objective, theta0: np.ndarray) -> _RestartOutcome:
    cfg = obj.config
    theta = obj.prox(theta0, 0.0)
    f = obj.smooth(theta)
    F = f + obj.penalty(theta)
    initial = F
    best_theta, best_F = theta, F
    step = cfg.step_size
    converged = False
    it = 0

    for it in range(1, cfg.max_iterations + 1):
        g = obj.grad(theta)
        while True:
            cand = obj.prox(theta - step * g, step)
            try:
                f_c = obj.smooth(cand)
            except NumericError:
                f_c = math.inf
            if cfg.step_rule is StepRule.FIXED:
                break
            d = cand - theta
            if f_c <= f + float(g @ d) + float(d @ d) / (2.0 * step) + 1e-12:
                break
            step *= 0.5
            if step < 1e-14:
                break

        if not math.isfinite(f_c):
            logger.debug("nutrauktas nusileidimas: nebaigtine reiksme po %d iteraciju", it)
            break

        F_c = f_c + obj.penalty(cand)
        change = abs(F - F_c)
        theta, f, F = cand, f_c, F_c
        if F < best_F:
            best_theta, best_F = theta, F
        if change < cfg.convergence_tol:
            converged = True
            break
        if step < 1e-14:
            break
        if cfg.step_rule is StepRule.ADAPTIVE:
            step *= 1.5

    return _RestartOutcome(
        theta=best_theta,
        objective=best_F,
        converged=converged,
        iterations=it,
        initial_objective=initial,
    )


def fit(
    data: Dataset,
    config: FitConfig = FitConfig(),
    *,
    warm_starts: Sequence[ParamSet] = (),
) -> FitResult:
    """Geriausias baudos tikslas per `restarts` atsitiktiniu pradziu (+ warm_starts).

    Lygiu atveju laimi mazesnis pradzios indeksas. Rezultatas deterministinis
    pagal seed: kiekviena pradzia turi savo atsitiktiniu skaiciu srauta (seed, indeksas).
    """
    if len(data) == 0:
        raise DomainError("tuscias duomenu rinkinys")
    groups = data.groups()
    if len(groups) > 1:
        raise DomainError(
            f"pritaikoma vienai grupei; rasta: {', '.join(g.value for g in groups)}"
        )
    counts = scenario_counts(data)
    obj = _Objective(counts, config)

    starts = [_initial_theta(config, i) for i in range(config.restarts)]
    starts += [to_unconstrained(p) for p in warm_starts]

    best: tuple[int, _RestartOutcome] | None = None
    initial_objectives: list[float] = []
    any_converged = False
    for idx, theta0 in enumerate(starts):
        try:
            outcome = _descend(obj, theta0)
        except NumericError as e:
            logger.warning("pradzia %d praleista: %s", idx, e)
            continue
        logger.debug(
            "pradzia %d: tikslas %.6f (is %.6f), iteraciju %d, konvergavo=%s",
            idx, outcome.objective, outcome.initial_objective, outcome.iterations, outcome.converged,
        )
        any_converged = any_converged or outcome.converged
        if best is None or outcome.objective < best[1].objective:
            best = (idx, outcome)
        initial_objectives.append(outcome.initial_objective)

    if best is None:
        raise NumericError("visos pradzios baigesi nebaigtinemis reiksmemis")
    idx, outcome = best
    params = from_unconstrained(outcome.theta, config)
    nll = _nll_counts(params, counts)
    if not any_converged:
        logger.warning("nei viena is %d pradziu nekonvergavo", len(starts))
    logger.info(
        "pritaikyta: NLL %.6f, tikslas %.6f, pradzia %d, ablacija {%s}",
        nll, outcome.objective, idx, ",".join(sorted(a.value for a in config.ablation)),
    )
    return FitResult(
        params=params,
        nll=nll,
        penalized_objective=outcome.objective,
        converged=any_converged,
        restart_index=idx,
        iterations=outcome.iterations,
        initial_objectives=tuple(initial_objectives),
        config=config,
    )
