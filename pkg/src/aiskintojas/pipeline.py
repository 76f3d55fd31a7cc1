from __future__ import annotations

import logging
import os
from collections.abc import Sequence
from dataclasses import dataclass, replace

from dotenv import load_dotenv

from aiskintojas.nodes.causal_core import CounterfactualMode
from aiskintojas.nodes.explainer import ModelOptions, ParamSet, choice_matrix
from aiskintojas.nodes.inference_fit import ABLATION_PRESETS, Ablation, FitConfig, FitResult, fit
from aiskintojas.nodes.simulate import simulate_dataset
from aiskintojas.nodes.stats import (
    BootstrapReport,
    LrtReport,
    Statistic,
    bootstrap_ci,
    likelihood_ratio_test,
    model_r_squared,
    r_squared,
    two_proportion_test,
)
from aiskintojas.utils.errors import ConfigError, DomainError
from aiskintojas.utils.responses import Dataset, Group, Structure, disclosure_counts


logger = logging.getLogger(__name__)

_LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


@dataclass(frozen=True)
class RunConfig:
    epsilon: float = 0.001
    counterfactual_mode: CounterfactualMode = CounterfactualMode.TWIN
    restarts: int = 20
    l1_lambda: float = 0.005
    max_iterations: int = 5000
    log_level: str = "WARNING"

    @classmethod
    def from_env(cls) -> RunConfig:
        """Numatytosios reiksmes is aplinkos (ir .env failo, jei yra)."""
        load_dotenv()
        base = cls()
        return cls(
            epsilon=_env_float("AISKINTOJAS_EPSILON", base.epsilon),
            counterfactual_mode=_env_cf_mode("AISKINTOJAS_CF_MODE", base.counterfactual_mode),
            restarts=_env_int("AISKINTOJAS_RESTARTS", base.restarts, minimum=1),
            l1_lambda=_env_float("AISKINTOJAS_L1", base.l1_lambda),
            max_iterations=_env_int("AISKINTOJAS_MAX_ITERATIONS", base.max_iterations, minimum=1),
            log_level=_env_log_level("AISKINTOJAS_LOG_LEVEL", base.log_level),
        )

    def fit_config(self, *, seed: int = 0, ablation: frozenset[Ablation] = frozenset()) -> FitConfig:
        return FitConfig(
            l1_lambda=self.l1_lambda,
            restarts=self.restarts,
            max_iterations=self.max_iterations,
            seed=seed,
            ablation=ablation,
            epsilon=self.epsilon,
            options=ModelOptions(counterfactual_mode=self.counterfactual_mode),
        )


def _env(name: str) -> str | None:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return None
    return raw.strip()


def _env_float(name: str, default: float) -> float:
    raw = _env(name)
    if raw is None:
        return default
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{name}: tikimasi skaiciaus, gauta {raw!r}") from None


def _env_int(name: str, default: int, *, minimum: int) -> int:
    raw = _env(name)
    if raw is None:
        return default
    try:
        val = int(raw)
    except ValueError:
        raise ConfigError(f"{name}: tikimasi sveikojo skaiciaus, gauta {raw!r}") from None
    if val < minimum:
        raise ConfigError(f"{name}: turi buti >= {minimum}, gauta {val}")
    return val


def _env_cf_mode(name: str, default: CounterfactualMode) -> CounterfactualMode:
    raw = _env(name)
    if raw is None:
        return default
    try:
        return CounterfactualMode(raw.lower())
    except ValueError:
        allowed = ", ".join(m.value for m in CounterfactualMode)
        raise ConfigError(f"{name}: leidziama {allowed}, gauta {raw!r}") from None


def _env_log_level(name: str, default: str) -> str:
    raw = _env(name)
    if raw is None:
        return default
    if raw.upper() not in _LOG_LEVELS:
        raise ConfigError(f"{name}: leidziama {', '.join(_LOG_LEVELS)}, gauta {raw!r}")
    return raw.upper()


def fit_group(data: Dataset, group: Group | str, config: FitConfig) -> FitResult:
    """Pritaiko 6 laisvus parametrus vienos grupes dalyviams."""
    subset = data.for_group(group)
    logger.info("pritaikoma grupe %s: %d atsakymu", Group(group).value, len(subset))
    return fit(subset, config)


def _r2_or_none(params: ParamSet, data: Dataset) -> float | None:
    try:
        return model_r_squared(params, data)
    except DomainError as e:
        logger.warning("r^2 neapibreztas: %s", e)
        return None


@dataclass(frozen=True)
class ComparisonRow:
    name: str
    fit: FitResult
    lrt: LrtReport
    r2: float | None


@dataclass(frozen=True)
class ComparisonReport:
    group: Group
    full: FitResult
    full_r2: float | None
    rows: tuple[ComparisonRow, ...]


def compare_ablations(
    data: Dataset,
    group: Group | str,
    presets: Sequence[str] = tuple(ABLATION_PRESETS),
    config: FitConfig = FitConfig(),
) -> ComparisonReport:
    """Pilnas modelis pries kiekviena ablacija: NLL, LRT ir r^2.

    Pilnas modelis papildomai pradedamas is kiekvieno ablacijos optimumo, todel
    jo tikslas niekada nebuna blogesnis uz idetojo modelio.
    """
    unknown = [p for p in presets if p not in ABLATION_PRESETS]
    if unknown:
        raise DomainError(f"nezinomos ablacijos: {', '.join(unknown)} (leidziama: {', '.join(ABLATION_PRESETS)})")
    g = Group(group)
    subset = data.for_group(g)

    ablated: dict[str, FitResult] = {}
    for name in presets:
        logger.info("ablacija %s", name)
        ablated[name] = fit(subset, config.with_ablation(ABLATION_PRESETS[name]))

    full = fit(subset, config.with_ablation(frozenset()), warm_starts=[r.params for r in ablated.values()])

    rows = tuple(
        ComparisonRow(
            name=name,
            fit=res,
            lrt=likelihood_ratio_test(full.log_likelihood, res.log_likelihood, res.config.n_pinned()),
            r2=_r2_or_none(res.params, subset),
        )
        for name, res in ablated.items()
    )
    return ComparisonReport(group=g, full=full, full_r2=_r2_or_none(full.params, subset), rows=rows)


@dataclass(frozen=True)
class RecoveryReport:
    generating: ParamSet
    fit: FitResult
    r2: float
    n_participants: int
    seed: int


def recover(params: ParamSet, n_participants: int, seed: int, config: FitConfig = FitConfig()) -> RecoveryReport:
    """Simuliuoja is zinomu parametru, pritaiko is naujo ir palygina pasirinkimo tikimybes (24 lasteles)."""
    data = simulate_dataset(params, n_participants, Group.TACTFUL, seed)
    cfg = replace(config, epsilon=params.epsilon, temperature=params.temperature, options=params.options)
    res = fit(data, cfg)
    r2 = r_squared(choice_matrix(params), choice_matrix(res.params))
    logger.info("atkurimas: N=%d, r^2 %.6f", n_participants, r2)
    return RecoveryReport(generating=params, fit=res, r2=r2, n_participants=n_participants, seed=seed)


@dataclass(frozen=True)
class ContrastReport:
    by: str
    label_a: str
    k_a: int
    n_a: int
    label_b: str
    k_b: int
    n_b: int
    p_value: float

    @property
    def share_a(self) -> float:
        return self.k_a / self.n_a

    @property
    def share_b(self) -> float:
        return self.k_b / self.n_b


def disclosure_contrast(data: Dataset) -> list[ContrastReport]:
    """Kaip daznai paminetos abi priezastys: tactful pries candid ir conjunctive pries disjunctive.

    Palyginimas praleidziamas, jei vienos puses duomenyse nera.
    """
    out: list[ContrastReport] = []
    for by, (a, b) in (
        ("group", (Group.TACTFUL.value, Group.CANDID.value)),
        ("structure", (Structure.CONJUNCTIVE.value, Structure.DISJUNCTIVE.value)),
    ):
        counts = disclosure_counts(data, by=by)
        if a not in counts or b not in counts:
            logger.info("palyginimas pagal %s praleistas: truksta %s", by, b if a in counts else a)
            continue
        (k_a, n_a), (k_b, n_b) = counts[a], counts[b]
        out.append(
            ContrastReport(
                by=by,
                label_a=a,
                k_a=k_a,
                n_a=n_a,
                label_b=b,
                k_b=k_b,
                n_b=n_b,
                p_value=two_proportion_test(k_a, n_a, k_b, n_b),
            )
        )
    return out


def bootstrap_group(
    data: Dataset,
    group: Group | str,
    config: FitConfig,
    statistic: str | Statistic = "r2",
    replicates: int = 1000,
    confidence: float = 0.95,
    seed: int = 0,
) -> BootstrapReport:
    return bootstrap_ci(
        data.for_group(group),
        config,
        statistic=statistic,
        replicates=replicates,
        confidence=confidence,
        seed=seed,
    )
