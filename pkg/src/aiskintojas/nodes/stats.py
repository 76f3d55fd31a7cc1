"""Modeliu palyginimo statistika: LRT, chi kvadrato uodega, r^2, bootstrap, dvieju proporciju testas."""
from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaincc
from scipy.stats import norm

from aiskintojas.nodes.explainer import FREE_PARAMETERS, ParamSet, choice_matrix
from aiskintojas.nodes.inference_fit import FitConfig, FitResult, fit
from aiskintojas.utils.errors import DomainError, NumericError, UnreliableResultError
from aiskintojas.utils.responses import Dataset, resample_participants, scenario_counts


logger = logging.getLogger(__name__)

# Daugiau nepavykusiu replikaciju laikoma nepatikimu rezultatu.
MAX_FAILURE_RATE = 0.2

Statistic = Callable[[FitResult, Dataset], float]


@dataclass(frozen=True)
class LrtReport:
    statistic: float
    df: int
    p_value: float


@dataclass(frozen=True)
class BootstrapReport:
    statistic: str
    point_estimate: float
    lower: float
    upper: float
    replicates: int
    confidence_level: float
    seed: int
    values: tuple[float, ...] = ()
    failures: int = 0

    def excludes_zero(self) -> bool:
        """Parametras reiksmingai skiriasi nuo 0, jei intervalas jo neapima."""
        return self.lower > 0.0 or self.upper < 0.0


def _check_df(df: int) -> int:
    if isinstance(df, bool) or not isinstance(df, (int, np.integer)) or df <= 0:
        raise DomainError(f"laisves laipsniai turi buti teigiamas sveikasis skaicius, gauta {df!r}")
    return int(df)


def chi_square_sf(x: float, df: int) -> float:
    """Pr(X >= x), X ~ chi^2(df): reguliarizuota virsutine nepilna gama funkcija Q(df/2, x/2)."""
    df = _check_df(df)
    if math.isnan(x) or x < 0:
        raise DomainError(f"x turi buti >= 0, gauta {x}")
    if x == 0:
        return 1.0
    return float(gammaincc(df / 2.0, x / 2.0))


def likelihood_ratio_test(ll_full: float, ll_ablated: float, df: int) -> LrtReport:
    """Ideti modeliai, maksimizuoti log-tiketinumai (ne baudos tikslai) tiems patiems duomenims."""
    df = _check_df(df)
    diff = 2.0 * (ll_full - ll_ablated)
    if not math.isfinite(diff):
        raise NumericError(f"nebaigtine LRT statistika: {ll_full} vs {ll_ablated}")
    # Optimizavimo triuksmas gali duoti maza neigiama skirtuma.
    statistic = max(0.0, diff)
    return LrtReport(statistic=statistic, df=df, p_value=chi_square_sf(statistic, df))


def r_squared(model_probs, empirical_props) -> float:
    """Pearsono koreliacijos kvadratas tarp modelio ir empiriniu lasteliu."""
    m = np.asarray(model_probs, dtype=float).ravel()
    e = np.asarray(empirical_props, dtype=float).ravel()
    if m.shape != e.shape:
        raise DomainError(f"vektoriu ilgiai skiriasi: {m.size} ir {e.size}")
    if m.size < 3:
        raise DomainError(f"reikia bent 3 lasteliu, gauta {m.size}")
    if not (np.all(np.isfinite(m)) and np.all(np.isfinite(e))):
        raise DomainError("vektoriuose yra nebaigtiniu reiksmiu")
    if np.ptp(e) == 0:
        raise DomainError("empirinis vektorius pastovus: koreliacija neapibrezta")
    if np.ptp(m) == 0:
        raise DomainError("modelio vektorius pastovus: koreliacija neapibrezta")
    r = np.corrcoef(m, e)[0, 1]
    return float(min(1.0, r * r))


def model_r_squared(params: ParamSet, data: Dataset) -> float:
    """r^2 per stebetu scenariju lasteles (po 4 kiekvienam)."""
    counts = scenario_counts(data)
    totals = counts.sum(axis=1)
    observed = totals > 0
    if not observed.any():
        raise DomainError("tuscias duomenu rinkinys")
    empirical = counts[observed] / totals[observed, None]
    return r_squared(choice_matrix(params)[observed], empirical)


def two_proportion_test(k1: int, n1: int, k2: int, n2: int) -> float:
    """Dvipuse p reiksme, sujungtos proporcijos z testas."""
    for k, n in ((k1, n1), (k2, n2)):
        if n <= 0 or not 0 <= k <= n:
            raise DomainError(f"netinkami skaiciai: k={k}, n={n}")
    pooled = (k1 + k2) / (n1 + n2)
    if pooled <= 0.0 or pooled >= 1.0:
        return 1.0
    se = math.sqrt(pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2))
    z = (k1 / n1 - k2 / n2) / se
    return float(min(1.0, 2.0 * norm.sf(abs(z))))


def _resolve_statistic(statistic: str | Statistic) -> tuple[str, Statistic]:
    if callable(statistic):
        return getattr(statistic, "__name__", "custom"), statistic
    if statistic in ("r2", "r_squared"):
        return "r2", lambda res, data: model_r_squared(res.params, data)
    if statistic in FREE_PARAMETERS:
        name = statistic
        return name, lambda res, data: float(getattr(res.params, name))
    allowed = ", ".join(("r2",) + FREE_PARAMETERS)
    raise DomainError(f"nezinoma statistika {statistic!r} (leidziama: {allowed})")


def bootstrap_ci(
    data: Dataset,
    config: FitConfig = FitConfig(),
    statistic: str | Statistic = "r2",
    replicates: int = 1000,
    confidence: float = 0.95,
    seed: int = 0,
) -> BootstrapReport:
    """Procentilinis bootstrap intervalas, persamplinant dalyvius su grazinimu.

    Kiekviena replikacija turi savo srauta default_rng([seed, indeksas]) ir
    pritaikoma is naujo su `config`. Nekonvergavusios ar neapibreztos
    replikacijos praleidziamos ir suskaiciuojamos.
    """
    name, stat = _resolve_statistic(statistic)
    if replicates < 1:
        raise DomainError(f"replikaciju turi buti >= 1, gauta {replicates}")
    if not 0.0 < confidence < 1.0:
        raise DomainError(f"pasikliovimo lygis turi buti (0,1), gauta {confidence}")
    participants = data.participants()
    if len(participants) < 2:
        raise DomainError(f"bootstrap reikia bent 2 dalyviu, gauta {len(participants)}")

    full = fit(data, config)
    if not full.converged:
        logger.warning("pilno rinkinio pritaikymas nekonvergavo")
    point = stat(full, data)

    values: list[float] = []
    failures = 0
    for rep in range(replicates):
        rng = np.random.default_rng([seed, rep])
        picks = rng.integers(0, len(participants), size=len(participants))
        sample = resample_participants(data, [participants[i] for i in picks])
        try:
            res = fit(sample, config)
            if not res.converged:
                raise NumericError("nekonvergavo")
            values.append(float(stat(res, sample)))
        except (DomainError, NumericError) as e:
            failures += 1
            logger.debug("replikacija %d nepavyko: %s", rep, e)

    if failures > MAX_FAILURE_RATE * replicates or not values:
        raise UnreliableResultError(
            f"nepavyko {failures} is {replicates} replikaciju (leidziama iki {MAX_FAILURE_RATE:.0%})"
        )
    tail = 100.0 * (1.0 - confidence) / 2.0
    lower, upper = np.percentile(values, [tail, 100.0 - tail])
    logger.info(
        "bootstrap %s: %.6g [%.6g, %.6g], replikaciju %d, nepavyko %d",
        name, point, lower, upper, replicates, failures,
    )
    return BootstrapReport(
        statistic=name,
        point_estimate=float(point),
        lower=float(lower),
        upper=float(upper),
        replicates=replicates,
        confidence_level=confidence,
        seed=seed,
        values=tuple(values),
        failures=failures,
    )
