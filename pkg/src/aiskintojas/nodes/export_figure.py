from __future__ import annotations

import pandas as pd

from aiskintojas.nodes.causal_core import UTTERANCES
from aiskintojas.nodes.explainer import ParamSet, choice_matrix
from aiskintojas.nodes.inference_fit import FitResult
from aiskintojas.utils.responses import Dataset, Group, empirical_proportions
from aiskintojas.utils.scenarios import scenario_index

FIGURE_COLUMNS: tuple[str, ...] = ("scenario", "utterance", "empirical", "model")


def figure_rows(fit: FitResult | ParamSet, data: Dataset, group: Group | str) -> pd.DataFrame:
    """Viena eilute kiekvienai stebeto scenarijaus ir pasakymo porai."""
    params = fit.params if isinstance(fit, FitResult) else fit
    model = choice_matrix(params)
    rows = []
    for scenario, props in empirical_proportions(data, group).items():
        si = scenario_index(scenario)
        for ui, u in enumerate(UTTERANCES):
            rows.append(
                {
                    "scenario": scenario.label,
                    "utterance": u.label,
                    "empirical": float(props[ui]),
                    "model": float(model[si, ui]),
                }
            )
    return pd.DataFrame(rows, columns=list(FIGURE_COLUMNS))


def export_figure_data(fit: FitResult | ParamSet, data: Dataset, group: Group | str) -> str:
    """Stulpeline diagrama ir modelio/zmoniu sklaidos grafika atkuriantis CSV."""
    return figure_rows(fit, data, group).to_csv(index=False, lineterminator="\n", float_format="%.10g")
