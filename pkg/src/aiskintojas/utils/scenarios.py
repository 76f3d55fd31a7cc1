"""Scenariju registras: 6 langeliai (temperamentas x tikroji priezastis)."""
from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from aiskintojas.nodes.causal_core import FactorState
from aiskintojas.utils.errors import ScenarioLabelError


class Temperament(str, Enum):
    CONFIDENT = "confident"
    INSECURE = "insecure"


@dataclass(frozen=True)
class Scenario:
    """Gydytojo privati informacija: tikrasis pasaulis ir paciento temperamentas."""

    truth: FactorState
    temperament: Temperament

    @property
    def label(self) -> str:
        return f"{self.temperament.value}:{self.truth.label}"


# Sergantis pacientas turi bent viena veiksni.
TRUTHS: tuple[FactorState, ...] = (FactorState(1, 0), FactorState(0, 1), FactorState(1, 1))

SCENARIOS: tuple[Scenario, ...] = tuple(
    Scenario(truth=t, temperament=temp) for temp in Temperament for t in TRUTHS
)

_LABEL_RE = re.compile(r"^\s*(confident|insecure)\s*:\s*([01])([01])\s*$", re.IGNORECASE)


def parse_scenario_label(label: str) -> Scenario:
    """`insecure:11` -> Scenario. Tik 6 modeliuojami scenarijai."""
    m = _LABEL_RE.match(label or "")
    if not m:
        raise ScenarioLabelError(
            f"netinkama scenarijaus zyme {label!r}; tikimasi <confident|insecure>:<EV>, pvz. insecure:11"
        )
    truth = FactorState(int(m.group(2)), int(m.group(3)))
    if truth not in TRUTHS:
        raise ScenarioLabelError(f"scenarijus {label!r}: sergantis pacientas turi tureti bent viena veiksni")
    return Scenario(truth=truth, temperament=Temperament(m.group(1).lower()))


def scenario_index(scenario: Scenario) -> int:
    return SCENARIOS.index(scenario)


def truth_index(truth: FactorState) -> int:
    return TRUTHS.index(truth)
