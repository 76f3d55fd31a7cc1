from __future__ import annotations

import numpy as np

from aiskintojas.nodes.causal_core import UTTERANCES
from aiskintojas.nodes.explainer import ParamSet, choice_matrix
from aiskintojas.utils.errors import DomainError
from aiskintojas.utils.responses import Dataset, Group, ResponseRecord, Structure
from aiskintojas.utils.scenarios import SCENARIOS


def simulate_dataset(params: ParamSet, n_participants: int, group: Group | str, seed: int) -> Dataset:
    """Sintetiniai dalyviai: kiekvienas atsako i visus 6 scenarijus pagal modelio pasirinkimo tikimybes.

    Struktura (conjunctive/disjunctive) kaitaliojama pagal dalyvio numeri; modeliui ji nesvarbi.
    """
    if isinstance(n_participants, bool) or not isinstance(n_participants, (int, np.integer)) or n_participants < 1:
        raise DomainError(f"dalyviu skaicius turi buti >= 1, gauta {n_participants!r}")
    g = Group(group)
    rng = np.random.default_rng(seed)
    probs = choice_matrix(params)

    # draws[j, i]: dalyvio i pasakymo indeksas scenarijuje j.
    draws = np.stack([rng.choice(len(UTTERANCES), size=n_participants, p=row) for row in probs])

    structures = (Structure.CONJUNCTIVE, Structure.DISJUNCTIVE)
    records: list[ResponseRecord] = []
    for i in range(n_participants):
        pid = f"syn-{i + 1:04d}"
        for j, scenario in enumerate(SCENARIOS):
            u = UTTERANCES[draws[j, i]]
            records.append(
                ResponseRecord(
                    participant_id=pid,
                    group=g,
                    structure=structures[i % 2],
                    temperament=scenario.temperament,
                    truth_excess=scenario.truth.excess,
                    truth_virus=scenario.truth.virus,
                    said_excess=int(u.reveal_excess),
                    said_virus=int(u.reveal_virus),
                )
            )
    return Dataset(records=tuple(records), provenance=f"simulated; group={g.value}; n={n_participants}; seed={seed}")
