"""Dalyviu atsakymu CSV: skaitymas, rasymas, agregavimas.

Stulpelis `structure` (conjunctive/disjunctive) saugomas tik kilmei; analizeje
duomenys sujungiami per abi strukturas, todel scenarijus = (temperamentas, tiesa).
"""
from __future__ import annotations

import io
import re
from collections.abc import Iterable
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path

import numpy as np
import pandas as pd

from aiskintojas.nodes.causal_core import UTTERANCES, FactorState, Utterance
from aiskintojas.utils.errors import DomainError, ParseError
from aiskintojas.utils.scenarios import SCENARIOS, Scenario, Temperament, scenario_index


COLUMNS: tuple[str, ...] = (
    "participant_id",
    "group",
    "structure",
    "temperament",
    "truth_excess",
    "truth_virus",
    "said_excess",
    "said_virus",
)


class Group(str, Enum):
    TACTFUL = "tactful"
    CANDID = "candid"


class Structure(str, Enum):
    CONJUNCTIVE = "conjunctive"
    DISJUNCTIVE = "disjunctive"


@dataclass(frozen=True)
class ResponseRecord:
    participant_id: str
    group: Group
    structure: Structure
    temperament: Temperament
    truth_excess: int
    truth_virus: int
    said_excess: int
    said_virus: int

    @property
    def scenario(self) -> Scenario:
        return Scenario(truth=FactorState(self.truth_excess, self.truth_virus), temperament=self.temperament)

    @property
    def utterance(self) -> Utterance:
        return Utterance.from_flags(bool(self.said_excess), bool(self.said_virus))


@dataclass(frozen=True)
class Dataset:
    records: tuple[ResponseRecord, ...]
    provenance: str = ""

    def __len__(self) -> int:
        return len(self.records)

    def groups(self) -> list[Group]:
        return sorted({r.group for r in self.records}, key=lambda g: list(Group).index(g))

    def participants(self) -> list[str]:
        """Dalyviu ID pirmo pasirodymo tvarka."""
        return list(dict.fromkeys(r.participant_id for r in self.records))

    def for_group(self, group: Group | str) -> Dataset:
        g = Group(group)
        recs = tuple(r for r in self.records if r.group is g)
        if not recs:
            raise DomainError(f"grupes '{g.value}' duomenyse nera")
        return Dataset(records=recs, provenance=_join_provenance(self.provenance, f"group={g.value}"))

    def by_participant(self) -> dict[str, tuple[ResponseRecord, ...]]:
        out: dict[str, list[ResponseRecord]] = {}
        for r in self.records:
            out.setdefault(r.participant_id, []).append(r)
        return {k: tuple(v) for k, v in out.items()}


def _join_provenance(base: str, extra: str) -> str:
    return f"{base}; {extra}" if base else extra


def _binary(value: str, *, row: int, column: str) -> int:
    if value not in ("0", "1"):
        raise ParseError(f"tikimasi 0 arba 1, gauta {value!r}", row=row, column=column)
    return int(value)


def _enum(enum_cls: type[Enum], value: str, *, row: int, column: str):
    try:
        return enum_cls(value)
    except ValueError:
        allowed = ", ".join(e.value for e in enum_cls)
        raise ParseError(f"nezinoma reiksme {value!r} (leidziama: {allowed})", row=row, column=column) from None


_FIELD_COUNT_RE = re.compile(r"Expected (\d+) fields in line (\d+), saw (\d+)")


def _width_error(err: pd.errors.ParserError) -> ParseError:
    m = _FIELD_COUNT_RE.search(str(err))
    if m is None:
        return ParseError(f"netinkamas CSV: {err}")
    expected, line, saw = (int(g) for g in m.groups())
    return ParseError(
        f"tiketasi {expected} lauku, rasta {saw}", row=line, column=str(expected + 1)
    )


def _check_header(columns: list[str]) -> None:
    missing = [c for c in COLUMNS if c not in columns]
    extra = [c for c in columns if c not in COLUMNS]
    if missing:
        raise ParseError(f"truksta stulpeliu: {', '.join(missing)}", row=1, column=missing[0])
    if extra:
        raise ParseError(f"nezinomi stulpeliai: {', '.join(extra)}", row=1, column=extra[0])
    if tuple(columns) != COLUMNS:
        raise ParseError(f"stulpeliu tvarka turi buti: {','.join(COLUMNS)}", row=1)


def parse_responses_csv(data: bytes, *, source: str = "<bytes>") -> Dataset:
    """Nuskaito atsakymu CSV (UTF-8, LF arba CRLF). Eiluciu numeriai skaiciuojami nuo antrastes (1)."""
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise ParseError(f"failas nera UTF-8: {e}") from e
    if not text.strip():
        raise ParseError("tuscias failas", row=1)

    # Antraste skaitoma kaip eilute: tada pandas nelaiko pirmo lauko indeksu,
    # o per ilga duomenu eilute sukelia ParserError.
    try:
        df = pd.read_csv(
            io.StringIO(text),
            header=None,
            index_col=False,
            dtype=str,
            keep_default_na=False,
            skip_blank_lines=True,
        )
    except pd.errors.ParserError as e:
        raise _width_error(e) from e
    except pd.errors.EmptyDataError as e:
        raise ParseError(f"netinkamas CSV: {e}", row=1) from e

    _check_header([c if isinstance(c, str) else "" for c in df.iloc[0]])
    if df.shape[1] > len(COLUMNS):
        extra = df.iloc[1:, len(COLUMNS):].fillna("").ne("").any(axis=1).to_numpy()
        row = 2 + int(extra.argmax())
        raise ParseError(f"eiluteje daugiau nei {len(COLUMNS)} lauku", row=row, column=str(len(COLUMNS) + 1))

    records: list[ResponseRecord] = []
    for i, row in enumerate(df.iloc[1:].itertuples(index=False), start=2):
        values = {c: (v if isinstance(v, str) else "") for c, v in zip(COLUMNS, row)}
        pid = values["participant_id"].strip()
        if not pid:
            raise ParseError("tuscias dalyvio ID", row=i, column="participant_id")
        rec = ResponseRecord(
            participant_id=pid,
            group=_enum(Group, values["group"], row=i, column="group"),
            structure=_enum(Structure, values["structure"], row=i, column="structure"),
            temperament=_enum(Temperament, values["temperament"], row=i, column="temperament"),
            truth_excess=_binary(values["truth_excess"], row=i, column="truth_excess"),
            truth_virus=_binary(values["truth_virus"], row=i, column="truth_virus"),
            said_excess=_binary(values["said_excess"], row=i, column="said_excess"),
            said_virus=_binary(values["said_virus"], row=i, column="said_virus"),
        )
        if rec.truth_excess == 0 and rec.truth_virus == 0:
            raise ParseError("tiesa (0,0): sergantis pacientas turi bent viena veiksni", row=i, column="truth_virus")
        records.append(rec)

    if not records:
        raise ParseError("faile nera nei vieno atsakymo", row=2)
    return Dataset(records=tuple(records), provenance=f"source={source}")


def read_responses_csv(path: str | Path) -> Dataset:
    p = Path(path)
    return parse_responses_csv(p.read_bytes(), source=p.name)


def write_responses_csv(dataset: Dataset) -> str:
    rows = [
        {
            "participant_id": r.participant_id,
            "group": r.group.value,
            "structure": r.structure.value,
            "temperament": r.temperament.value,
            "truth_excess": r.truth_excess,
            "truth_virus": r.truth_virus,
            "said_excess": r.said_excess,
            "said_virus": r.said_virus,
        }
        for r in dataset.records
    ]
    df = pd.DataFrame(rows, columns=list(COLUMNS))
    return df.to_csv(index=False, lineterminator="\n")


def scenario_counts(data: Dataset) -> np.ndarray:
    """(6, 4) pasirinkimu skaiciai SCENARIOS x UTTERANCES tvarka."""
    counts = np.zeros((len(SCENARIOS), len(UTTERANCES)), dtype=np.int64)
    for r in data.records:
        counts[scenario_index(r.scenario), UTTERANCES.index(r.utterance)] += 1
    return counts


def empirical_proportions(data: Dataset, group: Group | str) -> dict[Scenario, np.ndarray]:
    """Kiekvienam stebetam scenarijui 4 proporcijos. Nestebeti scenarijai praleidziami."""
    counts = scenario_counts(data.for_group(group))
    out: dict[Scenario, np.ndarray] = {}
    for s, row in zip(SCENARIOS, counts):
        total = row.sum()
        if total > 0:
            out[s] = row / total
    return out


def disclosure_counts(data: Dataset, by: str = "group") -> dict[str, tuple[int, int]]:
    """Kiek kartu paminetos abi priezastys: {grupe arba struktura: (k, n)}."""
    if by not in ("group", "structure"):
        raise DomainError(f"nezinomas grupavimas: {by!r}")
    out: dict[str, tuple[int, int]] = {}
    for r in data.records:
        key = getattr(r, by).value
        k, n = out.get(key, (0, 0))
        out[key] = (k + int(r.utterance is Utterance.BOTH), n + 1)
    return out


def resample_participants(data: Dataset, participant_ids: Iterable[str]) -> Dataset:
    """Naujas rinkinys is nurodytu dalyviu (su pasikartojimais); ID pervadinami, kad liktu unikalus."""
    by_pid = data.by_participant()
    records: list[ResponseRecord] = []
    for k, pid in enumerate(participant_ids):
        new_id = f"{pid}#{k}"
        records.extend(replace(r, participant_id=new_id) for r in by_pid[pid])
    return Dataset(records=tuple(records), provenance=_join_provenance(data.provenance, "bootstrap"))
