"""Diskretus ligos priezastinis modelis.

Du dvejetainiai veiksniai: `excess` (pacientas gere daugiau nei jo riba) ir
`virus`. Liga S priklauso nuo abieju per LikelihoodTable. Pacientas nezino
veiksniu reiksmiu; jo tikejimas yra BeliefState per 4 pasaulius (E, V).

Visi tipai nekeiciami, visos operacijos grynos funkcijos.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from aiskintojas.utils.errors import DomainError, InvariantViolation


_NORM_TOL = 1e-12


@dataclass(frozen=True)
class FactorState:
    excess: int
    virus: int

    def __post_init__(self) -> None:
        for name in ("excess", "virus"):
            val = getattr(self, name)
            if isinstance(val, bool) or val not in (0, 1):
                raise DomainError(f"{name} turi buti 0 arba 1, gauta {val!r}")

    @property
    def index(self) -> tuple[int, int]:
        return self.excess, self.virus

    @property
    def label(self) -> str:
        return f"{self.excess}{self.virus}"


# Tvarka (0,0), (0,1), (1,0), (1,1): sutampa su (2,2) masyvo isdestymu.
WORLDS: tuple[FactorState, ...] = tuple(FactorState(e, v) for e in (0, 1) for v in (0, 1))


class CounterfactualMode(str, Enum):
    TWIN = "twin"
    INTERVENTIONAL = "interventional"


@dataclass(frozen=True)
class LikelihoodTable:
    """Pr(S=1 | excess, virus). p00 yra epsilon."""

    p00: float
    p10: float
    p01: float
    p11: float

    def __post_init__(self) -> None:
        for name in ("p00", "p10", "p01", "p11"):
            val = float(getattr(self, name))
            if not 0.0 <= val <= 1.0:
                raise DomainError(f"{name} turi buti [0,1], gauta {val}")
        if not (self.p00 <= self.p10 <= self.p11 and self.p00 <= self.p01 <= self.p11):
            raise DomainError(
                "lentele turi buti monotonine: p00 <= p10, p01 <= p11 "
                f"(gauta {self.p00}, {self.p10}, {self.p01}, {self.p11})"
            )

    @classmethod
    def standard(cls, epsilon: float, single: float = 0.25, both: float = 0.5) -> LikelihoodTable:
        """Ligos tikimybe proporcinga esamu veiksniu skaiciui."""
        return cls(p00=epsilon, p10=single, p01=single, p11=both)

    def prob(self, excess: int, virus: int) -> float:
        return float(self.as_array()[excess, virus])

    def __call__(self, world: FactorState) -> float:
        return self.prob(world.excess, world.virus)

    def as_array(self) -> np.ndarray:
        """(2,2) masyvas, indeksuojamas [excess, virus]."""
        return np.array([[self.p00, self.p01], [self.p10, self.p11]], dtype=float)


@dataclass(frozen=True, eq=False)
class BeliefState:
    weights: np.ndarray

    def __post_init__(self) -> None:
        w = np.array(self.weights, dtype=float)
        if w.shape != (2, 2):
            raise DomainError(f"tikejimas turi buti (2,2) masyvas, gauta {w.shape}")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise DomainError("tikejimo svoriai turi buti neneigiami ir baigtiniai")
        if abs(w.sum() - 1.0) > _NORM_TOL:
            raise DomainError(f"tikejimo svoriu suma {w.sum()!r} != 1")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_unnormalized(cls, weights: np.ndarray) -> BeliefState:
        w = np.asarray(weights, dtype=float)
        total = w.sum()
        if not total > 0:
            raise DomainError("negalima normalizuoti nulinio svorio")
        return cls(w / total)

    def weight(self, world: FactorState) -> float:
        return float(self.weights[world.excess, world.virus])

    def marginal_excess(self) -> float:
        return float(self.weights[1, :].sum())

    def marginal_virus(self) -> float:
        return float(self.weights[:, 1].sum())

    def allclose(self, other: BeliefState, atol: float = 1e-12) -> bool:
        return bool(np.allclose(self.weights, other.weights, rtol=0.0, atol=atol))


class Utterance(Enum):
    """Gydytojo pasakymas: kuriuos tikrus veiksnius jis pamines."""

    BOTH = (True, True)
    EXCESS = (True, False)
    VIRUS = (False, True)
    NONE = (False, False)

    @property
    def reveal_excess(self) -> bool:
        return self.value[0]

    @property
    def reveal_virus(self) -> bool:
        return self.value[1]

    @property
    def label(self) -> str:
        return _UTTERANCE_LABELS[self]

    @classmethod
    def from_flags(cls, reveal_excess: bool, reveal_virus: bool) -> Utterance:
        return cls((bool(reveal_excess), bool(reveal_virus)))

    @classmethod
    def from_label(cls, label: str) -> Utterance:
        for u, lab in _UTTERANCE_LABELS.items():
            if lab == label:
                return u
        raise DomainError(f"nezinomas pasakymas: {label!r}")


_UTTERANCE_LABELS = {
    Utterance.BOTH: "TV",
    Utterance.EXCESS: "T",
    Utterance.VIRUS: "V",
    Utterance.NONE: "none",
}

UTTERANCES: tuple[Utterance, ...] = (Utterance.BOTH, Utterance.EXCESS, Utterance.VIRUS, Utterance.NONE)


def consistency_mask(truth: FactorState, utterance: Utterance) -> np.ndarray:
    """1 tiems pasauliams, kurie neprieštarauja pasakytiems faktams."""
    mask = np.ones((2, 2), dtype=float)
    if utterance.reveal_excess:
        mask[1 - truth.excess, :] = 0.0
    if utterance.reveal_virus:
        mask[:, 1 - truth.virus] = 0.0
    return mask


def independent_prior(prior_excess: float, prior_virus: float) -> BeliefState:
    for name, p in (("prior_excess", prior_excess), ("prior_virus", prior_virus)):
        if not 0.0 < p < 1.0:
            raise DomainError(f"{name} turi buti intervale (0,1), gauta {p}")
    w = np.outer([1.0 - prior_excess, prior_excess], [1.0 - prior_virus, prior_virus])
    return BeliefState.from_unnormalized(w)


def restrict(belief: BeliefState, truth: FactorState, utterance: Utterance) -> BeliefState:
    """Pasaulius, prieštaraujancius pasakytiems faktams, nunulina ir normalizuoja."""
    if utterance is Utterance.NONE:
        return belief
    w = belief.weights * consistency_mask(truth, utterance)
    if not w.sum() > 0:
        raise InvariantViolation(
            f"apribojus tikejima pasakymu {utterance.label} neliko jokio svorio"
        )
    return BeliefState.from_unnormalized(w)


def prob_sick(belief: BeliefState, table: LikelihoodTable) -> float:
    return float((belief.weights * table.as_array()).sum())


def condition_on_sick(belief: BeliefState, table: LikelihoodTable) -> BeliefState:
    """Aposteriorinis tikejimas, pacientui suzinojus, kad serga (S=1)."""
    joint = belief.weights * table.as_array()
    if not joint.sum() > 0:
        raise DomainError("Pr(S=1) = 0: negalima salygoti ligos")
    return BeliefState.from_unnormalized(joint)


def counterfactual_sick_given_world(
    table: LikelihoodTable,
    world: FactorState,
    mode: CounterfactualMode = CounterfactualMode.TWIN,
) -> float:
    """Pr(S_cf=1 | S=1, pasaulis, do(excess:=0)).

    twin: bendras tolygus triuksmas U, S = [U < p(E,V)]; stebejus S=1,
    U ~ U(0, p(E,V)), todel tikimybe = p(0,V) / p(E,V).
    interventional: be abdukcijos, tiesiog p(0,V).
    """
    p_actual = table(world)
    p_abstain = table.prob(0, world.virus)
    if mode is CounterfactualMode.INTERVENTIONAL:
        return p_abstain
    if not p_actual > 0:
        raise DomainError(f"pasaulis {world.label} negali sukelti S=1 (p=0)")
    if world.excess == 0:
        return 1.0
    return p_abstain / p_actual


def counterfactual_array(
    table: LikelihoodTable, mode: CounterfactualMode = CounterfactualMode.TWIN
) -> np.ndarray:
    """counterfactual_sick_given_world visiems 4 pasauliams; p=0 pasauliai gauna 0."""
    t = table.as_array()
    abstain = np.vstack([t[0, :], t[0, :]])
    if mode is CounterfactualMode.INTERVENTIONAL:
        return abstain
    out = np.zeros((2, 2), dtype=float)
    np.divide(abstain, t, out=out, where=t > 0)
    out[0, :] = np.where(t[0, :] > 0, 1.0, 0.0)
    return out


def expected_regret(
    belief_after_utterance: BeliefState,
    table: LikelihoodTable,
    mode: CounterfactualMode = CounterfactualMode.TWIN,
    *,
    given_sick: bool = True,
) -> float:
    """1 - E[Pr(S_cf=1)] pagal paciento (S=1 salygota) tikejima."""
    belief = condition_on_sick(belief_after_utterance, table) if given_sick else belief_after_utterance
    cf = counterfactual_array(table, mode)
    return 1.0 - float((belief.weights * cf).sum())
