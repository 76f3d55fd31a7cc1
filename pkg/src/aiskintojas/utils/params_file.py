"""Parametru failas: plokscias JSON objektas.

json.dumps raso trumpiausia tiksliai atkuriama float forma, todel
read_params(write_params(p)) atkuria kiekviena lauka tiksliai.
"""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from aiskintojas.nodes.causal_core import CounterfactualMode
from aiskintojas.nodes.explainer import ModelOptions, ParamSet, SocialCostConvention
from aiskintojas.utils.errors import ParseError


REQUIRED_KEYS: tuple[str, ...] = (
    "prior_excess",
    "prior_virus",
    "alpha_explanandum",
    "alpha_latents",
    "alpha_social_confident",
    "alpha_social_insecure",
    "epsilon",
    "temperature",
)


class ParamFile(BaseModel):
    model_config = ConfigDict(extra="forbid", strict=False)

    prior_excess: float = Field(gt=0.0, lt=1.0)
    prior_virus: float = Field(gt=0.0, lt=1.0)
    alpha_explanandum: float
    alpha_latents: float
    alpha_social_confident: float
    alpha_social_insecure: float
    epsilon: float = Field(gt=0.0, lt=0.125)
    temperature: float = Field(gt=0.0)
    # Neprivalomi modelio varianto raktai.
    counterfactual_mode: Literal["twin", "interventional"] = "twin"
    latents_given_sick: bool = True
    regret_given_sick: bool = True
    social_cost_convention: Literal["regret", "literal"] = "regret"

    @field_validator(
        "alpha_explanandum", "alpha_latents", "alpha_social_confident", "alpha_social_insecure", "temperature"
    )
    @classmethod
    def _finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("reiksme turi buti baigtine")
        return v

    def to_params(self) -> ParamSet:
        return ParamSet(
            prior_excess=self.prior_excess,
            prior_virus=self.prior_virus,
            alpha_explanandum=self.alpha_explanandum,
            alpha_latents=self.alpha_latents,
            alpha_social_confident=self.alpha_social_confident,
            alpha_social_insecure=self.alpha_social_insecure,
            epsilon=self.epsilon,
            temperature=self.temperature,
            options=ModelOptions(
                counterfactual_mode=CounterfactualMode(self.counterfactual_mode),
                latents_given_sick=self.latents_given_sick,
                regret_given_sick=self.regret_given_sick,
                social_cost_convention=SocialCostConvention(self.social_cost_convention),
            ),
        )


def write_params(params: ParamSet) -> str:
    opts = params.options
    payload: dict[str, object] = {key: float(getattr(params, key)) for key in REQUIRED_KEYS}
    payload.update(
        counterfactual_mode=opts.counterfactual_mode.value,
        latents_given_sick=opts.latents_given_sick,
        regret_given_sick=opts.regret_given_sick,
        social_cost_convention=opts.social_cost_convention.value,
    )
    return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"


def read_params(text: str) -> ParamSet:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"netinkamas JSON: {e}", row=e.lineno) from e
    if not isinstance(raw, dict):
        raise ParseError("parametru failas turi buti JSON objektas")

    missing = [k for k in REQUIRED_KEYS if k not in raw]
    if missing:
        raise ParseError(f"truksta rakto '{missing[0]}'", field=missing[0])

    try:
        model = ParamFile.model_validate(raw)
    except ValidationError as e:
        err = e.errors()[0]
        name = str(err["loc"][0]) if err.get("loc") else None
        raise ParseError(f"{err.get('msg', 'netinkama reiksme')} (gauta {err.get('input')!r})", field=name) from e
    return model.to_params()


def save_params(params: ParamSet, path: str | Path) -> None:
    Path(path).write_text(write_params(params), encoding="utf-8")


def load_params(path: str | Path) -> ParamSet:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as e:
        raise ParseError(f"nepavyko perskaityti {p}: {e}") from e
    return read_params(text)
