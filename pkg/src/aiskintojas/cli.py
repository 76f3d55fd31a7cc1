"""Komandine eilute: predict, fit, compare, bootstrap, simulate, recover, export-fig, contrast.

Isejimo kodai: 0 sekme, 1 naudojimo/konfiguracijos klaida, 2 ivesties klaida,
3 skaitine klaida (nekonvergavo, nepatikimas rezultatas).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import pandas as pd

from aiskintojas.nodes.causal_core import UTTERANCES, CounterfactualMode
from aiskintojas.nodes.explainer import (
    DEFAULT_PARAMS,
    FREE_PARAMETERS,
    ParamSet,
    softmax_choice,
    total_utility,
    utility_terms,
)
from aiskintojas.nodes.export_figure import export_figure_data
from aiskintojas.nodes.inference_fit import ABLATION_PRESETS, FitResult
from aiskintojas.nodes.simulate import simulate_dataset
from aiskintojas.pipeline import (
    RunConfig,
    bootstrap_group,
    compare_ablations,
    disclosure_contrast,
    fit_group,
    recover,
)
from aiskintojas.utils.errors import (
    ConfigError,
    DomainError,
    InvariantViolation,
    NumericError,
    ParseError,
    ScenarioLabelError,
    UnreliableResultError,
)
from aiskintojas.utils.params_file import load_params, save_params, write_params
from aiskintojas.utils.responses import Group, read_responses_csv, write_responses_csv
from aiskintojas.utils.scenarios import parse_scenario_label


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_NUMERIC = 3

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
MIN_BOOTSTRAP_REPS = 10


class _Parser(argparse.ArgumentParser):
    """argparse iseina su 2; cia naudojimo klaida yra 1."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: klaida: {message}\n")


# --- Argumentu tipai ---

def _positive_int(raw: str) -> int:
    try:
        val = int(raw)
    except ValueError:
        raise argparse.ArgumentTypeError(f"tikimasi sveikojo skaiciaus, gauta {raw!r}") from None
    if val < 1:
        raise argparse.ArgumentTypeError(f"turi buti >= 1, gauta {val}")
    return val


def _reps(raw: str) -> int:
    val = _positive_int(raw)
    if val < MIN_BOOTSTRAP_REPS:
        raise argparse.ArgumentTypeError(f"replikaciju turi buti >= {MIN_BOOTSTRAP_REPS}, gauta {val}")
    return val


def _seed(raw: str) -> int:
    try:
        val = int(raw)
    except ValueError:
        raise argparse.ArgumentTypeError(f"tikimasi sveikojo skaiciaus, gauta {raw!r}") from None
    if not 0 <= val < 2**64:
        raise argparse.ArgumentTypeError(f"seed turi buti intervale [0, 2^64), gauta {val}")
    return val


def _ablation_list(raw: str) -> list[str]:
    names = [p.strip() for p in raw.split(",") if p.strip()]
    unknown = [n for n in names if n not in ABLATION_PRESETS]
    if unknown:
        raise argparse.ArgumentTypeError(
            f"nezinomos ablacijos: {', '.join(unknown)} (leidziama: {', '.join(ABLATION_PRESETS)})"
        )
    return names


# --- Pagalbines ---

def _run_config(args: argparse.Namespace, base: RunConfig) -> RunConfig:
    changes: dict[str, object] = {}
    if getattr(args, "epsilon", None) is not None:
        changes["epsilon"] = args.epsilon
    if getattr(args, "cf_mode", None) is not None:
        changes["counterfactual_mode"] = CounterfactualMode(args.cf_mode)
    if getattr(args, "restarts", None) is not None:
        changes["restarts"] = args.restarts
    if getattr(args, "l1", None) is not None:
        changes["l1_lambda"] = args.l1
    return replace(base, **changes)


def _params_arg(args: argparse.Namespace) -> ParamSet:
    params = load_params(args.params) if args.params else DEFAULT_PARAMS
    changes: dict[str, object] = {}
    if getattr(args, "epsilon", None) is not None:
        changes["epsilon"] = args.epsilon
    if getattr(args, "cf_mode", None) is not None:
        changes["options"] = replace(params.options, counterfactual_mode=CounterfactualMode(args.cf_mode))
    return params.with_values(**changes) if changes else params


def _fit_report(res: FitResult, group: Group) -> dict[str, object]:
    cfg = res.config
    return {
        "group": group.value,
        "nll": res.nll,
        "penalized_objective": res.penalized_objective,
        "l1_lambda": cfg.l1_lambda,
        "restarts": cfg.restarts,
        "seed": cfg.seed,
        "converged": res.converged,
        "restart_index": res.restart_index,
        "iterations": res.iterations,
        "epsilon": cfg.epsilon,
        "counterfactual_mode": cfg.options.counterfactual_mode.value,
        "ablation": sorted(a.value for a in cfg.ablation),
    }


def _fmt(x: float | None) -> str:
    return "-" if x is None else f"{x:.6g}"


# --- Komandos ---

def cmd_predict(args: argparse.Namespace, rc: RunConfig) -> int:
    scenario = parse_scenario_label(args.scenario)
    params = _params_arg(args)
    terms = [utility_terms(params, scenario, u) for u in UTTERANCES]
    utilities = [total_utility(params, scenario, u) for u in UTTERANCES]
    probs = softmax_choice(utilities, params.temperature)
    table = pd.DataFrame(
        {
            "utterance": [u.label for u in UTTERANCES],
            "v_explanandum": [t.explanandum for t in terms],
            "v_latents": [t.latents for t in terms],
            "social_cost": [t.social for t in terms],
            "utility": utilities,
            "probability": probs,
        }
    )
    print(f"scenarijus {scenario.label} (epsilon={params.epsilon:g}, cf={params.options.counterfactual_mode.value})")
    print(table.to_string(index=False, float_format=lambda x: f"{x:.6f}"))
    return EXIT_OK


def cmd_fit(args: argparse.Namespace, rc: RunConfig) -> int:
    group = Group(args.group)
    data = read_responses_csv(args.data)
    res = fit_group(data, group, rc.fit_config(seed=args.seed))

    out = Path(args.out)
    save_params(res.params, out)
    report = Path(f"{out}.report.json")
    report.write_text(json.dumps(_fit_report(res, group), indent=2) + "\n", encoding="utf-8")

    print(write_params(res.params), end="")
    print(f"NLL {res.nll:.6f}; konvergavo: {'taip' if res.converged else 'ne'}; rasyta {out}, {report}")
    if not res.converged:
        print("klaida: nei viena pradzia nekonvergavo", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_compare(args: argparse.Namespace, rc: RunConfig) -> int:
    data = read_responses_csv(args.data)
    rep = compare_ablations(data, args.group, args.ablations, rc.fit_config(seed=args.seed))

    print(f"grupe {rep.group.value}: pilnas modelis NLL {rep.full.nll:.6f}, r2 {_fmt(rep.full_r2)}")
    rows = [
        {
            "ablation": row.name,
            "nll": row.fit.nll,
            "lrt": row.lrt.statistic,
            "df": row.lrt.df,
            "p_value": row.lrt.p_value,
            "r2": float("nan") if row.r2 is None else row.r2,
        }
        for row in rep.rows
    ]
    table = pd.DataFrame(rows, columns=["ablation", "nll", "lrt", "df", "p_value", "r2"])
    if table.empty:
        print(",".join(table.columns))
    else:
        print(table.to_string(index=False, float_format=lambda x: f"{x:.6g}", na_rep="-"))

    if not (rep.full.converged and all(r.fit.converged for r in rep.rows)):
        print("klaida: ne visi pritaikymai konvergavo", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_bootstrap(args: argparse.Namespace, rc: RunConfig) -> int:
    data = read_responses_csv(args.data)
    ablation = ABLATION_PRESETS[args.ablation] if args.ablation else frozenset()
    rep = bootstrap_group(
        data,
        args.group,
        rc.fit_config(seed=args.seed, ablation=ablation),
        statistic=args.statistic,
        replicates=args.reps,
        confidence=args.confidence,
        seed=args.seed,
    )
    print(
        f"{rep.statistic}: {rep.point_estimate:.6g}; "
        f"{rep.confidence_level:.0%} PI [{rep.lower:.6g}, {rep.upper:.6g}]; "
        f"replikaciju {rep.replicates}, nepavyko {rep.failures}"
    )
    if args.out:
        pd.DataFrame({"value": rep.values}).to_csv(args.out, index=False, lineterminator="\n", float_format="%.17g")
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace, rc: RunConfig) -> int:
    params = _params_arg(args)
    data = simulate_dataset(params, args.n, args.group, args.seed)
    text = write_responses_csv(data)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"sugeneruota {len(data)} atsakymu i {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_recover(args: argparse.Namespace, rc: RunConfig) -> int:
    params = _params_arg(args)
    rep = recover(params, args.n, args.seed, rc.fit_config(seed=args.seed))
    print("generuojantys parametrai:")
    print(write_params(rep.generating), end="")
    print("atkurti parametrai:")
    print(write_params(rep.fit.params), end="")
    print(f"r2 {rep.r2:.6f} (N={rep.n_participants}, seed={rep.seed})")
    if not rep.fit.converged:
        print("klaida: nei viena pradzia nekonvergavo", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_export_fig(args: argparse.Namespace, rc: RunConfig) -> int:
    params = load_params(args.params)
    data = read_responses_csv(args.data)
    text = export_figure_data(params, data, args.group)
    Path(args.out).write_text(text, encoding="utf-8")
    print(f"rasyta {args.out}: {text.count(chr(10)) - 1} eiluciu")
    return EXIT_OK


def cmd_contrast(args: argparse.Namespace, rc: RunConfig) -> int:
    data = read_responses_csv(args.data)
    reports = disclosure_contrast(data)
    if not reports:
        print("nera ka palyginti: duomenyse tik viena grupe ir viena struktura")
    for r in reports:
        print(
            f"{r.by}: {r.label_a} {r.k_a}/{r.n_a} ({r.share_a:.1%}) pries "
            f"{r.label_b} {r.k_b}/{r.n_b} ({r.share_b:.1%}); p = {r.p_value:.3g}"
        )
    return EXIT_OK


# --- Parseris ---

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="aiskintojas", description="Emocijas ivertinancio aiskinimo modelis")
    parser.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"], default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    def model_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--epsilon", type=float, default=None, help="Pr(S=1) be veiksniu")
        p.add_argument("--cf-mode", choices=[m.value for m in CounterfactualMode], default=None)

    def fit_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--data", required=True, help="atsakymu CSV")
        p.add_argument("--group", required=True, choices=[g.value for g in Group])
        p.add_argument("--seed", required=True, type=_seed)
        p.add_argument("--restarts", type=_positive_int, default=None)
        p.add_argument("--l1", type=float, default=None, help="L1 baudos koeficientas")
        model_flags(p)

    p = sub.add_parser("predict", help="naudingumo nariai ir pasirinkimo tikimybes vienam scenarijui")
    p.add_argument("scenario", help="pvz. insecure:11")
    p.add_argument("--params", default=None, help="parametru failas (numatyta: pavyzdinis rinkinys)")
    model_flags(p)
    p.set_defaults(handler=cmd_predict)

    p = sub.add_parser("fit", help="pritaikyti parametrus vienai grupei")
    fit_flags(p)
    p.add_argument("--out", required=True, help="parametru failas; salia rasomas <out>.report.json")
    p.set_defaults(handler=cmd_fit)

    p = sub.add_parser("compare", help="pilnas modelis pries ablacijas (LRT)")
    fit_flags(p)
    p.add_argument("--ablations", type=_ablation_list, default=list(ABLATION_PRESETS), help="kableliais atskirtos")
    p.set_defaults(handler=cmd_compare)

    p = sub.add_parser("bootstrap", help="procentilinis bootstrap intervalas")
    fit_flags(p)
    p.add_argument("--statistic", choices=["r2", *FREE_PARAMETERS], default="r2")
    p.add_argument("--reps", type=_reps, default=1000)
    p.add_argument("--confidence", type=float, default=0.95)
    p.add_argument("--ablation", choices=list(ABLATION_PRESETS), default=None)
    p.add_argument("--out", default=None, help="replikaciju reiksmiu CSV")
    p.set_defaults(handler=cmd_bootstrap)

    p = sub.add_parser("simulate", help="sintetinis atsakymu rinkinys")
    p.add_argument("--params", default=None)
    p.add_argument("--n", required=True, type=_positive_int, help="dalyviu skaicius")
    p.add_argument("--seed", required=True, type=_seed)
    p.add_argument("--group", choices=[g.value for g in Group], default=Group.TACTFUL.value)
    p.add_argument("--out", default=None)
    model_flags(p)
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("recover", help="simuliuoti, pritaikyti ir palyginti")
    p.add_argument("--params", default=None)
    p.add_argument("--n", type=_positive_int, default=200)
    p.add_argument("--seed", required=True, type=_seed)
    p.add_argument("--restarts", type=_positive_int, default=None)
    p.add_argument("--l1", type=float, default=None)
    model_flags(p)
    p.set_defaults(handler=cmd_recover)

    p = sub.add_parser("export-fig", help="diagramu duomenys (CSV)")
    p.add_argument("--params", required=True, help="pritaikytu parametru failas")
    p.add_argument("--data", required=True)
    p.add_argument("--group", required=True, choices=[g.value for g in Group])
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_export_fig)

    p = sub.add_parser("contrast", help="abieju priezasciu paminejimo daznio palyginimas")
    p.add_argument("--data", required=True)
    p.set_defaults(handler=cmd_contrast)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    try:
        rc = RunConfig.from_env()
    except ConfigError as e:
        print(f"konfiguracijos klaida: {e}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=args.log_level or rc.log_level, format=LOG_FORMAT, stream=sys.stderr)
    rc = _run_config(args, rc)

    try:
        return args.handler(args, rc)
    except ScenarioLabelError as e:
        parser.print_usage(sys.stderr)
        print(f"klaida: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, DomainError, OSError) as e:
        print(f"ivesties klaida: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericError, UnreliableResultError, InvariantViolation) as e:
        print(f"skaitine klaida: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    raise SystemExit(main())
