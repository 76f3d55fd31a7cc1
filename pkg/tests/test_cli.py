from __future__ import annotations

import io
import json

import numpy as np
import pandas as pd
import pytest

from conftest import DATA_DIR
from aiskintojas.cli import main
from aiskintojas.nodes.causal_core import UTTERANCES
from aiskintojas.nodes.explainer import choice_matrix
from aiskintojas.utils.params_file import load_params
from aiskintojas.utils.responses import empirical_proportions, read_responses_csv
from aiskintojas.utils.scenarios import SCENARIOS


def _run(capsys, *argv: str) -> tuple[int, str, str]:
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def _probabilities(stdout: str) -> dict[str, float]:
    lines = stdout.strip().splitlines()
    out = {}
    for line in lines[2:]:
        parts = line.split()
        out[parts[0]] = float(parts[-1])
    return out


@pytest.fixture
def synthetic_csv(tmp_path, capsys):
    path = tmp_path / "synthetic.csv"
    code, _, _ = _run(capsys, "simulate", "--n", "20", "--seed", "8", "--out", str(path))
    assert code == 0
    return path


def test_predict_defaults_insecure_both(capsys):
    code, out, _ = _run(capsys, "predict", "insecure:11")
    assert code == 0
    probs = _probabilities(out)
    assert set(probs) == {"TV", "T", "V", "none"}
    assert max(probs, key=probs.get) == "V"


def test_predict_zero_alphas_uniform(capsys):
    code, out, _ = _run(capsys, "predict", "confident:10", "--params", str(DATA_DIR / "params_zero_alpha.json"))
    assert code == 0
    assert list(_probabilities(out).values()) == [0.25] * 4


def test_predict_interventional_override(capsys):
    code, out, _ = _run(capsys, "predict", "insecure:11", "--cf-mode", "interventional", "--epsilon", "0.01")
    assert code == 0
    assert "cf=interventional" in out
    assert "epsilon=0.01" in out


def test_predict_bad_label(capsys):
    code, _, err = _run(capsys, "predict", "nervous:11")
    assert code == 1
    assert "usage" in err


def test_predict_missing_params_file(capsys, tmp_path):
    code, _, _ = _run(capsys, "predict", "insecure:11", "--params", str(tmp_path / "nera.json"))
    assert code == 2


def test_simulate_then_parse(capsys, tmp_path):
    path = tmp_path / "sim.csv"
    code, _, _ = _run(capsys, "simulate", "--n", "5", "--seed", "1", "--group", "candid", "--out", str(path))
    assert code == 0
    assert len(read_responses_csv(path)) == 30


def test_simulate_to_stdout(capsys):
    code, out, _ = _run(capsys, "simulate", "--n", "1", "--seed", "1")
    assert code == 0
    assert out.splitlines()[0].startswith("participant_id,group")
    assert len(out.splitlines()) == 7


def test_fit_is_byte_identical(capsys, tmp_path, synthetic_csv):
    outputs = []
    for name in ("a.json", "b.json"):
        out = tmp_path / name
        code, _, _ = _run(
            capsys,
            "fit", "--data", str(synthetic_csv), "--group", "tactful",
            "--seed", "3", "--restarts", "2", "--l1", "0.005", "--out", str(out),
        )
        assert code in (0, 3)
        outputs.append((out.read_bytes(), (tmp_path / f"{name}.report.json").read_bytes()))
    assert outputs[0] == outputs[1]
    report = json.loads(outputs[0][1])
    assert report["l1_lambda"] == 0.005
    assert report["restarts"] == 2
    assert b'"l1_lambda": 0.005' in outputs[0][1]


def test_fit_bad_csv(capsys, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("participant_id,group\np1,tactful\n", encoding="utf-8")
    code, _, err = _run(capsys, "fit", "--data", str(bad), "--group", "tactful", "--seed", "0", "--out", str(tmp_path / "x"))
    assert code == 2
    assert "structure" in err


def test_fit_requires_seed(capsys, golden_path, tmp_path):
    code, _, _ = _run(capsys, "fit", "--data", str(golden_path), "--group", "tactful", "--out", str(tmp_path / "x"))
    assert code == 1


def test_compare_without_ablations(capsys, synthetic_csv):
    code, out, _ = _run(
        capsys, "compare", "--data", str(synthetic_csv), "--group", "tactful",
        "--seed", "1", "--restarts", "2", "--ablations", "",
    )
    assert code == 0
    assert "ablation,nll,lrt,df,p_value,r2" in out


def test_compare_unknown_ablation(capsys, golden_path):
    code, _, _ = _run(
        capsys, "compare", "--data", str(golden_path), "--group", "tactful", "--seed", "1", "--ablations", "no-joy",
    )
    assert code == 1


def test_bootstrap_needs_ten_reps(capsys, golden_path):
    code, _, _ = _run(
        capsys, "bootstrap", "--data", str(golden_path), "--group", "tactful", "--seed", "1", "--reps", "1",
    )
    assert code == 1


def test_recover_prints_both_parameter_sets(capsys):
    code, out, _ = _run(capsys, "recover", "--n", "30", "--seed", "5", "--restarts", "2")
    assert code in (0, 3)
    assert out.count('"prior_excess"') == 2
    assert "r2 " in out


def test_export_fig_golden(capsys, tmp_path, golden_path):
    out = tmp_path / "fig.csv"
    code, _, _ = _run(
        capsys, "export-fig", "--params", str(DATA_DIR / "params_zero_alpha.json"),
        "--data", str(golden_path), "--group", "tactful", "--out", str(out),
    )
    assert code == 0
    assert out.read_text(encoding="utf-8") == (DATA_DIR / "figure_tactful_golden.csv").read_text(encoding="utf-8")


def test_export_fig_requires_out(capsys, golden_path):
    code, _, _ = _run(
        capsys, "export-fig", "--params", str(DATA_DIR / "params_zero_alpha.json"),
        "--data", str(golden_path), "--group", "tactful",
    )
    assert code == 1


def test_export_fig_absent_group(capsys, tmp_path):
    data = tmp_path / "tactful.csv"
    _run(capsys, "simulate", "--n", "2", "--seed", "0", "--out", str(data))
    code, _, err = _run(
        capsys, "export-fig", "--params", str(DATA_DIR / "params_zero_alpha.json"),
        "--data", str(data), "--group", "candid", "--out", str(tmp_path / "fig.csv"),
    )
    assert code == 2
    assert "candid" in err


def test_contrast_golden(capsys, golden_path):
    code, out, _ = _run(capsys, "contrast", "--data", str(golden_path))
    assert code == 0
    assert "tactful 8/12" in out
    assert "candid 11/12" in out


def test_bad_environment_is_usage_error(capsys, monkeypatch):
    monkeypatch.setenv("AISKINTOJAS_RESTARTS", "many")
    code, _, err = _run(capsys, "predict", "insecure:11")
    assert code == 1
    assert "AISKINTOJAS_RESTARTS" in err


def _chain(capsys, workdir) -> dict[str, bytes]:
    workdir.mkdir()
    data = workdir / "data.csv"
    params = workdir / "fit.json"
    reps = workdir / "reps.csv"
    fig = workdir / "fig.csv"
    common = ("--data", str(data), "--group", "tactful", "--seed", "2")

    code, _, _ = _run(capsys, "simulate", "--n", "30", "--seed", "21", "--out", str(data))
    assert code == 0
    code, _, _ = _run(capsys, "fit", *common, "--restarts", "2", "--out", str(params))
    assert code == 0
    code, compare_out, _ = _run(capsys, "compare", *common, "--restarts", "2", "--ablations", "no-regret,no-inference")
    assert code == 0
    code, bootstrap_out, _ = _run(
        capsys, "bootstrap", *common, "--restarts", "1", "--reps", "10",
        "--statistic", "alpha_social_insecure", "--out", str(reps),
    )
    assert code == 0
    code, _, _ = _run(capsys, "export-fig", "--params", str(params), "--data", str(data), "--group", "tactful", "--out", str(fig))
    assert code == 0

    return {
        "data": data.read_bytes(),
        "params": params.read_bytes(),
        "report": (workdir / "fit.json.report.json").read_bytes(),
        "compare": compare_out.encode("utf-8"),
        "bootstrap": bootstrap_out.encode("utf-8"),
        "reps": reps.read_bytes(),
        "fig": fig.read_bytes(),
    }


def test_simulate_fit_compare_bootstrap_export_chain(capsys, tmp_path):
    first = _chain(capsys, tmp_path / "a")
    second = _chain(capsys, tmp_path / "b")
    assert first == second

    compare_lines = first["compare"].decode("utf-8").splitlines()
    assert compare_lines[1].split() == ["ablation", "nll", "lrt", "df", "p_value", "r2"]
    assert [line.split()[0] for line in compare_lines[2:]] == ["no-regret", "no-inference"]
    assert [int(line.split()[3]) for line in compare_lines[2:]] == [2, 1]

    assert first["bootstrap"].decode("utf-8").startswith("alpha_social_insecure: ")
    reps = pd.read_csv(io.BytesIO(first["reps"]))
    assert list(reps.columns) == ["value"]
    assert 8 <= len(reps) <= 10

    fig = pd.read_csv(io.BytesIO(first["fig"]), keep_default_na=False)
    assert len(fig) == 24
    data = read_responses_csv(tmp_path / "a" / "data.csv")
    fitted = choice_matrix(load_params(tmp_path / "a" / "fit.json"))
    empirical = empirical_proportions(data, "tactful")
    for i, s in enumerate(SCENARIOS):
        rows = fig[fig["scenario"] == s.label]
        assert list(rows["utterance"]) == [u.label for u in UTTERANCES]
        np.testing.assert_allclose(rows["empirical"], empirical[s], atol=1e-9)
        np.testing.assert_allclose(rows["model"], fitted[i], rtol=1e-9, atol=1e-12)


def test_bootstrap_too_many_failed_replicates(capsys, monkeypatch, golden_path):
    # Viena iteracija: nei viena replikacija nekonvergoja.
    monkeypatch.setenv("AISKINTOJAS_MAX_ITERATIONS", "1")
    code, _, err = _run(
        capsys, "bootstrap", "--data", str(golden_path), "--group", "tactful",
        "--seed", "1", "--restarts", "1", "--reps", "10",
    )
    assert code == 3
    assert "nepavyko" in err
