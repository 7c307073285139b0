import csv
import io

import numpy as np
import pytest
from scipy import stats

from twostep.cli import EVALUATE_SCHEMA, TUNE_SCHEMA, VERIFY_SCHEMA, main
from twostep.exact_oracle import DiscreteModel, psi_of
from twostep.experiments import (
    DISCRETE_SCHEMA,
    LINEAR_SCHEMA,
    ExperimentConfig,
    mean_curve,
    run_discrete,
    run_discrete_rows,
    run_linear_rows,
)
from twostep.errors import InvalidParam
from twostep.fracmetric import parse_metric


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


@pytest.fixture
def example_files(tmp_path):
    s = tmp_path / "scores.txt"
    y = tmp_path / "labels.txt"
    s.write_text("0.9\n0.2\n0.8\n0.1\n")
    y.write_text("1\n1\n-1\n-1\n")
    return s, y


@pytest.fixture
def multilabel_files(tmp_path):
    rng = np.random.default_rng(3)
    scores = rng.standard_normal((60, 3))
    labels = np.where(scores + 0.8 * rng.standard_normal((60, 3)) > 0.3, 1, 0)
    s = tmp_path / "ml_scores.txt"
    y = tmp_path / "ml_labels.txt"
    np.savetxt(s, scores, fmt="%.17g")
    np.savetxt(y, labels, fmt="%d")
    return s, y


class TestTune:
    def test_example(self, capsys, example_files):
        s, y = example_files
        code, out, _ = run(capsys, "tune", "--scores-file", s, "--labels-file", y, "--metric", "f-beta:1")
        assert code == 0
        assert out.splitlines()[0] == ",".join(TUNE_SCHEMA)
        (row,) = rows_of(out)
        assert float(row["theta"]) == pytest.approx(0.15, abs=1e-15)
        assert float(row["metric_value"]) == pytest.approx(0.8, abs=1e-15)
        assert float(row["bound_term"]) > 0

    def test_alias(self, capsys, example_files):
        s, y = example_files
        a = run(capsys, "tune", "--scores-file", s, "--labels-file", y)
        b = run(capsys, "tune-threshold", "--scores-file", s, "--labels-file", y)
        assert a == b

    def test_micro_single_label_equals_binary(self, capsys, example_files):
        s, y = example_files
        _, binary, _ = run(capsys, "tune", "--scores-file", s, "--labels-file", y)
        _, micro, _ = run(capsys, "tune", "--scores-file", s, "--labels-file", y, "--averaging", "micro")
        b, m = rows_of(binary)[0], rows_of(micro)[0]
        assert (b["theta"], b["metric_value"], b["bound_term"]) == (m["theta"], m["metric_value"], m["bound_term"])

    @pytest.mark.parametrize("averaging", ["binary", "macro", "micro"])
    def test_evaluate_reproduces_tune(self, capsys, example_files, multilabel_files, averaging):
        s, y = example_files if averaging == "binary" else multilabel_files
        _, out, _ = run(capsys, "tune", "--scores-file", s, "--labels-file", y, "--averaging", averaging)
        tuned = rows_of(out)
        thetas = ",".join(r["theta"] for r in tuned if r["theta"])
        code, out, _ = run(
            capsys, "evaluate", "--scores-file", s, "--labels-file", y, "--averaging", averaging, "--theta", thetas
        )
        assert code == 0
        assert out.splitlines()[0] == ",".join(EVALUATE_SCHEMA)
        evaluated = rows_of(out)
        assert [r["metric_value"] for r in evaluated] == [r["metric_value"] for r in tuned]

    def test_macro_rows(self, capsys, multilabel_files):
        s, y = multilabel_files
        _, out, _ = run(capsys, "tune", "--scores-file", s, "--labels-file", y, "--averaging", "macro")
        rows = rows_of(out)
        assert [r["label"] for r in rows] == ["0", "1", "2", "macro"]
        assert float(rows[-1]["metric_value"]) == pytest.approx(
            np.mean([float(r["metric_value"]) for r in rows[:-1]]), abs=1e-15
        )

    def test_out_file(self, capsys, tmp_path, example_files):
        s, y = example_files
        target = tmp_path / "out.csv"
        code, out, _ = run(capsys, "tune", "--scores-file", s, "--labels-file", y, "--out", target)
        assert code == 0 and out == ""
        assert target.read_text().startswith("label,theta")


class TestExitCodes:
    def test_missing_file(self, capsys, tmp_path, example_files):
        _, y = example_files
        code, _, err = run(capsys, "tune", "--scores-file", tmp_path / "nope", "--labels-file", y)
        assert code == 1 and "twostep:" in err

    def test_unknown_metric(self, capsys, example_files):
        s, y = example_files
        assert run(capsys, "tune", "--scores-file", s, "--labels-file", y, "--metric", "gmean")[0] == 1

    def test_length_mismatch(self, capsys, tmp_path, example_files):
        s, _ = example_files
        y = tmp_path / "short.txt"
        y.write_text("1\n-1\n")
        assert run(capsys, "tune", "--scores-file", s, "--labels-file", y)[0] == 1

    def test_binary_needs_one_column(self, capsys, multilabel_files):
        s, y = multilabel_files
        assert run(capsys, "tune", "--scores-file", s, "--labels-file", y)[0] == 1

    def test_bad_theta(self, capsys, example_files):
        s, y = example_files
        assert run(capsys, "evaluate", "--scores-file", s, "--labels-file", y, "--theta", "x")[0] == 1

    def test_bad_grid_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["run-discrete", "--n-grid", "a,b"])
        assert exc.value.code == 2

    def test_decreasing_grid(self, capsys):
        assert run(capsys, "run-discrete", "--reps", 1, "--n-grid", "300,100")[0] == 1


class TestExperiments:
    def test_discrete_schema_and_determinism(self, capsys):
        argv = ["run-discrete", "--reps", 3, "--n-grid", "100,316", "--seed", 5]
        a = run(capsys, *argv)
        b = run(capsys, *argv)
        assert a == b and a[0] == 0
        rows = rows_of(a[1])
        assert a[1].splitlines()[0] == ",".join(DISCRETE_SCHEMA)
        assert len(rows) == 2 * 3 * 2 * 2
        keys = [(int(r["n"]), int(r["rep"])) for r in rows]
        assert keys == sorted(keys)

    def test_workers_do_not_change_output(self):
        base = dict(experiment="discrete", n_grid=(100, 316), reps=4, seed=2)
        assert run_discrete(ExperimentConfig(**base)) == run_discrete(ExperimentConfig(**base, workers=2))

    def test_linear_schema(self, capsys):
        code, out, _ = run(
            capsys, "run-linear", "--models", 2, "--reps", 1, "--n-grid", "100", "--test-size", 2000, "--iters", 200
        )
        assert code == 0
        assert out.splitlines()[0] == ",".join(LINEAR_SCHEMA)
        assert len(rows_of(out)) == 2 * 1 * 2 * 2

    def test_verify_bounds(self, capsys):
        code, out, err = run(capsys, "verify-bounds", "--reps", 5, "--seed", 1)
        assert code == 0
        assert out.splitlines()[0] == ",".join(VERIFY_SCHEMA)
        assert all(r["holds"] == "true" for r in rows_of(out))
        assert "failures" in err

    def test_logistic_consistent_at_large_n(self):
        cfg = ExperimentConfig("discrete", (10**6,), reps=1, losses=("logistic",), seed=1)
        assert all(r["psi_regret"] < 0.01 for r in run_discrete_rows(cfg))

    def test_squared_curve_decreasing(self):
        cfg = ExperimentConfig("discrete", (100, 316, 1000, 3162, 10000), reps=200, losses=("squared",), seed=0)
        rows = run_discrete_rows(cfg)
        for metric in ("f-beta:1", "am"):
            curve = mean_curve(rows, "squared", metric)
            rho = stats.spearmanr(list(curve), list(curve.values())).statistic
            assert rho == pytest.approx(-1.0)

    def test_linear_logistic_small_regret(self):
        cfg = ExperimentConfig("linear", (3000,), reps=2, models=4, losses=("logistic",), metrics=("f-beta:1",), seed=0)
        rows = run_linear_rows(cfg)
        assert np.mean([r["psi_regret"] for r in rows]) < 0.05

    def test_constant_prediction_gives_half_am(self):
        model = DiscreteModel(np.full(4, 0.25), [0.05, 0.1, 0.02, 0.2])
        am = parse_metric("am")
        assert psi_of(model, am, -np.ones(4)) == pytest.approx(0.5, abs=1e-15)
        assert psi_of(model, am, np.ones(4)) == pytest.approx(0.5, abs=1e-15)

    def test_config_validation(self):
        with pytest.raises(InvalidParam):
            ExperimentConfig("discrete", (100,), reps=0)
        with pytest.raises(InvalidParam):
            ExperimentConfig("discrete", (), reps=1)
