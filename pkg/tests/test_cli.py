"""
Test suite for the nulllda command line
"""

import json
import logging

import numpy as np
import pytest
from click.testing import CliRunner

from src.interfaces.cli import cli
from src.lda.scatter import LabeledDataset
from src.utils.data_io import write_dataset, write_matrix
from tests.conftest import make_dataset, random_sketch


def reports(result, command):
    """JSON report lines emitted by ``command``; log lines on stderr carry no command key."""
    found = []
    for line in result.output.splitlines():
        line = line.strip()
        if not line.startswith("{"):
            continue
        try:
            payload = json.loads(line)
        except json.JSONDecodeError:
            continue
        if payload.get("command") == command:
            found.append(payload)
    return found


@pytest.fixture(autouse=True)
def restore_log_handlers():
    """Drop handlers a command installed on the root logger; they point at the runner streams."""
    root = logging.getLogger()
    before = list(root.handlers)
    yield
    for handler in root.handlers[:]:
        if handler not in before:
            root.removeHandler(handler)


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def data_file(tmp_path, dataset):
    path = tmp_path / "train.csv"
    write_dataset(dataset, path)
    return path


@pytest.fixture
def model_file(runner, tmp_path, data_file):
    path = tmp_path / "model.json"
    result = runner.invoke(cli, ["train", "--data", str(data_file), "--out", str(path),
                                 "--seed", "3"])
    assert result.exit_code == 0, result.output
    return path


class TestTrain:
    """Test cases for 'train'."""

    def test_writes_model_and_report(self, runner, tmp_path, data_file, model_file):
        """Test train writes the model file and prints the certificate."""
        assert model_file.exists()

        result = runner.invoke(cli, ["train", "--data", str(data_file),
                                     "--out", str(tmp_path / "again.json"), "--seed", "3"])
        (report,) = reports(result, "train")
        assert report["verdict"] == "nonsingular"
        assert report["seed"] == 3
        assert report["retries"] == 0

    def test_same_seed_same_bytes(self, runner, tmp_path, data_file, model_file):
        """Test two runs with one seed write identical files."""
        again = tmp_path / "again.json"
        result = runner.invoke(cli, ["train", "--data", str(data_file), "--out", str(again),
                                     "--seed", "3"])

        assert result.exit_code == 0
        assert again.read_bytes() == model_file.read_bytes()

    def test_injected_generic_sketch(self, runner, tmp_path, dataset, data_file):
        """Test train with a sketch file."""
        sketch = tmp_path / "sketch.csv"
        write_matrix(random_sketch(dataset), sketch)
        result = runner.invoke(cli, ["train", "--data", str(data_file), "--sketch-file", str(sketch),
                                     "--out", str(tmp_path / "m.json")])
        assert result.exit_code == 0, result.output

    def test_retries_exhausted(self, runner, tmp_path):
        """Test exit 3 when no draw certifies."""
        path = tmp_path / "three.csv"
        write_dataset(make_dataset(5, c=3), path)
        result = runner.invoke(cli, ["train", "--data", str(path), "--out", str(tmp_path / "m.json"),
                                     "--threshold", "1", "--max-retries", "1"])

        assert result.exit_code == 3
        assert not (tmp_path / "m.json").exists()

    def test_missing_data_file(self, runner, tmp_path):
        """Test exit 2 for an absent data file."""
        result = runner.invoke(cli, ["train", "--data", str(tmp_path / "absent.csv"),
                                     "--out", str(tmp_path / "m.json")])
        assert result.exit_code == 2

    def test_transposed_input(self, runner, tmp_path, dataset):
        """Test the transposed layout flag."""
        path = tmp_path / "columns.csv"
        rows = [",".join(repr(float(v)) for v in row) for row in dataset.data]
        rows.append(",".join(dataset.labels))
        path.write_text("\n".join(rows) + "\n", encoding="utf-8")

        result = runner.invoke(cli, ["train", "--data", str(path), "--transpose",
                                     "--out", str(tmp_path / "m.json")])
        assert result.exit_code == 0, result.output


class TestCounterexampleCommand:
    """Test cases for 'counterexample' and training on its sketch."""

    def test_emits_files_and_expectation(self, runner, tmp_path):
        """Test the dataset, sketch and expectation files."""
        out = tmp_path / "cx"
        result = runner.invoke(cli, ["counterexample", "--dim", "10", "--alpha", "0.5",
                                     "--out", str(out)])

        assert result.exit_code == 0, result.output
        assert (out / "dataset.csv").exists()
        assert (out / "sketch.csv").exists()

        expected = json.loads((out / "expected.json").read_text(encoding="utf-8"))
        assert expected["verdict"] == "singular"
        assert expected["expected_exit_code"] == 4
        assert all(norm <= 1e-14 for norm in expected["sb_y_column_norms"])
        assert expected["w_frobenius"] <= 1e-14
        assert reports(result, "counterexample")[0]["verdict"] == "singular"

    def test_training_on_the_sketch_exits_4(self, runner, tmp_path):
        """Test training with the emitted sketch exits 4."""
        out = tmp_path / "cx"
        runner.invoke(cli, ["counterexample", "-d", "10", "--alpha", "0.5", "--out", str(out)])
        result = runner.invoke(cli, ["train", "--data", str(out / "dataset.csv"),
                                     "--sketch-file", str(out / "sketch.csv"),
                                     "--out", str(tmp_path / "m.json")])

        assert result.exit_code == 4
        assert reports(result, "train")[0]["verdict"] == "singular"
        assert not (tmp_path / "m.json").exists()

    def test_random_sketch_on_the_same_data(self, runner, tmp_path):
        """Test a seeded fit on the emitted dataset succeeds."""
        out = tmp_path / "cx"
        runner.invoke(cli, ["counterexample", "-d", "10", "--alpha", "0.5", "--out", str(out)])
        result = runner.invoke(cli, ["train", "--data", str(out / "dataset.csv"),
                                     "--seed", "1", "--out", str(tmp_path / "m.json")])

        assert result.exit_code == 0, result.output
        assert reports(result, "train")[0]["verdict"] == "nonsingular"

    @pytest.mark.parametrize("args", [["--dim", "3", "--alpha", "0.5"],
                                      ["--dim", "10", "--alpha", "1.5"]])
    def test_bad_parameters_exit_2(self, runner, tmp_path, args):
        """Test invalid d and alpha exit 2."""
        result = runner.invoke(cli, ["counterexample", *args, "--out", str(tmp_path / "cx")])
        assert result.exit_code == 2


class TestVerify:
    """Test cases for 'verify'."""

    def test_fresh_model_passes(self, runner, data_file, model_file):
        """Test verify on the training data exits 0."""
        result = runner.invoke(cli, ["verify", "--model", str(model_file), "--data", str(data_file)])

        assert result.exit_code == 0, result.output
        (report,) = reports(result, "verify")
        assert report["all_passed"] is True
        assert report["within_pass"] and report["between_pass"]
        assert report["rank_pass"] and report["fixed_point_pass"] and report["span_pass"]

    def test_shuffled_labels_fail_within(self, runner, tmp_path, dataset, model_file):
        """Test verify against shuffled labels exits 1."""
        shuffled = tmp_path / "shuffled.csv"
        write_dataset(LabeledDataset(dataset.data, tuple(np.roll(dataset.labels, 1))), shuffled)
        result = runner.invoke(cli, ["verify", "--model", str(model_file), "--data", str(shuffled)])

        assert result.exit_code == 0
        (report,) = reports(result, "verify")
        assert report["within_pass"] is False
        assert report["all_passed"] is False

    def test_dimension_mismatch(self, runner, tmp_path, model_file):
        """Test verify with a wider dataset exits 2."""
        other = tmp_path / "other.csv"
        write_dataset(make_dataset(77, d=80), other)
        result = runner.invoke(cli, ["verify", "--model", str(model_file), "--data", str(other)])
        assert result.exit_code == 2


class TestTransformAndClassify:
    """Test cases for 'transform' and 'classify'."""

    def test_transform_shape(self, runner, tmp_path, dataset, data_file, model_file):
        """Test transform writes a (c-1) x n matrix."""
        out = tmp_path / "z.csv"
        result = runner.invoke(cli, ["transform", "--model", str(model_file),
                                     "--data", str(data_file), "--out", str(out)])

        assert result.exit_code == 0, result.output
        rows = out.read_text(encoding="utf-8").splitlines()
        assert len(rows) == dataset.n
        assert all(len(row.split(",")) == dataset.c - 1 for row in rows)

    def test_transform_transposed_output(self, runner, tmp_path, dataset, data_file, model_file):
        """Test transform writes n x (c-1) when transposed."""
        out = tmp_path / "z.csv"
        src = tmp_path / "columns.csv"
        rows = [",".join(repr(float(v)) for v in row) for row in dataset.data]
        src.write_text("\n".join(rows) + "\n", encoding="utf-8")

        result = runner.invoke(cli, ["transform", "--model", str(model_file), "--data", str(src),
                                     "--out", str(out), "--transpose"])
        assert result.exit_code == 0, result.output
        assert len(out.read_text(encoding="utf-8").splitlines()) == dataset.c - 1

    def test_classify_training_data(self, runner, tmp_path, dataset, data_file, model_file):
        """Test classify recovers the training labels."""
        out = tmp_path / "labels.csv"
        result = runner.invoke(cli, ["classify", "--model", str(model_file),
                                     "--data", str(data_file), "--out", str(out)])

        assert result.exit_code == 0, result.output
        assert out.read_text(encoding="utf-8").splitlines() == ["label", *dataset.labels]
        (report,) = reports(result, "classify")
        assert report["accuracy"] == 1.0
        assert report["samples"] == dataset.n

    def test_classify_follows_sample_order(self, runner, tmp_path, dataset, data_file, model_file):
        """Test permuting the samples permutes the predicted labels the same way."""
        perm = np.random.default_rng(11).permutation(dataset.n)
        permuted = tmp_path / "permuted.csv"
        write_dataset(LabeledDataset(dataset.data[:, perm], tuple(dataset.labels[i] for i in perm)),
                      permuted)

        outputs = []
        for name, path in (("original", data_file), ("permuted", permuted)):
            out = tmp_path / f"{name}-labels.csv"
            result = runner.invoke(cli, ["classify", "--model", str(model_file),
                                         "--data", str(path), "--out", str(out)])
            assert result.exit_code == 0, result.output
            outputs.append(out.read_text(encoding="utf-8").splitlines()[1:])

        original, shuffled = outputs
        assert shuffled == [original[i] for i in perm]

    def test_degenerate_model_exits_5(self, runner, tmp_path, data_file, model_file):
        """Test a model with a zero column exits 5."""
        document = json.loads(model_file.read_text(encoding="utf-8"))
        document["W"] = [0.0] * len(document["W"])
        broken = tmp_path / "broken.json"
        broken.write_text(json.dumps(document), encoding="utf-8")

        result = runner.invoke(cli, ["classify", "--model", str(broken), "--data", str(data_file)])
        assert result.exit_code == 5

    def test_wrong_width_exits_2(self, runner, tmp_path, model_file):
        """Test samples of the wrong width exit 2."""
        bad = tmp_path / "narrow.csv"
        bad.write_text("1,2\n3,4\n", encoding="utf-8")
        result = runner.invoke(cli, ["transform", "--model", str(model_file), "--data", str(bad),
                                     "--out", str(tmp_path / "z.csv")])
        assert result.exit_code == 2


class TestDiagnostics:
    """Test cases for 'certify', 'inspect' and 'adversarial'."""

    def test_certify_random_sketch(self, runner, tmp_path, dataset, data_file):
        """Test certify passes a random sketch."""
        sketch = tmp_path / "y.csv"
        write_matrix(random_sketch(dataset), sketch)
        result = runner.invoke(cli, ["certify", "--data", str(data_file), "--sketch-file", str(sketch)])

        assert result.exit_code == 0, result.output
        (report,) = reports(result, "certify")
        assert report["certificate"]["verdict"] == "nonsingular"
        assert report["geometric"]["verdict"] == "nonsingular"

    def test_adversarial_sketch_fails_certification(self, runner, tmp_path, data_file):
        """Test an adversarial sketch fails certify."""
        sketch = tmp_path / "adv.csv"
        result = runner.invoke(cli, ["adversarial", "--data", str(data_file), "--seed", "2",
                                     "--out", str(sketch)])
        assert result.exit_code == 0, result.output

        result = runner.invoke(cli, ["certify", "--data", str(data_file), "--sketch-file", str(sketch)])
        assert result.exit_code == 4
        (report,) = reports(result, "certify")
        assert report["certificate"]["verdict"] == "singular"
        assert report["geometric"]["largest_angle"] == pytest.approx(np.pi / 2, abs=1e-6)

    def test_inspect(self, runner, dataset, data_file):
        """Test inspect prints the rank facts."""
        result = runner.invoke(cli, ["inspect", "--data", str(data_file)])

        assert result.exit_code == 0, result.output
        (report,) = reports(result, "inspect")
        assert report["all_ok"] is True
        assert report["eigen_rank"] == dataset.n - 1
        assert report["total_rank"] == dataset.n - 1


class TestGroupOptions:
    """Test cases for options shared by every command."""

    def test_missing_config_exits_2(self, runner, tmp_path, data_file):
        """Test an absent config file exits 2."""
        result = runner.invoke(cli, ["--config", str(tmp_path / "absent.yaml"),
                                     "inspect", "--data", str(data_file)])
        assert result.exit_code == 2

    def test_unknown_log_level_exits_2(self, runner, tmp_path, data_file):
        """Test a config with logging.level: verbose exits 2."""
        config = tmp_path / "nulllda.yaml"
        config.write_text("nulllda:\n  logging:\n    level: verbose\n", encoding="utf-8")
        result = runner.invoke(cli, ["--config", str(config), "inspect", "--data", str(data_file)])
        assert result.exit_code == 2

    def test_config_seed_is_used(self, runner, tmp_path, data_file):
        """Test the seed from the config file."""
        config = tmp_path / "nulllda.yaml"
        config.write_text("nulllda:\n  fit:\n    seed: 12\n", encoding="utf-8")
        result = runner.invoke(cli, ["--config", str(config), "train", "--data", str(data_file),
                                     "--out", str(tmp_path / "m.json")])

        assert result.exit_code == 0, result.output
        assert reports(result, "train")[0]["seed"] == 12

    def test_version(self, runner):
        """Test the version option."""
        result = runner.invoke(cli, ["--version"])
        assert result.exit_code == 0
        assert "nulllda" in result.output
