"""Tests for dataset CSV parsing, the demo cohort and result serialization."""

import json

import numpy as np
import pytest

from propp.core.types import BetaParams, Dataset, PosteriorSummary
from propp.errors import DatasetParseError, InputError
from propp.io.dataset_io import read_dataset, write_dataset
from propp.io.demo import (
    EXTERNAL_COHORT,
    TRIAL_COHORT,
    generate_demo_data,
    generate_demo_frame,
    write_demo_csv,
)
from propp.io.results import ResultDocument, atomic_write_text, metrics_frame, write_metrics_csv
from propp.simulation.runner import MetricsRow


def _write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestReadDataset:
    def test_minimal(self, tmp_path):
        data = read_dataset(_write(tmp_path, "source,outcome,age\ntrial,1,50\nexternal,0,61.5\n"))
        assert (data.n, data.n_trial, data.n_external) == (2, 1, 1)
        assert data.covariate_names == ("age",)
        np.testing.assert_array_equal(data.covariates[:, 0], [50.0, 61.5])

    def test_labels_case_and_space_insensitive(self, tmp_path):
        data = read_dataset(_write(tmp_path, "source,outcome\n Trial ,1\nEXTERNAL, 0\n"))
        assert data.source.tolist() == [1, 0]
        assert data.k == 0

    def test_non_binary_outcome(self, tmp_path):
        path = _write(tmp_path, "source,outcome,age\ntrial,1,50\nexternal,2,61\n")
        with pytest.raises(DatasetParseError) as exc:
            read_dataset(path)
        assert exc.value.line == 3
        assert exc.value.column == "outcome"
        assert "line 3" in str(exc.value)

    def test_unknown_source(self, tmp_path):
        with pytest.raises(DatasetParseError) as exc:
            read_dataset(_write(tmp_path, "source,outcome\ntrial,1\nhistorical,0\n"))
        assert exc.value.column == "source"

    def test_missing_column(self, tmp_path):
        with pytest.raises(DatasetParseError) as exc:
            read_dataset(_write(tmp_path, "source,age\ntrial,50\n"))
        assert exc.value.column == "outcome"

    def test_short_row(self, tmp_path):
        with pytest.raises(DatasetParseError) as exc:
            read_dataset(_write(tmp_path, "source,outcome,age\ntrial,1,50\nexternal,0\n"))
        assert exc.value.line == 3

    def test_long_row(self, tmp_path):
        with pytest.raises(DatasetParseError):
            read_dataset(_write(tmp_path, "source,outcome\ntrial,1\nexternal,0,7\ntrial,0\n"))

    def test_empty_value(self, tmp_path):
        with pytest.raises(DatasetParseError) as exc:
            read_dataset(_write(tmp_path, "source,outcome,age\ntrial,1,\nexternal,0,3\n"))
        assert (exc.value.line, exc.value.column) == (2, "age")

    def test_empty_file(self, tmp_path):
        with pytest.raises(DatasetParseError):
            read_dataset(_write(tmp_path, ""))

    def test_parse_error_is_input_error(self):
        assert issubclass(DatasetParseError, InputError)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            read_dataset(tmp_path / "absent.csv")

    def test_categorical_expansion(self, tmp_path):
        text = (
            'source,outcome,stage,sex\n'
            'trial,1,"M1c","Male"\n'
            'trial,0,"M1a","Female"\n'
            'external,1,"Unresectable III","Male"\n'
            'external,0,"M1b","Female"\n'
        )
        data = read_dataset(_write(tmp_path, text))
        assert data.covariate_names == (
            "stage[M1b]", "stage[M1c]", "stage[Unresectable III]", "sex[Male]",
        )
        np.testing.assert_array_equal(data.covariates, [
            [0, 1, 0, 1],
            [0, 0, 0, 0],
            [0, 0, 1, 1],
            [1, 0, 0, 0],
        ])

    def test_quoted_numeric_levels_are_categorical(self, tmp_path):
        text = 'source,outcome,ecog\ntrial,1,"0"\ntrial,0,"1"\nexternal,1,"2"\nexternal,0,"0"\n'
        data = read_dataset(_write(tmp_path, text))
        assert data.covariate_names == ("ecog[1]", "ecog[2]")
        np.testing.assert_array_equal(data.covariates, [[0, 0], [1, 0], [0, 1], [0, 0]])

    @pytest.mark.parametrize("bad", ["4O.5", "NaN", "inf", "abc"])
    def test_bad_numeric_cell(self, tmp_path, bad):
        rows = [f"{'trial' if i % 2 else 'external'},{i % 2},{40 + i}.5" for i in range(50)]
        rows[30] = f"trial,1,{bad}"
        path = _write(tmp_path, "source,outcome,age\n" + "\n".join(rows) + "\n")
        with pytest.raises(DatasetParseError) as exc:
            read_dataset(path)
        assert (exc.value.line, exc.value.column) == (32, "age")

    def test_mixed_quoting(self, tmp_path):
        text = 'source,outcome,sex\ntrial,1,Male\nexternal,0,"Female"\n'
        with pytest.raises(DatasetParseError) as exc:
            read_dataset(_write(tmp_path, text))
        assert (exc.value.line, exc.value.column) == (3, "sex")

    def test_quoted_header_and_labels(self, tmp_path):
        text = '"source","outcome","sex"\n"trial",1,"Male"\n"external",0,"Female"\n'
        data = read_dataset(_write(tmp_path, text))
        assert data.source.tolist() == [1, 0]
        assert data.covariate_names == ("sex[Male]",)


class TestWriteDataset:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        data = Dataset(
            source=rng.integers(0, 2, 50).tolist() + [1],
            outcome=rng.integers(0, 2, 51),
            covariates=rng.standard_normal((51, 3)) * 1e3,
            covariate_names=("age", "sex[Male]", "ldh"),
        )
        path = write_dataset(data, tmp_path / "out" / "data.csv")
        assert read_dataset(path).same_content(data)

    def test_no_temp_files_left(self, tmp_path):
        atomic_write_text(tmp_path / "a.txt", "hello")
        assert [p.name for p in tmp_path.iterdir()] == ["a.txt"]


class TestDemoData:
    @pytest.mark.parametrize("seed", [0, 1, 99])
    def test_marginals_exact(self, seed):
        frame = generate_demo_frame(seed)
        for cohort in (TRIAL_COHORT, EXTERNAL_COHORT):
            rows = frame[frame["source"] == cohort.label]
            assert len(rows) == cohort.n
            assert rows["outcome"].sum() == cohort.responders
            for column in ("sex", "stage", "ecog"):
                counts = rows[column].value_counts().to_dict()
                expected = {k: v for k, v in getattr(cohort, column).items() if v}
                assert counts == expected

    def test_table_values(self):
        frame = generate_demo_frame(0)
        ext = frame[frame["source"] == "external"]
        assert ext["stage"].value_counts()["M1c"] == 182
        assert (ext["ecog"].isin(["ECOG 2", "ECOG 3"])).sum() == 31
        assert len(frame) == 373

    def test_frail_groups_disjoint(self):
        frame = generate_demo_frame(5)
        both = frame["ecog"].isin(["ECOG 2", "ECOG 3"]) & (frame["stage"] == "Unresectable III")
        assert not both.any()

    def test_ages_vary_with_seed(self):
        a, b = generate_demo_frame(1), generate_demo_frame(2)
        assert not np.array_equal(a["age"].to_numpy(), b["age"].to_numpy())
        assert a["age"].between(18, 90).all()

    def test_csv_quotes_categorical_columns(self, tmp_path):
        text = write_demo_csv(tmp_path / "demo.csv", seed=1).read_text()
        assert '"ECOG 0"' in text and '"Male"' in text
        assert ',"M1c",' in text or ',"M1c"\n' in text

    def test_dataset_via_file(self, tmp_path):
        data = read_dataset(write_demo_csv(tmp_path / "demo.csv", seed=7))
        assert (data.n_trial, data.n_external) == (132, 241)
        assert data.outcome[data.is_trial].sum() == 75
        assert data.outcome[~data.is_trial].sum() == 129
        assert data.same_content(generate_demo_data(7))

    def test_covariates(self):
        data = generate_demo_data(0)
        assert data.covariate_names == (
            "age", "sex[Male]", "stage[M1b]", "stage[M1c]", "stage[Unresectable III]",
            "ecog[ECOG 1]", "ecog[ECOG 2]", "ecog[ECOG 3]",
        )


class TestResults:
    def _document(self, timing=None):
        return ResultDocument(
            config={"method": "ignore", "seed": 1},
            posteriors={"trial_only": PosteriorSummary.from_beta(BetaParams(76.0, 58.0))},
            timing=timing,
        )

    def test_timing_only_when_recorded(self):
        assert "timing" not in json.loads(self._document().to_json())
        assert json.loads(self._document({"total": 0.1}).to_json())["timing"] == {"total": 0.1}

    def test_json_stable(self, tmp_path):
        path = self._document().write(tmp_path / "r.json")
        assert path.read_text() == self._document().to_json()
        doc = json.loads(path.read_text())
        assert doc["posteriors"]["trial_only"]["beta_params"] == [76.0, 58.0]
        assert doc["posteriors"]["trial_only"]["n_samples"] is None

    def test_metrics_csv(self, tmp_path):
        rows = [MetricsRow("ignore", 0.0, 0.034, 0.05, 0, 500), MetricsRow("pool", 0.0, 0.023, 0.04, 0, 500)]
        path = write_metrics_csv(rows, tmp_path / "m.csv", scenario="drift", seed=3)
        lines = path.read_text().splitlines()
        assert lines[0] == "scenario,seed,method,grid_value,rmse,type1,failures,replicates"
        assert len(lines) == 3
        assert list(metrics_frame(rows)["method"]) == ["ignore", "pool"]
