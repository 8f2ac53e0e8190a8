import numpy as np
import pytest

from factuality.analysis import (
    ErrorCategory,
    PredictionSet,
    error_category_report,
    evaluate,
    expected_inference_study,
    group_dispersion,
    mean_predictions,
    rank_errors,
    read_error_annotations,
    read_predictions,
    scatter_export,
)
from factuality.core import Dataset, FormatError, Polarity

from conftest import make_record


def grid_records(dataset, n, prefix, gold_fn=lambda i: ((i * 7) % 13 - 6) / 2.0):
    verbs = ["know", "say", "manage", "want"]
    frames = ["V_that_S", "V_to_VP_ev"]
    return [
        make_record(
            id=f"{dataset.key}:{prefix}:{i}",
            dataset=dataset,
            verb=verbs[i % 4],
            frame=frames[i % 2],
            polarity=Polarity.POSITIVE if i % 3 else Polarity.NEGATIVE,
            gold=float(np.clip(gold_fn(i), -3, 3)),
        )
        for i in range(n)
    ]


def preds_for(records, fn):
    return PredictionSet(
        model_name="test",
        entries={r.id: float(np.clip(fn(r), -3, 3)) for r in records},
    )


class TestPredictionSets:
    def test_read_and_validate(self, tmp_path):
        path = tmp_path / "p.tsv"
        path.write_text("a:0\t1.5\na:1\t-3\n")
        pset = read_predictions(path)
        assert pset.entries == {"a:0": 1.5, "a:1": -3.0}
        assert pset.model_name == "p"

    def test_duplicate_and_range_rejected(self, tmp_path):
        path = tmp_path / "p.tsv"
        path.write_text("a:0\t1.5\na:0\t1.0\n")
        with pytest.raises(FormatError, match="duplicate"):
            read_predictions(path)
        path.write_text("a:0\t9\n")
        with pytest.raises(FormatError, match="outside"):
            read_predictions(path)

    def test_mean_of_three_runs(self):
        sets = [
            PredictionSet(model_name=f"run{i}", entries={"a:0": float(i)})
            for i in (1, 2, 3)
        ]
        merged = mean_predictions(sets)
        assert merged.entries["a:0"] == pytest.approx(2.0)

    def test_mean_uses_covering_runs_only(self):
        sets = [
            PredictionSet(model_name="r1", entries={"a:0": 1.0, "a:1": 2.0}),
            PredictionSet(model_name="r2", entries={"a:0": 3.0}),
        ]
        merged = mean_predictions(sets)
        assert merged.entries == {"a:0": 2.0, "a:1": 2.0}


class TestEvaluate:
    def test_identity_predictions(self):
        records = grid_records(Dataset.RP, 12, "ev")
        report = evaluate(records, preds_for(records, lambda r: r.gold))
        score = report.per_dataset["RP"]
        assert score.mae == 0.0
        assert score.pearson == pytest.approx(1.0)
        assert score.n == 12

    def test_constant_gold_r_undefined(self):
        records = grid_records(Dataset.MEANTIME, 6, "ev", gold_fn=lambda i: 3.0)
        report = evaluate(records, preds_for(records, lambda r: r.gold - 0.5))
        assert report.per_dataset["MEANTIME"].pearson is None
        assert report.per_dataset["MEANTIME"].mae == pytest.approx(0.5)

    def test_averaging_then_evaluating_matches(self):
        # golds bounded away from +/-3 so the offsets stay on the scale
        records = grid_records(Dataset.RP, 10, "ev", gold_fn=lambda i: ((i * 7) % 13 - 6) / 3.0)
        sets = [
            preds_for(records, lambda r: r.gold + 0.4),
            preds_for(records, lambda r: r.gold - 0.4),
        ]
        report = evaluate(records, sets)
        merged = evaluate(records, mean_predictions(sets))
        assert report.per_dataset == merged.per_dataset
        assert report.per_dataset["RP"].mae == pytest.approx(0.0)

    def test_missing_predictions_listed(self):
        records = grid_records(Dataset.RP, 4, "ev")
        pset = PredictionSet(model_name="gap", entries={records[0].id: 0.0})
        with pytest.raises(ValueError, match=records[1].id):
            evaluate(records, pset)

    def test_invariant_to_set_ordering(self):
        records = grid_records(Dataset.RP, 8, "ev", gold_fn=lambda i: ((i * 7) % 13 - 6) / 3.0)
        s1 = preds_for(records, lambda r: r.gold + 0.3)
        s2 = preds_for(records, lambda r: r.gold - 0.1)
        assert evaluate(records, [s1, s2]).per_dataset == evaluate(records, [s2, s1]).per_dataset

    def test_multi_dataset_report(self):
        records = grid_records(Dataset.RP, 6, "a") + grid_records(Dataset.CB, 6, "b")
        report = evaluate(records, preds_for(records, lambda r: r.gold / 2))
        assert set(report.per_dataset) == {"RP", "CB"}
        text = report.to_text()
        assert "RP" in text and "CB" in text


class TestExpectedInferenceStudy:
    def make_inputs(self, noise_seed=0):
        rng = np.random.default_rng(noise_seed)
        records = []
        expected = {}
        for ds, prefix in ((Dataset.RP, "r"), (Dataset.CB, "c"), (Dataset.MV, "m")):
            for i in range(60):
                gold = float(np.clip(rng.uniform(-3, 3), -3, 3))
                records.append(
                    make_record(id=f"{ds.key}:{prefix}:{i}", dataset=ds, gold=gold)
                )
                expected[records[-1].id] = float(
                    np.clip(gold + rng.normal(0, 1.2), -3, 3)
                )
        return records, expected

    def test_oracle_as_predictor_gives_unit_slopes(self):
        records, expected = self.make_inputs()
        preds = PredictionSet(model_name="oracle", entries=expected)
        study = expected_inference_study(records, preds, expected)
        assert study.model.fixed_intercept_ == pytest.approx(0.0, abs=0.05)
        for cell in study.per_dataset.values():
            assert cell["beta"] == pytest.approx(1.0, abs=0.05)
        assert study.all_slopes_positive

    def test_perfect_predictions_give_zero_slopes(self):
        records, expected = self.make_inputs()
        preds = preds_for(records, lambda r: r.gold)
        study = expected_inference_study(records, preds, expected)
        for cell in study.per_dataset.values():
            assert cell["beta"] == pytest.approx(0.0, abs=0.05)
            assert cell["alpha"] == pytest.approx(0.0, abs=0.05)

    def test_uds_items_excluded_with_warning(self):
        records, expected = self.make_inputs()
        uds = grid_records(Dataset.UDSIH2, 5, "u")
        preds = PredictionSet(
            model_name="oracle",
            entries={**expected, **{r.id: 0.0 for r in uds}},
        )
        expected_with_uds = {**expected, **{r.id: 0.0 for r in uds}}
        with pytest.warns(UserWarning, match="UDS-IH2"):
            study = expected_inference_study(records + uds, preds, expected_with_uds)
        assert {row.dataset for row in study.rows} == {"RP", "CB", "MV"}

    def test_items_outside_shared_set_dropped(self):
        records, expected = self.make_inputs()
        preds = PredictionSet(model_name="partial", entries={
            r.id: 0.0 for r in records[: len(records) // 2]
        })
        study = expected_inference_study(records, preds, expected)
        assert len(study.rows) == len(records) // 2

    def test_empty_shared_set_rejected(self):
        records, expected = self.make_inputs()
        preds = PredictionSet(model_name="none", entries={"zzz:0": 0.0})
        with pytest.raises(ValueError, match="shared"):
            expected_inference_study(records + [make_record(id="zzz:0", gold=0.0)], preds, expected)


class TestRankErrors:
    def test_top_fraction_and_tiebreak(self):
        records = grid_records(Dataset.CB, 10, "rk", gold_fn=lambda i: 0.0)
        # two items tie at the top error: ids decide the order
        errors = {r.id: 0.1 * i for i, r in enumerate(records)}
        errors[records[3].id] = errors[records[9].id] = 2.0
        pset = PredictionSet(
            model_name="t", entries={r.id: np.clip(r.gold + errors[r.id], -3, 3) for r in records}
        )
        top = rank_errors(records, pset, frac=0.2)
        assert len(top) == 2
        assert [e.record.id for e in top] == sorted([records[3].id, records[9].id])
        assert top[0].abs_error == pytest.approx(2.0)

    def test_full_ranking_sorted(self):
        records = grid_records(Dataset.RP, 9, "rk")
        pset = preds_for(records, lambda r: -r.gold / 2)
        ranked = rank_errors(records, pset, frac=1.0)
        assert len(ranked) == 9
        errs = [e.abs_error for e in ranked]
        assert errs == sorted(errs, reverse=True)

    def test_ceil_of_fraction(self):
        records = grid_records(Dataset.RP, 10, "rk")
        pset = preds_for(records, lambda r: r.gold)
        assert len(rank_errors(records, pset, frac=0.05)) == 1  # ceil(0.5)

    def test_prefix_dominates_remainder(self):
        records = grid_records(Dataset.RP, 12, "rk")
        pset = preds_for(records, lambda r: -r.gold / 3 + 0.2)
        top = rank_errors(records, pset, frac=0.25)
        rest = rank_errors(records, pset, frac=1.0)[len(top):]
        assert min(e.abs_error for e in top) >= max(e.abs_error for e in rest)

    def test_bad_frac_rejected(self):
        records = grid_records(Dataset.RP, 3, "rk")
        pset = preds_for(records, lambda r: r.gold)
        for frac in (0.0, -0.1, 1.5):
            with pytest.raises(ValueError):
                rank_errors(records, pset, frac=frac)


class TestGroupDispersion:
    def test_hand_computed_sample_variance(self):
        records = [
            make_record(id="a:0", verb="know", frame="V_that_S", polarity=Polarity.POSITIVE, gold=1.0),
            make_record(id="a:1", verb="know", frame="V_that_S", polarity=Polarity.POSITIVE, gold=2.0),
        ]
        pset = PredictionSet(model_name="t", entries={"a:0": 1.0, "a:1": 2.0})
        report = group_dispersion(records, pset)
        # sample variance of {1, 2} is 0.5
        assert report.mean_prediction_variance == pytest.approx(0.5)
        assert report.mean_gold_variance == pytest.approx(0.5)
        assert report.n_groups == 1

    def test_population_variance_option(self):
        records = [
            make_record(id="a:0", gold=1.0),
            make_record(id="a:1", gold=2.0),
        ]
        pset = PredictionSet(model_name="t", entries={"a:0": 1.0, "a:1": 2.0})
        report = group_dispersion(records, pset, ddof=0)
        assert report.mean_gold_variance == pytest.approx(0.25)

    def test_constant_predictions_zero_variance(self):
        records = grid_records(Dataset.RP, 16, "gd")
        pset = preds_for(records, lambda r: 1.0)
        report = group_dispersion(records, pset)
        assert report.mean_prediction_variance == 0.0
        assert report.mean_gold_variance > 0.0

    def test_gold_variance_independent_of_predictions(self):
        records = grid_records(Dataset.RP, 16, "gd")
        a = group_dispersion(records, preds_for(records, lambda r: 1.0))
        b = group_dispersion(records, preds_for(records, lambda r: -r.gold))
        assert a.mean_gold_variance == pytest.approx(b.mean_gold_variance)

    def test_singletons_skipped_and_all_singletons_rejected(self):
        records = [
            make_record(id=f"s:{i}", verb=f"v{i}", gold=0.0) for i in range(3)
        ]
        pset = PredictionSet(model_name="t", entries={r.id: 0.0 for r in records})
        with pytest.raises(ValueError, match="at least 2"):
            group_dispersion(records, pset)


class TestScatterExport:
    def test_faceted_by_environment(self):
        from factuality.core import Environment

        records = []
        for i, env in enumerate(Environment):
            if env is Environment.NONE:
                continue
            records.append(
                make_record(
                    id=f"cb:sc:{i}",
                    dataset=Dataset.CB,
                    verb="know" if i % 2 else "say",
                    environment=env,
                    gold=1.0,
                )
            )
        pset = preds_for(records, lambda r: 0.5)
        table = scatter_export(records, pset, facet="environment")
        assert len(table.rows) == len(records)
        facets = {row[3] for row in table.rows}
        assert facets == {"negation", "modal", "question", "conditional"}
        know_rows = [row for row in table.rows if row[0].endswith(("1", "3"))]
        assert all(row[4] for row in know_rows)  # know is factive
        assert all(row[5] for row in know_rows)  # and neg-raising

    def test_verb_frame_facet(self):
        records = grid_records(Dataset.RP, 8, "sc")
        table = scatter_export(records, preds_for(records, lambda r: r.gold), facet=("verb", "frame"))
        assert all("|" in row[3] for row in table.rows)

    def test_empty_items_is_header_only(self, tmp_path):
        table = scatter_export([], PredictionSet(model_name="t", entries={}), facet="environment")
        assert table.rows == []
        out = tmp_path / "scatter.csv"
        table.write_csv(out)
        assert out.read_text().splitlines()[0].startswith("id,gold,prediction")

    def test_missing_facet_rejected(self):
        records = [make_record(id="x:0", environment=None)]
        with pytest.raises(ValueError, match="facet"):
            scatter_export(records, preds_for(records, lambda r: 0.0), facet="environment")

    def test_values_in_range(self):
        records = grid_records(Dataset.RP, 10, "sc")
        table = scatter_export(records, preds_for(records, lambda r: r.gold), facet="verb")
        for row in table.rows:
            assert -3.0 <= row[1] <= 3.0
            assert -3.0 <= row[2] <= 3.0


class TestErrorCategories:
    def make_ranked(self, n_cb=10, n_rp=5):
        records = grid_records(Dataset.CB, n_cb, "ec", gold_fn=lambda i: 0.0)
        records += grid_records(Dataset.RP, n_rp, "ec", gold_fn=lambda i: 0.0)
        pset = preds_for(records, lambda r: 2.0)
        return rank_errors(records, pset, frac=1.0)

    def test_counts_and_percentages(self):
        ranked = self.make_ranked()
        cb_ids = [e.record.id for e in ranked if e.record.dataset is Dataset.CB]
        annotations = {
            cb_ids[i]: {"ann1": ErrorCategory.CONTEXT_SUGGESTS} for i in range(6)
        }
        annotations.update(
            {cb_ids[i]: {"ann1": ErrorCategory.LEXICAL_INFERENCE} for i in range(6, 10)}
        )
        report = error_category_report(ranked, annotations)
        cb = report.per_dataset["CB"]
        assert cb["context_suggests"]["count"] == 6
        assert cb["context_suggests"]["percent"] == pytest.approx(60.0)
        assert sum(cell["percent"] for cell in cb.values()) == pytest.approx(100.0, abs=0.1)

    def test_agreement_percentage(self):
        ranked = self.make_ranked(n_cb=40, n_rp=0)
        ids = [e.record.id for e in ranked]
        annotations = {}
        for i, item_id in enumerate(ids[:40]):
            second = (
                ErrorCategory.CONTEXT_SUGGESTS if i < 32 else ErrorCategory.QUD
            )
            annotations[item_id] = {
                "ann1": ErrorCategory.CONTEXT_SUGGESTS,
                "ann2": second,
            }
        report = error_category_report(ranked, annotations)
        stats = report.agreement["CB"]
        assert stats["shared"] == 40
        assert stats["agreed"] == 32
        assert stats["percent"] == pytest.approx(80.0)

    def test_unranked_annotation_warns(self):
        ranked = self.make_ranked()
        annotations = {"cb:nowhere:0": {"ann1": ErrorCategory.QUD}}
        with pytest.warns(UserWarning, match="not in the ranked list"):
            report = error_category_report(ranked, annotations)
        assert report.per_dataset == {}

    def test_disagreement_resolved_deterministically(self):
        ranked = self.make_ranked(n_cb=1, n_rp=0)
        item_id = ranked[0].record.id
        annotations = {
            item_id: {
                "b_ann": ErrorCategory.QUD,
                "a_ann": ErrorCategory.TENSE_ASPECT,
            }
        }
        report = error_category_report(ranked, annotations)
        assert report.per_dataset["CB"]["tense_aspect"]["count"] == 1  # "a_ann" sorts first

    def test_read_annotation_file(self, tmp_path):
        path = tmp_path / "cats.tsv"
        path.write_text("x:0\tqud\tann1\nx:0\tlexical_inference\tann2\n")
        got = read_error_annotations(path)
        assert got["x:0"]["ann1"] is ErrorCategory.QUD
        path.write_text("x:0\tbanana\tann1\n")
        with pytest.raises(FormatError, match="category"):
            read_error_annotations(path)

    def test_vocabulary_is_eightfold(self):
        assert len(ErrorCategory) == 8
