"""Command-line pipeline: ingest, split, predict, evaluate, analyze.

Every subcommand is a pure function of its inputs and flags; directory
outputs get a manifest recording the resolved options and input digests so
reruns are verifiable. Exit codes: 0 success, 1 completed with warnings,
2 usage or precondition failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import warnings
from pathlib import Path

from . import analysis as an
from .core import Dataset, FactualityError, Split, read_records, write_records
from .harmonize import (
    SplitSpec,
    load_cb,
    load_megaveridicality,
    load_rp,
    load_unified,
    read_conllu,
    resolve_event_span,
    stratified_split,
)
from .oracle import SCHEMAS, ExpectedInferenceOracle, ingest_rule_predictions
from .signatures import SignaturePredictor

CONFIG_ENV_VAR = "FACTUALITY_CONFIG"


def parse_config_text(text: str, where: str = "<config>") -> dict[str, str]:
    """Parse the key-value tree config format: ``section.key = value`` lines."""
    values: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise FactualityError(f"{where}:{lineno}: expected `key = value`")
        key, _, value = stripped.partition("=")
        values[key.strip()] = value.strip()
    return values


def load_config(path: str | None) -> dict[str, str]:
    resolved = path or os.environ.get(CONFIG_ENV_VAR)
    if not resolved:
        return {}
    return parse_config_text(Path(resolved).read_text(encoding="utf-8"), resolved)


class Run:
    """Option resolution (flag > config > default) plus output bookkeeping."""

    def __init__(self, command: str, args: argparse.Namespace):
        self.command = command
        self.args = args
        self.config = load_config(getattr(args, "config", None))
        self.options: dict = {}
        self.inputs: list[Path] = []
        self.outputs: list[str] = []

    def opt(self, name: str, default=None, cast=None):
        value = getattr(self.args, name.replace("-", "_"), None)
        if value is None:
            raw = self.config.get(f"{self.command}.{name}", self.config.get(name))
            if raw is not None:
                value = raw
        if value is None:
            value = default
        if value is not None and cast is not None and isinstance(value, str):
            value = cast(value)
        self.options[name] = str(value) if isinstance(value, Path) else value
        return value

    def input_file(self, path: str | Path) -> Path:
        p = Path(path)
        if not p.is_file():
            raise FactualityError(f"input file not found: {p}")
        self.inputs.append(p)
        return p

    def write_manifest(self, out_dir: Path, warning_messages: list[str]) -> None:
        options = {k: v for k, v in sorted(self.options.items())}
        manifest = {
            "command": self.command,
            "options": options,
            "config_digest": hashlib.sha256(
                json.dumps(options, sort_keys=True, default=str).encode()
            ).hexdigest(),
            "inputs": {str(p): _sha256(p) for p in self.inputs},
            "outputs": sorted(self.outputs),
            "warnings": warning_messages,
        }
        _write_json(out_dir / "manifest.json", manifest)


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(obj, indent=2, sort_keys=False) + "\n", encoding="utf-8")
    os.replace(tmp, path)


def _out_dir(run: Run) -> Path:
    out = Path(run.opt("out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_records_atomic(path: Path, records) -> None:
    tmp = path.with_name(path.name + ".tmp")
    try:
        write_records(tmp, records)
        os.replace(tmp, path)
    finally:
        tmp.unlink(missing_ok=True)


def _as_path_list(value) -> list[str]:
    if isinstance(value, str):
        return [p for p in value.split(",") if p]
    return list(value)


def _read_pred_sets(run: Run, paths) -> list[an.PredictionSet]:
    return [an.read_predictions(run.input_file(p)) for p in _as_path_list(paths)]


def _read_expected(run: Run, paths: list[str], items) -> dict[str, float]:
    """Merge expected-inference files: oracle JSONL or rule-prediction TSV."""
    merged: dict[str, float] = {}
    for path in paths:
        p = run.input_file(path)
        if p.suffix in (".jsonl", ".json"):
            scores: dict[str, float] = {}
            with open(p, encoding="utf-8") as fh:
                for lineno, line in enumerate(fh, start=1):
                    if not line.strip():
                        continue
                    row = json.loads(line)
                    if "id" not in row or "score" not in row:
                        raise FactualityError(f"{p}:{lineno}: expected id/score fields")
                    scores[row["id"]] = float(row["score"])
        else:
            scores = ingest_rule_predictions(p, items)
        overlap = merged.keys() & scores.keys()
        if overlap:
            raise FactualityError(
                f"{p}: {len(overlap)} ids already covered by another expected-inference file"
            )
        merged.update(scores)
    return merged


# ---------------------------------------------------------------- commands


def cmd_ingest(run: Run) -> None:
    dataset = Dataset.parse(run.opt("dataset"))
    input_path = run.input_file(run.opt("input"))
    out_path = Path(run.opt("out"))
    split_text = run.opt("split")
    if split_text is not None and dataset not in (
        Dataset.FACTBANK,
        Dataset.MEANTIME,
        Dataset.UW,
        Dataset.UDSIH2,
    ):
        raise FactualityError("--split only tags pre-split unified corpora; use the split command")
    split = Split(split_text) if split_text is not None else Split.UNASSIGNED

    reports = []
    decisions = []
    if dataset is Dataset.MV:
        records = load_megaveridicality(input_path)
    elif dataset is Dataset.RP:
        exclusions = run.opt("exclusions")
        if exclusions is not None:
            exclusions = run.input_file(exclusions)
        records, reports = load_rp(input_path, exclude_ids=exclusions)
    elif dataset is Dataset.CB:
        records, reports = load_cb(input_path)
    else:
        records = load_unified(input_path, dataset, split=split)

    parses_path = run.opt("parses")
    if parses_path is not None:
        if dataset not in (Dataset.CB, Dataset.RP):
            raise FactualityError("--parses only applies to the cb and rp datasets")
        parses = read_conllu(run.input_file(parses_path))
        by_id = {p.sent_id: p for p in parses if p.sent_id is not None}
        if len(by_id) == len(parses) and parses:
            resolved = []
            for record in records:
                parse = by_id.get(record.id)
                if parse is None:
                    raise FactualityError(f"no parse with sent_id {record.id!r}")
                record, decision = resolve_event_span(record, parse)
                resolved.append(record)
                decisions.append(decision)
            records = resolved
        else:
            if len(parses) != len(records):
                raise FactualityError(
                    f"{len(parses)} parses for {len(records)} records; "
                    "provide sent_id comments matching record ids or one parse per kept record"
                )
            resolved = []
            for record, parse in zip(records, parses):
                record, decision = resolve_event_span(record, parse)
                resolved.append(record)
                decisions.append(decision)
            records = resolved

    _write_records_atomic(out_path, records)
    report = {
        "dataset": dataset.value,
        "records": len(records),
        "filters": [r.to_dict() for r in reports],
        "span_decisions": [d.to_dict() for d in decisions],
    }
    _write_json(out_path.with_name(out_path.name + ".report.json"), report)
    print(f"wrote {len(records)} records to {out_path}")


def cmd_split(run: Run) -> None:
    input_path = run.input_file(run.opt("in"))
    out_path = Path(run.opt("out"))
    ratios = run.opt("ratios", cast=lambda s: tuple(float(x) for x in s.split(",")))
    seed = run.opt("seed", cast=int)
    if ratios is None or seed is None:
        raise FactualityError("split needs --ratios and --seed (via flag or config)")
    stratify = run.opt("stratify", "verb")
    if stratify in ("none", "None"):
        stratify = None

    records = read_records(input_path)
    spec = SplitSpec(ratios=tuple(ratios), seed=int(seed), stratify=stratify)
    assigned = stratified_split(records, spec)
    _write_records_atomic(out_path, assigned)
    sizes = {s.value: sum(1 for r in assigned if r.split is s) for s in Split}
    print(f"wrote {out_path}: " + ", ".join(f"{k}={v}" for k, v in sizes.items() if v))


def cmd_sig_predict(run: Run) -> None:
    items = read_records(run.input_file(run.opt("in")))
    out = _out_dir(run)
    lexicon = run.opt("lexicon")
    if lexicon is not None:
        lexicon = run.input_file(lexicon)
    predictor = SignaturePredictor(lexicon=lexicon, policy=run.opt("policy", "uniform")).fit()
    detail = predictor.predict_detail(items)

    with open(out / "predictions.tsv", "w", encoding="utf-8") as fh:
        for record, pred in zip(items, detail):
            if pred is not None:
                fh.write(f"{record.id}\t{pred.score}\n")
    with open(out / "detail.jsonl", "w", encoding="utf-8") as fh:
        for record, pred in zip(items, detail):
            row = {"id": record.id, "covered": pred is not None}
            if pred is not None:
                row["score"] = pred.score
                row["category"] = pred.category.symbol
            fh.write(json.dumps(row) + "\n")
    run.outputs += ["predictions.tsv", "detail.jsonl"]
    covered = sum(p is not None for p in detail)
    _write_json(
        out / "coverage.json",
        {"items": len(items), "covered": covered, "no_signature": len(items) - covered},
    )
    run.outputs.append("coverage.json")
    print(f"signature predictions for {covered}/{len(items)} items in {out}")


def cmd_oracle(run: Run) -> None:
    train = read_records(run.input_file(run.opt("train")))
    test = read_records(run.input_file(run.opt("test")))
    out = _out_dir(run)
    schema = run.opt("schema", "auto")
    if schema == "auto":
        datasets = {r.dataset for r in train} | {r.dataset for r in test}
        schema = "verb_environment" if datasets == {Dataset.CB} else "verb_polarity_frame"
    elif schema not in SCHEMAS:
        raise FactualityError(f"unknown schema {schema!r}; expected one of {sorted(SCHEMAS)}")

    oracle = ExpectedInferenceOracle(schema=schema).fit(train)
    detail = oracle.predict_detail(test)
    no_match = [r.id for r, e in zip(test, detail) if e is None]
    with open(out / "expected.jsonl", "w", encoding="utf-8") as fh:
        for record, exp in zip(test, detail):
            if exp is not None:
                fh.write(
                    json.dumps(
                        {
                            "id": record.id,
                            "score": exp.score,
                            "tier": exp.tier,
                            "support": exp.support,
                        }
                    )
                    + "\n"
                )
    _write_json(out / "no_match.json", {"count": len(no_match), "ids": no_match})
    run.outputs += ["expected.jsonl", "no_match.json"]
    print(f"expected inference for {len(test) - len(no_match)}/{len(test)} items in {out}")


def cmd_eval(run: Run) -> None:
    items = read_records(run.input_file(run.opt("items")))
    sets = _read_pred_sets(run, run.opt("preds"))
    out = _out_dir(run)
    report = an.evaluate(items, sets)
    _write_json(out / "report.json", report.to_dict())
    (out / "report.txt").write_text(report.to_text() + "\n", encoding="utf-8")
    run.outputs += ["report.json", "report.txt"]
    print(report.to_text())


def cmd_analyze(run: Run) -> None:
    what = run.args.what
    items = read_records(run.input_file(run.opt("items")))
    sets = _read_pred_sets(run, run.opt("preds"))
    out = _out_dir(run)

    if what == "expected":
        expected_paths = run.opt("expected")
        if not expected_paths:
            raise FactualityError("analyze expected needs --expected (oracle output or rule TSV)")
        expected = _read_expected(run, _as_path_list(expected_paths), items)
        study = an.expected_inference_study(items, sets, expected)
        _write_json(out / "study.json", study.to_dict())
        with open(out / "rows.tsv", "w", encoding="utf-8") as fh:
            fh.write("id\tdataset\texpected_error\tprediction_error\n")
            for row in study.rows:
                fh.write(
                    f"{row.item_id}\t{row.dataset}\t{row.expected_error}\t{row.prediction_error}\n"
                )
        run.outputs += ["study.json", "rows.tsv"]
        for name, cell in study.per_dataset.items():
            print(f"{name:<18} alpha={cell['alpha']:+.3f} beta={cell['beta']:+.3f} n={cell['n']}")
        print(f"all slopes positive: {study.all_slopes_positive}")

    elif what == "errors":
        frac = float(run.opt("top-frac", 0.1, cast=float))
        ranked = an.rank_errors(items, sets, frac=frac)
        with open(out / "errors.tsv", "w", encoding="utf-8") as fh:
            fh.write("id\tgold\tprediction\tabs_error\tsentence\n")
            for entry in ranked:
                fh.write(
                    f"{entry.record.id}\t{entry.record.gold}\t{entry.prediction}"
                    f"\t{entry.abs_error}\t{entry.record.sentence}\n"
                )
        run.outputs.append("errors.tsv")
        print(f"{len(ranked)} items (top {frac:.0%}) written to {out / 'errors.tsv'}")

    elif what == "dispersion":
        keys = tuple(run.opt("keys", "verb,frame,polarity").split(","))
        report = an.group_dispersion(items, sets, keys=keys, ddof=int(run.opt("ddof", 1, cast=int)))
        _write_json(out / "dispersion.json", report.to_dict())
        run.outputs.append("dispersion.json")
        print(
            f"mean prediction variance {report.mean_prediction_variance:.3f}, "
            f"mean gold variance {report.mean_gold_variance:.3f} over {report.n_groups} groups"
        )

    elif what == "scatter":
        facet = run.opt("facet", "environment")
        facet_key = tuple(facet.split(",")) if "," in facet else facet
        table = an.scatter_export(items, sets, facet=facet_key)
        table.write_csv(out / "scatter.csv")
        _write_json(
            out / "scatter.json",
            {"rows": len(table.rows), "facet": facet, "diagonal": table.diagonal},
        )
        run.outputs += ["scatter.csv", "scatter.json"]
        print(f"{len(table.rows)} scatter rows in {out / 'scatter.csv'}")

    elif what == "categories":
        annotations_path = run.opt("annotations")
        if annotations_path is None:
            raise FactualityError("analyze categories needs --annotations")
        frac = float(run.opt("top-frac", 0.1, cast=float))
        ranked = an.rank_errors(items, sets, frac=frac)
        annotations = an.read_error_annotations(run.input_file(annotations_path))
        report = an.error_category_report(ranked, annotations)
        _write_json(out / "categories.json", report.to_dict())
        (out / "categories.txt").write_text(report.to_text() + "\n", encoding="utf-8")
        run.outputs += ["categories.json", "categories.txt"]
        print(report.to_text())

    else:  # pragma: no cover - argparse restricts choices
        raise FactualityError(f"unknown analysis {what!r}")


# ---------------------------------------------------------------- wiring


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="factuality",
        description="Harmonize event-factuality corpora and analyze model predictions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help=f"config file (default: ${CONFIG_ENV_VAR})")

    p = sub.add_parser("ingest", help="load a corpus into unified JSON Lines")
    p.add_argument("--dataset", required=True, help="mv, cb, rp, factbank, meantime, uw, uds-ih2")
    p.add_argument("--input", required=True)
    p.add_argument("--parses", help="CoNLL-U parses for cb/rp span resolution")
    p.add_argument("--exclusions", help="id list of single-span exclusions (rp)")
    p.add_argument("--split", help="split tag for pre-split unified corpora")
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("split", help="assign stratified train/dev/test splits")
    p.add_argument("--in", dest="in_", required=True)
    p.add_argument("--ratios", help="train,dev,test ratios, e.g. 0.44,0.12,0.44")
    p.add_argument("--seed")
    p.add_argument("--stratify", help="verb (default) or none")
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("sig-predict", help="predict from verb-frame signatures")
    p.add_argument("--in", dest="in_", required=True)
    p.add_argument("--lexicon")
    p.add_argument("--policy", choices=["uniform", "negation-only"])
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=cmd_sig_predict)

    p = sub.add_parser("oracle", help="expected inference from feature-matched training means")
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--schema", help="auto (default), verb_polarity_frame, or verb_environment")
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("eval", help="MAE / Pearson r per dataset")
    p.add_argument("--items", required=True)
    p.add_argument("--preds", nargs="+", required=True)
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("analyze", help="error analyses over predictions")
    p.add_argument("what", choices=["expected", "errors", "dispersion", "scatter", "categories"])
    p.add_argument("--items", required=True)
    p.add_argument("--preds", nargs="+", required=True)
    p.add_argument("--expected", nargs="+", help="expected-inference files (analyze expected)")
    p.add_argument("--annotations", help="error-category TSV (analyze categories)")
    p.add_argument("--top-frac", dest="top_frac")
    p.add_argument("--keys", help="dispersion grouping features")
    p.add_argument("--ddof")
    p.add_argument("--facet", help="scatter facet feature")
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=cmd_analyze)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    # `--in` lands on args.in_; expose it under the option name used by Run.opt
    if hasattr(args, "in_"):
        args.__dict__["in"] = args.in_
    run = Run(args.command, args)
    out_dir = getattr(args, "out", None)

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            args.func(run)
        except (FactualityError, ValueError, OSError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            if out_dir and Path(out_dir).is_dir() and run.command not in ("ingest", "split"):
                _write_json(Path(out_dir) / "FAILED.json", {"error": str(exc)})
            return 2
        messages = [str(w.message) for w in caught]
        if out_dir and Path(out_dir).is_dir() and run.command not in ("ingest", "split"):
            run.write_manifest(Path(out_dir), messages)
    for message in messages:
        print(f"warning: {message}", file=sys.stderr)
    return 1 if messages else 0


if __name__ == "__main__":
    sys.exit(main())
