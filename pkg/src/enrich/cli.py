"""Command-line entry point: simulate, enrich, baseline, label, evaluate, compare.

Exit codes: 0 success, 2 usage error, 1 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import InputError
from .evaluation import (LabelledTestSet, build_labelled_testset, summarize, sweep,
                         write_combinations_csv)
from .loop import RunParams, RunRecord, run_baseline, run_enrich
from .quality import QualityConstants, class_mos
from .robustness import (RobustnessParams, interpret, label_by_perturbation,
                         robustness_measure)
from .shaper import ShaperConfig, simulate
from .stats import mae, mann_whitney_u

log = logging.getLogger("enrich")

DEFAULT_EPSILONS = [0.05, 0.25, 0.30, 0.35, 0.40]


class UsageError(Exception):
    pass


@dataclass
class ExperimentSpec:
    config: ShaperConfig
    quality: QualityConstants
    robustness: RobustnessParams
    run: RunParams
    testset_size: int = 200
    testset_seed: int = 0
    epsilons: list = field(default_factory=lambda: list(DEFAULT_EPSILONS))
    runs: int = 15
    combo_samples: int = 20
    eval_seed: int = 0
    output_dir: Optional[Path] = None

    @classmethod
    def load(cls, path) -> "ExperimentSpec":
        path = Path(path)
        d = json.loads(path.read_text())
        cfg = d.get("config")
        if isinstance(cfg, str):
            config = ShaperConfig.load(path.parent / cfg)
        else:
            config = ShaperConfig.from_dict(cfg or {})
        run = dict(d.get("run") or {})
        if "seed" not in run:
            raise InputError("experiment spec must set run.seed")
        ev = dict(d.get("evaluation") or {})
        for key in ("testset_seed", "seed"):
            if key not in ev:
                raise InputError(f"experiment spec must set evaluation.{key}")
        rob = RobustnessParams.from_dict(d.get("robustness") or {})
        if "rb_threshold" not in (d.get("robustness") or {}) and "rb_threshold" in run:
            rob = RobustnessParams(rob.mos_thresholds, run["rb_threshold"],
                                   rob.perturbation)
        run.setdefault("rb_threshold", rob.rb_threshold)
        out = d.get("output_dir")
        spec = cls(config=config,
                   quality=QualityConstants.from_dict(d.get("quality") or {}),
                   robustness=rob,
                   run=RunParams.from_dict(run),
                   testset_size=ev.get("testset_size", 200),
                   testset_seed=ev["testset_seed"],
                   epsilons=list(ev.get("epsilons", DEFAULT_EPSILONS)),
                   runs=ev.get("runs", 15),
                   combo_samples=ev.get("combo_samples", 20),
                   eval_seed=ev["seed"],
                   output_dir=None if out is None else path.parent / out)
        spec.validate()
        return spec

    def validate(self) -> None:
        self.robustness.validate(self.config.n)
        self.run.validate(self.config)
        if self.runs < 1:
            raise InputError("runs must be >= 1")
        for e in self.epsilons:
            if not 0 < e < 1:
                raise InputError(f"epsilon {e} outside (0, 1)")


def _parse_vector(text: str, n: int) -> np.ndarray:
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"malformed input vector {text!r}")
    if len(values) != n:
        raise UsageError(f"input vector has {len(values)} values, expected {n}")
    return np.asarray(values)


def _parse_epsilons(text: str) -> list:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"malformed epsilon list {text!r}")
    if not values:
        raise UsageError("empty epsilon list")
    for v in values:
        if not 0 < v < 1:
            raise UsageError(f"epsilon {v} outside (0, 1)")
    return values


def _load_config(args) -> ShaperConfig:
    return ShaperConfig.load(args.config) if args.config else ShaperConfig()


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def cmd_simulate(args) -> int:
    config = _load_config(args)
    tr = _parse_vector(args.input, config.n)
    constants = QualityConstants()
    params = RobustnessParams()
    try:
        metrics = simulate(config, tr, seed=args.seed)
    except InputError as exc:
        raise UsageError(str(exc))
    mos = class_mos(metrics, constants)
    score = robustness_measure(mos, params)
    verdict = interpret(score, config.n, params.rb_threshold)
    out = {"input": [float(v) for v in tr], **metrics.to_dict(),
           "mos": [float(m) for m in mos], "score": score,
           "good_class_count": verdict.good_class_count,
           "acceptable": verdict.acceptable}
    print(_dump(out))
    return 0


def _spec_from_args(args) -> ExperimentSpec:
    if args.spec:
        spec = ExperimentSpec.load(args.spec)
    else:
        config = _load_config(args)
        spec = ExperimentSpec(config, QualityConstants(), RobustnessParams(),
                              RunParams(seed=0))
    if getattr(args, "config", None) and args.spec:
        spec.config = ShaperConfig.load(args.config)
    if getattr(args, "seed", None) is not None:
        spec.run = RunParams.from_dict({**spec.run.to_dict(), "seed": args.seed})
    return spec


def _out_dir(args, spec: ExperimentSpec) -> Path:
    out = Path(args.out) if args.out else spec.output_dir
    if out is None:
        raise UsageError("no output directory (use --out)")
    return out


def _run_many(args, method: str) -> int:
    spec = _spec_from_args(args)
    out = _out_dir(args, spec)
    runner = run_enrich if method == "enrich" else run_baseline
    seeds = [spec.run.seed + i for i in range(args.runs)]
    targets = []
    for s in seeds:
        targets += [out / f"run_{s}.json", out / f"tests_{s}.csv"]
    clash = [p for p in targets if p.exists()]
    if clash and not args.force:
        log.error("refusing to overwrite %s (use --force)", clash[0])
        return 1
    out.mkdir(parents=True, exist_ok=True)
    for s in seeds:
        params = RunParams.from_dict({**spec.run.to_dict(), "seed": s})
        record = runner(spec.config, spec.quality, params, spec.robustness)
        record.save(out / f"run_{s}.json")
        record.write_tests_csv(out / f"tests_{s}.csv")
        log.info("%s seed %d: %d simulations, anchored %s", method, s,
                 record.simulator_calls,
                 [i + 1 for i in record.final_ranges.constrained])
    return 0


def cmd_enrich(args) -> int:
    return _run_many(args, "enrich")


def cmd_baseline(args) -> int:
    return _run_many(args, "baseline")


def cmd_label(args) -> int:
    spec = _spec_from_args(args)
    seed = args.seed if args.seed is not None else spec.testset_seed
    if args.input:
        tr = _parse_vector(args.input, spec.config.n)
        label = label_by_perturbation(spec.config, tr, spec.quality,
                                      spec.robustness, seed)
        print(_dump({"input": [float(v) for v in tr], "label": label.value}))
        return 0
    size = args.size or spec.testset_size
    ts = build_labelled_testset(spec.config, spec.quality, spec.robustness,
                                size, seed)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        ts.write_csv(args.out)
    else:
        ts.dump(sys.stdout)
    return 0


def cmd_evaluate(args) -> int:
    spec = _spec_from_args(args)
    out = _out_dir(args, spec)
    epsilons = _parse_epsilons(args.epsilon) if args.epsilon is not None \
        else spec.epsilons
    if not epsilons:
        raise UsageError("empty epsilon list")
    if not args.run_files:
        log.error("no run files given")
        return 1
    records = {}
    for p in args.run_files:
        rec = RunRecord.load(p)
        records.setdefault(rec.method, []).append(rec)
    out.mkdir(parents=True, exist_ok=True)

    cache = out / f"testset_{spec.testset_seed}_{spec.testset_size}.csv"
    if cache.exists():
        testset = LabelledTestSet.read_csv(cache, spec.testset_seed)
    else:
        testset = build_labelled_testset(spec.config, spec.quality, spec.robustness,
                                         spec.testset_size, spec.testset_seed)
        testset.write_csv(cache)

    combo_rows, summary_rows = [], []
    for method in sorted(records):
        recs = sorted(records[method], key=lambda r: r.seed)
        recs = recs[:args.runs or spec.runs]
        rangesets = [r.final_ranges for r in recs]
        for eps in epsilons:
            results = sweep(rangesets, testset, eps, spec.combo_samples,
                            spec.eval_seed)
            for k, res in results.items():
                for r in res:
                    combo_rows.append({"method": method, "epsilon": eps,
                                       "n_runs": k, "combo_id": r.combo_id,
                                       **r.report.as_row()})
                for metric, stats in summarize(res).items():
                    summary_rows.append({"method": method, "epsilon": eps,
                                         "n_runs": k, "metric": metric, **stats})
    write_combinations_csv(out / "combinations.csv", combo_rows)
    with open(out / "summary.csv", "w", newline="") as fh:
        cols = ["method", "epsilon", "n_runs", "metric", "mean", "q1", "median", "q3"]
        w = csv.DictWriter(fh, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for row in summary_rows:
            w.writerow({k: repr(v) if isinstance(v, float) else v
                        for k, v in row.items()})
    return 0


def read_scores(path) -> list:
    """Scores from a CSV with a ``score`` column or one number per line."""
    text = Path(path).read_text().splitlines()
    lines = [l for l in text if l.strip()]
    if not lines:
        raise UsageError(f"{path}: no scores")
    if "score" in [c.strip() for c in lines[0].split(",")]:
        rows = csv.DictReader(lines)
        try:
            return [float(r["score"]) for r in rows]
        except (TypeError, ValueError):
            raise UsageError(f"{path}: malformed score column")
    try:
        return [float(l) for l in lines]
    except ValueError:
        raise UsageError(f"{path}: malformed score file")


def cmd_compare(args) -> int:
    a, b = read_scores(args.file_a), read_scores(args.file_b)
    if args.mae and len(a) != len(b):
        raise UsageError("samples differ in length; MAE needs paired scores")
    test = mann_whitney_u(a, b)
    out = {"p_value": test.p_value, "u": test.u, "method": test.method,
           "mae": mae(a, b) if len(a) == len(b) else None,
           "mean_a": float(np.mean(a)), "sd_a": float(np.std(a, ddof=1)),
           "mean_b": float(np.mean(b)), "sd_b": float(np.std(b, ddof=1))}
    print(_dump(out))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="enrich", description="Non-robustness analysis for traffic shaping")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="evaluate one input vector")
    p.add_argument("--config")
    p.add_argument("--input", required=True, help="comma-separated tr_1..tr_n")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_simulate)

    for name, func in (("enrich", cmd_enrich), ("baseline", cmd_baseline)):
        p = sub.add_parser(name, help=f"run {name.upper()} and write run files")
        p.add_argument("--spec")
        p.add_argument("--config")
        p.add_argument("--seed", type=int)
        p.add_argument("--runs", type=int, default=1,
                       help="number of consecutive seeds to run")
        p.add_argument("--out")
        p.add_argument("--force", action="store_true")
        p.set_defaults(func=func)

    p = sub.add_parser("label", help="label inputs with the perturbation oracle")
    p.add_argument("--spec")
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--input")
    p.add_argument("--size", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("evaluate", help="score run files against a labelled set")
    p.add_argument("run_files", nargs="*")
    p.add_argument("--spec")
    p.add_argument("--config")
    p.add_argument("--epsilon", help="comma-separated epsilon fractions")
    p.add_argument("--runs", type=int, help="use only the first N runs per method")
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate, seed=None)

    p = sub.add_parser("compare", help="Mann-Whitney U and MAE of two score files")
    p.add_argument("file_a")
    p.add_argument("file_b")
    p.add_argument("--mae", action="store_true",
                   help="require paired samples of equal length")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (UsageError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
