"""Benchmark command line: run / detect / generate.

Experiments are described by a TOML manifest (streams x learners x seeds)
with flag overrides; all randomness flows from the manifest seeds, so a
rerun of the same manifest produces byte-identical CSV output (pass
--no-timing to zero the wall-clock column, which is otherwise the only
nondeterministic field).

Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import sys

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .core import SeededRng
from .evaluation import (
    DEFAULT_CADENCE,
    DEFAULT_TOLERANCE,
    RESULT_COLUMNS,
    NaiveBayesModel,
    detector_carrier_run,
    detector_confusion,
    prequential_run,
)
from .generators import make_stream
from .kswin import KswinConfig, KswinDetector
from .reactive import RrslvqModel
from .rslvq import RslvqConfig, RslvqModel

CONFUSION_COLUMNS = ["config_id", "stream", "detector", "seed", "steps",
                     "tn", "fp", "fn", "tp", "tolerance"]


class ConfigError(Exception):
    pass


def _derived_seeds(seed: int, n: int) -> list[int]:
    """Independent integer seeds derived from one manifest seed."""
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(n)]


class _ColdStartNB:
    """Naive Bayes that answers class 0 until it has seen a sample."""

    def __init__(self, meta):
        self.nb = NaiveBayesModel(meta)
        self.warm = False

    def predict(self, x):
        return self.nb.predict(x) if self.warm else 0

    def learn_one(self, s):
        self.nb.learn_one(s)
        self.warm = True

    def footprint(self):
        return self.nb.footprint()


def make_learner(spec: dict, meta, seed: int):
    """Build a learner from a manifest entry; kinds: rslvq, rrslvq, naive_bayes."""
    kind = spec.get("kind", "rrslvq")
    if kind == "naive_bayes":
        return _ColdStartNB(meta)
    cfg = RslvqConfig(
        prototypes_per_class=spec.get("prototypes_per_class", 1),
        sigma=spec.get("sigma", 1.0),
        gamma=spec.get("gamma", 0.9),
        epsilon=spec.get("epsilon", 1e-8),
    )
    if kind == "rslvq":
        # Same child key as the reactive model's classifier, so both start
        # from identical prototypes under a shared seed.
        return RslvqModel(meta, cfg, SeededRng(seed).child(0))
    if kind == "rrslvq":
        kswin = KswinConfig(n=spec.get("window", 300), r=spec.get("stat_size", 30),
                            alpha=spec.get("alpha", 0.0001))
        return RrslvqModel(meta, cfg, kswin, seed=seed)
    raise ConfigError(f"unknown learner kind {kind!r}")


def _learner_id(spec: dict) -> str:
    return spec.get("name", spec.get("kind", "rrslvq"))


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(float(v))
    return "" if v is None else str(v)


def _run_task(task: dict) -> dict:
    """Worker for one (stream, learner, seed) cell; returns rows + audit events."""
    stream_spec, learner_spec, seed = task["stream"], task["learner"], task["seed"]
    stream_seed, learner_seed = _derived_seeds(seed, 2)
    stream = make_stream(stream_spec, stream_seed)
    learner = make_learner(learner_spec, stream.meta, learner_seed)
    records = prequential_run(stream, learner, task["max_t"], cadence=task["cadence"])
    config_id = task["config_id"]
    rows = []
    for i, rec in enumerate(records):
        for kind in (["snapshot"] if i < len(records) - 1 else ["snapshot", "summary"]):
            rows.append({
                "config_id": config_id,
                "stream": stream_spec.get("name", stream_spec.get("generator", "?")),
                "learner": _learner_id(learner_spec),
                "seed": seed,
                "row": kind,
                "t": rec.t,
                "accuracy": rec.accuracy,
                "kappa": rec.kappa,
                "windowed_accuracy": rec.windowed_accuracy,
                "footprint": rec.footprint,
                "wall_ms": 0.0 if task["no_timing"] else rec.wall_ms,
                "tn": None, "fp": None, "fn": None, "tp": None,
            })
    audit = []
    if isinstance(learner, RrslvqModel):
        for event in learner.adaptation_log:
            audit.append({
                "config_id": config_id,
                "t": event.t,
                "exceeded_dims": ";".join(str(d) for d in sorted(event.exceeded_dims)),
                "max_statistic": event.max_statistic,
            })
    return {"rows": rows, "audit": audit}


def _load_config(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: {e}")


def _common_overrides(cfg: dict, args) -> dict:
    if args.seed is not None:
        cfg["seeds"] = [args.seed]
    if args.max_t is not None:
        cfg["max_t"] = args.max_t
    if args.snapshot_every is not None:
        cfg["snapshot_every"] = args.snapshot_every
    if args.out is not None:
        cfg["out"] = args.out
    if not cfg.get("seeds"):
        raise ConfigError("no seeds configured (set seeds = [...] or pass --seed)")
    if cfg.get("max_t", 0) < 1:
        raise ConfigError("max_t must be >= 1")
    if "out" not in cfg:
        raise ConfigError("no output path (set out = \"...\" or pass --out)")
    return cfg


def _write_csv(path, columns, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row.get(c)) for c in columns])


def cmd_run(args) -> int:
    cfg = _common_overrides(_load_config(args.config), args)
    streams = cfg.get("streams")
    learners = cfg.get("learners")
    if not streams or not learners:
        raise ConfigError("manifest needs at least one [[streams]] and one [[learners]] entry")
    cadence = cfg.get("snapshot_every", DEFAULT_CADENCE)
    tasks = []
    for s_spec in streams:
        for l_spec in learners:
            for seed in cfg["seeds"]:
                config_id = f"{s_spec.get('name', s_spec.get('generator'))}__{_learner_id(l_spec)}__s{seed}"
                tasks.append({
                    "stream": s_spec, "learner": l_spec, "seed": seed,
                    "max_t": cfg["max_t"], "cadence": cadence,
                    "config_id": config_id, "no_timing": args.no_timing,
                })
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_task, tasks))
    else:
        results = [_run_task(t) for t in tasks]
    rows = [r for res in results for r in res["rows"]]
    rows.sort(key=lambda r: (r["config_id"], r["t"], r["row"]))
    _write_csv(cfg["out"], RESULT_COLUMNS, rows)
    if args.audit_log:
        audit = [a for res in results for a in res["audit"]]
        audit.sort(key=lambda a: (a["config_id"], a["t"]))
        _write_csv(args.audit_log, ["config_id", "t", "exceeded_dims", "max_statistic"], audit)
    if args.figures:
        from .report import render_accuracy_figures
        render_accuracy_figures(cfg["out"])
    return 0


def cmd_detect(args) -> int:
    cfg = _common_overrides(_load_config(args.config), args)
    streams = cfg.get("streams")
    if not streams:
        raise ConfigError("manifest needs at least one [[streams]] entry")
    det_cfg = cfg.get("detector", {})
    kswin = KswinConfig(n=det_cfg.get("window", 300), r=det_cfg.get("stat_size", 30),
                        alpha=det_cfg.get("alpha", 0.0001))
    batch_size = det_cfg.get("batch_size", 10)
    tolerance = args.tolerance if args.tolerance is not None else det_cfg.get(
        "tolerance", DEFAULT_TOLERANCE)
    cadence = cfg.get("snapshot_every", DEFAULT_CADENCE)
    confusion_rows, carrier_rows = [], []
    for s_spec in streams:
        for seed in cfg["seeds"]:
            stream_seed, det_seed = _derived_seeds(seed, 2)
            stream = make_stream(s_spec, stream_seed)
            if not stream.has_drift_truth:
                raise ConfigError(
                    f"stream {s_spec.get('name', s_spec.get('generator'))!r} "
                    "has no ground-truth drift marks"
                )
            detector = KswinDetector(stream.meta.d, kswin, seed=det_seed)
            signals, truths = [], []
            config_id = f"{s_spec.get('name', s_spec.get('generator'))}__kswin__s{seed}"
            records = detector_carrier_run(
                stream, detector, cfg["max_t"], batch_size=batch_size,
                cadence=cadence, signal_log=signals, truth_log=truths)
            rec = detector_confusion(signals, truths, tolerance=tolerance)
            confusion_rows.append({
                "config_id": config_id,
                "stream": s_spec.get("name", s_spec.get("generator")),
                "detector": "kswin", "seed": seed, "steps": rec.total,
                "tn": rec.tn, "fp": rec.fp, "fn": rec.fn, "tp": rec.tp,
                "tolerance": tolerance,
            })
            for i, r in enumerate(records):
                for kind in (["snapshot"] if i < len(records) - 1 else ["snapshot", "summary"]):
                    carrier_rows.append({
                        "config_id": config_id,
                        "stream": s_spec.get("name", s_spec.get("generator")),
                        "learner": "naive_bayes+kswin", "seed": seed, "row": kind,
                        "t": r.t, "accuracy": r.accuracy, "kappa": r.kappa,
                        "windowed_accuracy": r.windowed_accuracy,
                        "footprint": r.footprint,
                        "wall_ms": 0.0 if args.no_timing else r.wall_ms,
                        "tn": rec.tn, "fp": rec.fp, "fn": rec.fn, "tp": rec.tp,
                    })
    out = Path(cfg["out"])
    confusion_path = out.with_name(out.stem + "_confusion.csv")
    carrier_path = out.with_name(out.stem + "_carrier.csv")
    confusion_rows.sort(key=lambda r: r["config_id"])
    carrier_rows.sort(key=lambda r: (r["config_id"], r["t"], r["row"]))
    _write_csv(confusion_path, CONFUSION_COLUMNS, confusion_rows)
    _write_csv(carrier_path, RESULT_COLUMNS, carrier_rows)
    if args.figures:
        from .report import render_accuracy_figures, render_detector_figures
        render_detector_figures(confusion_path)
        render_accuracy_figures(carrier_path)
    return 0


def cmd_generate(args) -> int:
    cfg = _load_config(args.config) if args.config else {"streams": []}
    spec = None
    for s_spec in cfg.get("streams", []):
        if s_spec.get("name", s_spec.get("generator")) == args.stream:
            spec = s_spec
            break
    if spec is None:
        if args.stream in ("sea", "mixed", "rtg", "rbf", "hyper"):
            spec = {"generator": args.stream}
        else:
            raise ConfigError(f"stream {args.stream!r} not found in manifest")
    seed = args.seed if args.seed is not None else 0
    stream = make_stream(spec, seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = [f"f{i}" for i in range(stream.meta.d)] + ["label"]
        if args.with_truth:
            header.append("drift_truth")
        writer.writerow(header)
        for _ in range(args.k):
            item = stream.next_sample()
            if item is None:
                break
            s, mark = item
            row = [repr(float(v)) for v in s.x] + [str(s.y)]
            if args.with_truth:
                row.append("1" if mark else "0")
            writer.writerow(row)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="driftstream",
        description="Streaming benchmark harness for the reactive prototype classifier.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=False, help="TOML experiment manifest")
        p.add_argument("--seed", type=int, help="override: run only this seed")
        p.add_argument("--max-t", type=int, dest="max_t", help="override: samples per run")
        p.add_argument("--snapshot-every", type=int, dest="snapshot_every",
                       help="override: snapshot cadence")
        p.add_argument("--out", help="override: output CSV path")
        p.add_argument("--no-timing", action="store_true",
                       help="zero the wall_ms column for byte-stable output")
        p.add_argument("--figures", action="store_true",
                       help="render PNG figures next to the CSV output")

    p_run = sub.add_parser("run", help="prequential classifier benchmark")
    common(p_run)
    p_run.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p_run.add_argument("--audit-log", dest="audit_log",
                       help="CSV path for adaptation events of reactive learners")
    p_run.set_defaults(func=cmd_run)

    p_det = sub.add_parser("detect", help="detector benchmark (standalone + NB carrier)")
    common(p_det)
    p_det.add_argument("--tolerance", type=int,
                       help="drift-credit window in steps (0 = strict matching)")
    p_det.set_defaults(func=cmd_detect)

    p_gen = sub.add_parser("generate", help="materialize a stream to CSV")
    common(p_gen)
    p_gen.add_argument("--stream", required=True,
                       help="stream name from the manifest, or a bare generator name")
    p_gen.add_argument("--k", type=int, required=True, help="number of samples")
    p_gen.add_argument("--with-truth", action="store_true", dest="with_truth",
                       help="append the drift_truth column")
    p_gen.set_defaults(func=cmd_generate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command in ("run", "detect") and not args.config:
            raise ConfigError("--config is required")
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1
    except Exception as e:  # runtime failure
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
