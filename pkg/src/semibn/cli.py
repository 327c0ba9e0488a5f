"""Command-line surface: learn, score, sample, compare, gen-synthetic, bench.

Only the standard library is imported at module load so that the optional
SEMIBN_THREADS cap can be applied to the numerical backends before they
initialize. Exit codes: 0 success, 2 configuration, 3 input/output,
4 numeric or learner failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, fields
from pathlib import Path

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NUMERIC = 4

ALGORITHMS = ("hc-spbn", "hc-gbn-bic", "hc-kdebn", "pc-plc-spbn", "pc-plc-gbn")
BENCH_ALGORITHMS = ("hc-gbn-bic", "hc-spbn-lg", "hc-spbn-ckde", "hc-kdebn")


def _apply_thread_cap() -> None:
    cap = os.environ.get("SEMIBN_THREADS")
    if not cap:
        return
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, cap)


@dataclass
class ExperimentConfig:
    """Merged settings for one learning run; file keys under flag override."""

    data: str = ""
    algorithm: str = ""
    out_dir: str = ""
    seed: int = 0
    folds: int = 10
    patience: int = 5
    epsilon: float = 0.0
    validation_fraction: float = 0.2
    start_types: str = "ckde"
    alpha: float = 0.05
    max_cond_size: int | None = None
    refit_full_data: bool = False
    test_data: str | None = None
    reference_model: str | None = None

    def validate(self) -> None:
        from .errors import ConfigError

        if not self.data:
            raise ConfigError("a data path is required")
        if not self.out_dir:
            raise ConfigError("an output directory is required")
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(
                f"unknown algorithm {self.algorithm!r}; pick one of {ALGORITHMS}"
            )
        if self.folds < 2:
            raise ConfigError("folds must be at least 2")
        if self.patience < 0:
            raise ConfigError("patience cannot be negative")
        if not 0.0 < self.validation_fraction < 1.0:
            raise ConfigError("validation fraction must lie in (0, 1)")
        if self.start_types not in ("lg", "ckde"):
            raise ConfigError("start types must be 'lg' or 'ckde'")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError("alpha must lie in (0, 1)")
        if self.max_cond_size is not None and self.max_cond_size < 0:
            raise ConfigError("max conditioning size cannot be negative")


def load_experiment_config(args: argparse.Namespace) -> ExperimentConfig:
    from .errors import ConfigError

    known = {f.name for f in fields(ExperimentConfig)}
    merged: dict = {}
    if args.config:
        try:
            raw = json.loads(Path(args.config).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}: not valid JSON: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError(f"{args.config}: config must be a JSON object")
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ConfigError(f"{args.config}: unknown keys {unknown}")
        merged.update(raw)
    for name in known:
        value = getattr(args, name, None)
        if value is not None:
            merged[name] = value
    config = ExperimentConfig(**merged)
    config.validate()
    return config


def _hc_config(config: ExperimentConfig):
    from .search import HcConfig

    return HcConfig(
        folds=config.folds,
        patience=config.patience,
        epsilon=config.epsilon,
        validation_fraction=config.validation_fraction,
        seed=config.seed,
        start_types=config.start_types,
        refit_full_data=config.refit_full_data,
    )


def _pc_config(config: ExperimentConfig):
    from .pc import PcConfig

    return PcConfig(
        alpha=config.alpha, max_cond_size=config.max_cond_size, seed=config.seed
    )


def run_learner(config: ExperimentConfig, data):
    """Dispatch to the learner; returns (model, trace or None, pc result or None)."""
    from . import pc, search

    hc = _hc_config(config)
    if config.algorithm == "hc-spbn":
        result = search.hc_learn(data, hc)
        return result.model, result.trace, None
    if config.algorithm == "hc-gbn-bic":
        result = search.hc_learn_gbn_bic(data, hc)
        return result.model, result.trace, None
    if config.algorithm == "hc-kdebn":
        result = search.hc_learn_kdebn(data, hc)
        return result.model, result.trace, None
    if config.algorithm == "pc-plc-spbn":
        model, pc_result = pc.pc_learn_spbn(data, _pc_config(config), hc)
        return model, None, pc_result
    model, pc_result = pc.pc_learn_gbn(data, _pc_config(config), hc)
    return model, None, pc_result


def _score_lines(model, data) -> tuple[list[str], dict]:
    report = model.loglik_report(data)
    width = max(4, max(len(n) for n in model.names))
    lines = [f"{'node':<{width}}  family  parents                loglik"]
    for i, name in enumerate(model.names):
        parents = ",".join(model.names[p] for p in model.dag.parents(i)) or "-"
        lines.append(
            f"{name:<{width}}  {model.node_types[i].value:<6}  {parents:<21}"
            f"  {report.by_node[i]:.6f}"
        )
    lines.append(f"total loglik: {report.total:.6f}")
    if report.neg_inf_rows:
        lines.append(f"rows at -inf: {report.neg_inf_rows}")
    machine = {
        "total": report.total,
        "by_node": {
            model.names[i]: report.by_node[i] for i in range(model.n_nodes)
        },
        "neg_inf_rows": report.neg_inf_rows,
    }
    return lines, machine


def cmd_learn(args: argparse.Namespace) -> int:
    from .dataset import read_csv
    from .metrics import compare_structures
    from .scoring import TrainValidationSplit
    from .search import write_trace
    from .pc import write_sepset_log
    from .serialize import load_model, save_model

    config = load_experiment_config(args)
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    timings: dict[str, float] = {}
    tick = time.perf_counter()
    data = read_csv(config.data)
    timings["ingest_s"] = time.perf_counter() - tick

    tick = time.perf_counter()
    model, trace, pc_result = run_learner(config, data)
    timings["learn_s"] = time.perf_counter() - tick

    tick = time.perf_counter()
    model_path = out_dir / "model.json"
    save_model(model, model_path)
    if trace is not None:
        write_trace(trace, model.names, out_dir / "trace.jsonl")
    if pc_result is not None:
        write_sepset_log(pc_result, model.names, out_dir / "sepsets.jsonl")
    timings["serialize_s"] = time.perf_counter() - tick

    tick = time.perf_counter()
    split = TrainValidationSplit(
        data.n_rows, config.validation_fraction, config.seed
    )
    train_ll = model.loglik_report(data.take_rows(split.train_rows)).total
    val_ll = model.loglik_report(data.take_rows(split.validation_rows)).total
    test_ll = None
    if config.test_data:
        test_ll = model.loglik_report(read_csv(config.test_data)).total
    distances = None
    if config.reference_model:
        reference = load_model(config.reference_model)
        if reference.names != model.names:
            from .errors import NodeMismatch

            raise NodeMismatch("reference model names do not match data columns")
        report = compare_structures(
            model.dag, model.node_types, reference.dag, reference.node_types
        )
        distances = {"hmd": report.hmd, "shd": report.shd, "thmd": report.thmd}
    timings["evaluate_s"] = time.perf_counter() - tick

    arcs = [f"{model.names[s]}->{model.names[d]}" for s, d in model.dag.arcs()]
    types = {model.names[i]: model.node_types[i].value for i in range(model.n_nodes)}
    human = [
        f"algorithm: {config.algorithm}",
        f"model: {model_path}",
        f"arcs: {', '.join(arcs) if arcs else '(none)'}",
        "types: " + ", ".join(f"{k}={v}" for k, v in types.items()),
        f"train loglik: {train_ll:.6f}",
        f"validation loglik: {val_ll:.6f}",
    ]
    if test_ll is not None:
        human.append(f"test loglik: {test_ll:.6f}")
    if distances is not None:
        human.append(
            f"distances vs reference: hmd={distances['hmd']}"
            f" shd={distances['shd']} thmd={distances['thmd']}"
        )
    human.append(
        "timings (s): "
        + ", ".join(f"{k[:-2]}={v:.3f}" for k, v in timings.items())
    )
    text = "\n".join(human)
    (out_dir / "report.txt").write_text(text + "\n")

    record = {
        "record": "run",
        "algorithm": config.algorithm,
        "seed": config.seed,
        "model_path": str(model_path),
        "arcs": arcs,
        "node_types": types,
        "train_loglik": train_ll,
        "validation_loglik": val_ll,
        "test_loglik": test_ll,
        "distances": distances,
        "timings": timings,
    }
    with (out_dir / "report.jsonl").open("w") as fh:
        fh.write(json.dumps(record) + "\n")
    print(text)
    return EXIT_OK


def cmd_score(args: argparse.Namespace) -> int:
    from .dataset import read_csv
    from .errors import SchemaMismatch
    from .serialize import load_model

    model = load_model(args.model)
    data = read_csv(args.data)
    if data.names != model.names:
        raise SchemaMismatch(
            f"model variables {model.names} do not match data columns {data.names}"
        )
    lines, machine = _score_lines(model, data)
    print("\n".join(lines))
    if args.out:
        with Path(args.out).open("w") as fh:
            fh.write(json.dumps({"record": "score", **machine}) + "\n")
    return EXIT_OK


def cmd_sample(args: argparse.Namespace) -> int:
    from .dataset import write_csv
    from .serialize import load_model

    model = load_model(args.model)
    sample = model.sample(args.rows, args.seed)
    write_csv(sample, args.out)
    print(f"wrote {sample.n_rows} rows to {args.out}")
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    from .errors import NodeMismatch
    from .metrics import compare_structures
    from .serialize import load_model

    model = load_model(args.model)
    reference = load_model(args.reference)
    if model.names != reference.names:
        raise NodeMismatch("models do not share variable names")
    report = compare_structures(
        model.dag, model.node_types, reference.dag, reference.node_types
    )
    text = report.describe(model.names)
    print(text)
    if args.out:
        record = {
            "record": "compare",
            "hmd": report.hmd,
            "shd": report.shd,
            "thmd": report.thmd,
        }
        with Path(args.out).open("w") as fh:
            fh.write(json.dumps(record) + "\n")
    return EXIT_OK


def cmd_gen_synthetic(args: argparse.Namespace) -> int:
    from .dataset import write_csv
    from .model import fit_model
    from .serialize import save_model
    from .synthetic import ground_truth, sample_synthetic

    data = sample_synthetic(args.rows, args.seed)
    write_csv(data, args.out)
    print(f"wrote {data.n_rows} rows to {args.out}")
    if args.ground_truth_model:
        dag, types = ground_truth()
        model = fit_model(data, dag, types)
        save_model(model, args.ground_truth_model)
        print(f"wrote reference model to {args.ground_truth_model}")
    return EXIT_OK


def bench_grid(rows_list, algorithms, repeats: int, base_seed: int):
    """Timed learning runs on fresh synthetic data; returns cell records.

    Each cell repeats the run with distinct fold/split seeds and reports
    the mean wall-clock of the learning call alone.
    """
    from .search import HcConfig, hc_learn, hc_learn_gbn_bic, hc_learn_kdebn
    from .synthetic import sample_synthetic

    runners = {
        "hc-gbn-bic": lambda d, c: hc_learn_gbn_bic(d, c),
        "hc-spbn-lg": lambda d, c: hc_learn(d, c),
        "hc-spbn-ckde": lambda d, c: hc_learn(d, c),
        "hc-kdebn": lambda d, c: hc_learn_kdebn(d, c),
    }
    records = []
    for n_rows in rows_list:
        data = sample_synthetic(n_rows, base_seed)
        for algorithm in algorithms:
            if algorithm not in runners:
                records.append(
                    {
                        "record": "bench",
                        "rows": n_rows,
                        "algorithm": algorithm,
                        "error": f"unknown bench algorithm {algorithm!r}",
                    }
                )
                continue
            times = []
            error = None
            for rep in range(repeats):
                start_types = "lg" if algorithm == "hc-spbn-lg" else "ckde"
                config = HcConfig(seed=base_seed + rep, start_types=start_types)
                try:
                    tick = time.perf_counter()
                    runners[algorithm](data, config)
                    times.append(time.perf_counter() - tick)
                except Exception as exc:  # record and keep the grid going
                    error = f"{type(exc).__name__}: {exc}"
                    break
            record = {
                "record": "bench",
                "rows": n_rows,
                "algorithm": algorithm,
                "repeats": len(times),
                "workers": 1,
            }
            if error:
                record["error"] = error
            if times:
                record["mean_s"] = sum(times) / len(times)
                record["times_s"] = times
            records.append(record)
    return records


def cmd_bench(args: argparse.Namespace) -> int:
    rows_list = [int(r) for r in args.rows.split(",")]
    algorithms = args.algorithms.split(",") if args.algorithms else list(
        BENCH_ALGORITHMS
    )
    records = bench_grid(rows_list, algorithms, args.repeats, args.seed)
    print(f"{'rows':>8}  {'algorithm':<14}  {'mean_s':>10}  note")
    for rec in records:
        mean = f"{rec['mean_s']:.3f}" if "mean_s" in rec else "-"
        note = rec.get("error", "")
        print(f"{rec['rows']:>8}  {rec['algorithm']:<14}  {mean:>10}  {note}")
    if args.out:
        with Path(args.out).open("w") as fh:
            for rec in records:
                fh.write(json.dumps(rec) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="semibn",
        description="Learn, score, sample, and compare semiparametric "
        "Bayesian networks over continuous data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    learn = sub.add_parser("learn", help="learn a model from CSV data")
    learn.add_argument("--config", help="JSON config file; flags override it")
    learn.add_argument("--data", help="training CSV path")
    learn.add_argument("--algorithm", choices=ALGORITHMS)
    learn.add_argument("--out-dir", dest="out_dir")
    learn.add_argument("--seed", type=int)
    learn.add_argument("--folds", type=int)
    learn.add_argument("--patience", type=int)
    learn.add_argument("--epsilon", type=float)
    learn.add_argument(
        "--validation-fraction", dest="validation_fraction", type=float
    )
    learn.add_argument(
        "--start-types", dest="start_types", choices=("lg", "ckde")
    )
    learn.add_argument("--alpha", type=float)
    learn.add_argument("--max-cond-size", dest="max_cond_size", type=int)
    learn.add_argument(
        "--refit-full-data",
        dest="refit_full_data",
        action="store_const",
        const=True,
    )
    learn.add_argument("--test-data", dest="test_data")
    learn.add_argument("--reference-model", dest="reference_model")
    learn.set_defaults(func=cmd_learn)

    score = sub.add_parser("score", help="evaluate a saved model on data")
    score.add_argument("--model", required=True)
    score.add_argument("--data", required=True)
    score.add_argument("--out", help="machine-readable output path")
    score.set_defaults(func=cmd_score)

    sample = sub.add_parser("sample", help="draw rows from a saved model")
    sample.add_argument("--model", required=True)
    sample.add_argument("--rows", type=int, required=True)
    sample.add_argument("--seed", type=int, default=0)
    sample.add_argument("--out", required=True)
    sample.set_defaults(func=cmd_sample)

    compare = sub.add_parser("compare", help="structure distances of two models")
    compare.add_argument("--model", required=True)
    compare.add_argument("--reference", required=True)
    compare.add_argument("--out", help="machine-readable output path")
    compare.set_defaults(func=cmd_compare)

    gen = sub.add_parser(
        "gen-synthetic", help="sample the five-variable benchmark generator"
    )
    gen.add_argument("--rows", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.add_argument(
        "--ground-truth-model",
        dest="ground_truth_model",
        help="also fit and save the reference structure on the sampled data",
    )
    gen.set_defaults(func=cmd_gen_synthetic)

    bench = sub.add_parser("bench", help="timed learning runs on synthetic data")
    bench.add_argument("--rows", default="4000", help="comma-separated row counts")
    bench.add_argument(
        "--algorithms",
        help=f"comma-separated subset of {','.join(BENCH_ALGORITHMS)}",
    )
    bench.add_argument("--repeats", type=int, default=3)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--out", help="machine-readable output path")
    bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    _apply_thread_cap()
    from . import errors

    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (errors.ConfigError, errors.SchemaMismatch, errors.NodeMismatch) as exc:
        _emit_error(exc, EXIT_CONFIG)
        return EXIT_CONFIG
    except (errors.DataFormatError, OSError) as exc:
        _emit_error(exc, EXIT_IO)
        return EXIT_IO
    except errors.SemibnError as exc:
        _emit_error(exc, EXIT_NUMERIC)
        return EXIT_NUMERIC
    except Exception as exc:
        import numpy as np

        if isinstance(exc, (np.linalg.LinAlgError, FloatingPointError)):
            _emit_error(exc, EXIT_NUMERIC)
            return EXIT_NUMERIC
        raise


def _emit_error(exc: Exception, code: int) -> None:
    record = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    print(json.dumps(record), file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
