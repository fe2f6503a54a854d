#!/usr/bin/env python3
"""
Command-line pipeline: dataset generation, training, evaluation and one-off
oracle simulations.

Usage:
  poetry run python scripts/nrlgt.py gen --config configs/desk.ini
  poetry run python scripts/nrlgt.py train-step1 --config configs/desk.ini
  poetry run python scripts/nrlgt.py train-step2 --config configs/desk.ini
  poetry run python scripts/nrlgt.py eval --config configs/desk.ini
  poetry run python scripts/nrlgt.py transfer --config configs/desk.ini --dataset data/n150
  poetry run python scripts/nrlgt.py curve graph.txt --attack TDA --kind connectivity
  poetry run python scripts/nrlgt.py serve --port 8000

Exit codes: 0 on success, 1 on a pipeline error, 130 when interrupted.
"""
import sys
import argparse
from pathlib import Path
from typing import Dict, List, Optional

# Add parent directory to path to import app modules
sys.path.insert(0, '.')

from app.config import settings
from app.core.attacks import plan_attack, write_trace_csv
from app.core.edgelist import load_edge_list
from app.core.exceptions import DatasetError, RobustnessError
from app.core.robustness import batch_curve, overall_rc, robustness_curve, write_curve_csv
from app.logging_config import configure_logging, get_logger
from app.models.nrlgt import NRLGT
from app.pipeline.dataset import Dataset, cmd_gen, load_dataset
from app.pipeline.evaluation import cmd_eval, cmd_transfer
from app.pipeline.reports import write_csv
from app.pipeline.spectral_compare import cmd_spectral_compare
from app.pipeline.training import STEP1_LOG_FIELDS, STEP2_LOG_FIELDS, cmd_train_step1, cmd_train_step2
from app.schemas.attack import AttackKind, AttackStrategy, CurveKind, OracleMode
from app.schemas.pipeline import PipelineConfig

logger = get_logger(__name__)


def load_config(args) -> PipelineConfig:
    config = PipelineConfig.from_ini(args.config) if args.config else PipelineConfig()
    return config.with_overrides(seed=args.seed, threads=args.threads, out=args.out)


def _rc_truth(config: PipelineConfig, root: str, curve_dataset: Dataset) -> Optional[Dict[int, float]]:
    """True R_c of the kind the R_c head was trained on, when it differs from the curve kind."""
    if config.training.rc_kind == curve_dataset.kind:
        return None
    try:
        rc_dataset = load_dataset(root, config.training.rc_kind)
    except DatasetError:
        logger.warning("rc_records_missing", kind=config.training.rc_kind.value, dataset=root)
        return None
    return {r.record_id: r.rc for r in rc_dataset.records}


def run_gen(args) -> int:
    config = load_config(args)
    manifest = cmd_gen(config)
    total = sum(manifest.topology_counts.values())
    print(f"✓ Generated {total} graphs into {config.paths.dataset_dir} ({manifest.skipped} skipped)")
    return 0


def run_train_step1(args) -> int:
    config = load_config(args)
    dataset = load_dataset(args.dataset or config.paths.dataset_dir, config.training.curve_kind)
    run = cmd_train_step1(config, dataset)
    checkpoint = args.checkpoint or config.paths.checkpoint
    run.model.save(checkpoint)
    write_csv(Path(config.paths.report_dir) / "train_step1.csv", STEP1_LOG_FIELDS, run.log)
    print(f"✓ Step 1 finished: checkpoint {checkpoint}, final loss {run.log[-1][1]:.6f}")
    return 0


def run_train_step2(args) -> int:
    config = load_config(args)
    checkpoint = args.checkpoint or config.paths.checkpoint
    model = NRLGT.load(checkpoint)
    dataset = load_dataset(args.dataset or config.paths.dataset_dir, config.training.rc_kind)
    run = cmd_train_step2(config, dataset, model)
    output = args.output or checkpoint
    run.model.save(output)
    write_csv(Path(config.paths.report_dir) / "train_step2.csv", STEP2_LOG_FIELDS, run.log)
    last = run.log[-1]
    print(f"✓ Step 2 finished: checkpoint {output}, accuracy {last[5]:.3f}, w_c={last[3]:.3f} w_R={last[4]:.3f}")
    return 0


def run_eval(args) -> int:
    config = load_config(args)
    model = NRLGT.load(args.checkpoint or config.paths.checkpoint)
    root = args.dataset or config.paths.dataset_dir
    dataset = load_dataset(root, model.manifest.curve_kind)
    report = cmd_eval(config, model, dataset, _rc_truth(config, root, dataset))
    for topology, records, mean_er, threshold, passed in report.per_topology:
        print(f"{'✓' if passed else '✗'} {topology}: mean_er={mean_er:.4f} (threshold {threshold}, {records} records)")
    print(f"✓ Report written to {config.paths.report_dir}")
    return 0


def run_transfer(args) -> int:
    config = load_config(args)
    model = NRLGT.load(args.checkpoint or config.paths.checkpoint)
    dataset = load_dataset(args.dataset, model.manifest.curve_kind)
    report = cmd_transfer(config, model, dataset, _rc_truth(config, args.dataset, dataset))
    for topology, records, mean_er, threshold, passed in report.per_topology:
        print(f"{'✓' if passed else '✗'} {topology}: mean_er={mean_er:.4f} at N={dataset.manifest.n}")
    if args.output:
        model.save(args.output)
        print(f"✓ Transferred checkpoint saved to {args.output}")
    return 0


def _directed(args, model: NRLGT) -> bool:
    if args.undirected:
        return False
    return not model.manifest.shared_degree_table


def run_classify(args) -> int:
    config = load_config(args)
    model = NRLGT.load(args.checkpoint or config.paths.checkpoint)
    labels = [label.value for label in model.manifest.class_labels]
    print(",".join(["file", "label"] + [f"p_{label}" for label in labels]))
    for path in args.files:
        prediction = model.predict(load_edge_list(path, _directed(args, model)))
        print(",".join([path, prediction.label.value] + [repr(p) for p in prediction.probabilities]))
    return 0


def run_rc(args) -> int:
    config = load_config(args)
    model = NRLGT.load(args.checkpoint or config.paths.checkpoint)
    print("file,rc")
    for path in args.files:
        prediction = model.predict(load_edge_list(path, _directed(args, model)))
        print(f"{path},{prediction.rc!r}")
    return 0


def run_spectral(args) -> int:
    config = load_config(args)
    checkpoint = args.checkpoint or config.paths.checkpoint
    model = NRLGT.load(checkpoint) if Path(checkpoint).is_file() else None
    dataset = load_dataset(args.dataset or config.paths.dataset_dir, config.training.rc_kind)
    rows = cmd_spectral_compare(config, dataset, model)
    for method, error in rows:
        print(f"  {method}: rank error {error:.3f}")
    print(f"✓ Spectral measures and rank errors written to {config.paths.report_dir}")
    return 0


def _strategy(args) -> AttackStrategy:
    return AttackStrategy(kind=AttackKind(args.attack), seed=args.attack_seed, recompute=not args.static)


def run_curve(args) -> int:
    g = load_edge_list(args.file, not args.undirected)
    kind, mode = CurveKind(args.kind), OracleMode(args.mode)
    if args.batch_fraction is not None:
        curve = batch_curve(g, _strategy(args), args.batch_fraction, kind, mode)
    else:
        curve = robustness_curve(g, plan_attack(g, _strategy(args)), kind, mode)
    if args.out:
        path = Path(args.out) / "curve.csv"
        path.parent.mkdir(parents=True, exist_ok=True)
        write_curve_csv(curve, path)
        print(f"✓ Curve written to {path}")
    else:
        print("i,value")
        for i, value in enumerate(curve.values, start=1):
            print(f"{i},{float(value)!r}")
    print(f"R_c = {overall_rc(curve).r_c:.6f}", file=sys.stderr)
    return 0


def run_attack(args) -> int:
    g = load_edge_list(args.file, not args.undirected)
    trace = plan_attack(g, _strategy(args))
    if args.out:
        path = Path(args.out) / "trace.csv"
        path.parent.mkdir(parents=True, exist_ok=True)
        write_trace_csv(trace, path)
        print(f"✓ Trace written to {path}")
    else:
        print("step,node")
        for step, node in enumerate(trace.order, start=1):
            print(f"{step},{node}")
    return 0


def run_serve(args) -> int:
    import uvicorn

    if args.checkpoint:
        settings.MODEL_CHECKPOINT = args.checkpoint
    uvicorn.run("app.main:app", host=args.host, port=args.port, log_config=None)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI pipeline config ([pipeline], [generation], [training], ...)")
    common.add_argument("--seed", type=int, help="Override [pipeline] seed")
    common.add_argument("--threads", type=int, help="Override [pipeline] threads")
    common.add_argument("--out", help="Override the report/output directory")
    common.add_argument("--debug", action="store_true", help="Human-readable debug logging")

    parser = argparse.ArgumentParser(description="Network robustness oracle and NRL-GT learning pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, handler, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(handler=handler)
        return p

    add("gen", run_gen, "Generate a dataset of graphs and true robustness curves")

    p = add("train-step1", run_train_step1, "Train encoder, backbone and curve head")
    p.add_argument("--dataset", help="Dataset directory (default: [paths] dataset_dir)")
    p.add_argument("--checkpoint", help="Checkpoint to write (default: [paths] checkpoint)")

    p = add("train-step2", run_train_step2, "Train the class and R_c heads on a step-1 checkpoint")
    p.add_argument("--dataset")
    p.add_argument("--checkpoint", help="Step-1 checkpoint to start from")
    p.add_argument("--output", help="Checkpoint to write (default: overwrite --checkpoint)")

    p = add("eval", run_eval, "Evaluate a checkpoint on the held-out split")
    p.add_argument("--dataset")
    p.add_argument("--checkpoint")

    p = add("transfer", run_transfer, "Fine-tune the curve head on graphs of a new size and evaluate")
    p.add_argument("--dataset", required=True, help="Dataset generated at the new size")
    p.add_argument("--checkpoint")
    p.add_argument("--output", help="Where to save the transferred checkpoint")

    for name, handler, text in (("classify", run_classify, "Predict topology classes"), ("rc", run_rc, "Predict R_c")):
        p = add(name, handler, text)
        p.add_argument("files", nargs="+", help="Edge-list files")
        p.add_argument("--checkpoint")
        p.add_argument("--undirected", action="store_true")

    p = add("spectral", run_spectral, "Rank error of spectral measures and the model against true R_c")
    p.add_argument("--dataset")
    p.add_argument("--checkpoint")

    for name, handler, text in (("curve", run_curve, "Simulate one attack on an edge-list file"),
                                ("attack", run_attack, "Emit the removal order of an attack")):
        p = add(name, handler, text)
        p.add_argument("file", help="Edge-list file")
        p.add_argument("--attack", choices=[k.value for k in AttackKind], default="RA")
        p.add_argument("--attack-seed", type=int, default=0)
        p.add_argument("--static", action="store_true", help="Rank targets once instead of after every removal")
        p.add_argument("--undirected", action="store_true")
        if name == "curve":
            p.add_argument("--kind", choices=[k.value for k in CurveKind], default="controllability")
            p.add_argument("--mode", choices=[m.value for m in OracleMode], default="structural")
            p.add_argument("--batch-fraction", type=float)

    p = add("serve", run_serve, "Run the HTTP API")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--checkpoint", help="Model served by /api/model (default: MODEL_CHECKPOINT)")

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(debug=True if args.debug else None)

    try:
        return args.handler(args)
    except KeyboardInterrupt:
        print("\n\nOperation cancelled by user")
        return 130
    except RobustnessError as e:
        logger.error("command_failed", command=args.command, error=str(e))
        print(f"Error: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
