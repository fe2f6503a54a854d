"""Dataset generation, loading and integrity checks.

A dataset directory holds ``manifest.json``, one ``records_<kind>.csv`` per
robustness kind and ``graphs/<record id>.txt`` edge lists shared by both
kinds. Every sample draws its seeds from ``SeedSequence([seed, topology,
sample])``, so the output does not depend on the worker count.
"""
import csv
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from app.core.attacks import plan_attack
from app.core.edgelist import format_edge_list, load_edge_list
from app.core.exceptions import DatasetError, InfeasibleSpecError
from app.core.generators import generate
from app.core.graph import Graph
from app.core.robustness import overall_rc, robustness_curve
from app.logging_config import get_logger
from app.pipeline.workers import run_parallel
from app.schemas.attack import AttackStrategy, CurveKind, OracleMode
from app.schemas.dataset import DatasetManifest, DatasetRecord
from app.schemas.generation import GenSpec, Topology
from app.schemas.pipeline import PipelineConfig

logger = get_logger(__name__)

MANIFEST_FILE = "manifest.json"
META_FIELDS = ["record_id", "kind", "k_avg", "weighted", "seed"]
RECORD_FIELDS = ["topology", "n", "directed", "attack", "rc"]


@dataclass(frozen=True)
class SampleTask:
    record_id: int
    spec: GenSpec
    strategy: AttackStrategy
    kinds: Tuple[CurveKind, ...]
    mode: OracleMode


@dataclass
class SampleResult:
    task: SampleTask
    edge_list: Optional[str] = None
    curves: Dict[CurveKind, Tuple[List[float], float]] = field(default_factory=dict)
    error: Optional[str] = None


def records_file(kind: CurveKind) -> str:
    return f"records_{kind.value}.csv"


def build_tasks(config: PipelineConfig) -> List[SampleTask]:
    gen = config.generation
    tasks = []
    for topo_index, topology in enumerate(gen.topologies):
        for sample in range(gen.samples_per_topology):
            rng = np.random.default_rng(np.random.SeedSequence([config.pipeline.seed, topo_index, sample]))
            k_avg = float(rng.uniform(gen.k_min, gen.k_max)) if gen.k_max > gen.k_min else gen.k_min
            graph_seed = int(rng.integers(0, 2**63))
            attack_seed = int(rng.integers(0, 2**63))
            spec = GenSpec(
                topology=topology,
                n=gen.n,
                k_avg=k_avg,
                directed=gen.directed,
                weighted=gen.weighted or (gen.weighted_copies and sample % 2 == 1),
                weight_range=(gen.weight_lo, gen.weight_hi),
                seed=graph_seed,
            )
            tasks.append(SampleTask(
                record_id=topo_index * gen.samples_per_topology + sample,
                spec=spec,
                strategy=AttackStrategy(kind=gen.attack, seed=attack_seed, recompute=gen.recompute),
                kinds=tuple(gen.kinds),
                mode=gen.oracle_mode,
            ))
    return tasks


def simulate_sample(task: SampleTask) -> SampleResult:
    """Generate one graph and run the oracle for every requested kind."""
    try:
        g = generate(task.spec)
    except InfeasibleSpecError as exc:
        return SampleResult(task=task, error=str(exc))
    trace = plan_attack(g, task.strategy)
    result = SampleResult(task=task, edge_list=format_edge_list(g))
    for kind in task.kinds:
        curve = robustness_curve(g, trace, kind, task.mode)
        result.curves[kind] = ([float(v) for v in curve.values], overall_rc(curve).r_c)
    return result


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _graphs_sha256(graphs_dir: Path) -> str:
    """One digest over every edge-list file, in file-name order."""
    digest = hashlib.sha256()
    for path in sorted(graphs_dir.glob("*.txt")):
        digest.update(path.name.encode())
        digest.update(b"\0")
        digest.update(hashlib.sha256(path.read_bytes()).digest())
    return digest.hexdigest()


def _write_records(path: Path, records: Sequence[DatasetRecord]) -> None:
    # One line per record: bookkeeping columns, then topology, N, directed,
    # attack, R_c and the N-1 curve values as separate columns.
    n = records[0].n if records else 0
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(META_FIELDS + RECORD_FIELDS + [f"s{i}" for i in range(1, n)])
        for r in records:
            writer.writerow(
                [r.record_id, r.kind.value, repr(r.k_avg), int(r.weighted), r.seed]
                + [r.topology.value, r.n, int(r.directed), r.attack.value, repr(r.rc)]
                + [repr(v) for v in r.curve]
            )


def _read_records(path: Path) -> List[DatasetRecord]:
    fixed = len(META_FIELDS) + len(RECORD_FIELDS)
    records = []
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or header[:fixed] != META_FIELDS + RECORD_FIELDS:
            raise DatasetError(f"{path} is not a records file")
        for line_number, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) < fixed:
                raise DatasetError(f"{path}:{line_number}: expected at least {fixed} columns, got {len(row)}")
            record_id, kind, k_avg, weighted, seed, topology, n, directed, attack, rc = row[:fixed]
            try:
                record = DatasetRecord(
                    record_id=int(record_id),
                    kind=kind,
                    k_avg=float(k_avg),
                    weighted=weighted == "1",
                    seed=int(seed),
                    topology=topology,
                    n=int(n),
                    directed=directed == "1",
                    attack=attack,
                    rc=float(rc),
                    curve=[float(v) for v in row[fixed:]],
                )
            except ValueError as exc:
                raise DatasetError(f"{path}:{line_number}: {exc}")
            if len(record.curve) != record.n - 1:
                raise DatasetError(
                    f"{path}:{line_number}: expected {record.n - 1} curve values, got {len(record.curve)}"
                )
            records.append(record)
    return records


def cmd_gen(config: PipelineConfig) -> DatasetManifest:
    """Generate the dataset described by ``config`` into ``paths.dataset_dir``."""
    out = Path(config.paths.dataset_dir)
    (out / "graphs").mkdir(parents=True, exist_ok=True)
    tasks = build_tasks(config)
    logger.info("dataset_generation_started", samples=len(tasks), threads=config.pipeline.threads, out=str(out))
    results = run_parallel(simulate_sample, tasks, config.pipeline.threads)

    by_kind: Dict[CurveKind, List[DatasetRecord]] = {kind: [] for kind in config.generation.kinds}
    counts = {t.value: 0 for t in config.generation.topologies}
    skipped = 0
    for result in results:
        task = result.task
        if result.error is not None:
            skipped += 1
            logger.warning(
                "spec_infeasible",
                record_id=task.record_id,
                topology=task.spec.topology.value,
                k_avg=task.spec.k_avg,
                error=result.error,
            )
            continue
        counts[task.spec.topology.value] += 1
        (out / "graphs" / f"{task.record_id:06d}.txt").write_text(result.edge_list)
        for kind, (curve, rc) in result.curves.items():
            by_kind[kind].append(DatasetRecord(
                record_id=task.record_id,
                topology=task.spec.topology,
                kind=kind,
                attack=task.strategy.kind,
                n=task.spec.n,
                directed=task.spec.directed,
                k_avg=task.spec.k_avg,
                weighted=task.spec.weighted,
                seed=task.spec.seed,
                rc=rc,
                curve=curve,
            ))

    hashes = {}
    for kind, records in by_kind.items():
        path = out / records_file(kind)
        _write_records(path, records)
        hashes[records_file(kind)] = _sha256(path)

    manifest = DatasetManifest(
        config_hash=config.generation_hash(),
        n=config.generation.n,
        directed=config.generation.directed,
        kinds=list(config.generation.kinds),
        topology_counts=counts,
        skipped=skipped,
        records_sha256=hashes,
        graphs_sha256=_graphs_sha256(out / "graphs"),
    )
    (out / MANIFEST_FILE).write_text(json.dumps(manifest.model_dump(mode="json"), indent=2, sort_keys=True) + "\n")
    logger.info("dataset_generated", out=str(out), records=sum(counts.values()), skipped=skipped)
    return manifest


class Dataset:
    """Records of one robustness kind plus lazy access to their graphs."""

    def __init__(self, root: Path, manifest: DatasetManifest, kind: CurveKind, records: List[DatasetRecord]):
        self.root = root
        self.manifest = manifest
        self.kind = kind
        self.records = records
        self._graphs: Dict[int, Graph] = {}

    def graph(self, record: DatasetRecord) -> Graph:
        g = self._graphs.get(record.record_id)
        if g is None:
            g = load_edge_list(self.root / record.graph_file, self.manifest.directed)
            self._graphs[record.record_id] = g
        return g

    def __len__(self) -> int:
        return len(self.records)


def load_manifest(root: Union[str, Path]) -> DatasetManifest:
    path = Path(root) / MANIFEST_FILE
    if not path.is_file():
        raise DatasetError(f"no dataset manifest at {path}")
    try:
        return DatasetManifest.model_validate_json(path.read_text())
    except ValueError as exc:
        raise DatasetError(f"unreadable dataset manifest {path}: {exc}")


def load_dataset(root: Union[str, Path], kind: CurveKind, verify: bool = True) -> Dataset:
    """Load the records of ``kind``.

    Raises:
        DatasetError: If the manifest is missing, the kind was not generated
            or (with ``verify``) the records file or the graph files do not
            match their hashes.
    """
    root = Path(root)
    manifest = load_manifest(root)
    name = records_file(kind)
    path = root / name
    if kind not in manifest.kinds or not path.is_file():
        raise DatasetError(f"dataset at {root} has no {kind.value} records")
    if verify and _sha256(path) != manifest.records_sha256.get(name):
        raise DatasetError(f"{path} does not match the hash in its manifest")
    if verify and _graphs_sha256(root / "graphs") != manifest.graphs_sha256:
        raise DatasetError(f"graph files under {root / 'graphs'} do not match the hash in its manifest")
    records = _read_records(path)
    logger.debug("dataset_loaded", root=str(root), kind=kind.value, records=len(records))
    return Dataset(root, manifest, kind, records)


def require_single_size(records: Sequence[DatasetRecord]) -> int:
    sizes = sorted({r.n for r in records})
    if len(sizes) != 1:
        raise DatasetError(f"records must share one graph size, found {sizes}")
    return sizes[0]


def split_records(
    records: Sequence[DatasetRecord],
    val_fraction: float,
    seed: int,
) -> Tuple[List[DatasetRecord], List[DatasetRecord]]:
    """Hold out ``val_fraction`` of the records of every topology, chosen by ``seed``."""
    train: List[DatasetRecord] = []
    val: List[DatasetRecord] = []
    for topo_index, topology in enumerate(Topology):
        group = [r for r in records if r.topology == topology]
        if not group:
            continue
        count = int(round(len(group) * val_fraction))
        if val_fraction > 0 and len(group) > 1:
            count = min(max(count, 1), len(group) - 1)
        picked = set(np.random.default_rng([seed, topo_index]).permutation(len(group))[:count].tolist())
        for i, r in enumerate(group):
            (val if i in picked else train).append(r)
    return train, val


def subsample(records: Sequence[DatasetRecord], fraction: float, seed: int) -> List[DatasetRecord]:
    """Keep ``ceil(fraction * len)`` records, in their original order."""
    count = max(1, math.ceil(fraction * len(records) - 1e-12))
    keep = set(np.random.default_rng(seed).permutation(len(records))[:count].tolist())
    return [r for i, r in enumerate(records) if i in keep]
