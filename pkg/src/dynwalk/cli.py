"""``dynwalk`` command line.

Every setting can come from a flat ``key = value`` config file (``--config``)
or from a ``--key value`` flag; flags win over the file, the file wins over
the built-in defaults.

Exit status: 0 on success, 1 on configuration or data errors, 2 when an
internal invariant check fails.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import datasets
from .embed import EmbeddingTable, TrainConfig, train_full
from .errors import DynwalkError
from .evaluation import ClassifierConfig, LabelSet, evaluate
from .graph import GraphDelta, affected_vertices, apply_delta, largest_connected_component, load_edge_list
from .pairs import BIAS_CSV_HEADER, PairCorpus, bias_report, generate_pairs
from .stream import SnapshotSchedule, affected_fraction_sweep, run_stream, write_records
from .walks import ALGORITHMS, WalkCorpus, WalkParams, static_all, update_corpus, validate_corpus


class InvariantViolation(RuntimeError):
    pass


def _int_list(s):
    return [int(x) for x in str(s).replace(",", " ").split()]


def _opt_int(s):
    return None if str(s).lower() in ("", "none", "all") else int(s)


# key -> (type, default, help)
SETTINGS = {
    "dataset": (str, None, "dataset name under $DYNWALK_DATA or a directory"),
    "edges": (str, None, "edge list file"),
    "labels": (str, None, "label file (vertex class per line)"),
    "out": (str, "out", "output directory"),
    "seed": (int, 0, "global seed"),
    "r": (int, 80, "walks per vertex"),
    "l": (int, 10, "walk length"),
    "p": (int, 8, "context window"),
    "dim": (int, 128, "embedding dimension"),
    "lr": (float, 0.025, "initial learning rate"),
    "epochs": (int, 3, "training epochs"),
    "batch_size": (int, 200, "pairs per parallel work unit"),
    "negatives": (int, 5, "negative samples per pair"),
    "noise_exponent": (float, 0.75, "unigram exponent of the noise distribution"),
    "train_fraction": (float, 0.09, "labelled fraction used for training"),
    "n_splits": (int, 10, "train/test reshuffles"),
    "l2": (float, 1.0, "logistic regression L2 strength"),
    "initial_fraction": (float, 0.1, "edge fraction in the first snapshot"),
    "update_rate": (int, 5, "edges added per snapshot"),
    "max_steps": (_opt_int, 100, "update snapshots to run ('all' for the whole stream)"),
    "walk_alg": (str, "M2", "M1, M2, M3 or M4"),
    "update_method": (str, "U2", "U1 or U2"),
    "eval_points": (str, "ends", "ends, none, every:K or comma separated snapshot indices"),
    "rates": (_int_list, [0, 10, 50, 100, 500, 1000], "update rates for sweep"),
    "seeds": (int, 1, "number of seeds for stream/sweep"),
    "corpus": (str, None, "walk corpus file"),
    "pairs": (str, None, "pair corpus file"),
    "embeddings": (str, None, "embedding text file"),
    "delta": (str, None, "delta file for bias: lines '+e u v', '-e u v', '+v u', '-v u'"),
    "toy": (str, None, "built-in toy graph for bias ('fig1')"),
    "workers": (int, 1, "worker threads; 1 is bit-deterministic"),
}


@dataclass
class RunConfig:
    values: dict = field(default_factory=dict)

    def __getattr__(self, key):
        try:
            return self.values[key]
        except KeyError:
            raise AttributeError(key) from None

    @property
    def out_dir(self) -> Path:
        p = Path(self.values["out"])
        p.mkdir(parents=True, exist_ok=True)
        return p

    def walk_params(self) -> WalkParams:
        return WalkParams(self.r, self.l, self.seed)

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            learning_rate=self.lr, epochs=self.epochs, batch_size=self.batch_size,
            negatives_per_pair=self.negatives, noise_exponent=self.noise_exponent,
            rng_seed=self.seed, dim=self.dim, workers=self.workers,
        )

    def classifier_config(self) -> ClassifierConfig:
        return ClassifierConfig(l2=self.l2)

    def schedule(self, seed: int | None = None) -> SnapshotSchedule:
        return SnapshotSchedule(self.initial_fraction, self.update_rate, self.max_steps,
                                self.seed if seed is None else seed)


def read_config_file(path) -> dict[str, str]:
    out = {}
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" in line:
                k, v = line.split("=", 1)
            else:
                parts = line.split(None, 1)
                if len(parts) != 2:
                    raise ValueError(f"{path}:{n}: expected 'key = value'")
                k, v = parts
            k = k.strip().replace("-", "_")
            if k not in SETTINGS:
                raise ValueError(f"{path}:{n}: unknown key {k!r}")
            out[k] = v.strip()
    return out


def resolve_config(args: argparse.Namespace) -> RunConfig:
    file_vals = read_config_file(args.config) if args.config else {}
    values = {}
    for key, (typ, default, _) in SETTINGS.items():
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
        elif key in file_vals:
            try:
                values[key] = typ(file_vals[key])
            except ValueError as e:
                raise ValueError(f"config key {key!r}: {e}") from None
        else:
            values[key] = default
    for key in ("r", "l", "p", "dim", "epochs", "batch_size", "n_splits", "update_rate", "workers", "seeds"):
        if values[key] < 1:
            raise ValueError(f"{key} must be positive")
    if values["walk_alg"] not in ALGORITHMS:
        raise ValueError(f"walk_alg must be one of {', '.join(ALGORITHMS)}")
    if values["update_method"] not in ("U1", "U2"):
        raise ValueError("update_method must be U1 or U2")
    for key in ("edges", "labels", "corpus", "pairs", "embeddings", "delta", "config"):
        path = values.get(key) if key != "config" else args.config
        if path and not Path(path).exists():
            raise FileNotFoundError(f"{key} file not found: {path}")
    return RunConfig(values)


# ---------------------------------------------------------------- helpers

def _load_inputs(cfg: RunConfig):
    """(graph, labels) from --edges/--labels or --dataset."""
    if cfg.edges:
        graph, ids = load_edge_list(cfg.edges, return_ids=True)
        labels = LabelSet.load(cfg.labels, id_map=ids) if cfg.labels else None
        return graph, labels, ids
    if cfg.dataset:
        ds = datasets.load_dataset(cfg.dataset)
        labels = LabelSet.load(cfg.labels, id_map=ds.id_map) if cfg.labels else ds.labels
        return ds.graph, labels, ds.id_map
    raise ValueError("give --edges or --dataset")


def _load_dataset(cfg: RunConfig) -> datasets.Dataset:
    if cfg.dataset and not cfg.edges:
        ds = datasets.load_dataset(cfg.dataset)
        if cfg.labels:
            ds.labels = LabelSet.load(cfg.labels, id_map=ds.id_map)
        return ds
    graph, labels, ids = _load_inputs(cfg)
    return datasets.Dataset(Path(cfg.edges).stem, graph, sorted(graph.edges()), labels, ids)


def _check_corpus(graph, corpus):
    problems = validate_corpus(graph, corpus)
    if problems:
        raise InvariantViolation("walk corpus invalid: " + "; ".join(problems[:5]))


def read_delta_file(path) -> GraphDelta:
    d = GraphDelta()
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            parts = line.split("#", 1)[0].split()
            if not parts:
                continue
            op, nums = parts[0], [int(x) for x in parts[1:]]
            if op in ("+e", "-e") and len(nums) == 2:
                (d.added_edges if op == "+e" else d.deleted_edges).add(tuple(nums))
            elif op in ("+v", "-v") and len(nums) == 1:
                (d.added_vertices if op == "+v" else d.deleted_vertices).add(nums[0])
            else:
                raise ValueError(f"{path}:{n}: bad delta line {line.strip()!r}")
    return GraphDelta(d.added_vertices, d.deleted_vertices, d.added_edges, d.deleted_edges)


def _default_embeddings(out: Path) -> Path:
    npz = out / "embeddings.npz"
    return npz if npz.exists() else out / "embeddings.txt"


def _load_embeddings(path) -> EmbeddingTable:
    if str(path).endswith(".npz"):
        return EmbeddingTable.load_npz(path)
    return EmbeddingTable.load_text(path)


# ---------------------------------------------------------------- commands

def cmd_walk(cfg: RunConfig) -> dict:
    """Generate the full walk corpus for a graph."""
    graph, _, _ = _load_inputs(cfg)
    corpus = static_all(graph, cfg.walk_params(), cfg.workers)
    _check_corpus(graph, corpus)
    path = cfg.out_dir / "corpus.txt"
    corpus.dump(path)
    return {"corpus": str(path), "walks": len(corpus)}


def cmd_pairs(cfg: RunConfig) -> dict:
    """Expand a walk corpus into target-context pairs."""
    corpus = WalkCorpus.load(cfg.corpus or cfg.out_dir / "corpus.txt")
    pairs = generate_pairs(corpus, cfg.p)
    path = cfg.out_dir / "pairs.txt"
    pairs.dump(path)
    return {"pairs": str(path), "count": len(pairs)}


def cmd_train(cfg: RunConfig) -> dict:
    """Train skip-gram embeddings from scratch on a pair file."""
    pairs = PairCorpus.load(cfg.pairs or cfg.out_dir / "pairs.txt")
    if cfg.edges or cfg.dataset:
        vertices = sorted(_load_inputs(cfg)[0].adjacency)
    else:
        vertices = pairs.vertices()
    table = train_full(pairs, vertices, cfg.train_config())
    if not table.finite():
        raise InvariantViolation("training produced non-finite embeddings")
    path = cfg.out_dir / "embeddings.txt"
    table.save_text(path)
    # full-precision copy with output vectors, preferred by eval
    table.save_npz(cfg.out_dir / "embeddings.npz")
    return {"embeddings": str(path), "vertices": len(table.ids), "losses": table.losses}


def cmd_eval(cfg: RunConfig) -> dict:
    """Vertex classification on exported embeddings."""
    graph, labels, _ = _load_inputs(cfg)
    if labels is None:
        raise ValueError("eval needs --labels (or a dataset with labels.txt)")
    table = _load_embeddings(cfg.embeddings or _default_embeddings(cfg.out_dir))
    lcc = largest_connected_component(graph)
    report = evaluate(table, labels, lcc, cfg.train_fraction, cfg.n_splits, cfg.seed, cfg.classifier_config())
    path = cfg.out_dir / "eval.json"
    path.write_text(report.to_json() + "\n")
    return json.loads(report.to_json())


def cmd_stream(cfg: RunConfig, emit_plot_data: bool = False) -> dict:
    """Replay a snapshot stream through one walk/update pipeline."""
    ds = _load_dataset(cfg)
    eval_points = cfg.eval_points
    if eval_points not in ("ends", "none") and not eval_points.startswith("every:"):
        eval_points = _int_list(eval_points)
    csv_path = cfg.out_dir / "records.csv"
    jsonl_path = cfg.out_dir / "records.jsonl"
    for p in (csv_path, jsonl_path):
        p.unlink(missing_ok=True)
    summary = []
    all_records = []
    for s in range(cfg.seeds):
        seed = cfg.seed + s
        train_cfg = cfg.train_config()
        train_cfg = TrainConfig(**{**train_cfg.__dict__, "rng_seed": seed})
        records = run_stream(
            ds, cfg.schedule(seed), cfg.walk_alg, cfg.update_method,
            WalkParams(cfg.r, cfg.l, seed), train_cfg, eval_points,
            window=cfg.p, train_fraction=cfg.train_fraction, n_splits=cfg.n_splits,
            classifier=cfg.classifier_config(), eval_seed=seed, workers=cfg.workers,
        )
        write_records(records, csv_path, jsonl_path)
        all_records.append((seed, records))
        summary.append({
            "seed": seed,
            "snapshots": len(records),
            "macro_f1": {r.snapshot_index: r.eval.macro_f1_mean for r in records if r.eval},
        })
    if emit_plot_data:
        _emit_stream_plot_data(cfg, ds.name, all_records)
    return {"records": str(csv_path), "runs": summary}


def _emit_stream_plot_data(cfg, name, all_records):
    """Tidy per-figure CSVs: bias (error vs snapshot), f1 and runtime per snapshot."""
    out = cfg.out_dir
    with open(out / "plot_bias.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["dataset", "algorithm", "seed", "snapshot", "mean_error", "max_error", "regenerated_fraction"])
        for seed, recs in all_records:
            for r in recs:
                if r.bias is not None:
                    w.writerow([name, r.walk_algorithm, seed, r.snapshot_index, r.bias.mean_error,
                                r.bias.max_error, r.bias.regenerated_fraction])
    with open(out / "plot_f1.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["dataset", "algorithm", "update", "seed", "snapshot", "macro_f1_mean", "macro_f1_std"])
        for seed, recs in all_records:
            for r in recs:
                if r.eval is not None:
                    w.writerow([name, r.walk_algorithm, r.update_method, seed, r.snapshot_index,
                                r.eval.macro_f1_mean, r.eval.macro_f1_std])
    with open(out / "plot_runtime.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["dataset", "algorithm", "update", "seed", "snapshot", "num_edges", "t_walk", "t_pairs", "t_train", "t_update"])
        for seed, recs in all_records:
            for r in recs:
                t = r.wall_times
                w.writerow([name, r.walk_algorithm, r.update_method, seed, r.snapshot_index, r.num_edges,
                            t.get("walk", 0.0), t.get("pairs", 0.0), t.get("train", 0.0), r.update_time])


def cmd_bias(cfg: RunConfig) -> dict:
    """Transition-frequency bias of a corpus, optionally after a delta."""
    if cfg.toy == "fig1":
        graph = datasets.fig1_graph()
    elif cfg.toy:
        raise ValueError(f"unknown toy graph {cfg.toy!r}")
    else:
        graph = _load_inputs(cfg)[0]
    params = cfg.walk_params()
    corpus = WalkCorpus.load(cfg.corpus) if cfg.corpus else static_all(graph, params, cfg.workers)
    regenerated = 0
    if cfg.delta:
        d = read_delta_file(cfg.delta)
        affected = affected_vertices(d, graph)
        graph = apply_delta(graph, d)
        corpus = update_corpus(cfg.walk_alg, graph, corpus, affected, params, inplace=True, workers=cfg.workers)
        regenerated = len(corpus.changed_ids)
    _check_corpus(graph, corpus)
    rep = bias_report(graph, corpus, regenerated)
    out = cfg.out_dir
    with open(out / "bias.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(BIAS_CSV_HEADER)
        w.writerow(rep.csv_row(graph.snapshot_index, cfg.walk_alg if cfg.delta else "M1"))
    with open(out / "bias_per_vertex.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["vertex", "error"])
        for v in sorted(rep.per_vertex_error):
            w.writerow([v, rep.per_vertex_error[v]])
    return {"mean_error": rep.mean_error, "max_error": rep.max_error,
            "regenerated_fraction": rep.regenerated_fraction}


def cmd_sweep(cfg: RunConfig, emit_plot_data: bool = False) -> dict:
    """Fraction of walks affected by one update of each size."""
    ds = _load_dataset(cfg)
    fractions = {}
    for s in range(cfg.seeds):
        seed = cfg.seed + s
        res = affected_fraction_sweep(ds, cfg.rates, 0.9, WalkParams(cfg.r, cfg.l, seed), seed, cfg.workers)
        for rate, f in res.items():
            fractions.setdefault(rate, []).append(f)
    rows = [(rate, float(np.mean(v)), float(np.std(v)), len(v)) for rate, v in sorted(fractions.items())]
    header = ["dataset", "rate", "affected_fraction_mean", "affected_fraction_std", "seeds"]
    names = ["sweep.csv"] + (["plot_affected.csv"] if emit_plot_data else [])
    for name in names:
        with open(cfg.out_dir / name, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for row in rows:
                w.writerow([ds.name, *row])
    return {"dataset": ds.name, "fractions": {r: m for r, m, _, _ in rows}}


COMMANDS = {
    "walk": cmd_walk,
    "pairs": cmd_pairs,
    "train": cmd_train,
    "eval": cmd_eval,
    "stream": cmd_stream,
    "bias": cmd_bias,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value settings file")
    common.add_argument("--emit-plot-data", action="store_true", help="write tidy CSVs for plotting")
    for key, (typ, default, help_) in SETTINGS.items():
        common.add_argument("--" + key.replace("_", "-"), dest=key, type=typ, default=None,
                            help=f"{help_} (default {default})")
    parser = argparse.ArgumentParser(prog="dynwalk", description="Random-walk embeddings on evolving graphs.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=(fn.__doc__ or name).strip().splitlines()[0])
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        fn = COMMANDS[args.command]
        if args.command in ("stream", "sweep"):
            result = fn(cfg, emit_plot_data=args.emit_plot_data)
        else:
            result = fn(cfg)
    except InvariantViolation as e:
        print(f"dynwalk: invariant violated: {e}", file=sys.stderr)
        return 2
    except (DynwalkError, ValueError, KeyError, OSError) as e:
        print(f"dynwalk: error: {e}", file=sys.stderr)
        return 1
    print(json.dumps(result, default=str))
    return 0


if __name__ == "__main__":
    sys.exit(main())
