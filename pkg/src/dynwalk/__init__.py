"""Random-walk graph embeddings kept up to date as the graph changes."""

from .embed import EmbeddingTable, TrainConfig, train_full, train_warm_start
from .datasets import Dataset, load_dataset
from .evaluation import LabelSet, evaluate, macro_f1
from .graph import DynamicGraph, GraphDelta, affected_vertices, apply_delta, largest_connected_component
from .pairs import PairCorpus, bias_report, generate_pairs
from .stream import SnapshotSchedule, affected_fraction_sweep, build_schedule, run_stream
from .walks import WalkCorpus, WalkParams, static_all, update_corpus

__version__ = "0.1.0"
