import numpy as np
import pytest
from scipy.stats import chisquare

from dynwalk.embed import (
    EmbeddingTable,
    NoiseDistribution,
    TrainConfig,
    build_noise_distribution,
    init_embeddings,
    negative_sampling_step,
    pair_loss,
    softmax_prob,
    target_counts_from_walks,
    train_full,
    train_warm_start,
)
from dynwalk.errors import MissingVertex, UnknownVertex
from dynwalk.graph import DynamicGraph
from dynwalk.pairs import PairCorpus, generate_pairs, pairs_from_walks
from dynwalk.walks import WalkParams, static_all


def random_table(n, dim, seed):
    g = np.random.default_rng(seed)
    return EmbeddingTable(np.arange(n), g.normal(0, 0.5, (n, dim)), g.normal(0, 0.5, (n, dim)))


def fd_grad(fn, arr, eps=1e-6):
    grad = np.zeros_like(arr)
    for idx in np.ndindex(arr.shape):
        old = arr[idx]
        arr[idx] = old + eps
        hi = fn()
        arr[idx] = old - eps
        lo = fn()
        arr[idx] = old
        grad[idx] = (hi - lo) / (2 * eps)
    return grad


@pytest.mark.parametrize("negs", [[3, 4, 5], [2, 2, 5], [0, 3, 1]])
def test_sgns_step_matches_finite_differences(negs):
    # includes a repeated negative, the context as a negative and the target as a negative
    t, c = 0, 2
    table = random_table(6, 7, 1)
    cfg = TrainConfig(negatives_per_pair=3, dim=7)
    noise = NoiseDistribution(np.arange(6), np.ones(6))

    def loss():
        return pair_loss(table, t, c, negs)

    g_in = fd_grad(loss, table.input)
    g_out = fd_grad(loss, table.output)
    before_in, before_out = table.input.copy(), table.output.copy()
    lr = 1e-3
    _, mean_loss = negative_sampling_step([(t, c)], table, cfg, noise, negatives=[negs], learning_rate=lr)
    step_in = (before_in - table.input) / lr
    step_out = (before_out - table.output) / lr
    assert mean_loss == pytest.approx(pair_loss(EmbeddingTable(np.arange(6), before_in, before_out), t, c, negs))
    for analytic, numeric in ((step_in, g_in), (step_out, g_out)):
        rel = np.linalg.norm(analytic - numeric) / max(np.linalg.norm(numeric), 1e-12)
        assert rel <= 1e-4


def test_step_reduces_pair_loss():
    table = random_table(5, 4, 2)
    cfg = TrainConfig(negatives_per_pair=2, dim=4)
    noise = NoiseDistribution(np.arange(5), np.ones(5))
    before = pair_loss(table, 1, 2, [3, 4])
    negative_sampling_step([(1, 2)], table, cfg, noise, negatives=[[3, 4]], learning_rate=0.05)
    assert pair_loss(table, 1, 2, [3, 4]) < before


def test_noise_distribution_probabilities():
    nd = NoiseDistribution([0, 1, 2, 3], [16, 1, 0, 81], exponent=0.75)
    w = np.array([16 ** 0.75, 1.0, 81 ** 0.75])
    assert nd.vertices.tolist() == [0, 1, 3]
    np.testing.assert_allclose(nd.probabilities, w / w.sum())
    draws = nd.sample(100_000, seed=4)
    counts = np.array([np.sum(draws == v) for v in (0, 1, 3)])
    assert chisquare(counts, nd.probabilities * counts.sum()).pvalue > 1e-3


def test_target_counts_match_pair_corpus(planted):
    corpus = static_all(planted.graph, WalkParams(3, 9, 5))
    for p in (1, 3, 8, 20):
        verts, counts = target_counts_from_walks(corpus, p)
        pc = generate_pairs(corpus, p)
        uv, uc = np.unique(pc.targets, return_counts=True)
        assert np.array_equal(verts, uv)
        assert np.array_equal(counts.astype(np.int64), uc)


def test_train_full_deterministic(planted):
    corpus = static_all(planted.graph, WalkParams(2, 6, 1))
    pairs = generate_pairs(corpus, 3)
    cfg = TrainConfig(dim=16, epochs=2, rng_seed=3)
    a = train_full(pairs, planted.graph.adjacency, cfg)
    b = train_full(pairs, planted.graph.adjacency, cfg)
    assert np.array_equal(a.input, b.input) and np.array_equal(a.output, b.output)
    assert len(a.losses) == 2 and a.losses[1] < a.losses[0]
    c = train_full(pairs, planted.graph.adjacency, TrainConfig(dim=16, epochs=2, rng_seed=4))
    assert not np.array_equal(a.input, c.input)


def test_parallel_training_finite(planted):
    corpus = static_all(planted.graph, WalkParams(2, 6, 1))
    pairs = generate_pairs(corpus, 3)
    t = train_full(pairs, planted.graph.adjacency, TrainConfig(dim=16, epochs=1, workers=2, batch_size=64))
    assert t.finite()


def test_two_cliques_separate():
    # two disjoint 2-cliques
    g = DynamicGraph(range(4), [(0, 1), (2, 3)])
    pairs = generate_pairs(static_all(g, WalkParams(200, 10, 0)), 4)
    t = train_full(pairs, range(4), TrainConfig(dim=8, epochs=5, rng_seed=1))
    z = t.input
    intra = min(z[0] @ z[1], z[2] @ z[3])
    inter = max(z[0] @ z[2], z[0] @ z[3], z[1] @ z[2], z[1] @ z[3])
    assert intra > inter


def test_warm_start_only_moves_trained_rows():
    prev = random_table(5, 4, 3)
    pairs = PairCorpus(np.array([0, 5, 0]), np.array([5, 0, 1]), 1)
    cfg = TrainConfig(dim=4, epochs=1, negatives_per_pair=2)
    noise = NoiseDistribution(np.arange(6), np.ones(6))
    new = train_warm_start(prev, [5], pairs, cfg, noise)
    assert 5 in new and len(new) == 6
    # vertices never a target keep their input vectors
    for v in (1, 2, 3, 4):
        assert np.array_equal(new.vector(v), prev.vector(v))
    assert not np.array_equal(new.vector(0), prev.vector(0))
    # the previous table is untouched
    assert 5 not in prev


def test_warm_start_missing_vertex():
    prev = random_table(3, 4, 3)
    pairs = PairCorpus(np.array([0]), np.array([9]), 1)
    with pytest.raises(MissingVertex):
        train_warm_start(prev, [], pairs, TrainConfig(dim=4))


def test_warm_start_noise_filtered_to_table():
    prev = random_table(3, 4, 3)
    pairs = PairCorpus(np.array([0, 1]), np.array([1, 2]), 1)
    noise = NoiseDistribution(np.arange(10), np.ones(10))
    new = train_warm_start(prev, [], pairs, TrainConfig(dim=4, epochs=1), noise)
    assert new.finite()


def test_embedding_io_roundtrip(tmp_path):
    t = init_embeddings([4, 1, 7], 5, seed=2)
    t.save_text(tmp_path / "e.txt")
    back = EmbeddingTable.load_text(tmp_path / "e.txt")
    assert back.ids.tolist() == [1, 4, 7]
    np.testing.assert_allclose(back.matrix([1, 4, 7]), t.matrix([1, 4, 7]), rtol=1e-5)
    t.save_npz(tmp_path / "e.npz")
    back = EmbeddingTable.load_npz(tmp_path / "e.npz")
    assert np.array_equal(back.input, t.input) and np.array_equal(back.output, t.output)


def test_init_and_lookup():
    t = init_embeddings(range(4), 10, seed=0)
    assert np.abs(t.input).max() <= 0.05
    assert not t.output.any()
    with pytest.raises(UnknownVertex):
        t.vector(12)


def test_softmax_prob_normalised():
    t = random_table(4, 3, 5)
    assert sum(softmax_prob(0, c, t) for c in range(4)) == pytest.approx(1.0)


def test_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(learning_rate=0)
    with pytest.raises(ValueError):
        TrainConfig(negatives_per_pair=0)


def test_noise_from_walk_corpus_matches_pairs(planted):
    corpus = static_all(planted.graph, WalkParams(2, 7, 2))
    a = build_noise_distribution(corpus, window=3).as_dict()
    b = build_noise_distribution(generate_pairs(corpus, 3)).as_dict()
    assert a.keys() == b.keys()
    for k in a:
        assert a[k] == pytest.approx(b[k])
