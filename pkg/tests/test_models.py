import math

import numpy as np
import pytest

from app.core.exceptions import CurveMismatchError, ModelError
from app.core.graph import Graph
from app.diff import Tensor, grad_check, ops, save_checkpoint
from app.models import NRLGT, ClassicalAttentionLayer, DegreeCentralityEncoder, GraphView, GTLayer
from app.models.gt_layer import InnerHead, attention_rows
from app.models.heads import CurveHead, feasible_floor
from app.models.losses import (
    LossConfig,
    class_loss,
    gradnorm_update,
    rc_loss,
    rmse_loss,
    rmse_weights,
    step1_loss,
    step2_loss,
)
from app.schemas.attack import CurveKind
from app.schemas.model import ModelManifest
from tests.conftest import random_graph


def small_manifest(**overrides) -> ModelManifest:
    values = dict(d=4, layers=1, inner_heads=2, outer_heads=2, curve_size=6, max_degree=8, seed=3)
    values.update(overrides)
    return ModelManifest(**values)


def test_view_lists_every_message_once(six_node_graph):
    view = GraphView.from_graph(six_node_graph)
    assert view.n == view.n_real == 6
    assert view.n_messages == 6 + 7
    assert list(view.tgt) == sorted(view.tgt)
    virtual = view.with_virtual_node()
    assert virtual.n == 7 and virtual.n_real == 6
    assert virtual.n_messages == view.n_messages + 1 + 2 * 6


def test_view_skips_removed_nodes(path5):
    path5.remove_node(2)
    view = GraphView.from_graph(path5)
    assert view.n == 4
    assert view.n_messages == 4 + 2 * 2


def test_encoder_shapes_and_shared_rows():
    cycle = Graph.from_edges(5, [(i, (i + 1) % 5) for i in range(5)], directed=True)
    encoder = DegreeCentralityEncoder(np.random.default_rng(0), d=10)
    h = encoder(GraphView.from_graph(cycle))
    assert h.shape == (5, 10)
    assert np.all(h.data == h.data[0])


def test_encoder_clamps_large_degrees(directed_star):
    encoder = DegreeCentralityEncoder(np.random.default_rng(0), d=4, max_degree=2)
    h = encoder(GraphView.from_graph(directed_star))
    assert np.array_equal(h.data[0, 2:], encoder.table_out.data[2])
    assert np.array_equal(h.data[1, :2], encoder.table_in.data[1])


def test_encoder_width_must_be_even():
    with pytest.raises(ModelError):
        DegreeCentralityEncoder(np.random.default_rng(0), d=5)


def test_zero_queries_reduce_attention_to_a_neighborhood_mean(rng):
    g = random_graph(rng, 12, 0.25, directed=True)
    view = GraphView.from_graph(g)
    head = InnerHead(np.random.default_rng(1), d=4, dk=2)
    head.linear_Q.data[:] = 0.0
    head.linear_K.data[:] = 0.0
    head.W_e.data = np.eye(2)
    head.W_v.data = np.eye(2)
    h = rng.normal(size=(12, 4))
    out = head(Tensor(h), view).data

    values = h @ head.linear_V.data
    for i in range(12):
        members = [i] + list(g.in_neighbors(i))
        assert out[i] == pytest.approx(values[members].mean(axis=0), abs=1e-10)


@pytest.mark.parametrize("layer_cls", [GTLayer, ClassicalAttentionLayer])
def test_attention_normalizes_per_target(rng, layer_cls):
    g = random_graph(rng, 10, 0.3, directed=False)
    view = GraphView.from_graph(g)
    layer = layer_cls(np.random.default_rng(2), 4, inner_heads=2)
    for alpha in attention_rows(layer, Tensor(rng.normal(size=(10, 4))), view):
        totals = np.bincount(view.tgt, weights=alpha, minlength=view.n)
        assert totals == pytest.approx(np.ones(10))


@pytest.mark.parametrize("directed", [True, False])
def test_gt_layer_is_permutation_equivariant(rng, directed):
    g = random_graph(rng, 9, 0.3, directed)
    perm = rng.permutation(9)
    layer = GTLayer(np.random.default_rng(4), 4, inner_heads=2, outer_heads=3)
    h = rng.normal(size=(9, 4))
    h_perm = np.empty_like(h)
    h_perm[perm] = h

    out = layer(Tensor(h), GraphView.from_graph(g)).data
    out_perm = layer(Tensor(h_perm), GraphView.from_graph(g.relabeled(perm.tolist()))).data
    assert np.allclose(out_perm[perm], out, atol=1e-10)


def test_class_argmax_is_permutation_invariant(rng):
    model = NRLGT(small_manifest())
    g = random_graph(rng, 8, 0.3, directed=True)
    perm = rng.permutation(8).tolist()
    first = model.predict(g)
    second = model.predict(g.relabeled(perm))
    assert first.label == second.label
    assert first.probabilities == pytest.approx(second.probabilities, abs=1e-10)
    assert first.rc == pytest.approx(second.rc, abs=1e-10)


def test_outputs_ignore_edge_weights(six_node_graph):
    model = NRLGT(small_manifest())
    weighted = six_node_graph.with_weights([0.5, 1.25, 3.0, 0.75, 2.0, 1.5, 0.6])
    assert model.predict(six_node_graph) == model.predict(weighted)


@pytest.mark.parametrize("kind", list(CurveKind))
def test_curve_respects_feasibility_bounds(rng, kind):
    model = NRLGT(small_manifest(curve_size=12, curve_kind=kind))
    for _ in range(5):
        g = random_graph(rng, 12, 0.2, directed=True)
        main, branch = model.curve(GraphView.from_graph(g))
        assert main.shape == branch.shape == (11,)
        floor = feasible_floor(12)
        assert np.all(main.data >= floor - 1e-12)
        assert np.all(main.data <= 1.0 + 1e-12)
        assert main.data[-1] == 1.0


def test_curve_head_dimensions():
    head = CurveHead(np.random.default_rng(0), 1000, CurveKind.CONTROLLABILITY, 10)
    assert head.proj_in.weight.shape == (10, 2)
    assert head.proj_out.weight.shape == (2, 1)
    assert head.mlp_branch.weight.shape == (1000, 999)
    assert head.mlp_main.weight.shape == (3000, 999)


def test_curve_head_rejects_other_sizes(path5):
    model = NRLGT(small_manifest())
    with pytest.raises(ModelError):
        model.curve(GraphView.from_graph(path5))
    assert model.predict(path5).curve is None


def test_rc_and_class_heads_are_size_agnostic(rng):
    model = NRLGT(small_manifest())
    for n in (3, 6, 20):
        view = GraphView.from_graph(random_graph(rng, n, 0.3, directed=True))
        rc = model.rc(view)
        assert rc.shape == ()
        assert 0.0 < rc.item() < 1.0
        probs = model.classify(view)
        assert probs.shape == (5,)
        assert probs.data.sum() == pytest.approx(1.0)


def test_classical_aggregator_builds(six_node_graph):
    model = NRLGT(small_manifest(aggregator="classical"))
    assert isinstance(model.backbone[0], ClassicalAttentionLayer)
    prediction = model.predict(six_node_graph)
    assert len(prediction.curve) == 5


def test_full_model_gradients_match_finite_differences(six_node_graph):
    model = NRLGT(small_manifest())
    view = GraphView.from_graph(six_node_graph)
    truth = [0.6, 0.5, 0.6, 0.7, 1.0]

    def closure():
        main, branch = model.curve(view)
        total = step1_loss(main, branch, truth)
        total = ops.add(total, class_loss(model.classify(view), 2))
        return ops.add(total, rc_loss(model.rc(view), 0.4))

    report = grad_check(closure, model.named_parameters(), tol=1e-4, max_checks=4, seed=1)
    assert report.passed, report.failures()


def test_rmse_weights_and_loss():
    assert rmse_weights(4).tolist() == [2.0, 2.0, 1.0, 1.0]
    truth = np.array([0.5, 0.4, 0.3, 0.2])
    loss = rmse_loss(Tensor(truth + 0.1), truth)
    assert loss.item() == pytest.approx(0.015)
    with pytest.raises(CurveMismatchError):
        rmse_loss(Tensor(np.ones(3)), truth)


def test_step1_loss_adds_weighted_branch():
    truth = np.array([0.5, 0.4, 0.3, 0.2])
    loss = step1_loss(Tensor(truth + 0.1), Tensor(truth), truth, rho=0.5)
    assert loss.item() == pytest.approx(0.015)
    loss = step1_loss(Tensor(truth), Tensor(truth + 0.1), truth, rho=0.5)
    assert loss.item() == pytest.approx(0.0075)


def test_class_and_rc_losses():
    assert class_loss(Tensor(np.full(5, 0.2)), 3).item() == pytest.approx(math.log(5))
    assert rc_loss(Tensor(np.array(0.7)), 0.4).item() == pytest.approx(0.09)
    cfg = LossConfig(w_c=0.5, w_r=1.5)
    total = step2_loss(Tensor(np.array(2.0)), Tensor(np.array(1.0)), cfg)
    assert total.item() == pytest.approx(2.5)


def test_gradnorm_fixed_point():
    cfg = LossConfig()
    assert gradnorm_update((1.0, 1.0), (0.8, 0.8), cfg) == (1.0, 1.0)
    assert gradnorm_update((1.0, 1.0), (0.4, 0.4), cfg) == (1.0, 1.0)
    assert cfg.initial_losses == (0.8, 0.8)


def test_gradnorm_shrinks_the_dominant_task():
    cfg = LossConfig()
    w_c, w_r = gradnorm_update((10.0, 1.0), (1.0, 1.0), cfg)
    assert w_c < 1.0 < w_r
    assert w_c + w_r == pytest.approx(2.0)


def test_resize_curve_head_keeps_features(rng):
    model = NRLGT(small_manifest())
    features = model.feature_hash()
    model.resize_curve_head(8)
    assert model.manifest.curve_size == 8
    assert model.feature_hash() == features
    main, _ = model.curve(GraphView.from_graph(random_graph(rng, 8, 0.3, directed=True)))
    assert main.shape == (7,)


def test_freeze_features_only_touches_the_shared_extractor():
    model = NRLGT(small_manifest())
    model.freeze_features()
    trainable = [name for name, _ in model.trainable()]
    assert trainable
    assert not any(name.startswith(("encoder.", "backbone.")) for name in trainable)


def test_checkpoint_round_trip(tmp_path, six_node_graph):
    model = NRLGT(small_manifest(curve_kind=CurveKind.CONNECTIVITY))
    path = tmp_path / "model.ckpt"
    model.save(path)
    loaded = NRLGT.load(path)
    assert loaded.manifest == model.manifest
    assert loaded.parameter_hash() == model.parameter_hash()
    assert loaded.predict(six_node_graph) == model.predict(six_node_graph)


def test_load_rejects_foreign_manifest(tmp_path):
    path = tmp_path / "other.ckpt"
    save_checkpoint(path, {"w": np.ones(2)}, {"d": "wide"})
    with pytest.raises(ModelError):
        NRLGT.load(path)
