from __future__ import annotations

import numpy as np
import pytest

from umia_lab.core.errors import ConfigurationError, DataError
from umia_lab.models import MembershipSplit, ModelParams, SisaModel, TrainConfig, UnlearnConfig
from umia_lab.nn import cross_entropy, init_model, loss_and_gradients, train
from umia_lab.unlearn import (
    assign_shards,
    fresh_model,
    gradient_ascent_unlearn,
    load_sisa,
    prune_masks,
    retrain,
    save_sisa,
    scrub_kl,
    scrub_unlearn,
    shard_seed,
    sisa_predict,
    sisa_train,
    sisa_unlearn,
    sparsity_unlearn,
    train_original,
)


def test_retrain_equals_training_on_retain(blobs, split, arch, quick_cfg):
    expected = train(fresh_model(arch, blobs, quick_cfg.seed), blobs.subset(split.retain), quick_cfg)
    assert retrain(split, blobs, quick_cfg, arch).identical_to(expected)


def test_retrain_with_nothing_forgotten_equals_original(blobs, split, arch, quick_cfg):
    nothing = MembershipSplit(train=split.train, test=split.test, forget=[], retain=split.train, unseen=split.unseen)
    assert retrain(nothing, blobs, quick_cfg, arch).identical_to(train_original(nothing, blobs, quick_cfg, arch))


def test_retrain_needs_a_retain_set(blobs, split, quick_cfg):
    everything = MembershipSplit(train=split.train, test=split.test, forget=split.train, retain=[], unseen=split.unseen)
    with pytest.raises(DataError):
        retrain(everything, blobs, quick_cfg)


def test_round_robin_shards_are_even():
    assignment = assign_shards(np.arange(800), 4, seed=3)
    assert np.bincount(list(assignment.values())).tolist() == [200, 200, 200, 200]
    assert assign_shards(np.arange(800), 4, seed=3) == assignment


def test_single_shard_is_plain_training(blobs, split, arch, quick_cfg):
    model = sisa_train(blobs, split, 1, quick_cfg, arch)
    seed = shard_seed(quick_cfg.seed, 0)
    expected = train(
        init_model(arch.layer_sizes(blobs.dim, blobs.num_classes), arch.activation, seed),
        blobs.subset(split.train),
        quick_cfg.with_seed(seed),
    )
    assert model.shard_models[0].identical_to(expected)


def test_sisa_training_is_deterministic(blobs, split, arch, quick_cfg):
    a = sisa_train(blobs, split, 3, quick_cfg, arch)
    b = sisa_train(blobs, split, 3, quick_cfg, arch, workers=3)
    assert a.identical_to(b)


def test_too_many_shards(blobs, split, quick_cfg):
    with pytest.raises(ConfigurationError):
        sisa_train(blobs, split, split.train.size + 1, quick_cfg)


def test_sisa_unlearning_touches_only_affected_shard(blobs, split, arch, quick_cfg):
    model = sisa_train(blobs, split, 4, quick_cfg, arch)
    forget = model.shard_members(2)[:3]
    after = sisa_unlearn(model, blobs, forget)
    for shard in (0, 1, 3):
        assert after.shard_models[shard].identical_to(model.shard_models[shard])
    assert not after.shard_models[2].identical_to(model.shard_models[2])
    assert set(forget.tolist()).isdisjoint(after.shard_assignment)


def test_sisa_unlearning_nothing_is_identity(blobs, split, arch, quick_cfg):
    model = sisa_train(blobs, split, 2, quick_cfg, arch)
    assert sisa_unlearn(model, blobs, np.array([], dtype=np.int64)).identical_to(model)


def test_sisa_unlearning_everywhere_equals_training_without_forget(blobs, split, arch, quick_cfg):
    model = sisa_train(blobs, split, 3, quick_cfg, arch)
    forget = np.array([model.shard_members(s)[0] for s in range(3)])
    after = sisa_unlearn(model, blobs, forget)
    retain = np.setdiff1d(split.train, forget)
    reduced = MembershipSplit(train=retain, test=split.test, forget=[], retain=retain, unseen=split.unseen)
    assignment = {i: s for i, s in model.shard_assignment.items() if i not in set(forget.tolist())}
    assert after.identical_to(sisa_train(blobs, reduced, 3, quick_cfg, arch, assignment=assignment))


def test_sisa_rejects_unknown_forget_index(blobs, split, arch, quick_cfg):
    model = sisa_train(blobs, split, 2, quick_cfg, arch)
    with pytest.raises(ConfigurationError):
        sisa_unlearn(model, blobs, split.test[:1])


def test_sisa_posterior_is_shard_mean(zero_model):
    left = zero_model((1, 2), output_bias=(30.0, -30.0))
    right = zero_model((1, 2), output_bias=(-30.0, 30.0))
    model = SisaModel(shard_assignment={0: 0, 1: 1}, shard_models=(left, right), num_shards=2, train_cfg=TrainConfig())
    np.testing.assert_allclose(sisa_predict(model, np.array([0.0])), [0.5, 0.5], atol=1e-12)


def test_sisa_directory_round_trip(tmp_path, blobs, split, arch, quick_cfg):
    model = sisa_train(blobs, split, 2, quick_cfg, arch)
    loaded = load_sisa(save_sisa(model, tmp_path / "sisa"))
    assert loaded.identical_to(model)
    assert loaded.train_cfg == model.train_cfg


def test_zero_ascent_steps_is_identity(blobs, split):
    params = init_model([4, 8, 3], "relu", 0)
    assert gradient_ascent_unlearn(params, blobs, split.forget, 0, 0.01) is params


def test_ascent_raises_forget_loss(blobs, split, arch, quick_cfg):
    params = train_original(split, blobs, quick_cfg, arch)
    x, y = blobs.features[split.forget], blobs.labels[split.forget]
    after = gradient_ascent_unlearn(params, blobs, split.forget, 10, 1e-3)
    assert cross_entropy(after, x, y) > cross_entropy(params, x, y)


def test_ascent_raises_forget_loss_across_random_trials(blobs):
    raised = 0
    for trial in range(10):
        params = init_model([4, 8, 3], "relu", trial)
        forget = np.random.default_rng(trial).choice(len(blobs), size=8, replace=False)
        x, y = blobs.features[forget], blobs.labels[forget]
        after = gradient_ascent_unlearn(params, blobs, forget, 10, 1e-3)
        raised += cross_entropy(after, x, y) >= cross_entropy(params, x, y)
    assert raised >= 9


def test_ascent_then_descent_is_not_identity(blobs, split):
    params = init_model([4, 8, 3], "tanh", 6)
    lr = 0.05
    up = gradient_ascent_unlearn(params, blobs, split.forget, 1, lr)
    _, grads = loss_and_gradients(up, blobs.features[split.forget], blobs.labels[split.forget])
    down = up.with_arrays(
        [w - lr * g for w, g in zip(up.weights, grads.weights)],
        [b - lr * g for b, g in zip(up.biases, grads.biases)],
    )
    assert np.linalg.norm(down.flat_weights() - params.flat_weights()) > 0


def test_ascent_needs_forget_examples(blobs):
    with pytest.raises(DataError):
        gradient_ascent_unlearn(init_model([4, 3], "relu", 0), blobs, np.array([], dtype=np.int64), 1, 0.1)


def test_no_pruning_no_finetune_is_identity(blobs, split, quick_cfg):
    params = init_model([4, 8, 3], "relu", 0)
    assert sparsity_unlearn(params, blobs, split, 0.0, 0, quick_cfg).identical_to(params)


def test_half_pruning_zeroes_smallest_weights():
    params = init_model([5, 10, 5], "relu", 8)
    assert params.num_weights == 100
    masks = prune_masks(params, 0.5)
    flat_mask = np.concatenate([m.ravel() for m in masks])
    assert int((flat_mask == 0).sum()) == 50
    smallest = np.argsort(np.abs(params.flat_weights()), kind="stable")[:50]
    assert np.all(flat_mask[smallest] == 0)


def test_pruning_ties_follow_flat_index_order():
    params = ModelParams(
        layer_sizes=(2, 2),
        weights=(np.array([[1.0, -1.0], [1.0, 2.0]]),),
        biases=(np.zeros(2),),
    )
    (mask,) = prune_masks(params, 0.5)
    np.testing.assert_array_equal(mask, [[0.0, 0.0], [1.0, 1.0]])


def test_pruned_weights_stay_zero_through_finetuning(blobs, split, quick_cfg):
    params = init_model([4, 8, 3], "relu", 0)
    masks = prune_masks(params, 0.6)
    out = sparsity_unlearn(params, blobs, split, 0.6, 2, quick_cfg)
    for weight, mask in zip(out.weights, masks):
        assert np.all(weight[mask == 0] == 0.0)


def test_prune_ratio_out_of_range():
    with pytest.raises(ConfigurationError):
        prune_masks(init_model([2, 2], "relu", 0), 1.5)


def test_scrub_without_epochs_returns_teacher(blobs, split):
    teacher = init_model([4, 8, 3], "relu", 0)
    cfg = UnlearnConfig(method="scrub", scrub_max_epochs=0, scrub_min_epochs=0)
    assert scrub_unlearn(teacher, blobs, split, cfg).identical_to(teacher)


def test_softened_kl_vanishes_at_huge_temperature(blobs):
    student = init_model([4, 8, 3], "relu", 1)
    teacher = init_model([4, 8, 3], "relu", 2)
    assert scrub_kl(student, teacher, blobs.features, 1e6).max() < 1e-6


def test_scrub_moves_student_away_on_forget(blobs, split, arch, quick_cfg):
    teacher = train_original(split, blobs, quick_cfg, arch)
    cfg = UnlearnConfig(method="scrub", scrub_max_epochs=3, scrub_min_epochs=0, scrub_lr=0.01)
    student = scrub_unlearn(teacher, blobs, split, cfg, quick_cfg)
    assert not student.identical_to(teacher)
    assert scrub_kl(student, teacher, blobs.features[split.forget], cfg.scrub_temperature).mean() > 0


def test_scrub_needs_both_sets(blobs, split):
    teacher = init_model([4, 8, 3], "relu", 0)
    nothing = MembershipSplit(train=split.train, test=split.test, forget=[], retain=split.train, unseen=split.unseen)
    with pytest.raises(DataError):
        scrub_unlearn(teacher, blobs, nothing, UnlearnConfig(method="scrub"))
