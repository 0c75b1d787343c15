from __future__ import annotations

import math

import numpy as np
import pytest

from umia_lab.attack import (
    AttackClassifier,
    BinaryMia,
    build_attack_training_set,
    derive_feature_matrix,
    derive_features,
    equal_triple,
    fit_gaussian,
    infer,
    make_shadow_runner,
    phi,
    train_attack,
    train_binary_mia,
    two_round_attack,
    two_round_decision,
    ulira_classify,
    ulira_classify_batch,
    ulira_fit,
    uleak_attack,
)
from umia_lab.core.config import FORGET, RETAIN, UNSEEN
from umia_lab.core.errors import ConfigurationError, DataError, ShapeError
from umia_lab.core.seeding import rng_for
from umia_lab.models import (
    AttackDataset,
    FeatureKind,
    FeatureMode,
    GaussianFit,
    ShadowRecords,
    TrainConfig,
    UliraFit,
)

P = np.array([0.7, 0.2, 0.1])
P_MINUS = np.array([0.5, 0.3, 0.2])


def test_cds_features():
    np.testing.assert_allclose(derive_features(P, P_MINUS, 0, FeatureMode(FeatureKind.CDS)), [0.2, 1.2])


def test_ct_features():
    np.testing.assert_array_equal(derive_features(P, P_MINUS, 0, FeatureMode(FeatureKind.CT)), [0.7, 0.5])


def test_label_only_features():
    np.testing.assert_array_equal(derive_features(P, P_MINUS, 0, FeatureMode(FeatureKind.LABEL_ONLY)), [1.0, 1.0])
    np.testing.assert_array_equal(derive_features(P, np.array([0.1, 0.8, 0.1]), 0, FeatureMode("LABEL_ONLY")), [1.0, 0.0])


def test_df_of_identical_models_is_zero():
    np.testing.assert_array_equal(derive_features(P, P, 1, FeatureMode(FeatureKind.DF)), [0.0])


def test_topk_and_rounded_features():
    np.testing.assert_allclose(derive_features(P, P_MINUS, 2, FeatureMode.parse("TOPK2")), [0.7, 0.2, 0.5, 0.3])
    np.testing.assert_allclose(
        derive_features(np.array([0.666, 0.334]), np.array([0.5, 0.5]), 0, FeatureMode.parse("ROUNDED1")), [0.7, 0.5]
    )


def test_feature_widths_for_every_class_count():
    expected = {"CP": lambda c: 2 * c, "CT": lambda c: 2, "DF": lambda c: 1, "SM": lambda c: 1, "CDS": lambda c: 2}
    rng = np.random.default_rng(0)
    for c in range(2, 101):
        probs = rng.dirichlet(np.ones(c), size=2)
        for label, width in expected.items():
            assert derive_features(probs[0], probs[1], c - 1, FeatureMode.parse(label)).shape == (width(c),)


def test_cds_inverts_to_ct():
    rng = np.random.default_rng(1)
    p_orig = rng.dirichlet(np.ones(5), size=200)
    p_unlearn = rng.dirichlet(np.ones(5), size=200)
    labels = rng.integers(0, 5, size=200)
    cds = derive_feature_matrix(p_orig, p_unlearn, labels, FeatureMode(FeatureKind.CDS))
    ct = derive_feature_matrix(p_orig, p_unlearn, labels, FeatureMode(FeatureKind.CT))
    recovered = np.stack([(cds[:, 1] + cds[:, 0]) / 2, (cds[:, 1] - cds[:, 0]) / 2], axis=1)
    np.testing.assert_allclose(recovered, ct, rtol=0, atol=1e-12)


def test_features_reject_label_out_of_range():
    with pytest.raises(DataError):
        derive_features(P, P_MINUS, 3, FeatureMode())


def test_feature_mode_labels_round_trip():
    for text in ("CP", "CT", "DF", "SM", "CDS", "LABEL_ONLY", "TOPK3", "ROUNDED2"):
        assert FeatureMode.parse(text).label() == text
    with pytest.raises(ConfigurationError):
        FeatureMode.parse("CDX")


def _clusters(n: int = 60) -> AttackDataset:
    rng = np.random.default_rng(2)
    centers = np.repeat([-3.0, 0.0, 3.0], n)
    features = (centers + rng.normal(0.0, 0.1, size=centers.size))[:, None]
    return AttackDataset(features=features, labels=np.repeat([UNSEEN, FORGET, RETAIN], n), feature_mode=FeatureMode("DF"))


def test_attack_separates_disjoint_clusters():
    attack_set = _clusters()
    cfg = TrainConfig(epochs=200, batch_size=64, learning_rate=0.01, weight_decay=0.0, seed=0)
    classifier = train_attack(attack_set, cfg)
    assert classifier.input_dim == 1
    predicted, _ = classifier.predict(attack_set.features)
    assert np.mean(predicted == attack_set.labels) >= 0.99


def test_attack_needs_every_class():
    attack_set = _clusters()
    keep = attack_set.labels != RETAIN
    partial = AttackDataset(
        features=attack_set.features[keep], labels=attack_set.labels[keep], feature_mode=attack_set.feature_mode
    )
    with pytest.raises(DataError):
        train_attack(partial)


def test_zero_classifier_answers_unseen(zero_model):
    classifier = AttackClassifier(model=zero_model((2, 32, 16, 3)), feature_mode=FeatureMode())
    label, triple = infer(classifier, P, P_MINUS, 0)
    assert label == UNSEEN
    assert math.isclose(triple.sum(), 1.0, abs_tol=1e-9)


def test_inference_checks_feature_width(zero_model):
    classifier = AttackClassifier(model=zero_model((2, 32, 16, 3)), feature_mode=FeatureMode())
    with pytest.raises(ShapeError):
        infer(classifier, P, P_MINUS, 0, mode=FeatureMode(FeatureKind.CP))


def test_two_round_rules():
    assert two_round_decision(0, 0) == UNSEEN
    assert two_round_decision(1, 0) == FORGET
    assert two_round_decision(1, 1) == RETAIN
    assert two_round_decision(0, 1) == UNSEEN
    with pytest.raises(DataError):
        two_round_decision(2, 0)


def _fixed_mia(zero_model, member: bool) -> BinaryMia:
    return BinaryMia(model=zero_model((3, 2), output_bias=(0.0, 1.0) if member else (1.0, 0.0)))


def test_two_round_attack_combines_verdicts(zero_model):
    member, outsider = _fixed_mia(zero_model, True), _fixed_mia(zero_model, False)
    assert two_round_attack(member, member, P, P_MINUS, 0) == RETAIN
    assert two_round_attack(member, outsider, P, P_MINUS, 0) == FORGET
    assert two_round_attack(outsider, member, P, P_MINUS, 0) == UNSEEN


def test_binary_mia_needs_both_labels():
    with pytest.raises(DataError):
        train_binary_mia(np.full((4, 3), 1 / 3), np.ones(4, dtype=int))


def _records(n: int = 30, classes: int = 4) -> ShadowRecords:
    rng = np.random.default_rng(3)
    return ShadowRecords(
        p_orig=rng.dirichlet(np.ones(classes), size=3 * n),
        p_unlearn=rng.dirichlet(np.ones(classes), size=3 * n),
        true_labels=rng.integers(0, classes, size=3 * n),
        membership=np.repeat([UNSEEN, FORGET, RETAIN], n),
    )


def test_uleak_uses_full_posteriors():
    cfg = TrainConfig(epochs=2, batch_size=32, learning_rate=0.01, weight_decay=0.0, seed=1)
    a = uleak_attack(_records(), cfg)
    assert a.input_dim == 8
    assert a.model.identical_to(uleak_attack(_records(), cfg).model)


def test_gaussian_fit_floors_degenerate_std():
    fit = fit_gaussian([0.0, 0.0, 0.0])
    assert fit.mean == 0.0
    assert fit.std == 1e-6


def test_gaussian_fit_uses_bessel_correction():
    fit = fit_gaussian([-1.0, 1.0])
    assert fit.mean == 0.0
    assert fit.std == pytest.approx(math.sqrt(2.0))


def test_gaussian_fit_needs_two_observations():
    with pytest.raises(ConfigurationError):
        fit_gaussian([1.0])


def _fit(forget=(-2.0, 1.0), unseen=(0.0, 1.0), retain=(2.0, 1.0)) -> UliraFit:
    return UliraFit(GaussianFit(*forget), GaussianFit(*unseen), GaussianFit(*retain), num_shadow=3)


def test_ulira_picks_dominant_density():
    fit = _fit()
    assert ulira_classify(fit, -2.0) == FORGET
    assert ulira_classify(fit, 0.1) == UNSEEN
    assert ulira_classify(fit, 2.5) == RETAIN


def test_ulira_ties_go_to_forget_first():
    same = _fit(forget=(0.0, 1.0), unseen=(0.0, 1.0), retain=(0.0, 1.0))
    assert ulira_classify(same, 0.7) == FORGET
    assert ulira_classify(_fit(), -1.0) == FORGET


def test_ulira_unseen_beats_retain_on_ties():
    fit = _fit(forget=(-10.0, 0.5), unseen=(1.0, 1.0), retain=(1.0, 1.0))
    assert ulira_classify(fit, 1.0) == UNSEEN


def test_ulira_far_tail_still_picks_nearest_class():
    assert ulira_classify(_fit(), 45.0) == RETAIN
    assert ulira_classify(_fit(), -45.0) == FORGET


def test_ulira_floored_std_fits_are_not_tied():
    fit = _fit(forget=(0.0, 1e-6), unseen=(0.01, 1e-6), retain=(0.02, 1e-6))
    assert ulira_classify(fit, 0.019) == RETAIN
    assert ulira_classify(fit, 0.011) == UNSEEN


def _density(o: np.ndarray, mean: float, std: float) -> np.ndarray:
    return np.exp(-((o - mean) ** 2) / (2 * std**2)) / (std * math.sqrt(2 * math.pi))


def test_ulira_agrees_with_maximum_density_rule():
    params = {FORGET: (-1.0, 0.8), UNSEEN: (0.0, 1.0), RETAIN: (1.5, 1.2)}
    fit = _fit(forget=params[FORGET], unseen=params[UNSEEN], retain=params[RETAIN])
    rng = np.random.default_rng(7)
    classes = rng.integers(0, 3, size=10_000)
    samples = np.array([rng.normal(*params[int(c)]) for c in classes])
    expected = []
    for o in samples:
        dens = {k: _density(np.array(o), *params[k]) for k in (FORGET, UNSEEN, RETAIN)}
        if dens[FORGET] >= max(dens[UNSEEN], dens[RETAIN]):
            expected.append(FORGET)
        elif dens[UNSEEN] >= dens[RETAIN]:
            expected.append(UNSEEN)
        else:
            expected.append(RETAIN)
    np.testing.assert_array_equal(ulira_classify_batch(fit, samples), expected)


def test_ulira_fit_is_seeded_and_parallel_safe():
    def runner(seed: int) -> tuple[float, float, float]:
        draws = rng_for(seed, "fake-trial").normal(size=3)
        return float(draws[0] - 1.0), float(draws[1]), float(draws[2] + 1.0)

    one = ulira_fit(runner, 8, seed=4)
    many = ulira_fit(runner, 8, seed=4, workers=4)
    assert one.to_dict() == many.to_dict()
    assert one.to_dict() != ulira_fit(runner, 8, seed=5).to_dict()


def test_ulira_fit_needs_two_trials():
    with pytest.raises(ConfigurationError):
        ulira_fit(lambda seed: (0.0, 0.0, 0.0), 1, seed=0)


def test_phi_is_clamped():
    values = phi(np.array([[1.0, 0.0], [0.0, 1.0]]), np.array([0, 0]))
    assert np.isfinite(values).all()
    assert values[0] == pytest.approx(math.log((1 - 1e-9) / 1e-9), rel=1e-6)


def test_shadow_trial_returns_three_finite_observations(blobs, quick_spec):
    observations = make_shadow_runner(blobs, quick_spec)(123)
    assert len(observations) == 3
    assert all(math.isfinite(o) for o in observations)


def test_attack_training_set_size(blobs, quick_spec):
    attack_set = build_attack_training_set(blobs, quick_spec, 1, seed=0, forget_fraction=0.05, train_fraction=0.8)
    # 96 shadow training examples, 5 forgotten
    assert attack_set.class_counts == (5, 5, 5)
    assert attack_set.features.shape == (15, 2)


def test_attack_training_set_is_worker_independent(blobs, quick_spec):
    kwargs = {"forget_fraction": 0.05, "train_fraction": 0.8}
    serial = build_attack_training_set(blobs, quick_spec, 2, seed=1, **kwargs)
    parallel = build_attack_training_set(blobs, quick_spec, 2, seed=1, workers=2, **kwargs)
    np.testing.assert_array_equal(serial.features, parallel.features)
    np.testing.assert_array_equal(serial.labels, parallel.labels)
    assert len(serial) == 30


def test_attack_training_set_needs_repetitions(blobs, quick_spec):
    with pytest.raises(ConfigurationError):
        build_attack_training_set(blobs, quick_spec, 0, seed=0)


def test_equal_triple_checks_pool_sizes(split):
    with pytest.raises(ConfigurationError):
        equal_triple(split, seed=0, size=split.unseen.size + 1)
    assert equal_triple(split, seed=0).sizes == (9, 9, 9)
