"""Unlearning algorithms."""

from .gradient_ascent import gradient_ascent_unlearn
from .retrain import fresh_model, retrain, train_original
from .scrub import scrub_kl, scrub_unlearn, softened_kl
from .sisa import assign_shards, load_sisa, save_sisa, shard_seed, sisa_predict, sisa_train, sisa_unlearn
from .sparsity import prune_masks, sparsity_unlearn

__all__ = [
    "assign_shards",
    "fresh_model",
    "gradient_ascent_unlearn",
    "load_sisa",
    "prune_masks",
    "retrain",
    "save_sisa",
    "scrub_kl",
    "scrub_unlearn",
    "shard_seed",
    "sisa_predict",
    "sisa_train",
    "sisa_unlearn",
    "softened_kl",
    "sparsity_unlearn",
    "train_original",
]
