"""Datasets, membership splits and their file formats."""

from .generation import (
    balance_ratio_sample,
    ceil_count,
    floor_count,
    generate_blobs,
    inject_outliers,
    make_membership_split,
    split_target_shadow,
)
from .io import (
    attack_set_from_csv,
    attack_set_to_csv,
    dataset_from_csv,
    dataset_from_npz,
    dataset_to_csv,
    dataset_to_npz,
    split_from_json,
    split_to_json,
)
from .selection import ForgetStrategy, rank_indices, select_forget

__all__ = [
    "ForgetStrategy",
    "attack_set_from_csv",
    "attack_set_to_csv",
    "balance_ratio_sample",
    "ceil_count",
    "dataset_from_csv",
    "dataset_from_npz",
    "dataset_to_csv",
    "dataset_to_npz",
    "floor_count",
    "generate_blobs",
    "inject_outliers",
    "make_membership_split",
    "rank_indices",
    "select_forget",
    "split_from_json",
    "split_to_json",
]
