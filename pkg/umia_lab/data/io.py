"""File formats for datasets, membership splits and attack sets."""

from __future__ import annotations

import json
import logging
from pathlib import Path

import numpy as np
import pandas as pd

from umia_lab.core.config import ENCODING_HEADER, ENCODING_LEGEND, OUTPUT
from umia_lab.core.errors import DataError
from umia_lab.models import AttackDataset, Dataset, FeatureMode, MembershipSplit


logger = logging.getLogger(__name__)


def dataset_to_csv(data: Dataset, path: Path | str) -> Path:
    """Header ``f0,...,f{d-1},label``; floats written with round-trip precision."""

    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(data.features, columns=[f"f{i}" for i in range(data.dim)])
    frame["label"] = data.labels
    frame.to_csv(target, index=False, float_format=OUTPUT.float_format)
    return target


def dataset_from_csv(path: Path | str, name: str | None = None, num_classes: int = 0) -> Dataset:
    source = Path(path)
    frame = pd.read_csv(source, float_precision="round_trip")
    if "label" not in frame.columns:
        raise DataError(f"{source} has no 'label' column")
    feature_cols = [c for c in frame.columns if c != "label"]
    expected = [f"f{i}" for i in range(len(feature_cols))]
    if feature_cols != expected:
        raise DataError(f"{source} feature columns must be {expected[:3]}..., got {feature_cols[:3]}...")
    return Dataset(
        features=frame[feature_cols].to_numpy(dtype=np.float64),
        labels=frame["label"].to_numpy(),
        name=name or source.stem,
        num_classes=num_classes,
    )


def dataset_to_npz(data: Dataset, path: Path | str) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("wb") as handle:
        np.savez_compressed(
            handle,
            features=data.features,
            labels=data.labels,
            num_classes=np.int64(data.num_classes),
            seed_of_origin=np.uint64(data.seed_of_origin),
            name=np.array(data.name),
        )
    return target


def dataset_from_npz(path: Path | str) -> Dataset:
    with np.load(Path(path), allow_pickle=False) as archive:
        return Dataset(
            features=archive["features"],
            labels=archive["labels"],
            name=str(archive["name"]),
            seed_of_origin=int(archive["seed_of_origin"]),
            num_classes=int(archive["num_classes"]),
        )


def split_to_json(split: MembershipSplit, path: Path | str) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    payload = {"encoding": {str(k): v for k, v in ENCODING_LEGEND.items()}, **split.to_dict()}
    target.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return target


def split_from_json(path: Path | str) -> MembershipSplit:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    try:
        return MembershipSplit(**{key: payload[key] for key in ("train", "test", "forget", "retain", "unseen")})
    except KeyError as exc:
        raise DataError(f"split file {path} is missing '{exc.args[0]}'") from exc


def attack_set_to_csv(attack_set: AttackDataset, path: Path | str) -> Path:
    """One comment line ``# mode=...;encoding=...`` then ``x0,...,label`` rows."""

    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(attack_set.features, columns=[f"x{i}" for i in range(attack_set.features.shape[1])])
    frame["label"] = attack_set.labels
    with target.open("w", encoding="utf-8", newline="") as handle:
        handle.write(f"# mode={attack_set.feature_mode.label()};{ENCODING_HEADER}\n")
        frame.to_csv(handle, index=False, float_format=OUTPUT.float_format)
    return target


def attack_set_from_csv(path: Path | str) -> AttackDataset:
    source = Path(path)
    with source.open("r", encoding="utf-8") as handle:
        header = handle.readline().strip()
    if not header.startswith("# mode="):
        raise DataError(f"{source} lacks the attack-set header line")
    fields = dict(part.split("=", 1) for part in header[2:].split(";"))
    if fields.get("encoding") != ENCODING_HEADER.split("=", 1)[1]:
        raise DataError(f"{source} uses an unexpected label encoding: {fields.get('encoding')}")
    frame = pd.read_csv(source, skiprows=1, float_precision="round_trip")
    feature_cols = [c for c in frame.columns if c != "label"]
    return AttackDataset(
        features=frame[feature_cols].to_numpy(dtype=np.float64),
        labels=frame["label"].to_numpy(dtype=np.int64),
        feature_mode=FeatureMode.parse(fields["mode"]),
    )
