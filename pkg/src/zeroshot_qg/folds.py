"""Zero-shot cross-validation folds.

Samples are grouped by a held-out key (predicate, sub_type or obj_type);
groups below the minimum size are dropped, and the remaining groups are
assigned whole to train/valid/test so that *sample* counts approach the
target ratios. A key value therefore never spans two splits of a fold.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

KEY_KINDS = ("predicate", "sub_type", "obj_type")
SPLITS = ("train", "valid", "test")


@dataclass
class Fold:
    fold_id: int
    key_kind: str
    train: list
    valid: list
    test: list

    def split(self, name):
        return getattr(self, name)

    def to_jsonable(self):
        return {"fold_id": self.fold_id, "key_kind": self.key_kind,
                "train": self.train, "valid": self.valid, "test": self.test}

    @classmethod
    def from_jsonable(cls, data):
        return cls(data["fold_id"], data["key_kind"],
                   data["train"], data["valid"], data["test"])


def sample_key(sample, key_kind):
    if key_kind not in KEY_KINDS:
        raise DomainError(f"unknown held-out key kind {key_kind!r}")
    if isinstance(sample, dict):
        return sample[key_kind]
    return getattr(sample, key_kind)


def make_folds(samples, key_kind, min_group=50, ratios=(0.7, 0.1, 0.2),
               n_folds=10, seed=0):
    """Build ``n_folds`` independent group-disjoint splits.

    Groups (unique key values) with at least ``min_group`` samples are
    assigned largest-first to the split with the largest remaining sample
    deficit relative to ``ratios``; group order among equal sizes is
    shuffled per (seed, fold_id), which is where fold-to-fold variety
    comes from. Deterministic given (seed, fold_id).
    """
    if len(ratios) != 3 or abs(sum(ratios) - 1.0) > 1e-9 or min(ratios) < 0:
        raise DomainError(f"ratios must be 3 nonnegative values summing to 1, got {ratios}")
    groups = {}
    for i, sample in enumerate(samples):
        groups.setdefault(sample_key(sample, key_kind), []).append(i)
    qualifying = {k: v for k, v in groups.items() if len(v) >= min_group}
    if len(qualifying) < 3:
        raise DomainError(
            f"need at least 3 groups with >= {min_group} samples, "
            f"got {len(qualifying)} (of {len(groups)} total)")

    keys = sorted(qualifying)
    total = sum(len(qualifying[k]) for k in keys)
    targets = [r * total for r in ratios]

    folds = []
    for fold_id in range(n_folds):
        rng = np.random.default_rng([seed, fold_id])
        order = [keys[i] for i in rng.permutation(len(keys))]
        order.sort(key=lambda k: -len(qualifying[k]))  # stable: ties stay shuffled
        assigned = [0, 0, 0]
        members = ([], [], [])
        for key in order:
            needs = [targets[j] - assigned[j] for j in range(3)]
            j = int(np.argmax(needs))  # first of ties: train, valid, test
            members[j].extend(qualifying[key])
            assigned[j] += len(qualifying[key])
        folds.append(Fold(fold_id, key_kind,
                          sorted(members[0]), sorted(members[1]), sorted(members[2])))
    return folds


def check_disjoint(fold, samples):
    """Assert the fold's three key-value sets are pairwise disjoint."""
    key_sets = []
    for split in SPLITS:
        key_sets.append({sample_key(samples[i], fold.key_kind) for i in fold.split(split)})
    for a in range(3):
        for b in range(a + 1, 3):
            overlap = key_sets[a] & key_sets[b]
            if overlap:
                raise DomainError(
                    f"fold {fold.fold_id}: key values {sorted(overlap)} appear in both "
                    f"{SPLITS[a]} and {SPLITS[b]}")
    return True


def achieved_ratios(fold):
    counts = [len(fold.train), len(fold.valid), len(fold.test)]
    total = sum(counts)
    return tuple(c / total for c in counts) if total else (0.0, 0.0, 0.0)
