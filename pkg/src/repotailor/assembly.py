"""Assemble developer, organization, size-controlled, and pre-training
datasets with temporal alignment and deduplication.

The construction guarantee maintained throughout: training data for a
dataset anchored on a developer is strictly older than that developer's
validation and test data. Timestamp ties between the anchor's last
training change and first held-out change are resolved by exclusion.
"""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass

from .errors import AnchorIneligible, TargetTooLarge, TooFewInstances
from .javamethods import MethodUnit
from .masking import CompletionInstance
from .seeding import derive_seed

DEFAULT_TEST_SIZE = 500
DEFAULT_MIN_TRAIN = 1000
DEFAULT_TRAIN_FRACTION = 0.9
DEFAULT_METHODS_PER_REPO = 1500
MLM_MASK_RATE = 0.15

ROLE_DEVELOPER = "developer"
ROLE_ORGANIZATION = "organization"
ROLE_ORG_SUBSET = "org-subset"
ROLE_BASELINE_PLUS = "baseline-plus"
ROLE_GENERIC_FINETUNE = "generic-finetune"
ROLE_PRETRAIN = "pretrain"


def order_key(instance: CompletionInstance) -> tuple:
    return (instance.timestamp, instance.commit_sha, instance.instance_id)


def normalize_for_dedup(text: str) -> str:
    return " ".join(text.split())


def dedup_key(instance: CompletionInstance) -> tuple[str, str]:
    return (normalize_for_dedup(instance.context), normalize_for_dedup(instance.target))


def dedup(
    train: list[CompletionInstance], holdout: list[CompletionInstance]
) -> list[CompletionInstance]:
    """Drop train instances equal to a holdout instance up to whitespace."""
    holdout_keys = {dedup_key(i) for i in holdout}
    return [i for i in train if dedup_key(i) not in holdout_keys]


@dataclass(frozen=True, slots=True)
class SplitAssignment:
    train: tuple[CompletionInstance, ...]
    val: tuple[CompletionInstance, ...]
    test: tuple[CompletionInstance, ...]

    @property
    def assignment(self) -> dict[str, str]:
        out: dict[str, str] = {}
        for name, part in (("train", self.train), ("val", self.val), ("test", self.test)):
            for inst in part:
                out[inst.instance_id] = name
        return out


@dataclass(frozen=True, slots=True)
class DatasetManifest:
    dataset_id: str
    role: str
    anchor_developer: str | None
    cutoff_ts: int | None
    counts: tuple[int, int, int]  # (train, val, test)
    seed: int
    source_hashes: tuple[str, ...] = ()

    def to_record(self) -> dict:
        return {
            "dataset_id": self.dataset_id,
            "role": self.role,
            "anchor_developer": self.anchor_developer,
            "cutoff_ts": self.cutoff_ts,
            "counts": {"train": self.counts[0], "val": self.counts[1], "test": self.counts[2]},
            "seed": self.seed,
            "source_hashes": list(self.source_hashes),
        }


def _instances_hash(instances: list[CompletionInstance]) -> str:
    h = hashlib.sha256()
    for inst in instances:
        h.update(inst.instance_id.encode("utf-8"))
        h.update(b"\n")
    return h.hexdigest()[:16]


def split_developer(
    instances: list[CompletionInstance],
    test_size: int = DEFAULT_TEST_SIZE,
    train_fraction: float = DEFAULT_TRAIN_FRACTION,
) -> SplitAssignment:
    """Time-ordered split: newest ``test_size`` instances become the
    test set, the rest splits 90/10 by recency into train/val, then
    train duplicates of any held-out instance are removed.
    """
    ordered = sorted(instances, key=order_key)
    if len(ordered) < test_size + 1:
        raise TooFewInstances(
            f"{len(ordered)} instances; need at least {test_size + 1}"
        )
    test = ordered[-test_size:]
    rest = ordered[:-test_size]
    n_train = math.floor(train_fraction * len(rest))
    train = rest[:n_train]
    val = rest[n_train:]
    train = dedup(train, val + test)
    return SplitAssignment(tuple(train), tuple(val), tuple(test))


def eligible(
    split: SplitAssignment,
    min_train: int = DEFAULT_MIN_TRAIN,
    test_size: int = DEFAULT_TEST_SIZE,
) -> bool:
    """Dataset viability: enough training data and the exact test size."""
    return len(split.train) >= min_train and len(split.test) == test_size


@dataclass(frozen=True, slots=True)
class OrgDataset:
    manifest: DatasetManifest
    train: tuple[CompletionInstance, ...]
    val: tuple[CompletionInstance, ...]


def build_org_dataset(
    all_dev_instances: dict[str, list[CompletionInstance]],
    anchor: str,
    seed: int,
    test_size: int = DEFAULT_TEST_SIZE,
    min_train: int = DEFAULT_MIN_TRAIN,
    train_fraction: float = DEFAULT_TRAIN_FRACTION,
    anchor_split: SplitAssignment | None = None,
) -> OrgDataset:
    """Union all developers' instances up to the anchor's training
    cutoff, scrub the anchor's held-out duplicates, and split 90/10 by
    recency.
    """
    if anchor not in all_dev_instances:
        raise AnchorIneligible(f"unknown anchor {anchor!r}")
    if anchor_split is None:
        try:
            anchor_split = split_developer(all_dev_instances[anchor], test_size, train_fraction)
        except TooFewInstances as exc:
            raise AnchorIneligible(str(exc)) from exc
    if not eligible(anchor_split, min_train, test_size):
        raise AnchorIneligible(f"anchor {anchor!r} has no eligible split")

    holdout = list(anchor_split.val) + list(anchor_split.test)
    min_holdout_ts = min(i.timestamp for i in holdout)
    # the cutoff is the anchor's newest training change; when that ties
    # with the first held-out change, step back one second so training
    # data stays strictly older than evaluation data
    cutoff_ts = min(max(i.timestamp for i in anchor_split.train), min_holdout_ts - 1)

    pool: list[CompletionInstance] = []
    for instances in all_dev_instances.values():
        for inst in instances:
            if inst.timestamp <= cutoff_ts:
                pool.append(inst)
    pool = dedup(pool, holdout)

    seen: set[str] = set()
    unique: list[CompletionInstance] = []
    for inst in sorted(pool, key=order_key):
        if inst.instance_id not in seen:
            seen.add(inst.instance_id)
            unique.append(inst)

    n_train = math.floor(train_fraction * len(unique))
    train = tuple(unique[:n_train])
    val = tuple(unique[n_train:])
    manifest = DatasetManifest(
        dataset_id=f"org-{anchor}",
        role=ROLE_ORGANIZATION,
        anchor_developer=anchor,
        cutoff_ts=cutoff_ts,
        counts=(len(train), len(val), 0),
        seed=seed,
        source_hashes=(_instances_hash(list(train)), _instances_hash(list(val))),
    )
    return OrgDataset(manifest, train, val)


def _seeded_sample(
    pool: list[CompletionInstance], target_size: int, seed: int
) -> list[CompletionInstance]:
    ordered = sorted(pool, key=lambda i: i.instance_id)
    rng = random.Random(seed)
    sample = rng.sample(ordered, target_size)
    return sorted(sample, key=order_key)


def build_org_subset(
    org_set: list[CompletionInstance], target_size: int, seed: int
) -> list[CompletionInstance]:
    """Uniform seeded sample of the organization set, without replacement."""
    if target_size > len(org_set):
        raise TargetTooLarge(f"target {target_size} > pool {len(org_set)}")
    return _seeded_sample(org_set, target_size, seed)


def build_baseline_plus(
    generic_pool: list[CompletionInstance],
    target_size: int,
    first_test_ts: int,
    seed: int,
) -> list[CompletionInstance]:
    """Seeded sample from the generic pool restricted to instances
    strictly older than the anchor's first test timestamp.
    """
    pool = [i for i in generic_pool if i.timestamp < first_test_ts]
    if target_size > len(pool):
        raise TargetTooLarge(f"target {target_size} > eligible pool {len(pool)}")
    return _seeded_sample(pool, target_size, seed)


def cap_methods_per_repo(
    methods_by_repo: dict[str, list],
    cap: int = DEFAULT_METHODS_PER_REPO,
    seed: int = 0,
) -> dict[str, list]:
    """Per-repo uniform sample when a repository exceeds the cap."""
    out: dict[str, list] = {}
    for repo in sorted(methods_by_repo):
        items = methods_by_repo[repo]
        if len(items) <= cap:
            out[repo] = list(items)
            continue
        rng = random.Random(derive_seed(seed, "cap-methods", repo))
        idx = sorted(rng.sample(range(len(items)), cap))
        out[repo] = [items[i] for i in idx]
    return out


@dataclass(frozen=True, slots=True)
class MlmInstance:
    instance_id: str
    masked_text: str
    targets: tuple[str, ...]
    signature: str = ""

    def to_record(self) -> dict:
        return {
            "id": self.instance_id,
            "masked_text": self.masked_text,
            "targets": list(self.targets),
            "signature": self.signature,
        }


def mlm_pretrain_instances(method: MethodUnit, rng: random.Random) -> MlmInstance:
    """Mask 15% of a method's tokens (ceiling) with indexed sentinels."""
    tokens = method.tokens
    k = math.ceil(MLM_MASK_RATE * len(tokens))
    positions = sorted(rng.sample(range(len(tokens)), k))

    lines = method.text.split("\n")

    def offset(line: int, col: int) -> int:
        rel = line - method.start_line
        return sum(len(lines[i]) + 1 for i in range(rel)) + col

    pieces: list[str] = []
    targets: list[str] = []
    cursor = 0
    for i, pos in enumerate(positions):
        tok = tokens[pos]
        start = offset(tok.line, tok.col)
        pieces.append(method.text[cursor:start])
        pieces.append(f"<MASK_{i}>")
        targets.append(tok.text)
        cursor = start + len(tok.text)
    pieces.append(method.text[cursor:])
    masked_text = "".join(pieces)

    h = hashlib.sha256()
    h.update(masked_text.encode("utf-8"))
    for t in targets:
        h.update(b"\x00")
        h.update(t.encode("utf-8"))
    return MlmInstance(h.hexdigest()[:20], masked_text, tuple(targets), method.signature)


def audit_temporal_leak(
    org: OrgDataset, anchor_split: SplitAssignment
) -> list[str]:
    """Check the leak-freedom invariants of one organization dataset.

    Returns human-readable violations; empty means clean.
    """
    problems: list[str] = []
    holdout = list(anchor_split.val) + list(anchor_split.test)
    cutoff = org.manifest.cutoff_ts or 0
    min_holdout_ts = min(i.timestamp for i in holdout) if holdout else None
    if min_holdout_ts is not None and cutoff >= min_holdout_ts:
        problems.append(f"cutoff {cutoff} not older than holdout ts {min_holdout_ts}")
    train_all = list(org.train) + list(org.val)
    if train_all:
        max_train = max(i.timestamp for i in train_all)
        if max_train > cutoff:
            problems.append(f"train ts {max_train} exceeds cutoff {cutoff}")
        if min_holdout_ts is not None and max_train >= min_holdout_ts:
            problems.append(
                f"train ts {max_train} not older than holdout ts {min_holdout_ts}"
            )
    holdout_keys = {dedup_key(i) for i in holdout}
    for inst in train_all:
        if dedup_key(inst) in holdout_keys:
            problems.append(f"instance {inst.instance_id} duplicates a holdout instance")
    return problems
