"""Seeded mask-plan samplers and the 80-10-10 corruption rule.

Three strategies produce plans over residue positions:

* ``random`` -- positions drawn uniformly without replacement.
* ``bucket`` -- a structural quota is filled by repeatedly seeding on a
  position with contacts and masking a sample of its contact neighborhood;
  the remaining exploration quota is drawn uniformly from untouched
  positions.  A graph too shallow to meet the quota gracefully degrades by
  transferring the shortfall to the random phase.
* ``gm_span`` -- matches the bucket sampler's per-seed sample sizes but
  re-places each as a contiguous run at a random location, isolating span
  size from span placement.

All samplers take an explicit numpy Generator and are otherwise pure; batch
helpers derive per-sequence streams from (master_seed, epoch, ordinal).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import ContractError
from .streams import rate_stream, sequence_stream
from .structures import ContactMap
from .validation import check_unit_interval

AMINO_ACIDS = tuple("ACDEFGHIKLMNPQRSTVWY")
DEFAULT_MASK_TOKEN = "#"

# bounded retries for non-overlapping span placement before first-fit kicks in
_SPAN_RETRIES = 64


class Action(str, Enum):
    MASK = "MASK"
    RANDOM = "RANDOM"
    KEEP = "KEEP"


class ActionRecord(NamedTuple):
    pos: int
    action: Action
    replacement: Optional[str]


@dataclass(frozen=True)
class MaskConfig:
    """Rates, exploration, vocabulary, and corruption thresholds."""

    rate_min: float = 0.15
    rate_max: float = 0.75
    exploration: float = 0.2
    vocab: tuple[str, ...] = AMINO_ACIDS
    mask_token: str = DEFAULT_MASK_TOKEN
    mask_p: float = 0.8
    random_p: float = 0.1
    keep_p: float = 0.1
    seed_pool: str = "contacts"

    def __post_init__(self):
        check_unit_interval("rate_min", self.rate_min)
        check_unit_interval("rate_max", self.rate_max)
        check_unit_interval("exploration", self.exploration)
        if self.rate_min > self.rate_max:
            raise ContractError(
                f"rate_min {self.rate_min} exceeds rate_max {self.rate_max}"
            )
        for name in ("mask_p", "random_p", "keep_p"):
            check_unit_interval(name, getattr(self, name))
        if abs(self.mask_p + self.random_p + self.keep_p - 1.0) > 1e-9:
            raise ContractError("corruption thresholds must sum to 1")
        if not self.vocab:
            raise ContractError("vocab must be nonempty")
        if not self.mask_token:
            raise ContractError("mask_token must be nonempty")
        if self.seed_pool not in ("contacts", "all"):
            raise ContractError(f"seed_pool must be 'contacts' or 'all', got {self.seed_pool!r}")


@dataclass(frozen=True)
class MaskPlan:
    """Chosen positions for one sequence draw.

    ``span_sizes`` keeps each structural seed's contributed sample size so
    that a geometry-matched plan can replicate the sizes exactly;
    ``transferred`` counts structural-quota positions that fell back to the
    random phase on a too-shallow graph.
    """

    length: int
    rate: float
    strategy: str
    struct_indices: tuple[int, ...]
    rand_indices: tuple[int, ...]
    span_sizes: tuple[int, ...] = ()
    transferred: int = 0

    def __post_init__(self):
        struct = set(self.struct_indices)
        rand = set(self.rand_indices)
        if len(struct) != len(self.struct_indices) or len(rand) != len(self.rand_indices):
            raise ContractError("mask plan contains duplicate indices")
        if struct & rand:
            raise ContractError("structural and random index sets intersect")
        for idx in struct | rand:
            if not 0 <= idx < self.length:
                raise ContractError(f"mask index {idx} outside [0, {self.length})")
        if len(struct) + len(rand) != math.floor(self.length * self.rate):
            raise ContractError("mask budget does not equal floor(length * rate)")

    @property
    def indices(self) -> tuple[int, ...]:
        """All masked positions, ascending."""
        return tuple(sorted(self.struct_indices + self.rand_indices))

    @property
    def size(self) -> int:
        return len(self.struct_indices) + len(self.rand_indices)


@dataclass(frozen=True)
class CorruptionResult:
    """Corrupted tokens, saved targets, and the per-position action taken."""

    corrupted: str | tuple[str, ...]
    targets: dict[int, str]
    actions: tuple[ActionRecord, ...]


def sample_rate(rng: np.random.Generator, config: MaskConfig) -> float:
    """Draw the masking rate uniformly from [rate_min, rate_max)."""
    if config.rate_min == config.rate_max:
        return config.rate_min
    return float(rng.uniform(config.rate_min, config.rate_max))


def random_mask_plan(length: int, rate: float, rng: np.random.Generator) -> MaskPlan:
    """Uniform positions without replacement; everything lands in the random set."""
    if length < 1:
        raise ContractError(f"length must be >= 1, got {length}")
    check_unit_interval("rate", rate)
    n = math.floor(length * rate)
    positions = tuple(sorted(int(p) for p in rng.choice(length, size=n, replace=False)))
    return MaskPlan(
        length=length, rate=float(rate), strategy="random",
        struct_indices=(), rand_indices=positions,
    )


def _structural_phase(
    length: int,
    contacts: ContactMap,
    quota: int,
    rng: np.random.Generator,
    seed_pool: str,
) -> tuple[list[int], list[int], int]:
    """Accumulate structural masks seed by seed; returns (masked, span_sizes, shortfall)."""
    masked = np.zeros(length, dtype=bool)
    chosen: list[int] = []
    span_sizes: list[int] = []
    while len(chosen) < quota:
        if seed_pool == "contacts":
            pool = [p for p in range(length) if not masked[p] and contacts.neighbor_lists[p]]
        else:
            # any unmasked position may seed, but stop once nothing can contribute
            if not any(not masked[p] and contacts.resolved[p] for p in range(length)):
                pool = []
            else:
                pool = [p for p in range(length) if not masked[p]]
        if not pool:
            break
        seed = pool[int(rng.integers(len(pool)))]
        candidates = [q for q in contacts.neighbor_lists[seed] if not masked[q]]
        if not candidates:
            continue
        k = min(len(candidates), quota - len(chosen))
        picked = rng.choice(len(candidates), size=k, replace=False)
        for idx in picked:
            q = candidates[int(idx)]
            masked[q] = True
            chosen.append(q)
        span_sizes.append(k)
    return chosen, span_sizes, quota - len(chosen)


def bucket_mask_plan(
    length: int,
    contacts: ContactMap,
    rate: float,
    exploration: float,
    rng: np.random.Generator,
    seed_pool: str = "contacts",
) -> MaskPlan:
    """Structural quota via contact-neighborhood seeds, then uniform exploration.

    The structural quota is floor(N_total * (1 - exploration)); each seed is
    drawn uniformly from not-yet-masked positions with a nonempty contact
    neighborhood and contributes min(|neighborhood still unmasked|, remaining
    quota) positions sampled without replacement.  With ``seed_pool="all"``
    seeds come from every unmasked position instead, matching the looser
    formulation in which isolated seeds simply contribute nothing.
    """
    if length < 1:
        raise ContractError(f"length must be >= 1, got {length}")
    if contacts.length != length:
        raise ContractError(
            f"contact map length {contacts.length} does not match sequence length {length}"
        )
    check_unit_interval("rate", rate)
    check_unit_interval("exploration", exploration)
    if seed_pool not in ("contacts", "all"):
        raise ContractError(f"seed_pool must be 'contacts' or 'all', got {seed_pool!r}")

    n_total = math.floor(length * rate)
    quota = math.floor(n_total * (1.0 - exploration))
    struct, span_sizes, shortfall = _structural_phase(length, contacts, quota, rng, seed_pool)

    n_rand = n_total - len(struct)
    untouched = np.setdiff1d(np.arange(length), np.asarray(struct, dtype=int))
    rand = rng.choice(untouched, size=n_rand, replace=False) if n_rand else np.empty(0, int)

    return MaskPlan(
        length=length,
        rate=float(rate),
        strategy="bucket",
        struct_indices=tuple(sorted(struct)),
        rand_indices=tuple(sorted(int(p) for p in rand)),
        span_sizes=tuple(span_sizes),
        transferred=shortfall,
    )


def _place_spans(length: int, sizes: Sequence[int], rng: np.random.Generator) -> list[int]:
    """Place non-overlapping contiguous runs; rejection then first-fit.

    If fragmentation defeats first-fit for some run, placement restarts as a
    deterministic left-packed first-fit over the sizes sorted descending,
    which always succeeds because the sizes sum to at most ``length``.
    """
    occupied = np.zeros(length, dtype=bool)
    starts: list[tuple[int, int]] = []
    for k in sizes:
        placed = False
        for _ in range(_SPAN_RETRIES):
            start = int(rng.integers(length - k + 1))
            if not occupied[start : start + k].any():
                occupied[start : start + k] = True
                starts.append((start, k))
                placed = True
                break
        if not placed:
            for start in range(length - k + 1):
                if not occupied[start : start + k].any():
                    occupied[start : start + k] = True
                    starts.append((start, k))
                    placed = True
                    break
        if not placed:
            cursor = 0
            starts = []
            for k2 in sorted(sizes, reverse=True):
                starts.append((cursor, k2))
                cursor += k2
            break
    out: list[int] = []
    for start, k in starts:
        out.extend(range(start, start + k))
    return out


def gm_span_mask_plan(
    length: int,
    contacts: ContactMap,
    rate: float,
    exploration: float,
    rng: np.random.Generator,
    seed_pool: str = "contacts",
) -> MaskPlan:
    """Bucket-matched span sizes placed as contiguous runs at random locations.

    Runs the bucket sampler first (consuming the same stream), discards its
    positions, and re-places one contiguous run per recorded sample size; the
    random-phase count is re-drawn from the remainder so the total budget is
    identical to the paired bucket plan.
    """
    base = bucket_mask_plan(length, contacts, rate, exploration, rng, seed_pool)
    struct = _place_spans(length, base.span_sizes, rng) if base.span_sizes else []

    n_rand = math.floor(length * rate) - len(struct)
    untouched = np.setdiff1d(np.arange(length), np.asarray(struct, dtype=int))
    rand = rng.choice(untouched, size=n_rand, replace=False) if n_rand else np.empty(0, int)

    return MaskPlan(
        length=length,
        rate=float(rate),
        strategy="gm_span",
        struct_indices=tuple(sorted(struct)),
        rand_indices=tuple(sorted(int(p) for p in rand)),
        span_sizes=base.span_sizes,
        transferred=base.transferred,
    )


def apply_corruption(
    tokens: str | Sequence[str],
    plan: MaskPlan,
    rng: np.random.Generator,
    config: MaskConfig = MaskConfig(),
) -> CorruptionResult:
    """80-10-10 corruption of the planned positions.

    Per masked position: with probability ``mask_p`` substitute the mask
    token, with ``random_p`` a uniform vocabulary token (which may equal the
    original), otherwise leave the token as-is.  The original token is saved
    as a target at every masked position regardless of the action taken.
    """
    if len(tokens) != plan.length:
        raise ContractError(
            f"token count {len(tokens)} does not match plan length {plan.length}"
        )
    as_str = isinstance(tokens, str)
    if as_str and len(config.mask_token) != 1:
        raise ContractError("mask_token must be a single character for string input")

    out = list(tokens)
    positions = plan.indices
    etas = rng.random(len(positions))
    random_slots = [i for i, eta in enumerate(etas) if config.mask_p <= eta < config.mask_p + config.random_p]
    draws = rng.integers(len(config.vocab), size=len(random_slots))
    replacement = dict(zip(random_slots, (config.vocab[int(d)] for d in draws)))

    targets: dict[int, str] = {}
    actions: list[ActionRecord] = []
    for i, pos in enumerate(positions):
        targets[pos] = out[pos]
        if etas[i] < config.mask_p:
            out[pos] = config.mask_token
            actions.append(ActionRecord(pos, Action.MASK, None))
        elif i in replacement:
            out[pos] = replacement[i]
            actions.append(ActionRecord(pos, Action.RANDOM, replacement[i]))
        else:
            actions.append(ActionRecord(pos, Action.KEEP, None))

    corrupted: str | tuple[str, ...] = "".join(out) if as_str else tuple(out)
    return CorruptionResult(corrupted=corrupted, targets=targets, actions=tuple(actions))


@dataclass(frozen=True)
class MaskRecord:
    """One (epoch, sequence) draw: the plan plus its corruption."""

    sequence_id: str
    ordinal: int
    epoch: int
    plan: MaskPlan
    corruption: CorruptionResult


def collate_batch(
    sequences: Sequence[str],
    ids: Sequence[str],
    contacts: Optional[Sequence[ContactMap]],
    strategy: str,
    config: MaskConfig,
    master_seed: int,
    epoch: int = 0,
) -> list[MaskRecord]:
    """Plan and corrupt a batch deterministically.

    One rate is drawn per epoch; each sequence then gets its own RNG stream
    keyed by (master_seed, epoch, ordinal), so batches are reproducible and
    order-independent to extension.
    """
    if strategy not in ("random", "bucket", "gm_span"):
        raise ContractError(f"unknown strategy {strategy!r}")
    if len(sequences) != len(ids):
        raise ContractError("sequences and ids differ in length")
    if strategy != "random":
        if contacts is None:
            raise ContractError(f"strategy {strategy!r} requires contact maps")
        if len(contacts) != len(sequences):
            raise ContractError("one contact map per sequence is required")

    rate = sample_rate(rate_stream(master_seed, epoch), config)
    records = []
    for ordinal, (seq_id, seq) in enumerate(zip(ids, sequences)):
        rng = sequence_stream(master_seed, epoch, ordinal)
        if strategy == "random":
            plan = random_mask_plan(len(seq), rate, rng)
        elif strategy == "bucket":
            plan = bucket_mask_plan(
                len(seq), contacts[ordinal], rate, config.exploration, rng, config.seed_pool
            )
        else:
            plan = gm_span_mask_plan(
                len(seq), contacts[ordinal], rate, config.exploration, rng, config.seed_pool
            )
        corruption = apply_corruption(seq, plan, rng, config)
        records.append(
            MaskRecord(sequence_id=seq_id, ordinal=ordinal, epoch=epoch, plan=plan, corruption=corruption)
        )
    return records


class _MaskerBase(BaseEstimator, TransformerMixin):
    """Shared plumbing for the estimator-style corruption transformers."""

    strategy = "random"

    def _mask_config(self) -> MaskConfig:
        return MaskConfig(
            rate_min=self.rate_min,
            rate_max=self.rate_max,
            exploration=getattr(self, "exploration", 0.2),
            mask_token=self.mask_token,
            seed_pool=getattr(self, "seed_pool", "contacts"),
        )

    def _contact_list(self, n: int) -> Optional[list[ContactMap]]:
        return None

    def collate(self, X: Sequence[str], epoch: int = 0) -> list[MaskRecord]:
        """Full mask records (plans, actions, targets) for a batch of sequences."""
        ids = [str(i) for i in range(len(X))]
        return collate_batch(
            list(X), ids, self._contact_list(len(X)), self.strategy,
            self._mask_config(), int(self.random_state), epoch,
        )

    def fit(self, X=None, y=None):
        return self

    def transform(self, X: Sequence[str]) -> list[str | tuple[str, ...]]:
        """Corrupted copies of the input sequences (epoch-0 draw)."""
        return [record.corruption.corrupted for record in self.collate(X)]


class RandomMasker(_MaskerBase):
    """Uniform masking transformer with the 80-10-10 corruption rule."""

    strategy = "random"

    def __init__(self, rate_min=0.15, rate_max=0.75, mask_token=DEFAULT_MASK_TOKEN, random_state=0):
        self.rate_min = rate_min
        self.rate_max = rate_max
        self.mask_token = mask_token
        self.random_state = random_state


class BucketMasker(_MaskerBase):
    """Contact-neighborhood masking transformer.

    ``fit`` binds the contact map(s): either a single map shared by every
    sequence or one map per sequence in batch order.
    """

    strategy = "bucket"

    def __init__(
        self,
        rate_min=0.15,
        rate_max=0.75,
        exploration=0.2,
        seed_pool="contacts",
        mask_token=DEFAULT_MASK_TOKEN,
        random_state=0,
    ):
        self.rate_min = rate_min
        self.rate_max = rate_max
        self.exploration = exploration
        self.seed_pool = seed_pool
        self.mask_token = mask_token
        self.random_state = random_state

    def fit(self, X, y=None):
        if isinstance(X, ContactMap):
            self.contacts_ = X
        else:
            self.contacts_ = list(X)
            for item in self.contacts_:
                if not isinstance(item, ContactMap):
                    raise ContractError("fit expects a ContactMap or a sequence of them")
        return self

    def _contact_list(self, n: int) -> list[ContactMap]:
        if not hasattr(self, "contacts_"):
            raise ContractError("masker is not fitted; call fit(contact_map) first")
        if isinstance(self.contacts_, ContactMap):
            return [self.contacts_] * n
        if len(self.contacts_) != n:
            raise ContractError(
                f"fitted with {len(self.contacts_)} contact maps but got {n} sequences"
            )
        return self.contacts_


class GMSpanMasker(BucketMasker):
    """Geometry-matched span transformer: bucket sizes, shuffled placement."""

    strategy = "gm_span"
