"""Variant-table parsing and extrapolation dataset splits.

Mutation codes are 1-based on disk (the usual convention for deep
mutational scanning tables) and 0-based in memory.  All randomised splits
shuffle with a seeded generator and cut at floor(fraction * n); manifests
list ids in the order they appear in the input table.
"""

from __future__ import annotations

import csv
import io
import re
import warnings
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np

from .errors import ContractError, DmsParseError
from .structures import ContactMap

_CODE_RE = re.compile(r"^([A-Z])(\d+)([A-Z])$")

DEFAULT_DISTANCE_BINS: tuple[tuple[int, Optional[int]], ...] = ((1, 6), (7, 24), (25, None))


class Substitution(NamedTuple):
    wt: str
    pos: int
    mut: str

    def code(self) -> str:
        return f"{self.wt}{self.pos + 1}{self.mut}"


@dataclass(frozen=True)
class Variant:
    """One scanned variant: ordered substitutions plus a fitness score."""

    substitutions: tuple[Substitution, ...]
    score: float
    raw_id: str

    def __post_init__(self):
        last = -1
        for sub in self.substitutions:
            if sub.wt == sub.mut:
                raise ContractError(f"self-substitution {sub.code()} in {self.raw_id!r}")
            if sub.pos <= last:
                raise ContractError(f"positions not strictly increasing in {self.raw_id!r}")
            last = sub.pos

    @property
    def order(self) -> int:
        return len(self.substitutions)

    @property
    def positions(self) -> tuple[int, ...]:
        return tuple(sub.pos for sub in self.substitutions)

    def canonical_code(self) -> str:
        return ":".join(sub.code() for sub in self.substitutions)


@dataclass(frozen=True)
class SplitManifest:
    """Disjoint train/val/test/excluded id lists for one split."""

    name: str
    seed: Optional[int]
    train: tuple[str, ...]
    val: tuple[str, ...]
    test: tuple[str, ...]
    excluded: tuple[str, ...] = ()

    def __post_init__(self):
        buckets = (self.train, self.val, self.test, self.excluded)
        seen: set[str] = set()
        for bucket in buckets:
            for vid in bucket:
                if vid in seen:
                    raise ContractError(f"variant {vid!r} appears in more than one bucket")
                seen.add(vid)


def parse_mutation_code(code: str) -> tuple[Substitution, ...]:
    """Parse 'A2C' / 'A2C:D5E' style codes into 0-based substitutions."""
    subs = []
    for token in code.split(":"):
        m = _CODE_RE.match(token.strip())
        if not m:
            raise DmsParseError(f"malformed mutation code {token!r}")
        wt, pos, mut = m.group(1), int(m.group(2)) - 1, m.group(3)
        if pos < 0:
            raise DmsParseError(f"mutation code {token!r} uses position 0")
        if wt == mut:
            raise DmsParseError(f"self-substitution {token!r}")
        subs.append(Substitution(wt, pos, mut))
    subs.sort(key=lambda s: s.pos)
    for a, b in zip(subs, subs[1:]):
        if a.pos == b.pos:
            raise DmsParseError(f"duplicate position in mutation code {code!r}")
    return tuple(subs)


def parse_dms(text: str | bytes, reference: Optional[str] = None) -> list[Variant]:
    """Parse a CSV with ``mutant`` and ``DMS_score`` columns.

    Duplicate variants (same canonical code) keep the first row with a
    warning; when a reference sequence is supplied every wild-type letter is
    checked against it.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or not {"mutant", "DMS_score"} <= set(reader.fieldnames):
        raise DmsParseError("CSV must have 'mutant' and 'DMS_score' header columns")

    variants: list[Variant] = []
    seen: dict[str, int] = {}
    for rownum, row in enumerate(reader, start=2):
        code = (row.get("mutant") or "").strip()
        if not code:
            raise DmsParseError(f"row {rownum}: empty mutant code")
        try:
            subs = parse_mutation_code(code)
            score = float(row.get("DMS_score", ""))
        except DmsParseError as exc:
            raise DmsParseError(f"row {rownum}: {exc}") from None
        except ValueError:
            raise DmsParseError(f"row {rownum}: bad score {row.get('DMS_score')!r}") from None
        if reference is not None:
            for sub in subs:
                if sub.pos >= len(reference):
                    raise DmsParseError(
                        f"row {rownum}: position {sub.pos + 1} beyond reference length"
                    )
                if reference[sub.pos] != sub.wt:
                    raise DmsParseError(
                        f"row {rownum}: wild-type letter {sub.wt!r} at position "
                        f"{sub.pos + 1} disagrees with reference {reference[sub.pos]!r}"
                    )
        variant = Variant(substitutions=subs, score=score, raw_id=code)
        canon = variant.canonical_code()
        if canon in seen:
            warnings.warn(
                f"row {rownum}: duplicate variant {code!r} (first seen at row {seen[canon]}); keeping first",
                stacklevel=2,
            )
            continue
        seen[canon] = rownum
        variants.append(variant)
    return variants


def render_dms(variants: Iterable[Variant]) -> str:
    """Canonical CSV for a variant list (round-trip counterpart of parse_dms)."""
    lines = ["mutant,DMS_score"]
    for v in variants:
        lines.append(f"{v.canonical_code()},{v.score}")
    return "\n".join(lines) + "\n"


def split_universe(items: Sequence, seed: int, train_fraction: float = 0.8) -> tuple[list, list]:
    """Shuffle a universe with the seed and cut at floor(train_fraction * n)."""
    perm = np.random.default_rng(seed).permutation(len(items))
    n_train = int(np.floor(train_fraction * len(items)))
    train = [items[i] for i in perm[:n_train]]
    test = [items[i] for i in perm[n_train:]]
    return train, test


def _ordered(ids: Sequence[str], members: set[str]) -> tuple[str, ...]:
    return tuple(vid for vid in ids if vid in members)


def model_selection_split(variants: Sequence[Variant], seed: int) -> SplitManifest:
    """10 percent selection set (train), remaining 90 percent reserved as test."""
    if len(variants) < 10:
        raise ContractError(f"need at least 10 variants, got {len(variants)}")
    ids = [v.raw_id for v in variants]
    sel_part, rest = split_universe(ids, seed, train_fraction=0.1)
    sel = set(sel_part)
    return SplitManifest(
        name="model_selection",
        seed=seed,
        train=_ordered(ids, sel),
        val=(),
        test=_ordered(ids, set(rest)),
    )


def regime_split(variants: Sequence[Variant]) -> SplitManifest:
    """Single mutants train, higher-order mutants test; fully deterministic."""
    ids = [v.raw_id for v in variants]
    singles = {v.raw_id for v in variants if v.order == 1}
    multis = {v.raw_id for v in variants if v.order >= 2}
    if not multis:
        warnings.warn("regime split has an empty test set: no higher-order variants", stacklevel=2)
    return SplitManifest(
        name="regime",
        seed=None,
        train=_ordered(ids, singles),
        val=(),
        test=_ordered(ids, multis),
    )


def position_split(variants: Sequence[Variant], seed: int) -> SplitManifest:
    """Partition observed positions 80/20; variants spanning both groups are excluded."""
    universe = sorted({pos for v in variants for pos in v.positions})
    if len(universe) < 2:
        raise ContractError(f"need at least 2 distinct mutated positions, got {len(universe)}")
    train_pos, test_pos = split_universe(universe, seed)
    train_set, test_set = set(train_pos), set(test_pos)

    ids = [v.raw_id for v in variants]
    train, test, excluded = set(), set(), set()
    for v in variants:
        if all(p in train_set for p in v.positions):
            train.add(v.raw_id)
        elif all(p in test_set for p in v.positions):
            test.add(v.raw_id)
        else:
            excluded.add(v.raw_id)
    return SplitManifest(
        name="position",
        seed=seed,
        train=_ordered(ids, train),
        val=(),
        test=_ordered(ids, test),
        excluded=_ordered(ids, excluded),
    )


def mutation_split(variants: Sequence[Variant], seed: int) -> SplitManifest:
    """Partition unique substitutions 80/20; mixed variants are excluded."""
    universe = sorted({sub for v in variants for sub in v.substitutions})
    if len(universe) < 2:
        raise ContractError(f"need at least 2 unique substitutions, got {len(universe)}")
    train_subs, test_subs = split_universe(universe, seed)
    train_set, test_set = set(train_subs), set(test_subs)

    ids = [v.raw_id for v in variants]
    train, test, excluded = set(), set(), set()
    for v in variants:
        if all(s in train_set for s in v.substitutions):
            train.add(v.raw_id)
        elif all(s in test_set for s in v.substitutions):
            test.add(v.raw_id)
        else:
            excluded.add(v.raw_id)
    return SplitManifest(
        name="mutation",
        seed=seed,
        train=_ordered(ids, train),
        val=(),
        test=_ordered(ids, test),
        excluded=_ordered(ids, excluded),
    )


def neighborhood_split(variants: Sequence[Variant], seed: int) -> SplitManifest:
    """80/20 train/test with the training side further divided 80/20 train/val."""
    if len(variants) < 25:
        raise ContractError(f"need at least 25 variants, got {len(variants)}")
    ids = [v.raw_id for v in variants]
    trainval, test = split_universe(ids, seed)
    train, val = split_universe(trainval, seed + 1)
    return SplitManifest(
        name="neighborhood",
        seed=seed,
        train=_ordered(ids, set(train)),
        val=_ordered(ids, set(val)),
        test=_ordered(ids, set(test)),
    )


@dataclass(frozen=True)
class SecondOrderStrata:
    """Two partitions of double mutants: by sequence distance and by contact."""

    by_distance: dict[str, tuple[str, ...]]
    by_contact: dict[str, tuple[str, ...]]


def _bin_label(lo: int, hi: Optional[int]) -> str:
    return f"{lo}-{hi}" if hi is not None else f"{lo}+"


def stratify_second_order(
    variants: Sequence[Variant],
    contacts: ContactMap,
    seq_bins: Sequence[tuple[int, Optional[int]]] = DEFAULT_DISTANCE_BINS,
) -> SecondOrderStrata:
    """Assign each double mutant a sequence-distance bin and a contact flag."""
    by_distance: dict[str, list[str]] = {_bin_label(lo, hi): [] for lo, hi in seq_bins}
    by_contact: dict[str, list[str]] = {"contact": [], "no_contact": []}
    for v in variants:
        if v.order != 2:
            continue
        p1, p2 = v.positions
        if p2 >= contacts.length:
            raise ContractError(
                f"variant {v.raw_id!r} mutates position {p2 + 1} beyond map length {contacts.length}"
            )
        distance = p2 - p1
        for lo, hi in seq_bins:
            if distance >= lo and (hi is None or distance <= hi):
                by_distance[_bin_label(lo, hi)].append(v.raw_id)
                break
        flag = "contact" if contacts.has_edge(p1, p2) else "no_contact"
        by_contact[flag].append(v.raw_id)
    return SecondOrderStrata(
        by_distance={k: tuple(v) for k, v in by_distance.items()},
        by_contact={k: tuple(v) for k, v in by_contact.items()},
    )
