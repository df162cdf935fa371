"""Alignment-file parsing and wild-type/homolog projection.

The projection is a single sweep over alignment columns with two running
residue counters; a position pair is recorded whenever neither character is
a gap, and '.' on the homolog side is first rewritten to the wild-type
character (it denotes an exact wild-type match).  The resulting bidirectional
maps let a wild-type contact graph be carried into each homolog's own
coordinates without a structure for the homolog.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import ContractError, MsaFormatError
from .structures import ContactMap

GAP_CHARS = ("-", ".")


class MsaRow(NamedTuple):
    id: str
    gapped: str


@dataclass(frozen=True)
class Msa:
    """Fixed-width alignment rows; one row is designated the wild type."""

    rows: tuple[MsaRow, ...]
    wt_index: int = 0

    def __post_init__(self):
        if not self.rows:
            raise MsaFormatError("alignment has no rows")
        width = len(self.rows[0].gapped)
        for row in self.rows:
            if len(row.gapped) != width:
                raise MsaFormatError(
                    f"row {row.id!r} has width {len(row.gapped)}, expected {width}"
                )
        if not 0 <= self.wt_index < len(self.rows):
            raise ContractError(f"wt_index {self.wt_index} out of range")

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def width(self) -> int:
        return len(self.rows[0].gapped)

    @property
    def wt(self) -> MsaRow:
        return self.rows[self.wt_index]

    @property
    def wt_sequence(self) -> str:
        return "".join(c for c in self.wt.gapped if c not in GAP_CHARS)

    def effective_sequence(self, index: int) -> str:
        """Ungapped residues of a row, with '.' expanded to the wild-type character.

        This matches the projection sweep exactly, so the returned string has
        the same length as the row's ``s_to_wt`` array.
        """
        wt_gapped = self.wt.gapped
        out = []
        for w, s in zip(wt_gapped, self.rows[index].gapped):
            if s == ".":
                s = "-" if w in GAP_CHARS else w
            if s != "-":
                out.append(s)
        return "".join(out)


@dataclass(frozen=True)
class ProjectionMap:
    """Bidirectional homolog<->wild-type position maps (-1 = unmapped)."""

    s_to_wt: tuple[int, ...]
    wt_to_s: tuple[int, ...]

    def __post_init__(self):
        for name, forward, backward in (
            ("s_to_wt", self.s_to_wt, self.wt_to_s),
            ("wt_to_s", self.wt_to_s, self.s_to_wt),
        ):
            last = -1
            for u, v in enumerate(forward):
                if v < 0:
                    continue
                if not (0 <= v < len(backward)) or backward[v] != u:
                    raise ContractError(f"{name}[{u}] = {v} does not round-trip")
                if v <= last:
                    raise ContractError(f"{name} is not strictly increasing")
                last = v

    @property
    def homolog_length(self) -> int:
        return len(self.s_to_wt)

    @property
    def wt_length(self) -> int:
        return len(self.wt_to_s)


def parse_msa(text: str | bytes, wt_id: Optional[str] = None) -> Msa:
    """Parse FASTA/a2m text; lowercase residues are uppercased, gaps kept.

    The first record is the wild type unless ``wt_id`` names another one.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8", errors="replace")

    rows: list[MsaRow] = []
    current_id: Optional[str] = None
    chunks: list[str] = []

    def flush():
        if current_id is None:
            return
        seq = "".join(chunks)
        for ch in seq:
            if not (ch.isalpha() or ch in GAP_CHARS):
                raise MsaFormatError(f"row {current_id!r} contains invalid character {ch!r}")
        rows.append(MsaRow(id=current_id, gapped=seq.upper()))

    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith(">"):
            flush()
            current_id = line[1:].split()[0] if len(line) > 1 else ""
            chunks = []
        else:
            if current_id is None:
                raise MsaFormatError("sequence data before the first header")
            chunks.append(line)
    flush()

    if not rows:
        raise MsaFormatError("alignment file is empty")

    wt_index = 0
    if wt_id is not None:
        ids = [row.id for row in rows]
        if wt_id not in ids:
            raise MsaFormatError(f"wild-type id {wt_id!r} not found in alignment")
        wt_index = ids.index(wt_id)
    return Msa(rows=tuple(rows), wt_index=wt_index)


def project_alignment(wt_gapped: str, homolog_gapped: str) -> ProjectionMap:
    """Column sweep producing the bidirectional position maps.

    Runs in time linear in the alignment width: one pass with two counters,
    recording a pair whenever neither (rewritten) character is a gap.
    """
    if len(wt_gapped) != len(homolog_gapped):
        raise ContractError(
            f"gapped widths differ: {len(wt_gapped)} vs {len(homolog_gapped)}"
        )
    p_wt = 0
    p_s = 0
    pairs: list[tuple[int, int]] = []
    for w, s in zip(wt_gapped, homolog_gapped):
        if w == ".":
            w = "-"
        if s == ".":
            s = w
        if w != "-" and s != "-":
            pairs.append((p_s, p_wt))
        if w != "-":
            p_wt += 1
        if s != "-":
            p_s += 1

    s_to_wt = [-1] * p_s
    wt_to_s = [-1] * p_wt
    for u, v in pairs:
        s_to_wt[u] = v
        wt_to_s[v] = u
    return ProjectionMap(s_to_wt=tuple(s_to_wt), wt_to_s=tuple(wt_to_s))


def project_msa(msa: Msa) -> tuple[ProjectionMap, ...]:
    """Projection map of every row against the wild-type row (row order kept)."""
    wt_gapped = msa.wt.gapped
    return tuple(project_alignment(wt_gapped, row.gapped) for row in msa.rows)


def project_contact_graph(wt_map: ContactMap, proj: ProjectionMap) -> ContactMap:
    """Carry a wild-type contact map into homolog coordinates.

    An edge survives iff both endpoints map to homolog positions; homolog
    positions whose wild-type partner is resolved keep the self-contact,
    everything else (insertions, partners of deleted residues) stays zero.
    """
    if wt_map.length != proj.wt_length:
        raise ContractError(
            f"contact map length {wt_map.length} does not match projection "
            f"wild-type length {proj.wt_length}"
        )
    length = proj.homolog_length
    resolved = [False] * length
    for u, v in enumerate(proj.s_to_wt):
        if v >= 0 and wt_map.resolved[v]:
            resolved[u] = True
    edges = []
    for a, b in wt_map.edges():
        i = proj.wt_to_s[a]
        j = proj.wt_to_s[b]
        if i >= 0 and j >= 0:
            edges.append((min(i, j), max(i, j)))
    return ContactMap.from_edges(length, wt_map.tau, edges, resolved)


def column_entropy(msa: Msa, include_gaps: bool = False) -> np.ndarray:
    """Shannon entropy (nats) of each column's residue distribution.

    Gap characters are excluded by default; all-gap columns score 0.
    """
    out = np.zeros(msa.width, dtype=float)
    for c in range(msa.width):
        counts = Counter(row.gapped[c] for row in msa.rows)
        if not include_gaps:
            for gap in GAP_CHARS:
                counts.pop(gap, None)
        total = sum(counts.values())
        if total == 0:
            continue
        out[c] = -sum((n / total) * math.log(n / total) for n in counts.values())
    return out
