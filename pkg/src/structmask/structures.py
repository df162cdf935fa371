"""Resolved-structure parsing, sequence alignment, and contact maps.

A full-length protein sequence and a (possibly partially resolved) PDB
chain are reconciled by a global alignment; residue pairs closer than a
distance threshold become edges of a boolean contact map.  Sequence
positions with no resolved coordinates get all-zero rows, including the
diagonal.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import (
    AlignmentMismatchError,
    ChainNotFoundError,
    ContractError,
    StructureParseError,
)

DEFAULT_TAU = 7.0

THREE_TO_ONE = {
    "ALA": "A", "ARG": "R", "ASN": "N", "ASP": "D", "CYS": "C",
    "GLN": "Q", "GLU": "E", "GLY": "G", "HIS": "H", "ILE": "I",
    "LEU": "L", "LYS": "K", "MET": "M", "PHE": "F", "PRO": "P",
    "SER": "S", "THR": "T", "TRP": "W", "TYR": "Y", "VAL": "V",
}

# Global-alignment scoring; ties broken diagonal > up > left in traceback.
MATCH_SCORE = 1
MISMATCH_SCORE = -1
GAP_SCORE = -2


@dataclass(frozen=True)
class StructureResidue:
    """One resolved residue: author numbering plus representative-atom coordinates."""

    number: int
    icode: str
    aa: str
    coord: tuple[float, float, float]


@dataclass(frozen=True)
class Structure:
    """Residues of a single PDB chain in file order."""

    chain_id: str
    residues: tuple[StructureResidue, ...]

    def __post_init__(self):
        for res in self.residues:
            if not all(math.isfinite(c) for c in res.coord):
                raise ContractError(
                    f"residue {res.number}{res.icode.strip()} of chain "
                    f"{self.chain_id} has a non-finite coordinate"
                )

    def __len__(self) -> int:
        return len(self.residues)

    @property
    def sequence(self) -> str:
        return "".join(res.aa for res in self.residues)


@dataclass(frozen=True)
class AlignmentMap:
    """Per-sequence-position index into a Structure, or None when unresolved."""

    seq_to_struct: tuple[Optional[int], ...]

    def __post_init__(self):
        last = -1
        for idx in self.seq_to_struct:
            if idx is None:
                continue
            if idx <= last:
                raise ContractError("alignment map is not strictly increasing")
            last = idx

    def __len__(self) -> int:
        return len(self.seq_to_struct)

    @property
    def resolved_count(self) -> int:
        return sum(1 for idx in self.seq_to_struct if idx is not None)

    @property
    def coverage(self) -> float:
        return self.resolved_count / len(self.seq_to_struct)


@dataclass(frozen=True)
class ContactMap:
    """Symmetric boolean residue adjacency stored as sorted neighbor lists.

    ``neighbors(i)`` includes ``i`` itself whenever position ``i`` is
    resolved (self-contact); unresolved positions have empty lists.
    """

    length: int
    tau: float
    resolved: tuple[bool, ...]
    neighbor_lists: tuple[tuple[int, ...], ...] = field(repr=False)

    def __post_init__(self):
        if len(self.resolved) != self.length or len(self.neighbor_lists) != self.length:
            raise ContractError("contact map arrays disagree with declared length")

    def neighbors(self, i: int) -> tuple[int, ...]:
        return self.neighbor_lists[i]

    def has_edge(self, i: int, j: int) -> bool:
        row = self.neighbor_lists[i]
        k = bisect_left(row, j)
        return k < len(row) and row[k] == j

    def degree(self, i: int) -> int:
        """Number of off-diagonal contacts of position ``i``."""
        row = self.neighbor_lists[i]
        return len(row) - 1 if self.resolved[i] else len(row)

    def edges(self) -> list[tuple[int, int]]:
        """Off-diagonal edges as sorted (i, j) pairs with i < j."""
        out = []
        for i, row in enumerate(self.neighbor_lists):
            for j in row:
                if j > i:
                    out.append((i, j))
        return out

    def n_resolved(self) -> int:
        return sum(self.resolved)

    def to_dense(self) -> np.ndarray:
        dense = np.zeros((self.length, self.length), dtype=bool)
        for i, row in enumerate(self.neighbor_lists):
            dense[i, list(row)] = True
        return dense

    @classmethod
    def from_edges(
        cls,
        length: int,
        tau: float,
        edges: Iterable[tuple[int, int]],
        resolved: Sequence[bool],
    ) -> "ContactMap":
        resolved = tuple(bool(r) for r in resolved)
        if len(resolved) != length:
            raise ContractError("resolved flags must cover every position")
        adj: list[set[int]] = [set() for _ in range(length)]
        for i in range(length):
            if resolved[i]:
                adj[i].add(i)
        for i, j in edges:
            if not (0 <= i < length and 0 <= j < length) or i == j:
                raise ContractError(f"edge ({i}, {j}) is out of range or a self-loop")
            if not (resolved[i] and resolved[j]):
                raise ContractError(f"edge ({i}, {j}) touches an unresolved position")
            adj[i].add(j)
            adj[j].add(i)
        return cls(
            length=length,
            tau=float(tau),
            resolved=resolved,
            neighbor_lists=tuple(tuple(sorted(row)) for row in adj),
        )


def parse_structure(text: str | bytes, chain: str, representative: str = "CB") -> Structure:
    """Extract one chain's residues from PDB-format text.

    The representative atom is the beta-carbon, falling back to the
    alpha-carbon when absent (glycine or missing atom); pass
    ``representative="CA"`` to force alpha-carbons.  HETATM records,
    non-standard residues, and later altloc copies are skipped; parsing
    stops at the first ENDMDL so only the first model is read.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8", errors="replace")
    if representative not in ("CB", "CA"):
        raise ContractError(f"representative must be 'CB' or 'CA', got {representative!r}")

    order: list[tuple[int, str]] = []
    names: dict[tuple[int, str], str] = {}
    coords: dict[tuple[tuple[int, str], str], tuple[float, float, float]] = {}
    chain_seen = False

    for lineno, line in enumerate(text.splitlines(), start=1):
        record = line[:6]
        if record.startswith("ENDMDL"):
            break
        if not record.startswith("ATOM"):
            continue
        if len(line) < 54:
            raise StructureParseError(f"line {lineno}: ATOM record is too short")
        if line[21] != chain:
            continue
        chain_seen = True
        res_name = line[17:20].strip()
        if res_name not in THREE_TO_ONE:
            continue
        atom_name = line[12:16].strip()
        try:
            number = int(line[22:26])
            xyz = (float(line[30:38]), float(line[38:46]), float(line[46:54]))
        except ValueError as exc:
            raise StructureParseError(f"line {lineno}: {exc}") from None
        key = (number, line[26])
        if key not in names:
            order.append(key)
            names[key] = res_name
        # first altloc wins: keep the first copy of each atom per residue
        coords.setdefault((key, atom_name), xyz)

    residues = []
    for key in order:
        coord = coords.get((key, representative))
        if coord is None and representative == "CB":
            coord = coords.get((key, "CA"))
        if coord is None:
            continue
        residues.append(
            StructureResidue(number=key[0], icode=key[1], aa=THREE_TO_ONE[names[key]], coord=coord)
        )

    if not residues:
        detail = "has no usable residues" if chain_seen else "not present in the file"
        raise ChainNotFoundError(f"chain {chain!r} {detail}")
    return Structure(chain_id=chain, residues=tuple(residues))


def _score(a: str, b: str) -> int:
    return MATCH_SCORE if a == b else MISMATCH_SCORE


def align_structure(sequence: str, structure: Structure, min_identity: float = 0.5) -> AlignmentMap:
    """Globally align a full-length sequence to a structure's residue string.

    Linear gap penalties (match +1, mismatch -1, gap -2); traceback prefers
    diagonal, then up (sequence position unresolved), then left (structure
    residue unused).  Raises when identity over aligned columns falls below
    ``min_identity``.
    """
    if len(sequence) < 1:
        raise ContractError("sequence must be nonempty")
    if len(structure) < 1:
        raise ContractError("structure must be nonempty")

    seq = sequence.upper()
    sseq = structure.sequence
    n, m = len(seq), len(sseq)

    H = np.zeros((n + 1, m + 1), dtype=np.int64)
    H[:, 0] = GAP_SCORE * np.arange(n + 1)
    H[0, :] = GAP_SCORE * np.arange(m + 1)
    for i in range(1, n + 1):
        row = H[i]
        prev = H[i - 1]
        a = seq[i - 1]
        for j in range(1, m + 1):
            diag = prev[j - 1] + (MATCH_SCORE if a == sseq[j - 1] else MISMATCH_SCORE)
            up = prev[j] + GAP_SCORE
            left = row[j - 1] + GAP_SCORE
            row[j] = max(diag, up, left)

    mapping: list[Optional[int]] = [None] * n
    pairs = 0
    matches = 0
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and H[i, j] == H[i - 1, j - 1] + _score(seq[i - 1], sseq[j - 1]):
            mapping[i - 1] = j - 1
            pairs += 1
            matches += seq[i - 1] == sseq[j - 1]
            i -= 1
            j -= 1
        elif i > 0 and H[i, j] == H[i - 1, j] + GAP_SCORE:
            i -= 1
        else:
            j -= 1

    identity = matches / pairs if pairs else 0.0
    if identity < min_identity:
        raise AlignmentMismatchError(
            f"alignment identity {identity:.3f} below floor {min_identity:.3f} "
            f"between sequence {seq!r} and structure residues {sseq!r}"
        )
    return AlignmentMap(seq_to_struct=tuple(mapping))


def build_contact_map(
    structure: Structure, alignment: AlignmentMap, tau: float = DEFAULT_TAU
) -> ContactMap:
    """Threshold pairwise representative-atom distances into a contact map.

    Two resolved positions are in contact when their Euclidean distance is
    <= tau; every resolved position is its own contact; unresolved rows and
    columns stay all zero.
    """
    if not tau > 0:
        raise ContractError(f"tau must be > 0, got {tau!r}")
    length = len(alignment)
    positions = [i for i, idx in enumerate(alignment.seq_to_struct) if idx is not None]
    resolved = tuple(idx is not None for idx in alignment.seq_to_struct)

    if not positions:
        empty: tuple[tuple[int, ...], ...] = tuple(() for _ in range(length))
        return ContactMap(length=length, tau=float(tau), resolved=resolved, neighbor_lists=empty)

    coords = np.array(
        [structure.residues[alignment.seq_to_struct[i]].coord for i in positions], dtype=float
    )
    delta = coords[:, None, :] - coords[None, :, :]
    # explicit left-to-right sum keeps the float path identical to a scalar oracle
    d2 = (delta[:, :, 0] ** 2 + delta[:, :, 1] ** 2) + delta[:, :, 2] ** 2
    close = d2 <= tau * tau

    neighbor_lists: list[tuple[int, ...]] = [()] * length
    for a, i in enumerate(positions):
        neighbor_lists[i] = tuple(positions[b] for b in np.flatnonzero(close[a]))
    return ContactMap(
        length=length, tau=float(tau), resolved=resolved, neighbor_lists=tuple(neighbor_lists)
    )
