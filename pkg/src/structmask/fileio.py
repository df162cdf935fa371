"""Readers and writers for the toolkit's file formats.

All positions on disk are 0-based; -1 is the unmapped sentinel in
projection records.  Writers go through a write-then-rename so a failed run
never leaves a partial file at the target path.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import FileFormatError
from .masking import MaskRecord
from .msa import ProjectionMap
from .probes import EmbeddingTable
from .splits import SplitManifest
from .structures import ContactMap


def atomic_write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# contact maps


def contact_map_document(cmap: ContactMap, protein: str, warning: Optional[str] = None) -> dict:
    doc = {
        "protein": protein,
        "length": cmap.length,
        "tau": cmap.tau,
        "resolved": [bool(r) for r in cmap.resolved],
        "edges": [[i, j] for i, j in sorted(cmap.edges())],
    }
    if warning is not None:
        doc["warning"] = warning
    return doc


def write_contact_map(path, cmap: ContactMap, protein: str, warning: Optional[str] = None) -> None:
    atomic_write_text(path, json.dumps(contact_map_document(cmap, protein, warning)) + "\n")


def read_contact_map(path) -> tuple[ContactMap, str]:
    try:
        doc = json.loads(Path(path).read_text())
        cmap = ContactMap.from_edges(
            length=int(doc["length"]),
            tau=float(doc["tau"]),
            edges=[(int(i), int(j)) for i, j in doc["edges"]],
            resolved=[bool(r) for r in doc["resolved"]],
        )
        return cmap, str(doc["protein"])
    except FileFormatError:
        raise
    except Exception as exc:
        raise FileFormatError(f"invalid contact-map file {path}: {exc}") from None


# ---------------------------------------------------------------------------
# projections (JSON lines)


def projection_lines(ids: Sequence[str], projections: Sequence[ProjectionMap]) -> str:
    lines = []
    for vid, proj in zip(ids, projections):
        lines.append(
            json.dumps({"id": vid, "s_to_wt": list(proj.s_to_wt), "wt_to_s": list(proj.wt_to_s)})
        )
    return "\n".join(lines) + "\n"


def write_projections(path, ids: Sequence[str], projections: Sequence[ProjectionMap]) -> None:
    atomic_write_text(path, projection_lines(ids, projections))


def read_projections(path) -> list[tuple[str, ProjectionMap]]:
    out = []
    try:
        for line in Path(path).read_text().splitlines():
            if not line.strip():
                continue
            doc = json.loads(line)
            out.append(
                (
                    str(doc["id"]),
                    ProjectionMap(
                        s_to_wt=tuple(int(v) for v in doc["s_to_wt"]),
                        wt_to_s=tuple(int(v) for v in doc["wt_to_s"]),
                    ),
                )
            )
    except Exception as exc:
        raise FileFormatError(f"invalid projections file {path}: {exc}") from None
    if not out:
        raise FileFormatError(f"projections file {path} is empty")
    return out


# ---------------------------------------------------------------------------
# mask batches (JSON lines)


def mask_record_document(record: MaskRecord) -> dict:
    plan = record.plan
    return {
        "id": record.sequence_id,
        "rate": plan.rate,
        "strategy": plan.strategy,
        "struct_indices": list(plan.struct_indices),
        "rand_indices": list(plan.rand_indices),
        "actions": [
            {"pos": act.pos, "action": act.action.value, "replacement": act.replacement}
            for act in record.corruption.actions
        ],
        "targets": [
            {"pos": pos, "token": token}
            for pos, token in sorted(record.corruption.targets.items())
        ],
    }


def mask_batch_lines(records: Iterable[MaskRecord]) -> str:
    lines = [json.dumps(mask_record_document(r)) for r in records]
    return "\n".join(lines) + "\n" if lines else ""


def write_mask_batch(path, records: Iterable[MaskRecord]) -> None:
    atomic_write_text(path, mask_batch_lines(records))


def read_mask_batch(path) -> list[dict]:
    out = []
    try:
        for line in Path(path).read_text().splitlines():
            if line.strip():
                out.append(json.loads(line))
    except Exception as exc:
        raise FileFormatError(f"invalid mask-batch file {path}: {exc}") from None
    return out


# ---------------------------------------------------------------------------
# split manifests


def manifest_document(manifest: SplitManifest) -> dict:
    return {
        "name": manifest.name,
        "seed": manifest.seed,
        "train": list(manifest.train),
        "val": list(manifest.val),
        "test": list(manifest.test),
        "excluded": list(manifest.excluded),
    }


def write_manifest(path, manifest: SplitManifest) -> None:
    atomic_write_text(path, json.dumps(manifest_document(manifest)) + "\n")


def read_manifest(path) -> SplitManifest:
    try:
        doc = json.loads(Path(path).read_text())
        return SplitManifest(
            name=str(doc["name"]),
            seed=doc["seed"],
            train=tuple(doc["train"]),
            val=tuple(doc["val"]),
            test=tuple(doc["test"]),
            excluded=tuple(doc.get("excluded", ())),
        )
    except Exception as exc:
        raise FileFormatError(f"invalid manifest file {path}: {exc}") from None


# ---------------------------------------------------------------------------
# embeddings


def read_embeddings_csv(path) -> EmbeddingTable:
    try:
        reader = csv.reader(io.StringIO(Path(path).read_text()))
        header = next(reader, None)
        if header is None or header[:2] != ["id", "score"]:
            raise FileFormatError("embedding CSV must start with 'id,score,v0,...'")
        ids, scores, rows = [], [], []
        for row in reader:
            if not row:
                continue
            ids.append(row[0])
            scores.append(float(row[1]))
            rows.append([float(v) for v in row[2:]])
        return EmbeddingTable(ids=tuple(ids), vectors=np.array(rows, float), scores=np.array(scores, float))
    except FileFormatError:
        raise
    except Exception as exc:
        raise FileFormatError(f"invalid embedding CSV {path}: {exc}") from None


def read_embeddings_binary(path, sidecar=None) -> EmbeddingTable:
    """Raw little-endian float32 matrix plus a JSON sidecar with ids/scores/dim."""
    path = Path(path)
    sidecar = Path(sidecar) if sidecar else path.with_suffix(path.suffix + ".json")
    try:
        meta = json.loads(sidecar.read_text())
        ids = tuple(str(v) for v in meta["ids"])
        scores = np.array(meta["scores"], dtype=float)
        dim = int(meta["dim"])
        flat = np.fromfile(path, dtype="<f4")
        if flat.size != len(ids) * dim:
            raise FileFormatError(
                f"matrix holds {flat.size} floats, expected {len(ids)} x {dim}"
            )
        vectors = flat.reshape(len(ids), dim).astype(float)
        return EmbeddingTable(ids=ids, vectors=vectors, scores=scores)
    except FileFormatError:
        raise
    except Exception as exc:
        raise FileFormatError(f"invalid embedding matrix {path}: {exc}") from None


def write_embeddings_binary(path, table: EmbeddingTable, sidecar=None) -> None:
    path = Path(path)
    sidecar = Path(sidecar) if sidecar else path.with_suffix(path.suffix + ".json")
    table.vectors.astype("<f4").tofile(path)
    atomic_write_text(
        sidecar,
        json.dumps({"ids": list(table.ids), "scores": [float(s) for s in table.scores], "dim": table.dim})
        + "\n",
    )


def load_embeddings(path, sidecar=None) -> EmbeddingTable:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return read_embeddings_csv(path)
    return read_embeddings_binary(path, sidecar)


# ---------------------------------------------------------------------------
# generic JSON reports


def write_json(path, document: dict) -> None:
    atomic_write_text(path, json.dumps(document, indent=2) + "\n")
