"""Command-line pipeline: contacts -> projections -> masks -> splits -> probes.

Every subcommand is a deterministic function of its inputs, flags, and the
master seed.  Failures print a machine-readable error JSON on stderr and
exit with 2 for contract/usage problems or 1 for internal errors; outputs
are written atomically so a failed run leaves nothing at the target path.
"""

from __future__ import annotations

import functools
import json
import sys
import warnings
from pathlib import Path

import click

from . import __version__, fileio
from .errors import ContractError, StructMaskError
from .masking import MaskConfig, collate_batch
from .msa import parse_msa, project_contact_graph, project_msa
from .probes import knn_predict, knn_probe, ridge_fit, ridge_predict, ridge_probe, spearman, stratified_eval
from .splits import (
    model_selection_split,
    mutation_split,
    neighborhood_split,
    parse_dms,
    position_split,
    regime_split,
    stratify_second_order,
)
from .structures import DEFAULT_TAU, align_structure, build_contact_map, parse_structure

TASKS = {
    "model-selection": lambda variants, seed: model_selection_split(variants, seed),
    "regime": lambda variants, seed: regime_split(variants),
    "position": lambda variants, seed: position_split(variants, seed),
    "mutation": lambda variants, seed: mutation_split(variants, seed),
    "neighborhood": lambda variants, seed: neighborhood_split(variants, seed),
}

STRATEGY_BY_FLAG = {"random": "random", "bucket": "bucket", "gm-span": "gm_span"}


def _fail(exc: BaseException, code: int) -> None:
    payload = {"error": {"type": type(exc).__name__, "message": str(exc)}}
    click.echo(json.dumps(payload), err=True)
    sys.exit(code)


def guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except StructMaskError as exc:
            _fail(exc, 2)
        except click.ClickException:
            raise
        except Exception as exc:  # noqa: BLE001 - surfaced as internal error
            _fail(exc, 1)

    return wrapper


def _read_sequence(path: str) -> str:
    """Read a sequence file: either FASTA (first record) or bare residue text."""
    text = Path(path).read_text()
    if text.lstrip().startswith(">"):
        lines = [ln.strip() for ln in text.splitlines()]
        seq = []
        started = False
        for ln in lines:
            if ln.startswith(">"):
                if started:
                    break
                started = True
                continue
            if started:
                seq.append(ln)
        return "".join(seq).upper()
    return "".join(text.split()).upper()


@click.group()
@click.version_option(version=__version__, prog_name="structmask")
def main():
    """Structure-aware masking toolkit for protein sequences."""


@main.command("build-contacts")
@click.argument("pdb", type=click.Path(exists=True, dir_okay=False))
@click.option("--chain", required=True, help="PDB chain identifier.")
@click.option("--sequence", "sequence_path", required=True, type=click.Path(exists=True, dir_okay=False),
              help="Full-length sequence (FASTA or bare text).")
@click.option("--protein", default=None, help="Protein id recorded in the output (default: sequence file stem).")
@click.option("--tau", default=DEFAULT_TAU, show_default=True, type=float, help="Contact distance threshold in angstroms.")
@click.option("--atom", default="cb", show_default=True, type=click.Choice(["cb", "ca"]),
              help="Representative atom: beta-carbon with alpha fallback, or alpha-carbon only.")
@click.option("--min-identity", default=0.5, show_default=True, type=float,
              help="Alignment identity floor over aligned columns.")
@click.option("--output", required=True, type=click.Path(dir_okay=False))
@guarded
def cmd_build_contacts(pdb, chain, sequence_path, protein, tau, atom, min_identity, output):
    """Parse a PDB chain, align it to the sequence, and write the contact map."""
    sequence = _read_sequence(sequence_path)
    structure = parse_structure(Path(pdb).read_text(), chain, representative=atom.upper())
    alignment = align_structure(sequence, structure, min_identity=min_identity)
    cmap = build_contact_map(structure, alignment, tau=tau)

    coverage = alignment.coverage
    warning = None
    if coverage < 0.5:
        warning = f"resolved coverage {coverage:.1%} is below 50%"
    protein = protein or Path(sequence_path).stem
    fileio.write_contact_map(output, cmap, protein, warning=warning)
    click.echo(
        f"resolved coverage: {coverage:.1%} ({alignment.resolved_count}/{len(alignment)})"
    )
    if warning:
        click.echo(f"warning: {warning}", err=True)


@main.command("project-msa")
@click.option("--msa", "msa_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--contacts", "contacts_path", required=True, type=click.Path(exists=True, dir_okay=False),
              help="Wild-type contact map used to validate the alignment length.")
@click.option("--wt-id", default=None, help="Record id of the wild type (default: first row).")
@click.option("--output", required=True, type=click.Path(dir_okay=False))
@guarded
def cmd_project_msa(msa_path, contacts_path, wt_id, output):
    """Project every alignment row onto the wild type; one JSON line per row."""
    msa = parse_msa(Path(msa_path).read_text(), wt_id=wt_id)
    cmap, _ = fileio.read_contact_map(contacts_path)
    if len(msa.wt_sequence) != cmap.length:
        raise ContractError(
            f"wild-type ungapped length {len(msa.wt_sequence)} does not match "
            f"contact map length {cmap.length}"
        )
    projections = project_msa(msa)
    fileio.write_projections(output, [row.id for row in msa.rows], projections)
    click.echo(f"projected {len(projections)} rows")


@main.command("mask")
@click.option("--msa", "msa_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--strategy", default="random", show_default=True,
              type=click.Choice(sorted(STRATEGY_BY_FLAG)), help="Mask sampler.")
@click.option("--contacts", "contacts_path", default=None, type=click.Path(exists=True, dir_okay=False),
              help="Wild-type contact map (required for bucket/gm-span).")
@click.option("--projections", "projections_path", default=None, type=click.Path(exists=True, dir_okay=False),
              help="Projections file (required for bucket/gm-span).")
@click.option("--wt-id", default=None, help="Record id of the wild type (default: first row).")
@click.option("--seed", default=0, show_default=True, type=int, help="Master seed.")
@click.option("--lambda", "exploration", default=0.2, show_default=True, type=float,
              help="Exploration rate: fraction of the budget masked uniformly.")
@click.option("--rate-min", default=0.15, show_default=True, type=float)
@click.option("--rate-max", default=0.75, show_default=True, type=float)
@click.option("--epochs", default=1, show_default=True, type=int, help="Number of epoch draws to emit.")
@click.option("--epoch-start", default=0, show_default=True, type=int,
              help="First epoch index; streams are keyed by absolute epoch.")
@click.option("--mask-token", default="#", show_default=True)
@click.option("--seed-pool", default="contacts", show_default=True, type=click.Choice(["contacts", "all"]),
              help="Structural seed pool: positions with contacts, or every unmasked position.")
@click.option("--output", required=True, type=click.Path(dir_okay=False))
@guarded
def cmd_mask(msa_path, strategy, contacts_path, projections_path, wt_id, seed, exploration,
             rate_min, rate_max, epochs, epoch_start, mask_token, seed_pool, output):
    """Emit one corrupted-plan record per sequence per epoch draw."""
    strategy = STRATEGY_BY_FLAG[strategy]
    msa = parse_msa(Path(msa_path).read_text(), wt_id=wt_id)
    config = MaskConfig(
        rate_min=rate_min, rate_max=rate_max, exploration=exploration,
        mask_token=mask_token, seed_pool=seed_pool,
    )
    if epochs < 1:
        raise ContractError(f"epochs must be >= 1, got {epochs}")

    sequences = [msa.effective_sequence(i) for i in range(len(msa))]
    ids = [row.id for row in msa.rows]

    contacts = None
    if strategy != "random":
        if contacts_path is None or projections_path is None:
            raise ContractError(
                f"strategy {strategy!r} requires --contacts and --projections"
            )
        wt_map, _ = fileio.read_contact_map(contacts_path)
        rows = fileio.read_projections(projections_path)
        if len(rows) != len(msa):
            raise ContractError(
                f"projections file has {len(rows)} records for {len(msa)} alignment rows"
            )
        contacts = []
        for ordinal, (rec_id, proj) in enumerate(rows):
            if rec_id != ids[ordinal]:
                raise ContractError(
                    f"projection record {ordinal} is for {rec_id!r}, expected {ids[ordinal]!r}"
                )
            contacts.append(project_contact_graph(wt_map, proj))

    records = []
    for epoch in range(epoch_start, epoch_start + epochs):
        records.extend(collate_batch(sequences, ids, contacts, strategy, config, seed, epoch))
    fileio.write_mask_batch(output, records)
    click.echo(f"wrote {len(records)} records ({epochs} epochs x {len(ids)} sequences)")


@main.command("split")
@click.option("--dms", "dms_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--task", required=True, type=click.Choice(sorted(TASKS)))
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--reference", "reference_path", default=None, type=click.Path(exists=True, dir_okay=False),
              help="Optional reference sequence for wild-type letter validation.")
@click.option("--output", required=True, type=click.Path(dir_okay=False))
@guarded
def cmd_split(dms_path, task, seed, reference_path, output):
    """Generate one split manifest from a variant table."""
    reference = _read_sequence(reference_path) if reference_path else None
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        variants = parse_dms(Path(dms_path).read_text(), reference=reference)
        manifest = TASKS[task](variants, seed)
    fileio.write_manifest(output, manifest)
    for w in caught:
        click.echo(f"warning: {w.message}", err=True)
    click.echo(
        f"{manifest.name}: train={len(manifest.train)} val={len(manifest.val)} "
        f"test={len(manifest.test)} excluded={len(manifest.excluded)}"
    )


@main.command("probe")
@click.option("--embeddings", "embeddings_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--sidecar", default=None, type=click.Path(exists=True, dir_okay=False),
              help="JSON sidecar for raw-matrix embeddings (default: <embeddings>.json).")
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--probe", "probe_kind", required=True, type=click.Choice(["ridge", "knn"]))
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--dms", "dms_path", default=None, type=click.Path(exists=True, dir_okay=False),
              help="Variant table enabling the second-order strata table.")
@click.option("--contacts", "contacts_path", default=None, type=click.Path(exists=True, dir_okay=False),
              help="Contact map enabling the second-order strata table.")
@click.option("--output", required=True, type=click.Path(dir_okay=False))
@guarded
def cmd_probe(embeddings_path, sidecar, manifest_path, probe_kind, seed, dms_path, contacts_path, output):
    """Fit a probe on a manifest's train split and report test rank correlation."""
    table = fileio.load_embeddings(embeddings_path, sidecar)
    manifest = fileio.read_manifest(manifest_path)
    if not manifest.train or not manifest.test:
        raise ContractError(f"manifest {manifest.name!r} needs nonempty train and test sets")
    train = table.subset(manifest.train)
    test = table.subset(manifest.test)
    val = table.subset(manifest.val) if manifest.val else None

    if probe_kind == "ridge":
        result = ridge_probe(train, test, seed=seed)
        val_rho = None
        if val is not None:
            weights = ridge_fit(train.vectors, train.scores, result.selected_alpha)
            val_rho = spearman(ridge_predict(weights, val.vectors), val.scores)
        selected = {"selected_alpha": result.selected_alpha}
    else:
        if val is None:
            raise ContractError("knn probe needs a manifest with a validation set")
        result = knn_probe(train, val, test)
        val_rho = None
        selected = {"selected_k": result.selected_k}

    strata_doc = None
    if dms_path and contacts_path:
        variants = parse_dms(Path(dms_path).read_text())
        cmap, _ = fileio.read_contact_map(contacts_path)
        strata = stratify_second_order(variants, cmap)
        if probe_kind == "ridge":
            weights = ridge_fit(train.vectors, train.scores, result.selected_alpha)
            preds = ridge_predict(weights, test.vectors)
        else:
            preds = knn_predict(train.vectors, train.scores, test.vectors, result.selected_k)
        covered = set()
        for ids in strata.by_distance.values():
            covered.update(ids)
        predictions = {vid: float(p) for vid, p in zip(test.ids, preds) if vid in covered}
        scores = {vid: float(s) for vid, s in zip(test.ids, test.scores)}
        strata_doc = {}
        for part_name, part in (("sequence", strata.by_distance), ("structure", strata.by_contact)):
            evaluated = stratified_eval(predictions, scores, part)
            strata_doc[part_name] = {
                label: {"n": st.n, "rho": st.rho, "low_n": st.low_n, "degenerate": st.degenerate}
                for label, st in evaluated.items()
            }

    report = {
        "probe_kind": probe_kind,
        **selected,
        "rho": {"val": val_rho, "test": result.spearman_rho},
        "fold_mses": list(result.fold_mses),
        "degenerate": result.degenerate,
        "n": {"train": len(train), "val": len(val) if val is not None else 0, "test": len(test)},
        "strata": strata_doc,
    }
    fileio.write_json(output, report)
    click.echo(f"{probe_kind} test rho = {result.spearman_rho:.4f}")


@main.command("stats")
@click.option("--mask-batch", "batch_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--contacts", "contacts_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--output", required=True, type=click.Path(dir_okay=False))
@guarded
def cmd_stats(batch_path, contacts_path, output):
    """Diagnostics for a mask batch: action fractions, enrichment, frequencies."""
    records = fileio.read_mask_batch(batch_path)
    cmap, _ = fileio.read_contact_map(contacts_path)
    if not records:
        raise ContractError(f"mask batch {batch_path} is empty")

    action_counts = {"MASK": 0, "RANDOM": 0, "KEEP": 0}
    position_counts = [0] * cmap.length
    masked_pairs = 0
    contact_pairs = 0
    skipped = 0
    dense = cmap.to_dense()

    for record in records:
        for act in record["actions"]:
            action_counts[act["action"]] += 1
        masked = sorted(record["struct_indices"] + record["rand_indices"])
        if masked and masked[-1] >= cmap.length:
            skipped += 1
            continue
        for pos in masked:
            position_counts[pos] += 1
        for a in range(len(masked)):
            for b in range(a + 1, len(masked)):
                masked_pairs += 1
                contact_pairs += bool(dense[masked[a], masked[b]])

    total_actions = sum(action_counts.values())
    n = cmap.length
    all_pairs = n * (n - 1) // 2
    baseline = sum(1 for i, j in cmap.edges()) / all_pairs if all_pairs else 0.0
    masked_fraction = contact_pairs / masked_pairs if masked_pairs else 0.0
    report = {
        "n_records": len(records),
        "skipped_records": skipped,
        "action_fractions": {
            k: (v / total_actions if total_actions else 0.0) for k, v in action_counts.items()
        },
        "per_position_frequency": position_counts,
        "contact_enrichment": {
            "masked_pair_contact_fraction": masked_fraction,
            "baseline_contact_fraction": baseline,
            "ratio": (masked_fraction / baseline) if baseline else None,
        },
    }
    fileio.write_json(output, report)
    click.echo(
        "action fractions: "
        + ", ".join(f"{k}={v:.4f}" for k, v in report["action_fractions"].items())
    )


if __name__ == "__main__":
    main()
