"""Acceptance suite: one test per release criterion, at full stated scale.

Each test prints an explicit PASS line so the criteria can be audited from
the pytest output (run with ``pytest tests/test_acceptance.py -v -s``).
The binding-parity criterion for the scripting-language wrapper lives in
the wrapper's own suite (see bindings/), keeping this suite runnable with
the bindings entirely unbuilt.
"""

import json
import math
import time
import warnings
from collections import Counter

import numpy as np
import pytest
from click.testing import CliRunner
from scipy import stats

from structmask import (
    ALPHA_GRID,
    K_GRID,
    Action,
    ContactMap,
    apply_corruption,
    bucket_mask_plan,
    gm_span_mask_plan,
    mutation_split,
    neighborhood_split,
    position_split,
    project_alignment,
    random_mask_plan,
    regime_split,
    ridge_probe,
    spearman,
)
from structmask.cli import main as cli_main
from structmask.fileio import manifest_document
from oracles import brute_force_contacts
from test_msa import random_gapped_pair
from test_probes import linear_tables
from test_splits import random_variants
from structmask.splits import split_universe


def announce(name):
    print(f"[PASS] {name}")


def random_graph(length, density, seed):
    g = np.random.default_rng(seed)
    edges = [
        (i, j)
        for i in range(length)
        for j in range(i + 1, length)
        if g.random() < density
    ]
    return ContactMap.from_edges(length, 7.0, edges, [True] * length)


def test_corruption_policy_fractions():
    """>=1e5 masked positions; action fractions within +/-0.005; < 5 s."""
    start = time.perf_counter()
    length = 125_000
    tokens = "".join(np.random.default_rng(0).choice(list("ACDEFGHIKL"), size=length))
    plan = random_mask_plan(length, 0.9, np.random.default_rng(1))
    assert plan.size >= 100_000
    result = apply_corruption(tokens, plan, np.random.default_rng(2))
    counts = Counter(act.action for act in result.actions)
    total = plan.size
    assert abs(counts[Action.MASK] / total - 0.80) <= 0.005
    assert abs(counts[Action.RANDOM] / total - 0.10) <= 0.005
    assert abs(counts[Action.KEEP] / total - 0.10) <= 0.005
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0
    announce(f"corruption policy: fractions within 0.005 over {total} positions in {elapsed:.2f}s")


def test_budget_exactness_fuzz():
    """10^3 fuzzed (L, r) pairs: |M| = floor(L*r), disjoint sets, no violations."""
    rng = np.random.default_rng(2025)
    for i in range(1000):
        length = int(rng.integers(1, 150))
        rate = float(rng.random())
        exploration = float(rng.random())
        graph = random_graph(length, 0.08, seed=i)
        sampler = bucket_mask_plan if i % 2 == 0 else gm_span_mask_plan
        plan = sampler(length, graph, rate, exploration, rng)
        assert plan.size == math.floor(length * rate)
        assert not set(plan.struct_indices) & set(plan.rand_indices)
        assert all(0 <= p < length for p in plan.indices)
    announce("budget exactness: 1000 fuzzed (L, r) pairs, zero violations")


def _position_counts(plans, length):
    counts = np.zeros(length, dtype=int)
    for plan in plans:
        counts[list(plan.indices)] += 1
    return counts


@pytest.mark.parametrize("case", ["lambda_one", "empty_graph"])
def test_degenerate_equivalence(case):
    """Chi-square equality of per-position marginals vs random, p > 0.01, 1e4 samples."""
    length, rate, n = 50, 0.3, 10_000
    if case == "lambda_one":
        graph = random_graph(length, 0.1, seed=3)
        exploration = 1.0
        rng = np.random.default_rng(7)
    else:
        graph = ContactMap.from_edges(length, 7.0, [], [False] * length)
        exploration = 0.2
        rng = np.random.default_rng(8)
    bucket_counts = _position_counts(
        (bucket_mask_plan(length, graph, rate, exploration, rng) for _ in range(n)), length
    )
    random_counts = _position_counts(
        (random_mask_plan(length, rate, rng) for _ in range(n)), length
    )
    pvalue = stats.chi2_contingency(np.vstack([bucket_counts, random_counts])).pvalue
    assert pvalue > 0.01
    announce(f"degenerate equivalence ({case}): chi-square p = {pvalue:.3f} > 0.01")


def test_structural_enrichment():
    """Bucket masked-pair contact fraction beats random at one-sided p < 0.001."""
    length = 100
    graph = random_graph(length, 0.10, seed=11)
    dense = graph.to_dense()
    np.fill_diagonal(dense, False)

    def pair_fraction(plan):
        idx = list(plan.indices)
        pairs = len(idx) * (len(idx) - 1) / 2
        return dense[np.ix_(idx, idx)].sum() / 2 / pairs

    rng = np.random.default_rng(13)
    bucket = [pair_fraction(bucket_mask_plan(length, graph, 0.3, 0.2, rng)) for _ in range(1000)]
    rand = [pair_fraction(random_mask_plan(length, 0.3, rng)) for _ in range(1000)]
    pvalue = stats.mannwhitneyu(bucket, rand, alternative="greater").pvalue
    assert pvalue < 1e-3
    assert np.mean(bucket) > np.mean(rand)
    announce(f"structural enrichment: one-sided p = {pvalue:.2e} < 1e-3 over 1000 plans")


def test_gm_span_size_matching():
    """1000 seeded pairs: GM-span run lengths equal paired bucket span sizes exactly."""
    outer = np.random.default_rng(17)
    for _ in range(1000):
        length = int(outer.integers(5, 100))
        seed = int(outer.integers(1 << 30))
        graph = random_graph(length, 0.12, seed=seed)
        rate = float(outer.uniform(0.05, 0.75))
        bucket = bucket_mask_plan(length, graph, rate, 0.2, np.random.default_rng(seed))
        gm = gm_span_mask_plan(length, graph, rate, 0.2, np.random.default_rng(seed))
        assert sorted(gm.span_sizes) == sorted(bucket.span_sizes)
        assert len(gm.struct_indices) == sum(gm.span_sizes)
        assert gm.size == bucket.size
    announce("gm-span size matching: 1000 seeded pairs, exact multiset equality")


def test_projection_correctness():
    """Hand-trace fixtures exact; round-trip on 1e4 fuzzed pairs; WT identity."""
    proj = project_alignment("ACDE", "A-DE")
    assert proj.s_to_wt == (0, 2, 3) and proj.wt_to_s == (0, -1, 1, 2)
    proj = project_alignment("AC-E", "ACDE")
    assert proj.s_to_wt == (0, 1, -1, 2) and proj.wt_to_s == (0, 1, 3)
    proj = project_alignment("ACDE", "ACDE")
    assert proj.s_to_wt == (0, 1, 2, 3) and proj.wt_to_s == (0, 1, 2, 3)

    rng = np.random.default_rng(19)
    for _ in range(10_000):
        wt, hom = random_gapped_pair(rng)
        proj = project_alignment(wt, hom)
        for u, v in enumerate(proj.s_to_wt):
            if v >= 0:
                assert proj.wt_to_s[v] == u
        for v, u in enumerate(proj.wt_to_s):
            if u >= 0:
                assert proj.s_to_wt[u] == v

    for _ in range(100):
        wt, _ = random_gapped_pair(rng)
        proj = project_alignment(wt, wt)
        assert proj.s_to_wt == tuple(range(proj.wt_length))
    announce("projection correctness: fixtures exact, 10000 round-trips, WT identity")


def test_contact_map_oracle():
    """100 random structures vs brute-force distances, tau in {4, 7, 12}, bit-exact."""
    from structmask import AlignmentMap, build_contact_map, parse_structure
    from test_structures import atom, pdb_text

    rng = np.random.default_rng(23)
    for _ in range(100):
        n = int(rng.integers(2, 40))
        # PDB text carries 3 decimals, so the oracle must see the same values
        coords = np.round(rng.uniform(0, 25, size=(n, 3)), 3)
        resolved = rng.random(n) > 0.15
        if not resolved.any():
            resolved[0] = True
        lines, mapping, k = [], [], 0
        for i in range(n):
            if resolved[i]:
                lines.append(atom(k + 1, " CB", "ALA", "A", k + 1, *coords[i]))
                mapping.append(k)
                k += 1
            else:
                mapping.append(None)
        structure = parse_structure(pdb_text(lines), "A")
        alignment = AlignmentMap(seq_to_struct=tuple(mapping))
        for tau in (4.0, 7.0, 12.0):
            cmap = build_contact_map(structure, alignment, tau=tau)
            expected = brute_force_contacts([tuple(c) for c in coords], list(resolved), tau)
            assert set(cmap.edges()) == expected
    announce("contact-map oracle: 100 structures x 3 taus, bit-exact")


def test_split_contracts():
    """1000 fuzzed datasets: zero mixed variants; regime seed-invariant; nested floors."""
    rng = np.random.default_rng(29)
    for i in range(1000):
        variants = random_variants(rng, int(rng.integers(25, 60)), n_positions=25)
        seed = int(rng.integers(1 << 30))
        by_id = {v.raw_id: v for v in variants}

        pos_manifest = position_split(variants, seed)
        universe = sorted({p for v in variants for p in v.positions})
        train_pos = set(split_universe(universe, seed)[0])
        for vid in pos_manifest.train:
            assert all(p in train_pos for p in by_id[vid].positions)
        for vid in pos_manifest.test:
            assert all(p not in train_pos for p in by_id[vid].positions)

        mut_manifest = mutation_split(variants, seed)
        sub_universe = sorted({s for v in variants for s in v.substitutions})
        train_subs = set(split_universe(sub_universe, seed)[0])
        for vid in mut_manifest.train:
            assert all(s in train_subs for s in by_id[vid].substitutions)
        for vid in mut_manifest.test:
            assert all(s not in train_subs for s in by_id[vid].substitutions)

        if i % 20 == 0:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                docs = {
                    json.dumps(manifest_document(regime_split(variants)))
                    for _ in range(3)
                }
            assert len(docs) == 1

            nb = neighborhood_split(variants, seed)
            n = len(variants)
            trainval = math.floor(0.8 * n)
            assert len(nb.test) == n - trainval
            assert len(nb.train) == math.floor(0.8 * trainval)
            assert len(nb.val) == trainval - math.floor(0.8 * trainval)
    announce("split contracts: 1000 fuzzed datasets, zero mixing violations")


def test_probe_sanity():
    """Noiseless ridge rho >= 0.999; exact grids; spearman fixture at 1e-12."""
    train, test = linear_tables(seed=31)
    result = ridge_probe(train, test)
    assert result.spearman_rho >= 0.999
    assert ALPHA_GRID == (1e-6, 1e-5, 1e-4, 1e-3, 0.01, 0.1, 1.0, 10.0, 100.0)
    assert K_GRID == (1, 3, 5, 10, 20, 50, 100)
    assert spearman([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8, abs=1e-12)
    announce(f"probe sanity: ridge rho = {result.spearman_rho:.4f}, grids exact, spearman 0.8")


def test_end_to_end_determinism(tmp_path, toy_dir):
    """Full CLI pipeline twice with one master seed: bytewise-identical files, < 10 s."""
    start = time.perf_counter()
    runner = CliRunner()

    def run_pipeline(workdir):
        workdir.mkdir()
        for name in ("toy.pdb", "toy_protein.fasta", "toy_msa.a2m", "toy_dms.csv",
                     "toy_embeddings.csv"):
            (workdir / name).write_text((toy_dir / name).read_text())
        steps = [
            ["build-contacts", str(workdir / "toy.pdb"), "--chain", "A",
             "--sequence", str(workdir / "toy_protein.fasta"), "--protein", "toy",
             "--output", str(workdir / "contacts.json")],
            ["project-msa", "--msa", str(workdir / "toy_msa.a2m"),
             "--contacts", str(workdir / "contacts.json"),
             "--output", str(workdir / "projections.jsonl")],
            ["mask", "--msa", str(workdir / "toy_msa.a2m"), "--strategy", "bucket",
             "--contacts", str(workdir / "contacts.json"),
             "--projections", str(workdir / "projections.jsonl"),
             "--seed", "42", "--epochs", "3", "--output", str(workdir / "masks.jsonl")],
            ["split", "--dms", str(workdir / "toy_dms.csv"), "--task", "neighborhood",
             "--seed", "42", "--output", str(workdir / "manifest.json")],
            ["probe", "--embeddings", str(workdir / "toy_embeddings.csv"),
             "--manifest", str(workdir / "manifest.json"), "--probe", "ridge",
             "--seed", "42", "--dms", str(workdir / "toy_dms.csv"),
             "--contacts", str(workdir / "contacts.json"),
             "--output", str(workdir / "report.json")],
        ]
        for step in steps:
            result = runner.invoke(cli_main, step, catch_exceptions=False)
            assert result.exit_code == 0, result.output
        return {
            name: (workdir / name).read_bytes()
            for name in ("contacts.json", "projections.jsonl", "masks.jsonl",
                         "manifest.json", "report.json")
        }

    first = run_pipeline(tmp_path / "run1")
    second = run_pipeline(tmp_path / "run2")
    assert first == second
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0
    announce(f"end-to-end determinism: 5 files bytewise identical across reruns in {elapsed:.2f}s")


@pytest.mark.skip(reason="binding parity is exercised by the wrapper's own suite in bindings/")
def test_binding_parity_placeholder():
    """Secondary criterion: collate parity with the CLI, tested in bindings/."""
