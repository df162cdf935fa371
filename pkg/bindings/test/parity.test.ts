import { spawnSync } from 'node:child_process';
import { readFileSync, rmSync } from 'node:fs';
import { join } from 'node:path';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { openSession, type MaskRecordDoc } from '../src/index.js';
import { makeWorkspace, runCore, type Workspace } from './helpers.js';

const SEED = 42;
const EPOCHS = 2;

let ws: Workspace;

beforeAll(() => {
	ws = makeWorkspace();
});

afterAll(() => {
	rmSync(ws.dir, { recursive: true, force: true });
});

function cliRecords(): MaskRecordDoc[][] {
	const out = join(ws.dir, 'cli_masks.jsonl');
	runCore([
		'mask', '--msa', ws.msa, '--strategy', 'bucket',
		'--contacts', ws.contacts, '--projections', ws.projections,
		'--seed', String(SEED), '--epochs', String(EPOCHS), '--output', out
	]);
	const records = readFileSync(out, 'utf8')
		.split('\n')
		.filter((l) => l.trim())
		.map((l) => JSON.parse(l) as MaskRecordDoc);
	const perEpoch: MaskRecordDoc[][] = [];
	for (let e = 0; e < EPOCHS; e++) {
		perEpoch.push(records.slice(e * 6, (e + 1) * 6));
	}
	return perEpoch;
}

/** The core's own collation (plans + corruption applied in-process). */
function coreCollated(): { id: string; epoch: number; corrupted: string; targets: Record<string, string> }[] {
	const script = `
import json, sys
from pathlib import Path
from structmask import MaskConfig, collate_batch, parse_msa, project_contact_graph
from structmask.fileio import read_contact_map, read_projections

msa_path, contacts_path, proj_path, seed, epochs = sys.argv[1:6]
msa = parse_msa(Path(msa_path).read_text())
wt_map, _ = read_contact_map(contacts_path)
rows = read_projections(proj_path)
contacts = [project_contact_graph(wt_map, p) for _, p in rows]
seqs = [msa.effective_sequence(i) for i in range(len(msa))]
ids = [r.id for r in msa.rows]
out = []
for epoch in range(int(epochs)):
    for rec in collate_batch(seqs, ids, contacts, "bucket", MaskConfig(), int(seed), epoch):
        out.append({
            "id": rec.sequence_id,
            "epoch": rec.epoch,
            "corrupted": rec.corruption.corrupted,
            "targets": {str(k): v for k, v in sorted(rec.corruption.targets.items())},
        })
print(json.dumps(out))
`;
	const result = spawnSync(
		'python3',
		['-c', script, ws.msa, ws.contacts, ws.projections, String(SEED), String(EPOCHS)],
		{ encoding: 'utf8' }
	);
	if (result.status !== 0) throw new Error(`core collation failed: ${result.stderr}`);
	return JSON.parse(result.stdout);
}

describe('binding parity with the CLI', () => {
	it('samplePlan equals the mask-batch record field for field', () => {
		const perEpoch = cliRecords();
		const session = openSession(ws.contacts, ws.projections, {
			msa: ws.msa,
			masterSeed: SEED,
			strategy: 'bucket'
		});
		for (let epoch = 0; epoch < EPOCHS; epoch++) {
			for (const expected of perEpoch[epoch]) {
				expect(session.samplePlan(expected.id, epoch)).toEqual(expected);
			}
		}
		session.close();
	});

	it('collate equals the core library corruption field for field', () => {
		const expected = coreCollated();
		const session = openSession(ws.contacts, ws.projections, {
			msa: ws.msa,
			masterSeed: SEED,
			strategy: 'bucket'
		});
		for (let epoch = 0; epoch < EPOCHS; epoch++) {
			const collated = session.collate(session.sequenceIds, epoch);
			for (const got of collated) {
				const want = expected.find((e) => e.id === got.id && e.epoch === epoch);
				expect(want).toBeDefined();
				expect(got.corrupted).toBe(want!.corrupted);
				const gotTargets = Object.fromEntries(
					Object.entries(got.targets).map(([k, v]) => [String(k), v])
				);
				expect(gotTargets).toEqual(want!.targets);
			}
		}
		session.close();
	});
});
