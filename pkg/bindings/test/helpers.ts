import { spawnSync } from 'node:child_process';
import { copyFileSync, mkdtempSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), '..', 'fixtures');

export function cliBin(): string {
	return process.env.STRUCTMASK_BIN ?? 'structmask';
}

export function runCore(args: string[]): string {
	const result = spawnSync(cliBin(), args, { encoding: 'utf8' });
	if (result.status !== 0) {
		throw new Error(`${cliBin()} ${args.join(' ')} failed: ${result.stderr}`);
	}
	return result.stdout;
}

export interface Workspace {
	dir: string;
	msa: string;
	contacts: string;
	projections: string;
}

/** Copy toy inputs to a scratch dir and derive contacts + projections via the CLI. */
export function makeWorkspace(): Workspace {
	const dir = mkdtempSync(join(tmpdir(), 'structmask-bindings-'));
	for (const name of ['toy.pdb', 'toy_protein.fasta', 'toy_msa.a2m']) {
		copyFileSync(join(FIXTURES, name), join(dir, name));
	}
	const contacts = join(dir, 'contacts.json');
	const projections = join(dir, 'projections.jsonl');
	runCore([
		'build-contacts', join(dir, 'toy.pdb'), '--chain', 'A',
		'--sequence', join(dir, 'toy_protein.fasta'), '--protein', 'toy',
		'--output', contacts
	]);
	runCore(['project-msa', '--msa', join(dir, 'toy_msa.a2m'), '--contacts', contacts, '--output', projections]);
	return { dir, msa: join(dir, 'toy_msa.a2m'), contacts, projections };
}
