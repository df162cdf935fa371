import { readFileSync } from 'node:fs';

import { CoreError } from './errors.js';

export interface MsaRow {
	id: string;
	gapped: string;
}

const GAPS = new Set(['-', '.']);

/** FASTA/a2m rows: lowercase residues uppercased, gap characters kept. */
export function parseMsa(path: string): MsaRow[] {
	const rows: MsaRow[] = [];
	let id: string | null = null;
	let chunks: string[] = [];
	const flush = () => {
		if (id !== null) rows.push({ id, gapped: chunks.join('').toUpperCase() });
	};
	for (const raw of readFileSync(path, 'utf8').split('\n')) {
		const line = raw.trim();
		if (!line) continue;
		if (line.startsWith('>')) {
			flush();
			id = line.slice(1).split(/\s+/)[0] ?? '';
			chunks = [];
		} else {
			if (id === null) throw new CoreError(`invalid alignment ${path}: data before first header`);
			chunks.push(line);
		}
	}
	flush();
	if (rows.length === 0) throw new CoreError(`invalid alignment ${path}: no records`);
	const width = rows[0].gapped.length;
	for (const row of rows) {
		if (row.gapped.length !== width) {
			throw new CoreError(`invalid alignment ${path}: row ${row.id} has width ${row.gapped.length}, expected ${width}`);
		}
	}
	return rows;
}

/**
 * Ungapped residues of a row with '.' expanded to the wild-type character,
 * mirroring the core's projection sweep so lengths line up with s_to_wt.
 */
export function effectiveSequence(wtGapped: string, gapped: string): string {
	const out: string[] = [];
	for (let c = 0; c < gapped.length; c++) {
		const w = GAPS.has(wtGapped[c]) ? '-' : wtGapped[c];
		let s = gapped[c];
		if (s === '.') s = w;
		if (s !== '-') out.push(s);
	}
	return out.join('');
}
