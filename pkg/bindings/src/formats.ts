import { readFileSync } from 'node:fs';

import { CoreError } from './errors.js';

export interface ContactMapDoc {
	protein: string;
	length: number;
	tau: number;
	resolved: boolean[];
	edges: [number, number][];
	warning?: string;
}

export interface ProjectionDoc {
	id: string;
	s_to_wt: number[];
	wt_to_s: number[];
}

export interface MaskActionDoc {
	pos: number;
	action: 'MASK' | 'RANDOM' | 'KEEP';
	replacement: string | null;
}

export interface MaskTargetDoc {
	pos: number;
	token: string;
}

/** One line of a mask-batch file, exactly as the CLI wrote it. */
export interface MaskRecordDoc {
	id: string;
	rate: number;
	strategy: string;
	struct_indices: number[];
	rand_indices: number[];
	actions: MaskActionDoc[];
	targets: MaskTargetDoc[];
}

function fail(path: string, reason: string): never {
	throw new CoreError(`invalid file ${path}: ${reason}`, {
		error: { type: 'FileFormatError', message: `invalid file ${path}: ${reason}` }
	});
}

export function loadContactMap(path: string): ContactMapDoc {
	let doc: ContactMapDoc;
	try {
		doc = JSON.parse(readFileSync(path, 'utf8')) as ContactMapDoc;
	} catch (err) {
		fail(path, String(err));
	}
	if (!Number.isInteger(doc.length) || doc.length < 1) fail(path, 'bad length');
	if (!Array.isArray(doc.resolved) || doc.resolved.length !== doc.length) {
		fail(path, 'resolved flags do not cover every position');
	}
	if (!Array.isArray(doc.edges)) fail(path, 'missing edges');
	for (const edge of doc.edges) {
		const [i, j] = edge;
		if (!Number.isInteger(i) || !Number.isInteger(j) || i >= j || i < 0 || j >= doc.length) {
			fail(path, `bad edge [${i}, ${j}]`);
		}
		if (!doc.resolved[i] || !doc.resolved[j]) {
			fail(path, `edge [${i}, ${j}] touches an unresolved position`);
		}
	}
	return doc;
}

export function loadProjections(path: string): ProjectionDoc[] {
	const out: ProjectionDoc[] = [];
	let lines: string[];
	try {
		lines = readFileSync(path, 'utf8').split('\n');
	} catch (err) {
		fail(path, String(err));
	}
	for (const line of lines) {
		if (!line.trim()) continue;
		let doc: ProjectionDoc;
		try {
			doc = JSON.parse(line) as ProjectionDoc;
		} catch (err) {
			fail(path, String(err));
		}
		if (typeof doc.id !== 'string' || !Array.isArray(doc.s_to_wt) || !Array.isArray(doc.wt_to_s)) {
			fail(path, 'record is missing id/s_to_wt/wt_to_s');
		}
		doc.s_to_wt.forEach((v, u) => {
			if (v >= 0 && doc.wt_to_s[v] !== u) fail(path, `s_to_wt[${u}] = ${v} does not round-trip`);
		});
		doc.wt_to_s.forEach((u, v) => {
			if (u >= 0 && doc.s_to_wt[u] !== v) fail(path, `wt_to_s[${v}] = ${u} does not round-trip`);
		});
		out.push(doc);
	}
	if (out.length === 0) fail(path, 'no records');
	return out;
}

export function parseMaskBatch(text: string): MaskRecordDoc[] {
	const records: MaskRecordDoc[] = [];
	for (const line of text.split('\n')) {
		if (line.trim()) records.push(JSON.parse(line) as MaskRecordDoc);
	}
	return records;
}
