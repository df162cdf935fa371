import { mkdtempSync, rmSync } from 'node:fs';
import { readFileSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';

import { cliBinary, runCli } from './cli.js';
import { CoreError, SessionClosedError, UnknownSequenceError } from './errors.js';
import {
	loadContactMap,
	loadProjections,
	parseMaskBatch,
	type ContactMapDoc,
	type MaskRecordDoc,
	type ProjectionDoc
} from './formats.js';
import { effectiveSequence, parseMsa, type MsaRow } from './msa.js';

export type Strategy = 'random' | 'bucket' | 'gm_span';

export interface SessionConfig {
	/** Alignment the plans are drawn for (same file the CLI consumes). */
	msa: string;
	masterSeed: number;
	strategy?: Strategy;
	rateMin?: number;
	rateMax?: number;
	/** Exploration rate: fraction of the mask budget placed uniformly. */
	exploration?: number;
	maskToken?: string;
	seedPool?: 'contacts' | 'all';
	wtId?: string;
	/** Core CLI binary; defaults to $STRUCTMASK_BIN or "structmask". */
	cliBin?: string;
}

export interface CollatedSequence {
	id: string;
	corrupted: string;
	targets: Record<number, string>;
}

const STRATEGY_FLAGS: Record<Strategy, string> = {
	random: 'random',
	bucket: 'bucket',
	gm_span: 'gm-span'
};

/**
 * Immutable view over one protein's contact map, projections, and alignment.
 *
 * Plans are produced by the core CLI (one invocation per epoch, memoized),
 * so every field is identical to what `structmask mask` writes for the same
 * master seed, epoch, and sequence ordinal; this wrapper only applies the
 * recorded actions to reconstruct corrupted token strings.
 */
export class Session {
	readonly contactMap: ContactMapDoc;
	readonly projections: ProjectionDoc[];
	readonly sequenceIds: string[];

	private readonly rows: MsaRow[];
	private readonly sequences = new Map<string, string>();
	private readonly batches = new Map<string, Map<string, MaskRecordDoc>>();
	private closed = false;

	constructor(
		private readonly contactFile: string,
		private readonly projectionsFile: string,
		private readonly config: SessionConfig
	) {
		this.contactMap = loadContactMap(contactFile);
		this.projections = loadProjections(projectionsFile);
		this.rows = parseMsa(config.msa);
		if (this.rows.length !== this.projections.length) {
			throw new CoreError(
				`alignment has ${this.rows.length} rows but projections file has ${this.projections.length}`
			);
		}
		const wtIndex = config.wtId ? this.rows.findIndex((r) => r.id === config.wtId) : 0;
		if (wtIndex < 0) {
			throw new CoreError(`wild-type id ${JSON.stringify(config.wtId)} not found in alignment`);
		}
		const wtGapped = this.rows[wtIndex].gapped;
		this.sequenceIds = this.rows.map((r) => r.id);
		this.rows.forEach((row, ordinal) => {
			const proj = this.projections[ordinal];
			if (proj.id !== row.id) {
				throw new CoreError(`projection record ${ordinal} is for ${proj.id}, expected ${row.id}`);
			}
			if (this.sequences.has(row.id)) {
				throw new CoreError(`duplicate sequence id ${JSON.stringify(row.id)}`);
			}
			const seq = effectiveSequence(wtGapped, row.gapped);
			if (seq.length !== proj.s_to_wt.length) {
				throw new CoreError(
					`row ${row.id}: sequence length ${seq.length} != projection length ${proj.s_to_wt.length}`
				);
			}
			this.sequences.set(row.id, seq);
		});
	}

	get maskToken(): string {
		return this.config.maskToken ?? '#';
	}

	private assertOpen(): void {
		if (this.closed) throw new SessionClosedError();
	}

	private cliArgs(epoch: number, strategy: Strategy, output: string): string[] {
		const cfg = this.config;
		return [
			'mask',
			'--msa', cfg.msa,
			'--strategy', STRATEGY_FLAGS[strategy],
			'--contacts', this.contactFile,
			'--projections', this.projectionsFile,
			'--seed', String(cfg.masterSeed),
			'--lambda', String(cfg.exploration ?? 0.2),
			'--rate-min', String(cfg.rateMin ?? 0.15),
			'--rate-max', String(cfg.rateMax ?? 0.75),
			'--epochs', '1',
			'--epoch-start', String(epoch),
			'--mask-token', this.maskToken,
			'--seed-pool', cfg.seedPool ?? 'contacts',
			...(cfg.wtId ? ['--wt-id', cfg.wtId] : []),
			'--output', output
		];
	}

	private batchFor(epoch: number, strategy: Strategy): Map<string, MaskRecordDoc> {
		const key = `${strategy}:${epoch}`;
		const cached = this.batches.get(key);
		if (cached) return cached;

		const scratch = mkdtempSync(join(tmpdir(), 'structmask-'));
		let records: MaskRecordDoc[];
		try {
			const output = join(scratch, 'batch.jsonl');
			runCli(cliBinary(this.config.cliBin), this.cliArgs(epoch, strategy, output));
			records = parseMaskBatch(readFileSync(output, 'utf8'));
		} finally {
			rmSync(scratch, { recursive: true, force: true });
		}
		if (records.length !== this.sequenceIds.length) {
			throw new CoreError(`core emitted ${records.length} records for ${this.sequenceIds.length} sequences`);
		}
		const byId = new Map(records.map((r) => [r.id, r]));
		this.batches.set(key, byId);
		return byId;
	}

	/** The core's wire-format plan record for one sequence at one epoch. */
	samplePlan(sequenceId: string, epoch: number, strategy?: Strategy): MaskRecordDoc {
		this.assertOpen();
		const batch = this.batchFor(epoch, strategy ?? this.config.strategy ?? 'bucket');
		const record = batch.get(sequenceId);
		if (!record) throw new UnknownSequenceError(sequenceId);
		return record;
	}

	/** Corrupted token strings plus target maps for a batch of sequences. */
	collate(sequenceIds: string[], epoch: number, strategy?: Strategy): CollatedSequence[] {
		this.assertOpen();
		return sequenceIds.map((id) => {
			const record = this.samplePlan(id, epoch, strategy);
			const original = this.sequences.get(id);
			if (original === undefined) throw new UnknownSequenceError(id);
			const chars = [...original];
			for (const act of record.actions) {
				if (act.action === 'MASK') chars[act.pos] = this.maskToken;
				else if (act.action === 'RANDOM') chars[act.pos] = act.replacement as string;
			}
			const targets: Record<number, string> = {};
			for (const t of record.targets) targets[t.pos] = t.token;
			return { id, corrupted: chars.join(''), targets };
		});
	}

	/** Idempotent; later queries raise SessionClosedError. */
	close(): void {
		this.closed = true;
		this.batches.clear();
	}
}

export function openSession(
	contactFile: string,
	projectionsFile: string,
	config: SessionConfig
): Session {
	return new Session(contactFile, projectionsFile, config);
}
