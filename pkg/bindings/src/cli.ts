import { spawnSync } from 'node:child_process';

import { CoreError, type CoreErrorPayload } from './errors.js';

export function cliBinary(override?: string): string {
	return override ?? process.env.STRUCTMASK_BIN ?? 'structmask';
}

/** Run the core CLI; nonzero exit becomes a CoreError carrying its error JSON. */
export function runCli(bin: string, args: string[]): string {
	const result = spawnSync(bin, args, { encoding: 'utf8', maxBuffer: 256 * 1024 * 1024 });
	if (result.error) {
		throw new CoreError(`failed to launch ${bin}: ${result.error.message}`);
	}
	if (result.status !== 0) {
		const lines = (result.stderr ?? '').trim().split('\n');
		for (let i = lines.length - 1; i >= 0; i--) {
			try {
				const payload = JSON.parse(lines[i]) as CoreErrorPayload;
				if (payload && typeof payload === 'object' && 'error' in payload) {
					throw new CoreError(payload.error.message, payload);
				}
			} catch (err) {
				if (err instanceof CoreError) throw err;
				// not JSON; keep scanning upward
			}
		}
		throw new CoreError(`${bin} exited with ${result.status}: ${result.stderr}`);
	}
	return result.stdout ?? '';
}

export function coreVersion(bin?: string): string {
	const out = runCli(cliBinary(bin), ['--version']);
	const match = out.match(/(\d+\.\d+\.\d+)/);
	if (!match) {
		throw new CoreError(`could not parse version from ${JSON.stringify(out)}`);
	}
	return match[1];
}
