/** Error JSON emitted by the core CLI on stderr. */
export interface CoreErrorPayload {
	error: { type: string; message: string };
}

/** A core-side failure; `core` carries the CLI's error JSON when available. */
export class CoreError extends Error {
	constructor(
		message: string,
		readonly core?: CoreErrorPayload
	) {
		super(message);
		this.name = 'CoreError';
	}
}

export class SessionClosedError extends Error {
	constructor() {
		super('session is closed');
		this.name = 'SessionClosedError';
	}
}

export class UnknownSequenceError extends Error {
	constructor(id: string) {
		super(`unknown sequence id ${JSON.stringify(id)}`);
		this.name = 'UnknownSequenceError';
	}
}
