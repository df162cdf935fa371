export const VERSION = '0.1.0';

export { coreVersion } from './cli.js';
export { CoreError, SessionClosedError, UnknownSequenceError } from './errors.js';
export type {
	ContactMapDoc,
	MaskActionDoc,
	MaskRecordDoc,
	MaskTargetDoc,
	ProjectionDoc
} from './formats.js';
export { effectiveSequence, parseMsa } from './msa.js';
export {
	openSession,
	Session,
	type CollatedSequence,
	type SessionConfig,
	type Strategy
} from './session.js';
