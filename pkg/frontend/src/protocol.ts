// Wire protocol spoken over the game service's /ws endpoint. Every frame is
// a single JSON object with a "type" discriminator. parseServerMessage is the
// only entry point for inbound data and rejects anything malformed, so the
// rest of the client can trust the shapes.

export interface ItemState {
    id: number;
    kind: string;
    pos: [number, number];
    collected: boolean;
}

export interface TickMessage {
    type: "tick";
    t: number;
    fused: [number, number];
    truth: [number, number];
    model: number;
    score: number;
    elapsed: number;
    items: ItemState[];
}

export interface HitMessage {
    type: "hit";
    id: number;
    points: number;
}

export interface EndMessage {
    type: "end";
    score: number;
    elapsed: number;
}

export interface ErrorMessage {
    type: "error";
    message: string;
}

export type ServerMessage = TickMessage | HitMessage | EndMessage | ErrorMessage;

export class ProtocolError extends Error {}

function asFiniteNumber(value: unknown, field: string): number {
    if (typeof value !== "number" || !Number.isFinite(value)) {
        throw new ProtocolError(`field "${field}" is not a finite number`);
    }
    return value;
}

function asPair(value: unknown, field: string): [number, number] {
    if (!Array.isArray(value) || value.length !== 2) {
        throw new ProtocolError(`field "${field}" is not a 2-element array`);
    }
    return [asFiniteNumber(value[0], `${field}[0]`), asFiniteNumber(value[1], `${field}[1]`)];
}

function asItem(value: unknown, field: string): ItemState {
    if (typeof value !== "object" || value === null) {
        throw new ProtocolError(`field "${field}" is not an object`);
    }
    const record = value as Record<string, unknown>;
    if (typeof record.kind !== "string") {
        throw new ProtocolError(`field "${field}.kind" is not a string`);
    }
    if (typeof record.collected !== "boolean") {
        throw new ProtocolError(`field "${field}.collected" is not a boolean`);
    }
    return {
        id: asFiniteNumber(record.id, `${field}.id`),
        kind: record.kind,
        pos: asPair(record.pos, `${field}.pos`),
        collected: record.collected,
    };
}

export function parseServerMessage(raw: string): ServerMessage {
    let data: unknown;
    try {
        data = JSON.parse(raw);
    } catch (err) {
        throw new ProtocolError(`frame is not valid JSON: ${String(err)}`);
    }
    if (typeof data !== "object" || data === null || Array.isArray(data)) {
        throw new ProtocolError("frame is not a JSON object");
    }
    const record = data as Record<string, unknown>;
    switch (record.type) {
        case "tick": {
            if (!Array.isArray(record.items)) {
                throw new ProtocolError('field "items" is not an array');
            }
            return {
                type: "tick",
                t: asFiniteNumber(record.t, "t"),
                fused: asPair(record.fused, "fused"),
                truth: asPair(record.truth, "truth"),
                model: asFiniteNumber(record.model, "model"),
                score: asFiniteNumber(record.score, "score"),
                elapsed: asFiniteNumber(record.elapsed, "elapsed"),
                items: record.items.map((item, i) => asItem(item, `items[${i}]`)),
            };
        }
        case "hit":
            return {
                type: "hit",
                id: asFiniteNumber(record.id, "id"),
                points: asFiniteNumber(record.points, "points"),
            };
        case "end":
            return {
                type: "end",
                score: asFiniteNumber(record.score, "score"),
                elapsed: asFiniteNumber(record.elapsed, "elapsed"),
            };
        case "error": {
            if (typeof record.message !== "string") {
                throw new ProtocolError('field "message" is not a string');
            }
            return { type: "error", message: record.message };
        }
        default:
            throw new ProtocolError(`unknown frame type ${JSON.stringify(record.type)}`);
    }
}

export function startFrame(seed: number): string {
    if (!Number.isInteger(seed) || seed < 0) {
        throw new ProtocolError(`seed must be a non-negative integer, got ${seed}`);
    }
    return JSON.stringify({ type: "start", seed });
}

export function inputFrame(ax: number, ay: number): string {
    if (!Number.isFinite(ax) || !Number.isFinite(ay)) {
        throw new ProtocolError(`acceleration must be finite, got (${ax}, ${ay})`);
    }
    return JSON.stringify({ type: "input", ax, ay });
}

export function resetFrame(): string {
    return JSON.stringify({ type: "reset" });
}
