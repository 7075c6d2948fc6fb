// Client-side session state. The client is deliberately stateless about game
// rules: score, elapsed time, item status, and the motion model all come from
// the latest server tick. The only thing accumulated locally is the trail of
// fused positions (for drawing) and the hit/end/error feed (for the HUD).

import type { EndMessage, HitMessage, ServerMessage, TickMessage } from "./protocol.js";

export interface TrailPoint {
    east: number;
    north: number;
    model: number;
}

export interface TrailSegment {
    model: number;
    points: Array<[number, number]>;
}

export interface GameView {
    tick: TickMessage | null;
    trail: TrailPoint[];
    truthTrail: Array<[number, number]>;
    hits: HitMessage[];
    end: EndMessage | null;
    lastError: string | null;
}

export const MAX_TRAIL_POINTS = 4000;

export function newView(): GameView {
    return { tick: null, trail: [], truthTrail: [], hits: [], end: null, lastError: null };
}

export function applyServer(view: GameView, msg: ServerMessage): GameView {
    switch (msg.type) {
        case "tick":
            view.tick = msg;
            view.trail.push({ east: msg.fused[0], north: msg.fused[1], model: msg.model });
            view.truthTrail.push([msg.truth[0], msg.truth[1]]);
            if (view.trail.length > MAX_TRAIL_POINTS) {
                view.trail.splice(0, view.trail.length - MAX_TRAIL_POINTS);
            }
            if (view.truthTrail.length > MAX_TRAIL_POINTS) {
                view.truthTrail.splice(0, view.truthTrail.length - MAX_TRAIL_POINTS);
            }
            break;
        case "hit":
            view.hits.push(msg);
            break;
        case "end":
            view.end = msg;
            break;
        case "error":
            view.lastError = msg.message;
            break;
    }
    return view;
}

export function score(view: GameView): number {
    if (view.end !== null) {
        return view.end.score;
    }
    return view.tick === null ? 0 : view.tick.score;
}

export function elapsed(view: GameView): number {
    if (view.end !== null) {
        return view.end.elapsed;
    }
    return view.tick === null ? 0 : view.tick.elapsed;
}

export function remainingItems(view: GameView): number {
    if (view.tick === null) {
        return 0;
    }
    return view.tick.items.filter((item) => !item.collected).length;
}

export function hitTotal(view: GameView): number {
    return view.hits.reduce((sum, hit) => sum + hit.points, 0);
}

// Group consecutive trail points into same-model segments. Each segment after
// the first starts at the previous segment's endpoint so the colored polyline
// has no gaps — the same convention the service uses for its GeoJSON export.
export function trailSegments(trail: readonly TrailPoint[]): TrailSegment[] {
    const segments: TrailSegment[] = [];
    for (const point of trail) {
        const last = segments[segments.length - 1];
        if (last !== undefined && last.model === point.model) {
            last.points.push([point.east, point.north]);
        } else {
            const points: Array<[number, number]> = [];
            const prev = last?.points[last.points.length - 1];
            if (prev !== undefined) {
                points.push(prev);
            }
            points.push([point.east, point.north]);
            segments.push({ model: point.model, points });
        }
    }
    return segments;
}
