import { describe, expect, it } from "vitest";

import type { ItemState, TickMessage } from "../src/protocol.js";
import {
    MAX_TRAIL_POINTS,
    applyServer,
    elapsed,
    hitTotal,
    newView,
    remainingItems,
    score,
    trailSegments,
} from "../src/view.js";

function tick(partial: Partial<TickMessage> = {}): TickMessage {
    return {
        type: "tick",
        t: 0.08,
        fused: [0, 0],
        truth: [0, 0],
        model: 0,
        score: 0,
        elapsed: 0.08,
        items: [],
        ...partial,
    };
}

function item(id: number, collected: boolean): ItemState {
    return { id, kind: "small_coin", pos: [5, 5], collected };
}

describe("applyServer", () => {
    it("keeps score and elapsed from the latest tick only", () => {
        const view = newView();
        applyServer(view, tick({ score: 10, elapsed: 1.0 }));
        applyServer(view, tick({ score: 40, elapsed: 2.0 }));
        expect(score(view)).toBe(40);
        expect(elapsed(view)).toBe(2.0);
    });

    it("prefers the end frame's score once the session is over", () => {
        const view = newView();
        applyServer(view, tick({ score: 37, elapsed: 12.0 }));
        applyServer(view, { type: "end", score: 37, elapsed: 12.08 });
        expect(score(view)).toBe(37);
        expect(elapsed(view)).toBe(12.08);
        expect(view.end).not.toBeNull();
    });

    it("accumulates fused and truth trails and caps their length", () => {
        const view = newView();
        for (let i = 0; i < MAX_TRAIL_POINTS + 50; i++) {
            applyServer(view, tick({ fused: [i, -i], truth: [i + 0.5, -i] }));
        }
        expect(view.trail).toHaveLength(MAX_TRAIL_POINTS);
        expect(view.truthTrail).toHaveLength(MAX_TRAIL_POINTS);
        expect(view.trail[view.trail.length - 1]?.east).toBe(MAX_TRAIL_POINTS + 49);
        expect(view.trail[0]?.east).toBe(50);
    });

    it("collects hit frames and sums their points", () => {
        const view = newView();
        applyServer(view, { type: "hit", id: 0, points: 30 });
        applyServer(view, { type: "hit", id: 2, points: 7 });
        expect(view.hits).toHaveLength(2);
        expect(hitTotal(view)).toBe(37);
    });

    it("records the last error without disturbing the session", () => {
        const view = newView();
        applyServer(view, tick({ score: 5 }));
        applyServer(view, { type: "error", message: "bad input frame" });
        expect(view.lastError).toBe("bad input frame");
        expect(score(view)).toBe(5);
    });

    it("counts remaining items from the latest tick", () => {
        const view = newView();
        expect(remainingItems(view)).toBe(0);
        applyServer(view, tick({ items: [item(0, false), item(1, true), item(2, false)] }));
        expect(remainingItems(view)).toBe(2);
    });

    it("matches the service's accounting over a full session transcript", () => {
        // score on each tick == sum of hit points so far; end echoes the last
        // tick's score. The reducer must agree with all three at every step.
        const view = newView();
        let running = 0;
        const pickups = [
            { at: 10, points: 9 },
            { at: 25, points: 28 },
            { at: 40, points: 50 },
        ];
        for (let i = 1; i <= 50; i++) {
            const pickup = pickups.find((p) => p.at === i);
            if (pickup !== undefined) {
                applyServer(view, { type: "hit", id: pickup.at, points: pickup.points });
                running += pickup.points;
            }
            applyServer(view, tick({ t: i * 0.08, elapsed: i * 0.08, score: running }));
            expect(score(view)).toBe(hitTotal(view));
        }
        applyServer(view, { type: "end", score: running, elapsed: 4.0 });
        expect(score(view)).toBe(87);
        expect(hitTotal(view)).toBe(87);
    });
});

describe("trailSegments", () => {
    it("returns one segment for a single-model trail", () => {
        const segments = trailSegments([
            { east: 0, north: 0, model: 1 },
            { east: 1, north: 0, model: 1 },
            { east: 2, north: 0, model: 1 },
        ]);
        expect(segments).toHaveLength(1);
        expect(segments[0]?.model).toBe(1);
        expect(segments[0]?.points).toEqual([[0, 0], [1, 0], [2, 0]]);
    });

    it("splits on model changes and chains endpoints so there are no gaps", () => {
        const segments = trailSegments([
            { east: 0, north: 0, model: 0 },
            { east: 1, north: 0, model: 0 },
            { east: 2, north: 0, model: 2 },
            { east: 3, north: 0, model: 2 },
            { east: 4, north: 0, model: 1 },
        ]);
        expect(segments.map((s) => s.model)).toEqual([0, 2, 1]);
        // Each later segment starts exactly where the previous one ended.
        expect(segments[1]?.points[0]).toEqual([1, 0]);
        expect(segments[2]?.points[0]).toEqual([3, 0]);
    });

    it("is empty for an empty trail", () => {
        expect(trailSegments([])).toEqual([]);
    });
});
