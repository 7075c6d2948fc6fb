// Canvas rendering of the arena. The world→pixel mapping is pure (tested);
// drawScene is the imperative part that paints a GameView onto a 2D context.

import {
    ARENA_EDGE_COLOR,
    BACKGROUND_COLOR,
    COLLECTED_ITEM_COLOR,
    FUSED_MARKER_COLOR,
    TRUTH_COLOR,
    colorForModel,
    styleForItem,
} from "./palette.js";
import type { GameView } from "./view.js";
import { trailSegments } from "./view.js";

export const MIN_HALF_EXTENT_M = 20;
export const EXTENT_MARGIN = 1.1;
export const RING_SPACING_M = 25;

export interface Viewport {
    halfExtentM: number;
    width: number;
    height: number;
}

// Smallest square window, centered on the origin, that keeps everything in
// frame: items, the fused estimate, and the truth position.
export function halfExtentFor(view: GameView): number {
    let extent = MIN_HALF_EXTENT_M;
    const consider = (e: number, n: number) => {
        extent = Math.max(extent, Math.abs(e) * EXTENT_MARGIN, Math.abs(n) * EXTENT_MARGIN);
    };
    if (view.tick !== null) {
        consider(view.tick.fused[0], view.tick.fused[1]);
        consider(view.tick.truth[0], view.tick.truth[1]);
        for (const item of view.tick.items) {
            consider(item.pos[0], item.pos[1]);
        }
    }
    return extent;
}

export function worldToCanvas(east: number, north: number, vp: Viewport): [number, number] {
    const scale = Math.min(vp.width, vp.height) / (2 * vp.halfExtentM);
    return [vp.width / 2 + east * scale, vp.height / 2 - north * scale];
}

export function metersToPixels(meters: number, vp: Viewport): number {
    return (meters * Math.min(vp.width, vp.height)) / (2 * vp.halfExtentM);
}

export function drawScene(ctx: CanvasRenderingContext2D, view: GameView, vp: Viewport): void {
    ctx.fillStyle = BACKGROUND_COLOR;
    ctx.fillRect(0, 0, vp.width, vp.height);

    drawRings(ctx, vp);
    drawTruthTrail(ctx, view, vp);
    drawFusedTrail(ctx, view, vp);
    drawItems(ctx, view, vp);
    drawMarkers(ctx, view, vp);
}

function drawRings(ctx: CanvasRenderingContext2D, vp: Viewport): void {
    const [cx, cy] = worldToCanvas(0, 0, vp);
    ctx.strokeStyle = ARENA_EDGE_COLOR;
    ctx.lineWidth = 1;
    for (let r = RING_SPACING_M; r <= vp.halfExtentM; r += RING_SPACING_M) {
        ctx.beginPath();
        ctx.arc(cx, cy, metersToPixels(r, vp), 0, 2 * Math.PI);
        ctx.stroke();
    }
    ctx.beginPath();
    ctx.moveTo(cx - 5, cy);
    ctx.lineTo(cx + 5, cy);
    ctx.moveTo(cx, cy - 5);
    ctx.lineTo(cx, cy + 5);
    ctx.stroke();
}

function drawPolyline(
    ctx: CanvasRenderingContext2D,
    points: ReadonlyArray<readonly [number, number]>,
    vp: Viewport,
): void {
    ctx.beginPath();
    points.forEach((p, i) => {
        const [x, y] = worldToCanvas(p[0], p[1], vp);
        if (i === 0) {
            ctx.moveTo(x, y);
        } else {
            ctx.lineTo(x, y);
        }
    });
    ctx.stroke();
}

function drawTruthTrail(ctx: CanvasRenderingContext2D, view: GameView, vp: Viewport): void {
    if (view.truthTrail.length < 2) {
        return;
    }
    ctx.strokeStyle = TRUTH_COLOR;
    ctx.lineWidth = 1;
    ctx.globalAlpha = 0.6;
    drawPolyline(ctx, view.truthTrail, vp);
    ctx.globalAlpha = 1;
}

function drawFusedTrail(ctx: CanvasRenderingContext2D, view: GameView, vp: Viewport): void {
    ctx.lineWidth = 2;
    for (const segment of trailSegments(view.trail)) {
        if (segment.points.length < 2) {
            continue;
        }
        ctx.strokeStyle = colorForModel(segment.model);
        drawPolyline(ctx, segment.points, vp);
    }
}

function drawItems(ctx: CanvasRenderingContext2D, view: GameView, vp: Viewport): void {
    if (view.tick === null) {
        return;
    }
    for (const item of view.tick.items) {
        const style = styleForItem(item.kind);
        const [x, y] = worldToCanvas(item.pos[0], item.pos[1], vp);
        const radius = Math.max(3, metersToPixels(style.radiusM, vp));
        ctx.beginPath();
        ctx.arc(x, y, radius, 0, 2 * Math.PI);
        if (item.collected) {
            ctx.strokeStyle = COLLECTED_ITEM_COLOR;
            ctx.stroke();
        } else {
            ctx.fillStyle = style.color;
            ctx.fill();
        }
    }
}

function drawMarkers(ctx: CanvasRenderingContext2D, view: GameView, vp: Viewport): void {
    if (view.tick === null) {
        return;
    }
    const [tx, ty] = worldToCanvas(view.tick.truth[0], view.tick.truth[1], vp);
    ctx.fillStyle = TRUTH_COLOR;
    ctx.beginPath();
    ctx.arc(tx, ty, 3, 0, 2 * Math.PI);
    ctx.fill();

    const [fx, fy] = worldToCanvas(view.tick.fused[0], view.tick.fused[1], vp);
    ctx.strokeStyle = FUSED_MARKER_COLOR;
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.arc(fx, fy, 5, 0, 2 * Math.PI);
    ctx.stroke();
}
