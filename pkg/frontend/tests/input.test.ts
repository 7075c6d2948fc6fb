import { describe, expect, it } from "vitest";

import {
    ACCEL_COMMAND_MPS2,
    KeyboardSteering,
    MIN_SEND_INTERVAL_MS,
    RateLimiter,
    keysToAccel,
} from "../src/input.js";

describe("keysToAccel", () => {
    it("is zero with nothing pressed", () => {
        expect(keysToAccel(new Set())).toEqual({ ax: 0, ay: 0 });
    });

    it("maps arrows and WASD to the same directions", () => {
        expect(keysToAccel(new Set(["ArrowUp"]))).toEqual({ ax: 0, ay: ACCEL_COMMAND_MPS2 });
        expect(keysToAccel(new Set(["w"]))).toEqual({ ax: 0, ay: ACCEL_COMMAND_MPS2 });
        expect(keysToAccel(new Set(["ArrowLeft"]))).toEqual({ ax: -ACCEL_COMMAND_MPS2, ay: 0 });
        expect(keysToAccel(new Set(["d"]))).toEqual({ ax: ACCEL_COMMAND_MPS2, ay: 0 });
    });

    it("is case-insensitive", () => {
        expect(keysToAccel(new Set(["W"]))).toEqual(keysToAccel(new Set(["w"])));
    });

    it("cancels opposing keys", () => {
        expect(keysToAccel(new Set(["ArrowUp", "ArrowDown"]))).toEqual({ ax: 0, ay: 0 });
        expect(keysToAccel(new Set(["a", "d"]))).toEqual({ ax: 0, ay: 0 });
    });

    it("normalizes diagonals to the command magnitude, never above it", () => {
        const { ax, ay } = keysToAccel(new Set(["ArrowUp", "ArrowRight"]));
        expect(Math.hypot(ax, ay)).toBeCloseTo(ACCEL_COMMAND_MPS2, 12);
        expect(ax).toBeCloseTo(ay, 12);
    });

    it("ignores keys that do not steer", () => {
        expect(keysToAccel(new Set(["x", "Enter", " "]))).toEqual({ ax: 0, ay: 0 });
    });
});

describe("RateLimiter", () => {
    it("allows at most one send per interval", () => {
        const limiter = new RateLimiter(MIN_SEND_INTERVAL_MS);
        expect(limiter.ready(1000)).toBe(true);
        expect(limiter.ready(1000 + MIN_SEND_INTERVAL_MS - 1)).toBe(false);
        expect(limiter.ready(1000 + MIN_SEND_INTERVAL_MS)).toBe(true);
    });

    it("stays under 50 Hz over a busy second", () => {
        const limiter = new RateLimiter(MIN_SEND_INTERVAL_MS);
        let sent = 0;
        for (let ms = 0; ms < 1000; ms++) {
            if (limiter.ready(ms)) {
                sent++;
            }
        }
        expect(sent).toBeLessThanOrEqual(50);
        expect(sent).toBeGreaterThan(0);
    });
});

describe("KeyboardSteering", () => {
    it("tracks held keys and releases them", () => {
        const steering = new KeyboardSteering();
        steering.keyDown("ArrowUp");
        steering.keyDown("ArrowRight");
        let cmd = steering.command();
        expect(Math.hypot(cmd.ax, cmd.ay)).toBeCloseTo(ACCEL_COMMAND_MPS2, 12);
        steering.keyUp("ArrowRight");
        cmd = steering.command();
        expect(cmd).toEqual({ ax: 0, ay: ACCEL_COMMAND_MPS2 });
        steering.releaseAll();
        expect(steering.command()).toEqual({ ax: 0, ay: 0 });
    });

    it("treats keydown of W and keyup of w as the same key", () => {
        const steering = new KeyboardSteering();
        steering.keyDown("W");
        steering.keyUp("w");
        expect(steering.command()).toEqual({ ax: 0, ay: 0 });
    });
});
