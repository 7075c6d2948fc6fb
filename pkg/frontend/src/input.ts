// Keyboard steering: arrow keys / WASD are held down to request acceleration.
// The mapping from pressed keys to an (ax, ay) command is pure so it can be
// tested without a DOM; attach() is the thin event-listener shim.

export const ACCEL_COMMAND_MPS2 = 2.0;
export const MIN_SEND_INTERVAL_MS = 80; // 12.5 Hz, well under the 50 Hz ceiling

const KEY_DIRECTIONS: Readonly<Record<string, [number, number]>> = {
    arrowup: [0, 1],
    arrowdown: [0, -1],
    arrowleft: [-1, 0],
    arrowright: [1, 0],
    w: [0, 1],
    s: [0, -1],
    a: [-1, 0],
    d: [1, 0],
};

export function isSteeringKey(key: string): boolean {
    return key.toLowerCase() in KEY_DIRECTIONS;
}

export function keysToAccel(
    pressed: ReadonlySet<string>,
    magnitude: number = ACCEL_COMMAND_MPS2,
): { ax: number; ay: number } {
    let dx = 0;
    let dy = 0;
    for (const key of pressed) {
        const dir = KEY_DIRECTIONS[key.toLowerCase()];
        if (dir !== undefined) {
            dx += dir[0];
            dy += dir[1];
        }
    }
    const norm = Math.hypot(dx, dy);
    if (norm === 0) {
        return { ax: 0, ay: 0 };
    }
    return { ax: (dx / norm) * magnitude, ay: (dy / norm) * magnitude };
}

export class RateLimiter {
    private lastMs = -Infinity;

    constructor(private readonly minIntervalMs: number) {}

    ready(nowMs: number): boolean {
        if (nowMs - this.lastMs < this.minIntervalMs) {
            return false;
        }
        this.lastMs = nowMs;
        return true;
    }
}

export class KeyboardSteering {
    private readonly pressed = new Set<string>();

    keyDown(key: string): void {
        if (isSteeringKey(key)) {
            this.pressed.add(key.toLowerCase());
        }
    }

    keyUp(key: string): void {
        this.pressed.delete(key.toLowerCase());
    }

    releaseAll(): void {
        this.pressed.clear();
    }

    command(): { ax: number; ay: number } {
        return keysToAccel(this.pressed);
    }

    attach(target: EventTarget): void {
        target.addEventListener("keydown", (event) => {
            const key = (event as KeyboardEvent).key;
            if (isSteeringKey(key)) {
                event.preventDefault();
                this.keyDown(key);
            }
        });
        target.addEventListener("keyup", (event) => {
            this.keyUp((event as KeyboardEvent).key);
        });
        // Dropping keyup while the tab is unfocused would leave a key stuck on.
        target.addEventListener("blur", () => this.releaseAll());
    }
}
