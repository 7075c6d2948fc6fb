// Entry point: wires the WebSocket protocol, keyboard steering, and canvas
// rendering together. All game state lives on the server; this file only
// forwards inputs and draws what the last frames said.

import { KeyboardSteering, MIN_SEND_INTERVAL_MS } from "./input.js";
import { colorForModel } from "./palette.js";
import { inputFrame, parseServerMessage, resetFrame, startFrame } from "./protocol.js";
import { drawScene, halfExtentFor } from "./render.js";
import { applyServer, elapsed, hitTotal, newView, remainingItems, score } from "./view.js";
import type { GameView } from "./view.js";

const canvas = document.getElementById("arena") as HTMLCanvasElement;
const ctx = canvas.getContext("2d");
const scoreEl = document.getElementById("score") as HTMLElement;
const elapsedEl = document.getElementById("elapsed") as HTMLElement;
const modelEl = document.getElementById("model") as HTMLElement;
const remainingEl = document.getElementById("remaining") as HTMLElement;
const statusEl = document.getElementById("status") as HTMLElement;
const resetButton = document.getElementById("reset") as HTMLButtonElement;

const seedParam = new URLSearchParams(window.location.search).get("seed");
const seed = seedParam === null ? 0 : Math.max(0, Math.floor(Number(seedParam)) || 0);

let view: GameView = newView();
const steering = new KeyboardSteering();
steering.attach(window);

let audio: AudioContext | null = null;

function ensureAudio(): void {
    if (audio === null && typeof AudioContext !== "undefined") {
        try {
            audio = new AudioContext();
        } catch {
            audio = null;
        }
    }
}

function beep(frequency: number): void {
    if (audio === null) {
        return;
    }
    try {
        const osc = audio.createOscillator();
        const gain = audio.createGain();
        osc.frequency.value = frequency;
        gain.gain.setValueAtTime(0.15, audio.currentTime);
        gain.gain.exponentialRampToValueAtTime(1e-4, audio.currentTime + 0.15);
        osc.connect(gain).connect(audio.destination);
        osc.start();
        osc.stop(audio.currentTime + 0.15);
    } catch {
        // Audio is a nicety; never let it break the session.
    }
}

window.addEventListener("keydown", ensureAudio, { once: true });
window.addEventListener("pointerdown", ensureAudio, { once: true });

const wsProtocol = window.location.protocol === "https:" ? "wss" : "ws";
const socket = new WebSocket(`${wsProtocol}://${window.location.host}/ws`);

socket.addEventListener("open", () => {
    statusEl.textContent = `connected — session seed ${seed}`;
    socket.send(startFrame(seed));
});

socket.addEventListener("close", () => {
    statusEl.textContent = "disconnected — reload to start a new session";
});

socket.addEventListener("message", (event) => {
    let msg;
    try {
        msg = parseServerMessage(String(event.data));
    } catch (err) {
        statusEl.textContent = `bad frame from server: ${String(err)}`;
        return;
    }
    applyServer(view, msg);
    if (msg.type === "hit") {
        beep(880);
        statusEl.textContent = `picked up item ${msg.id} for ${msg.points} points`;
    } else if (msg.type === "end") {
        beep(440);
        statusEl.textContent =
            `finished: ${msg.score} points in ${msg.elapsed.toFixed(1)} s ` +
            `(hit frames total ${hitTotal(view)}) — press R for a new round`;
    } else if (msg.type === "error") {
        statusEl.textContent = `server: ${msg.message}`;
    }
});

function sendReset(): void {
    if (socket.readyState === WebSocket.OPEN) {
        view = newView();
        socket.send(resetFrame());
        statusEl.textContent = "restarted";
    }
}

resetButton.addEventListener("click", sendReset);
window.addEventListener("keydown", (event) => {
    if (event.key.toLowerCase() === "r") {
        sendReset();
    }
});

// Steering commands go out at a fixed cadence while the session is live; zero
// commands are sent too, so releasing every key actually stops accelerating.
window.setInterval(() => {
    if (socket.readyState !== WebSocket.OPEN || view.end !== null) {
        return;
    }
    const { ax, ay } = steering.command();
    socket.send(inputFrame(ax, ay));
}, MIN_SEND_INTERVAL_MS);

function resizeCanvas(): void {
    const ratio = window.devicePixelRatio || 1;
    const rect = canvas.getBoundingClientRect();
    canvas.width = Math.max(1, Math.round(rect.width * ratio));
    canvas.height = Math.max(1, Math.round(rect.height * ratio));
}

window.addEventListener("resize", resizeCanvas);
resizeCanvas();

function renderHud(): void {
    scoreEl.textContent = String(score(view));
    elapsedEl.textContent = `${elapsed(view).toFixed(1)} s`;
    remainingEl.textContent = String(remainingItems(view));
    if (view.tick !== null) {
        modelEl.textContent = `P${view.tick.model}`;
        modelEl.style.backgroundColor = colorForModel(view.tick.model);
    }
}

function frame(): void {
    if (ctx !== null) {
        drawScene(ctx, view, {
            halfExtentM: halfExtentFor(view),
            width: canvas.width,
            height: canvas.height,
        });
    }
    renderHud();
    window.requestAnimationFrame(frame);
}

window.requestAnimationFrame(frame);
