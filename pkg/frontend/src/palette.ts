// Colors shared with the service's GeoJSON output: the trail drawn by the UI
// and the trail exported by the replay tool must agree on what each motion
// model looks like.

export const MODEL_COLORS: readonly string[] = ["#1f77b4", "#2ca02c", "#d62728"];

export const TRUTH_COLOR = "#9e9e9e";
export const FUSED_MARKER_COLOR = "#ffffff";
export const ARENA_EDGE_COLOR = "#444444";
export const BACKGROUND_COLOR = "#111418";
export const HUD_TEXT_COLOR = "#e0e0e0";
export const COLLECTED_ITEM_COLOR = "#555555";

export interface ItemStyle {
    color: string;
    radiusM: number;
    label: string;
}

export const ITEM_STYLES: Readonly<Record<string, ItemStyle>> = {
    small_coin: { color: "#f1c40f", radiusM: 1.2, label: "coin" },
    large_coin: { color: "#e67e22", radiusM: 1.7, label: "coin+" },
    chest: { color: "#a0703c", radiusM: 2.0, label: "chest" },
};

const UNKNOWN_ITEM_STYLE: ItemStyle = { color: "#bbbbbb", radiusM: 1.2, label: "?" };

export function colorForModel(model: number): string {
    const color = MODEL_COLORS[model];
    if (color === undefined) {
        throw new RangeError(`no color for model index ${model}`);
    }
    return color;
}

export function styleForItem(kind: string): ItemStyle {
    return ITEM_STYLES[kind] ?? UNKNOWN_ITEM_STYLE;
}
