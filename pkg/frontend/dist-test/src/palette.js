// Fixed component color palette so colors stay stable across submissions.
const PALETTE = [
    "#e6194b", "#3cb44b", "#4363d8", "#f58231", "#911eb4", "#42d4f4",
    "#f032e6", "#bfef45", "#fabed4", "#469990", "#9a6324", "#800000",
    "#808000", "#000075", "#a9a9a9", "#ffe119",
];
export function componentColor(componentId) {
    if (componentId < 0)
        return "#222222";
    return PALETTE[componentId % PALETTE.length];
}
export const INK_COLOR = "#222222";
