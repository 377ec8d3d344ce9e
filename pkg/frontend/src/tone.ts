import type { ToneName } from "./types";

// Total mapping, no third state: every feedback bubble is red or green.
export function toneColor(tone: ToneName): "red" | "green" {
  return tone === "Critical" ? "red" : "green";
}

export function toneClass(tone: ToneName): string {
  return `feedback feedback-${toneColor(tone)}`;
}
