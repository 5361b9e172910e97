// Display helpers: badge classes, percentage rounding, chip ordering.

import type { TypeScore } from "./types.js";

// Index-aligned with the service's severity order.
const BADGE_CLASSES = ["severity-low", "severity-medium", "severity-high", "severity-critical"];

export function badgeClass(severityIndex: number): string {
  return BADGE_CLASSES[severityIndex] ?? "severity-unknown";
}

/**
 * Round a probability vector to one-decimal percentages whose displayed sum
 * is exact (largest-remainder allocation over tenths of a percent).
 */
export function percentages(probs: number[]): string[] {
  const total = probs.reduce((a, b) => a + b, 0);
  const targetTenths = Math.round(total * 1000);
  const scaled = probs.map((p) => p * 1000);
  const floors = scaled.map(Math.floor);
  let leftover = targetTenths - floors.reduce((a, b) => a + b, 0);
  const order = scaled
    .map((value, i) => ({ remainder: value - Math.floor(value), i }))
    .sort((a, b) => b.remainder - a.remainder || a.i - b.i);
  const tenths = floors.slice();
  for (const { i } of order) {
    if (leftover <= 0) break;
    tenths[i] += 1;
    leftover -= 1;
  }
  return tenths.map((t) => `${(t / 10).toFixed(1)}%`);
}

export function formatProbability(p: number): string {
  return `${(p * 100).toFixed(1)}%`;
}

/** Chips sorted by probability descending; equal scores keep server order. */
export function sortedChips(types: TypeScore[]): TypeScore[] {
  return types
    .map((t, i) => ({ t, i }))
    .sort((a, b) => b.t.probability - a.t.probability || a.i - b.i)
    .map(({ t }) => t);
}

export function truncate(text: string, max = 80): string {
  return text.length <= max ? text : `${text.slice(0, max - 1)}…`;
}
