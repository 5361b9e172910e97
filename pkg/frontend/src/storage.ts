// LocalStorage-backed worklist persistence.

import type { TriageEntry } from "./types.js";

const KEY = "vulntriage_worklist_v1";

export function loadWorklist(storage: Storage = localStorage): TriageEntry[] {
  try {
    const raw = storage.getItem(KEY);
    if (!raw) return [];
    const data = JSON.parse(raw) as unknown;
    if (!Array.isArray(data)) return [];
    return data.filter(
      (e): e is TriageEntry =>
        typeof e === "object" &&
        e !== null &&
        typeof (e as TriageEntry).submitted_text === "string" &&
        typeof (e as TriageEntry).submitted_at === "string" &&
        typeof (e as TriageEntry).response === "object",
    );
  } catch {
    return [];
  }
}

export function saveWorklist(entries: TriageEntry[], storage: Storage = localStorage): void {
  storage.setItem(KEY, JSON.stringify(entries));
}

export function clearWorklist(storage: Storage = localStorage): void {
  storage.removeItem(KEY);
}
