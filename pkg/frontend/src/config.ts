// Startup configuration from a static config.json served next to the page.

import type { UiConfig } from "./types.js";

export class ConfigError extends Error {}

export function parseConfig(data: unknown): UiConfig {
  if (typeof data !== "object" || data === null) {
    throw new ConfigError("config must be a JSON object");
  }
  const record = data as Record<string, unknown>;
  const base = record["api_base_url"];
  if (typeof base !== "string" || base.trim() === "") {
    throw new ConfigError("api_base_url must be a non-empty string");
  }
  const config: UiConfig = { api_base_url: base.trim() };
  const override = record["threshold_override"];
  if (override !== undefined && override !== null) {
    if (typeof override !== "number" || !(override >= 0 && override <= 1)) {
      throw new ConfigError("threshold_override must be a number in [0, 1]");
    }
    config.threshold_override = override;
  }
  return config;
}

export async function loadConfig(
  fetchFn: typeof fetch = fetch,
  url = "./config.json",
): Promise<UiConfig> {
  const resp = await fetchFn(url);
  if (!resp.ok) {
    throw new ConfigError(`could not load ${url}: HTTP ${resp.status}`);
  }
  return parseConfig(await resp.json());
}
