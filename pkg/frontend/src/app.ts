// Triage console wiring. Every verdict shown comes from one server
// response stored in a TriageEntry; the only client-side computation is
// the optional threshold display filter.

import { ApiClient, ApiError } from "./api.js";
import {
  badgeClass,
  formatProbability,
  percentages,
  sortedChips,
  truncate,
} from "./format.js";
import { loadWorklist, saveWorklist } from "./storage.js";
import type { LabelsResponse, TriageEntry, TypeScore, UiConfig } from "./types.js";

export interface AppDeps {
  fetchFn?: typeof fetch;
  storage?: Storage;
  now?: () => Date;
}

export interface AppHandle {
  /** Resolves once labels are fetched and the stored worklist is rendered. */
  ready: Promise<void>;
  /** The submit currently in flight, if any; at most one at a time. */
  inFlight: Promise<void> | null;
}

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  attrs: Record<string, string> = {},
  text = "",
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  if (text) node.textContent = text;
  return node;
}

export function initApp(doc: Document, config: UiConfig, deps: AppDeps = {}): AppHandle {
  const fetchFn = deps.fetchFn ?? fetch;
  const storage = deps.storage ?? localStorage;
  const now = deps.now ?? (() => new Date());
  const api = new ApiClient(config.api_base_url, fetchFn);

  const root = doc.getElementById("app") ?? doc.body.appendChild(el(doc, "div", { id: "app" }));
  root.textContent = "";

  // -- compose area ----------------------------------------------------------
  const compose = el(doc, "section", { class: "compose" });
  const textarea = el(doc, "textarea", {
    id: "description",
    placeholder: "Paste a vulnerability description",
    rows: "5",
  });
  const submitBtn = el(doc, "button", { id: "submit", disabled: "" }, "Classify");
  const inlineError = el(doc, "p", { id: "inline-error", class: "inline-error", hidden: "" });
  compose.append(textarea, submitBtn, inlineError);

  const banner = el(doc, "div", { id: "banner", class: "banner", hidden: "" });
  const bannerText = el(doc, "span", { id: "banner-text" });
  const retryBtn = el(doc, "button", { id: "retry" }, "Retry");
  banner.append(bannerText, retryBtn);

  // -- result detail ---------------------------------------------------------
  const detail = el(doc, "section", { id: "detail", hidden: "" });
  const badge = el(doc, "span", { id: "severity-badge", class: "badge" });
  const severityProbs = el(doc, "ul", { id: "severity-probs" });
  const chips = el(doc, "ul", { id: "chips" });
  const meta = el(doc, "p", { id: "meta" });
  detail.append(badge, severityProbs, chips, meta);

  // -- worklist --------------------------------------------------------------
  const worklistSection = el(doc, "section", { id: "worklist-section" });
  const emptyState = el(
    doc,
    "p",
    { id: "empty-state" },
    "No descriptions triaged yet. Paste one above to start a worklist.",
  );
  const worklistTable = el(doc, "table", { id: "worklist" });
  const worklistBody = doc.createElement("tbody");
  worklistTable.append(worklistBody);
  worklistSection.append(el(doc, "h2", {}, "Worklist"), emptyState, worklistTable);

  const legend = el(doc, "p", { id: "labels-legend" });

  root.append(compose, banner, detail, worklistSection, legend);

  // -- state -----------------------------------------------------------------
  const entries: TriageEntry[] = loadWorklist(storage);
  let labels: LabelsResponse | null = null;
  let pending = false;

  const handle: AppHandle = { ready: Promise.resolve(), inFlight: null };

  function updateSubmitState(): void {
    const empty = textarea.value.trim() === "";
    submitBtn.disabled = pending || empty;
  }

  function highlighted(score: TypeScore): boolean {
    // Display filter only; the server's verdict stays in the entry untouched.
    if (config.threshold_override !== undefined) {
      return score.probability >= config.threshold_override;
    }
    return score.predicted;
  }

  function renderDetail(entry: TriageEntry): void {
    const r = entry.response;
    badge.textContent = r.severity_label;
    badge.setAttribute("class", `badge ${badgeClass(r.severity_index)}`);

    severityProbs.textContent = "";
    const shares = percentages(r.severity_probs);
    r.severity_probs.forEach((_, i) => {
      const name = labels?.severities[i] ?? `#${i}`;
      severityProbs.append(el(doc, "li", {}, `${name} ${shares[i]}`));
    });

    chips.textContent = "";
    for (const score of sortedChips(r.types)) {
      const cls = highlighted(score) ? "chip predicted" : "chip";
      chips.append(
        el(doc, "li", { class: cls }, `${score.name} ${formatProbability(score.probability)}`),
      );
    }

    meta.textContent = `model ${r.model_version} · ${r.latency_ms.toFixed(1)} ms`;
    detail.removeAttribute("hidden");
  }

  function renderWorklist(): void {
    worklistBody.textContent = "";
    if (entries.length === 0) {
      emptyState.removeAttribute("hidden");
      return;
    }
    emptyState.setAttribute("hidden", "");
    for (const entry of [...entries].reverse()) {
      const row = doc.createElement("tr");
      const rowBadge = el(
        doc,
        "span",
        { class: `badge ${badgeClass(entry.response.severity_index)}` },
        entry.response.severity_label,
      );
      const badgeCell = el(doc, "td", { class: "cell-severity" });
      badgeCell.append(rowBadge);
      const predictedNames = entry.response.types
        .filter((t) => highlighted(t))
        .map((t) => t.name)
        .join(", ");
      row.append(
        el(doc, "td", { class: "cell-text" }, truncate(entry.submitted_text)),
        badgeCell,
        el(doc, "td", { class: "cell-types" }, predictedNames),
        el(doc, "td", { class: "cell-time" }, entry.submitted_at),
      );
      row.addEventListener("click", () => renderDetail(entry));
      worklistBody.append(row);
    }
  }

  function renderLegend(): void {
    if (labels) legend.textContent = `Types: ${labels.types.join(" · ")}`;
  }

  async function doSubmit(): Promise<void> {
    const text = textarea.value.trim();
    if (pending || text === "") return;
    pending = true;
    updateSubmitState();
    banner.setAttribute("hidden", "");
    inlineError.setAttribute("hidden", "");
    try {
      const response = await api.classify(text, config.threshold_override);
      const entry: TriageEntry = {
        submitted_text: text,
        response,
        submitted_at: now().toISOString(),
      };
      entries.push(entry);
      saveWorklist(entries, storage);
      renderDetail(entry);
      renderWorklist();
    } catch (err) {
      if (err instanceof ApiError && err.status === 400) {
        inlineError.textContent = err.message;
        inlineError.removeAttribute("hidden");
      } else {
        const reason = err instanceof ApiError ? err.message : "network error, request not sent";
        bannerText.textContent = reason;
        banner.removeAttribute("hidden");
      }
    } finally {
      pending = false;
      updateSubmitState();
    }
  }

  function startSubmit(): void {
    if (pending) return;
    handle.inFlight = doSubmit().finally(() => {
      handle.inFlight = null;
    });
  }

  textarea.addEventListener("input", updateSubmitState);
  submitBtn.addEventListener("click", startSubmit);
  retryBtn.addEventListener("click", startSubmit);

  renderWorklist();
  handle.ready = api
    .labels()
    .then((data) => {
      labels = data;
      renderLegend();
    })
    .catch((err) => {
      legend.textContent = `labels unavailable: ${err instanceof Error ? err.message : err}`;
    });

  return handle;
}
