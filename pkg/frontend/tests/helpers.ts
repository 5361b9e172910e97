// Mock server plumbing: every test talks to these hand-built fixtures, so
// any verdict the UI shows is traceable to a canned response, never to
// client-side computation.

import type { ClassifyResponse, LabelsResponse, TypeScore } from "../src/types.js";

export const SEVERITY_NAMES = ["Low", "Medium", "High", "Critical"];

export const TYPE_NAMES = [
  "Buffer Overflow",
  "RCE",
  "DoS",
  "XSS",
  "SQL Injection",
  "CSRF",
  "Privilege Escalation",
  "Information Disclosure",
  "Directory Traversal",
  "Clickjacking",
];

export function labelsResponse(): LabelsResponse {
  return { severities: [...SEVERITY_NAMES], types: [...TYPE_NAMES] };
}

const DEFAULT_TYPE_PROBS = [0.12, 0.31, 0.08, 0.22, 0.92, 0.05, 0.18, 0.61, 0.09, 0.02];

export function typeScores(probs: number[] = DEFAULT_TYPE_PROBS, threshold = 0.5): TypeScore[] {
  return TYPE_NAMES.map((name, i) => ({
    name,
    probability: probs[i],
    predicted: probs[i] >= threshold,
  }));
}

export function classifyResponse(overrides: Partial<ClassifyResponse> = {}): ClassifyResponse {
  return {
    severity_label: "High",
    severity_index: 2,
    severity_probs: [0.05, 0.1, 0.7, 0.15],
    types: typeScores(),
    model_version: "mock-1",
    latency_ms: 4.2,
    ...overrides,
  };
}

export function json(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

export interface MockServer {
  fetchFn: typeof fetch;
  classifyBodies: Array<Record<string, unknown>>;
  labelsCalls: number;
  /** Replace the classify behavior mid-test (e.g. heal a failure). */
  setClassify(handler: ClassifyHandler): void;
}

type ClassifyHandler = (body: Record<string, unknown>) => Response | Promise<Response>;

export function mockServer(
  classify: ClassifyHandler = () => json(classifyResponse()),
  labels: () => Response = () => json(labelsResponse()),
): MockServer {
  const server: MockServer = {
    classifyBodies: [],
    labelsCalls: 0,
    setClassify(handler) {
      classify = handler;
    },
    fetchFn: (async (input: RequestInfo | URL, init?: RequestInit) => {
      const url = String(input);
      if (url.endsWith("/api/v1/classify")) {
        const body = JSON.parse(String(init?.body)) as Record<string, unknown>;
        server.classifyBodies.push(body);
        return classify(body);
      }
      if (url.endsWith("/api/v1/labels")) {
        server.labelsCalls += 1;
        return labels();
      }
      throw new Error(`unexpected request: ${url}`);
    }) as typeof fetch,
  };
  return server;
}

export function fakeStorage(): Storage {
  const items = new Map<string, string>();
  return {
    getItem: (key: string) => items.get(key) ?? null,
    setItem: (key: string, value: string) => {
      items.set(key, String(value));
    },
    removeItem: (key: string) => {
      items.delete(key);
    },
    clear: () => items.clear(),
    key: (index: number) => [...items.keys()][index] ?? null,
    get length() {
      return items.size;
    },
  } as Storage;
}
