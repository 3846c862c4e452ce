// End-to-end UI behavior against a stub that mirrors the scoring service
// exactly (traditional weights, sigmoid of the weighted average). The three
// canonical inputs are pinned to the same values the CLI `score` command
// asserts in the backend test suite, closing the UI/API equivalence loop.

import { afterEach, beforeEach, describe, expect, test, vi } from "vitest";

import { ApiClient } from "../src/api.js";
import { ChecklistApp } from "../src/main.js";

const TRADITIONAL = [2, 1, 1, 1, 1, 2, 2];
const THRESHOLD = 0.6;

function serverScore(attrs: number[]) {
  // test-only oracle mirroring the service implementation
  const wsum = TRADITIONAL.reduce((a, b) => a + b, 0);
  const wavg = attrs.reduce((acc, a, i) => acc + TRADITIONAL[i]! * a, 0) / wsum;
  const probability = 1 / (1 + Math.exp(-wavg));
  const integer = attrs.reduce(
    (acc, a, i) => acc + (a >= 0.5 ? TRADITIONAL[i]! : 0),
    0,
  );
  return {
    traditional_score: integer,
    weighted_average: wavg,
    melanoma_probability: probability,
    referral: { traditional: integer >= 3, learned: probability >= THRESHOLD },
    weights_used: TRADITIONAL,
    threshold_used: THRESHOLD,
  };
}

function installFetchStub(options: { offline?: boolean } = {}) {
  const calls: string[] = [];
  const stub = vi.fn(async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = String(input);
    calls.push(url);
    if (options.offline) {
      throw new TypeError("fetch failed");
    }
    if (url.endsWith("/api/weights")) {
      return jsonResponse({ traditional: TRADITIONAL, learned: TRADITIONAL, threshold: THRESHOLD });
    }
    if (url.endsWith("/api/score")) {
      const body = JSON.parse(String(init?.body));
      if (!Array.isArray(body.attrs) || body.attrs.length !== 7) {
        return jsonResponse(
          { errors: [{ field: "attrs", message: "attrs must have exactly 7 entries" }] },
          400,
        );
      }
      return jsonResponse(serverScore(body.attrs));
    }
    return jsonResponse({ detail: "Not Found" }, 404);
  });
  vi.stubGlobal("fetch", stub);
  return { stub, calls };
}

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

async function startApp(fragment = ""): Promise<{ root: HTMLElement; app: ChecklistApp }> {
  const root = document.createElement("main");
  document.body.appendChild(root);
  const app = new ChecklistApp(root, new ApiClient("http://stub"));
  await app.start(fragment);
  return { root, app };
}

function displayed(root: HTMLElement) {
  return {
    traditional: root.querySelector(".traditional-score")?.textContent ?? null,
    probability: root.querySelector(".melanoma-probability")?.textContent ?? null,
  };
}

async function settle() {
  await new Promise((resolve) => setTimeout(resolve, 0));
  await new Promise((resolve) => setTimeout(resolve, 0));
}

beforeEach(() => {
  document.body.replaceChildren();
});

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("canonical input equivalence with the CLI", () => {
  test("all attributes off shows 0 and 0.500", async () => {
    installFetchStub();
    const { root } = await startApp();
    expect(displayed(root)).toEqual({ traditional: "0", probability: "0.500" });
  });

  test("all attributes on shows 10 and 0.731", async () => {
    installFetchStub();
    const { root } = await startApp("a=1,1,1,1,1,1,1");
    expect(displayed(root)).toEqual({ traditional: "10", probability: "0.731" });
  });

  test("blue-whitish veil alone shows 2 and 0.550", async () => {
    installFetchStub();
    const { root } = await startApp("a=0,0,0,0,0,1,0");
    expect(displayed(root)).toEqual({ traditional: "2", probability: "0.550" });
    expect(root.querySelector(".learned-panel .referral")?.classList.contains("no")).toBe(true);
  });
});

describe("monotonicity passthrough", () => {
  test("toggling any attribute on never lowers either displayed score", async () => {
    installFetchStub();
    const { root, app } = await startApp("a=0,0,1,0,0,0,0");
    for (let index = 0; index < 7; index++) {
      const before = displayed(root);
      app.setMode(index, "present");
      await settle();
      const after = displayed(root);
      expect(Number(after.traditional)).toBeGreaterThanOrEqual(Number(before.traditional));
      expect(Number(after.probability)).toBeGreaterThanOrEqual(Number(before.probability));
    }
  });

  test("slider at 0.5 lies strictly between the binary extremes", async () => {
    installFetchStub();
    const { root, app } = await startApp();
    app.setMode(5, "present");
    await settle();
    const high = Number(displayed(root).probability);
    app.setMode(5, "absent");
    await settle();
    const low = Number(displayed(root).probability);
    app.setMode(5, "slider");
    app.setSlider(5, 0.5);
    await settle();
    const mid = Number(displayed(root).probability);
    expect(mid).toBeGreaterThan(low);
    expect(mid).toBeLessThan(high);
  });
});

describe("offline behavior", () => {
  test("unreachable API shows the banner and disables inputs", async () => {
    installFetchStub({ offline: true });
    const { root } = await startApp();
    const banner = root.querySelector<HTMLElement>(".offline-banner");
    expect(banner?.hidden).toBe(false);
    const inputs = [...root.querySelectorAll<HTMLInputElement>("input")];
    expect(inputs.length).toBeGreaterThan(0);
    expect(inputs.every((i) => i.disabled)).toBe(true);
    expect(displayed(root)).toEqual({ traditional: null, probability: null });
  });

  test("no stale score survives going offline", async () => {
    const { stub } = installFetchStub();
    const { root, app } = await startApp("a=1,1,1,1,1,1,1");
    expect(displayed(root).probability).toBe("0.731");
    stub.mockImplementation(async () => {
      throw new TypeError("fetch failed");
    });
    app.setMode(0, "absent");
    await settle();
    expect(displayed(root)).toEqual({ traditional: null, probability: null });
  });
});

describe("validation errors", () => {
  test("a 400 renders an inline field error", async () => {
    const { stub } = installFetchStub();
    const { root, app } = await startApp();
    stub.mockImplementation(async () =>
      jsonResponse({ errors: [{ field: "attrs", message: "bad vector" }] }, 400),
    );
    await app.submit();
    const error = root.querySelector<HTMLElement>(".error-box");
    expect(error?.hidden).toBe(false);
    expect(error?.textContent).toContain("attrs");
  });
});

describe("request sequencing", () => {
  test("a newer submission wins over a slower older one", async () => {
    const { stub } = installFetchStub();
    const { root, app } = await startApp();

    let releaseFirst: () => void = () => {};
    stub.mockImplementationOnce(async (input: RequestInfo | URL, init?: RequestInit) => {
      await new Promise<void>((resolve) => {
        releaseFirst = resolve;
        init?.signal?.addEventListener("abort", () => resolve());
      });
      const body = JSON.parse(String(init?.body));
      return jsonResponse(serverScore(body.attrs));
    });

    app.setMode(0, "present"); // slow request
    await settle();
    app.setMode(5, "present"); // fast request supersedes it
    await settle();
    releaseFirst();
    await settle();

    // both APN and BWV are on in the final state: score 4
    expect(displayed(root).traditional).toBe("4");
  });
});

describe("fragment synchronization", () => {
  test("state changes propagate to the fragment callback", async () => {
    installFetchStub();
    const root = document.createElement("main");
    document.body.appendChild(root);
    const fragments: string[] = [];
    const app = new ChecklistApp(root, new ApiClient("http://stub"), (f) => fragments.push(f));
    await app.start();
    app.setMode(5, "present");
    await settle();
    expect(fragments.at(-1)).toContain("a=0,0,0,0,0,1,0");
  });
});
