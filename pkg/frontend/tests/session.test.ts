import { describe, expect, it } from "vitest";
import {
  SessionController,
  parseSessionLog,
  type SessionApi,
} from "../src/session";
import type { CandidateSetView } from "../src/types";

const HEADER =
  '{"backend": "retrieval", "created_at": "2024-01-01T00:00:00+00:00", "id": "s0001", "type": "header"}';

function eventLine(seq: number, role: string, kind: string, content: string): string {
  return JSON.stringify({ content, kind, meta: {}, role, seq, type: "event" });
}

const CANDIDATES: CandidateSetView = {
  candidates: [
    { smiles: "CCO", valid: true, sim_to_prev: null, padded: false },
    { smiles: "CCCO", valid: true, sim_to_prev: 0.6, padded: false },
    { smiles: "CCO", valid: true, sim_to_prev: 1.0, padded: true },
  ],
  chosen: 0,
};

/** Scripted SessionApi that records calls and serves canned responses. */
function stubApi(overrides: Partial<SessionApi> = {}) {
  const calls: Array<{ method: string; args: unknown[] }> = [];
  let log = HEADER + "\n";
  const api: SessionApi = {
    async createSession(backend?: string) {
      calls.push({ method: "createSession", args: [backend] });
      return { id: "s0001", backend: "retrieval", created_at: "2024-01-01T00:00:00+00:00" };
    },
    async submitTextTurn(sessionId, text, opts) {
      calls.push({ method: "submitTextTurn", args: [sessionId, text, opts] });
      log = [HEADER, eventLine(1, "user", "text", text), eventLine(2, "system", "molecule", "CCO"), ""].join("\n");
      return CANDIDATES;
    },
    async describeMolecule(sessionId, smiles) {
      calls.push({ method: "describeMolecule", args: [sessionId, smiles] });
      log = [HEADER, eventLine(1, "user", "molecule", smiles), eventLine(2, "system", "text", "an alcohol."), ""].join("\n");
      return "an alcohol.";
    },
    async exportSession(sessionId) {
      calls.push({ method: "exportSession", args: [sessionId] });
      return log;
    },
    ...overrides,
  };
  return { api, calls };
}

describe("parseSessionLog", () => {
  it("splits a header-only export into a header and no events", () => {
    const parsed = parseSessionLog(HEADER + "\n");
    expect(parsed.header.id).toBe("s0001");
    expect(parsed.header.backend).toBe("retrieval");
    expect(parsed.events).toEqual([]);
  });

  it("parses event lines in order", () => {
    const text = [HEADER, eventLine(1, "user", "text", "hi"), eventLine(2, "system", "molecule", "CCO"), ""].join("\n");
    const parsed = parseSessionLog(text);
    expect(parsed.events.map((e) => e.seq)).toEqual([1, 2]);
    expect(parsed.events[0]?.content).toBe("hi");
  });

  it("rejects an empty export", () => {
    expect(() => parseSessionLog("")).toThrow("empty session log");
  });

  it("rejects a log that does not start with a header", () => {
    expect(() => parseSessionLog(eventLine(1, "user", "text", "hi") + "\n")).toThrow("header");
  });
});

describe("SessionController lifecycle", () => {
  it("starts empty: header mirrored, no events, no candidates", async () => {
    const { api } = stubApi();
    const controller = new SessionController(api);
    await controller.start();
    expect(controller.view.id).toBe("s0001");
    expect(controller.view.header?.backend).toBe("retrieval");
    expect(controller.view.events).toEqual([]);
    expect(controller.view.candidates).toBeNull();
  });

  it("refuses to start twice", async () => {
    const { api } = stubApi();
    const controller = new SessionController(api);
    await controller.start();
    await expect(controller.start()).rejects.toThrow("already started");
  });

  it("leaves no session behind when the service is down, and retry works", async () => {
    let attempts = 0;
    const { api } = stubApi({
      async createSession() {
        attempts += 1;
        if (attempts === 1) throw new TypeError("fetch failed");
        return { id: "s0001", backend: "retrieval", created_at: "t" };
      },
    });
    const controller = new SessionController(api);
    await expect(controller.start()).rejects.toThrow("fetch failed");
    expect(controller.view.id).toBeNull();
    await controller.start();
    expect(controller.view.id).toBe("s0001");
  });
});

describe("SessionController turns", () => {
  it("commits a text turn and mirrors the refreshed log", async () => {
    const { api, calls } = stubApi();
    const controller = new SessionController(api);
    await controller.start();
    const result = await controller.submitText("  a small alcohol  ");
    expect(result).toEqual(CANDIDATES);
    expect(controller.view.candidates).toEqual(CANDIDATES);
    expect(controller.view.events.map((e) => [e.role, e.kind])).toEqual([
      ["user", "text"],
      ["system", "molecule"],
    ]);
    const turn = calls.find((c) => c.method === "submitTextTurn");
    expect(turn?.args[1]).toBe("a small alcohol");
    expect(turn?.args[2]).toEqual({ refineFrom: undefined });
  });

  it("rejects empty text locally without touching the network", async () => {
    const { api, calls } = stubApi();
    const controller = new SessionController(api);
    await controller.start();
    const before = calls.length;
    await expect(controller.submitText("   ")).rejects.toThrow("empty turn text");
    expect(calls.length).toBe(before);
  });

  it("changes nothing when the turn fails, so the draft can be resent", async () => {
    const { api } = stubApi({
      async submitTextTurn() {
        throw new Error("backend unavailable");
      },
    });
    const controller = new SessionController(api);
    await controller.start();
    await expect(controller.submitText("anything")).rejects.toThrow("backend unavailable");
    expect(controller.view.candidates).toBeNull();
    expect(controller.view.events).toEqual([]);
    expect(controller.busy).toBe(false);
  });

  it("describes a molecule and mirrors both committed events", async () => {
    const { api } = stubApi();
    const controller = new SessionController(api);
    await controller.start();
    await expect(controller.describeMolecule("CCO")).resolves.toBe("an alcohol.");
    expect(controller.view.events.map((e) => [e.role, e.kind])).toEqual([
      ["user", "molecule"],
      ["system", "text"],
    ]);
  });
});

describe("refine-from selection", () => {
  it("sends the marked index with the next turn, then clears it", async () => {
    const { api, calls } = stubApi();
    const controller = new SessionController(api);
    await controller.start();
    await controller.submitText("first");
    controller.selectRefineFrom(1);
    expect(controller.view.refineFrom).toBe(1);
    await controller.submitText("second");
    const turns = calls.filter((c) => c.method === "submitTextTurn");
    expect(turns[1]?.args[2]).toEqual({ refineFrom: 1 });
    expect(controller.view.refineFrom).toBeNull();
  });

  it("rejects an index outside the candidate set", async () => {
    const { api } = stubApi();
    const controller = new SessionController(api);
    await controller.start();
    expect(() => controller.selectRefineFrom(0)).toThrow("no candidate");
    await controller.submitText("first");
    expect(() => controller.selectRefineFrom(3)).toThrow("no candidate at index 3");
    expect(() => controller.selectRefineFrom(-1)).toThrow("no candidate");
  });

  it("keeps the selection when the refining turn fails", async () => {
    let fail = false;
    const { api } = stubApi({
      async submitTextTurn(sessionId, text, opts) {
        if (fail) throw new Error("backend unavailable");
        void sessionId;
        void text;
        void opts;
        return CANDIDATES;
      },
    });
    const controller = new SessionController(api);
    await controller.start();
    await controller.submitText("first");
    controller.selectRefineFrom(2);
    fail = true;
    await expect(controller.submitText("second")).rejects.toThrow("backend unavailable");
    expect(controller.view.refineFrom).toBe(2);
  });
});

describe("export", () => {
  it("returns the server bytes untouched", async () => {
    const { api } = stubApi();
    const controller = new SessionController(api);
    await controller.start();
    await expect(controller.exportLog()).resolves.toBe(HEADER + "\n");
  });

  it("is disabled while a turn is in flight", async () => {
    let release: (value: CandidateSetView) => void = () => {};
    const { api } = stubApi({
      submitTextTurn: () =>
        new Promise<CandidateSetView>((resolve) => {
          release = resolve;
        }),
    });
    const controller = new SessionController(api);
    await controller.start();
    const pending = controller.submitText("slow turn");
    expect(controller.busy).toBe(true);
    await expect(controller.exportLog()).rejects.toThrow("export disabled during a turn");
    release(CANDIDATES);
    await pending;
    expect(controller.busy).toBe(false);
    await expect(controller.exportLog()).resolves.toBeTypeOf("string");
  });

  it("requires a session", async () => {
    const { api } = stubApi();
    const controller = new SessionController(api);
    await expect(controller.exportLog()).rejects.toThrow("no session started");
  });
});
