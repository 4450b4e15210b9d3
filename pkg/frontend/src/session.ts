import type {
  CandidateSetView,
  SessionCreated,
  SessionEvent,
  SessionHeader,
} from "./types";

/** The slice of the service the controller needs; ApiClient satisfies it. */
export interface SessionApi {
  createSession(backend?: string): Promise<SessionCreated>;
  submitTextTurn(
    sessionId: string,
    text: string,
    opts?: { k?: number; refineFrom?: number },
  ): Promise<CandidateSetView>;
  describeMolecule(sessionId: string, smiles: string): Promise<string>;
  exportSession(sessionId: string): Promise<string>;
}

/**
 * What the page shows: the session identity, the event log as the server
 * tells it, and the candidate set of the most recent text turn.
 */
export interface SessionView {
  id: string | null;
  header: SessionHeader | null;
  events: SessionEvent[];
  candidates: CandidateSetView | null;
  /** Index the user marked with "refine from this", for the next turn. */
  refineFrom: number | null;
}

export function emptyView(): SessionView {
  return { id: null, header: null, events: [], candidates: null, refineFrom: null };
}

/** Split an exported NDJSON log into its header and event records. */
export function parseSessionLog(text: string): {
  header: SessionHeader;
  events: SessionEvent[];
} {
  const lines = text.split("\n").filter((line) => line.length > 0);
  if (lines.length === 0) throw new Error("empty session log");
  const header = JSON.parse(lines[0]!) as SessionHeader;
  if (header.type !== "header") throw new Error("log does not start with a header");
  const events = lines.slice(1).map((line) => JSON.parse(line) as SessionEvent);
  return { header, events };
}

/**
 * Drives one session against the service. Every state change waits for the
 * server: after a turn commits, the event list is re-read from the export
 * endpoint rather than assembled locally, so the view can never contain an
 * event the server does not have.
 */
export class SessionController {
  readonly view: SessionView = emptyView();
  private inFlight = false;

  constructor(private readonly api: SessionApi) {}

  get busy(): boolean {
    return this.inFlight;
  }

  async start(backend?: string): Promise<void> {
    if (this.view.id !== null) throw new Error("session already started");
    const created = await this.api.createSession(backend);
    this.view.id = created.id;
    await this.refreshLog();
  }

  /**
   * Submit one description turn. On failure nothing in the view changes,
   * so the caller can leave the input box populated and retry.
   */
  async submitText(text: string): Promise<CandidateSetView> {
    const trimmed = text.trim();
    if (!trimmed) throw new Error("empty turn text");
    const id = this.requireSession();
    const refineFrom = this.view.refineFrom;
    this.inFlight = true;
    try {
      const result = await this.api.submitTextTurn(id, trimmed, {
        refineFrom: refineFrom === null ? undefined : refineFrom,
      });
      this.view.candidates = result;
      this.view.refineFrom = null;
      await this.refreshLog();
      return result;
    } finally {
      this.inFlight = false;
    }
  }

  /** Ask the service to describe a molecule inside this session. */
  async describeMolecule(smiles: string): Promise<string> {
    const trimmed = smiles.trim();
    if (!trimmed) throw new Error("empty molecule");
    const id = this.requireSession();
    this.inFlight = true;
    try {
      const description = await this.api.describeMolecule(id, trimmed);
      await this.refreshLog();
      return description;
    } finally {
      this.inFlight = false;
    }
  }

  /** Mark a candidate so the next turn refines from it instead of rank 1. */
  selectRefineFrom(index: number | null): void {
    if (index !== null) {
      const set = this.view.candidates;
      if (!set || index < 0 || index >= set.candidates.length) {
        throw new Error(`no candidate at index ${index}`);
      }
    }
    this.view.refineFrom = index;
  }

  /**
   * The session log exactly as the server serializes it. Disabled while a
   * turn is in flight; a mid-turn export could otherwise race the commit.
   */
  async exportLog(): Promise<string> {
    if (this.inFlight) throw new Error("export disabled during a turn");
    const id = this.requireSession();
    return this.api.exportSession(id);
  }

  private requireSession(): string {
    if (this.view.id === null) throw new Error("no session started");
    return this.view.id;
  }

  private async refreshLog(): Promise<void> {
    const id = this.requireSession();
    const parsed = parseSessionLog(await this.api.exportSession(id));
    this.view.header = parsed.header;
    this.view.events = parsed.events;
  }
}
