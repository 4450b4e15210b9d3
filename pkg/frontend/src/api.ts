import type {
  ApiErrorBody,
  CandidateSetView,
  MoleculeGraph,
  SessionCreated,
  SimilarityResult,
} from "./types";

/** A non-2xx response, carrying the server's error envelope when present. */
export class ApiError extends Error {
  readonly status: number;
  readonly body: ApiErrorBody;

  constructor(status: number, body: ApiErrorBody) {
    super(body.detail || `HTTP ${status}`);
    this.name = "ApiError";
    this.status = status;
    this.body = body;
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/**
 * Thin typed client for the moldialog service.
 *
 * The constructor takes the fetch implementation so tests can substitute a
 * recording mock; production code passes nothing and gets the global fetch.
 */
export class ApiClient {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl: string, fetchImpl?: FetchLike) {
    this.base = baseUrl.replace(/\/+$/, "");
    this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
  }

  async createSession(backend?: string): Promise<SessionCreated> {
    const payload = backend ? { backend } : {};
    return this.json("POST", "/sessions", payload);
  }

  async submitTextTurn(
    sessionId: string,
    text: string,
    opts: { k?: number; refineFrom?: number } = {},
  ): Promise<CandidateSetView> {
    const payload: Record<string, unknown> = { kind: "text", content: text };
    if (opts.k !== undefined) payload.k = opts.k;
    if (opts.refineFrom !== undefined) payload.refine_from = opts.refineFrom;
    return this.json("POST", `/sessions/${sessionId}/turns`, payload);
  }

  async describeMolecule(sessionId: string, smiles: string): Promise<string> {
    const body = await this.json<{ description: string }>(
      "POST",
      `/sessions/${sessionId}/turns`,
      { kind: "molecule", content: smiles },
    );
    return body.description;
  }

  /** Raw NDJSON text of the session log, byte for byte as served. */
  async exportSession(sessionId: string): Promise<string> {
    const resp = await this.fetchImpl(`${this.base}/sessions/${sessionId}`);
    if (!resp.ok) throw await this.envelope(resp);
    return resp.text();
  }

  async parseMolecule(smiles: string): Promise<MoleculeGraph> {
    const resp = await this.fetchImpl(
      `${this.base}/molecules/parse?smiles=${encodeURIComponent(smiles)}`,
    );
    if (!resp.ok) throw await this.envelope(resp);
    return resp.json();
  }

  async similarity(a: string, b: string): Promise<SimilarityResult> {
    return this.json("POST", "/similarity", { a, b });
  }

  private async json<T>(
    method: string,
    path: string,
    payload: unknown,
  ): Promise<T> {
    const resp = await this.fetchImpl(this.base + path, {
      method,
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
    if (!resp.ok) throw await this.envelope(resp);
    return resp.json();
  }

  private async envelope(resp: Response): Promise<ApiError> {
    let body: ApiErrorBody = { detail: `HTTP ${resp.status}` };
    try {
      const parsed = await resp.json();
      if (parsed && typeof parsed === "object" && "error" in parsed) {
        body = parsed.error as ApiErrorBody;
      }
    } catch {
      // non-JSON error body; keep the status fallback
    }
    return new ApiError(resp.status, body);
  }
}
