/**
 * Wire types mirrored from the moldialog HTTP API.
 *
 * Everything here is a verbatim copy of a server response shape. The UI
 * never derives any of these fields itself; in particular `valid` and
 * `sim_to_prev` arrive computed and are only displayed.
 */

export interface SessionCreated {
  id: string;
  backend: string;
  created_at: string;
}

export interface CandidateView {
  smiles: string;
  valid: boolean;
  sim_to_prev: number | null;
  padded: boolean;
}

export interface CandidateSetView {
  candidates: CandidateView[];
  chosen: number | null;
}

export interface MoleculeAtom {
  element: string;
  aromatic: boolean;
  charge: number;
  ring: boolean;
}

export interface MoleculeBond {
  a: number;
  b: number;
  order: "single" | "double" | "triple" | "aromatic";
}

export interface MoleculeGraph {
  atoms: MoleculeAtom[];
  bonds: MoleculeBond[];
  rings: number[][];
}

export interface SimilarityResult {
  fts_rdk: number;
  fts_maccs: number;
  fts_morgan: number;
}

/** One line of the session log after the header. */
export interface SessionEvent {
  type: "event";
  seq: number;
  role: "user" | "system";
  kind: "text" | "molecule";
  content: string;
  meta: Record<string, unknown>;
}

export interface SessionHeader {
  type: "header";
  id: string;
  backend: string;
  created_at: string;
}

/** Error envelope: {"error": {...}} with optional parse coordinates. */
export interface ApiErrorBody {
  kind?: string;
  position?: number;
  detail: string;
  which?: string;
}
