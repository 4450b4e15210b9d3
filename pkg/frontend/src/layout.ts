import {
  forceCenter,
  forceLink,
  forceManyBody,
  forceSimulation,
  type SimulationNodeDatum,
} from "d3-force";
import type { MoleculeGraph } from "./types";

export interface AtomPosition {
  x: number;
  y: number;
}

interface LayoutNode extends SimulationNodeDatum {
  index: number;
}

const BOND_LENGTH = 34;
const CHARGE = -180;

/**
 * Force-directed 2D positions for a server-parsed molecule.
 *
 * Input is adjacency only; nothing chemical is inferred here. d3-force with
 * unset initial positions is deterministic, so the same graph always lays
 * out the same way.
 */
export function layoutMolecule(
  graph: MoleculeGraph,
  width = 320,
  height = 240,
  ticks = 300,
): AtomPosition[] {
  if (graph.atoms.length === 0) return [];
  const nodes: LayoutNode[] = graph.atoms.map((_, i) => ({ index: i }));
  const links = graph.bonds.map((b) => ({ source: b.a, target: b.b }));

  const sim = forceSimulation(nodes)
    .force("bond", forceLink(links).distance(BOND_LENGTH).strength(1))
    .force("charge", forceManyBody().strength(CHARGE))
    .force("center", forceCenter(0, 0))
    .stop();
  for (let i = 0; i < ticks; i++) sim.tick();

  return fit(nodes, width, height);
}

// scale into the viewport, preserving aspect, with a fixed margin
function fit(nodes: LayoutNode[], width: number, height: number): AtomPosition[] {
  const margin = 24;
  const xs = nodes.map((n) => n.x ?? 0);
  const ys = nodes.map((n) => n.y ?? 0);
  const minX = Math.min(...xs);
  const maxX = Math.max(...xs);
  const minY = Math.min(...ys);
  const maxY = Math.max(...ys);
  const spanX = maxX - minX;
  const spanY = maxY - minY;
  const span = Math.max(spanX, spanY);
  if (span === 0) {
    return nodes.map(() => ({ x: width / 2, y: height / 2 }));
  }
  const scale = Math.min(width - 2 * margin, height - 2 * margin) / span;
  const offX = (width - spanX * scale) / 2;
  const offY = (height - spanY * scale) / 2;
  return nodes.map((n) => ({
    x: offX + ((n.x ?? 0) - minX) * scale,
    y: offY + ((n.y ?? 0) - minY) * scale,
  }));
}
