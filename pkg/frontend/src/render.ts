import type {
  CandidateSetView,
  CandidateView,
  MoleculeGraph,
  SessionEvent,
} from "./types";
import { layoutMolecule, type AtomPosition } from "./layout";

const SVG_NS = "http://www.w3.org/2000/svg";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

/** "valid" or "invalid" pill, straight off the server's flag. */
export function renderValidityBadge(valid: boolean): HTMLElement {
  return el("span", valid ? "badge valid" : "badge invalid", valid ? "valid" : "invalid");
}

/**
 * Horizontal similarity bar. The fill width is the server's sim_to_prev
 * verbatim; null (first turn, or an unparseable candidate) renders as an
 * empty bar labeled n/a.
 */
export function renderSimBar(simToPrev: number | null): HTMLElement {
  const bar = el("div", "simbar");
  if (simToPrev === null) {
    bar.classList.add("empty");
    bar.title = "sim n/a";
    return bar;
  }
  const fill = el("div", "fill");
  fill.style.width = `${(simToPrev * 100).toFixed(1)}%`;
  bar.title = `sim ${simToPrev.toFixed(3)}`;
  bar.appendChild(fill);
  return bar;
}

export interface CandidateCardHooks {
  onRefineFrom?: (index: number) => void;
  onView?: (smiles: string) => void;
}

export function renderCandidateCard(
  candidate: CandidateView,
  index: number,
  hooks: CandidateCardHooks = {},
): HTMLElement {
  const card = el("div", "card");
  card.dataset.index = String(index);

  const head = el("div", "card-head");
  head.appendChild(el("span", "rank", `#${index + 1}`));
  const smiles = el("code", "smiles", candidate.smiles);
  head.appendChild(smiles);
  head.appendChild(renderValidityBadge(candidate.valid));
  if (candidate.padded) head.appendChild(el("span", "badge padded", "padded"));
  card.appendChild(head);

  card.appendChild(renderSimBar(candidate.sim_to_prev));

  const actions = el("div", "card-actions");
  const refine = el("button", "refine", "refine from this");
  refine.type = "button";
  refine.addEventListener("click", () => hooks.onRefineFrom?.(index));
  actions.appendChild(refine);
  const view = el("button", "view", "view");
  view.type = "button";
  view.addEventListener("click", () => hooks.onView?.(candidate.smiles));
  actions.appendChild(view);
  card.appendChild(actions);
  return card;
}

export function renderCandidateSet(
  set: CandidateSetView,
  hooks: CandidateCardHooks = {},
  refineFrom: number | null = null,
): HTMLElement {
  const box = el("div", "candidates");
  set.candidates.forEach((candidate, index) => {
    const card = renderCandidateCard(candidate, index, hooks);
    if (index === refineFrom) card.classList.add("selected");
    box.appendChild(card);
  });
  return box;
}

export function renderEventLog(events: SessionEvent[]): HTMLElement {
  const log = el("div", "event-log");
  for (const event of events) {
    const row = el("div", `event ${event.role} ${event.kind}`);
    row.appendChild(el("span", "who", event.role));
    const body = event.kind === "molecule" ? el("code", "smiles", event.content)
      : el("span", "text", event.content);
    row.appendChild(body);
    log.appendChild(row);
  }
  return log;
}

/**
 * SVG depiction of a parsed molecule: shaded polygons for aromatic rings,
 * one line per bond (doubled or tripled by order), labeled atom circles.
 * Hovering an atom highlights every ring it belongs to.
 */
export function renderMoleculeSvg(
  graph: MoleculeGraph,
  width = 320,
  height = 240,
): SVGSVGElement {
  const positions = layoutMolecule(graph, width, height);
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("class", "molecule");

  const ringLayer = document.createElementNS(SVG_NS, "g");
  const ringPolys: SVGPolygonElement[] = [];
  graph.rings.forEach((ring, ringIndex) => {
    const poly = document.createElementNS(SVG_NS, "polygon");
    const aromatic = ring.every((i) => graph.atoms[i]?.aromatic);
    poly.setAttribute("class", aromatic ? "ring aromatic" : "ring");
    poly.setAttribute(
      "points",
      ring.map((i) => `${pos(positions, i).x},${pos(positions, i).y}`).join(" "),
    );
    poly.dataset.ring = String(ringIndex);
    ringLayer.appendChild(poly);
    ringPolys.push(poly);
  });
  svg.appendChild(ringLayer);

  const bondLayer = document.createElementNS(SVG_NS, "g");
  for (const bond of graph.bonds) {
    const a = pos(positions, bond.a);
    const b = pos(positions, bond.b);
    const strokes = bond.order === "double" ? 2 : bond.order === "triple" ? 3 : 1;
    // perpendicular offset spreads parallel strokes of a multiple bond
    const dx = b.y - a.y;
    const dy = a.x - b.x;
    const len = Math.hypot(dx, dy) || 1;
    for (let s = 0; s < strokes; s++) {
      const shift = (s - (strokes - 1) / 2) * 3.2;
      const ox = (dx / len) * shift;
      const oy = (dy / len) * shift;
      const line = document.createElementNS(SVG_NS, "line");
      line.setAttribute("class", `bond bond-${bond.order}`);
      line.setAttribute("x1", String(a.x + ox));
      line.setAttribute("y1", String(a.y + oy));
      line.setAttribute("x2", String(b.x + ox));
      line.setAttribute("y2", String(b.y + oy));
      bondLayer.appendChild(line);
    }
  }
  svg.appendChild(bondLayer);

  const atomLayer = document.createElementNS(SVG_NS, "g");
  graph.atoms.forEach((atom, i) => {
    const memberOf = graph.rings
      .map((ring, ringIndex) => ({ ring, ringIndex }))
      .filter(({ ring }) => ring.includes(i));
    const group = document.createElementNS(SVG_NS, "g");
    group.setAttribute("class", atom.aromatic ? "atom aromatic" : "atom");
    group.dataset.rings = memberOf.map(({ ringIndex }) => ringIndex).join(",");

    const circle = document.createElementNS(SVG_NS, "circle");
    circle.setAttribute("cx", String(pos(positions, i).x));
    circle.setAttribute("cy", String(pos(positions, i).y));
    circle.setAttribute("r", "10");
    group.appendChild(circle);

    const label = document.createElementNS(SVG_NS, "text");
    label.setAttribute("x", String(pos(positions, i).x));
    label.setAttribute("y", String(pos(positions, i).y + 4));
    label.setAttribute("text-anchor", "middle");
    const sign = atom.charge > 0 ? "+" : atom.charge < 0 ? "-" : "";
    label.textContent = atom.element + sign;
    group.appendChild(label);

    const title = document.createElementNS(SVG_NS, "title");
    title.textContent = memberOf.length
      ? `${atom.element}: rings of ${memberOf.map(({ ring }) => ring.length).join(", ")}`
      : `${atom.element}: no ring`;
    group.appendChild(title);

    group.addEventListener("mouseenter", () => {
      for (const { ringIndex } of memberOf) ringPolys[ringIndex]?.classList.add("hot");
    });
    group.addEventListener("mouseleave", () => {
      for (const poly of ringPolys) poly.classList.remove("hot");
    });
    atomLayer.appendChild(group);
  });
  svg.appendChild(atomLayer);
  return svg;
}

function pos(positions: AtomPosition[], i: number): AtomPosition {
  return positions[i] ?? { x: 0, y: 0 };
}
