import { ApiClient, ApiError } from "./api";
import { SessionController } from "./session";
import {
  renderCandidateSet,
  renderEventLog,
  renderMoleculeSvg,
} from "./render";

// One session per tab; the server base defaults to wherever the page is
// served from, overridable with ?service=http://host:port for dev setups.
const params = new URLSearchParams(window.location.search);
const base = params.get("service") ?? window.location.origin;
const api = new ApiClient(base);
const controller = new SessionController(api);

const $ = (id: string) => {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
};

const banner = $("banner");
const logBox = $("log");
const candidatesBox = $("candidates");
const moleculeBox = $("molecule");
const turnForm = $("turn-form") as HTMLFormElement;
const turnInput = $("turn-input") as HTMLInputElement;
const turnSend = $("turn-send") as HTMLButtonElement;
const molForm = $("mol-form") as HTMLFormElement;
const molInput = $("mol-input") as HTMLInputElement;
const describeButton = $("mol-describe") as HTMLButtonElement;
const exportButton = $("export") as HTMLButtonElement;

function showError(message: string, retry?: () => void) {
  banner.textContent = "";
  banner.appendChild(Object.assign(document.createElement("span"), { textContent: message }));
  if (retry) {
    const button = document.createElement("button");
    button.type = "button";
    button.textContent = "retry";
    button.addEventListener("click", () => {
      banner.hidden = true;
      retry();
    });
    banner.appendChild(button);
  }
  banner.hidden = false;
}

function describeFailure(err: unknown): string {
  if (err instanceof ApiError) {
    const { kind, position, detail } = err.body;
    return kind !== undefined ? `${kind} at ${position}: ${detail}` : detail;
  }
  return err instanceof Error ? err.message : String(err);
}

function repaint() {
  logBox.replaceChildren(renderEventLog(controller.view.events));
  logBox.scrollTop = logBox.scrollHeight;
  const set = controller.view.candidates;
  candidatesBox.replaceChildren();
  if (set) {
    candidatesBox.appendChild(
      renderCandidateSet(set, {
        onRefineFrom: (index) => {
          controller.selectRefineFrom(
            controller.view.refineFrom === index ? null : index,
          );
          repaint();
        },
        onView: viewMolecule,
      }, controller.view.refineFrom),
    );
  }
  const busy = controller.busy;
  turnSend.disabled = busy || turnInput.value.trim() === "";
  describeButton.disabled = busy;
  exportButton.disabled = busy || controller.view.id === null;
}

async function viewMolecule(smiles: string) {
  moleculeBox.replaceChildren();
  try {
    const graph = await api.parseMolecule(smiles);
    moleculeBox.appendChild(renderMoleculeSvg(graph));
  } catch (err) {
    // unparseable input: show the raw string with an invalid badge
    const fallback = document.createElement("div");
    fallback.className = "parse-failure";
    const code = document.createElement("code");
    code.textContent = smiles;
    const badge = document.createElement("span");
    badge.className = "badge invalid";
    badge.textContent = "invalid";
    fallback.append(code, badge);
    fallback.title = describeFailure(err);
    moleculeBox.appendChild(fallback);
  }
}

turnInput.addEventListener("input", repaint);

turnForm.addEventListener("submit", async (event) => {
  event.preventDefault();
  const text = turnInput.value;
  repaint();
  try {
    await controller.submitText(text);
    turnInput.value = "";
    banner.hidden = true;
  } catch (err) {
    // keep the input populated so the user can edit and resend
    showError(describeFailure(err));
  }
  repaint();
});

molForm.addEventListener("submit", (event) => {
  event.preventDefault();
  if (molInput.value.trim()) void viewMolecule(molInput.value.trim());
});

describeButton.addEventListener("click", async () => {
  const smiles = molInput.value.trim();
  if (!smiles) return;
  try {
    await controller.describeMolecule(smiles);
    banner.hidden = true;
  } catch (err) {
    showError(describeFailure(err));
  }
  repaint();
});

exportButton.addEventListener("click", async () => {
  try {
    const text = await controller.exportLog();
    const url = URL.createObjectURL(new Blob([text], { type: "application/x-ndjson" }));
    const anchor = document.createElement("a");
    anchor.href = url;
    anchor.download = `${controller.view.id}.jsonl`;
    anchor.click();
    URL.revokeObjectURL(url);
  } catch (err) {
    showError(describeFailure(err));
  }
});

async function boot() {
  try {
    await controller.start();
    banner.hidden = true;
  } catch (err) {
    showError(`service unreachable: ${describeFailure(err)}`, boot);
    return;
  }
  repaint();
}

void boot();
