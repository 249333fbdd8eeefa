/** DOM wiring: gallery, sliders, live clustering and export. */

import { ApiError, EngineClient } from "./api.js";
import { downloadFragment, exportFragment } from "./export.js";
import { drawOverlay, drawSpectrum } from "./render.js";
import { TunerSession } from "./state.js";
import type { ClusterParams, PatchSummary } from "./types.js";
import { buildViewModel, N_THETA_CHOICES, PARAM_RANGES } from "./viewmodel.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const session = new TunerSession();
let client = new EngineClient("http://127.0.0.1:8000");
let patches: PatchSummary[] = [];
let baseImage: HTMLImageElement | null = null;
let showExponentiated = true;

function setBanner(text: string | null): void {
  const banner = $("banner");
  banner.textContent = text ?? "";
  banner.style.display = text ? "block" : "none";
}

function renderGallery(): void {
  const gallery = $("gallery");
  gallery.innerHTML = "";
  if (patches.length === 0) {
    gallery.textContent = "No junction patches in this image.";
    return;
  }
  for (const p of patches) {
    const card = document.createElement("div");
    card.className = "card" + (p.id === session.patchId ? " selected" : "");
    const img = document.createElement("img");
    img.src = client.patchImageUrl(p.id);
    img.width = 72;
    img.height = 72;
    const label = document.createElement("div");
    label.textContent = `#${p.id} (${p.size.toFixed(0)} px)`;
    card.append(img, label);
    card.addEventListener("click", () => selectPatch(p.id));
    gallery.append(card);
  }
}

function selectPatch(id: number): void {
  session.selectPatch(id);
  baseImage = new Image();
  baseImage.crossOrigin = "anonymous";
  baseImage.src = client.patchImageUrl(id);
  baseImage.addEventListener("load", () => renderResult());
  renderGallery();
  renderResult();
  void runCluster();
}

function currentOrigin(): [number, number] {
  const p = patches.find((q) => q.id === session.patchId);
  if (!p) return [0, 0];
  const half = p.size / 2;
  return [
    Math.max(0, Math.floor(p.center[0] - half + 0.5)),
    Math.max(0, Math.floor(p.center[1] - half + 0.5)),
  ];
}

function renderResult(): void {
  const overlay = $<HTMLCanvasElement>("overlay");
  const spectrum = $<HTMLCanvasElement>("spectrum");
  const response = session.lastResult;
  const model = response ? buildViewModel(response) : null;
  drawOverlay(overlay, baseImage, model, currentOrigin());
  if (model) {
    drawSpectrum(
      spectrum,
      showExponentiated ? model.spectrum : model.rawSpectrum,
      model.threshold,
    );
    $("k-indicator").textContent = String(model.k);
    $("count-indicator").textContent = String(model.clusterCount);
    $("sizes-indicator").textContent = model.clusterSizesRanked
      .map((c) => `#${c.id}: ${c.size}`)
      .join("  ");
    ($("export-btn") as HTMLButtonElement).disabled = false;
  } else {
    $("k-indicator").textContent = "-";
    $("count-indicator").textContent = "-";
    $("sizes-indicator").textContent = "";
    ($("export-btn") as HTMLButtonElement).disabled = true;
  }
  renderHistory();
}

function renderHistory(): void {
  const list = $("history");
  list.innerHTML = "";
  for (const entry of session.getHistory().slice().reverse()) {
    const item = document.createElement("li");
    const shown = Object.entries(entry.params)
      .map(([k, v]) => `${k}=${v}`)
      .join(" ");
    item.textContent = `${shown || "(defaults)"} -> ${entry.clusterCount} clusters (K=${entry.k})`;
    list.append(item);
  }
}

async function runCluster(): Promise<void> {
  if (session.patchId === null) return;
  const seq = session.nextRequest();
  const params = { ...session.params };
  setBanner(null);
  try {
    const response = await client.clusterPatch(session.patchId, params);
    if (session.applyResult(seq, params, response)) renderResult();
  } catch (err) {
    if (err instanceof ApiError) {
      setBanner(`engine rejected the request (${err.status}): ${err.message}`);
    } else {
      setBanner("service unreachable");
    }
  }
}

function buildControls(): void {
  const controls = $("controls");
  const ranges = PARAM_RANGES;
  const sliderKeys = [
    "H", "sigma", "sigma2", "epsilon", "tau", "min_size",
  ] as const;
  for (const key of sliderKeys) {
    const row = document.createElement("div");
    row.className = "control-row";
    const label = document.createElement("label");
    label.textContent = key;
    const input = document.createElement("input");
    input.type = "range";
    const r = ranges[key];
    input.min = String(r.min);
    input.max = String(r.max);
    input.step = String(r.step);
    const value = document.createElement("span");
    value.textContent = "(default)";
    input.addEventListener("input", () => {
      const num = Number(input.value);
      session.setParam(key, num);
      value.textContent = String(num);
    });
    input.addEventListener("change", () => void runCluster());
    row.append(label, input, value);
    controls.append(row);
  }
  const row = document.createElement("div");
  row.className = "control-row";
  const label = document.createElement("label");
  label.textContent = "n_theta";
  const select = document.createElement("select");
  for (const n of N_THETA_CHOICES) {
    const opt = document.createElement("option");
    opt.value = String(n);
    opt.textContent = String(n);
    if (n === 24) opt.selected = true;
    select.append(opt);
  }
  select.addEventListener("change", () => {
    session.setParam("n_theta", Number(select.value));
    void runCluster();
  });
  row.append(label, select);
  controls.append(row);
}

async function connect(): Promise<void> {
  client = new EngineClient(($("base-url") as HTMLInputElement).value.replace(/\/$/, ""));
  setBanner(null);
  try {
    patches = (await client.listPatches()).patches;
    renderGallery();
    if (patches.length > 0) selectPatch(patches[0].id);
  } catch {
    setBanner("service unreachable");
    patches = [];
    renderGallery();
  }
}

function exportCurrent(): void {
  const response = session.lastResult;
  if (!response || session.patchId === null) return;
  const fragment = exportFragment(
    session.patchId,
    session.params as ClusterParams,
    response.kernel_H,
  );
  downloadFragment(fragment, `patch-${session.patchId}.ini`);
}

$("connect-btn").addEventListener("click", () => void connect());
$("export-btn").addEventListener("click", exportCurrent);
$("toggle-spectrum").addEventListener("click", () => {
  showExponentiated = !showExponentiated;
  $("toggle-spectrum").textContent = showExponentiated
    ? "show raw eigenvalues"
    : "show exponentiated";
  renderResult();
});
buildControls();
void connect();
