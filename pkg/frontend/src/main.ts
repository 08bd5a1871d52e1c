// DOM wiring: image picker, branch queue, overlay canvas, VOI chart.
// Everything displayed comes from the SessionView (service-authoritative);
// this file only moves data into elements.

import { ServiceApi, ServiceError, type BranchRow } from './api.js';
import { renderChartSvg } from './chart.js';
import { paint, type OverlayLayers } from './overlay.js';
import { SessionView } from './state.js';

const params = new URLSearchParams(window.location.search);
const api = new ServiceApi(
  params.get('service') ?? 'http://127.0.0.1:8000',
  params.get('token') ?? undefined,
);

const el = {
  images: document.getElementById('images') as HTMLSelectElement,
  queue: document.getElementById('queue') as HTMLTableSectionElement,
  canvas: document.getElementById('overlay') as HTMLCanvasElement,
  chart: document.getElementById('chart') as HTMLDivElement,
  voi: document.getElementById('voi') as HTMLSpanElement,
  clicks: document.getElementById('clicks') as HTMLSpanElement,
  status: document.getElementById('status') as HTMLSpanElement,
  layerSeg: document.getElementById('layer-seg') as HTMLInputElement,
  layerUnc: document.getElementById('layer-unc') as HTMLInputElement,
};

let view: SessionView | null = null;

function layers(): OverlayLayers {
  return {
    segmentation: el.layerSeg.checked,
    uncertainty: el.layerUnc.checked,
  };
}

function fmtPersistence(p: number | 'inf'): string {
  return p === 'inf' ? '∞' : p.toFixed(4);
}

function repaint(): void {
  if (!view || !view.field) return;
  paint(el.canvas, view.field, view.segmentation, view.branches, layers(),
        view.hovered, 6);
  const voi = view.segmentation?.voi;
  el.voi.textContent = voi == null ? 'n/a' : voi.toFixed(4);
  el.clicks.textContent = String(view.segmentation?.clicks ?? 0);
  if (view.history.voi_history.length > 0) {
    el.chart.innerHTML = renderChartSvg(view.history.voi_history);
    el.chart.hidden = false;
  } else {
    el.chart.hidden = true; // session without ground truth
  }
}

function renderQueue(): void {
  if (!view) return;
  el.queue.replaceChildren();
  for (const row of view.branches) {
    const tr = document.createElement('tr');
    tr.dataset.branch = String(row.id);
    tr.className = row.decision !== 'undecided' ? `committed ${row.decision}` : '';
    tr.innerHTML =
      `<td>${row.id}</td>` +
      `<td>${fmtPersistence(row.persistence)}</td>` +
      `<td>${row.probability.toFixed(3)}</td>` +
      `<td>${row.uncertainty.toFixed(3)}</td>` +
      `<td>${row.included ? 'in' : 'out'}</td>`;
    const actions = document.createElement('td');
    const button = document.createElement('button');
    const action = view.actionFor(row);
    button.textContent = action === 'keep' ? 'accept' : 'reject';
    button.addEventListener('click', () => decide(row, action));
    actions.appendChild(button);
    tr.appendChild(actions);
    tr.addEventListener('mouseenter', () => {
      if (!view) return;
      view.hovered = row.id;
      tr.classList.add('hovered');
      repaint();
    });
    tr.addEventListener('mouseleave', () => {
      if (!view) return;
      view.hovered = null;
      tr.classList.remove('hovered');
      repaint();
    });
    el.queue.appendChild(tr);
  }
}

async function decide(row: BranchRow, action: 'keep' | 'drop'): Promise<void> {
  if (!view) return;
  el.status.textContent = `${action} branch ${row.id}…`;
  try {
    await view.decide(row.id, action);
    el.status.textContent = '';
  } catch (err) {
    // decision never dropped silently: surface inline and keep prior state
    const detail = err instanceof ServiceError ? `${err.status} ${err.message}` : String(err);
    el.status.textContent = `decision failed: ${detail}`;
  }
  renderQueue();
  repaint();
}

async function openImage(imageId: string): Promise<void> {
  view = new SessionView(api, imageId);
  el.status.textContent = 'loading…';
  await view.load();
  el.status.textContent = '';
  renderQueue();
  repaint();
}

async function boot(): Promise<void> {
  const images = await api.listImages();
  el.images.replaceChildren(
    ...images.map((info) => {
      const option = document.createElement('option');
      option.value = info.id;
      option.textContent = `${info.id} (${info.width}×${info.height}, ${info.branches} branches)`;
      return option;
    }),
  );
  el.images.addEventListener('change', () => void openImage(el.images.value));
  el.layerSeg.addEventListener('change', repaint);
  el.layerUnc.addEventListener('change', repaint);
  if (images.length > 0) {
    await openImage(images[0].id);
  } else {
    el.status.textContent = 'workspace is empty';
  }
}

void boot();
