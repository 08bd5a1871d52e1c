// VOI-versus-clicks line chart as plain SVG: one point per history entry.

export interface ChartGeometry {
  width: number;
  height: number;
  pad: number;
}

export interface ChartData {
  points: [number, number][]; // pixel coordinates, one per click (index 0 = start)
  path: string; // SVG path string
  yMin: number;
  yMax: number;
}

export function voiChart(
  history: number[],
  geometry: ChartGeometry = { width: 320, height: 120, pad: 10 },
): ChartData {
  const { width, height, pad } = geometry;
  if (history.length === 0) {
    return { points: [], path: '', yMin: 0, yMax: 1 };
  }
  const yMin = Math.min(...history);
  const yMax = Math.max(...history);
  const span = yMax - yMin || 1;
  const xStep =
    history.length > 1 ? (width - 2 * pad) / (history.length - 1) : 0;
  const points: [number, number][] = history.map((v, i) => [
    pad + i * xStep,
    pad + (1 - (v - yMin) / span) * (height - 2 * pad),
  ]);
  const path = points
    .map(([x, y], i) => `${i === 0 ? 'M' : 'L'}${x.toFixed(1)} ${y.toFixed(1)}`)
    .join(' ');
  return { points, path, yMin, yMax };
}

export function renderChartSvg(history: number[], geometry?: ChartGeometry): string {
  const geo = geometry ?? { width: 320, height: 120, pad: 10 };
  const data = voiChart(history, geo);
  const circles = data.points
    .map(([x, y]) => `<circle cx="${x.toFixed(1)}" cy="${y.toFixed(1)}" r="2.5"/>`)
    .join('');
  return (
    `<svg viewBox="0 0 ${geo.width} ${geo.height}" class="voi-chart">` +
    `<path d="${data.path}" fill="none" stroke="currentColor" stroke-width="1.5"/>` +
    `${circles}</svg>`
  );
}
