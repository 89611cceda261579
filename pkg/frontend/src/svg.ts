/** Minimal SVG assembly: tags in, one standalone vector document out. */

export interface SvgDoc {
  width: number;
  height: number;
  parts: string[];
}

export function svgDoc(width: number, height: number): SvgDoc {
  return { width, height, parts: [] };
}

export function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;");
}

export function rect(
  doc: SvgDoc,
  x: number,
  y: number,
  w: number,
  h: number,
  fill: string,
  extra = ""
): void {
  doc.parts.push(
    `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" fill="${fill}" ${extra}/>`
  );
}

export function line(
  doc: SvgDoc,
  x1: number,
  y1: number,
  x2: number,
  y2: number,
  stroke: string,
  extra = ""
): void {
  doc.parts.push(
    `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" stroke="${stroke}" ${extra}/>`
  );
}

export function text(
  doc: SvgDoc,
  x: number,
  y: number,
  content: string,
  extra = ""
): void {
  doc.parts.push(`<text x="${fmt(x)}" y="${fmt(y)}" ${extra}>${esc(content)}</text>`);
}

export function render(doc: SvgDoc): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${doc.width}" height="${doc.height}" ` +
    `viewBox="0 0 ${doc.width} ${doc.height}" font-family="Helvetica, Arial, sans-serif" font-size="11">\n` +
    doc.parts.join("\n") +
    "\n</svg>\n"
  );
}

function fmt(v: number): string {
  return Number.isInteger(v) ? String(v) : v.toFixed(2);
}

/** Linear interpolation between two RGB colors, t clamped to [0, 1]. */
export function lerpColor(from: [number, number, number], to: [number, number, number], t: number): string {
  const c = Math.max(0, Math.min(1, t));
  const mix = from.map((f, i) => Math.round(f + (to[i] - f) * c));
  return `rgb(${mix[0]},${mix[1]},${mix[2]})`;
}
