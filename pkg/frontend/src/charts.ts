/** Minimal multi-series canvas line chart with event markers.
 *
 * Values come straight from the series buffer; the chart only scales for
 * display and never transforms the data it labels.
 */

export interface ChartSeries {
  label: string;
  color: string;
  values: Array<number | null>;
}

export class LineChart {
  constructor(
    private readonly canvas: HTMLCanvasElement,
    private readonly title: string,
  ) {}

  draw(iterations: number[], series: ChartSeries[], eventIterations: number[]): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx) {
      return;
    }
    const w = this.canvas.width;
    const h = this.canvas.height;
    const padL = 54;
    const padR = 10;
    const padT = 18;
    const padB = 22;
    ctx.clearRect(0, 0, w, h);
    ctx.font = "11px sans-serif";
    ctx.fillStyle = "#333";
    ctx.fillText(this.title, padL, 12);

    const finite: number[] = [];
    for (const s of series) {
      for (const v of s.values) {
        if (v !== null && Number.isFinite(v)) {
          finite.push(v);
        }
      }
    }
    if (iterations.length < 2 || finite.length === 0) {
      ctx.fillStyle = "#999";
      ctx.fillText("waiting for data…", padL, h / 2);
      return;
    }
    let lo = Math.min(...finite);
    let hi = Math.max(...finite);
    if (hi - lo < 1e-12) {
      const pad = Math.max(1e-12, Math.abs(hi) * 0.05);
      lo -= pad;
      hi += pad;
    }
    const x0 = iterations[0];
    const x1 = iterations[iterations.length - 1];
    const sx = (it: number) => padL + ((it - x0) / Math.max(1, x1 - x0)) * (w - padL - padR);
    const sy = (v: number) => h - padB - ((v - lo) / (hi - lo)) * (h - padT - padB);

    ctx.strokeStyle = "#ddd";
    ctx.lineWidth = 1;
    ctx.strokeRect(padL, padT, w - padL - padR, h - padT - padB);
    ctx.fillStyle = "#666";
    ctx.fillText(formatTick(hi), 4, padT + 8);
    ctx.fillText(formatTick(lo), 4, h - padB);
    ctx.fillText(String(x0), padL, h - 6);
    ctx.fillText(String(x1), w - padR - 28, h - 6);

    for (const it of eventIterations) {
      const x = sx(it);
      ctx.strokeStyle = "#b8b8b8";
      ctx.setLineDash([4, 3]);
      ctx.beginPath();
      ctx.moveTo(x, padT);
      ctx.lineTo(x, h - padB);
      ctx.stroke();
      ctx.setLineDash([]);
    }

    let legendX = padL + 6;
    for (const s of series) {
      ctx.strokeStyle = s.color;
      ctx.lineWidth = 1.5;
      ctx.beginPath();
      let started = false;
      s.values.forEach((v, i) => {
        if (v === null || !Number.isFinite(v)) {
          started = false;
          return;
        }
        const x = sx(iterations[i]);
        const y = sy(v);
        if (started) {
          ctx.lineTo(x, y);
        } else {
          ctx.moveTo(x, y);
          started = true;
        }
      });
      ctx.stroke();
      ctx.fillStyle = s.color;
      ctx.fillText(s.label, legendX, padT + 10);
      legendX += ctx.measureText(s.label).width + 14;
    }
  }
}

function formatTick(v: number): string {
  if (v === 0) {
    return "0";
  }
  const a = Math.abs(v);
  if (a >= 0.01 && a < 10000) {
    return v.toFixed(4);
  }
  return v.toExponential(2);
}
