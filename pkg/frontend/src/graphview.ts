/** Canvas renderer for the session graph: degree-scaled nodes, edges
 * colored on the fixed curvature scale, click-to-select targets.
 */

import { degreeRadius, kappaColor } from "./colors.js";
import { ForceLayout } from "./layout.js";
import type { Snapshot } from "./types.js";

export class GraphView {
  private layout: ForceLayout | null = null;
  private kappa: Array<number | undefined> = [];
  private weights: number[] = [];
  private degrees = new Map<string | number, number>();
  private edgeIndex: Array<[number, number]> = [];
  private selected = new Set<string | number>();
  private animating = false;
  private ticksLeft = 0;

  onSelectionChange: (selected: Array<string | number>) => void = () => {};

  constructor(private readonly canvas: HTMLCanvasElement) {
    canvas.addEventListener("click", (ev) => this.handleClick(ev));
  }

  get selection(): Array<string | number> {
    return [...this.selected];
  }

  clearSelection(): void {
    this.selected.clear();
    this.onSelectionChange(this.selection);
    this.draw();
  }

  setGraph(snapshot: Snapshot): void {
    const ids = snapshot.nodes.map((n) => n.id);
    const pos = new Map(ids.map((id, i) => [id, i] as const));
    this.degrees = new Map(snapshot.nodes.map((n) => [n.id, n.degree]));
    this.edgeIndex = snapshot.edges.map((e) => [pos.get(e.u)!, pos.get(e.v)!]);
    this.layout = new ForceLayout(
      ids,
      this.edgeIndex,
      this.canvas.width,
      this.canvas.height,
      ids.length,
    );
    this.updateState(snapshot);
    this.ticksLeft = 320;
    this.startAnimation();
  }

  /** Refresh weights/curvature from a snapshot without moving the layout. */
  updateState(snapshot: Snapshot): void {
    this.kappa = snapshot.edges.map((e) => e.kappa);
    this.weights = snapshot.edges.map((e) => e.w);
    this.draw();
  }

  private startAnimation(): void {
    if (this.animating) {
      return;
    }
    this.animating = true;
    const run = () => {
      if (!this.layout || this.ticksLeft <= 0) {
        this.animating = false;
        this.draw();
        return;
      }
      this.ticksLeft -= 1;
      this.layout.tick();
      this.draw();
      requestAnimationFrame(run);
    };
    requestAnimationFrame(run);
  }

  private handleClick(ev: MouseEvent): void {
    if (!this.layout) {
      return;
    }
    const rect = this.canvas.getBoundingClientRect();
    const x = ((ev.clientX - rect.left) / rect.width) * this.canvas.width;
    const y = ((ev.clientY - rect.top) / rect.height) * this.canvas.height;
    let best: { id: string | number; d: number } | null = null;
    for (const node of this.layout.nodes) {
      const d = Math.hypot(node.x - x, node.y - y);
      if (d < 14 && (best === null || d < best.d)) {
        best = { id: node.id, d };
      }
    }
    if (best !== null) {
      if (this.selected.has(best.id)) {
        this.selected.delete(best.id);
      } else {
        this.selected.add(best.id);
      }
      this.onSelectionChange(this.selection);
      this.draw();
    }
  }

  draw(): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx || !this.layout) {
      return;
    }
    ctx.clearRect(0, 0, this.canvas.width, this.canvas.height);
    const maxW = Math.max(1e-12, ...this.weights);
    this.edgeIndex.forEach(([a, b], k) => {
      const na = this.layout!.nodes[a];
      const nb = this.layout!.nodes[b];
      const kap = this.kappa[k];
      ctx.strokeStyle = kap === undefined ? "#bbb" : kappaColor(kap);
      ctx.lineWidth = 0.6 + 3.4 * Math.sqrt(this.weights[k] / maxW);
      ctx.globalAlpha = 0.85;
      ctx.beginPath();
      ctx.moveTo(na.x, na.y);
      ctx.lineTo(nb.x, nb.y);
      ctx.stroke();
    });
    ctx.globalAlpha = 1.0;
    for (const node of this.layout.nodes) {
      const r = degreeRadius(this.degrees.get(node.id) ?? 1);
      ctx.beginPath();
      ctx.arc(node.x, node.y, r, 0, 2 * Math.PI);
      ctx.fillStyle = this.selected.has(node.id) ? "#ff7f0e" : "#3b6ea5";
      ctx.fill();
      ctx.strokeStyle = "#222";
      ctx.lineWidth = this.selected.has(node.id) ? 2.2 : 0.8;
      ctx.stroke();
    }
  }
}
