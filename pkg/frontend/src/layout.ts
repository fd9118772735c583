/** Small force-directed layout: springs on edges, pairwise repulsion,
 * gentle centering. Cosmetic only — the physics never reads positions.
 */

export interface LayoutNode {
  id: string | number;
  x: number;
  y: number;
  vx: number;
  vy: number;
  pinned: boolean;
}

export interface LayoutEdge {
  a: number;
  b: number;
}

const SPRING = 0.02;
const SPRING_LENGTH = 46;
const REPULSION = 900;
const CENTERING = 0.012;
const DAMPING = 0.82;

export class ForceLayout {
  readonly nodes: LayoutNode[] = [];
  readonly edges: LayoutEdge[] = [];

  constructor(
    ids: Array<string | number>,
    edgePairs: Array<[number, number]>,
    private readonly width: number,
    private readonly height: number,
    seed = 1,
  ) {
    // deterministic jittered ring start so identical sessions look alike
    let state = seed >>> 0 || 1;
    const rand = () => {
      state = (1103515245 * state + 12345) % 2147483648;
      return state / 2147483648;
    };
    const cx = width / 2;
    const cy = height / 2;
    const r = Math.min(width, height) * 0.38;
    ids.forEach((id, i) => {
      const angle = (2 * Math.PI * i) / ids.length;
      this.nodes.push({
        id,
        x: cx + r * Math.cos(angle) + 20 * (rand() - 0.5),
        y: cy + r * Math.sin(angle) + 20 * (rand() - 0.5),
        vx: 0,
        vy: 0,
        pinned: false,
      });
    });
    for (const [a, b] of edgePairs) {
      this.edges.push({ a, b });
    }
  }

  tick(): void {
    const n = this.nodes.length;
    for (let i = 0; i < n; i++) {
      const a = this.nodes[i];
      for (let j = i + 1; j < n; j++) {
        const b = this.nodes[j];
        let dx = a.x - b.x;
        let dy = a.y - b.y;
        let d2 = dx * dx + dy * dy;
        if (d2 < 1) {
          dx = (i % 2 ? 1 : -1) * 0.5;
          dy = (j % 2 ? 1 : -1) * 0.5;
          d2 = 0.5;
        }
        const f = REPULSION / d2;
        const d = Math.sqrt(d2);
        const fx = (f * dx) / d;
        const fy = (f * dy) / d;
        a.vx += fx;
        a.vy += fy;
        b.vx -= fx;
        b.vy -= fy;
      }
    }
    for (const e of this.edges) {
      const a = this.nodes[e.a];
      const b = this.nodes[e.b];
      const dx = b.x - a.x;
      const dy = b.y - a.y;
      const d = Math.max(1, Math.hypot(dx, dy));
      const f = SPRING * (d - SPRING_LENGTH);
      const fx = (f * dx) / d;
      const fy = (f * dy) / d;
      a.vx += fx;
      a.vy += fy;
      b.vx -= fx;
      b.vy -= fy;
    }
    const cx = this.width / 2;
    const cy = this.height / 2;
    for (const node of this.nodes) {
      node.vx += (cx - node.x) * CENTERING;
      node.vy += (cy - node.y) * CENTERING;
      if (node.pinned) {
        node.vx = 0;
        node.vy = 0;
        continue;
      }
      node.vx *= DAMPING;
      node.vy *= DAMPING;
      node.x += Math.max(-18, Math.min(18, node.vx));
      node.y += Math.max(-18, Math.min(18, node.vy));
      node.x = Math.max(8, Math.min(this.width - 8, node.x));
      node.y = Math.max(8, Math.min(this.height - 8, node.y));
    }
  }
}
