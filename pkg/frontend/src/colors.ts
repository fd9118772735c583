/** Edge color scale fixed to the provable curvature range [-2, 1].
 *
 * The scale never auto-fits, so a given color means the same curvature in
 * every session: deep red at -2, neutral grey at 0, green at +1.
 */

export const KAPPA_MIN = -2;
export const KAPPA_MAX = 1;

const NEGATIVE: [number, number, number] = [214, 39, 40];
const NEUTRAL: [number, number, number] = [199, 199, 199];
const POSITIVE: [number, number, number] = [44, 160, 44];

function mix(a: [number, number, number], b: [number, number, number], t: number): string {
  const c = a.map((av, i) => Math.round(av + (b[i] - av) * t));
  return `rgb(${c[0]},${c[1]},${c[2]})`;
}

export function kappaColor(kappa: number): string {
  const k = Math.min(KAPPA_MAX, Math.max(KAPPA_MIN, kappa));
  if (k < 0) {
    return mix(NEUTRAL, NEGATIVE, k / KAPPA_MIN);
  }
  return mix(NEUTRAL, POSITIVE, k / KAPPA_MAX);
}

/** Node radius scaled by degree; bounded so hubs stay readable. */
export function degreeRadius(degree: number): number {
  return Math.min(16, 3 + 1.6 * Math.sqrt(degree));
}
