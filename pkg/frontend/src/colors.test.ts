import { describe, expect, it } from "vitest";

import { degreeRadius, kappaColor } from "./colors.js";

describe("curvature color scale", () => {
  it("is fixed to [-2, 1] and clamps outside values", () => {
    expect(kappaColor(-2)).toBe(kappaColor(-5));
    expect(kappaColor(1)).toBe(kappaColor(3));
  });

  it("marks the endpoints and the neutral middle distinctly", () => {
    expect(kappaColor(-2)).toBe("rgb(214,39,40)");
    expect(kappaColor(0)).toBe("rgb(199,199,199)");
    expect(kappaColor(1)).toBe("rgb(44,160,44)");
  });

  it("interpolates monotonically toward the endpoints", () => {
    const red = (c: string) => Number(c.slice(4).split(",")[0]);
    expect(red(kappaColor(-1.5))).toBeGreaterThan(red(kappaColor(-0.5)));
  });
});

describe("degree-scaled radius", () => {
  it("grows with degree but stays bounded", () => {
    expect(degreeRadius(1)).toBeLessThan(degreeRadius(9));
    expect(degreeRadius(500)).toBeLessThanOrEqual(16);
  });
});
