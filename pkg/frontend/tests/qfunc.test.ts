import { describe, expect, it } from "vitest";
import { awgnReferenceBer, erfc, qfunc } from "../src/qfunc";

describe("qfunc", () => {
  it("matches the standard-normal tail at known points", () => {
    expect(qfunc(0)).toBeCloseTo(0.5, 12);
    expect(qfunc(1.6448536269514722)).toBeCloseTo(0.05, 7); // 95th percentile
    expect(qfunc(-1)).toBeCloseTo(1 - qfunc(1), 12);
  });

  it("passes the 9.6 dB reference spot check (~1e-5)", () => {
    const v = awgnReferenceBer(9.6);
    expect(Math.abs(v - 1e-5)).toBeLessThanOrEqual(0.15e-5);
  });

  it("is monotonically decreasing", () => {
    let prev = qfunc(-4);
    for (let x = -3.5; x <= 6; x += 0.5) {
      const cur = qfunc(x);
      expect(cur).toBeLessThan(prev);
      prev = cur;
    }
  });

  it("erfc satisfies the reflection identity", () => {
    for (const x of [0.1, 0.7, 1.3, 2.9]) {
      expect(erfc(-x)).toBeCloseTo(2 - erfc(x), 12);
    }
  });
});
