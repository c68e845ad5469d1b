import { describe, expect, it } from "vitest";
import {
  SchemaError,
  parseConvergence,
  parseLambda,
  parseSweep,
} from "../src/csv";

const SWEEP_OK = [
  "detector,channel,nt,nr,ebn0_db,trials,bit_errors,total_bits,ber,avg_iterations,converged_fraction",
  "idls,iid-rayleigh,4,4,8,12,3,96,0.03125,9.5,1",
  "lmmse,iid-rayleigh,4,4,8,12,9,96,0.09375,1,1",
].join("\n");

describe("csv parsing", () => {
  it("accepts the exact sweep schema", () => {
    const rows = parseSweep(SWEEP_OK);
    expect(rows).toHaveLength(2);
    expect(rows[0].detector).toBe("idls");
    expect(rows[0].totalBits).toBe(96);
    expect(rows[1].ber).toBeCloseTo(0.09375, 12);
  });

  it("rejects a reordered or renamed header", () => {
    const bad = SWEEP_OK.replace("detector,channel", "channel,detector");
    expect(() => parseSweep(bad)).toThrow(SchemaError);
    const renamed = SWEEP_OK.replace("ebn0_db", "snr_db");
    expect(() => parseSweep(renamed)).toThrow(SchemaError);
  });

  it("rejects rows with the wrong field count or non-numeric values", () => {
    expect(() => parseSweep(SWEEP_OK + "\nidls,iid-rayleigh,4,4,8")).toThrow(SchemaError);
    expect(() => parseSweep(SWEEP_OK.replace("0.03125", "oops"))).toThrow(SchemaError);
  });

  it("rejects empty files", () => {
    expect(() => parseSweep("")).toThrow(SchemaError);
    expect(() => parseConvergence("")).toThrow(SchemaError);
    expect(() => parseLambda("")).toThrow(SchemaError);
  });

  it("parses convergence and lambda schemas", () => {
    const conv = parseConvergence(
      "detector,ebn0_db,iteration,ber\nidls,8,1,0.2\nidls,8,2,0.05\n",
    );
    expect(conv).toHaveLength(2);
    expect(conv[1].iteration).toBe(2);
    const lam = parseLambda("trial,iteration,lambda\n0,1,2.5\n0,2,2.1\n");
    expect(lam[0].lambda).toBeCloseTo(2.5, 12);
  });
});
