#!/usr/bin/env node
/** Usage: plot <kind> <csv> <out>
 * kinds: ber-sweep | convergence | lambda-trace; output is an SVG file. */

import { readFileSync, writeFileSync } from "fs";
import { SchemaError } from "./csv";
import { plotBerSweep, plotConvergence, plotLambdaTrace } from "./plots";

const EXIT_OK = 0;
const EXIT_RUNTIME = 1;
const EXIT_USAGE = 2;

const KINDS: Record<string, (csv: string) => string> = {
  "ber-sweep": plotBerSweep,
  convergence: plotConvergence,
  "lambda-trace": plotLambdaTrace,
};

export function main(argv: string[]): number {
  if (argv.length !== 4 || argv[0] !== "plot") {
    process.stderr.write(
      "usage: plot <ber-sweep|convergence|lambda-trace> <csv> <out>\n",
    );
    return EXIT_USAGE;
  }
  const [, kind, csvPath, outPath] = argv;
  const render = KINDS[kind];
  if (!render) {
    process.stderr.write(`unknown figure kind "${kind}"\n`);
    return EXIT_USAGE;
  }
  let text: string;
  try {
    text = readFileSync(csvPath, "utf8");
  } catch (err) {
    process.stderr.write(`cannot read ${csvPath}: ${String(err)}\n`);
    return EXIT_RUNTIME;
  }
  try {
    const svg = render(text);
    writeFileSync(outPath, svg);
  } catch (err) {
    const label = err instanceof SchemaError ? "schema error" : "error";
    process.stderr.write(`${label}: ${err instanceof Error ? err.message : String(err)}\n`);
    return EXIT_RUNTIME;
  }
  return EXIT_OK;
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
