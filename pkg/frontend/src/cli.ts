/**
 * farjam-plot <family> --in <csv> --out <svg> [--where col=value ...]
 *                      [--radar N] [--title text]
 *
 * Families: convergence | utility-vs-frame | uav-counts | bandwidth-stack
 */

import { readFileSync, writeFileSync } from "node:fs";
import { parseCsv } from "./csv.js";
import { PlotSpec, render } from "./families.js";

function usage(message?: string): never {
  if (message) console.error(`error: ${message}`);
  console.error("usage: farjam-plot <family> --in <csv> --out <svg> " +
    "[--where col=value ...] [--radar N] [--title text]");
  process.exit(message ? 2 : 0);
}

export function main(argv: string[]): number {
  const [family, ...rest] = argv;
  if (!family || family === "--help" || family === "-h") usage();
  const spec: PlotSpec = { family: family as PlotSpec["family"], where: {} };
  let input = "";
  let output = "";
  for (let i = 0; i < rest.length; i += 2) {
    const flag = rest[i];
    const value = rest[i + 1];
    if (value === undefined) usage(`flag ${flag} needs a value`);
    switch (flag) {
      case "--in": input = value; break;
      case "--out": output = value; break;
      case "--title": spec.title = value; break;
      case "--radar": spec.radar = Number(value); break;
      case "--where": {
        const eq = value.indexOf("=");
        if (eq < 0) usage("--where expects col=value");
        spec.where![value.slice(0, eq)] = value.slice(eq + 1);
        break;
      }
      default: usage(`unknown flag ${flag}`);
    }
  }
  if (!input || !output) usage("--in and --out are required");
  const table = parseCsv(readFileSync(input, "utf-8"));
  const svg = render(table, spec);
  writeFileSync(output, svg, "utf-8");
  console.log(`wrote ${output}`);
  return 0;
}

if (process.argv[1] && process.argv[1].endsWith("cli.js")) {
  process.exit(main(process.argv.slice(2)));
}
