#!/usr/bin/env node
/**
 * plotviz: median convergence curves from optimizer trace CSVs.
 *
 *   plotviz --in traces.csv --out plot.svg
 *   plotviz --in a.csv --in b.csv --y-field distance --logy --out fig2.svg
 *   plotviz --in traces.csv --dump            # JSON median table to stdout
 *
 * Exit codes: 0 success, 1 schema/content error (offending column named),
 * 2 usage error, 3 unreadable input or unwritable output.
 */

import { writeFileSync } from "node:fs";

import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { dumpTable, medianCurves } from "./median";
import { renderSvg } from "./svg";
import { SchemaError, YField, readTraceFiles } from "./traces";

export async function run(argv: string[]): Promise<number> {
  let usageError = "";
  const args = yargs(argv)
    .scriptName("plotviz")
    .option("in", {
      type: "string",
      array: true,
      demandOption: true,
      describe: "trace CSV file (repeatable)",
    })
    .option("out", { type: "string", describe: "output SVG path" })
    .option("y-field", {
      choices: ["objective", "gap", "distance"] as const,
      default: "objective" as const,
      describe: "which column to plot",
    })
    .option("logy", { type: "boolean", default: false, describe: "log-scale vertical axis" })
    .option("dump", {
      type: "boolean",
      default: false,
      describe: "print the medianized table as JSON instead of/next to plotting",
    })
    .option("title", { type: "string", describe: "plot title" })
    .strict()
    .exitProcess(false)
    .fail((msg) => {
      usageError = msg || "usage error";
    })
    .parseSync();
  if (usageError) {
    process.stderr.write(`error: ${usageError}\n`);
    return 2;
  }
  if (!args.out && !args.dump) {
    process.stderr.write("error: nothing to do; pass --out and/or --dump\n");
    return 2;
  }

  try {
    const rows = readTraceFiles(args.in);
    const curves = medianCurves(rows, args["y-field"] as YField);
    if (args.dump) {
      process.stdout.write(JSON.stringify(dumpTable(curves)) + "\n");
    }
    if (args.out) {
      const svg = renderSvg(curves, {
        yField: args["y-field"],
        logy: args.logy,
        title: args.title,
      });
      writeFileSync(args.out, svg, "utf-8");
    }
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      process.stderr.write(`error: ${err.message}\n`);
      return 1;
    }
    if (err instanceof Error && "code" in err) {
      process.stderr.write(`error: ${err.message}\n`);
      return 3;
    }
    throw err;
  }
}

if (require.main === module) {
  run(hideBin(process.argv)).then((code) => {
    process.exitCode = code;
  });
}
