import { pathToFileURL } from "node:url";
import { FIGURES } from "./figures.js";
import { render } from "./render.js";

const USAGE = `usage: render --fig <id> --in <csv [json]> --out <svg>
figures: ${Object.keys(FIGURES).sort().join(", ")}`;

interface Args {
  fig: string;
  inputs: string[];
  out: string;
}

function parseArgs(argv: string[]): Args {
  if (argv[0] !== "render") {
    throw new Error(`unknown command ${argv[0] ?? "(none)"}\n${USAGE}`);
  }
  let fig: string | null = null;
  let out: string | null = null;
  const inputs: string[] = [];
  let i = 1;
  while (i < argv.length) {
    const a = argv[i]!;
    if (a === "--fig") {
      fig = argv[++i] ?? null;
    } else if (a === "--out") {
      out = argv[++i] ?? null;
    } else if (a === "--in") {
      i += 1;
      while (i < argv.length && !argv[i]!.startsWith("--")) {
        inputs.push(argv[i]!);
        i += 1;
      }
      continue;
    } else {
      throw new Error(`unknown option ${a}\n${USAGE}`);
    }
    i += 1;
  }
  if (!fig || !out || inputs.length === 0) {
    throw new Error(`--fig, --in and --out are all required\n${USAGE}`);
  }
  return { fig, inputs, out };
}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error((err as Error).message);
    return 2;
  }
  try {
    const result = render(args.fig, args.inputs, args.out);
    console.log(result.svgPath);
    return 0;
  } catch (err) {
    console.error((err as Error).message);
    return 1;
  }
}

if (
  process.argv[1] &&
  import.meta.url === pathToFileURL(process.argv[1]).href
) {
  process.exit(main(process.argv.slice(2)));
}
