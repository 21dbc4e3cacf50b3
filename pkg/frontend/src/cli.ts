import { writeFileSync } from "fs";
import { layoutCdf } from "./cdf.js";
import { layoutRd } from "./rd.js";
import { renderSvg } from "./svg.js";

function usage(): never {
  console.error(
    "usage: wzlab-plot rd  --in rdsweep.csv [--sigma2-z 2.0] --out fig2.svg\n" +
    "       wzlab-plot cdf --in a.csv [b.csv ...] --out fig3.svg",
  );
  process.exit(2);
}

interface Args {
  inputs: string[];
  out: string;
  sigma2z: number;
}

function parseArgs(argv: string[]): Args {
  const inputs: string[] = [];
  let out = "";
  let sigma2z = 2.0;
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i];
    if (a === "--in") {
      while (i + 1 < argv.length && !argv[i + 1].startsWith("--")) {
        inputs.push(argv[++i]);
      }
    } else if (a === "--out") {
      out = argv[++i] ?? "";
    } else if (a === "--sigma2-z") {
      sigma2z = Number(argv[++i]);
      if (!(sigma2z > 0)) usage();
    } else {
      usage();
    }
  }
  if (inputs.length === 0 || !out) usage();
  if (!out.endsWith(".svg")) {
    console.error(`error: only SVG output is supported in this build; got "${out}"`);
    process.exit(2);
  }
  return { inputs, out, sigma2z };
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  if (command !== "rd" && command !== "cdf") usage();
  const args = parseArgs(rest);
  try {
    const fig =
      command === "rd"
        ? layoutRd(args.inputs[0], args.sigma2z)
        : layoutCdf(args.inputs);
    writeFileSync(args.out, renderSvg(fig));
    console.log(`wrote ${args.out} (${fig.series.length} curves)`);
    return 0;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 2;
  }
}

const isMain = process.argv[1] && process.argv[1].endsWith("cli.js");
if (isMain) {
  process.exit(main(process.argv.slice(2)));
}
