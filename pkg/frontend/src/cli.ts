/**
 * figure <kind> <in.csv> <out.(png|svg)> [--style file]
 *
 * kind: timeseries | sweep | heatmap | stem
 * Exit codes: 0 ok, 2 usage/schema error, 1 anything else.
 */

import { readFileSync, writeFileSync } from 'node:fs';
import { parseCsv, SchemaError } from './csv.js';
import { buildOption, DEFAULT_STYLE, FigureKind, FigureStyle } from './figures.js';
import { renderPng, renderSvg } from './render.js';

const KINDS = new Set(['timeseries', 'sweep', 'heatmap', 'stem']);
const USAGE = 'usage: figure <timeseries|sweep|heatmap|stem> <in.csv> <out.(png|svg)> [--style file]';

function loadStyle(path: string | undefined): FigureStyle {
  if (!path) return { ...DEFAULT_STYLE };
  const raw = JSON.parse(readFileSync(path, 'utf8'));
  return { ...DEFAULT_STYLE, ...raw };
}

export async function main(argv: string[]): Promise<number> {
  const positional: string[] = [];
  let stylePath: string | undefined;
  for (let i = 0; i < argv.length; i++) {
    if (argv[i] === '--style') {
      stylePath = argv[++i];
      if (!stylePath) {
        console.error(USAGE);
        return 2;
      }
    } else {
      positional.push(argv[i]);
    }
  }
  if (positional.length !== 3 || !KINDS.has(positional[0])) {
    console.error(USAGE);
    return 2;
  }
  const [kind, inPath, outPath] = positional;
  const isSvg = outPath.endsWith('.svg');
  const isPng = outPath.endsWith('.png');
  if (!isSvg && !isPng) {
    console.error(`output must end in .svg or .png, got ${outPath}`);
    return 2;
  }
  try {
    const table = parseCsv(readFileSync(inPath, 'utf8'));
    const style = loadStyle(stylePath);
    const option = buildOption(kind as FigureKind, table, style);
    if (isSvg) {
      writeFileSync(outPath, renderSvg(option, style.width, style.height));
    } else {
      writeFileSync(outPath, await renderPng(option, style.width, style.height));
    }
    console.log(`wrote ${outPath}`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema error: ${err.message}`);
      return 2;
    }
    if (err instanceof Error && 'code' in err && (err as any).code === 'ENOENT') {
      console.error(`cannot read input: ${(err as Error).message}`);
      return 2;
    }
    console.error(err instanceof Error ? err.stack ?? err.message : String(err));
    return 1;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  (process.argv[1].endsWith('cli.js') || process.argv[1].endsWith('figure'));
if (invokedDirectly) {
  main(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
