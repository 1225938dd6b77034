/**
 * Reader for the simulator's CSV outputs.
 *
 * Files start with `#`-prefixed metadata lines (version, resolved config),
 * then a documented header row, then numeric data. Parsing is strict: a
 * missing or reordered header is a schema error, not a warning — these
 * files are machine-produced and any mismatch means the wrong file kind.
 */

export class SchemaError extends Error {}

export interface CsvTable {
  metadata: Record<string, string>;
  header: string[];
  rows: string[][];
}

export function parseCsv(text: string): CsvTable {
  const metadata: Record<string, string> = {};
  const lines = text.split(/\r?\n/);
  let header: string[] | null = null;
  const rows: string[][] = [];
  for (const raw of lines) {
    const line = raw.trim();
    if (!line) continue;
    if (line.startsWith('#')) {
      const body = line.slice(1).trim();
      const eq = body.indexOf('=');
      if (eq > 0) metadata[body.slice(0, eq).trim()] = body.slice(eq + 1).trim();
      continue;
    }
    if (header === null) {
      header = line.split(',').map((c) => c.trim());
    } else {
      rows.push(line.split(',').map((c) => c.trim()));
    }
  }
  if (header === null) throw new SchemaError('empty CSV: no header row found');
  if (rows.length === 0) throw new SchemaError('CSV has a header but no data rows');
  for (const row of rows) {
    if (row.length !== header.length) {
      throw new SchemaError(
        `row has ${row.length} cells, header has ${header.length}: ${row.join(',')}`,
      );
    }
  }
  return { metadata, header, rows };
}

export function requireColumns(table: CsvTable, expected: string[], kind: string): void {
  const got = table.header.join(',');
  const want = expected.join(',');
  if (got !== want) {
    throw new SchemaError(`${kind} input needs header "${want}", got "${got}"`);
  }
}

export function numericColumn(table: CsvTable, name: string): number[] {
  const idx = table.header.indexOf(name);
  if (idx < 0) throw new SchemaError(`missing column "${name}"`);
  return table.rows.map((row, i) => {
    const v = Number(row[idx]);
    if (!Number.isFinite(v)) {
      throw new SchemaError(`non-numeric value "${row[idx]}" in column "${name}" row ${i + 1}`);
    }
    return v;
  });
}
