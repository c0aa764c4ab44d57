/**
 * Minimal CSV reader for the experiment outputs: plain comma-separated
 * numeric/text fields, one header row, no quoting or embedded commas.
 */

export interface Table {
  columns: string[];
  rows: Record<string, string>[];
}

export function parseCsv(text: string): Table {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    return { columns: [], rows: [] };
  }
  const columns = lines[0].split(",");
  const rows = lines.slice(1).map((line) => {
    const cells = line.split(",");
    const row: Record<string, string> = {};
    columns.forEach((name, i) => (row[name] = cells[i] ?? ""));
    return row;
  });
  return { columns, rows };
}

/** Fail loudly when a figure family needs a column the CSV does not have. */
export function requireColumns(table: Table, needed: string[], family: string): void {
  for (const name of needed) {
    if (!table.columns.includes(name)) {
      throw new Error(
        `family '${family}' needs column '${name}' but the input has: ` +
        table.columns.join(", "));
    }
  }
}

export function num(row: Record<string, string>, column: string): number {
  const value = Number(row[column]);
  if (!Number.isFinite(value)) {
    throw new Error(`column '${column}' holds non-numeric value '${row[column]}'`);
  }
  return value;
}
