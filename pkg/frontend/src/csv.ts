/**
 * Trace/report CSV reading.
 *
 * Trace files start with `#`-prefixed `key: value` metadata lines, then one
 * header row, then purely numeric rows (no quoting or escaping in the
 * contract, so a plain split is exact).
 */

import { readFileSync } from 'fs';

export class SchemaError extends Error {}

export interface Trace {
    metadata: Record<string, string>;
    columns: string[];
    /** row-major numeric data, rows.length x columns.length */
    rows: number[][];
}

export function parseTrace(text: string, source = '<string>'): Trace {
    const metadata: Record<string, string> = {};
    let columns: string[] | null = null;
    const rows: number[][] = [];
    for (const rawLine of text.split('\n')) {
        const line = rawLine.trim();
        if (line.length === 0) continue;
        if (line.startsWith('#')) {
            const body = line.slice(1).trim();
            const sep = body.indexOf(':');
            if (sep > 0) metadata[body.slice(0, sep).trim()] = body.slice(sep + 1).trim();
            continue;
        }
        if (columns === null) {
            columns = line.split(',');
            continue;
        }
        const values = line.split(',').map(Number);
        if (values.length !== columns.length) {
            throw new SchemaError(
                `${source}: row ${rows.length + 1} has ${values.length} values, expected ${columns.length}`,
            );
        }
        if (values.some((v) => Number.isNaN(v))) {
            throw new SchemaError(`${source}: non-numeric entry in row ${rows.length + 1}`);
        }
        rows.push(values);
    }
    if (columns === null) throw new SchemaError(`${source}: no header row found`);
    if (rows.length === 0) throw new SchemaError(`${source}: no data rows`);
    return { metadata, columns, rows };
}

export function readTrace(path: string): Trace {
    return parseTrace(readFileSync(path, 'utf8'), path);
}

export function column(trace: Trace, name: string): number[] {
    const index = trace.columns.indexOf(name);
    if (index < 0) {
        throw new SchemaError(`column ${name} not found; have ${trace.columns.join(', ')}`);
    }
    return trace.rows.map((row) => row[index]);
}

/** Require every named column, reporting all missing ones at once. */
export function requireColumns(trace: Trace, names: string[]): void {
    const missing = names.filter((name) => !trace.columns.includes(name));
    if (missing.length > 0) {
        throw new SchemaError(
            `missing column(s) [${missing.join(', ')}]; expected [${names.join(', ')}], ` +
            `found [${trace.columns.join(', ')}]`,
        );
    }
}

/** Column names matching `<prefix><agent>_<component>`, grouped by agent. */
export function agentGroups(trace: Trace, prefix: string): Map<number, string[]> {
    const groups = new Map<number, string[]>();
    const pattern = new RegExp(`^${prefix}(\\d+)_(\\d+)$`);
    for (const name of trace.columns) {
        const match = pattern.exec(name);
        if (!match) continue;
        const agent = Number(match[1]);
        if (!groups.has(agent)) groups.set(agent, []);
        groups.get(agent)!.push(name);
    }
    for (const names of groups.values()) {
        names.sort((a, b) => Number(a.split('_')[1]) - Number(b.split('_')[1]));
    }
    return groups;
}

/** Column names matching `<prefix><agent>` (no component), e.g. d1..dN. */
export function agentScalars(trace: Trace, prefix: string): Map<number, string> {
    const out = new Map<number, string>();
    const pattern = new RegExp(`^${prefix}(\\d+)$`);
    for (const name of trace.columns) {
        const match = pattern.exec(name);
        if (match) out.set(Number(match[1]), name);
    }
    return out;
}
