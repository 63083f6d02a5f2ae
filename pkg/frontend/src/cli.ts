/**
 * render --trace <csv> --kind <errors|gains|states3d|residual-ball> --out <svg>
 *        [--bound-sq <value>] [--width <px>] [--height <px>]
 *
 * Exit codes: 0 success, 2 usage/schema error.
 */

import { writeFileSync } from 'fs';

import { SchemaError, readTrace } from './csv.js';
import { FigureKind, renderFigure } from './figures.js';

const KINDS: FigureKind[] = ['errors', 'gains', 'states3d', 'residual-ball'];

interface Args {
    trace: string;
    kind: FigureKind;
    out: string;
    boundSq?: number;
    width?: number;
    height?: number;
}

export function parseArgs(argv: string[]): Args {
    if (argv[0] !== 'render') {
        throw new SchemaError(`unknown command ${argv[0] ?? '(none)'}; expected 'render'`);
    }
    const flags = new Map<string, string>();
    for (let i = 1; i < argv.length; i += 2) {
        const key = argv[i];
        const value = argv[i + 1];
        if (!key.startsWith('--') || value === undefined) {
            throw new SchemaError(`malformed flag pair near ${key}`);
        }
        flags.set(key.slice(2), value);
    }
    for (const required of ['trace', 'kind', 'out']) {
        if (!flags.has(required)) throw new SchemaError(`--${required} is required`);
    }
    const kind = flags.get('kind') as FigureKind;
    if (!KINDS.includes(kind)) {
        throw new SchemaError(`unknown kind ${kind}; one of ${KINDS.join(', ')}`);
    }
    const numeric = (name: string): number | undefined => {
        if (!flags.has(name)) return undefined;
        const value = Number(flags.get(name));
        if (Number.isNaN(value)) throw new SchemaError(`--${name} must be numeric`);
        return value;
    };
    return {
        trace: flags.get('trace')!,
        kind,
        out: flags.get('out')!,
        boundSq: numeric('bound-sq'),
        width: numeric('width'),
        height: numeric('height'),
    };
}

export function main(argv: string[]): number {
    let args: Args;
    try {
        args = parseArgs(argv);
    } catch (err) {
        console.error(`usage error: ${(err as Error).message}`);
        return 2;
    }
    try {
        const trace = readTrace(args.trace);
        const svg = renderFigure(trace, args.kind, {
            boundSq: args.boundSq,
            width: args.width,
            height: args.height,
        });
        writeFileSync(args.out, svg);
        console.log(`wrote ${args.out}`);
        return 0;
    } catch (err) {
        if (err instanceof SchemaError) {
            console.error(`schema error: ${err.message}`);
            return 2;
        }
        throw err;
    }
}

if (process.argv[1] && process.argv[1].endsWith('cli.js')) {
    process.exit(main(process.argv.slice(2)));
}
