import { readFileSync } from 'fs';
import { join } from 'path';
import { describe, expect, it } from 'vitest';

import { SchemaError, column, agentScalars, parseTrace, readTrace } from '../src/csv.js';
import { renderFigure } from '../src/figures.js';

const FIXTURES = join(__dirname, 'fixtures');
const example1 = readTrace(join(FIXTURES, 'example1.csv'));
const example2 = readTrace(join(FIXTURES, 'example2.csv'));
const manifold = readTrace(join(FIXTURES, 'manifold.csv'));
const sinusoid = readTrace(join(FIXTURES, 'lf_sinusoid.csv'));
const boundSq = Number(readFileSync(join(FIXTURES, 'lf_sinusoid.bound'), 'utf8'));

describe('figure rendering from the shipped traces', () => {
    it('renders errors, gains, states3d without schema errors', () => {
        expect(renderFigure(example1, 'errors')).toContain('<svg');
        expect(renderFigure(example1, 'gains')).toContain('<svg');
        expect(renderFigure(example2, 'errors')).toContain('<svg');
        expect(renderFigure(example2, 'gains')).toContain('<svg');
        expect(renderFigure(example2, 'states3d')).toContain('<svg');
    });

    it('adaptive gains of the leaderless trace are monotone nondecreasing', () => {
        const scalars = agentScalars(example1, 'd');
        expect(scalars.size).toBeGreaterThan(0);
        for (const name of scalars.values()) {
            const values = column(example1, name);
            for (let i = 1; i < values.length; i += 1) {
                expect(values[i]).toBeGreaterThanOrEqual(values[i - 1] - 1e-12);
            }
        }
        // and the figure itself builds from exactly these series
        const svg = renderFigure(example1, 'gains');
        expect(svg).toContain('adaptive coupling weights');
        expect((svg.match(/<polyline/g) ?? []).length).toBe(scalars.size);
    });

    it('manifold trace gives flat zero error lines', () => {
        const svg = renderFigure(manifold, 'errors');
        expect(svg).toContain('<svg');
        // every per-component deviation is exactly zero in the fixture
        const groups = ['x2_1', 'x2_2', 'x6_1', 'x6_2'];
        const reference = [column(manifold, 'x1_1'), column(manifold, 'x1_2')];
        for (const name of groups) {
            const comp = Number(name.split('_')[1]) - 1;
            const values = column(manifold, name);
            values.forEach((v, i) => expect(v - reference[comp][i]).toBe(0));
        }
    });

    it('residual-ball overlays the certified radius', () => {
        const svg = renderFigure(sinusoid, 'residual-ball', { boundSq });
        expect(svg).toContain('certified radius');
        expect(svg).toContain('stroke-dasharray');
    });

    it('is deterministic: identical inputs give identical bytes and axes', () => {
        const first = renderFigure(example1, 'gains');
        const second = renderFigure(example1, 'gains');
        expect(second).toBe(first);
        const viewBox = /viewBox="0 0 (\d+) (\d+)"/.exec(first);
        expect(viewBox).not.toBeNull();
        expect(viewBox![1]).toBe('800');
        expect(viewBox![2]).toBe('480');
    });

    it('honors explicit dimensions', () => {
        const svg = renderFigure(example1, 'gains', { width: 400, height: 300 });
        expect(svg).toContain('viewBox="0 0 400 300"');
    });

    it('lists expected vs found on missing columns', () => {
        const bare = parseTrace('t,a\n0,1\n1,2\n');
        try {
            renderFigure(bare, 'gains');
            expect.unreachable('should have thrown');
        } catch (err) {
            expect(err).toBeInstanceOf(SchemaError);
            expect((err as Error).message).toContain('d<agent>');
            expect((err as Error).message).toContain('found [t, a]');
        }
    });

    it('rejects states3d on 2-d traces', () => {
        expect(() => renderFigure(example1, 'states3d')).toThrow(SchemaError);
        expect(() => renderFigure(example1, 'states3d')).toThrow(/3 state components/);
    });

    it('rejects residual-ball without the norm column', () => {
        const bare = parseTrace('t,x1_1\n0,1\n1,2\n');
        expect(() => renderFigure(bare, 'residual-ball')).toThrow(/norm_xi/);
    });
});

describe('input immutability', () => {
    it('rendering never modifies the trace file', () => {
        const path = join(FIXTURES, 'example1.csv');
        const before = readFileSync(path);
        renderFigure(readTrace(path), 'errors');
        renderFigure(readTrace(path), 'gains');
        expect(readFileSync(path).equals(before)).toBe(true);
    });
});
