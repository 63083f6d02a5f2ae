/**
 * Figure assembly from trace CSVs.
 *
 * errors        per-follower deviation from the reference agent (the leader
 *               when leader columns are present, otherwise follower 1),
 *               one line per agent/state component.
 * gains         adaptive coupling weights d_i over time.
 * states3d      orthographic projection of the 3-d state trajectories of
 *               every agent (leader drawn heavier).
 * residual-ball Euclidean norm of the stacked consensus error with the
 *               certified residual radius overlaid.
 */

import { SchemaError, Trace, agentGroups, agentScalars, column, requireColumns } from './csv.js';
import { PALETTE, Series, lineChart } from './svg.js';

export type FigureKind = 'errors' | 'gains' | 'states3d' | 'residual-ball';

export interface FigureOptions {
    width?: number;
    height?: number;
    /** squared residual radius on ||xi||^2; drawn as sqrt on the norm curve */
    boundSq?: number;
}

export function renderFigure(trace: Trace, kind: FigureKind, options: FigureOptions = {}): string {
    switch (kind) {
        case 'errors':
            return errorsFigure(trace, options);
        case 'gains':
            return gainsFigure(trace, options);
        case 'states3d':
            return states3dFigure(trace, options);
        case 'residual-ball':
            return residualBallFigure(trace, options);
        default:
            throw new SchemaError(`unknown figure kind ${kind}`);
    }
}

function followerStates(trace: Trace): Map<number, string[]> {
    const groups = agentGroups(trace, 'x');
    if (groups.size === 0) {
        throw new SchemaError(
            `no state columns x<agent>_<component>; found [${trace.columns.join(', ')}]`,
        );
    }
    return groups;
}

export function errorsFigure(trace: Trace, options: FigureOptions): string {
    requireColumns(trace, ['t']);
    const groups = followerStates(trace);
    const hasLeader = groups.has(0);
    const referenceAgent = hasLeader ? 0 : Math.min(...groups.keys());
    const reference = groups.get(referenceAgent)!.map((name) => column(trace, name));
    const t = column(trace, 't');
    const series: Series[] = [];
    const agents = [...groups.keys()].sort((a, b) => a - b).filter((a) => a !== referenceAgent);
    agents.forEach((agent, agentIndex) => {
        const names = groups.get(agent)!;
        names.forEach((name, comp) => {
            if (comp >= reference.length) return;
            const values = column(trace, name).map((v, i) => v - reference[comp][i]);
            series.push({
                label: `x${agent}_${comp + 1} - x${referenceAgent}_${comp + 1}`,
                x: t,
                y: values,
                color: PALETTE[agentIndex % PALETTE.length],
                dashed: comp % 2 === 1,
            });
        });
    });
    return lineChart(series, {
        title: hasLeader ? 'tracking errors relative to the leader' : 'consensus errors relative to agent 1',
        xLabel: 't [s]',
        yLabel: 'state deviation',
        width: options.width,
        height: options.height,
        legend: series.length <= 12,
    });
}

export function gainsFigure(trace: Trace, options: FigureOptions): string {
    requireColumns(trace, ['t']);
    const scalars = agentScalars(trace, 'd');
    if (scalars.size === 0) {
        throw new SchemaError(
            `no adaptive-weight columns d<agent>; found [${trace.columns.join(', ')}]`,
        );
    }
    const t = column(trace, 't');
    const series: Series[] = [...scalars.keys()].sort((a, b) => a - b).map((agent) => ({
        label: `d${agent}`,
        x: t,
        y: column(trace, scalars.get(agent)!),
    }));
    return lineChart(series, {
        title: 'adaptive coupling weights',
        xLabel: 't [s]',
        yLabel: 'd_i',
        width: options.width,
        height: options.height,
    });
}

export function states3dFigure(trace: Trace, options: FigureOptions): string {
    const groups = followerStates(trace);
    for (const [agent, names] of groups) {
        if (names.length !== 3) {
            throw new SchemaError(
                `states3d needs 3 state components per agent, agent ${agent} has ` +
                `[${names.join(', ')}]`,
            );
        }
    }
    // fixed orthographic projection: yaw 35 deg about axis 3, tilt 22 deg
    const yaw = (35 * Math.PI) / 180;
    const tilt = (22 * Math.PI) / 180;
    const series: Series[] = [];
    const agents = [...groups.keys()].sort((a, b) => a - b);
    agents.forEach((agent, index) => {
        const [c1, c2, c3] = groups.get(agent)!.map((name) => column(trace, name));
        const px: number[] = [];
        const py: number[] = [];
        for (let i = 0; i < c1.length; i += 1) {
            const xr = c1[i] * Math.cos(yaw) - c2[i] * Math.sin(yaw);
            const yr = c1[i] * Math.sin(yaw) + c2[i] * Math.cos(yaw);
            px.push(xr);
            py.push(c3[i] * Math.cos(tilt) - yr * Math.sin(tilt));
        }
        series.push({
            label: agent === 0 ? 'leader' : `agent ${agent}`,
            x: px,
            y: py,
            color: agent === 0 ? '#000000' : PALETTE[index % PALETTE.length],
            width: agent === 0 ? 2.2 : 1.1,
        });
    });
    return lineChart(series, {
        title: 'state-space trajectories (orthographic projection)',
        xLabel: 'projected axis 1',
        yLabel: 'projected axis 2',
        width: options.width,
        height: options.height,
    });
}

export function residualBallFigure(trace: Trace, options: FigureOptions): string {
    requireColumns(trace, ['t', 'norm_xi']);
    const t = column(trace, 't');
    const norm = column(trace, 'norm_xi');
    const series: Series[] = [
        { label: '||xi||', x: t, y: norm, color: PALETTE[0] },
    ];
    if (options.boundSq !== undefined) {
        if (!(options.boundSq >= 0)) {
            throw new SchemaError(`bound-sq must be nonnegative, got ${options.boundSq}`);
        }
        const radius = Math.sqrt(options.boundSq);
        series.push({
            label: 'certified radius',
            x: [t[0], t[t.length - 1]],
            y: [radius, radius],
            color: '#d62728',
            dashed: true,
            width: 2,
        });
    }
    return lineChart(series, {
        title: 'consensus-error norm and certified residual radius',
        xLabel: 't [s]',
        yLabel: '||xi||',
        width: options.width,
        height: options.height,
    });
}
