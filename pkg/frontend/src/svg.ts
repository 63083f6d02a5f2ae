/**
 * Minimal deterministic SVG line charts: linear scales, nice ticks, one
 * polyline per series, optional legend. No DOM, no randomness, fixed number
 * formatting, so identical inputs yield byte-identical output.
 */

export interface Series {
    label: string;
    x: number[];
    y: number[];
    color?: string;
    width?: number;
    dashed?: boolean;
}

export interface ChartOptions {
    title: string;
    xLabel: string;
    yLabel: string;
    width?: number;
    height?: number;
    legend?: boolean;
}

export const PALETTE = [
    '#1f77b4', '#d62728', '#2ca02c', '#9467bd', '#ff7f0e',
    '#8c564b', '#e377c2', '#17becf', '#bcbd22', '#7f7f7f',
];

const MARGIN = { top: 36, right: 18, bottom: 42, left: 64 };

function fmt(value: number): string {
    if (!Number.isFinite(value)) return '0';
    const rounded = Number(value.toPrecision(6));
    return String(rounded);
}

export function niceTicks(lo: number, hi: number, count = 6): number[] {
    if (!(hi > lo)) {
        const pad = Math.abs(lo) > 0 ? Math.abs(lo) * 0.5 : 1;
        lo -= pad;
        hi += pad;
    }
    const span = hi - lo;
    const step0 = span / Math.max(count - 1, 1);
    const magnitude = Math.pow(10, Math.floor(Math.log10(step0)));
    let step = magnitude;
    for (const mult of [1, 2, 2.5, 5, 10]) {
        if (magnitude * mult >= step0) {
            step = magnitude * mult;
            break;
        }
    }
    const first = Math.ceil(lo / step) * step;
    const ticks: number[] = [];
    for (let v = first; v <= hi + step * 1e-9; v += step) {
        ticks.push(Number(v.toPrecision(12)));
    }
    return ticks;
}

function extent(values: number[]): [number, number] {
    let lo = Infinity;
    let hi = -Infinity;
    for (const v of values) {
        if (v < lo) lo = v;
        if (v > hi) hi = v;
    }
    if (!Number.isFinite(lo)) return [0, 1];
    return [lo, hi];
}

function escapeXml(text: string): string {
    return text
        .replace(/&/g, '&amp;')
        .replace(/</g, '&lt;')
        .replace(/>/g, '&gt;')
        .replace(/"/g, '&quot;');
}

export function lineChart(series: Series[], options: ChartOptions): string {
    const width = options.width ?? 800;
    const height = options.height ?? 480;
    const plotW = width - MARGIN.left - MARGIN.right;
    const plotH = height - MARGIN.top - MARGIN.bottom;

    const [x0, x1] = extent(series.flatMap((s) => s.x));
    let [y0, y1] = extent(series.flatMap((s) => s.y));
    if (y1 === y0) {
        const pad = Math.abs(y0) > 0 ? Math.abs(y0) * 0.5 : 1;
        y0 -= pad;
        y1 += pad;
    } else {
        const pad = (y1 - y0) * 0.05;
        y0 -= pad;
        y1 += pad;
    }
    const sx = (v: number) => MARGIN.left + ((v - x0) / (x1 - x0 || 1)) * plotW;
    const sy = (v: number) => MARGIN.top + plotH - ((v - y0) / (y1 - y0)) * plotH;

    const parts: string[] = [];
    parts.push(
        `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
        `viewBox="0 0 ${width} ${height}" font-family="Helvetica,Arial,sans-serif">`,
    );
    parts.push(`<rect width="${width}" height="${height}" fill="#ffffff"/>`);
    parts.push(
        `<text x="${width / 2}" y="20" text-anchor="middle" font-size="15">` +
        `${escapeXml(options.title)}</text>`,
    );

    for (const tick of niceTicks(x0, x1)) {
        const px = fmt(sx(tick));
        parts.push(
            `<line x1="${px}" y1="${MARGIN.top}" x2="${px}" y2="${MARGIN.top + plotH}" ` +
            `stroke="#dddddd" stroke-width="1"/>`,
        );
        parts.push(
            `<text x="${px}" y="${MARGIN.top + plotH + 18}" text-anchor="middle" ` +
            `font-size="11">${fmt(tick)}</text>`,
        );
    }
    for (const tick of niceTicks(y0, y1)) {
        const py = fmt(sy(tick));
        parts.push(
            `<line x1="${MARGIN.left}" y1="${py}" x2="${MARGIN.left + plotW}" y2="${py}" ` +
            `stroke="#dddddd" stroke-width="1"/>`,
        );
        parts.push(
            `<text x="${MARGIN.left - 8}" y="${py}" text-anchor="end" dominant-baseline="middle" ` +
            `font-size="11">${fmt(tick)}</text>`,
        );
    }
    parts.push(
        `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" ` +
        `fill="none" stroke="#333333"/>`,
    );
    parts.push(
        `<text x="${MARGIN.left + plotW / 2}" y="${height - 8}" text-anchor="middle" ` +
        `font-size="12">${escapeXml(options.xLabel)}</text>`,
    );
    parts.push(
        `<text x="16" y="${MARGIN.top + plotH / 2}" text-anchor="middle" font-size="12" ` +
        `transform="rotate(-90 16 ${MARGIN.top + plotH / 2})">${escapeXml(options.yLabel)}</text>`,
    );

    series.forEach((s, index) => {
        const color = s.color ?? PALETTE[index % PALETTE.length];
        const points = s.x.map((v, i) => `${fmt(sx(v))},${fmt(sy(s.y[i]))}`).join(' ');
        const dash = s.dashed ? ' stroke-dasharray="7,4"' : '';
        parts.push(
            `<polyline fill="none" stroke="${color}" stroke-width="${s.width ?? 1.4}"${dash} ` +
            `points="${points}"/>`,
        );
    });

    if (options.legend !== false && series.length > 1) {
        series.forEach((s, index) => {
            const color = s.color ?? PALETTE[index % PALETTE.length];
            const lx = MARGIN.left + plotW - 120;
            const ly = MARGIN.top + 14 + index * 16;
            parts.push(
                `<line x1="${lx}" y1="${ly}" x2="${lx + 22}" y2="${ly}" stroke="${color}" ` +
                `stroke-width="2"${s.dashed ? ' stroke-dasharray="7,4"' : ''}/>`,
            );
            parts.push(
                `<text x="${lx + 28}" y="${ly + 4}" font-size="11">${escapeXml(s.label)}</text>`,
            );
        });
    }
    parts.push('</svg>');
    return parts.join('\n') + '\n';
}
