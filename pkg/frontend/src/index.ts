export { SchemaError, Trace, parseTrace, readTrace, column, requireColumns, agentGroups, agentScalars } from './csv.js';
export { Series, ChartOptions, PALETTE, lineChart, niceTicks } from './svg.js';
export { FigureKind, FigureOptions, renderFigure, errorsFigure, gainsFigure, states3dFigure, residualBallFigure } from './figures.js';
