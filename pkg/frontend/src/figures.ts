/**
 * ECharts option builders for the four figure kinds.
 *
 * timeseries — f_t / f_c fidelity traces against time (evolve CSVs)
 * sweep     — mean peak fidelity with a std ribbon along one axis (thermal /
 *             disorder / dephasing CSVs)
 * heatmap   — pointwise fidelity over the two input polar angles
 * stem      — per-eigenstate inverse participation ratios by sector
 */

import type { EChartsOption } from 'echarts';
import { CsvTable, SchemaError, numericColumn, requireColumns } from './csv.js';

export interface FigureStyle {
  width: number;
  height: number;
  title?: string;
  colors?: string[];
}

export const DEFAULT_STYLE: FigureStyle = {
  width: 800,
  height: 520,
  colors: ['#1f5fa8', '#c44e52', '#4daf7c', '#8172b2', '#b8860b'],
};

export type FigureKind = 'timeseries' | 'sweep' | 'heatmap' | 'stem';

const SWEEP_HEADER = ['axis_value', 'mean_f_t_max', 'std_f_t_max', 'n_realizations', 'seed'];
const HEATMAP_HEADER = ['theta1', 'theta2', 'f_t'];
const STEM_HEADER = ['sector', 'k_index', 'eigenvalue', 'ipr', 'top_positions', 'top_weights'];

function baseOption(style: FigureStyle): EChartsOption {
  return {
    animation: false,
    color: style.colors ?? DEFAULT_STYLE.colors,
    title: style.title ? { text: style.title, left: 'center' } : undefined,
    grid: { left: 70, right: 30, top: style.title ? 60 : 40, bottom: 55 },
    legend: { bottom: 0 },
    backgroundColor: '#ffffff',
  };
}

export function timeseriesOption(table: CsvTable, style: FigureStyle): EChartsOption {
  if (table.header[0] !== 't' || !table.header.includes('f_t')) {
    throw new SchemaError(
      `timeseries input needs columns "t,...,f_t[,f_c]", got "${table.header.join(',')}"`,
    );
  }
  for (const col of table.header.slice(1)) {
    if (col !== 'f_t' && col !== 'f_c' && !/^fbar_\d+$/.test(col)) {
      throw new SchemaError(`unexpected timeseries column "${col}"`);
    }
  }
  const t = numericColumn(table, 't');
  const series: any[] = [
    {
      name: 'transmission f_t',
      type: 'line',
      showSymbol: false,
      data: numericColumn(table, 'f_t').map((v, i) => [t[i], v]),
    },
  ];
  if (table.header.includes('f_c')) {
    series.push({
      name: 'crosstalk f_c',
      type: 'line',
      showSymbol: false,
      data: numericColumn(table, 'f_c').map((v, i) => [t[i], v]),
    });
  }
  return {
    ...baseOption(style),
    xAxis: { type: 'value', name: 'time (1/J)', nameLocation: 'middle', nameGap: 30 },
    yAxis: { type: 'value', name: 'averaged fidelity', min: 0, max: 1 },
    series,
  };
}

export function sweepOption(table: CsvTable, style: FigureStyle): EChartsOption {
  requireColumns(table, SWEEP_HEADER, 'sweep');
  const x = numericColumn(table, 'axis_value');
  const mean = numericColumn(table, 'mean_f_t_max');
  const std = numericColumn(table, 'std_f_t_max');
  const axisName = table.metadata['axis'] ?? 'axis value';
  const lower = mean.map((m, i) => [x[i], m - std[i]]);
  const band = mean.map((m, i) => [x[i], 2 * std[i]]);
  return {
    ...baseOption(style),
    xAxis: { type: 'value', name: axisName, nameLocation: 'middle', nameGap: 30 },
    yAxis: { type: 'value', name: 'peak transmission fidelity', scale: true },
    series: [
      {
        name: 'mean - std',
        type: 'line',
        data: lower,
        lineStyle: { opacity: 0 },
        stack: 'band',
        symbol: 'none',
        tooltip: { show: false },
      },
      {
        name: '± std',
        type: 'line',
        data: band,
        lineStyle: { opacity: 0 },
        stack: 'band',
        symbol: 'none',
        areaStyle: { opacity: 0.25 },
      },
      {
        name: 'mean peak fidelity',
        type: 'line',
        data: mean.map((m, i) => [x[i], m]),
        symbol: 'circle',
      },
    ],
  };
}

export function heatmapOption(table: CsvTable, style: FigureStyle): EChartsOption {
  requireColumns(table, HEATMAP_HEADER, 'heatmap');
  const t1 = numericColumn(table, 'theta1');
  const t2 = numericColumn(table, 'theta2');
  const f = numericColumn(table, 'f_t');
  const xs = [...new Set(t1)].sort((a, b) => a - b);
  const ys = [...new Set(t2)].sort((a, b) => a - b);
  const xi = new Map(xs.map((v, i) => [v, i]));
  const yi = new Map(ys.map((v, i) => [v, i]));
  const cells = f.map((v, k) => [xi.get(t1[k]), yi.get(t2[k]), v]);
  const fmt = (v: number) => v.toFixed(2);
  return {
    ...baseOption(style),
    grid: { left: 80, right: 90, top: style.title ? 60 : 40, bottom: 55 },
    legend: undefined,
    xAxis: {
      type: 'category',
      data: xs.map(fmt),
      name: 'theta_1',
      nameLocation: 'middle',
      nameGap: 30,
    },
    yAxis: { type: 'category', data: ys.map(fmt), name: 'theta_2' },
    visualMap: {
      min: Math.min(...f),
      max: 1.0,
      calculable: false,
      orient: 'vertical',
      right: 10,
      top: 'center',
      inRange: { color: ['#24357d', '#3d7dbf', '#7fc6a4', '#f5e36d', '#f9f9d2'] },
    },
    series: [{ type: 'heatmap', data: cells, progressive: 0 }],
  };
}

export function stemOption(table: CsvTable, style: FigureStyle): EChartsOption {
  requireColumns(table, STEM_HEADER, 'stem');
  const sector = numericColumn(table, 'sector');
  const index = numericColumn(table, 'k_index');
  const ipr = numericColumn(table, 'ipr');
  const sectors = [...new Set(sector)].sort((a, b) => a - b);
  const series: any[] = [];
  for (const s of sectors) {
    const pts = index
      .map((x, i) => (sector[i] === s ? [x, ipr[i]] : null))
      .filter((p): p is number[] => p !== null);
    series.push({
      name: `${s}-excitation sector`,
      type: 'bar',
      barWidth: 2,
      barGap: '-100%',
      data: pts,
    });
    series.push({
      name: `${s}-excitation sector`,
      type: 'scatter',
      symbolSize: 6,
      data: pts,
      tooltip: { show: false },
    });
  }
  return {
    ...baseOption(style),
    xAxis: {
      type: 'value',
      name: 'eigenstate index (ascending energy)',
      nameLocation: 'middle',
      nameGap: 30,
    },
    yAxis: { type: 'value', name: 'inverse participation ratio' },
    series,
  };
}

export function buildOption(kind: FigureKind, table: CsvTable, style: FigureStyle): EChartsOption {
  switch (kind) {
    case 'timeseries':
      return timeseriesOption(table, style);
    case 'sweep':
      return sweepOption(table, style);
    case 'heatmap':
      return heatmapOption(table, style);
    case 'stem':
      return stemOption(table, style);
    default:
      throw new SchemaError(`unknown figure kind "${kind}"`);
  }
}
