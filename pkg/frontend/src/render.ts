/** Headless rendering: SVG via the ECharts SSR string renderer; PNG by
 * rasterizing that same SVG onto a node canvas, so both formats come from
 * one pipeline. Never touches the numbers — plotting only. */

import * as echarts from 'echarts';
import type { EChartsOption } from 'echarts';

export function renderSvg(option: EChartsOption, width: number, height: number): string {
  const chart = echarts.init(null, null, { renderer: 'svg', ssr: true, width, height });
  try {
    chart.setOption(option);
    return chart.renderToSVGString();
  } finally {
    chart.dispose();
  }
}

export async function renderPng(
  option: EChartsOption,
  width: number,
  height: number,
  scale = 2,
): Promise<Buffer> {
  const { createCanvas, loadImage } = await import('@napi-rs/canvas');
  const svg = renderSvg(option, width, height);
  const image = await loadImage(Buffer.from(svg));
  const canvas = createCanvas(width * scale, height * scale);
  const ctx = canvas.getContext('2d');
  ctx.scale(scale, scale);
  ctx.drawImage(image, 0, 0, width, height);
  return canvas.toBuffer('image/png');
}
