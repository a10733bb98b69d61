/**
 * Image-index loading, PNG decoding, and the stratified 70/15/15 split.
 *
 * The trainer consumes the feature pipeline's export verbatim: an
 * index.json array of {"path", "label"} next to a <label>/<clip>.png tree
 * of 8-bit RGB 64x64 images. Pixels are rescaled to [0, 1].
 */

import * as fs from 'fs';
import * as path from 'path';
import { PNG } from 'pngjs';

import { Rng } from './random';

export const IMAGE_SIZE = 64;
export const CHANNELS = 3;
export const PIXELS_PER_IMAGE = IMAGE_SIZE * IMAGE_SIZE * CHANNELS;

// canonical label ordering shared with the feature pipeline
const LABEL_ORDER = ['Human', 'IITM_TTS', 'Hearling', 'AmazonPolly', 'VoiceMaker', 'AI'];

export interface IndexEntry {
  path: string;
  label: string;
}

export interface ImageDataset {
  /** row-major [n, 64, 64, 3] pixel values in [0, 1] */
  pixels: Float32Array;
  labels: number[];
  classNames: string[];
}

export function loadIndex(indexPath: string): IndexEntry[] {
  const raw = JSON.parse(fs.readFileSync(indexPath, 'utf-8'));
  if (!Array.isArray(raw)) {
    throw new Error(`${indexPath}: expected a JSON array of {path, label}`);
  }
  return raw.map((item, i) => {
    if (typeof item.path !== 'string' || typeof item.label !== 'string') {
      throw new Error(`${indexPath}: entry ${i} needs string path and label`);
    }
    return { path: item.path, label: item.label };
  });
}

export function decodePng(filePath: string): Float32Array {
  const png = PNG.sync.read(fs.readFileSync(filePath));
  if (png.width !== IMAGE_SIZE || png.height !== IMAGE_SIZE) {
    throw new Error(`${filePath}: expected ${IMAGE_SIZE}x${IMAGE_SIZE}, got ${png.width}x${png.height}`);
  }
  const out = new Float32Array(PIXELS_PER_IMAGE);
  for (let p = 0; p < IMAGE_SIZE * IMAGE_SIZE; p++) {
    out[p * 3] = png.data[p * 4] / 255;
    out[p * 3 + 1] = png.data[p * 4 + 1] / 255;
    out[p * 3 + 2] = png.data[p * 4 + 2] / 255;
  }
  return out;
}

export function classNamesOf(entries: IndexEntry[]): string[] {
  const present = new Set(entries.map((e) => e.label));
  const ordered = LABEL_ORDER.filter((l) => present.has(l));
  const extras = [...present].filter((l) => !LABEL_ORDER.includes(l)).sort();
  return [...ordered, ...extras];
}

export function loadDataset(indexPath: string, entries?: IndexEntry[]): ImageDataset {
  const items = entries ?? loadIndex(indexPath);
  if (items.length === 0) {
    throw new Error(`${indexPath}: index is empty`);
  }
  const classNames = classNamesOf(items);
  const classIndex = new Map(classNames.map((name, i) => [name, i]));
  const root = path.dirname(indexPath);

  const pixels = new Float32Array(items.length * PIXELS_PER_IMAGE);
  const labels: number[] = [];
  items.forEach((entry, i) => {
    pixels.set(decodePng(path.resolve(root, entry.path)), i * PIXELS_PER_IMAGE);
    labels.push(classIndex.get(entry.label)!);
  });
  return { pixels, labels, classNames };
}

/**
 * Per-class shuffled split into parts of the given fractions. Leftover
 * slots after the per-class floor allocation go to the part furthest
 * below its exact global share (same scheme as the feature pipeline).
 */
export function stratifiedSplit(
  labels: number[],
  fractions: number[],
  seed: number,
): number[][] {
  const total = fractions.reduce((a, b) => a + b, 0);
  if (Math.abs(total - 1) > 1e-9) {
    throw new Error('fractions must sum to 1');
  }
  const rng = new Rng(seed);
  const nParts = fractions.length;
  const parts: number[][] = Array.from({ length: nParts }, () => []);
  const globalCounts = new Array(nParts).fill(0);
  let seen = 0;

  const classes = [...new Set(labels)].sort((a, b) => a - b);
  for (const c of classes) {
    const rows = labels.map((y, i) => [y, i]).filter(([y]) => y === c).map(([, i]) => i);
    rng.shuffle(rows);
    seen += rows.length;
    const exact = fractions.map((f) => f * rows.length);
    const counts = exact.map(Math.floor);
    const leftover = rows.length - counts.reduce((a, b) => a + b, 0);
    const deficit = fractions.map((f, i) => f * seen - (globalCounts[i] + counts[i]));
    // only parts with a fractional share may take an extra row, or the
    // per-class count would land a full sample away from exact
    let eligible = deficit.map((_, i) => i).filter((i) => exact[i] - counts[i] > 1e-9);
    if (eligible.length < leftover) eligible = deficit.map((_, i) => i);
    const order = eligible.sort((a, b) => (deficit[b] - deficit[a]) || (a - b));
    for (const i of order.slice(0, leftover)) counts[i] += 1;

    let start = 0;
    counts.forEach((k, i) => {
      parts[i].push(...rows.slice(start, start + k));
      globalCounts[i] += k;
      start += k;
    });
  }
  return parts.map((p) => p.sort((a, b) => a - b));
}

export function gatherImages(data: ImageDataset, rows: number[]): Float32Array {
  const out = new Float32Array(rows.length * PIXELS_PER_IMAGE);
  rows.forEach((r, i) => {
    out.set(data.pixels.subarray(r * PIXELS_PER_IMAGE, (r + 1) * PIXELS_PER_IMAGE), i * PIXELS_PER_IMAGE);
  });
  return out;
}
