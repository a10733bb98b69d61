import * as fs from 'fs';
import * as os from 'os';
import * as path from 'path';
import { PNG } from 'pngjs';
import { describe, expect, it } from 'vitest';

import { decodePng, loadDataset, loadIndex, stratifiedSplit } from '../src/data';
import { Rng } from '../src/random';

function writeTestPng(filePath: string, value: (x: number, y: number) => number): void {
  const png = new PNG({ width: 64, height: 64 });
  for (let y = 0; y < 64; y++) {
    for (let x = 0; x < 64; x++) {
      const i = (y * 64 + x) * 4;
      const v = value(x, y);
      png.data[i] = v;
      png.data[i + 1] = v;
      png.data[i + 2] = v;
      png.data[i + 3] = 255;
    }
  }
  fs.writeFileSync(filePath, PNG.sync.write(png));
}

describe('png decoding', () => {
  it('recovers 8-bit values as x/255 floats', () => {
    const dir = fs.mkdtempSync(path.join(os.tmpdir(), 'png-'));
    const file = path.join(dir, 'ramp.png');
    writeTestPng(file, (x) => x * 4);
    const pixels = decodePng(file);
    expect(pixels.length).toBe(64 * 64 * 3);
    // pixel (x=3, y=0): value 12 -> 12/255 in all channels (float32 storage)
    expect(pixels[3 * 3]).toBeCloseTo(12 / 255, 6);
    expect(pixels[3 * 3 + 2]).toBeCloseTo(12 / 255, 6);
  });

  it('rejects wrong dimensions', () => {
    const dir = fs.mkdtempSync(path.join(os.tmpdir(), 'png-'));
    const file = path.join(dir, 'small.png');
    const png = new PNG({ width: 8, height: 8 });
    fs.writeFileSync(file, PNG.sync.write(png));
    expect(() => decodePng(file)).toThrow(/expected 64x64/);
  });
});

describe('index loading', () => {
  it('maps labels to the canonical class order', () => {
    const dir = fs.mkdtempSync(path.join(os.tmpdir(), 'idx-'));
    for (const label of ['VoiceMaker', 'Human']) {
      fs.mkdirSync(path.join(dir, label));
      writeTestPng(path.join(dir, label, 'a.png'), () => 128);
    }
    const indexPath = path.join(dir, 'index.json');
    fs.writeFileSync(indexPath, JSON.stringify([
      { path: 'VoiceMaker/a.png', label: 'VoiceMaker' },
      { path: 'Human/a.png', label: 'Human' },
    ]));
    const data = loadDataset(indexPath);
    expect(data.classNames).toEqual(['Human', 'VoiceMaker']);
    expect(data.labels).toEqual([1, 0]);
  });

  it('rejects malformed entries', () => {
    const dir = fs.mkdtempSync(path.join(os.tmpdir(), 'idx-'));
    const indexPath = path.join(dir, 'index.json');
    fs.writeFileSync(indexPath, JSON.stringify([{ path: 'x.png' }]));
    expect(() => loadIndex(indexPath)).toThrow(/entry 0/);
  });
});

describe('stratified split', () => {
  it('is disjoint, exhaustive, and proportioned', () => {
    const rng = new Rng(1);
    const labels = Array.from({ length: 200 }, () => rng.int(5));
    const [train, val, test] = stratifiedSplit(labels, [0.7, 0.15, 0.15], 9);

    const all = [...train, ...val, ...test].sort((a, b) => a - b);
    expect(all).toEqual(Array.from({ length: 200 }, (_, i) => i));

    for (let c = 0; c < 5; c++) {
      const nc = labels.filter((y) => y === c).length;
      const inTrain = train.filter((i) => labels[i] === c).length;
      expect(Math.abs(inTrain - 0.7 * nc)).toBeLessThan(1);
    }
  });

  it('hits exact totals on the balanced case', () => {
    const labels = [...Array(50).fill(0), ...Array(50).fill(1)];
    const [train, val, test] = stratifiedSplit(labels, [0.7, 0.15, 0.15], 4);
    expect(train.length).toBe(70);
    expect(val.length).toBe(15);
    expect(test.length).toBe(15);
  });

  it('is deterministic for a fixed seed', () => {
    const labels = Array.from({ length: 60 }, (_, i) => i % 3);
    const a = stratifiedSplit(labels, [0.7, 0.15, 0.15], 21);
    const b = stratifiedSplit(labels, [0.7, 0.15, 0.15], 21);
    expect(a).toEqual(b);
  });
});
