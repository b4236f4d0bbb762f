import { mkdtempSync, writeFileSync } from 'fs';
import { tmpdir } from 'os';
import * as path from 'path';
import { PNG } from 'pngjs';

import { makeRng } from '../src/weights.js';

export function tempDir(prefix: string): string {
  return mkdtempSync(path.join(tmpdir(), prefix));
}

export function writeRandomPng(
  filePath: string, width: number, height: number, seed: number,
): void {
  const rng = makeRng(seed);
  const png = new PNG({ width, height });
  for (let p = 0; p < width * height; p++) {
    png.data[p * 4] = Math.floor(rng() * 256);
    png.data[p * 4 + 1] = Math.floor(rng() * 256);
    png.data[p * 4 + 2] = Math.floor(rng() * 256);
    png.data[p * 4 + 3] = 255;
  }
  writeFileSync(filePath, PNG.sync.write(png));
}

export function writeBlockMaskPng(
  filePath: string, width: number, height: number,
  top: number, left: number, bh: number, bw: number,
): void {
  const png = new PNG({ width, height });
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      const inside = y >= top && y < top + bh && x >= left && x < left + bw;
      const value = inside ? 255 : 0;
      const p = y * width + x;
      png.data[p * 4] = value;
      png.data[p * 4 + 1] = value;
      png.data[p * 4 + 2] = value;
      png.data[p * 4 + 3] = 255;
    }
  }
  writeFileSync(filePath, PNG.sync.write(png));
}

export interface FixtureEntry {
  id: string;
  image_path: string;
  mask_path: string;
  subset: string;
  reference_path?: string;
}

export function writeManifest(filePath: string, entries: FixtureEntry[]): void {
  writeFileSync(filePath, entries.map((e) => JSON.stringify(e)).join('\n') + '\n');
}

export function makeImageFixture(
  dir: string, n: number, opts: { size?: number; withReference?: boolean } = {},
): { manifestPath: string; entries: FixtureEntry[] } {
  const size = opts.size ?? 48;
  const subsets = ['camouflaged', 'salient', 'general'];
  const entries: FixtureEntry[] = [];
  for (let i = 0; i < n; i++) {
    const imageName = `img${i}.png`;
    const maskName = `mask${i}.png`;
    writeRandomPng(path.join(dir, imageName), size, size, 1000 + i);
    writeBlockMaskPng(path.join(dir, maskName), size, size,
      Math.floor(size / 4), Math.floor(size / 4),
      Math.floor(size / 2), Math.floor(size / 2));
    const entry: FixtureEntry = {
      id: `f${i}`,
      image_path: imageName,
      mask_path: maskName,
      subset: subsets[i % 3],
    };
    if (opts.withReference) entry.reference_path = imageName;
    entries.push(entry);
  }
  const manifestPath = path.join(dir, 'manifest.jsonl');
  writeManifest(manifestPath, entries);
  return { manifestPath, entries };
}
