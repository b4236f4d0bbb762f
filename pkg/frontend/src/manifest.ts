/** JSON-lines dataset manifest, shared with the camoval toolkit. */
import { readFileSync } from 'fs';
import * as path from 'path';

export interface ManifestEntry {
  id: string;
  imagePath: string;
  maskPath: string;
  subset: string;
  referencePath?: string;
}

export interface Manifest {
  entries: ManifestEntry[];
  baseDir: string;
}

const SUBSETS = new Set(['camouflaged', 'salient', 'general']);

export function loadManifest(manifestPath: string): Manifest {
  const baseDir = path.dirname(path.resolve(manifestPath));
  const entries: ManifestEntry[] = [];
  const seen = new Set<string>();
  const lines = readFileSync(manifestPath, 'utf-8').split('\n');
  lines.forEach((line, i) => {
    const text = line.trim();
    if (!text) return;
    let rec: Record<string, string>;
    try {
      rec = JSON.parse(text);
    } catch (err) {
      throw new Error(`${manifestPath}:${i + 1}: invalid record: ${err}`);
    }
    for (const field of ['id', 'image_path', 'mask_path', 'subset']) {
      if (!(field in rec)) {
        throw new Error(`${manifestPath}:${i + 1}: missing field ${field}`);
      }
    }
    if (!SUBSETS.has(rec.subset)) {
      throw new Error(`${manifestPath}:${i + 1}: unknown subset ${rec.subset}`);
    }
    if (seen.has(rec.id)) {
      throw new Error(`${manifestPath}:${i + 1}: duplicate id ${rec.id}`);
    }
    seen.add(rec.id);
    entries.push({
      id: rec.id,
      imagePath: rec.image_path,
      maskPath: rec.mask_path,
      subset: rec.subset,
      referencePath: rec.reference_path,
    });
  });
  return { entries, baseDir };
}

export function resolvePath(manifest: Manifest, relative: string): string {
  return path.resolve(manifest.baseDir, relative);
}
