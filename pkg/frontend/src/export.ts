/**
 * Export jobs: one CEMB record per manifest entry, ordinal order = manifest
 * order. Per-image decode failures are logged, skipped, and marked in the
 * sidecar so ordinal alignment stays recoverable.
 */
import {
  ImageTextEncoder, InceptionStyleEncoder, IMAGE_TEXT_CONFIG, INCEPTION_CONFIG,
  IMAGE_TEXT_VARIANT, INCEPTION_VARIANT,
  imageTextPreprocessing, inceptionPreprocessing,
} from './encoder.js';
import { decodePng } from './image.js';
import { loadManifest, resolvePath } from './manifest.js';
import { TASK_DESCRIPTION } from './text.js';
import { loadWeights } from './weights.js';
import { writeCemb } from './cemb.js';

export type EncoderChoice = 'image_text_encoder' | 'inception_style';
export type OutputKind = 'global' | 'grid' | 'class_token' | 'text_tokens' | 'fid_features';

export interface ExportJob {
  manifestPath?: string;
  encoder: EncoderChoice;
  kind: OutputKind;
  weightsPath: string;
  outPath: string;
}

export interface ExportResult {
  count: number;
  skipped: Array<{ id: string; reason: string }>;
}

const VALID: Record<EncoderChoice, OutputKind[]> = {
  image_text_encoder: ['global', 'grid', 'class_token', 'text_tokens'],
  inception_style: ['fid_features'],
};

export function runExport(job: ExportJob): ExportResult {
  if (!VALID[job.encoder].includes(job.kind)) {
    throw new Error(
      `kind ${job.kind} is not produced by ${job.encoder} ` +
      `(expected one of ${VALID[job.encoder].join(', ')})`);
  }
  const weights = loadWeights(job.weightsPath);
  const metadata: Record<string, string> = {
    encoder: job.encoder,
    variant: job.encoder === 'image_text_encoder' ? IMAGE_TEXT_VARIANT : INCEPTION_VARIANT,
    kind: job.kind,
    preprocessing: job.encoder === 'image_text_encoder'
      ? imageTextPreprocessing() : inceptionPreprocessing(),
    weights_seed: String(weights.seed),
  };

  if (job.kind === 'text_tokens') {
    const encoder = new ImageTextEncoder(weights);
    const { tokens, length } = encoder.textTokens(TASK_DESCRIPTION);
    writeCemb(job.outPath, {
      count: 1, gridH: 1, gridW: length, dim: IMAGE_TEXT_CONFIG.dim, data: tokens,
    }, ['task_description'], metadata);
    return { count: 1, skipped: [] };
  }

  if (!job.manifestPath) {
    throw new Error(`kind ${job.kind} requires --manifest`);
  }
  const manifest = loadManifest(job.manifestPath);
  const records: Float32Array[] = [];
  const ids: string[] = [];
  const skipped: Array<{ id: string; reason: string }> = [];

  const encode = makeEncodeFn(job, weights);
  for (const entry of manifest.entries) {
    try {
      const image = decodePng(resolvePath(manifest, entry.imagePath));
      records.push(encode(image));
      ids.push(entry.id);
    } catch (err) {
      const reason = err instanceof Error ? err.message : String(err);
      console.error(`skipping ${entry.id}: ${reason}`);
      skipped.push({ id: entry.id, reason });
    }
  }

  const shape = recordShape(job.kind);
  const flat = new Float32Array(records.length * shape.gridH * shape.gridW * shape.dim);
  records.forEach((rec, i) => flat.set(rec, i * rec.length));
  writeCemb(job.outPath, {
    count: records.length, gridH: shape.gridH, gridW: shape.gridW, dim: shape.dim,
    data: flat,
  }, ids, metadata, skipped);
  return { count: records.length, skipped };
}

function makeEncodeFn(job: ExportJob, weights: ReturnType<typeof loadWeights>) {
  if (job.encoder === 'inception_style') {
    const encoder = new InceptionStyleEncoder(weights);
    return (image: Parameters<InceptionStyleEncoder['features']>[0]) =>
      encoder.features(image);
  }
  const encoder = new ImageTextEncoder(weights);
  switch (job.kind) {
    case 'global':
      return encoder.global.bind(encoder);
    case 'grid':
      return encoder.grid.bind(encoder);
    case 'class_token':
      return encoder.classToken.bind(encoder);
    default:
      throw new Error(`unsupported kind ${job.kind}`);
  }
}

function recordShape(kind: OutputKind): { gridH: number; gridW: number; dim: number } {
  switch (kind) {
    case 'grid':
      return {
        gridH: IMAGE_TEXT_CONFIG.grid,
        gridW: IMAGE_TEXT_CONFIG.grid,
        dim: IMAGE_TEXT_CONFIG.dim,
      };
    case 'global':
    case 'class_token':
      return { gridH: 1, gridW: 1, dim: IMAGE_TEXT_CONFIG.dim };
    case 'fid_features':
      return { gridH: 1, gridW: 1, dim: INCEPTION_CONFIG.dim };
    default:
      throw new Error(`unsupported kind ${kind}`);
  }
}
