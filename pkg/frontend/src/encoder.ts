/**
 * Deterministic seeded-weight encoders.
 *
 * Pretrained checkpoints are not shipped; instead a small patch-embedding
 * network with locally generated, fixed-seed weights stands in for each
 * encoder family. The weights file fully determines every output, the
 * variant and preprocessing strings are recorded in the CEMB sidecar, and
 * downstream numbers are comparable only within one exporter config --
 * exactly the contract real encoder checkpoints would have.
 */
import * as tf from '@tensorflow/tfjs';

import { RgbImage, toInputTensor } from './image.js';
import { TASK_DESCRIPTION, tokenHash, tokenize } from './text.js';
import { makeRng, randomTensor, WeightFile, ModelLoadError } from './weights.js';

tf.setBackend('cpu');

export const IMAGE_TEXT_VARIANT = 'seeded-vit-b32-stub';
export const INCEPTION_VARIANT = 'seeded-inception-stub';

export const IMAGE_TEXT_CONFIG = {
  inputSize: 224,
  patchSize: 32,
  grid: 7,
  dim: 512,
  vocab: 4096,
};

export const INCEPTION_CONFIG = {
  inputSize: 96,
  patchSize: 8,
  grid: 12,
  dim: 2048,
};

export function imageTextPreprocessing(): string {
  const c = IMAGE_TEXT_CONFIG;
  return `resize_bilinear:${c.inputSize}x${c.inputSize};scale:1/255;` +
    `patch:${c.patchSize};variant:${IMAGE_TEXT_VARIANT}`;
}

export function inceptionPreprocessing(): string {
  const c = INCEPTION_CONFIG;
  return `resize_bilinear:${c.inputSize}x${c.inputSize};scale:1/255;` +
    `patch:${c.patchSize};variant:${INCEPTION_VARIANT}`;
}

/** Every tensor the two encoder families need, from one seed. */
export function generateWeights(seed: number): WeightFile {
  const rng = makeRng(seed);
  const itx = IMAGE_TEXT_CONFIG;
  const inc = INCEPTION_CONFIG;
  const patchDim = itx.patchSize * itx.patchSize * 3;
  const incPatchDim = inc.patchSize * inc.patchSize * 3;
  const tensors = [
    randomTensor(rng, 'itx/patch_w', [patchDim, itx.dim], patchDim),
    randomTensor(rng, 'itx/patch_b', [itx.dim], patchDim),
    randomTensor(rng, 'itx/global_w', [itx.dim, itx.dim], itx.dim),
    randomTensor(rng, 'itx/cls_w', [2 * itx.dim, itx.dim], 2 * itx.dim),
    randomTensor(rng, 'itx/text_embed', [itx.vocab, itx.dim], itx.dim),
    randomTensor(rng, 'inc/patch_w', [incPatchDim, inc.dim], incPatchDim),
    randomTensor(rng, 'inc/patch_b', [inc.dim], incPatchDim),
  ];
  return { seed, tensors: new Map(tensors.map((t) => [t.name, t])) };
}

function weight(weights: WeightFile, name: string): tf.Tensor {
  const tensor = weights.tensors.get(name);
  if (!tensor) {
    throw new ModelLoadError(`weights file lacks tensor ${name}`);
  }
  return tf.tensor(tensor.data, tensor.dims);
}

/** [grid*grid, patchSize*patchSize*3] patches of a [size, size, 3] input. */
function patchify(input: tf.Tensor3D, patchSize: number, grid: number): tf.Tensor2D {
  return tf.tidy(() => {
    const x = input.reshape([grid, patchSize, grid, patchSize, 3]);
    const perm = x.transpose([0, 2, 1, 3, 4]);
    return perm.reshape([grid * grid, patchSize * patchSize * 3]);
  });
}

export class ImageTextEncoder {
  constructor(private weights: WeightFile) {
    weight(weights, 'itx/patch_w').dispose(); // validate presence up front
  }

  /** Token grid [grid, grid, dim], the Eq.-4-style spatial embedding. */
  grid(image: RgbImage): Float32Array {
    const c = IMAGE_TEXT_CONFIG;
    const out = tf.tidy(() => {
      const input = toInputTensor(image, c.inputSize);
      const patches = patchify(input, c.patchSize, c.grid);
      const tokens = tf.tanh(tf.add(
        tf.matMul(patches, weight(this.weights, 'itx/patch_w') as tf.Tensor2D),
        weight(this.weights, 'itx/patch_b'),
      ));
      return tokens.reshape([c.grid, c.grid, c.dim]);
    });
    const data = out.dataSync() as Float32Array;
    out.dispose();
    return data;
  }

  /** Pooled whole-image embedding [dim] (knowledge-base candidates). */
  global(image: RgbImage): Float32Array {
    const c = IMAGE_TEXT_CONFIG;
    const out = tf.tidy(() => {
      const tokens = tf.tensor(this.grid(image), [c.grid * c.grid, c.dim]);
      const mean = tokens.mean(0, true);
      return tf.tanh(tf.matMul(
        mean as tf.Tensor2D, weight(this.weights, 'itx/global_w') as tf.Tensor2D,
      )).reshape([c.dim]);
    });
    const data = out.dataSync() as Float32Array;
    out.dispose();
    return data;
  }

  /** Class-token style summary [dim] (mean + max pooled, projected). */
  classToken(image: RgbImage): Float32Array {
    const c = IMAGE_TEXT_CONFIG;
    const out = tf.tidy(() => {
      const tokens = tf.tensor(this.grid(image), [c.grid * c.grid, c.dim]);
      const pooled = tf.concat([tokens.mean(0, true), tokens.max(0, true)], 1);
      return tf.tanh(tf.matMul(
        pooled as tf.Tensor2D, weight(this.weights, 'itx/cls_w') as tf.Tensor2D,
      )).reshape([c.dim]);
    });
    const data = out.dataSync() as Float32Array;
    out.dispose();
    return data;
  }

  /** Embedded tokens of the canonical task description, [L, dim]. */
  textTokens(text: string = TASK_DESCRIPTION): { tokens: Float32Array; length: number } {
    const c = IMAGE_TEXT_CONFIG;
    const words = tokenize(text);
    const table = this.weights.tensors.get('itx/text_embed');
    if (!table) {
      throw new ModelLoadError('weights file lacks tensor itx/text_embed');
    }
    const out = new Float32Array(words.length * c.dim);
    words.forEach((word, i) => {
      const row = tokenHash(word) % c.vocab;
      out.set(table.data.subarray(row * c.dim, (row + 1) * c.dim), i * c.dim);
    });
    return { tokens: out, length: words.length };
  }
}

export class InceptionStyleEncoder {
  constructor(private weights: WeightFile) {
    weight(weights, 'inc/patch_w').dispose();
  }

  /** Pooled 2048-dim features for FID/KID. */
  features(image: RgbImage): Float32Array {
    const c = INCEPTION_CONFIG;
    const out = tf.tidy(() => {
      const input = toInputTensor(image, c.inputSize);
      const patches = patchify(input, c.patchSize, c.grid);
      const mapped = tf.tanh(tf.add(
        tf.matMul(patches, weight(this.weights, 'inc/patch_w') as tf.Tensor2D),
        weight(this.weights, 'inc/patch_b'),
      ));
      return mapped.mean(0);
    });
    const data = out.dataSync() as Float32Array;
    out.dispose();
    return data;
  }
}
