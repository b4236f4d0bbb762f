/** PNG decoding into RGB tensors. */
import { readFileSync } from 'fs';
import { PNG } from 'pngjs';
import * as tf from '@tensorflow/tfjs';

export interface RgbImage {
  width: number;
  height: number;
  /** Row-major RGB, length width * height * 3, values 0..255. */
  data: Uint8Array;
}

export class ImageDecodeError extends Error {}

export function decodePng(path: string): RgbImage {
  let png: PNG;
  try {
    png = PNG.sync.read(readFileSync(path));
  } catch (err) {
    throw new ImageDecodeError(`cannot decode ${path}: ${err}`);
  }
  const { width, height } = png;
  if (width < 1 || height < 1) {
    throw new ImageDecodeError(`zero-area image ${path}`);
  }
  const rgb = new Uint8Array(width * height * 3);
  for (let p = 0; p < width * height; p++) {
    rgb[p * 3] = png.data[p * 4];
    rgb[p * 3 + 1] = png.data[p * 4 + 1];
    rgb[p * 3 + 2] = png.data[p * 4 + 2];
  }
  return { width, height, data: rgb };
}

/** Resized [0,1]-scaled float tensor of shape [size, size, 3]. */
export function toInputTensor(image: RgbImage, size: number): tf.Tensor3D {
  return tf.tidy(() => {
    const raw = tf.tensor3d(
      Float32Array.from(image.data),
      [image.height, image.width, 3],
    );
    const resized = image.height === size && image.width === size
      ? raw
      : tf.image.resizeBilinear(raw, [size, size], true);
    return resized.div(255) as tf.Tensor3D;
  });
}
