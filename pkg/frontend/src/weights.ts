/**
 * Encoder weight files.
 *
 * Weights are plain float32 tensors generated once from a fixed seed
 * (`init-weights`) and loaded verbatim at export time, so re-exports are
 * byte-identical and the file fully determines the model. Format
 * (little-endian): magic "CWTS" | u16 version=1 | u32 seed | u32 tensor
 * count | per tensor: u16 name length, name, u8 rank, u32 dims..., f32 data.
 */
import { readFileSync, writeFileSync } from 'fs';

export class ModelLoadError extends Error {}

const MAGIC = 'CWTS';
const VERSION = 1;

export interface WeightTensor {
  name: string;
  dims: number[];
  data: Float32Array;
}

export interface WeightFile {
  seed: number;
  tensors: Map<string, WeightTensor>;
}

/** splitmix32: deterministic, seedable, good enough for weight init. */
export function makeRng(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x9e3779b9) >>> 0;
    let z = state;
    z = Math.imul(z ^ (z >>> 16), 0x21f0aaad);
    z = Math.imul(z ^ (z >>> 15), 0x735a2d97);
    z = z ^ (z >>> 15);
    return (z >>> 0) / 4294967296;
  };
}

/** Box-Muller normals scaled by 1/sqrt(fanIn). */
export function randomTensor(
  rng: () => number, name: string, dims: number[], fanIn: number,
): WeightTensor {
  const size = dims.reduce((a, b) => a * b, 1);
  const data = new Float32Array(size);
  const scale = 1 / Math.sqrt(fanIn);
  for (let i = 0; i < size; i += 2) {
    const u1 = Math.max(rng(), 1e-12);
    const u2 = rng();
    const r = Math.sqrt(-2 * Math.log(u1));
    data[i] = r * Math.cos(2 * Math.PI * u2) * scale;
    if (i + 1 < size) data[i + 1] = r * Math.sin(2 * Math.PI * u2) * scale;
  }
  return { name, dims, data };
}

export function writeWeights(path: string, file: WeightFile): void {
  const chunks: Buffer[] = [];
  const header = Buffer.alloc(14);
  header.write(MAGIC, 0, 'ascii');
  header.writeUInt16LE(VERSION, 4);
  header.writeUInt32LE(file.seed >>> 0, 6);
  header.writeUInt32LE(file.tensors.size, 10);
  chunks.push(header);
  for (const tensor of file.tensors.values()) {
    const nameBuf = Buffer.from(tensor.name, 'utf-8');
    const meta = Buffer.alloc(2 + nameBuf.length + 1 + 4 * tensor.dims.length);
    meta.writeUInt16LE(nameBuf.length, 0);
    nameBuf.copy(meta, 2);
    meta.writeUInt8(tensor.dims.length, 2 + nameBuf.length);
    tensor.dims.forEach((d, i) => {
      meta.writeUInt32LE(d, 2 + nameBuf.length + 1 + 4 * i);
    });
    chunks.push(meta);
    chunks.push(Buffer.from(tensor.data.buffer.slice(
      tensor.data.byteOffset, tensor.data.byteOffset + tensor.data.byteLength)));
  }
  writeFileSync(path, Buffer.concat(chunks));
}

export function loadWeights(path: string): WeightFile {
  let buf: Buffer;
  try {
    buf = readFileSync(path);
  } catch (err) {
    throw new ModelLoadError(`cannot read weights ${path}: ${err}`);
  }
  if (buf.length < 14 || buf.toString('ascii', 0, 4) !== MAGIC) {
    throw new ModelLoadError(`${path}: not a weights file`);
  }
  if (buf.readUInt16LE(4) !== VERSION) {
    throw new ModelLoadError(`${path}: unsupported weights version`);
  }
  const seed = buf.readUInt32LE(6);
  const count = buf.readUInt32LE(10);
  const tensors = new Map<string, WeightTensor>();
  let offset = 14;
  try {
    for (let t = 0; t < count; t++) {
      const nameLen = buf.readUInt16LE(offset);
      offset += 2;
      const name = buf.toString('utf-8', offset, offset + nameLen);
      offset += nameLen;
      const rank = buf.readUInt8(offset);
      offset += 1;
      const dims: number[] = [];
      for (let r = 0; r < rank; r++) {
        dims.push(buf.readUInt32LE(offset));
        offset += 4;
      }
      const size = dims.reduce((a, b) => a * b, 1);
      const data = new Float32Array(size);
      for (let i = 0; i < size; i++) {
        data[i] = buf.readFloatLE(offset);
        offset += 4;
      }
      tensors.set(name, { name, dims, data });
    }
  } catch (err) {
    throw new ModelLoadError(`${path}: truncated weights file (${err})`);
  }
  return { seed, tensors };
}
