/**
 * CEMB binary container, bit-compatible with the camoval reader.
 *
 * Layout (little-endian):
 *   magic "CEMB" | u16 version=1 | u32 count | u16 grid_h | u16 grid_w | u32 dim
 *   count * grid_h * grid_w * dim float32 values, row-major
 *
 * The sidecar `<path>.idx` lists one sample id per record ordinal; lines
 * starting with '#' carry metadata ("# key: value") and are not records.
 */
import { readFileSync, writeFileSync } from 'fs';

export const CEMB_MAGIC = 'CEMB';
export const CEMB_VERSION = 1;
const HEADER_BYTES = 18;

export interface CembHeader {
  count: number;
  gridH: number;
  gridW: number;
  dim: number;
}

export interface CembRecordSet extends CembHeader {
  /** Flat row-major payload, length count * gridH * gridW * dim. */
  data: Float32Array;
}

export function packCemb(records: CembRecordSet): Buffer {
  const { count, gridH, gridW, dim, data } = records;
  const expected = count * gridH * gridW * dim;
  if (data.length !== expected) {
    throw new Error(`payload length ${data.length}, expected ${expected}`);
  }
  const buf = Buffer.alloc(HEADER_BYTES + expected * 4);
  buf.write(CEMB_MAGIC, 0, 'ascii');
  buf.writeUInt16LE(CEMB_VERSION, 4);
  buf.writeUInt32LE(count, 6);
  buf.writeUInt16LE(gridH, 10);
  buf.writeUInt16LE(gridW, 12);
  buf.writeUInt32LE(dim, 14);
  for (let i = 0; i < expected; i++) {
    buf.writeFloatLE(data[i], HEADER_BYTES + i * 4);
  }
  return buf;
}

export function writeCemb(
  path: string,
  records: CembRecordSet,
  ids: string[],
  metadata: Record<string, string> = {},
  skipped: Array<{ id: string; reason: string }> = [],
): void {
  if (ids.length !== records.count) {
    throw new Error(`${ids.length} ids for ${records.count} records`);
  }
  writeFileSync(path, packCemb(records));
  const lines: string[] = [];
  for (const [key, value] of Object.entries(metadata)) {
    lines.push(`# ${key}: ${value}`);
  }
  for (const gap of skipped) {
    lines.push(`# skipped: ${gap.id} (${gap.reason})`);
  }
  for (const id of ids) {
    lines.push(id);
  }
  writeFileSync(indexPath(path), lines.join('\n') + '\n');
}

export function indexPath(path: string): string {
  return path + '.idx';
}

export function readCemb(path: string): CembRecordSet {
  const buf = readFileSync(path);
  if (buf.length < HEADER_BYTES || buf.toString('ascii', 0, 4) !== CEMB_MAGIC) {
    throw new Error(`${path}: not a CEMB file`);
  }
  const version = buf.readUInt16LE(4);
  if (version !== CEMB_VERSION) {
    throw new Error(`${path}: unsupported version ${version}`);
  }
  const count = buf.readUInt32LE(6);
  const gridH = buf.readUInt16LE(10);
  const gridW = buf.readUInt16LE(12);
  const dim = buf.readUInt32LE(14);
  const expected = count * gridH * gridW * dim;
  if (buf.length !== HEADER_BYTES + expected * 4) {
    throw new Error(`${path}: payload is ${buf.length - HEADER_BYTES} bytes, ` +
      `expected ${expected * 4}`);
  }
  const data = new Float32Array(expected);
  for (let i = 0; i < expected; i++) {
    data[i] = buf.readFloatLE(HEADER_BYTES + i * 4);
  }
  return { count, gridH, gridW, dim, data };
}

export function readIndex(path: string): { ids: string[]; metadata: Record<string, string> } {
  const ids: string[] = [];
  const metadata: Record<string, string> = {};
  for (const raw of readFileSync(path, 'utf-8').split('\n')) {
    const line = raw.trimEnd();
    if (!line) continue;
    if (line.startsWith('#')) {
      const body = line.slice(1).trim();
      const sep = body.indexOf(':');
      if (sep >= 0) {
        const key = body.slice(0, sep).trim();
        const value = body.slice(sep + 1).trim();
        metadata[key] = key in metadata ? `${metadata[key]}; ${value}` : value;
      }
      continue;
    }
    ids.push(line);
  }
  return { ids, metadata };
}
