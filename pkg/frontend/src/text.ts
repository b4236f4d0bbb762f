import { createHash } from 'crypto';

/**
 * The unified fine-grained task description shipped with the toolkit.
 * Byte-identical to the camoval constant (the test suite pins the digest).
 */
export const TASK_DESCRIPTION =
  'A realistic image of an object blending into its surroundings, where the ' +
  'background shares similar colors, textures, and patterns with the object, ' +
  'making it hard to distinguish. Natural lighting, photorealistic, seamless ' +
  'camouflage, high detail.';

export function taskDescriptionDigest(): string {
  return createHash('sha256').update(TASK_DESCRIPTION, 'utf-8').digest('hex');
}

/** Lowercased alphanumeric tokens. */
export function tokenize(text: string): string[] {
  return text.toLowerCase().split(/[^a-z0-9]+/).filter((t) => t.length > 0);
}

/** FNV-1a 32-bit, used to map tokens onto embedding-table rows. */
export function tokenHash(token: string): number {
  let hash = 0x811c9dc5;
  for (let i = 0; i < token.length; i++) {
    hash ^= token.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193) >>> 0;
  }
  return hash >>> 0;
}
