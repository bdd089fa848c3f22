/** Dataset manifest loading and checksum verification. */

import { createHash } from "node:crypto";
import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";

export const MANIFEST_VERSION = 1;

export class ManifestError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "ManifestError";
  }
}

export class ChecksumError extends Error {
  constructor(
    public readonly shard: string,
    expected: string,
    actual: string,
  ) {
    super(`checksum mismatch for ${shard}: expected ${expected}, got ${actual}`);
    this.name = "ChecksumError";
  }
}

export interface ShardEntry {
  filename: string;
  first_index: number;
  count: number;
  checksum64: string;
}

export interface Manifest {
  format_version: number;
  root_seed: number;
  generator: { model: string; size: number; params?: Record<string, unknown> };
  count: number;
  resolution: number;
  shard_size: number;
  shards: ShardEntry[];
}

/** First 8 bytes of SHA-256, hex (the producer's checksum-64). */
export function checksum64(data: Buffer): string {
  return createHash("sha256").update(data).digest("hex").slice(0, 16);
}

export function loadManifest(manifestPath: string): { manifest: Manifest; dir: string } {
  const manifest = JSON.parse(readFileSync(manifestPath, "utf8")) as Manifest;
  if (manifest.format_version !== MANIFEST_VERSION) {
    throw new ManifestError(
      `unsupported manifest format_version ${manifest.format_version}` +
        ` (loader supports ${MANIFEST_VERSION})`,
    );
  }
  const total = manifest.shards.reduce((acc, s) => acc + s.count, 0);
  if (total !== manifest.count) {
    throw new ManifestError(`shard counts sum to ${total}, manifest says ${manifest.count}`);
  }
  return { manifest, dir: dirname(manifestPath) };
}

export function verifyChecksums(manifest: Manifest, dir: string): void {
  for (const shard of manifest.shards) {
    const data = readFileSync(join(dir, shard.filename));
    const actual = checksum64(data);
    if (actual !== shard.checksum64) {
      throw new ChecksumError(shard.filename, shard.checksum64, actual);
    }
  }
}
