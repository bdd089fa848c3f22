/**
 * Shard iterator: validates the manifest, header fields, and checksums up
 * front, then yields images in global index order (or a deterministic
 * seed-driven shuffle).
 */

import { readFileSync } from "node:fs";
import { join } from "node:path";

import { decodeShard, parseHeader, ShardFormatError, ShardImage } from "./format.js";
import { loadManifest, Manifest, ShardEntry, verifyChecksums } from "./manifest.js";
import { Rng } from "./rng.js";

export class ShardIterator implements Iterable<ShardImage> {
  readonly manifest: Manifest;
  private readonly dir: string;
  private readonly shuffleSeed?: bigint;
  private cache: { filename: string; images: ShardImage[] } | null = null;

  constructor(manifest: Manifest, dir: string, shuffleSeed?: bigint) {
    this.manifest = manifest;
    this.dir = dir;
    this.shuffleSeed = shuffleSeed;
  }

  get count(): number {
    return this.manifest.count;
  }

  get resolution(): number {
    return this.manifest.resolution;
  }

  shuffled(seed: bigint | number): ShardIterator {
    return new ShardIterator(this.manifest, this.dir, BigInt(seed));
  }

  private shardFor(index: number): ShardEntry {
    for (const shard of this.manifest.shards) {
      if (index >= shard.first_index && index < shard.first_index + shard.count) {
        return shard;
      }
    }
    throw new RangeError(`index ${index} outside dataset of ${this.manifest.count}`);
  }

  at(index: number): ShardImage {
    const shard = this.shardFor(index);
    if (this.cache === null || this.cache.filename !== shard.filename) {
      const buf = readFileSync(join(this.dir, shard.filename));
      this.cache = { filename: shard.filename, images: decodeShard(buf) };
    }
    return this.cache.images[index - shard.first_index];
  }

  *[Symbol.iterator](): Generator<ShardImage> {
    const order = [...Array(this.manifest.count).keys()];
    if (this.shuffleSeed !== undefined) {
      const rng = new Rng(this.shuffleSeed).child("shuffle");
      for (let i = order.length - 1; i > 0; i--) {
        const j = rng.nextInt(i + 1);
        [order[i], order[j]] = [order[j], order[i]];
      }
    }
    for (const index of order) {
      yield this.at(index);
    }
  }
}

/**
 * Open a materialized dataset: validates the manifest version, every shard's
 * header fields against the manifest, and every checksum before the first
 * yield. Checksum errors name the offending shard.
 */
export function openDataset(manifestPath: string): ShardIterator {
  const { manifest, dir } = loadManifest(manifestPath);
  verifyChecksums(manifest, dir);
  for (const shard of manifest.shards) {
    const buf = readFileSync(join(dir, shard.filename));
    const header = parseHeader(buf);
    if (header.imageCount !== shard.count) {
      throw new ShardFormatError(
        "image_count",
        `${shard.filename}: header says ${header.imageCount} images, manifest says ${shard.count}`,
      );
    }
    if (header.height !== manifest.resolution || header.width !== manifest.resolution) {
      throw new ShardFormatError(
        "resolution",
        `${shard.filename}: ${header.width}x${header.height} != manifest resolution ${manifest.resolution}`,
      );
    }
  }
  return new ShardIterator(manifest, dir);
}
