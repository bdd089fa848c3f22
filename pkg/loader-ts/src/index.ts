export {
  FORMAT_VERSION,
  HEADER_SIZE,
  MAGIC,
  ShardFormatError,
  decodeShard,
  parseHeader,
  toFloat,
} from "./format.js";
export type { ShardHeader, ShardImage } from "./format.js";
export { ChecksumError, ManifestError, checksum64, loadManifest, verifyChecksums } from "./manifest.js";
export type { Manifest, ShardEntry } from "./manifest.js";
export { ShardIterator, openDataset } from "./dataset.js";
export { augmentView, augmentedViews } from "./augment.js";
export type { View } from "./augment.js";
export { Rng } from "./rng.js";
