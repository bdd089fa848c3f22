/**
 * Shard wire format (independent re-implementation; the point is conformance).
 *
 * Little-endian, 20-byte header:
 *   magic "NOIZ" | version u32 = 1 | image_count u32 | height u16 | width u16 |
 *   channels u8 = 3 | dtype u8 = 0 (unsigned 8-bit RGB) | reserved u16 = 0
 * followed by image_count * height * width * 3 raw row-major RGB bytes.
 */

export const MAGIC = "NOIZ";
export const FORMAT_VERSION = 1;
export const HEADER_SIZE = 20;

export class ShardFormatError extends Error {
  constructor(
    public readonly field: string,
    message: string,
  ) {
    super(message);
    this.name = "ShardFormatError";
  }
}

export interface ShardHeader {
  imageCount: number;
  height: number;
  width: number;
  channels: number;
  dtype: number;
}

export interface ShardImage {
  width: number;
  height: number;
  /** row-major RGB bytes, length = height * width * 3 */
  pixels: Uint8Array;
}

export function parseHeader(buf: Buffer): ShardHeader {
  if (buf.length < HEADER_SIZE) {
    throw new ShardFormatError("length", `file shorter than the ${HEADER_SIZE}-byte header`);
  }
  const magic = buf.subarray(0, 4).toString("latin1");
  if (magic !== MAGIC) {
    throw new ShardFormatError("magic", `bad magic ${JSON.stringify(magic)}, expected ${MAGIC}`);
  }
  const version = buf.readUInt32LE(4);
  if (version !== FORMAT_VERSION) {
    throw new ShardFormatError("version", `unsupported version ${version}`);
  }
  const imageCount = buf.readUInt32LE(8);
  const height = buf.readUInt16LE(12);
  const width = buf.readUInt16LE(14);
  const channels = buf.readUInt8(16);
  if (channels !== 3) {
    throw new ShardFormatError("channels", `expected 3 channels, got ${channels}`);
  }
  const dtype = buf.readUInt8(17);
  if (dtype !== 0) {
    throw new ShardFormatError("dtype", `unsupported dtype code ${dtype}`);
  }
  const reserved = buf.readUInt16LE(18);
  if (reserved !== 0) {
    throw new ShardFormatError("reserved", `reserved field must be 0, got ${reserved}`);
  }
  const expected = HEADER_SIZE + imageCount * height * width * 3;
  if (buf.length !== expected) {
    throw new ShardFormatError("length", `file is ${buf.length} bytes, header implies ${expected}`);
  }
  return { imageCount, height, width, channels, dtype };
}

export function decodeShard(buf: Buffer): ShardImage[] {
  const header = parseHeader(buf);
  const { imageCount, height, width } = header;
  const stride = height * width * 3;
  const images: ShardImage[] = [];
  for (let i = 0; i < imageCount; i++) {
    const start = HEADER_SIZE + i * stride;
    images.push({
      width,
      height,
      pixels: new Uint8Array(buf.subarray(start, start + stride)),
    });
  }
  return images;
}

/** Stored bytes to [0,1] floats (the generator side's dequantization). */
export function toFloat(image: ShardImage): Float32Array {
  const out = new Float32Array(image.pixels.length);
  for (let i = 0; i < image.pixels.length; i++) {
    out[i] = image.pixels[i] / 255.0;
  }
  return out;
}
