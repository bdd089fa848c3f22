/**
 * Contrastive view augmentation over loaded images, mirroring the producer
 * pipeline's semantics: grayscale with probability 0.2; brightness, contrast,
 * and saturation each scaled by an independent factor uniform in [0.6, 1.4];
 * horizontal flip with probability 0.5; aspect-ratio change uniform in
 * [0.75, 1.33]; area crop factor uniform in [0.08, 1]; bicubic resize to the
 * output size.
 */

import { ShardImage, toFloat } from "./format.js";
import { Rng } from "./rng.js";

export interface View {
  width: number;
  height: number;
  /** row-major RGB in [0,1], length = height * width * 3 */
  data: Float32Array;
}

const LUMA_R = 0.2126;
const LUMA_G = 0.7152;
const LUMA_B = 0.0722;

function cubicWeight(t: number): number {
  // Catmull-Rom style bicubic kernel, a = -0.5
  const a = -0.5;
  const x = Math.abs(t);
  if (x <= 1) return (a + 2) * x * x * x - (a + 3) * x * x + 1;
  if (x < 2) return a * x * x * x - 5 * a * x * x + 8 * a * x - 4 * a;
  return 0;
}

function resizeBicubic(
  src: Float32Array,
  srcW: number,
  srcH: number,
  dstW: number,
  dstH: number,
): Float32Array {
  // horizontal pass then vertical pass; edges replicate
  const mid = new Float32Array(srcH * dstW * 3);
  const scaleX = srcW / dstW;
  for (let dx = 0; dx < dstW; dx++) {
    const sx = (dx + 0.5) * scaleX - 0.5;
    const base = Math.floor(sx);
    const weights = [0, 0, 0, 0];
    let wsum = 0;
    for (let k = -1; k <= 2; k++) {
      const wgt = cubicWeight(sx - (base + k));
      weights[k + 1] = wgt;
      wsum += wgt;
    }
    for (let y = 0; y < srcH; y++) {
      for (let c = 0; c < 3; c++) {
        let acc = 0;
        for (let k = -1; k <= 2; k++) {
          const xx = Math.min(Math.max(base + k, 0), srcW - 1);
          acc += weights[k + 1] * src[(y * srcW + xx) * 3 + c];
        }
        mid[(y * dstW + dx) * 3 + c] = acc / wsum;
      }
    }
  }
  const out = new Float32Array(dstH * dstW * 3);
  const scaleY = srcH / dstH;
  for (let dy = 0; dy < dstH; dy++) {
    const sy = (dy + 0.5) * scaleY - 0.5;
    const base = Math.floor(sy);
    const weights = [0, 0, 0, 0];
    let wsum = 0;
    for (let k = -1; k <= 2; k++) {
      const wgt = cubicWeight(sy - (base + k));
      weights[k + 1] = wgt;
      wsum += wgt;
    }
    for (let dx = 0; dx < dstW; dx++) {
      for (let c = 0; c < 3; c++) {
        let acc = 0;
        for (let k = -1; k <= 2; k++) {
          const yy = Math.min(Math.max(base + k, 0), srcH - 1);
          acc += weights[k + 1] * mid[(yy * dstW + dx) * 3 + c];
        }
        out[(dy * dstW + dx) * 3 + c] = Math.min(Math.max(acc / wsum, 0), 1);
      }
    }
  }
  return out;
}

export function augmentView(image: ShardImage, outSize: number, rng: Rng): View {
  const { width: w, height: h } = image;
  let data = toFloat(image);

  const gray = rng.nextFloat() < 0.2;
  const fBright = rng.uniform(0.6, 1.4);
  const fContrast = rng.uniform(0.6, 1.4);
  const fSat = rng.uniform(0.6, 1.4);
  const flip = rng.nextFloat() < 0.5;
  const area = rng.uniform(0.08, 1.0) * w * h;
  const ratio = rng.uniform(0.75, 4 / 3) * (w / h);
  let bw = Math.round(Math.sqrt(area * ratio));
  let bh = Math.round(Math.sqrt(area / ratio));
  bw = Math.min(Math.max(bw, 1), w);
  bh = Math.min(Math.max(bh, 1), h);
  const top = rng.nextInt(h - bh + 1);
  const left = rng.nextInt(w - bw + 1);

  if (gray) {
    for (let i = 0; i < w * h; i++) {
      const y = LUMA_R * data[3 * i] + LUMA_G * data[3 * i + 1] + LUMA_B * data[3 * i + 2];
      data[3 * i] = y;
      data[3 * i + 1] = y;
      data[3 * i + 2] = y;
    }
  }

  // brightness, then contrast about the mean luma, then saturation
  let meanLuma = 0;
  for (let i = 0; i < w * h; i++) {
    data[3 * i] *= fBright;
    data[3 * i + 1] *= fBright;
    data[3 * i + 2] *= fBright;
    meanLuma += LUMA_R * data[3 * i] + LUMA_G * data[3 * i + 1] + LUMA_B * data[3 * i + 2];
  }
  meanLuma /= w * h;
  for (let i = 0; i < w * h; i++) {
    for (let c = 0; c < 3; c++) {
      data[3 * i + c] = meanLuma + (data[3 * i + c] - meanLuma) * fContrast;
    }
    const y = LUMA_R * data[3 * i] + LUMA_G * data[3 * i + 1] + LUMA_B * data[3 * i + 2];
    for (let c = 0; c < 3; c++) {
      const v = y + (data[3 * i + c] - y) * fSat;
      data[3 * i + c] = Math.min(Math.max(v, 0), 1);
    }
  }

  if (flip) {
    const flipped = new Float32Array(data.length);
    for (let y = 0; y < h; y++) {
      for (let x = 0; x < w; x++) {
        for (let c = 0; c < 3; c++) {
          flipped[(y * w + x) * 3 + c] = data[(y * w + (w - 1 - x)) * 3 + c];
        }
      }
    }
    data = flipped;
  }

  const crop = new Float32Array(bh * bw * 3);
  for (let y = 0; y < bh; y++) {
    const srcOff = ((top + y) * w + left) * 3;
    crop.set(data.subarray(srcOff, srcOff + bw * 3), y * bw * 3);
  }

  return { width: outSize, height: outSize, data: resizeBicubic(crop, bw, bh, outSize, outSize) };
}

/**
 * Yield two independently augmented views per image (the contrastive-pair
 * convention). Deterministic per (iterator order, seed).
 */
export function* augmentedViews(
  iterator: Iterable<ShardImage>,
  outSize: number,
  seed: bigint | number,
): Generator<[View, View]> {
  const root = new Rng(seed);
  let index = 0;
  for (const image of iterator) {
    const a = augmentView(image, outSize, root.child("view_a", index));
    const b = augmentView(image, outSize, root.child("view_b", index));
    yield [a, b];
    index += 1;
  }
}
