/**
 * Deterministic 64-bit RNG (splitmix64) with labeled child-stream derivation.
 *
 * This is an independent implementation, not a port of the generator side's
 * RNG; the loader only needs its own reproducible streams (shuffling, view
 * augmentation), never bit-compatibility with the producer.
 */

const MASK64 = (1n << 64n) - 1n;

function splitmix64(state: bigint): [bigint, bigint] {
  let s = (state + 0x9e3779b97f4a7c15n) & MASK64;
  let z = s;
  z = ((z ^ (z >> 30n)) * 0xbf58476d1ce4e5b9n) & MASK64;
  z = ((z ^ (z >> 27n)) * 0x94d049bb133111ebn) & MASK64;
  z = z ^ (z >> 31n);
  return [s, z & MASK64];
}

/** FNV-1a over a UTF-8 label, 64-bit. */
function hashLabel(label: string): bigint {
  let h = 0xcbf29ce484222325n;
  const bytes = Buffer.from(label, "utf8");
  for (const b of bytes) {
    h = ((h ^ BigInt(b)) * 0x100000001b3n) & MASK64;
  }
  return h;
}

export class Rng {
  private state: bigint;

  constructor(seed: bigint | number) {
    this.state = BigInt(seed) & MASK64;
  }

  /** Independent stream addressed by (label, index); pure in the parent. */
  child(label: string, index = 0): Rng {
    const mixed =
      (this.state ^ hashLabel(label) ^ ((BigInt(index) & MASK64) * 0x9e3779b97f4a7c15n)) & MASK64;
    const [, z] = splitmix64(mixed);
    return new Rng(z);
  }

  nextU64(): bigint {
    const [s, z] = splitmix64(this.state);
    this.state = s;
    return z;
  }

  /** Uniform in [0, 1) with 53-bit resolution. */
  nextFloat(): number {
    return Number(this.nextU64() >> 11n) / 2 ** 53;
  }

  /** Uniform in [lo, hi). */
  uniform(lo: number, hi: number): number {
    return lo + (hi - lo) * this.nextFloat();
  }

  /** Uniform integer in [0, n). */
  nextInt(n: number): number {
    return Math.floor(this.nextFloat() * n);
  }
}
