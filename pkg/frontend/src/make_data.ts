#!/usr/bin/env node
/**
 * Generates a deterministic toy dataset of procedural PPM textures.
 *
 *   node dist/make_data.js --out DIR [--count 24] [--size 32] [--seed 0]
 *
 * Images are band-limited sinusoid mixtures, so a downsampled copy retains
 * learnable structure for the super-resolution toy task.
 */

import * as fs from "fs";
import * as path from "path";

import { writePpm } from "./ppm";
import { Rng } from "./rng";

export function makeImage(size: number, rng: Rng): Float64Array {
  const pixels = new Float64Array(size * size * 3);
  const waves = [];
  for (let w = 0; w < 4; w++) {
    waves.push({
      fi: rng.next() * 0.9 + 0.1,
      fj: rng.next() * 0.9 + 0.1,
      phase: rng.next() * Math.PI * 2,
      weight: rng.next() * 0.5 + 0.2,
      channel: rng.int(3),
    });
  }
  for (let i = 0; i < size; i++) {
    for (let j = 0; j < size; j++) {
      for (let c = 0; c < 3; c++) {
        let v = 0.5;
        for (const wave of waves) {
          const affinity = wave.channel === c ? 1.0 : 0.35;
          v +=
            0.22 *
            wave.weight *
            affinity *
            Math.sin(wave.fi * i + wave.fj * j + wave.phase + c);
        }
        pixels[(i * size + j) * 3 + c] = Math.min(1, Math.max(0, v));
      }
    }
  }
  return pixels;
}

export function generateDataset(
  dir: string,
  count: number,
  size: number,
  seed: number
): string[] {
  fs.mkdirSync(dir, { recursive: true });
  const rng = new Rng(seed ^ 0xda7a);
  const names: string[] = [];
  for (let idx = 0; idx < count; idx++) {
    const name = `img${String(idx).padStart(3, "0")}.ppm`;
    writePpm(path.join(dir, name), {
      width: size,
      height: size,
      pixels: makeImage(size, rng),
    });
    names.push(name);
  }
  return names;
}

function main(): void {
  const argv = process.argv.slice(2);
  let out = "";
  let count = 24;
  let size = 32;
  let seed = 0;
  for (let i = 0; i < argv.length; i++) {
    const next = () => argv[++i];
    switch (argv[i]) {
      case "--out":
        out = next();
        break;
      case "--count":
        count = parseInt(next(), 10);
        break;
      case "--size":
        size = parseInt(next(), 10);
        break;
      case "--seed":
        seed = parseInt(next(), 10);
        break;
      default:
        throw new Error(`unknown flag ${argv[i]}`);
    }
  }
  if (!out) throw new Error("--out DIR is required");
  const names = generateDataset(out, count, size, seed);
  process.stderr.write(`wrote ${names.length} images to ${out}\n`);
}

if (require.main === module) {
  main();
}
