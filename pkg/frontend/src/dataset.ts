/**
 * Toy dataset handling: a folder of PPM images becomes high-resolution
 * crops; low-resolution inputs are produced on the fly by bilinear
 * downsampling (1/scale).
 *
 * The validation subset is a fixed seeded choice of 8 images (file names
 * sorted, then shuffled by the run seed), so repeated evaluations of the
 * same configuration score against the same split.
 */

import * as fs from "fs";
import * as path from "path";
import * as tf from "@tensorflow/tfjs";

import { readPpm, RawImage } from "./ppm";
import { Rng } from "./rng";

export const VALIDATION_COUNT = 8;

export interface DatasetSplit {
  /** [n, size, size, 3] in [0, 1] */
  trainHr: tf.Tensor4D;
  validationHr: tf.Tensor4D;
  trainCount: number;
  validationCount: number;
}

export function centerCrop(image: RawImage, size: number): Float64Array {
  if (image.width < size || image.height < size) {
    throw new Error(
      `image ${image.width}x${image.height} smaller than crop ${size}`
    );
  }
  const top = Math.floor((image.height - size) / 2);
  const left = Math.floor((image.width - size) / 2);
  const out = new Float64Array(size * size * 3);
  for (let i = 0; i < size; i++) {
    for (let j = 0; j < size; j++) {
      for (let c = 0; c < 3; c++) {
        out[(i * size + j) * 3 + c] =
          image.pixels[((top + i) * image.width + (left + j)) * 3 + c];
      }
    }
  }
  return out;
}

export function listImageFiles(dir: string): string[] {
  return fs
    .readdirSync(dir)
    .filter((name) => name.toLowerCase().endsWith(".ppm"))
    .sort();
}

export function loadDataset(dir: string, imageSize: number, seed: number): DatasetSplit {
  const files = listImageFiles(dir);
  if (files.length < VALIDATION_COUNT + 1) {
    throw new Error(
      `dataset ${dir} has ${files.length} .ppm images; need at least ` +
        `${VALIDATION_COUNT + 1} (8 validation + training)`
    );
  }
  const order = new Rng(seed ^ 0x5eed).shuffle([...files]);
  const validationFiles = order.slice(0, VALIDATION_COUNT);
  const trainFiles = order.slice(VALIDATION_COUNT);

  const toTensor = (names: string[]): tf.Tensor4D => {
    const buffers = names.map((name) =>
      centerCrop(readPpm(path.join(dir, name)), imageSize)
    );
    const flat = new Float32Array(buffers.length * imageSize * imageSize * 3);
    buffers.forEach((buf, idx) => flat.set(Float32Array.from(buf), idx * buf.length));
    return tf.tensor4d(flat, [buffers.length, imageSize, imageSize, 3]);
  };

  return {
    trainHr: toTensor(trainFiles),
    validationHr: toTensor(validationFiles),
    trainCount: trainFiles.length,
    validationCount: validationFiles.length,
  };
}

/** Bilinear 1/scale downsample of an HR batch. */
export function downsample(hr: tf.Tensor4D, scale: number): tf.Tensor4D {
  const [, h, w] = hr.shape;
  if (h % scale !== 0 || w % scale !== 0) {
    throw new Error(`image ${h}x${w} not divisible by scale ${scale}`);
  }
  return tf.image.resizeBilinear(hr, [h / scale, w / scale], true);
}
