/**
 * Binary PPM (P6, maxval 255) image I/O.
 *
 * PPM keeps the trainer dependency-free on the image side: three ASCII
 * header tokens followed by raw RGB bytes.  Pixels are exposed as float64
 * in [0, 1], row-major, channel-interleaved.
 */

import * as fs from "fs";

export interface RawImage {
  width: number;
  height: number;
  /** length = width * height * 3, values in [0, 1] */
  pixels: Float64Array;
}

export function writePpm(path: string, image: RawImage): void {
  const { width, height, pixels } = image;
  const header = Buffer.from(`P6\n${width} ${height}\n255\n`, "ascii");
  const body = Buffer.alloc(width * height * 3);
  for (let i = 0; i < body.length; i++) {
    body[i] = Math.max(0, Math.min(255, Math.round(pixels[i] * 255)));
  }
  fs.writeFileSync(path, Buffer.concat([header, body]));
}

export function readPpm(path: string): RawImage {
  const data = fs.readFileSync(path);
  let offset = 0;

  const token = (): string => {
    // skip whitespace and '#' comment lines between header fields
    while (offset < data.length) {
      const ch = data[offset];
      if (ch === 0x23) {
        while (offset < data.length && data[offset] !== 0x0a) offset++;
      } else if (ch === 0x20 || ch === 0x09 || ch === 0x0a || ch === 0x0d) {
        offset++;
      } else {
        break;
      }
    }
    const start = offset;
    while (offset < data.length && !/\s/.test(String.fromCharCode(data[offset]))) {
      offset++;
    }
    return data.subarray(start, offset).toString("ascii");
  };

  const magic = token();
  if (magic !== "P6") {
    throw new Error(`${path}: expected P6 magic, got "${magic}"`);
  }
  const width = parseInt(token(), 10);
  const height = parseInt(token(), 10);
  const maxval = parseInt(token(), 10);
  if (!(width > 0) || !(height > 0)) {
    throw new Error(`${path}: bad dimensions ${width}x${height}`);
  }
  if (maxval !== 255) {
    throw new Error(`${path}: only maxval 255 supported, got ${maxval}`);
  }
  offset += 1; // single whitespace after maxval
  const expected = width * height * 3;
  if (data.length - offset < expected) {
    throw new Error(`${path}: truncated pixel data`);
  }
  const pixels = new Float64Array(expected);
  for (let i = 0; i < expected; i++) {
    pixels[i] = data[offset + i] / 255;
  }
  return { width, height, pixels };
}
