/**
 * Generator and discriminator built from raw ops with explicit variables.
 *
 * Generator: a 3->n head convolution, m stacked self-calibrated convolution
 * modules at low resolution, then nearest-neighbor upsampling by `scale`
 * and a small reconstruction tail.  Each module splits its n channels into
 * four branches of n/4 (hence n % 4 == 0): a 3x3 branch, a 1x1 branch, a
 * calibrated branch whose 3x3 output is gated by a sigmoid computed from a
 * pooled-and-upsampled view of the same group, and a second 3x3 branch;
 * the concatenation is residually added to the module input.
 *
 * Discriminator: k blocks of convolution + batch-statistics normalization +
 * leaky ReLU (stride 2 while the feature map is larger than 4x4), then a
 * global average pool and a scalar real/fake head.
 */

import * as tf from "@tensorflow/tfjs";

export interface TrainerConfig {
  m: number;
  n: number;
  k: number;
  epochs: number;
  batchSize: number;
  scale: number;
  imageSize: number;
  seed: number;
  pixelLoss: boolean;
}

export function validateStructure(m: number, n: number, k: number): void {
  for (const [name, v] of [["m", m], ["n", n], ["k", k]] as const) {
    if (!Number.isInteger(v)) {
      throw new Error(`${name} must be an integer, got ${v}`);
    }
  }
  if (m < 1 || k < 1) {
    throw new Error(`m and k must be >= 1, got m=${m} k=${k}`);
  }
  if (n < 4 || n % 4 !== 0) {
    throw new Error(`n must be a positive multiple of 4, got ${n}`);
  }
}

class Conv {
  kernel: tf.Variable<tf.Rank.R4>;
  bias: tf.Variable<tf.Rank.R1>;

  constructor(
    inCh: number,
    outCh: number,
    size: number,
    seed: number,
    private stride: number = 1
  ) {
    const init = tf.initializers.glorotUniform({ seed });
    const seedValue = init.apply([size, size, inCh, outCh]) as tf.Tensor4D;
    const zero = tf.zeros([outCh]);
    this.kernel = tf.variable(seedValue) as tf.Variable<tf.Rank.R4>;
    this.bias = tf.variable(zero) as tf.Variable<tf.Rank.R1>;
    seedValue.dispose();
    zero.dispose();
  }

  apply(x: tf.Tensor4D): tf.Tensor4D {
    return tf.add(
      tf.conv2d(x, this.kernel as unknown as tf.Tensor4D, this.stride, "same"),
      this.bias
    ) as tf.Tensor4D;
  }

  variables(): tf.Variable[] {
    return [this.kernel as tf.Variable, this.bias as tf.Variable];
  }
}

class BatchStatNorm {
  scale: tf.Variable<tf.Rank.R1>;
  offset: tf.Variable<tf.Rank.R1>;

  constructor(channels: number) {
    const one = tf.ones([channels]);
    const zero = tf.zeros([channels]);
    this.scale = tf.variable(one) as tf.Variable<tf.Rank.R1>;
    this.offset = tf.variable(zero) as tf.Variable<tf.Rank.R1>;
    one.dispose();
    zero.dispose();
  }

  // Normalizes by the current batch statistics; the discriminator only runs
  // during training, so no running averages are kept.
  apply(x: tf.Tensor4D): tf.Tensor4D {
    const { mean, variance } = tf.moments(x, [0, 1, 2]);
    return tf.batchNorm(
      x,
      mean as tf.Tensor1D,
      variance as tf.Tensor1D,
      this.offset as unknown as tf.Tensor1D,
      this.scale as unknown as tf.Tensor1D,
      1e-5
    ) as tf.Tensor4D;
  }

  variables(): tf.Variable[] {
    return [this.scale as tf.Variable, this.offset as tf.Variable];
  }
}

export class Generator {
  private head: Conv;
  private modules: {
    plain: Conv;
    cheap: Conv;
    calibMain: Conv;
    calibGate: Conv;
    extra: Conv;
  }[] = [];
  private tailA: Conv;
  private tailB: Conv;
  readonly paramCount: number;

  constructor(private cfg: TrainerConfig) {
    validateStructure(cfg.m, cfg.n, cfg.k);
    const n = cfg.n;
    const q = n / 4;
    let seed = cfg.seed * 1000 + 1;
    this.head = new Conv(3, n, 3, seed++);
    for (let i = 0; i < cfg.m; i++) {
      this.modules.push({
        plain: new Conv(q, q, 3, seed++),
        cheap: new Conv(q, q, 1, seed++),
        calibMain: new Conv(q, q, 3, seed++),
        calibGate: new Conv(q, q, 3, seed++),
        extra: new Conv(q, q, 3, seed++),
      });
    }
    this.tailA = new Conv(n, 12, 3, seed++);
    this.tailB = new Conv(12, 3, 3, seed++);
    this.paramCount = this.variables().reduce((acc, v) => acc + v.size, 0);
  }

  /** Channels per branch inside each module (n/4). */
  get channelSplit(): number {
    return this.cfg.n / 4;
  }

  variables(): tf.Variable[] {
    const vars = [...this.head.variables()];
    for (const mod of this.modules) {
      vars.push(
        ...mod.plain.variables(),
        ...mod.cheap.variables(),
        ...mod.calibMain.variables(),
        ...mod.calibGate.variables(),
        ...mod.extra.variables()
      );
    }
    vars.push(...this.tailA.variables(), ...this.tailB.variables());
    return vars;
  }

  /** [b, s, s, 3] -> [b, s*scale, s*scale, 3], pixels in (0, 1). */
  apply(lr: tf.Tensor4D): tf.Tensor4D {
    const q = this.cfg.n / 4;
    let x = tf.relu(this.head.apply(lr)) as tf.Tensor4D;
    for (const mod of this.modules) {
      const groups = tf.split(x, 4, 3) as tf.Tensor4D[];
      const b1 = tf.relu(mod.plain.apply(groups[0])) as tf.Tensor4D;
      const b2 = tf.relu(mod.cheap.apply(groups[1])) as tf.Tensor4D;
      const g = groups[2];
      const [, h, w] = g.shape;
      const pooled = tf.avgPool(g, 2, 2, "same");
      const context = tf.image.resizeNearestNeighbor(
        mod.calibGate.apply(pooled as tf.Tensor4D),
        [h, w]
      );
      const gate = tf.sigmoid(tf.add(context, g));
      const b3 = tf.mul(mod.calibMain.apply(g), gate) as tf.Tensor4D;
      const b4 = tf.relu(mod.extra.apply(groups[3])) as tf.Tensor4D;
      const merged = tf.concat([b1, b2, b3, b4], 3) as tf.Tensor4D;
      x = tf.relu(tf.add(x, merged)) as tf.Tensor4D;
    }
    const [, h, w] = x.shape;
    const up = tf.image.resizeNearestNeighbor(x, [
      h * this.cfg.scale,
      w * this.cfg.scale,
    ]);
    const t = tf.relu(this.tailA.apply(up as tf.Tensor4D));
    return tf.sigmoid(this.tailB.apply(t as tf.Tensor4D)) as tf.Tensor4D;
  }

  dispose(): void {
    this.variables().forEach((v) => v.dispose());
  }
}

const DISC_WIDTH = 16;

export class Discriminator {
  private blocks: { conv: Conv; norm: BatchStatNorm }[] = [];
  private headKernel: tf.Variable;
  private headBias: tf.Variable;
  readonly paramCount: number;

  constructor(cfg: TrainerConfig) {
    validateStructure(cfg.m, cfg.n, cfg.k);
    let seed = cfg.seed * 1000 + 500;
    let spatial = cfg.imageSize;
    let inCh = 3;
    for (let i = 0; i < cfg.k; i++) {
      const stride = spatial > 4 ? 2 : 1;
      this.blocks.push({
        conv: new Conv(inCh, DISC_WIDTH, 3, seed++, stride),
        norm: new BatchStatNorm(DISC_WIDTH),
      });
      spatial = Math.ceil(spatial / stride);
      inCh = DISC_WIDTH;
    }
    const init = tf.initializers.glorotUniform({ seed: seed++ });
    const headValue = init.apply([DISC_WIDTH, 1]) as tf.Tensor2D;
    const zero = tf.zeros([1]);
    this.headKernel = tf.variable(headValue);
    this.headBias = tf.variable(zero);
    headValue.dispose();
    zero.dispose();
    this.paramCount = this.variables().reduce((acc, v) => acc + v.size, 0);
  }

  variables(): tf.Variable[] {
    const vars: tf.Variable[] = [];
    for (const block of this.blocks) {
      vars.push(...block.conv.variables(), ...block.norm.variables());
    }
    vars.push(this.headKernel, this.headBias);
    return vars;
  }

  /** [b, S, S, 3] -> [b, 1] probability that the input is a real image. */
  apply(hr: tf.Tensor4D): tf.Tensor2D {
    let x = hr;
    for (const block of this.blocks) {
      x = tf.leakyRelu(block.norm.apply(block.conv.apply(x)), 0.2) as tf.Tensor4D;
    }
    const pooled = tf.mean(x, [1, 2]) as tf.Tensor2D;
    const logits = tf.add(
      tf.matMul(pooled, this.headKernel as unknown as tf.Tensor2D),
      this.headBias
    );
    return tf.sigmoid(logits) as tf.Tensor2D;
  }

  dispose(): void {
    this.variables().forEach((v) => v.dispose());
  }
}
