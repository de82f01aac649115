/**
 * Alternating adversarial training at toy scale and validation scoring.
 *
 * Per batch, the discriminator takes one ascent step on
 *     log D(hr) + log(1 - D(G(lr)))
 * and the generator descends the non-saturating loss -log D(G(lr)), plus a
 * pixel MSE term that keeps toy-scale runs stable (drop it with
 * pixelLoss=false for the adversarial-only mode).
 *
 * The returned score is -MSE of the generator output on the fixed seeded
 * 8-image validation split, so higher is better.
 */

import * as tf from "@tensorflow/tfjs";

import { DatasetSplit, downsample } from "./dataset";
import { mse } from "./metrics";
import { Discriminator, Generator, TrainerConfig } from "./models";
import { Rng } from "./rng";

const EPS = 1e-7;
const LEARNING_RATE = 1e-3;

export interface TrainOutcome {
  score: number;
  validationMse: number;
  generatorParams: number;
  discriminatorParams: number;
}

function batchIndices(count: number, batchSize: number, rng: Rng): number[][] {
  const order = rng.shuffle([...Array(count).keys()]);
  const batches: number[][] = [];
  for (let start = 0; start < count; start += batchSize) {
    batches.push(order.slice(start, start + batchSize));
  }
  return batches;
}

function gather4d(t: tf.Tensor4D, indices: number[]): tf.Tensor4D {
  return tf.tidy(() => tf.gather(t, tf.tensor1d(indices, "int32")) as tf.Tensor4D);
}

/** One discriminator ascent step on log D(hr) + log(1 - D(G(lr))). */
export function discriminatorStep(
  generator: Generator,
  discriminator: Discriminator,
  optimizer: tf.Optimizer,
  hr: tf.Tensor4D,
  lr: tf.Tensor4D
): void {
  const fake = tf.tidy(() => generator.apply(lr));
  optimizer.minimize(
    () =>
      tf.tidy(() => {
        const realProb = discriminator.apply(hr);
        const fakeProb = discriminator.apply(fake);
        return tf.neg(
          tf.mean(
            tf.add(
              tf.log(tf.add(realProb, EPS)),
              tf.log(tf.add(tf.sub(1, fakeProb), EPS))
            )
          )
        ) as tf.Scalar;
      }),
    false,
    discriminator.variables()
  );
  fake.dispose();
}

/** One generator step on -log D(G(lr)) (+ pixel MSE when enabled). */
export function generatorStep(
  generator: Generator,
  discriminator: Discriminator,
  optimizer: tf.Optimizer,
  hr: tf.Tensor4D,
  lr: tf.Tensor4D,
  pixelLoss: boolean
): void {
  optimizer.minimize(
    () =>
      tf.tidy(() => {
        const output = generator.apply(lr);
        const fakeProb = discriminator.apply(output);
        let loss = tf.neg(tf.mean(tf.log(tf.add(fakeProb, EPS)))) as tf.Scalar;
        if (pixelLoss) {
          const pixel = tf.mean(tf.square(tf.sub(output, hr))) as tf.Scalar;
          loss = tf.add(loss, pixel) as tf.Scalar;
        }
        return loss;
      }),
    false,
    generator.variables()
  );
}

export class Trainer {
  constructor(readonly cfg: TrainerConfig) {}

  /** Builds fresh networks, trains for cfg.epochs, scores on validation. */
  async trainAndScore(data: DatasetSplit): Promise<TrainOutcome> {
    const generator = new Generator(this.cfg);
    const discriminator = new Discriminator(this.cfg);
    const genOpt = tf.train.adam(LEARNING_RATE);
    const discOpt = tf.train.adam(LEARNING_RATE);
    const rng = new Rng(this.cfg.seed ^ 0x7a17);

    try {
      for (let epoch = 0; epoch < this.cfg.epochs; epoch++) {
        for (const indices of batchIndices(data.trainCount, this.cfg.batchSize, rng)) {
          const hr = gather4d(data.trainHr, indices);
          const lr = downsample(hr, this.cfg.scale);
          discriminatorStep(generator, discriminator, discOpt, hr, lr);
          generatorStep(
            generator,
            discriminator,
            genOpt,
            hr,
            lr,
            this.cfg.pixelLoss
          );
          hr.dispose();
          lr.dispose();
        }
      }

      const validationMse = await this.scoreMse(generator, data);
      return {
        score: -validationMse,
        validationMse,
        generatorParams: generator.paramCount,
        discriminatorParams: discriminator.paramCount,
      };
    } finally {
      generator.dispose();
      discriminator.dispose();
      genOpt.dispose();
      discOpt.dispose();
    }
  }

  /** Validation MSE in float64, computed outside the tensor graph. */
  private async scoreMse(generator: Generator, data: DatasetSplit): Promise<number> {
    const produced = tf.tidy(() => {
      const lr = downsample(data.validationHr, this.cfg.scale);
      return generator.apply(lr);
    });
    const got = await produced.data();
    const want = await data.validationHr.data();
    produced.dispose();
    return mse(got, want);
  }
}
