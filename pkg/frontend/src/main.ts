#!/usr/bin/env node
/**
 * sr-trainer: serves super-resolution training evaluations over stdin/stdout.
 *
 *   sr-trainer --data DIR [--epochs N] [--batch-size B] [--image-size S]
 *              [--scale F] [--seed SEED] [--deterministic]
 *              [--adversarial-only]
 *
 * Each request names a network structure (m generator modules, n channels,
 * k discriminator blocks); the trainer builds it, runs the configured
 * number of epochs on the PPM images under --data, and answers with
 * score = -MSE on the fixed 8-image validation split.
 */

import * as tf from "@tensorflow/tfjs";

import { DatasetSplit, loadDataset } from "./dataset";
import { validateStructure } from "./models";
import { serve } from "./protocol";
import { Trainer } from "./trainer";

interface Args {
  data: string;
  epochs: number;
  batchSize: number;
  imageSize: number;
  scale: number;
  seed: number;
  deterministic: boolean;
  adversarialOnly: boolean;
}

function parseArgs(argv: string[]): Args {
  const args: Args = {
    data: "",
    epochs: 2,
    batchSize: 8,
    imageSize: 32,
    scale: 4,
    seed: 0,
    deterministic: false,
    adversarialOnly: false,
  };
  for (let i = 0; i < argv.length; i++) {
    const flag = argv[i];
    const next = () => {
      i++;
      if (i >= argv.length) throw new Error(`${flag} needs a value`);
      return argv[i];
    };
    switch (flag) {
      case "--data":
        args.data = next();
        break;
      case "--epochs":
        args.epochs = parseInt(next(), 10);
        break;
      case "--batch-size":
        args.batchSize = parseInt(next(), 10);
        break;
      case "--image-size":
        args.imageSize = parseInt(next(), 10);
        break;
      case "--scale":
        args.scale = parseInt(next(), 10);
        break;
      case "--seed":
        args.seed = parseInt(next(), 10);
        break;
      case "--deterministic":
        args.deterministic = true;
        break;
      case "--adversarial-only":
        args.adversarialOnly = true;
        break;
      default:
        throw new Error(`unknown flag ${flag}`);
    }
  }
  if (!args.data) throw new Error("--data DIR is required");
  if (args.epochs < 0) throw new Error("--epochs must be >= 0");
  if (args.imageSize % args.scale !== 0) {
    throw new Error("--image-size must be divisible by --scale");
  }
  return args;
}

async function main(): Promise<void> {
  const args = parseArgs(process.argv.slice(2));
  // The pure-JS cpu backend computes identical results for identical seeds;
  // --deterministic pins it explicitly in case an accelerated backend is
  // ever registered alongside.
  if (args.deterministic) {
    await tf.setBackend("cpu");
  }
  await tf.ready();
  process.stderr.write(
    `sr-trainer ready: backend=${tf.getBackend()} data=${args.data} ` +
      `epochs=${args.epochs} image=${args.imageSize} scale=${args.scale}\n`
  );

  // Loaded lazily so a missing dataset surfaces as per-request error
  // responses instead of a startup crash.
  let data: DatasetSplit | null = null;

  await serve(async (m, n, k) => {
    validateStructure(m, n, k);
    if (data === null) {
      data = loadDataset(args.data, args.imageSize, args.seed);
      process.stderr.write(
        `dataset: ${data.trainCount} train + ${data.validationCount} validation\n`
      );
    }
    const trainer = new Trainer({
      m,
      n,
      k,
      epochs: args.epochs,
      batchSize: args.batchSize,
      scale: args.scale,
      imageSize: args.imageSize,
      seed: args.seed,
      pixelLoss: !args.adversarialOnly,
    });
    const started = Date.now();
    const outcome = await trainer.trainAndScore(data);
    process.stderr.write(
      `evaluated m=${m} n=${n} k=${k}: mse=${outcome.validationMse.toExponential(4)} ` +
        `genParams=${outcome.generatorParams} discParams=${outcome.discriminatorParams} ` +
        `in ${((Date.now() - started) / 1000).toFixed(1)}s ` +
        `(tensors=${tf.memory().numTensors})\n`
    );
    return outcome.score;
  });
}

main().catch((err) => {
  process.stderr.write(`fatal: ${err}\n`);
  process.exit(1);
});
