/**
 * Training loop: Adam with per-epoch multiplicative learning-rate decay,
 * early stopping on validation loss with best-weight restore, and a final
 * report on the held-out test split (same JSON schema as the feature
 * pipeline's evaluation reports, plus the epoch history).
 */

import * as fs from 'fs';
import * as path from 'path';
import * as tf from '@tensorflow/tfjs';

import { ImageDataset, IMAGE_SIZE, PIXELS_PER_IMAGE, gatherImages, loadDataset, stratifiedSplit } from './data';
import { accuracy, confusionMatrix, macroF1, rocAuc } from './metrics';
import { buildModel } from './model';
import { Rng } from './random';

export interface CnnConfig {
  learningRate: number;
  lrDecay: number;
  maxEpochs: number;
  batchSize: number;
  patience: number;
  seed: number;
}

export const DEFAULT_CONFIG: CnnConfig = {
  learningRate: 1e-3,
  lrDecay: 0.9,
  maxEpochs: 32,
  batchSize: 32,
  patience: 5,
  seed: 0,
};

export interface EpochStats {
  epoch: number;
  learning_rate: number;
  train_loss: number;
  train_accuracy: number;
  val_loss: number;
  val_accuracy: number;
}

export interface CnnReport {
  accuracy: number;
  confusion: number[][];
  macro_f1: number;
  roc_auc: number;
  per_fold_accuracy: null;
  class_names: string[];
  epochs_run: number;
  best_val_loss: number;
  history: EpochStats[];
}

export interface TrainResult {
  model: tf.LayersModel;
  report: CnnReport;
  splits: { train: number[]; val: number[]; test: number[] };
}

function validateConfig(config: CnnConfig): void {
  if (config.learningRate <= 0) throw new Error('learningRate must be > 0');
  if (!(config.lrDecay > 0 && config.lrDecay <= 1)) throw new Error('lrDecay must be in (0, 1]');
  if (config.maxEpochs < 1) throw new Error('maxEpochs must be >= 1');
  if (config.batchSize < 1) throw new Error('batchSize must be >= 1');
  if (config.patience < 0) throw new Error('patience must be >= 0');
}

function toTensor(pixels: Float32Array, count: number): tf.Tensor4D {
  return tf.tensor4d(pixels, [count, IMAGE_SIZE, IMAGE_SIZE, 3]);
}

function oneHot(labels: number[], nClasses: number): tf.Tensor2D {
  return tf.oneHot(tf.tensor1d(labels, 'int32'), nClasses) as tf.Tensor2D;
}

/** Mean cross-entropy loss and accuracy without dropout. */
export function scoreDataset(
  model: tf.LayersModel,
  data: ImageDataset,
  rows: number[],
  batchSize = 64,
): { loss: number; accuracy: number; scores: number[][] } {
  let lossSum = 0;
  let correct = 0;
  const scores: number[][] = [];
  for (let start = 0; start < rows.length; start += batchSize) {
    const batchRows = rows.slice(start, start + batchSize);
    const batchScores = tf.tidy(() => {
      const x = toTensor(gatherImages(data, batchRows), batchRows.length);
      return (model.predict(x) as tf.Tensor2D).arraySync();
    });
    batchRows.forEach((row, i) => {
      const probs = batchScores[i];
      scores.push(probs);
      const truth = data.labels[row];
      lossSum += -Math.log(Math.max(probs[truth], 1e-12));
      const pred = probs.indexOf(Math.max(...probs));
      if (pred === truth) correct += 1;
    });
  }
  return { loss: lossSum / rows.length, accuracy: correct / rows.length, scores };
}

export function evaluateModel(
  model: tf.LayersModel,
  data: ImageDataset,
  rows: number[],
  classNames: string[],
): CnnReport {
  if (rows.length === 0) throw new Error('nothing to evaluate');
  const { scores } = scoreDataset(model, data, rows);
  const yTrue = rows.map((r) => data.labels[r]);
  const yPred = scores.map((row) => row.indexOf(Math.max(...row)));
  const confusion = confusionMatrix(yTrue, yPred, classNames.length);
  return {
    accuracy: accuracy(confusion),
    confusion,
    macro_f1: macroF1(confusion),
    roc_auc: rocAuc(yTrue, scores),
    per_fold_accuracy: null,
    class_names: classNames,
    epochs_run: 0,
    best_val_loss: NaN,
    history: [],
  };
}

export async function trainFromIndex(
  indexPath: string,
  config: CnnConfig = DEFAULT_CONFIG,
  fractions: [number, number, number] = [0.7, 0.15, 0.15],
  minPerClass = 10,
  log: (line: string) => void = () => undefined,
): Promise<TrainResult> {
  validateConfig(config);
  const data = loadDataset(indexPath);
  const perClass = new Map<number, number>();
  data.labels.forEach((y) => perClass.set(y, (perClass.get(y) ?? 0) + 1));
  for (const [c, count] of perClass) {
    if (count < minPerClass) {
      throw new Error(
        `class ${data.classNames[c]} has only ${count} images; need >= ${minPerClass}`,
      );
    }
  }

  const [train, val, test] = stratifiedSplit(data.labels, fractions, config.seed);
  const model = buildModel(data.classNames.length, config.seed);
  const optimizer = tf.train.adam(config.learningRate);
  model.compile({ optimizer, loss: 'categoricalCrossentropy', metrics: ['accuracy'] });

  const shuffler = new Rng(config.seed + 0x5eed);
  const history: EpochStats[] = [];
  let bestValLoss = Infinity;
  let bestWeights: tf.Tensor[] | null = null;
  let sinceBest = 0;
  let epochsRun = 0;

  for (let epoch = 0; epoch < config.maxEpochs; epoch++) {
    const lr = config.learningRate * Math.pow(config.lrDecay, epoch);
    (optimizer as unknown as { learningRate: number }).learningRate = lr;

    const order = shuffler.shuffle([...train]);
    let lossSum = 0;
    let accSum = 0;
    let batches = 0;
    for (let start = 0; start < order.length; start += config.batchSize) {
      const rows = order.slice(start, start + config.batchSize);
      const x = toTensor(gatherImages(data, rows), rows.length);
      const y = oneHot(rows.map((r) => data.labels[r]), data.classNames.length);
      const [loss, acc] = (await model.trainOnBatch(x, y)) as number[];
      x.dispose();
      y.dispose();
      lossSum += loss;
      accSum += acc;
      batches += 1;
    }

    const valStats = scoreDataset(model, data, val);
    epochsRun = epoch + 1;
    history.push({
      epoch: epochsRun,
      learning_rate: lr,
      train_loss: lossSum / batches,
      train_accuracy: accSum / batches,
      val_loss: valStats.loss,
      val_accuracy: valStats.accuracy,
    });
    log(
      `epoch ${epochsRun}/${config.maxEpochs} lr=${lr.toExponential(2)} ` +
        `train_loss=${(lossSum / batches).toFixed(4)} val_loss=${valStats.loss.toFixed(4)} ` +
        `val_acc=${valStats.accuracy.toFixed(3)}`,
    );

    if (valStats.loss < bestValLoss) {
      bestValLoss = valStats.loss;
      sinceBest = 0;
      if (bestWeights) bestWeights.forEach((w) => w.dispose());
      bestWeights = model.getWeights().map((w) => w.clone());
    } else {
      sinceBest += 1;
      if (sinceBest > config.patience) {
        log(`early stop at epoch ${epochsRun} (no val improvement for ${sinceBest} epochs)`);
        break;
      }
    }
  }

  if (bestWeights) {
    model.setWeights(bestWeights);
    bestWeights.forEach((w) => w.dispose());
  }

  const report = evaluateModel(model, data, test, data.classNames);
  report.epochs_run = epochsRun;
  report.best_val_loss = bestValLoss;
  report.history = history;
  return { model, report, splits: { train, val, test } };
}

/** Persist the model as model.json + weights.bin (no tfjs-node required). */
export async function saveModel(model: tf.LayersModel, dir: string): Promise<void> {
  fs.mkdirSync(dir, { recursive: true });
  await model.save(
    tf.io.withSaveHandler(async (artifacts) => {
      const weightData = artifacts.weightData as ArrayBuffer;
      fs.writeFileSync(path.join(dir, 'weights.bin'), Buffer.from(weightData));
      fs.writeFileSync(
        path.join(dir, 'model.json'),
        JSON.stringify(
          {
            modelTopology: artifacts.modelTopology,
            weightsManifest: [{ paths: ['weights.bin'], weights: artifacts.weightSpecs }],
          },
          null,
          2,
        ),
      );
      return { modelArtifactsInfo: { dateSaved: new Date(), modelTopologyType: 'JSON' } };
    }),
  );
}
