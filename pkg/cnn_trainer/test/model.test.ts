import * as tf from '@tensorflow/tfjs';
import { beforeAll, describe, expect, it } from 'vitest';

import { initBackend } from '../src/backend';
import { buildModel, conv2dFilterGradient, layerSummary } from '../src/model';

beforeAll(async () => {
  await initBackend();
});

describe('architecture', () => {
  it('has the exact layer sequence', () => {
    const model = buildModel(5);
    const types = layerSummary(model).map((l) => l.type);
    expect(types).toEqual([
      'Conv2D',
      'Conv2D',
      'MaxPooling2D',
      'SteppedDropout',
      'Flatten',
      'Dense',
      'SteppedDropout',
      'Dense',
    ]);
  });

  it('matches the hand-computed parameter counts', () => {
    const model = buildModel(5);
    const params = layerSummary(model).map((l) => l.params);
    // conv1: 3*3*3*32 + 32; conv2: 3*3*32*64 + 64;
    // dense1: 64*32*32*128 + 128; output: 128*5 + 5
    expect(params).toEqual([896, 18496, 0, 0, 0, 64 * 32 * 32 * 128 + 128, 0, 128 * 5 + 5]);
    expect(params.reduce((a, b) => a + b, 0)).toBe(896 + 18496 + 8388736 + 645);
  });

  it('final layer width follows the class count', () => {
    const model = buildModel(3);
    const out = model.layers[model.layers.length - 1];
    expect(out.outputShape).toEqual([null, 3]);
  });

  it('softmax outputs sum to one within 1e-6', async () => {
    const model = buildModel(5, 11);
    const x = tf.randomUniform([4, 64, 64, 3], 0, 1, 'float32', 3);
    const probs = (model.predict(x) as tf.Tensor2D).arraySync();
    for (const row of probs) {
      const total = row.reduce((a, b) => a + b, 0);
      expect(Math.abs(total - 1)).toBeLessThan(1e-6);
      for (const p of row) expect(p).toBeGreaterThanOrEqual(0);
    }
  });

  it('rejects fewer than two classes', () => {
    expect(() => buildModel(1)).toThrow();
  });
});

describe('patched conv filter gradient', () => {
  it('matches autodiff on the cpu backend', async () => {
    const previous = tf.getBackend();
    await tf.setBackend('cpu');
    try {
      const x = tf.randomNormal([2, 8, 8, 3], 0, 1, 'float32', 1) as tf.Tensor4D;
      const w = tf.randomNormal([3, 3, 3, 4], 0, 1, 'float32', 2) as tf.Tensor4D;
      const dy = tf.randomNormal([2, 8, 8, 4], 0, 1, 'float32', 3) as tf.Tensor4D;
      const [, autodiff] = tf.grads((xi: tf.Tensor, wi: tf.Tensor) =>
        tf.conv2d(xi as tf.Tensor4D, wi as tf.Tensor4D, 1, 'same'),
      )([x, w], dy);
      const composed = conv2dFilterGradient(x, dy, 3, 3, 'same');
      const diff = tf.max(tf.abs(tf.sub(autodiff, composed))).dataSync()[0];
      expect(diff).toBeLessThan(1e-4);
    } finally {
      await tf.setBackend(previous);
    }
  });
});
