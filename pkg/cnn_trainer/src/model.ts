/**
 * The small CNN: Conv 32 (3x3, relu) -> Conv 64 (3x3, relu) -> MaxPool 2x2
 * -> Dropout 0.25 -> Flatten -> Dense 128 (relu) -> Dropout 0.5 ->
 * Dense n_classes (softmax), on 64x64x3 inputs. Convolutions use same
 * padding and stride 1.
 *
 * Two runtime adaptations for training on the pure-wasm backend:
 *  - the Conv2D filter gradient is re-registered as a composition of
 *    forward convolutions (the wasm backend ships no Conv2DBackpropFilter
 *    kernel, and the identity keeps the heavy work in XNNPACK);
 *  - dropout layers advance their seed every call, so masks are
 *    deterministic per run yet differ between steps.
 */

import * as tf from '@tensorflow/tfjs';
import { Kwargs } from '@tensorflow/tfjs-layers/dist/types';

export const INPUT_SIZE = 64;

let gradientPatched = false;

/**
 * dW[u,v,ci,co] = sum_{b,i,j} x_pad[b,i+u,j+v,ci] * dy[b,i,j,co], computed
 * as a forward convolution with batch and channel axes swapped. Assumes
 * stride 1 and NHWC, which is all this model uses.
 */
export function conv2dFilterGradient(
  x: tf.Tensor4D,
  dy: tf.Tensor4D,
  kh: number,
  kw: number,
  pad: 'same' | 'valid' | number,
): tf.Tensor4D {
  return tf.tidy(() => {
    let padded = x;
    if (pad === 'same') {
      const before = [Math.floor((kh - 1) / 2), Math.floor((kw - 1) / 2)];
      padded = tf.pad(x, [
        [0, 0],
        [before[0], kh - 1 - before[0]],
        [before[1], kw - 1 - before[1]],
        [0, 0],
      ]);
    } else if (typeof pad === 'number' && pad > 0) {
      padded = tf.pad(x, [[0, 0], [pad, pad], [pad, pad], [0, 0]]);
    }
    const xT = tf.transpose(padded, [3, 1, 2, 0]); // [Cin, H+p, W+p, B]
    const filter = tf.transpose(dy, [1, 2, 0, 3]); // [OH, OW, B, Cout]
    const grad = tf.conv2d(xT as tf.Tensor4D, filter as tf.Tensor4D, 1, 'valid');
    return tf.transpose(grad, [1, 2, 0, 3]) as tf.Tensor4D;
  });
}

export function patchConv2dGradient(): void {
  if (gradientPatched) return;
  gradientPatched = true;
  tf.unregisterGradient('Conv2D');
  tf.registerGradient({
    kernelName: 'Conv2D',
    inputsToSave: ['x', 'filter'],
    gradFunc: (dy, saved, attrs) => {
      const [x, filter] = saved as [tf.Tensor4D, tf.Tensor4D];
      const { strides, pad, dataFormat, dilations } = attrs as unknown as {
        strides: [number, number] | number;
        pad: 'same' | 'valid' | number;
        dataFormat: string;
        dilations: [number, number] | number;
      };
      const strideList = typeof strides === 'number' ? [strides, strides] : strides;
      const dilationList = typeof dilations === 'number' ? [dilations, dilations] : dilations ?? [1, 1];
      if (dataFormat !== 'NHWC' || strideList.some((s) => s !== 1) || dilationList.some((d) => d !== 1)) {
        throw new Error('patched Conv2D gradient supports stride-1 undilated NHWC only');
      }
      return {
        x: () => tf.conv2dTranspose(dy as tf.Tensor4D, filter, x.shape, 1, pad),
        filter: () =>
          conv2dFilterGradient(x, dy as tf.Tensor4D, filter.shape[0], filter.shape[1], pad),
      };
    },
  });
}

/** Dropout whose mask seed advances every training step. */
class SteppedDropout extends tf.layers.Layer {
  static className = 'SteppedDropout';
  private readonly rate: number;
  private readonly seed: number;
  private step = 0;

  constructor(rate: number, seed: number, name: string) {
    super({ name, trainable: false });
    this.rate = rate;
    this.seed = seed;
    this.supportsMasking = true;
  }

  call(inputs: tf.Tensor | tf.Tensor[], kwargs: Kwargs): tf.Tensor {
    const input = Array.isArray(inputs) ? inputs[0] : inputs;
    if (kwargs['training'] !== true || this.rate <= 0) {
      return input;
    }
    this.step += 1;
    return tf.dropout(input, this.rate, undefined, this.seed + this.step);
  }

  computeOutputShape(inputShape: tf.Shape | tf.Shape[]): tf.Shape | tf.Shape[] {
    return inputShape;
  }

  getConfig(): tf.serialization.ConfigDict {
    return { ...super.getConfig(), rate: this.rate, seed: this.seed };
  }
}
tf.serialization.registerClass(SteppedDropout as never);

export function buildModel(nClasses: number, seed = 0): tf.LayersModel {
  if (nClasses < 2) {
    throw new Error('need at least 2 classes');
  }
  patchConv2dGradient();
  const init = (offset: number) => tf.initializers.glorotUniform({ seed: seed + offset });
  const model = tf.sequential({ name: 'melspec_cnn' });
  model.add(
    tf.layers.conv2d({
      name: 'conv1',
      filters: 32,
      kernelSize: 3,
      padding: 'same',
      activation: 'relu',
      inputShape: [INPUT_SIZE, INPUT_SIZE, 3],
      kernelInitializer: init(1),
    }),
  );
  model.add(
    tf.layers.conv2d({
      name: 'conv2',
      filters: 64,
      kernelSize: 3,
      padding: 'same',
      activation: 'relu',
      kernelInitializer: init(2),
    }),
  );
  model.add(tf.layers.maxPooling2d({ name: 'pool', poolSize: 2 }));
  model.add(new SteppedDropout(0.25, seed + 1000, 'drop1'));
  model.add(tf.layers.flatten({ name: 'flatten' }));
  model.add(
    tf.layers.dense({ name: 'dense1', units: 128, activation: 'relu', kernelInitializer: init(3) }),
  );
  model.add(new SteppedDropout(0.5, seed + 2000, 'drop2'));
  model.add(
    tf.layers.dense({
      name: 'output',
      units: nClasses,
      activation: 'softmax',
      kernelInitializer: init(4),
    }),
  );
  return model;
}

export function layerSummary(model: tf.LayersModel): Array<{ name: string; type: string; params: number }> {
  return model.layers.map((layer) => ({
    name: layer.name,
    type: layer.getClassName(),
    params: layer.countParams(),
  }));
}
