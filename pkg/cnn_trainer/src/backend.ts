import * as tf from '@tensorflow/tfjs';
import '@tensorflow/tfjs-backend-wasm';

let ready: Promise<string> | null = null;

/** Select the wasm backend (much faster conv kernels), falling back to cpu. */
export function initBackend(): Promise<string> {
  if (!ready) {
    ready = (async () => {
      try {
        await tf.setBackend('wasm');
      } catch {
        await tf.setBackend('cpu');
      }
      await tf.ready();
      return tf.getBackend();
    })();
  }
  return ready;
}
