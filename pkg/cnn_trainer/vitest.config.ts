import { defineConfig } from 'vitest/config';

export default defineConfig({
  test: {
    environment: 'node',
    include: ['test/**/*.test.ts'],
    testTimeout: 1_500_000,
    hookTimeout: 600_000,
    // tfjs state (backend, patched gradients) is process-global; keep one worker
    pool: 'threads',
    poolOptions: { threads: { singleThread: true } },
  },
});
