import { defineConfig } from 'vitest/config';

export default defineConfig({
  test: {
    // pipeline tests spawn the Python toolkit and run real exports
    testTimeout: 180_000,
    hookTimeout: 60_000,
  },
});
