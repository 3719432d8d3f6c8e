import { defineConfig } from 'vitest/config';

export default defineConfig({
  test: {
    environment: 'node',
    // the integration suite spawns the Python service and walks a
    // whole session over real HTTP
    testTimeout: 30_000,
    hookTimeout: 30_000,
  },
});
