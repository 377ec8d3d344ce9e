import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    globals: true,
    environment: "jsdom",
    include: ["tests/**/*.test.ts", "e2e/**/*.test.ts"],
    testTimeout: 120_000,
    hookTimeout: 60_000,
    // the e2e playthrough owns a spawned server; keep files sequential
    fileParallelism: false,
  },
});
