import { defineConfig } from "vitest/config";

export default defineConfig({
  resolve: {
    // source imports carry .js extensions for the browser; map them
    // back to the .ts files during tests
    alias: [{ find: /^(\.{1,2}\/.*)\.js$/, replacement: "$1" }],
  },
  test: {
    include: ["tests/**/*.test.ts"],
    testTimeout: 60_000,
    hookTimeout: 60_000,
  },
});
