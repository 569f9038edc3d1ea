// Browser entry point. The bundle is served by the synthesis service
// itself, so the API lives at the same origin and the base is empty.

import { makeApi } from "./api.js";
import { init } from "./app.js";

const root = document.getElementById("root");
if (root) {
  init(root, makeApi(""));
}
