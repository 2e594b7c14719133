import { bootstrap } from "./app.js";

const params = new URLSearchParams(window.location.search);
const apiBase = params.get("api") ?? "http://127.0.0.1:8000";
const dataset = params.get("dataset") ?? "braess";

const root = document.getElementById("app");
if (!root) throw new Error("missing #app container");

bootstrap(document, root, apiBase, dataset).catch((err) => {
  root.textContent = `failed to start: ${err instanceof Error ? err.message : err}`;
});
