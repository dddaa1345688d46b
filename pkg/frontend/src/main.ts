import { App } from "./app";

document.addEventListener("DOMContentLoaded", () => {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app mount point");
  const flags = new URLSearchParams(window.location.search);
  const app = new App(root, { speechInput: flags.get("speech") === "1" });
  void app.start();
});
