// Page entry point: load the static config, then boot the console.

import { initApp } from "./app.js";
import { loadConfig } from "./config.js";

loadConfig().then(
  (config) => initApp(document, config),
  (err) => {
    const msg = document.createElement("p");
    msg.setAttribute("class", "inline-error");
    msg.textContent = `configuration error: ${err instanceof Error ? err.message : err}`;
    document.body.append(msg);
  },
);
