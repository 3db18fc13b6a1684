// Entry point: resolve the API base URL, build the app, load datasets.
// Base URL precedence: ?api= query parameter, then a global set by the
// hosting page, then same-origin port 8080.

import { ApiClient } from "./api.js";
import { buildApp } from "./panels.js";
import { AppStore } from "./store.js";

declare global {
  interface Window {
    CURVEQUERY_BASE_URL?: string;
  }
}

export function resolveBaseUrl(win: Window): string {
  const param = new URL(win.location.href).searchParams.get("api");
  if (param) return param;
  if (win.CURVEQUERY_BASE_URL) return win.CURVEQUERY_BASE_URL;
  return `${win.location.protocol}//${win.location.hostname || "127.0.0.1"}:8080`;
}

export function boot(root: HTMLElement, baseUrl: string): { store: AppStore; api: ApiClient } {
  const api = new ApiClient(baseUrl);
  const store = new AppStore(api);
  buildApp(root, store, api);
  return { store, api };
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  const { store } = boot(document.getElementById("app")!, resolveBaseUrl(window));
  store.init().catch((err) => {
    const status = document.getElementById("status");
    if (status) status.textContent = `cannot reach API: ${err.message}`;
  });
}
