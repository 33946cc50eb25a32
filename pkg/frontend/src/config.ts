/** Single client setting: where the exploration service lives. */

declare global {
  interface Window {
    SERVER_URL?: string;
  }
}

const DEFAULT_SERVER_URL = "http://127.0.0.1:8787";

/** Resolve SERVER_URL from ?server=, window.SERVER_URL, or the default. */
export function serverUrl(): string {
  if (typeof window !== "undefined") {
    const fromQuery = new URLSearchParams(window.location?.search ?? "").get("server");
    if (fromQuery) return fromQuery.replace(/\/+$/, "");
    if (window.SERVER_URL) return window.SERVER_URL.replace(/\/+$/, "");
  }
  return DEFAULT_SERVER_URL;
}

export function wsUrl(serverBase: string, path: string): string {
  return serverBase.replace(/^http/, "ws") + path;
}
