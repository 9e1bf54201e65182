// Browser entry point. The API base URL is configurable per deployment by
// setting window.APR_API_BASE before this module loads; empty means
// same-origin.

import { ApiClient } from "./api.js";
import { ChatApp } from "./app.js";
import { SessionKeeper } from "./session.js";

declare global {
  interface Window {
    APR_API_BASE?: string;
  }
}

const root = document.getElementById("apr-root");
if (root !== null) {
  const app = new ChatApp({
    root,
    api: new ApiClient(window.APR_API_BASE ?? ""),
    sessions: new SessionKeeper(window.localStorage),
  });
  app.init().catch((error) => {
    console.error("could not start a chat session", error);
  });
}
