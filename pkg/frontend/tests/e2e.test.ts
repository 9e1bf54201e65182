/** End-to-end checks against a live backend with stub providers.
 *
 * A real server process is booted on a local port with the frozen 30-chunk
 * knowledge base; the app under test talks to it over actual HTTP. DOM text
 * is compared against chunk text fetched from the same server, so verbatim
 * rendering is checked against what the service stores, not against copies
 * baked into this file.
 */

import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { spawn, type ChildProcessWithoutNullStreams } from "node:child_process";
import { request as httpRequest } from "node:http";
import path from "node:path";
import { fileURLToPath } from "node:url";

import { ApiClient, type FetchLike, type ResponseLike } from "../src/api.js";
import { ChatApp } from "../src/app.js";
import { MemoryStore, SessionKeeper } from "../src/session.js";

const repoRoot = path.resolve(path.dirname(fileURLToPath(import.meta.url)), "..", "..");
const port = 18100 + (process.pid % 500);
const baseUrl = `http://127.0.0.1:${port}`;

// minimal fetch over node:http; the browser build uses window.fetch instead
const wireFetch: FetchLike = (url, init) =>
  new Promise<ResponseLike>((resolve, reject) => {
    const req = httpRequest(url, { method: init?.method ?? "GET", headers: init?.headers }, (res) => {
      const parts: Buffer[] = [];
      res.on("data", (part) => parts.push(part));
      res.on("end", () => {
        const text = Buffer.concat(parts).toString("utf8");
        const status = res.statusCode ?? 0;
        resolve({
          ok: status >= 200 && status < 300,
          status,
          json: () => {
            try {
              return Promise.resolve(JSON.parse(text));
            } catch (cause) {
              return Promise.reject(cause);
            }
          },
        });
      });
    });
    req.on("error", reject);
    if (init?.body !== undefined) {
      req.write(init.body);
    }
    req.end();
  });

let server: ChildProcessWithoutNullStreams;
let serverLog = "";

async function waitForHealth(deadlineMs: number): Promise<void> {
  const api = new ApiClient(baseUrl, wireFetch);
  const limit = Date.now() + deadlineMs;
  for (;;) {
    try {
      const health = await api.health();
      if (health.status === "ok") return;
    } catch {
      // not up yet
    }
    if (server.exitCode !== null) {
      throw new Error(`server exited early (code ${server.exitCode}):\n${serverLog}`);
    }
    if (Date.now() > limit) {
      throw new Error(`server did not become healthy in time:\n${serverLog}`);
    }
    await new Promise((r) => setTimeout(r, 250));
  }
}

beforeAll(async () => {
  const env: Record<string, string> = {};
  for (const [key, value] of Object.entries(process.env)) {
    if (value !== undefined && !key.startsWith("APR_")) env[key] = value;
  }
  env.APR_USE_STUB_PROVIDERS = "1";

  server = spawn(
    "python3",
    ["-m", "aprbot.cli", "serve", "--kb", "tests/fixtures/kb_fixture.jsonl", "--bind", `127.0.0.1:${port}`],
    { cwd: repoRoot, env },
  );
  server.stdout.on("data", (d) => (serverLog += d.toString()));
  server.stderr.on("data", (d) => (serverLog += d.toString()));

  await waitForHealth(55_000);
});

afterAll(async () => {
  if (server && server.exitCode === null) {
    server.kill("SIGTERM");
    await new Promise((resolve) => server.once("exit", resolve));
  }
});

function freshApp(store = new MemoryStore()) {
  const root = document.createElement("div");
  document.body.appendChild(root);
  const app = new ChatApp({
    root,
    api: new ApiClient(baseUrl, wireFetch),
    sessions: new SessionKeeper(store),
  });
  return { app, root, store };
}

describe("against the live stub-provider server", () => {
  it("renders a 2-section answer as 2 headed blocks with passage text identical to the stored chunks", async () => {
    const { app, root } = freshApp();
    await app.init();

    await app.send(
      "My flight was cancelled and they lost my bag. What are my compensation options?",
    );

    const sections = [...root.querySelectorAll(".answer-section")];
    expect(sections).toHaveLength(2);
    const headings = sections.map((s) => s.querySelector(".answer-section__heading")?.textContent);
    expect(headings).toEqual(["My flight was cancelled", "they lost my bag"]);

    const titles = [...root.querySelectorAll(".passage__title")].map((t) => t.textContent);
    expect(titles).toContain("Compensation for flight delays and cancellations");
    expect(titles).toContain("Lost, damaged or delayed baggage");

    // every card's DOM text must equal the chunk the server stores
    const api = new ApiClient(baseUrl, wireFetch);
    const cards = [...root.querySelectorAll(".passage")] as HTMLElement[];
    expect(cards.length).toBeGreaterThanOrEqual(2);
    for (const card of cards) {
      const chunk = await api.getChunk(card.dataset.chunkId as string);
      expect(card.querySelector(".passage__text")?.textContent).toBe(chunk.text);
      expect(card.querySelector("a.passage__link")?.getAttribute("href")).toBe(chunk.doc_url);
    }
  });

  it("renders markup characters from server text as literals, not elements", async () => {
    const api = new ApiClient(baseUrl, wireFetch);
    const hostileChunk = await api.getChunk("100238bf18b6f50a");
    expect(hostileChunk.text).toContain("<PNR>"); // the fixture carries real markup characters

    // a single-clause shuffle of the chunk's own words retrieves it verbatim
    const probe = (hostileChunk.text.match(/[A-Za-z0-9]+/g) as string[])
      .filter((token) => token.toLowerCase() !== "and")
      .join(" ");

    const { app, root } = freshApp();
    await app.init();
    await app.send(probe);

    const card = root.querySelector(`.passage[data-chunk-id="100238bf18b6f50a"]`);
    expect(card).not.toBeNull();
    const text = card?.querySelector(".passage__text") as HTMLElement;
    expect(text.textContent).toBe(hostileChunk.text);
    expect(text.textContent).toContain("<PNR>");
    expect(text.childElementCount).toBe(0);
    expect(text.innerHTML).toContain("&lt;PNR&gt;");
  });

  it("a follow-up after a page reload keeps the session and its history", async () => {
    const store = new MemoryStore();

    const first = freshApp(store);
    await first.app.init();
    await first.app.send("The airline lost my bag.");
    const sessionId = store.getItem("apr.session_id");
    expect(sessionId).not.toBeNull();
    first.root.remove();

    // a reload constructs a fresh app over the same persisted storage
    let sessionPosts = 0;
    const countingFetch: FetchLike = (url, init) => {
      if (url.endsWith("/api/sessions")) sessionPosts += 1;
      return wireFetch(url, init);
    };
    const root = document.createElement("div");
    document.body.appendChild(root);
    const reloaded = new ChatApp({
      root,
      api: new ApiClient(baseUrl, countingFetch),
      sessions: new SessionKeeper(store),
    });
    await reloaded.init();
    expect(sessionPosts).toBe(0); // reused, not recreated
    expect(store.getItem("apr.session_id")).toBe(sessionId);

    await reloaded.send("What can I claim for it?");

    // "it" resolves against history from before the reload
    const answers = [...root.querySelectorAll(".answer")];
    expect(answers).toHaveLength(1);
    expect(answers[0].querySelector(".answer__query")?.textContent).toBe(
      "What can I claim for the bag?",
    );
  });

  it("renders the server's notice when nothing matches", async () => {
    const { app, root } = freshApp();
    await app.init();

    await app.send("zxqv wumble frangle");

    const empty = root.querySelector(".answer__empty");
    expect(empty).not.toBeNull();
    expect(empty?.textContent ?? "").toContain("could not find");
    expect(root.querySelectorAll(".passage")).toHaveLength(0);
  });
});
