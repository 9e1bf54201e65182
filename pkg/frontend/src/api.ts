/** Typed client for the chat service HTTP API.
 *
 * The wire schema is frozen on the server side; this module mirrors it and
 * guards incoming payloads so a malformed response surfaces as an error
 * bubble instead of a half-rendered message. The fetch implementation is
 * injectable for tests; only `ok`, `status` and `json()` are required of
 * the response.
 */

export interface Passage {
  chunk_id: string;
  text: string;
  score: number;
  doc_title: string;
  doc_url: string;
  header_path: string[];
}

export interface Section {
  sub_query: string;
  passages: Passage[];
}

export interface AnswerPayload {
  standalone_query: string;
  no_results: boolean;
  no_results_message: string | null;
  sections: Section[];
}

export interface Chunk {
  chunk_id: string;
  doc_url: string;
  doc_title: string;
  header_path: string[];
  text: string;
  kind: string;
}

export interface Health {
  status: string;
  kb_chunks: number;
  provider_names: string[];
}

export interface ResponseLike {
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<ResponseLike>;

/** Request failure carrying the server's machine-readable error code.
 *
 * Transport-level failures use status 0 with code "network_error"; responses
 * that are not valid JSON or don't match the schema use "bad_payload".
 */
export class ApiError extends Error {
  readonly status: number;
  readonly code: string;

  constructor(status: number, code: string, message: string) {
    super(message);
    this.name = "ApiError";
    this.status = status;
    this.code = code;
  }
}

export class ApiClient {
  private readonly baseUrl: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl = "", fetchFn?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.fetchFn = fetchFn ?? ((url, init) => fetch(url, init));
  }

  async createSession(): Promise<string> {
    const body = await this.request("POST", "/api/sessions");
    const id = (body as { session_id?: unknown }).session_id;
    if (typeof id !== "string" || id.length === 0) {
      throw new ApiError(0, "bad_payload", "session response lacks a session_id");
    }
    return id;
  }

  async chat(sessionId: string, message: string): Promise<AnswerPayload> {
    const body = await this.request("POST", "/api/chat", {
      session_id: sessionId,
      message,
    });
    if (!isAnswerPayload(body)) {
      throw new ApiError(0, "bad_payload", "answer does not match the expected schema");
    }
    return body;
  }

  async getChunk(chunkId: string): Promise<Chunk> {
    return (await this.request("GET", `/api/chunks/${chunkId}`)) as Chunk;
  }

  async health(): Promise<Health> {
    return (await this.request("GET", "/api/health")) as Health;
  }

  private async request(method: string, path: string, body?: unknown): Promise<unknown> {
    let res: ResponseLike;
    try {
      res = await this.fetchFn(this.baseUrl + path, {
        method,
        headers: body === undefined ? undefined : { "content-type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (cause) {
      throw new ApiError(0, "network_error", `cannot reach the server: ${cause}`);
    }

    let parsed: unknown = null;
    try {
      parsed = await res.json();
    } catch {
      parsed = null; // non-JSON body; fall through to the status check
    }

    if (!res.ok) {
      const envelope = (parsed as { error?: { code?: unknown; message?: unknown } } | null)?.error;
      const code = typeof envelope?.code === "string" ? envelope.code : "http_error";
      const message =
        typeof envelope?.message === "string"
          ? envelope.message
          : `request failed with status ${res.status}`;
      throw new ApiError(res.status, code, message);
    }
    if (parsed === null || typeof parsed !== "object") {
      throw new ApiError(res.status, "bad_payload", "server returned a non-JSON body");
    }
    return parsed;
  }
}

export function isAnswerPayload(value: unknown): value is AnswerPayload {
  if (typeof value !== "object" || value === null) return false;
  const v = value as Record<string, unknown>;
  if (typeof v.standalone_query !== "string") return false;
  if (typeof v.no_results !== "boolean") return false;
  if (v.no_results_message !== null && typeof v.no_results_message !== "string") return false;
  if (!Array.isArray(v.sections)) return false;
  return v.sections.every(isSection);
}

function isSection(value: unknown): boolean {
  if (typeof value !== "object" || value === null) return false;
  const s = value as Record<string, unknown>;
  if (typeof s.sub_query !== "string") return false;
  if (!Array.isArray(s.passages)) return false;
  return s.passages.every(isPassage);
}

function isPassage(value: unknown): boolean {
  if (typeof value !== "object" || value === null) return false;
  const p = value as Record<string, unknown>;
  return (
    typeof p.chunk_id === "string" &&
    typeof p.text === "string" &&
    typeof p.score === "number" &&
    typeof p.doc_title === "string" &&
    typeof p.doc_url === "string" &&
    Array.isArray(p.header_path) &&
    p.header_path.every((h) => typeof h === "string")
  );
}
