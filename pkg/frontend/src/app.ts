/** Chat window: input row, message thread, session lifecycle.
 *
 * One chat request is in flight at a time; the input stays disabled until
 * the current request settles, so messages render strictly in send order.
 * The session id survives page reloads via the injected key-value store;
 * a stale id (server restarted or session expired) is replaced with a
 * fresh session and the message is retried once.
 */

import { ApiClient, ApiError } from "./api.js";
import { SessionKeeper } from "./session.js";
import {
  renderAnswer,
  renderErrorBubble,
  renderPendingBubble,
  renderUserBubble,
} from "./render.js";

export interface AppOptions {
  root: HTMLElement;
  api: ApiClient;
  sessions: SessionKeeper;
}

export class ChatApp {
  readonly root: HTMLElement;
  private readonly api: ApiClient;
  private readonly sessions: SessionKeeper;
  private readonly doc: Document;

  private readonly thread: HTMLElement;
  private readonly input: HTMLInputElement;
  private readonly sendButton: HTMLButtonElement;
  private readonly resetButton: HTMLButtonElement;

  private sessionId: string | null = null;
  private inFlight = false;

  constructor(options: AppOptions) {
    this.root = options.root;
    this.api = options.api;
    this.sessions = options.sessions;
    this.doc = this.root.ownerDocument;

    this.root.innerHTML = "";
    this.root.classList.add("chat");

    const bar = this.doc.createElement("header");
    bar.className = "chat__bar";
    const title = this.doc.createElement("h1");
    title.className = "chat__title";
    title.textContent = "Air passenger rights assistant";
    this.resetButton = this.doc.createElement("button");
    this.resetButton.type = "button";
    this.resetButton.className = "chat__reset";
    this.resetButton.textContent = "New conversation";
    this.resetButton.addEventListener("click", () => {
      void this.resetConversation();
    });
    bar.appendChild(title);
    bar.appendChild(this.resetButton);

    this.thread = this.doc.createElement("main");
    this.thread.className = "chat__thread";

    const inputRow = this.doc.createElement("form");
    inputRow.className = "chat__input-row";
    inputRow.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.send(this.input.value);
    });
    this.input = this.doc.createElement("input");
    this.input.className = "chat__input";
    this.input.placeholder = "Describe your concern, e.g. a cancelled flight or lost baggage";
    this.input.addEventListener("input", () => this.syncControls());
    this.sendButton = this.doc.createElement("button");
    this.sendButton.type = "submit";
    this.sendButton.className = "chat__send";
    this.sendButton.textContent = "Send";
    this.sendButton.disabled = true;
    inputRow.appendChild(this.input);
    inputRow.appendChild(this.sendButton);

    this.root.appendChild(bar);
    this.root.appendChild(this.thread);
    this.root.appendChild(inputRow);
  }

  /** Reuse the stored session if one exists, otherwise create one. */
  async init(): Promise<void> {
    this.sessionId = this.sessions.current();
    if (this.sessionId === null) {
      this.sessionId = await this.api.createSession();
      this.sessions.remember(this.sessionId);
    }
  }

  get pending(): boolean {
    return this.inFlight;
  }

  async send(text: string): Promise<void> {
    const message = text.trim();
    if (message.length === 0 || this.inFlight || this.sessionId === null) {
      return;
    }

    this.inFlight = true;
    this.input.value = "";
    this.syncControls();

    this.thread.appendChild(renderUserBubble(this.doc, message));
    const placeholder = renderPendingBubble(this.doc);
    this.thread.appendChild(placeholder);

    try {
      const payload = await this.chatWithRecovery(message);
      this.thread.replaceChild(renderAnswer(this.doc, payload), placeholder);
    } catch (error) {
      const reason =
        error instanceof ApiError ? error.message : `unexpected failure: ${error}`;
      const bubble = renderErrorBubble(this.doc, reason, () => {
        bubble.remove();
        void this.send(message);
      });
      this.thread.replaceChild(bubble, placeholder);
    } finally {
      this.inFlight = false;
      this.syncControls();
    }
  }

  /** Drop the stored session and start an empty thread. */
  async resetConversation(): Promise<void> {
    if (this.inFlight) {
      return;
    }
    this.sessions.forget();
    this.sessionId = null;
    this.thread.innerHTML = "";
    await this.init();
  }

  // a stored id can outlive the server's session; recover once with a new one
  private async chatWithRecovery(message: string) {
    try {
      return await this.api.chat(this.sessionId as string, message);
    } catch (error) {
      if (error instanceof ApiError && error.code === "unknown_session") {
        this.sessionId = await this.api.createSession();
        this.sessions.remember(this.sessionId);
        return await this.api.chat(this.sessionId, message);
      }
      throw error;
    }
  }

  private syncControls(): void {
    this.input.disabled = this.inFlight;
    this.resetButton.disabled = this.inFlight;
    this.sendButton.disabled = this.inFlight || this.input.value.trim().length === 0;
  }
}
