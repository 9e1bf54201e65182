/** DOM builders for chat bubbles.
 *
 * Every payload string reaches the page through textContent, never through
 * innerHTML, so markup characters inside passage text render as literal
 * characters. Passage text is never truncated.
 */

import type { AnswerPayload, Passage, Section } from "./api.js";

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  node.className = className;
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

export function renderUserBubble(doc: Document, text: string): HTMLElement {
  return el(doc, "div", "bubble bubble--user", text);
}

export function renderPendingBubble(doc: Document): HTMLElement {
  return el(doc, "div", "bubble bubble--bot bubble--pending", "Searching the knowledge base…");
}

export function renderErrorBubble(
  doc: Document,
  message: string,
  onRetry?: () => void,
): HTMLElement {
  const bubble = el(doc, "div", "bubble bubble--bot bubble--error");
  bubble.appendChild(el(doc, "p", "bubble__error-text", message));
  if (onRetry) {
    const button = el(doc, "button", "bubble__retry", "Retry");
    button.type = "button";
    button.addEventListener("click", onRetry);
    bubble.appendChild(button);
  }
  return bubble;
}

/** Render a server answer: the resolved query text, then one collapsible
 * block per section with the sub-query as heading. A no-results payload
 * renders the server-provided notice and zero passage cards.
 */
export function renderAnswer(doc: Document, payload: AnswerPayload): HTMLElement {
  const bubble = el(doc, "div", "bubble bubble--bot answer");
  bubble.appendChild(el(doc, "p", "answer__query", payload.standalone_query));
  if (payload.no_results) {
    bubble.appendChild(el(doc, "p", "answer__empty", payload.no_results_message ?? ""));
    return bubble;
  }
  for (const section of payload.sections) {
    bubble.appendChild(renderSection(doc, section));
  }
  return bubble;
}

function renderSection(doc: Document, section: Section): HTMLElement {
  const block = doc.createElement("details");
  block.className = "answer-section";
  block.open = true;
  block.appendChild(el(doc, "summary", "answer-section__heading", section.sub_query));
  for (const passage of section.passages) {
    block.appendChild(renderPassage(doc, passage));
  }
  return block;
}

function renderPassage(doc: Document, passage: Passage): HTMLElement {
  const card = el(doc, "article", "passage");
  card.dataset.chunkId = passage.chunk_id;

  const head = el(doc, "header", "passage__head");
  head.appendChild(el(doc, "span", "passage__title", passage.doc_title));
  head.appendChild(el(doc, "span", "passage__score", passage.score.toFixed(4)));
  card.appendChild(head);

  card.appendChild(el(doc, "p", "passage__path", passage.header_path.join(" › ")));
  card.appendChild(el(doc, "p", "passage__text", passage.text));

  const link = el(doc, "a", "passage__link", "Open source document");
  link.href = passage.doc_url;
  link.target = "_blank";
  link.rel = "noopener noreferrer";
  card.appendChild(link);

  return card;
}
