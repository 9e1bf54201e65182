import { describe, expect, it, vi } from "vitest";

import { renderAnswer, renderErrorBubble, renderPendingBubble, renderUserBubble } from "../src/render.js";
import { samplePayload } from "./fakes.js";

describe("renderAnswer", () => {
  it("renders one headed block per section", () => {
    const bubble = renderAnswer(document, samplePayload());

    const blocks = bubble.querySelectorAll(".answer-section");
    expect(blocks).toHaveLength(2);
    const headings = [...bubble.querySelectorAll(".answer-section__heading")].map(
      (h) => h.textContent,
    );
    expect(headings).toEqual(["My flight was cancelled", "they lost my bag"]);
    expect(bubble.querySelectorAll(".passage")).toHaveLength(4);
  });

  it("shows the resolved query text above the sections", () => {
    const bubble = renderAnswer(document, samplePayload());
    expect(bubble.querySelector(".answer__query")?.textContent).toBe(
      "My flight was cancelled and they lost my bag.",
    );
  });

  it("renders passage text verbatim", () => {
    const payload = samplePayload();
    const bubble = renderAnswer(document, payload);

    const texts = [...bubble.querySelectorAll(".passage__text")].map((p) => p.textContent);
    const expected = payload.sections.flatMap((s) => s.passages.map((p) => p.text));
    expect(texts).toEqual(expected);
  });

  it("carries provenance on every card: title, score badge, breadcrumb, link", () => {
    const bubble = renderAnswer(document, samplePayload());
    const first = bubble.querySelector(".passage") as HTMLElement;

    expect(first.dataset.chunkId).toBe("c-cancel-1");
    expect(first.querySelector(".passage__title")?.textContent).toBe(
      "Flight Cancellation General Principles",
    );
    expect(first.querySelector(".passage__score")?.textContent).toBe("0.8944");
    expect(first.querySelector(".passage__path")?.textContent).toBe(
      "Flight Cancellation General Principles › A common complaint",
    );

    const links = [...bubble.querySelectorAll("a.passage__link")] as HTMLAnchorElement[];
    expect(links).toHaveLength(4);
    expect(links[0].getAttribute("href")).toBe(
      "https://apr.example/rights/cancellation-principles",
    );
    for (const link of links) {
      expect(link.target).toBe("_blank");
      expect(link.rel).toContain("noopener");
    }
  });

  it("pads score badges to four decimals", () => {
    const payload = samplePayload();
    payload.sections[0].passages[0].score = 0.9;
    const bubble = renderAnswer(document, payload);
    expect(bubble.querySelector(".passage__score")?.textContent).toBe("0.9000");
  });

  it("renders markup inside passage text as literal characters", () => {
    const payload = samplePayload();
    const hostile = '<img src=x onerror="alert(1)"> & <script>steal()</script>';
    payload.sections[0].passages[0].text = hostile;

    const bubble = renderAnswer(document, payload);
    const text = bubble.querySelector(".passage__text") as HTMLElement;

    expect(text.textContent).toBe(hostile);
    expect(text.childElementCount).toBe(0);
    expect(text.innerHTML).toContain("&lt;img");
    expect(bubble.querySelector("img")).toBeNull();
    expect(bubble.querySelector("script")).toBeNull();
  });

  it("escapes markup in headings and titles too", () => {
    const payload = samplePayload();
    payload.standalone_query = "<b>query</b>";
    payload.sections[0].sub_query = "<i>sub</i>";
    payload.sections[0].passages[0].doc_title = "<u>title</u>";

    const bubble = renderAnswer(document, payload);
    expect(bubble.querySelector(".answer__query")?.childElementCount).toBe(0);
    expect(bubble.querySelector(".answer-section__heading")?.childElementCount).toBe(0);
    expect(bubble.querySelector(".passage__title")?.childElementCount).toBe(0);
    expect(bubble.querySelector("b, i, u")).toBeNull();
  });

  it("renders the server notice and zero cards for a no-results payload", () => {
    const bubble = renderAnswer(document, {
      standalone_query: "Do you cover train strikes?",
      no_results: true,
      no_results_message: "Sorry, nothing in the knowledge base matches.",
      sections: [],
    });

    expect(bubble.querySelector(".answer__empty")?.textContent).toBe(
      "Sorry, nothing in the knowledge base matches.",
    );
    expect(bubble.querySelectorAll(".passage")).toHaveLength(0);
    expect(bubble.querySelectorAll(".answer-section")).toHaveLength(0);
  });

  it("keeps sections collapsible but open by default", () => {
    const bubble = renderAnswer(document, samplePayload());
    const blocks = [...bubble.querySelectorAll("details.answer-section")] as HTMLDetailsElement[];
    expect(blocks).toHaveLength(2);
    for (const block of blocks) {
      expect(block.open).toBe(true);
      expect(block.querySelector("summary")).not.toBeNull();
    }
  });
});

describe("other bubbles", () => {
  it("renders the user's text verbatim and escaped", () => {
    const bubble = renderUserBubble(document, "<hi> & bye");
    expect(bubble.textContent).toBe("<hi> & bye");
    expect(bubble.childElementCount).toBe(0);
    expect(bubble.className).toContain("bubble--user");
  });

  it("marks the pending bubble", () => {
    const bubble = renderPendingBubble(document);
    expect(bubble.className).toContain("bubble--pending");
    expect(bubble.textContent?.length).toBeGreaterThan(0);
  });

  it("wires the retry button", () => {
    const retry = vi.fn();
    const bubble = renderErrorBubble(document, "gateway timed out", retry);

    expect(bubble.textContent).toContain("gateway timed out");
    (bubble.querySelector("button.bubble__retry") as HTMLButtonElement).click();
    expect(retry).toHaveBeenCalledTimes(1);
  });

  it("omits the retry button when no handler is given", () => {
    const bubble = renderErrorBubble(document, "fatal");
    expect(bubble.querySelector("button")).toBeNull();
  });
});
