import { describe, expect, it } from "vitest";

import type { Envelope } from "../src/protocol.js";
import { initialState, reduce, type ClientState } from "../src/state.js";
import { renderHtml } from "../src/ui.js";

function fold(envelopes: Envelope[]): ClientState {
  return envelopes.reduce(reduce, initialState());
}

const start = (role: string): Envelope => ({
  type: "session_started",
  payload: {
    session_id: "session-1",
    deck_id: "greetings-a1",
    teacher_id: "tina",
    student_id: "sam",
    your_role: role,
  },
});

const slide = (hint: boolean): Envelope => ({
  type: hint ? "hint_update" : "slide_update",
  payload: {
    session_id: "session-1",
    hint_active: hint,
    view: {
      role: "student",
      ordinal: 1,
      visible_fields: { student_prompt: "Listen and repeat" },
      media: {},
      hint_available: true,
      hint_body: hint ? { transcript: "Hello!", translation: "Привет!" } : null,
      progress: { fraction: 0.2, studied: 1, remaining: 4 },
    },
  },
});

describe("lesson screen", () => {
  it("shows the avatar placeholder when no media is attached", () => {
    const html = renderHtml(fold([start("student"), slide(false)]));
    expect(html).toContain("avatar-placeholder");
    expect(html).toContain("tina");
  });

  it("students get hint and chat but no slide controls", () => {
    const html = renderHtml(fold([start("student"), slide(false)]));
    expect(html).toContain('data-action="hint"');
    expect(html).toContain('data-action="chat"');
    expect(html).not.toContain('data-action="next"');
  });

  it("teachers get next and back controls", () => {
    const html = renderHtml(fold([start("teacher"), slide(false)]));
    expect(html).toContain('data-action="next"');
    expect(html).toContain('data-action="back"');
  });

  it("an active hint renders transcript and translation", () => {
    const html = renderHtml(fold([start("student"), slide(true)]));
    expect(html).toContain("Hello!");
    expect(html).toContain("Привет!");
  });

  it("the progress bar reflects the deck fraction", () => {
    const html = renderHtml(fold([start("student"), slide(false)]));
    expect(html).toContain("width:20%");
    expect(html).toContain("1 / 5");
  });

  it("chat bodies are escaped before hitting the DOM", () => {
    const html = renderHtml(
      fold([
        start("student"),
        {
          type: "chat_msg",
          payload: {
            session_id: "session-1",
            sender_id: "tina",
            body: "<script>alert(1)</script>",
            at: 3,
          },
        },
      ]),
    );
    expect(html).not.toContain("<script>alert(1)</script>");
    expect(html).toContain("&lt;script&gt;");
  });
});

describe("call panel and rating", () => {
  it("a ringing row appears per call_incoming push", () => {
    const html = renderHtml(
      fold([
        {
          type: "call_incoming",
          payload: {
            leg_id: "leg-1",
            group_id: "group-1",
            caller_id: "boris",
            recipient_id: "me",
            deck_id: "greetings-a1",
            state: "ringing",
          },
        },
      ]),
    );
    expect(html).toContain("boris");
    expect(html).toContain('data-action="accept"');
  });

  it("rate_prompt renders the five-star dialog", () => {
    const html = renderHtml(
      fold([{ type: "rate_prompt", payload: { session_id: "session-1" } }]),
    );
    expect(html).toContain("rating-dialog");
    expect(html).toContain('data-stars="5"');
  });

  it("server errors show verbatim in the notification area", () => {
    const html = renderHtml(
      fold([{ type: "error", payload: { code: "busy", message: "ana is pending" } }]),
    );
    expect(html).toContain("ana is pending");
  });
});
