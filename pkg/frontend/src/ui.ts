/** Split-screen lesson UI rendered from ClientState.
 *
 * renderHtml() is a pure function of state so it can be tested without a
 * browser; mount() wires it to a live client with event delegation. The
 * left pane holds the media element and degrades to an avatar placeholder
 * when no stream is attached, so every flow works without cameras.
 */

import type { LessonClient } from "./client.js";
import type { ClientState, LessonState } from "./state.js";

function esc(text: unknown): string {
  return String(text)
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function mediaPane(lesson: LessonState): string {
  const media = lesson.view?.media ?? {};
  if (media.video) {
    return `<video class="partner-video" src="${esc(media.video)}" autoplay></video>`;
  }
  if (media.image) {
    return `<img class="partner-video" src="${esc(media.image)}" alt="slide media">`;
  }
  const partner = lesson.myRole === "teacher" ? lesson.studentId : lesson.teacherId;
  return `<div class="avatar-placeholder">${esc(partner)}</div>`;
}

function slidePane(state: ClientState, lesson: LessonState): string {
  const view = lesson.view;
  if (view === null) {
    return `<p class="waiting">Waiting for the first slide...</p>`;
  }
  const fields = Object.entries(view.visible_fields)
    .map(([name, text]) => `<p class="field field-${esc(name)}">${esc(text)}</p>`)
    .join("");
  const hint = view.hint_body
    ? `<div class="hint-body"><b>${esc(view.hint_body.transcript)}</b>` +
      `<i>${esc(view.hint_body.translation)}</i></div>`
    : "";
  const pct = Math.round(view.progress.fraction * 100);
  const controls =
    lesson.myRole === "teacher" || lesson.myRole === "controller"
      ? `<button data-action="back">Back</button><button data-action="next">Next</button>`
      : "";
  const remaining =
    state.balance !== null && lesson.myRole === "student"
      ? `<span class="countdown">${esc(lesson.studentRemaining ?? state.balance)}s left</span>`
      : "";
  return `
    <h2>Slide ${view.ordinal}</h2>
    ${fields}
    ${hint}
    <div class="progress"><div class="bar" style="width:${pct}%"></div>
      <span>${view.progress.studied} / ${view.progress.studied + view.progress.remaining}</span>
    </div>
    ${controls}
    <button data-action="hint"${view.hint_body ? " disabled" : ""}>Hint</button>
    ${remaining}`;
}

function chatPane(lesson: LessonState): string {
  const lines = lesson.chat
    .map((m) => `<li><b>${esc(m.sender_id)}:</b> ${esc(m.body)}</li>`)
    .join("");
  return `
    <ul class="chat-log">${lines}</ul>
    <form data-action="chat"><input name="body" placeholder="Say something">
      <button type="submit">Send</button></form>`;
}

function lessonScreen(state: ClientState, lesson: LessonState): string {
  return `
    <div class="lesson split">
      <section class="pane media-pane">${mediaPane(lesson)}</section>
      <section class="pane slide-pane">${slidePane(state, lesson)}</section>
      <aside class="pane chat-pane">${chatPane(lesson)}</aside>
      <button data-action="end">End lesson</button>
    </div>`;
}

function callPanel(state: ClientState): string {
  const incoming = state.incoming
    .map(
      (leg) =>
        `<li class="ringing">${esc(leg.caller_id)} wants a ${esc(leg.deck_id)} lesson ` +
        `<button data-action="accept" data-leg="${esc(leg.leg_id)}">Accept</button>` +
        `<button data-action="decline" data-leg="${esc(leg.leg_id)}">Decline</button></li>`,
    )
    .join("");
  const missed = state.missed
    .map(
      (leg) =>
        `<li class="missed">${esc(leg.caller_id)} ` +
        `<button data-action="accept" data-leg="${esc(leg.leg_id)}">Call back</button></li>`,
    )
    .join("");
  const pending = state.pending
    ? `<div class="pending-dialog">
         Lesson with ${esc(state.pending.caller_id)} and ${esc(state.pending.recipient_id)}.
         ${
           state.confirmed
             ? "<em>Waiting for your partner...</em>"
             : `<button data-action="confirm" data-pending="${esc(state.pending.pending_id)}">I am ready</button>`
         }
         <button data-action="cancel" data-target="${esc(state.pending.pending_id)}">Cancel</button>
       </div>`
    : "";
  const outgoing = state.outgoingGroup
    ? `<div class="outgoing">Calling ${state.outgoingGroup.legs
        .map((leg) => esc(leg.recipient_id))
        .join(", ")}...
       <button data-action="cancel" data-target="${esc(state.outgoingGroup.groupId)}">Hang up</button></div>`
    : "";
  return `
    <div class="call-panel">
      ${outgoing}${pending}
      <ul class="incoming">${incoming}</ul>
      <ul class="missed-list">${missed}</ul>
    </div>`;
}

function ratingDialog(state: ClientState): string {
  if (state.ratePrompt === null) return "";
  const stars = [1, 2, 3, 4, 5]
    .map(
      (n) =>
        `<button data-action="rate" data-session="${esc(state.ratePrompt)}" data-stars="${n}">${n}</button>`,
    )
    .join("");
  return `<div class="rating-dialog">How was your lesson? ${stars}</div>`;
}

export function renderHtml(state: ClientState): string {
  const notifications = state.notifications
    .slice(-3)
    .map((n) => `<p class="notice notice-${esc(n.code)}">${esc(n.message)}</p>`)
    .join("");
  const balance = state.balance !== null ? `<span class="balance">${state.balance}s</span>` : "";
  const body = state.lesson
    ? lessonScreen(state, state.lesson)
    : callPanel(state) + ratingDialog(state);
  return `
    <header><span class="me">${esc(state.userId ?? "")}</span>${balance}</header>
    <div class="notifications">${notifications}</div>
    ${body}`;
}

export function mount(root: HTMLElement, client: LessonClient): void {
  const redraw = (state: ClientState) => {
    root.innerHTML = renderHtml(state);
  };
  client.onChange(redraw);
  redraw(client.state);

  root.addEventListener("click", (event) => {
    const target = (event.target as HTMLElement).closest("[data-action]");
    if (!(target instanceof HTMLElement)) return;
    const sessionId = client.state.lesson?.sessionId;
    const action = target.dataset.action;
    const ignore = () => {
      /* errors land in state.notifications via the reducer */
    };
    if (action === "accept") client.accept(target.dataset.leg!).catch(ignore);
    else if (action === "decline") client.cancel(target.dataset.leg!).catch(ignore);
    else if (action === "confirm") client.confirmReady(target.dataset.pending!).catch(ignore);
    else if (action === "cancel") client.cancel(target.dataset.target!).catch(ignore);
    else if (action === "next" && sessionId) client.advanceSlide(sessionId, "next").catch(ignore);
    else if (action === "back" && sessionId) client.advanceSlide(sessionId, "back").catch(ignore);
    else if (action === "hint" && sessionId) client.hint(sessionId).catch(ignore);
    else if (action === "end" && sessionId) client.endLesson(sessionId).catch(ignore);
    else if (action === "rate") {
      client.rate(target.dataset.session!, Number(target.dataset.stars)).catch(ignore);
    }
  });

  root.addEventListener("submit", (event) => {
    const form = event.target as HTMLFormElement;
    if (form.dataset.action !== "chat") return;
    event.preventDefault();
    const input = form.elements.namedItem("body") as HTMLInputElement;
    const sessionId = client.state.lesson?.sessionId;
    if (sessionId && input.value.trim()) {
      client.chat(sessionId, input.value.trim()).catch(() => {});
      input.value = "";
    }
  });
}
