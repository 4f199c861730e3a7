/** Headless lesson client: request/reply correlation plus state projection.
 *
 * Every server line flows through one handler: replies settle the promise
 * waiting on their `in_reply_to`, and everything (replies and pushes) is
 * folded into ClientState via the pure reducer. UI layers subscribe to
 * state changes; tests read the state directly.
 */

import { decodeEnvelope, encodeEnvelope, type Envelope } from "./protocol.js";
import { initialState, reduce, type ClientState } from "./state.js";
import type { Transport } from "./transport.js";

export class ServerError extends Error {
  constructor(
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

export interface RegisterProfile {
  native: string;
  name?: string;
  country?: string;
  gender?: string;
  age?: number;
  level?: string;
}

interface PendingRequest {
  resolve: (payload: Record<string, any>) => void;
  reject: (err: Error) => void;
}

export class LessonClient {
  state: ClientState = initialState();
  private seq = 0;
  private inflight = new Map<number, PendingRequest>();
  private listeners: Array<(state: ClientState) => void> = [];
  private pushWaiters: Array<{
    match: (env: Envelope) => boolean;
    resolve: (env: Envelope) => void;
  }> = [];

  constructor(private transport: Transport) {
    transport.onLine((line) => this.onLine(line));
    transport.onClose(() => {
      const gone = new ServerError("connection_closed", "connection closed");
      for (const pending of this.inflight.values()) pending.reject(gone);
      this.inflight.clear();
    });
  }

  onChange(listener: (state: ClientState) => void): void {
    this.listeners.push(listener);
  }

  close(): void {
    this.transport.close();
  }

  private onLine(line: string): void {
    const envelope = decodeEnvelope(line);
    this.state = reduce(this.state, envelope);
    const replyTo = envelope.in_reply_to;
    if (typeof replyTo === "number" && this.inflight.has(replyTo)) {
      const pending = this.inflight.get(replyTo)!;
      this.inflight.delete(replyTo);
      if (envelope.type === "error") {
        const p = envelope.payload as Record<string, any>;
        pending.reject(new ServerError(String(p.code), String(p.message)));
      } else {
        pending.resolve(envelope.payload as Record<string, any>);
      }
    } else if (typeof replyTo !== "number") {
      this.pushWaiters = this.pushWaiters.filter((waiter) => {
        if (!waiter.match(envelope)) return true;
        waiter.resolve(envelope);
        return false;
      });
    }
    for (const listener of this.listeners) listener(this.state);
  }

  /** Resolves with the next push matching `match` (e.g. await a tick). */
  waitForPush(match: (env: Envelope) => boolean, timeoutMs = 10_000): Promise<Envelope> {
    return new Promise((resolve, reject) => {
      const timer = setTimeout(
        () => reject(new ServerError("timeout", "no matching push")),
        timeoutMs,
      );
      this.pushWaiters.push({
        match,
        resolve: (env) => {
          clearTimeout(timer);
          resolve(env);
        },
      });
    });
  }

  request(type: string, payload: Record<string, unknown> = {}): Promise<Record<string, any>> {
    const seq = ++this.seq;
    return new Promise((resolve, reject) => {
      this.inflight.set(seq, { resolve, reject });
      this.transport.send(encodeEnvelope({ type, seq, payload }));
    });
  }

  // -------------------- typed conveniences --------------------

  auth(userId: string, token: string, register?: RegisterProfile, referralToken?: string) {
    const payload: Record<string, unknown> = { user_id: userId, token };
    if (register !== undefined) payload.register = register;
    if (referralToken !== undefined) payload.referral_token = referralToken;
    return this.request("auth", payload);
  }

  setPresence(status: "available" | "offline") {
    return this.request("set_presence", { status });
  }

  search(taughtLanguage: string, filters: Record<string, unknown> = {}) {
    return this.request("search", { taught_language: taughtLanguage, ...filters });
  }

  multicall(recipients: string[], deckId: string) {
    return this.request("multicall", { recipients, deck_id: deckId });
  }

  accept(legId: string) {
    return this.request("accept", { leg_id: legId });
  }

  confirmReady(pendingId: string) {
    return this.request("confirm_ready", { pending_id: pendingId });
  }

  cancel(targetId: string) {
    return this.request("cancel", { target_id: targetId });
  }

  advanceSlide(sessionId: string, direction: "next" | "back" = "next") {
    return this.request("advance_slide", { session_id: sessionId, direction });
  }

  hint(sessionId: string) {
    return this.request("hint", { session_id: sessionId });
  }

  chat(sessionId: string, body: string) {
    return this.request("chat", { session_id: sessionId, body });
  }

  endLesson(sessionId: string) {
    return this.request("end_lesson", { session_id: sessionId });
  }

  rate(sessionId: string, stars: number) {
    return this.request("rate", { session_id: sessionId, stars });
  }

  balance() {
    return this.request("balance");
  }

  leaderboard(month: string, limit = 10) {
    return this.request("leaderboard", { month, limit });
  }

  missedList() {
    return this.request("missed_list");
  }

  decks() {
    return this.request("decks");
  }
}
