/** Wire protocol: one JSON envelope per line over a persistent channel.
 *
 * Requests carry a strictly increasing `seq`; replies are `<type>_ok` or
 * `error` and echo the request's seq as `in_reply_to`. Anything else the
 * server sends on its own is a push.
 */

export interface Envelope {
  type: string;
  seq?: number;
  in_reply_to?: number;
  payload: Record<string, unknown>;
}

export interface ErrorPayload {
  code: string;
  message: string;
}

// -------------------- payload shapes we project --------------------

export interface LegInfo {
  leg_id: string;
  group_id: string;
  caller_id: string;
  recipient_id: string;
  deck_id: string;
  state: string;
}

export interface PendingInfo {
  pending_id: string;
  caller_id: string;
  recipient_id: string;
  deck_id: string;
  deadline: number;
}

export interface Progress {
  fraction: number;
  studied: number;
  remaining: number;
}

export interface RoleView {
  role: "teacher" | "student" | "controller";
  ordinal: number;
  visible_fields: Record<string, string>;
  media: Record<string, string>;
  hint_available: boolean;
  hint_body: { transcript: string; translation: string } | null;
  progress: Progress;
}

export interface SessionSummary {
  session_id: string;
  teacher_id: string;
  student_id: string;
  deck_id: string;
  duration_s: number;
  slides_completed: number;
  deck_completed: boolean;
  words_learned: number;
  ended_by: string;
  ended_at: number;
}

export interface ChatMsg {
  session_id: string;
  sender_id: string;
  body: string;
  at: number;
}

// -------------------- framing --------------------

export function encodeEnvelope(envelope: Envelope): string {
  return JSON.stringify(envelope) + "\n";
}

export function decodeEnvelope(line: string): Envelope {
  const parsed: unknown = JSON.parse(line);
  if (parsed === null || typeof parsed !== "object" || Array.isArray(parsed)) {
    throw new Error("envelope must be an object");
  }
  const env = parsed as Envelope;
  if (typeof env.type !== "string") {
    throw new Error("envelope missing string 'type'");
  }
  if (env.payload === undefined) env.payload = {};
  return env;
}

/** Reassembles newline-delimited frames from arbitrary chunk boundaries. */
export class LineBuffer {
  private tail = "";

  push(chunk: string): string[] {
    this.tail += chunk;
    const parts = this.tail.split("\n");
    this.tail = parts.pop() ?? "";
    return parts.filter((line) => line.length > 0);
  }
}
