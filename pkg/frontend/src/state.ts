/** Client state as a pure projection of server messages.
 *
 * reduce() folds every envelope the server sent (replies and pushes alike)
 * into a new ClientState; nothing here invents state the server did not
 * announce, so a re-render after any message is always consistent.
 */

import type {
  ChatMsg,
  Envelope,
  LegInfo,
  PendingInfo,
  RoleView,
  SessionSummary,
} from "./protocol.js";

export interface LessonState {
  sessionId: string;
  deckId: string;
  teacherId: string;
  studentId: string;
  myRole: string;
  view: RoleView | null;
  hintActive: boolean;
  atBoundary: boolean;
  chat: ChatMsg[];
  tickCount: number;
  studentRemaining: number | null;
}

export interface PartnerRow {
  user_id: string;
  native: string;
  status: string;
  expert: boolean;
  [key: string]: unknown;
}

export interface LeaderboardRow {
  user_id: string;
  seconds: number;
}

export interface Notification {
  code: string;
  message: string;
}

export interface ClientState {
  userId: string | null;
  presence: string;
  balance: number | null;
  partners: PartnerRow[];
  incoming: LegInfo[];
  outgoingGroup: { groupId: string; legs: LegInfo[] } | null;
  pending: PendingInfo | null;
  confirmed: boolean;
  missed: LegInfo[];
  lesson: LessonState | null;
  lastSummary: SessionSummary | null;
  ratePrompt: string | null;
  leaderboard: { month: string; rows: LeaderboardRow[] } | null;
  notifications: Notification[];
}

export function initialState(): ClientState {
  return {
    userId: null,
    presence: "offline",
    balance: null,
    partners: [],
    incoming: [],
    outgoingGroup: null,
    pending: null,
    confirmed: false,
    missed: [],
    lesson: null,
    lastSummary: null,
    ratePrompt: null,
    leaderboard: null,
    notifications: [],
  };
}

function withoutLeg(legs: LegInfo[], legId: string): LegInfo[] {
  return legs.filter((leg) => leg.leg_id !== legId);
}

function updateLesson(state: ClientState, patch: Partial<LessonState>): ClientState {
  if (state.lesson === null) return state;
  return { ...state, lesson: { ...state.lesson, ...patch } };
}

export function reduce(state: ClientState, envelope: Envelope): ClientState {
  const p = envelope.payload as Record<string, any>;
  switch (envelope.type) {
    // -------------------- replies --------------------
    case "auth_ok":
      return { ...state, userId: p.user_id, balance: p.balance };
    case "set_presence_ok":
      return { ...state, presence: p.status };
    case "balance_ok":
      return { ...state, balance: p.seconds };
    case "search_ok":
      return { ...state, partners: p.results };
    case "missed_list_ok":
      return { ...state, missed: p.missed };
    case "leaderboard_ok":
      return { ...state, leaderboard: { month: p.month, rows: p.rows } };
    case "multicall_ok":
      return { ...state, outgoingGroup: { groupId: p.group_id, legs: p.legs } };
    case "accept_ok":
      return { ...state, pending: p as PendingInfo, confirmed: false };
    case "confirm_ready_ok":
      if (p.status === "waiting") return { ...state, confirmed: true };
      // session_started: the session push carries the details
      return { ...state, pending: null, confirmed: false };
    case "cancel_ok":
      return { ...state, pending: null, confirmed: false, outgoingGroup: null };
    case "rate_ok":
      return { ...state, ratePrompt: null };
    case "error":
      return {
        ...state,
        notifications: [...state.notifications, { code: p.code, message: p.message }],
      };

    // -------------------- call panel pushes --------------------
    case "call_incoming": {
      const leg = p as LegInfo;
      return { ...state, incoming: [...withoutLeg(state.incoming, leg.leg_id), leg] };
    }
    case "call_held":
    case "call_withdrawn":
      if (typeof p.leg_id !== "string") return state;
      return { ...state, incoming: withoutLeg(state.incoming, p.leg_id) };
    case "call_missed":
      if (typeof p.leg_id !== "string") return state;
      return {
        ...state,
        incoming: withoutLeg(state.incoming, p.leg_id),
        missed: [...withoutLeg(state.missed, p.leg_id), p as LegInfo],
      };
    case "call_declined":
      if (state.outgoingGroup === null) return state;
      return {
        ...state,
        outgoingGroup: {
          ...state.outgoingGroup,
          legs: state.outgoingGroup.legs.map((leg) =>
            leg.leg_id === p.leg_id ? { ...leg, state: "declined" } : leg,
          ),
        },
      };
    case "group_expired":
      if (state.outgoingGroup?.groupId !== p.group_id) return state;
      return { ...state, outgoingGroup: null };
    case "pending_started":
      return { ...state, pending: p as PendingInfo, confirmed: false };
    case "pending_cancelled":
      if (state.pending?.pending_id !== p.pending_id) return state;
      return { ...state, pending: null, confirmed: false };

    // -------------------- lesson pushes --------------------
    case "session_started":
      return {
        ...state,
        pending: null,
        confirmed: false,
        outgoingGroup: null,
        lesson: {
          sessionId: p.session_id,
          deckId: p.deck_id,
          teacherId: p.teacher_id,
          studentId: p.student_id,
          myRole: p.your_role,
          view: null,
          hintActive: false,
          atBoundary: false,
          chat: [],
          tickCount: 0,
          studentRemaining: null,
        },
      };
    case "slide_update":
      if (state.lesson?.sessionId !== p.session_id) return state;
      return updateLesson(state, {
        view: p.view,
        atBoundary: Boolean(p.at_boundary),
        hintActive: false,
      });
    case "hint_update":
      if (state.lesson?.sessionId !== p.session_id) return state;
      return updateLesson(state, { view: p.view, hintActive: Boolean(p.hint_active) });
    case "chat_msg": {
      if (state.lesson === null || state.lesson.sessionId !== p.session_id) return state;
      const msg = p as ChatMsg;
      // at-most-once per (sender, timestamp, body): reconnect replays safely
      const seen = state.lesson.chat.some(
        (m) => m.sender_id === msg.sender_id && m.at === msg.at && m.body === msg.body,
      );
      if (seen) return state;
      return updateLesson(state, { chat: [...state.lesson.chat, msg] });
    }
    case "tick":
      if (state.lesson?.sessionId !== p.session_id) return state;
      return updateLesson(state, {
        tickCount: p.tick_count,
        studentRemaining: p.student_remaining,
      });
    case "session_ended": {
      const summary = p.summary as SessionSummary;
      if (state.lesson !== null && state.lesson.sessionId !== summary.session_id) {
        return state;
      }
      return { ...state, lesson: null, lastSummary: summary };
    }
    case "rate_prompt":
      return { ...state, ratePrompt: p.session_id };

    default:
      return state;
  }
}
