/** End-to-end lesson against the real server process.
 *
 * Two headless clients register over TCP, call, confirm, run the whole
 * five-slide deck with one hint and two chat messages, end, and rate.
 * Final balances and rating means are asserted exactly.
 */

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { LessonClient } from "../src/client.js";
import { connectTcp } from "../src/transport.js";

const HERE = new URL(".", import.meta.url).pathname;
const CONTENT_DIR = join(HERE, "..", "..", "content");
const SIGNUP_GRANT = 1800;

let server: ChildProcess;
let dataDir: string;
let port: number;

async function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const probe = createServer();
    probe.once("error", reject);
    probe.listen(0, "127.0.0.1", () => {
      const address = probe.address();
      if (address === null || typeof address === "string") {
        reject(new Error("no port assigned"));
        return;
      }
      probe.close(() => resolve(address.port));
    });
  });
}

async function connectWithRetry(attempts = 50): Promise<LessonClient> {
  for (let i = 0; i < attempts; i++) {
    try {
      return new LessonClient(await connectTcp("127.0.0.1", port));
    } catch {
      await new Promise((r) => setTimeout(r, 200));
    }
  }
  throw new Error(`server did not come up on port ${port}`);
}

beforeAll(async () => {
  port = await freePort();
  dataDir = mkdtempSync(join(tmpdir(), "peertutor-e2e-"));
  server = spawn(
    "python3",
    [
      "-m",
      "peertutor.server",
      "--listen",
      `127.0.0.1:${port}`,
      "--content-dir",
      CONTENT_DIR,
      "--data-dir",
      dataDir,
    ],
    { stdio: ["ignore", "inherit", "inherit"] },
  );
}, 30_000);

afterAll(() => {
  server?.kill();
  if (dataDir) rmSync(dataDir, { recursive: true, force: true });
});

describe("two-client lesson", () => {
  it("runs a full five-slide lesson and settles exactly", async () => {
    const teacher = await connectWithRetry();
    const student = await connectWithRetry();

    // register: the deck teaches en, so the en native will be the teacher
    const teacherAuth = await teacher.auth("elena", "tok-e", {
      native: "en",
      name: "Elena",
    });
    const studentAuth = await student.auth("ruslan", "tok-r", {
      native: "ru",
      name: "Ruslan",
    });
    expect(teacherAuth.balance).toBe(SIGNUP_GRANT);
    expect(studentAuth.balance).toBe(SIGNUP_GRANT);

    await teacher.setPresence("available");
    await student.setPresence("available");

    const found = await student.search("en");
    expect(found.results.map((r: any) => r.user_id)).toContain("elena");

    // call -> accept -> two-sided confirm
    const ringing = teacher.waitForPush((e) => e.type === "call_incoming");
    await student.multicall(["elena"], "greetings-a1");
    const leg = (await ringing).payload as Record<string, any>;
    expect(leg.caller_id).toBe("ruslan");

    const accepted = await teacher.accept(leg.leg_id);
    const teacherStarted = teacher.waitForPush((e) => e.type === "session_started");
    const studentStarted = student.waitForPush((e) => e.type === "session_started");
    await teacher.confirmReady(accepted.pending_id);
    const confirmed = await student.confirmReady(accepted.pending_id);
    expect(confirmed.status).toBe("session_started");
    await Promise.all([teacherStarted, studentStarted]);

    const sessionId = confirmed.session_id as string;
    expect(teacher.state.lesson?.myRole).toBe("teacher");
    expect(student.state.lesson?.myRole).toBe("student");

    // the teacher walks all five slides; projections follow on both sides
    for (let slide = 1; slide <= 5; slide++) {
      const seen = student.waitForPush(
        (e) => e.type === "slide_update" && (e.payload as any).cursor === slide,
      );
      await teacher.advanceSlide(sessionId, "next");
      await seen;
      expect(student.state.lesson?.view?.ordinal).toBe(slide);
    }
    expect(student.state.lesson?.view?.progress.fraction).toBe(1);

    // one hint: the student sees transcript + translation in their language
    const hinted = await student.hint(sessionId);
    expect(hinted.view.hint_body.transcript).toBeTruthy();
    expect(hinted.view.hint_body.translation).toBeTruthy();
    expect(student.state.lesson?.hintActive).toBe(true);

    // two chat messages, one each way, visible to both without duplicates
    const teacherHears = teacher.waitForPush(
      (e) => e.type === "chat_msg" && (e.payload as any).sender_id === "ruslan",
    );
    await student.chat(sessionId, "spasibo!");
    await teacherHears;
    const studentHears = student.waitForPush(
      (e) => e.type === "chat_msg" && (e.payload as any).sender_id === "elena",
    );
    await teacher.chat(sessionId, "you are welcome");
    await studentHears;
    expect(teacher.state.lesson?.chat.map((m) => m.body)).toEqual([
      "spasibo!",
      "you are welcome",
    ]);
    expect(student.state.lesson?.chat).toHaveLength(2);

    // let the metered clock run: the countdown must tick down for the student
    await student.waitForPush(
      (e) => e.type === "tick" && (e.payload as any).tick_count >= 2,
      15_000,
    );
    const remaining = student.state.lesson?.studentRemaining ?? NaN;
    expect(remaining).toBe(SIGNUP_GRANT - (student.state.lesson?.tickCount ?? 0));

    // end, then check settlement to the exact second
    const studentEnded = student.waitForPush((e) => e.type === "session_ended");
    const ended = await teacher.endLesson(sessionId);
    await studentEnded;
    const summary = ended.summary as Record<string, any>;
    expect(summary.session_id).toBe(sessionId);
    expect(summary.deck_completed).toBe(true);
    expect(summary.duration_s).toBeGreaterThanOrEqual(2);

    const teacherBalance = await teacher.balance();
    const studentBalance = await student.balance();
    expect(teacherBalance.seconds).toBe(SIGNUP_GRANT + summary.duration_s);
    expect(studentBalance.seconds).toBe(SIGNUP_GRANT - summary.duration_s);

    // both rate; each reply reports the ratee's running mean
    expect(teacher.state.ratePrompt).toBe(sessionId);
    expect(student.state.ratePrompt).toBe(sessionId);
    const studentRates = await student.rate(sessionId, 5);
    expect(studentRates.ratee_id).toBe("elena");
    expect(studentRates.mean).toBe(5);
    expect(studentRates.count).toBe(1);
    const teacherRates = await teacher.rate(sessionId, 4);
    expect(teacherRates.ratee_id).toBe("ruslan");
    expect(teacherRates.mean).toBe(4);
    expect(teacherRates.count).toBe(1);

    expect(teacher.state.lesson).toBeNull();
    expect(teacher.state.lastSummary?.duration_s).toBe(summary.duration_s);

    teacher.close();
    student.close();
  }, 60_000);
});
