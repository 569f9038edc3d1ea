import { describe, expect, it } from "vitest";

import type { JobDoc } from "../src/api.js";
import {
  MAX_TEXT_CHARS,
  POLL_CAP,
  audioUrlFor,
  canSubmit,
  initialState,
  jobUpdate,
  lengthWarning,
  playback,
  pollLimitReached,
  pollTimedOut,
  requestSubmit,
  setText,
  setVoice,
  submitAccepted,
  submitFailed,
  takeQueued,
  voicesLoaded,
} from "../src/state.js";

const VOICES = [
  { name: "hamza", style: "narration", base_f0: 110 },
  { name: "amina", style: "news", base_f0: 190 },
];

function job(overrides: Partial<JobDoc>): JobDoc {
  return {
    id: "j1",
    session_id: "s1",
    input_text: "مرحبا",
    voice: "hamza",
    state: "queued",
    created_at: "2026-01-01T00:00:00+00:00",
    audio_ref: null,
    timings: null,
    rtf: null,
    error: null,
    ...overrides,
  };
}

function readyState() {
  let s = voicesLoaded(initialState(), VOICES);
  s = setText(s, "مرحبا بالعالم");
  return s;
}

describe("submit gating", () => {
  it("blocks empty and whitespace text", () => {
    let s = voicesLoaded(initialState(), VOICES);
    expect(canSubmit(s)).toBe(false);
    s = setText(s, "   ");
    expect(canSubmit(s)).toBe(false);
    expect(requestSubmit(s)).toBe(s);
  });

  it("blocks until voices arrive", () => {
    const s = setText(initialState(), "مرحبا");
    expect(canSubmit(s)).toBe(false);
    expect(canSubmit(voicesLoaded(s, VOICES))).toBe(true);
  });

  it("warns on overlong text without blocking the field", () => {
    const s = setText(initialState(), "ب".repeat(MAX_TEXT_CHARS + 1));
    expect(lengthWarning(s)).toContain(String(MAX_TEXT_CHARS));
    expect(lengthWarning(setText(s, "ب".repeat(MAX_TEXT_CHARS)))).toBeNull();
  });
});

describe("audio URL construction", () => {
  it("comes only from done jobs", () => {
    expect(audioUrlFor(job({ state: "done", audio_ref: "/api/audio/j1" }))).toBe(
      "/api/audio/j1",
    );
    for (const state of ["queued", "running", "failed"] as const) {
      expect(audioUrlFor(job({ state }))).toBeNull();
    }
  });

  it("never leaks an audio_ref from a non-done job document", () => {
    // a malformed doc carrying a ref in the wrong state must not play
    const doc = job({ state: "running", audio_ref: "/api/audio/j1" });
    expect(audioUrlFor(doc)).toBeNull();
  });
});

describe("playback gating", () => {
  it("enables only in the done phase with a URL", () => {
    let s = requestSubmit(readyState());
    expect(playback(s)).toBe(false);
    s = submitAccepted(s, "j1");
    expect(playback(s)).toBe(false);
    s = jobUpdate(s, job({ state: "running" }));
    expect(playback(s)).toBe(false);
    s = jobUpdate(s, job({ state: "done", audio_ref: "/api/audio/j1" }));
    expect(playback(s)).toBe(true);
    expect(s.audioUrl).toBe("/api/audio/j1");
  });

  it("clears on failure", () => {
    let s = submitAccepted(requestSubmit(readyState()), "j1");
    s = jobUpdate(s, job({ state: "failed", error: "boom" }));
    expect(playback(s)).toBe(false);
    expect(s.phase).toBe("failed");
    expect(s.failure).toBe("boom");
  });

  it("ignores polls for abandoned jobs", () => {
    let s = submitAccepted(requestSubmit(readyState()), "j2");
    const before = s;
    s = jobUpdate(s, job({ id: "j1", state: "done", audio_ref: "/api/audio/j1" }));
    expect(s).toBe(before);
  });
});

describe("client-side queueing", () => {
  it("parks a second request while one is in flight", () => {
    let s = submitAccepted(requestSubmit(readyState()), "j1");
    s = setText(s, "نص ثان");
    s = requestSubmit(s);
    expect(s.phase).toBe("polling");
    expect(s.queued).toEqual({ text: "نص ثان", voice: "hamza" });
  });

  it("keeps only the latest parked request", () => {
    let s = submitAccepted(requestSubmit(readyState()), "j1");
    s = requestSubmit(setText(s, "أول"));
    s = requestSubmit(setText(s, "ثان"));
    expect(s.queued?.text).toBe("ثان");
  });

  it("releases the parked request once the job settles", () => {
    let s = submitAccepted(requestSubmit(readyState()), "j1");
    s = requestSubmit(setText(s, "التالي"));
    const [whileRunning, early] = takeQueued(s);
    expect(early).toBeNull();
    expect(whileRunning.queued).not.toBeNull();
    s = jobUpdate(s, job({ state: "done", audio_ref: "/api/audio/j1" }));
    const [after, pending] = takeQueued(s);
    expect(pending).toEqual({ text: "التالي", voice: "hamza" });
    expect(after.queued).toBeNull();
  });
});

describe("error mapping", () => {
  it("maps 400 to a field-level non-retryable error", () => {
    const s = submitFailed(
      requestSubmit(readyState()),
      400,
      "text must not be empty",
      "text",
    );
    expect(s.phase).toBe("error");
    expect(s.error).toEqual({
      message: "text must not be empty",
      field: "text",
      retryable: false,
    });
  });

  it("maps 503 to a retryable error with no playback", () => {
    const s = submitFailed(requestSubmit(readyState()), 503, "storage unavailable", null);
    expect(s.error?.retryable).toBe(true);
    expect(s.error?.field).toBeNull();
    expect(playback(s)).toBe(false);
  });

  it("maps network failure to a retryable error", () => {
    const s = submitFailed(requestSubmit(readyState()), null, "fetch failed", null);
    expect(s.error?.retryable).toBe(true);
  });
});

describe("poll budget", () => {
  it("gives up after the cap", () => {
    let s = submitAccepted(requestSubmit(readyState()), "j1");
    for (let i = 0; i < POLL_CAP; i += 1) {
      expect(pollLimitReached(s)).toBe(false);
      s = jobUpdate(s, job({ state: "running" }));
    }
    expect(pollLimitReached(s)).toBe(true);
    s = pollTimedOut(s);
    expect(s.phase).toBe("error");
    expect(s.error?.retryable).toBe(true);
  });
});

describe("voice selection", () => {
  it("defaults to the first fetched voice and keeps a valid choice", () => {
    let s = voicesLoaded(initialState(), VOICES);
    expect(s.voice).toBe("hamza");
    s = setVoice(s, "amina");
    s = voicesLoaded(s, VOICES);
    expect(s.voice).toBe("amina");
  });
});
