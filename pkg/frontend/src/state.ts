// UI state machine, kept free of DOM and network so it can be tested
// as plain data in, data out. The one hard invariant: an audio URL
// exists only while the current job is done. Everything that renders
// a player or download link goes through playback() and audioUrlFor().

import type { JobDoc, VoiceInfo } from "./api.js";

// Mirrors the service's max_text_chars default; the service still
// enforces its own limit, this only warns before a doomed submit.
export const MAX_TEXT_CHARS = 2000;
export const POLL_INTERVAL_MS = 1000;
// ~2 minutes of polling before giving up; keeps a dead job from
// spinning forever.
export const POLL_CAP = 120;

export type Phase =
  | "idle"
  | "submitting"
  | "polling"
  | "done"
  | "failed"
  | "error";

export interface ErrorInfo {
  message: string;
  field: "text" | "voice" | null;
  retryable: boolean;
}

export interface HistoryItem {
  jobId: string;
  text: string;
  voice: string;
  state: string;
  audioUrl: string | null;
}

export interface PendingRequest {
  text: string;
  voice: string;
}

export interface UiState {
  text: string;
  voice: string;
  voices: VoiceInfo[];
  phase: Phase;
  jobId: string | null;
  audioUrl: string | null;
  failure: string | null;
  error: ErrorInfo | null;
  queued: PendingRequest | null;
  polls: number;
  history: HistoryItem[];
  preview: { normalized: string; diacritized: string } | null;
  previewError: string | null;
}

export function initialState(): UiState {
  return {
    text: "",
    voice: "",
    voices: [],
    phase: "idle",
    jobId: null,
    audioUrl: null,
    failure: null,
    error: null,
    queued: null,
    polls: 0,
    history: [],
    preview: null,
    previewError: null,
  };
}

// The only place an audio URL may be built from a job document.
export function audioUrlFor(job: JobDoc): string | null {
  return job.state === "done" && job.audio_ref ? job.audio_ref : null;
}

export function inFlight(state: UiState): boolean {
  return state.phase === "submitting" || state.phase === "polling";
}

export function canSubmit(state: UiState): boolean {
  return state.text.trim().length > 0 && state.voices.length > 0;
}

export function lengthWarning(state: UiState): string | null {
  if (state.text.length > MAX_TEXT_CHARS) {
    return `النص ${state.text.length} حرفا ويتجاوز الحد ${MAX_TEXT_CHARS}`;
  }
  return null;
}

// Play and download controls follow this and nothing else.
export function playback(state: UiState): boolean {
  return state.phase === "done" && state.audioUrl !== null;
}

export function spinning(state: UiState): boolean {
  return inFlight(state);
}

export function setText(state: UiState, text: string): UiState {
  return { ...state, text };
}

export function setVoice(state: UiState, voice: string): UiState {
  return { ...state, voice };
}

export function voicesLoaded(state: UiState, voices: VoiceInfo[]): UiState {
  const voice =
    voices.some((v) => v.name === state.voice) && state.voice
      ? state.voice
      : (voices[0]?.name ?? "");
  return { ...state, voices, voice };
}

// Submit is a request, not a guarantee: while a job is in flight the
// new request parks in `queued` (one deep, latest wins) and fires when
// the current job settles.
export function requestSubmit(state: UiState): UiState {
  if (!canSubmit(state)) {
    return state;
  }
  if (inFlight(state)) {
    return { ...state, queued: { text: state.text, voice: state.voice } };
  }
  return {
    ...state,
    phase: "submitting",
    jobId: null,
    audioUrl: null,
    failure: null,
    error: null,
    polls: 0,
  };
}

export function submitAccepted(state: UiState, jobId: string): UiState {
  return { ...state, phase: "polling", jobId, polls: 0 };
}

export function submitFailed(
  state: UiState,
  status: number | null,
  message: string,
  field: string | null,
): UiState {
  const error: ErrorInfo = {
    message,
    field: field === "text" || field === "voice" ? field : null,
    // Validation errors need a changed input, not a retry; everything
    // else (503, network, timeouts) is worth retrying as-is.
    retryable: status === null || status >= 500,
  };
  return { ...state, phase: "error", error, jobId: null, audioUrl: null };
}

export function jobUpdate(state: UiState, job: JobDoc): UiState {
  if (job.id !== state.jobId) {
    return state; // stale poll from an abandoned job
  }
  if (job.state === "done") {
    return { ...state, phase: "done", audioUrl: audioUrlFor(job) };
  }
  if (job.state === "failed") {
    return {
      ...state,
      phase: "failed",
      failure: job.error ?? "synthesis failed",
      audioUrl: null,
    };
  }
  return { ...state, polls: state.polls + 1 };
}

export function pollLimitReached(state: UiState): boolean {
  return state.polls >= POLL_CAP;
}

export function pollTimedOut(state: UiState): UiState {
  return submitFailed(state, null, "job is taking too long; try again", null);
}

// When a job settles, a parked request (if any) becomes the next
// submission. Returns the request to fire, or null.
export function takeQueued(state: UiState): [UiState, PendingRequest | null] {
  if (!state.queued || inFlight(state)) {
    return [state, null];
  }
  const pending = state.queued;
  return [{ ...state, queued: null }, pending];
}

export function previewLoaded(
  state: UiState,
  normalized: string,
  diacritized: string,
): UiState {
  return { ...state, preview: { normalized, diacritized }, previewError: null };
}

export function previewFailed(state: UiState, message: string): UiState {
  return { ...state, preview: null, previewError: message };
}

export function historyLoaded(state: UiState, items: HistoryItem[]): UiState {
  return { ...state, history: items };
}

export function historyItemFromJob(job: JobDoc): HistoryItem {
  return {
    jobId: job.id,
    text: job.input_text,
    voice: job.voice,
    state: job.state,
    audioUrl: audioUrlFor(job),
  };
}
