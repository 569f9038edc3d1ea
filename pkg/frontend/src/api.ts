// Typed client for the service JSON API. Every call goes through one
// request helper so error shapes are uniform: ApiError carries the
// HTTP status and, for validation failures, the offending field.

export interface VoiceInfo {
  name: string;
  style: string;
  base_f0: number;
}

export interface JobDoc {
  id: string;
  session_id: string;
  input_text: string;
  voice: string;
  state: "queued" | "running" | "done" | "failed";
  created_at: string;
  audio_ref: string | null;
  timings: { normalize_s: number; diacritize_s: number; synth_s: number } | null;
  rtf: number | null;
  error: string | null;
}

export interface NormalizePreview {
  normalized: string;
  diacritized: string;
  trace: { span: number[]; kind: string; output_range: number[]; flags: string[] }[];
  warnings: string[];
}

export interface SessionDoc {
  session_id: string;
  created_at: string;
  jobs: string[];
}

export class ApiError extends Error {
  status: number;
  field: string | null;

  constructor(status: number, message: string, field: string | null = null) {
    super(message);
    this.status = status;
    this.field = field;
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export interface Api {
  voices(): Promise<VoiceInfo[]>;
  synthesize(text: string, voice: string): Promise<string>;
  job(id: string): Promise<JobDoc>;
  normalize(text: string): Promise<NormalizePreview>;
  session(): Promise<SessionDoc>;
  audioUrl(ref: string): string;
}

async function toApiError(response: Response): Promise<ApiError> {
  let message = `HTTP ${response.status}`;
  let field: string | null = null;
  try {
    const body = await response.json();
    if (typeof body.detail === "string") {
      message = body.detail;
    } else if (body.detail && typeof body.detail.message === "string") {
      message = body.detail.message;
      field = typeof body.detail.field === "string" ? body.detail.field : null;
    }
  } catch {
    // Non-JSON error body; the status line is all we have.
  }
  return new ApiError(response.status, message, field);
}

export function makeApi(base: string, fetchImpl?: FetchLike): Api {
  const doFetch: FetchLike = fetchImpl ?? ((url, init) => fetch(url, init));

  async function request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await doFetch(base + path, init);
    if (!response.ok) {
      throw await toApiError(response);
    }
    return (await response.json()) as T;
  }

  return {
    async voices() {
      const body = await request<{ voices: VoiceInfo[] }>("/api/voices");
      return body.voices;
    },

    async synthesize(text: string, voice: string) {
      const body = await request<{ job_id: string }>("/api/synthesize", {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ text, voice }),
      });
      return body.job_id;
    },

    job(id: string) {
      return request<JobDoc>(`/api/jobs/${id}`);
    },

    normalize(text: string) {
      return request<NormalizePreview>(
        `/api/normalize?text=${encodeURIComponent(text)}`,
      );
    },

    session() {
      return request<SessionDoc>("/api/session");
    },

    audioUrl(ref: string) {
      return base + ref;
    },
  };
}
