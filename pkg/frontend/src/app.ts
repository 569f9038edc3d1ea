// DOM wiring for the synthesis page. All state lives in a UiState
// value; render() projects it onto the DOM after every change. init()
// takes the api handle so tests can pass a mocked or wrapped client.

import type { Api, JobDoc } from "./api.js";
import { ApiError } from "./api.js";
import {
  MAX_TEXT_CHARS,
  POLL_INTERVAL_MS,
  type UiState,
  audioUrlFor,
  canSubmit,
  historyItemFromJob,
  historyLoaded,
  initialState,
  jobUpdate,
  lengthWarning,
  playback,
  pollLimitReached,
  pollTimedOut,
  previewFailed,
  previewLoaded,
  requestSubmit,
  setText,
  setVoice,
  spinning,
  submitAccepted,
  submitFailed,
  takeQueued,
  voicesLoaded,
} from "./state.js";

export interface AppOptions {
  pollIntervalMs?: number;
}

export interface AppHandle {
  state(): UiState;
  // resolves when the current job (if any) reaches done/failed/error
  settled(): Promise<void>;
  dispose(): void;
}

const PAGE = `
<div class="app">
  <h1>ناطق</h1>
  <p class="tagline">تحويل النص العربي إلى كلام</p>
  <form id="synth-form">
    <label for="text-input">النص</label>
    <textarea id="text-input" dir="rtl" lang="ar" rows="5"
      placeholder="اكتب جملة عربية هنا"></textarea>
    <div id="text-warning" class="warning" hidden></div>
    <div id="text-error" class="field-error" hidden></div>
    <div class="controls">
      <label for="voice-select">الصوت</label>
      <select id="voice-select"></select>
      <div id="voice-error" class="field-error" hidden></div>
      <button type="button" id="preview-btn">معاينة التطبيع</button>
      <button type="submit" id="synth-btn">توليد الكلام</button>
    </div>
  </form>
  <div id="preview-box" class="preview" hidden>
    <div class="preview-row"><span class="k">مطبع</span>
      <span id="preview-normalized" dir="rtl"></span></div>
    <div class="preview-row"><span class="k">مشكل</span>
      <span id="preview-diacritized" dir="rtl"></span></div>
  </div>
  <div id="preview-error" class="error-box" hidden></div>
  <div id="status-box" class="status" hidden>
    <span class="spinner" aria-hidden="true"></span>
    <span id="status-text"></span>
  </div>
  <div id="error-box" class="error-box" hidden>
    <span id="error-text"></span>
    <button type="button" id="retry-btn" hidden>إعادة المحاولة</button>
  </div>
  <div id="result-box" class="result" hidden>
    <audio id="player" controls></audio>
    <a id="download-link" download="natiq.wav">تنزيل</a>
  </div>
  <div class="history">
    <h2>الجلسة الحالية</h2>
    <ul id="history-list"></ul>
  </div>
</div>
`;

export function init(root: HTMLElement, api: Api, options: AppOptions = {}): AppHandle {
  root.innerHTML = PAGE;
  const pollInterval = options.pollIntervalMs ?? POLL_INTERVAL_MS;

  const el = {
    form: root.querySelector("#synth-form") as HTMLFormElement,
    text: root.querySelector("#text-input") as HTMLTextAreaElement,
    textWarning: root.querySelector("#text-warning") as HTMLElement,
    textError: root.querySelector("#text-error") as HTMLElement,
    voice: root.querySelector("#voice-select") as HTMLSelectElement,
    voiceError: root.querySelector("#voice-error") as HTMLElement,
    previewBtn: root.querySelector("#preview-btn") as HTMLButtonElement,
    synthBtn: root.querySelector("#synth-btn") as HTMLButtonElement,
    previewBox: root.querySelector("#preview-box") as HTMLElement,
    previewNormalized: root.querySelector("#preview-normalized") as HTMLElement,
    previewDiacritized: root.querySelector("#preview-diacritized") as HTMLElement,
    previewError: root.querySelector("#preview-error") as HTMLElement,
    statusBox: root.querySelector("#status-box") as HTMLElement,
    statusText: root.querySelector("#status-text") as HTMLElement,
    errorBox: root.querySelector("#error-box") as HTMLElement,
    errorText: root.querySelector("#error-text") as HTMLElement,
    retryBtn: root.querySelector("#retry-btn") as HTMLButtonElement,
    resultBox: root.querySelector("#result-box") as HTMLElement,
    player: root.querySelector("#player") as HTMLAudioElement,
    download: root.querySelector("#download-link") as HTMLAnchorElement,
    historyList: root.querySelector("#history-list") as HTMLUListElement,
  };

  let state = initialState();
  let disposed = false;
  let pollTimer: ReturnType<typeof setTimeout> | null = null;
  let settleResolvers: Array<() => void> = [];

  function update(next: UiState): void {
    state = next;
    render();
  }

  function notifySettled(): void {
    const resolvers = settleResolvers;
    settleResolvers = [];
    for (const resolve of resolvers) {
      resolve();
    }
  }

  function render(): void {
    const warning = lengthWarning(state);
    el.textWarning.hidden = warning === null;
    el.textWarning.textContent = warning ?? "";

    const textFieldError = state.error?.field === "text" ? state.error.message : null;
    el.textError.hidden = textFieldError === null;
    el.textError.textContent = textFieldError ?? "";

    const voiceFieldError = state.error?.field === "voice" ? state.error.message : null;
    el.voiceError.hidden = voiceFieldError === null;
    el.voiceError.textContent = voiceFieldError ?? "";

    if (el.voice.options.length !== state.voices.length) {
      el.voice.innerHTML = "";
      for (const voice of state.voices) {
        const option = document.createElement("option");
        option.value = voice.name;
        option.textContent = `${voice.name} (${voice.style})`;
        el.voice.appendChild(option);
      }
    }
    if (el.voice.value !== state.voice) {
      el.voice.value = state.voice;
    }

    el.synthBtn.disabled = !canSubmit(state);

    el.statusBox.hidden = !spinning(state);
    if (state.phase === "submitting") {
      el.statusText.textContent = "جار الإرسال";
    } else if (state.phase === "polling") {
      el.statusText.textContent = state.queued
        ? "جار التوليد، وطلب آخر في الانتظار"
        : "جار التوليد";
    }

    const generalError =
      state.error && state.error.field === null
        ? state.error.message
        : state.phase === "failed"
          ? (state.failure ?? "synthesis failed")
          : null;
    el.errorBox.hidden = generalError === null;
    el.errorText.textContent = generalError ?? "";
    el.retryBtn.hidden = !(state.error?.retryable ?? false);

    const playable = playback(state);
    el.resultBox.hidden = !playable;
    if (playable && state.audioUrl) {
      const url = api.audioUrl(state.audioUrl);
      if (el.player.src !== url) {
        el.player.src = url;
      }
      el.download.href = url;
    } else {
      el.player.removeAttribute("src");
      el.download.removeAttribute("href");
    }

    el.previewBox.hidden = state.preview === null;
    el.previewNormalized.textContent = state.preview?.normalized ?? "";
    el.previewDiacritized.textContent = state.preview?.diacritized ?? "";
    el.previewError.hidden = state.previewError === null;
    el.previewError.textContent = state.previewError ?? "";

    el.historyList.innerHTML = "";
    for (const item of state.history) {
      const li = document.createElement("li");
      li.dataset.jobId = item.jobId;
      const text = document.createElement("span");
      text.dir = "rtl";
      text.textContent = item.text;
      const meta = document.createElement("span");
      meta.className = "meta";
      meta.textContent = `${item.voice} · ${item.state}`;
      li.appendChild(text);
      li.appendChild(meta);
      if (item.audioUrl) {
        const link = document.createElement("a");
        link.href = api.audioUrl(item.audioUrl);
        link.textContent = "استماع";
        li.appendChild(link);
      }
      el.historyList.appendChild(li);
    }
  }

  function errorParts(err: unknown): [number | null, string, string | null] {
    if (err instanceof ApiError) {
      return [err.status, err.message, err.field];
    }
    const message = err instanceof Error ? err.message : String(err);
    return [null, `تعذر الاتصال بالخدمة: ${message}`, null];
  }

  async function refreshHistory(): Promise<void> {
    try {
      const session = await api.session();
      const jobs = await Promise.all(
        session.jobs.map((id) => api.job(id).catch(() => null)),
      );
      const items = jobs
        .filter((job): job is JobDoc => job !== null)
        .map(historyItemFromJob)
        .reverse();
      if (!disposed) {
        update(historyLoaded(state, items));
      }
    } catch {
      // history is a convenience; a failed refresh is not an error state
    }
  }

  function settleJob(): void {
    notifySettled();
    void refreshHistory();
    const [next, pending] = takeQueued(state);
    update(next);
    if (pending) {
      update(setText(state, pending.text));
      update(setVoice(state, pending.voice));
      submit();
    }
  }

  function schedulePoll(jobId: string): void {
    pollTimer = setTimeout(() => {
      void poll(jobId);
    }, pollInterval);
  }

  async function poll(jobId: string): Promise<void> {
    if (disposed || state.jobId !== jobId) {
      return;
    }
    let job: JobDoc;
    try {
      job = await api.job(jobId);
    } catch (err) {
      const [status, message, field] = errorParts(err);
      update(submitFailed(state, status, message, field));
      settleJob();
      return;
    }
    if (disposed || state.jobId !== jobId) {
      return;
    }
    update(jobUpdate(state, job));
    if (state.phase === "done" || state.phase === "failed") {
      settleJob();
    } else if (pollLimitReached(state)) {
      update(pollTimedOut(state));
      settleJob();
    } else {
      schedulePoll(jobId);
    }
  }

  function submit(): void {
    const before = state;
    update(requestSubmit(state));
    if (state === before || state.phase !== "submitting") {
      return; // blocked (empty text) or queued behind the in-flight job
    }
    const text = state.text;
    const voice = state.voice;
    void (async () => {
      try {
        const jobId = await api.synthesize(text, voice);
        if (disposed) {
          return;
        }
        update(submitAccepted(state, jobId));
        void poll(jobId);
      } catch (err) {
        if (disposed) {
          return;
        }
        const [status, message, field] = errorParts(err);
        update(submitFailed(state, status, message, field));
        settleJob();
      }
    })();
  }

  async function preview(): Promise<void> {
    const text = state.text.trim();
    if (!text) {
      update(previewFailed(state, "اكتب نصا أولا"));
      return;
    }
    try {
      const result = await api.normalize(text);
      if (!disposed) {
        update(previewLoaded(state, result.normalized, result.diacritized));
      }
    } catch (err) {
      if (!disposed) {
        const [, message] = errorParts(err);
        update(previewFailed(state, message));
      }
    }
  }

  el.text.addEventListener("input", () => {
    update(setText(state, el.text.value));
  });
  el.voice.addEventListener("change", () => {
    update(setVoice(state, el.voice.value));
  });
  el.form.addEventListener("submit", (event) => {
    event.preventDefault();
    submit();
  });
  el.previewBtn.addEventListener("click", () => {
    void preview();
  });
  el.retryBtn.addEventListener("click", () => {
    submit();
  });

  void (async () => {
    try {
      const voices = await api.voices();
      if (!disposed) {
        update(voicesLoaded(state, voices));
      }
    } catch (err) {
      if (!disposed) {
        const [, message] = errorParts(err);
        update(submitFailed(state, null, message, null));
      }
    }
    await refreshHistory();
  })();

  render();

  return {
    state: () => state,
    settled: () =>
      new Promise((resolve) => {
        if (!spinning(state)) {
          resolve();
        } else {
          settleResolvers.push(resolve);
        }
      }),
    dispose: () => {
      disposed = true;
      if (pollTimer !== null) {
        clearTimeout(pollTimer);
      }
      notifySettled();
    },
  };
}

export { MAX_TEXT_CHARS, audioUrlFor };
