"""HTTP front end for the pipeline.

Synthesis is asynchronous: POST /api/synthesize enqueues a job and the
client polls GET /api/jobs/{id} until it lands in done or failed. Audio
is fetched separately so job polls stay small. The same app also serves
the synchronous /synthesize wire protocol that remote backends speak,
which lets one instance act as another's backend.
"""

from __future__ import annotations

import logging
import socket
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Optional
from urllib.parse import urlsplit

from fastapi import FastAPI, HTTPException, Request, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from ..audio import wav_bytes, waveform_from_wav_bytes
from ..diacritizer import (
    DiacritizerBackend,
    EchoBackend,
    FailurePolicy,
    HttpBackend,
    diacritize,
)
from ..normalizer import NormalizeConfig, normalize
from ..pipeline import StageTimings, run_pipeline
from ..synth import (
    ReferenceSynthesizer,
    RemoteSynthesizer,
    SynthesisRequest,
    Synthesizer,
    UnknownVoiceError,
    VOICES,
    get_voice,
)
from .config import ServiceConfig
from .store import DocumentStore, FileDocumentStore, MemoryStore, StorageError

log = logging.getLogger(__name__)

SESSION_COOKIE = "natiq_session"

JOB_STATES = ("queued", "running", "done", "failed")
_TRANSITIONS = {
    "queued": {"running", "failed"},
    "running": {"done", "failed"},
    "done": set(),
    "failed": set(),
}


def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass
class SynthesisJob:
    """One synthesis request from birth to audio.

    States move queued -> running -> done | failed, never backwards.
    audio_ref is set exactly when the state is done.
    """

    id: str
    session_id: str
    input_text: str
    voice: str
    state: str = "queued"
    created_at: str = field(default_factory=_utcnow)
    audio_ref: Optional[str] = None
    timings: Optional[dict] = None
    rtf: Optional[float] = None
    error: Optional[str] = None

    def __post_init__(self):
        if self.state not in JOB_STATES:
            raise ValueError(f"unknown job state {self.state!r}")
        self._check_audio_ref()

    def _check_audio_ref(self):
        if (self.audio_ref is not None) != (self.state == "done"):
            raise ValueError(
                f"audio_ref must be set exactly in state done, "
                f"got state={self.state!r} audio_ref={self.audio_ref!r}"
            )

    def advance(self, new_state: str, **updates) -> "SynthesisJob":
        if new_state not in _TRANSITIONS[self.state]:
            raise ValueError(f"illegal transition {self.state} -> {new_state}")
        self.state = new_state
        for name, value in updates.items():
            if not hasattr(self, name):
                raise AttributeError(name)
            setattr(self, name, value)
        self._check_audio_ref()
        return self

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "session_id": self.session_id,
            "input_text": self.input_text,
            "voice": self.voice,
            "state": self.state,
            "created_at": self.created_at,
            "audio_ref": self.audio_ref,
            "timings": self.timings,
            "rtf": self.rtf,
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SynthesisJob":
        return cls(**doc)


class SynthesizeBody(BaseModel):
    text: str
    voice: str = "hamza"


class WireSynthesizeBody(BaseModel):
    text: str
    voice: str = "hamza"
    rate: int = 22050


def _bad_request(fieldname: str, message: str) -> HTTPException:
    return HTTPException(400, detail={"field": fieldname, "message": message})


def _endpoint_reachable(url: str, timeout_s: float = 0.75) -> bool:
    parts = urlsplit(url)
    host = parts.hostname or ""
    port = parts.port or (443 if parts.scheme == "https" else 80)
    try:
        with socket.create_connection((host, port), timeout=timeout_s):
            return True
    except OSError:
        return False


class ServiceState:
    """Everything the handlers share: config, store, backends, workers."""

    def __init__(
        self,
        config: ServiceConfig,
        store: DocumentStore,
        backend: DiacritizerBackend,
        synthesizer: Synthesizer,
    ):
        self.config = config
        self.store = store
        self.backend = backend
        self.synthesizer = synthesizer
        self.policy = FailurePolicy(config.diacritizer_policy)
        self.voices = config.voice_names()
        for name in self.voices:
            if name not in VOICES:
                raise UnknownVoiceError(name)
        self.executor = ThreadPoolExecutor(
            max_workers=config.workers, thread_name_prefix="synth"
        )

    def check_backends_up(self) -> None:
        """Refuse new work when a required remote backend is down.

        Only meaningful under the fail policy; with passthrough the
        pipeline degrades instead of failing, so jobs still succeed.
        """
        if self.policy is not FailurePolicy.FAIL:
            return
        for url in (self.config.diacritizer_endpoint, self.config.synth_endpoint):
            if url and not _endpoint_reachable(url):
                raise HTTPException(503, detail=f"backend unavailable: {url}")

    def load_job(self, job_id: str) -> SynthesisJob:
        return SynthesisJob.from_dict(self.store.get(f"job-{job_id}"))

    def save_job(self, job: SynthesisJob) -> None:
        self.store.put(f"job-{job.id}", job.to_dict())

    def run_job(self, job_id: str) -> None:
        """Worker-thread body. Every exit path leaves the job terminal."""
        try:
            job = self.load_job(job_id)
            job.advance("running")
            self.save_job(job)
            result = run_pipeline(
                job.input_text,
                voice=job.voice,
                output_rate=self.config.output_rate,
                backend=self.backend,
                policy=self.policy,
                synthesizer=self.synthesizer,
            )
            self.store.put_blob(f"audio-{job.id}", wav_bytes(result.waveform))
            job.advance(
                "done",
                audio_ref=f"/api/audio/{job.id}",
                timings=result.timings.to_dict(),
                rtf=result.rtf,
            )
            self.save_job(job)
        except Exception as exc:
            log.exception("job %s failed", job_id)
            try:
                job = self.load_job(job_id)
                if job.state in ("queued", "running"):
                    job.advance("failed", error=str(exc))
                    self.save_job(job)
            except Exception:
                log.exception("could not record failure for job %s", job_id)


def create_app(
    config: ServiceConfig | None = None,
    *,
    store: DocumentStore | None = None,
    backend: DiacritizerBackend | None = None,
    synthesizer: Synthesizer | None = None,
) -> FastAPI:
    """Build the service. Tests inject store and backends; production
    wiring comes entirely from the config."""
    if config is None:
        config = ServiceConfig()
    if store is None:
        store = FileDocumentStore(config.store_dir) if config.store_dir else MemoryStore()
    if backend is None:
        backend = (
            HttpBackend(config.diacritizer_endpoint, timeout_s=config.synth_timeout_s)
            if config.diacritizer_endpoint
            else EchoBackend()
        )
    if synthesizer is None:
        synthesizer = (
            RemoteSynthesizer(config.synth_endpoint, timeout_s=config.synth_timeout_s)
            if config.synth_endpoint
            else ReferenceSynthesizer()
        )

    state = ServiceState(config, store, backend, synthesizer)
    app = FastAPI(title="natiq", docs_url=None, redoc_url=None)
    app.state.natiq = state

    @app.exception_handler(StorageError)
    async def storage_error(request: Request, exc: StorageError):
        log.error("storage unavailable: %s", exc)
        return JSONResponse(status_code=503, content={"detail": "storage unavailable"})

    def session_for(request: Request, response: Response) -> str:
        sid = request.cookies.get(SESSION_COOKIE)
        if not sid or not sid.isalnum():
            sid = uuid.uuid4().hex
            response.set_cookie(SESSION_COOKIE, sid, httponly=True, samesite="lax")
        return sid

    def validate_text(text: str) -> str:
        if not text or not text.strip():
            raise _bad_request("text", "text must not be empty")
        if len(text) > config.max_text_chars:
            raise _bad_request(
                "text",
                f"text too long: {len(text)} chars, limit {config.max_text_chars}",
            )
        return text

    def validate_voice(name: str) -> str:
        if name not in state.voices:
            raise _bad_request(
                "voice", f"unknown voice {name!r}; have {', '.join(state.voices)}"
            )
        return name

    @app.post("/api/synthesize", status_code=202)
    def submit(body: SynthesizeBody, request: Request, response: Response):
        validate_text(body.text)
        validate_voice(body.voice)
        state.check_backends_up()
        sid = session_for(request, response)

        job = SynthesisJob(
            id=uuid.uuid4().hex,
            session_id=sid,
            input_text=body.text,
            voice=body.voice,
        )
        state.save_job(job)

        session_key = f"session-{sid}"
        try:
            record = state.store.get(session_key)
        except KeyError:
            record = {"session_id": sid, "created_at": _utcnow(), "jobs": []}
        record["jobs"].append(job.id)
        state.store.put(session_key, record)

        state.executor.submit(state.run_job, job.id)
        return {"job_id": job.id}

    @app.get("/api/jobs/{job_id}")
    def job_status(job_id: str):
        try:
            return state.load_job(job_id).to_dict()
        except KeyError:
            raise HTTPException(404, detail=f"unknown job {job_id}")

    @app.get("/api/audio/{job_id}")
    def job_audio(job_id: str):
        try:
            job = state.load_job(job_id)
        except KeyError:
            raise HTTPException(404, detail=f"unknown job {job_id}")
        if job.state != "done":
            raise HTTPException(404, detail=f"no audio yet: job is {job.state}")
        data = state.store.get_blob(f"audio-{job_id}")
        return Response(content=data, media_type="audio/wav")

    @app.get("/api/normalize")
    def normalize_text(text: str = ""):
        validate_text(text)
        state.check_backends_up()
        normalized = normalize(text, NormalizeConfig())
        diacritized = diacritize(normalized, state.backend, state.policy)
        trace = [
            {
                "span": list(entry.span),
                "kind": entry.kind.value,
                "output_range": list(entry.output_range),
                "flags": list(entry.flags),
            }
            for entry in normalized.trace
        ]
        return {
            "normalized": normalized.text,
            "diacritized": diacritized.content,
            "trace": trace,
            "warnings": list(normalized.warnings),
        }

    @app.get("/api/voices")
    def voices():
        out = []
        for name in state.voices:
            spec = get_voice(name)
            out.append({"name": name, "style": spec.style, "base_f0": spec.base_f0})
        return {"voices": out}

    @app.get("/api/session")
    def session(request: Request, response: Response):
        sid = session_for(request, response)
        try:
            record = state.store.get(f"session-{sid}")
        except KeyError:
            record = {"session_id": sid, "created_at": _utcnow(), "jobs": []}
        return record

    @app.post("/synthesize")
    def wire_synthesize(body: WireSynthesizeBody):
        """Synchronous backend wire protocol: text in, WAV bytes out.

        Text is synthesized as given, no normalization; callers on this
        protocol send already-prepared text.
        """
        validate_text(body.text)
        validate_voice(body.voice)
        try:
            req = SynthesisRequest(
                body.text, voice=get_voice(body.voice), output_rate=body.rate
            )
        except ValueError as exc:
            raise _bad_request("rate", str(exc))
        wave, _ = state.synthesizer.synthesize(req)
        return Response(content=wav_bytes(wave), media_type="audio/wav")

    if config.static_dir:
        app.mount("/", StaticFiles(directory=config.static_dir, html=True), name="ui")

    return app


def recompute_rtf(job: SynthesisJob, wav: bytes) -> float:
    """Job RTF from first principles: stored synth time over the
    duration of the stored audio. Audits the value the worker wrote."""
    if job.timings is None:
        raise ValueError("job has no timings")
    wave = waveform_from_wav_bytes(wav)
    return job.timings["synth_s"] / wave.duration_s
