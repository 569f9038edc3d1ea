from .app import (
    JOB_STATES,
    SESSION_COOKIE,
    SynthesisJob,
    create_app,
    recompute_rtf,
)
from .config import ConfigError, ServiceConfig, load_config, parse_config_file
from .store import DocumentStore, FileDocumentStore, MemoryStore, StorageError

__all__ = [
    "JOB_STATES",
    "SESSION_COOKIE",
    "SynthesisJob",
    "create_app",
    "recompute_rtf",
    "ConfigError",
    "ServiceConfig",
    "load_config",
    "parse_config_file",
    "DocumentStore",
    "FileDocumentStore",
    "MemoryStore",
    "StorageError",
]
