"""HTTP studio service with content-addressed storage and session replay."""

from .app import ServiceConfig, StudioService, create_app
from .registry import AnchorConfig, ModelRegistry, ModelRegistryEntry, PipelineRoles, RegistryError
from .replay import ReplayResult, replay_session
from .store import BlobStore, SessionJournal, StorageFull

__all__ = [
    "ServiceConfig",
    "StudioService",
    "create_app",
    "AnchorConfig",
    "ModelRegistry",
    "ModelRegistryEntry",
    "PipelineRoles",
    "RegistryError",
    "ReplayResult",
    "replay_session",
    "BlobStore",
    "SessionJournal",
    "StorageFull",
]
