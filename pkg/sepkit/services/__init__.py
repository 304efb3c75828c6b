# sepkit Services Package
"""
Run bookkeeping services for the CLI.
"""

from .manifest import ManifestService, RunManifest, get_manifest_service

__all__ = ["ManifestService", "RunManifest", "get_manifest_service"]
