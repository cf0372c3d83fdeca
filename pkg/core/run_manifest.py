"""
Run manifests: what was run, with which settings, and what it produced
"""
import hashlib
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Union

from core import __version__

logger = logging.getLogger("spatial_mem.manifest")

MANIFEST_NAME = "manifest.json"


def file_digest(path: Union[str, Path], chunk: int = 1 << 20) -> str:
    """SHA-256 hex digest of a file"""
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(chunk), b""):
            h.update(block)
    return h.hexdigest()


@dataclass
class RunManifest:
    command: str
    config: Dict[str, Any]
    seed: Optional[int]
    version: str = __version__
    started: float = field(default_factory=time.time)
    wall_clock_seconds: float = 0.0
    acceptance_rates: Dict[str, Dict[str, float]] = field(default_factory=dict)
    outputs: Dict[str, str] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)

    def record_chains(self, chains: Iterable) -> None:
        for chain in chains:
            self.acceptance_rates[f"chain_{chain.chain_id}"] = dict(chain.acceptance_rates)

    def record_outputs(self, paths: Iterable[Union[str, Path]], root: Union[str, Path]) -> None:
        """Digest each output, keyed by its path relative to root"""
        root = Path(root)
        for p in paths:
            p = Path(p)
            key = str(p.relative_to(root)) if p.is_relative_to(root) else str(p)
            self.outputs[key] = file_digest(p)

    def finish(self) -> "RunManifest":
        self.wall_clock_seconds = round(time.time() - self.started, 3)
        return self

    def as_dict(self) -> Dict[str, Any]:
        return {
            "command": self.command,
            "version": self.version,
            "seed": self.seed,
            "wall_clock_seconds": self.wall_clock_seconds,
            "acceptance_rates": self.acceptance_rates,
            "outputs": dict(sorted(self.outputs.items())),
            "notes": self.notes,
            "config": self.config,
        }

    def write(self, directory: Union[str, Path]) -> Path:
        path = Path(directory) / MANIFEST_NAME
        path.write_text(json.dumps(self.as_dict(), indent=2, default=str) + "\n")
        logger.info(f"✅ Manifest written to {path}")
        return path


def read_manifest(path: Union[str, Path]) -> Dict[str, Any]:
    return json.loads(Path(path).read_text())
