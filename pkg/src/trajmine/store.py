"""File-backed artifact store.

A store is a directory of stage artifacts plus ``manifest.json``, which
records for each stage the artifact file, the parameters used, a hash of
the stage's inputs and a hash of the artifact itself. A stage is fresh
when its recorded input hash matches and the artifact on disk is intact.
"""
import hashlib
import json
import os
from contextlib import contextmanager
from datetime import datetime, timezone
from pathlib import Path

from .errors import TrajMineError

MANIFEST = "manifest.json"
LOCK = ".lock"


class StoreLockedError(TrajMineError):
    pass


class MissingArtifactError(TrajMineError):
    def __init__(self, stage):
        self.stage = stage
        super().__init__(f"stage {stage!r} has not been run in this store")


def sha256(data):
    return hashlib.sha256(data).hexdigest()


def input_hash(params, inputs):
    """Hash of a stage's parameters and the bytes it reads.

    ``inputs`` maps a name to bytes (or to an already computed digest).
    """
    digests = {k: v if isinstance(v, str) else sha256(v) for k, v in sorted(inputs.items())}
    blob = json.dumps({"params": params, "inputs": digests}, sort_keys=True)
    return sha256(blob.encode("utf-8"))


class Store:
    def __init__(self, root):
        self.root = Path(root)

    @property
    def manifest_path(self):
        return self.root / MANIFEST

    def manifest(self):
        try:
            return json.loads(self.manifest_path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            return {}

    def _save_manifest(self, m):
        tmp = self.manifest_path.with_suffix(".tmp")
        tmp.write_text(json.dumps(m, indent=1, sort_keys=True) + "\n", encoding="utf-8")
        os.replace(tmp, self.manifest_path)

    def entry(self, stage):
        return self.manifest().get(stage)

    def has(self, stage):
        e = self.entry(stage)
        return e is not None and (self.root / e["artifact"]).exists()

    def path(self, stage):
        e = self.entry(stage)
        if e is None:
            raise MissingArtifactError(stage)
        return self.root / e["artifact"]

    def read(self, stage):
        p = self.path(stage)
        try:
            return p.read_bytes()
        except FileNotFoundError:
            raise MissingArtifactError(stage) from None

    def is_fresh(self, stage, in_hash):
        e = self.entry(stage)
        if e is None or e.get("input_hash") != in_hash:
            return False
        p = self.root / e["artifact"]
        return p.exists() and sha256(p.read_bytes()) == e.get("output_hash")

    def write(self, stage, artifact, data, in_hash, params):
        """Store ``data`` as ``artifact`` and record it in the manifest."""
        self.root.mkdir(parents=True, exist_ok=True)
        p = self.root / artifact
        tmp = p.with_name(p.name + ".tmp")
        tmp.write_bytes(data)
        os.replace(tmp, p)
        m = self.manifest()
        m[stage] = {
            "artifact": artifact,
            "input_hash": in_hash,
            "output_hash": sha256(data),
            "params": params,
            # the manifest is bookkeeping; artifacts carry no clock
            "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        }
        self._save_manifest(m)

    @contextmanager
    def lock(self):
        """Exclusive ownership of the store for one pipeline run."""
        self.root.mkdir(parents=True, exist_ok=True)
        path = self.root / LOCK
        try:
            fd = os.open(path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise StoreLockedError(
                f"store {self.root} is locked by another run (remove {path} if stale)") from None
        try:
            os.write(fd, str(os.getpid()).encode())
            os.close(fd)
            yield self
        finally:
            path.unlink(missing_ok=True)
