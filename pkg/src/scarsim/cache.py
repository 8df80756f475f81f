"""Content-addressed result cache for expensive experiment stages.

Keys are sha256 digests of the canonicalized task description (sorted
JSON with output locations and scheduling knobs stripped), so the same
physics always maps to the same entry no matter where results land.
Entries are npz archives written atomically (temp file, then rename)
and carry their own task description, so a cache directory is
self-explanatory.  Anything unreadable is treated as a miss and
recomputed, with a warning.
"""
from __future__ import annotations

import hashlib
import json
import os
import warnings
from pathlib import Path

import numpy as np

ENV_VAR = "SCARSIM_CACHE_DIR"
_EXCLUDED_KEYS = ("output_dir", "cache_dir", "threads")


def resolve_cache_dir(explicit=None) -> Path:
    """Explicit path, else $SCARSIM_CACHE_DIR, else ~/.cache/scarsim."""
    if explicit:
        return Path(explicit)
    env = os.environ.get(ENV_VAR)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "scarsim"


def cache_key(task: dict) -> str:
    """Stable digest of a task description, ignoring output plumbing."""
    clean = {k: v for k, v in task.items() if k not in _EXCLUDED_KEYS}
    canon = json.dumps(clean, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def entry_path(cache_dir: Path, key: str) -> Path:
    return Path(cache_dir) / f"{key}.npz"


def store(cache_dir, key: str, arrays: dict[str, np.ndarray],
          task: dict) -> Path:
    """Atomically write arrays plus their task description."""
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    final = entry_path(cache_dir, key)
    tmp = cache_dir / f".{key}.{os.getpid()}.tmp"
    payload = {k: np.asarray(v) for k, v in arrays.items()}
    payload["__task__"] = np.array(json.dumps(task, sort_keys=True))
    try:
        with open(tmp, "wb") as fh:
            np.savez(fh, **payload)
        os.replace(tmp, final)
    finally:
        if tmp.exists():
            tmp.unlink()
    return final


def load(cache_dir, key: str) -> dict[str, np.ndarray] | None:
    """Arrays for a key, or None on a miss or an unreadable entry."""
    path = entry_path(cache_dir, key)
    if not path.exists():
        return None
    try:
        with np.load(path, allow_pickle=False) as archive:
            out = {name: archive[name] for name in archive.files
                   if name != "__task__"}
    except Exception:
        warnings.warn(f"unreadable cache entry {path}; recomputing",
                      stacklevel=2)
        return None
    return out


def entry_task(cache_dir, key: str) -> dict | None:
    """The embedded task description of an entry, if readable."""
    path = entry_path(cache_dir, key)
    if not path.exists():
        return None
    try:
        with np.load(path, allow_pickle=False) as archive:
            return json.loads(archive["__task__"].item())
    except Exception:
        return None
