"""Content-addressed on-disk cache of solved reflection spectra.

Entries are ``<sha256>.npz`` files written to a temporary name in the same
directory and renamed into place, so readers never see a partial file.
Unreadable or mismatched entries are deleted and reported as a miss.
"""

from __future__ import annotations

import json
import logging
import os
import tempfile
import zipfile
from pathlib import Path

import numpy as np

from .jones import ReflectionSpectrum

log = logging.getLogger(__name__)

FORMAT = 2


class SpectrumCache:
    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def path(self, key: str) -> Path:
        return self.root / f"{key}.npz"

    def get(self, key: str) -> ReflectionSpectrum | None:
        p = self.path(key)
        if not p.exists():
            return None
        try:
            with np.load(p, allow_pickle=False) as z:
                if int(z["format"]) != FORMAT or str(z["key"]) != key:
                    raise ValueError("stale or mismatched entry")
                meta = json.loads(str(z["meta"]))
                meta["cache"] = "hit"
                return ReflectionSpectrum(
                    z["freqs"].copy(), z["r"].copy(), str(z["basis"]), str(z["reference_plane"]), meta
                )
        except (OSError, ValueError, KeyError, EOFError, zipfile.BadZipFile) as e:
            log.warning("evicting corrupt cache entry %s (%s)", p.name, e)
            p.unlink(missing_ok=True)
            return None

    def put(self, key: str, spec: ReflectionSpectrum) -> Path:
        fd, tmp = tempfile.mkstemp(prefix=f".{key[:16]}-", suffix=".tmp", dir=self.root)
        try:
            with os.fdopen(fd, "wb") as fh:
                np.savez(
                    fh,
                    format=FORMAT,
                    key=key,
                    freqs=spec.freqs,
                    r=spec.r,
                    basis=spec.basis,
                    reference_plane=spec.reference_plane,
                    meta=json.dumps(spec.meta, sort_keys=True, default=str),
                )
            os.replace(tmp, self.path(key))
        except BaseException:
            Path(tmp).unlink(missing_ok=True)
            raise
        return self.path(key)
