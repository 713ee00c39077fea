"""Result cache for per-level aggregate polynomials.

Entries are JSON files keyed by (config digest, level), written atomically
(write to a temp file, then rename).  Anything unreadable, corrupt,
version-mismatched, or keyed differently than its filename claims is
ignored and recomputed — cache contents are never trusted blindly.

The directory comes from the config (`cache_dir`), overridden by the
TOWERLIM_CACHE environment variable; with neither set, caching is off.
"""

from __future__ import annotations

import json
import os
import tempfile
from typing import Optional

from .tower import CharPoly, TowerSpec, r_poly

CACHE_VERSION = 1


def resolve_cache_dir(configured: Optional[str]) -> Optional[str]:
    env = os.environ.get("TOWERLIM_CACHE")
    if env:
        return env
    return configured


def _entry_path(dirpath: str, digest: str, level: int) -> str:
    return os.path.join(dirpath, f"{digest}-n{level}.json")


def cache_get(dirpath: Optional[str], digest: str,
              level: int) -> Optional[dict]:
    if dirpath is None:
        return None
    try:
        with open(_entry_path(dirpath, digest, level), "r",
                  encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, ValueError):
        return None
    if (not isinstance(data, dict)
            or data.get("version") != CACHE_VERSION
            or data.get("digest") != digest
            or data.get("level") != level
            or not isinstance(data.get("payload"), dict)):
        return None
    return data["payload"]


def cache_put(dirpath: Optional[str], digest: str, level: int,
              payload: dict) -> None:
    if dirpath is None:
        return
    os.makedirs(dirpath, exist_ok=True)
    blob = {
        "version": CACHE_VERSION,
        "digest": digest,
        "level": level,
        "payload": payload,
    }
    fd, tmp = tempfile.mkstemp(dir=dirpath, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(blob, fh, sort_keys=True)
        os.replace(tmp, _entry_path(dirpath, digest, level))
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _poly_payload(rp: CharPoly, meta: dict) -> dict:
    return {
        "ell": rp.ell,
        "prec": rp.prec,
        "coeffs": [str(c) for c in rp.coeffs],
        "meta": meta,
    }


def _poly_from_payload(payload: dict,
                       spec: TowerSpec) -> Optional[tuple[CharPoly, dict]]:
    try:
        if payload["ell"] != spec.ell or payload["prec"] != spec.prec:
            return None
        coeffs = tuple(int(s) for s in payload["coeffs"])
        meta = dict(payload["meta"])
        int(meta["k_n"])
    except (KeyError, TypeError, ValueError):
        return None
    return CharPoly(spec.ell, 0, spec.prec, coeffs), meta


def cached_r_poly(spec: TowerSpec, level: int,
                  dirpath: Optional[str]) -> tuple[CharPoly, dict]:
    """r_poly with read-through caching keyed by (spec digest, level)."""
    digest = spec.digest()
    payload = cache_get(dirpath, digest, level)
    if payload is not None:
        hit = _poly_from_payload(payload, spec)
        if hit is not None:
            return hit
    rp, meta = r_poly(spec, level)
    cache_put(dirpath, digest, level, _poly_payload(rp, meta))
    return rp, meta
