"""Versioned binary cache for enumeration output.

One file per (N, kind) with a fixed header carrying the format version,
N, record count, and a payload checksum, followed by fixed-width
little-endian int64 records.  A checksum or version mismatch is never
silently reused; callers rebuild and rewrite.
"""

from __future__ import annotations

import hashlib
import os
import struct
from pathlib import Path

import numpy as np

from .enumeration import EdgeList, enumerate_edges, make_coset

MAGIC = b"GPER"
FORMAT_VERSION = 1

# record width in int64 words per kind
KIND_WIDTH = {
    "cosets": 2,   # (c, a)
    "classes": 5,  # (trace, content, A, B, C)
    "edges": 3,    # (coset index, class index, k)
}

_HEADER = struct.Struct("<4sH10sqqq32s")


class CacheError(Exception):
    pass


class CacheMissing(CacheError):
    pass


class CacheMismatch(CacheError):
    pass


def default_cache_dir() -> Path:
    env = os.environ.get("GEOLAB_CACHE")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "geoperiods"


def cache_path(cache_dir, N: int, kind: str, aux: int = 0) -> Path:
    if kind not in KIND_WIDTH:
        raise CacheError(f"unknown cache kind {kind!r}")
    suffix = f"_m{aux}" if aux else ""
    return Path(cache_dir) / f"enum_{kind}_N{N}{suffix}.bin"


def write_cache(path, N: int, kind: str, records, aux: int = 0) -> None:
    width = KIND_WIDTH[kind]
    arr = np.ascontiguousarray(np.asarray(records, dtype="<i8").reshape(-1, width))
    payload = arr.tobytes()
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, kind.encode().ljust(10),
                          N, len(arr), aux, hashlib.sha256(payload).digest())
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    tmp.write_bytes(header + payload)
    tmp.replace(path)


def read_cache(path, N: int, kind: str, aux: int = 0) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise CacheMissing(f"no cache file {path}; run `geoperiods enumerate` "
                           f"with --N {N} first")
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise CacheMismatch(f"cache file {path} is truncated")
    magic, version, kind_b, n, count, aux_b, digest = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise CacheMismatch(f"cache file {path} has wrong magic")
    if version != FORMAT_VERSION:
        raise CacheMismatch(f"cache file {path} has format version {version}, "
                            f"expected {FORMAT_VERSION}")
    if kind_b.rstrip() != kind.encode() or n != N or aux_b != aux:
        raise CacheMismatch(f"cache file {path} header does not match request")
    payload = raw[_HEADER.size:]
    if hashlib.sha256(payload).digest() != digest:
        raise CacheMismatch(f"cache file {path} failed its checksum")
    width = KIND_WIDTH[kind]
    arr = np.frombuffer(payload, dtype="<i8").reshape(-1, width)
    if len(arr) != count:
        raise CacheMismatch(f"cache file {path} record count mismatch")
    return arr


# ---------------------------------------------------------------------------
# edge-list persistence


def store_edge_list(cache_dir, el: EdgeList) -> None:
    aux = el.min_abs_trace if el.min_abs_trace != 3 else 0
    cosets = [(x.c, x.a_mod_c) for x in el.cosets]
    classes = [(t, m, f[0], f[1], f[2]) for (t, m, f) in el.class_keys]
    write_cache(cache_path(cache_dir, el.N, "cosets", aux),
                el.N, "cosets", cosets, aux)
    write_cache(cache_path(cache_dir, el.N, "classes", aux),
                el.N, "classes", classes, aux)
    write_cache(cache_path(cache_dir, el.N, "edges", aux),
                el.N, "edges", el.edges, aux)


def load_edge_list(cache_dir, N: int, min_abs_trace: int = 3) -> EdgeList:
    aux = min_abs_trace if min_abs_trace != 3 else 0
    cosets_arr = read_cache(cache_path(cache_dir, N, "cosets", aux),
                            N, "cosets", aux)
    classes_arr = read_cache(cache_path(cache_dir, N, "classes", aux),
                             N, "classes", aux)
    edges = np.array(read_cache(cache_path(cache_dir, N, "edges", aux),
                                N, "edges", aux))
    cosets = [make_coset(int(c), int(a)) for c, a in cosets_arr]
    class_keys = [(int(t), int(m), (int(A), int(B), int(C)))
                  for t, m, A, B, C in classes_arr]
    deg_x = np.bincount(edges[:, 0], minlength=len(cosets))
    valid = edges[:, 1] >= 0
    deg_y = np.bincount(edges[valid, 1], minlength=len(class_keys))
    return EdgeList(N=N, min_abs_trace=min_abs_trace, cosets=cosets,
                    class_keys=class_keys, edges=edges,
                    deg_x=deg_x, deg_y=deg_y)


def edge_list_cached(cache_dir, N: int, min_abs_trace: int = 3,
                     build: bool = True) -> EdgeList:
    """Load the edge list, rebuilding on a missing or corrupt cache."""
    try:
        return load_edge_list(cache_dir, N, min_abs_trace)
    except CacheMissing:
        if not build:
            raise
    except CacheMismatch:
        if not build:
            raise
    el = enumerate_edges(N, min_abs_trace)
    store_edge_list(cache_dir, el)
    return el
