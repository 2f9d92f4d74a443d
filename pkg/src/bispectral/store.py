"""Construction and on-disk caching of the intertwiners D_n.

Cache entries are named by a digest of the starting AnsatzSpec, so a
changed search policy never picks up a stale operator.
"""

from __future__ import annotations

import json
import logging
import os
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

from .diffop import DiffOp, make_standard
from .intertwiner import (
    DEFAULT_CAP,
    AnsatzSpec,
    canonical_intertwiner,
    default_spec,
    search_intertwiner,
    translation_invariant_subspace,
    verify_intertwine,
)

log = logging.getLogger(__name__)

CACHE_ENV = "BISPECTRAL_CACHE"


class MissingArtifactError(FileNotFoundError):
    pass


class EmptySolutionSpace(LookupError):
    def __init__(self, message, certificate):
        super().__init__(message)
        self.certificate = certificate


@dataclass
class Construction:
    op: DiffOp
    certificate: dict


def cache_dir(path=None) -> Path:
    if path is not None:
        return Path(path)
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "bispectral"


def cache_path(n: int, start: AnsatzSpec = None, directory=None) -> Path:
    start = start or default_spec(n)
    return cache_dir(directory) / f"D{n}-{start.digest('canonical')}.json"


def _pairs(n):
    return {
        "laplacian->cm": (make_standard(n, "laplacian"), make_standard(n, "cm")),
        "airy_sum->deformed": (make_standard(n, "airy_sum"), make_standard(n, "deformed")),
    }


def construct_dn(n: int, *, start: AnsatzSpec = None, cap: int = DEFAULT_CAP) -> Construction:
    """Solve for D_n against the free/pair-potential Laplacian pair.

    Raises ``EmptySolutionSpace`` when the search finishes without a
    canonical solution and ``ResourceError`` when the ansatz outgrows ``cap``.
    """
    if n < 2:
        raise ValueError("D_n is defined for n >= 2")
    start = start or default_spec(n)
    t0 = time.perf_counter()
    L, Lt = _pairs(n)["laplacian->cm"]
    res = search_intertwiner(L, Lt, start, cap=cap)
    cert = {
        "n": n,
        "start_spec": asdict(start),
        "final_spec": asdict(res.spec),
        "unknowns": res.unknowns,
        "equations": res.equations,
        "solution_dimension": res.dimension,
    }
    if not res.solutions:
        raise EmptySolutionSpace(f"no intertwiner for n={n} within the ansatz bounds", cert)
    ti = translation_invariant_subspace(res.solutions)
    canon = canonical_intertwiner(res.solutions, n)
    cert["translation_invariant_dimension"] = len(ti)
    cert["canonical_dimension"] = len(canon)
    if len(canon) != 1:
        raise EmptySolutionSpace(
            f"expected one canonical intertwiner for n={n}, found {len(canon)}", cert
        )
    D = canon[0]
    checks = {}
    for name, (A, B) in _pairs(n).items():
        checks[name] = "zero operator" if verify_intertwine(D, A, B) else "NONZERO"
    cert["residuals"] = checks
    cert["verified"] = all(v == "zero operator" for v in checks.values())
    cert["seconds"] = round(time.perf_counter() - t0, 3)
    return Construction(D, cert)


def save_construction(c: Construction, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps({"operator": c.op.to_json(), "certificate": c.certificate}, indent=1))
    return path


def load_construction(path) -> Construction:
    path = Path(path)
    if not path.exists():
        raise MissingArtifactError(f"no cached operator at {path}")
    obj = json.loads(path.read_text())
    return Construction(DiffOp.from_json(obj["operator"]), obj["certificate"])


_MEMO = {}


def get_dn(n: int, *, use_cached: bool = True, directory=None, require_cached: bool = False) -> DiffOp:
    """D_n from memory, the disk cache, or a fresh construction (written back to the cache)."""
    if n in _MEMO:
        return _MEMO[n]
    path = cache_path(n, directory=directory)
    c: Optional[Construction] = None
    if use_cached and path.exists():
        c = load_construction(path)
    elif require_cached:
        raise MissingArtifactError(f"no cached operator for n={n} at {path}")
    if c is None:
        c = construct_dn(n)
        try:
            save_construction(c, path)
        except OSError as exc:  # read-only cache location is not fatal
            log.warning("could not write %s: %s", path, exc)
    _MEMO[n] = c.op
    return c.op
