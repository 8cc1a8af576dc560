"""The .tpz sequence file format.

Line one is "#TPZ1 " followed by a JSON manifest; the body is the sequence as
ASCII digits 0/1/2 in lines of 4096.  Manifests carry no binary floats:
rationals are "num/den" strings and big integers decimal strings, so a file
identifies its construction exactly and can be regenerated bit-for-bit.
"""

from __future__ import annotations

import json
import os
import tempfile
from fractions import Fraction

from . import __version__
from .blocks import BlockSchedule
from .interior import InteriorSequence, make_interior_params
from .segment import SegmentSequence, derive_segment_params
from .separator import SeparatorSequence, make_separator_params
from .sequences import MaterializedSequence

HEADER_PREFIX = "#TPZ1 "
LINE_WIDTH = 4096
FORMAT_VERSION = 1

_TO_DIGITS = bytes.maketrans(bytes([0, 1, 2]), b"012")
_FROM_DIGITS = bytes.maketrans(b"012", bytes([0, 1, 2]))


class SequenceFileError(ValueError):
    pass


def _frac_str(x) -> str:
    f = Fraction(x)
    return f"{f.numerator}/{f.denominator}"


def _parse_frac(s) -> Fraction:
    return Fraction(s)


def build_manifest(seq, length: int, seeds=None) -> dict:
    sched = seq.schedule
    materialized = []
    for n in range(1, sched.max_level + 1):
        if sched.a(n) > length:
            break
        materialized.append(str(sched.a(n)))
    manifest = {
        "format_version": FORMAT_VERSION,
        "construction": seq.construction,
        "generator_version": __version__,
        "horizon": length,
        "schedule": sched.to_json(),
        "materialized_levels": materialized,
        "seeds": dict(seeds or {}),
        "params": {},
    }
    params = manifest["params"]
    if seq.construction == "segment":
        p = seq.params
        params.update({
            "v": [_frac_str(c) for c in p.v],
            "t": p.t, "a1": p.a1, "K": p.K,
            "norm_sq": _frac_str(p.norm_sq),
            "alpha_sq": _frac_str(p.alpha_sq),
            "beta_sq": _frac_str(p.beta_sq),
            "m_sq": _frac_str(p.m_sq),
            "delta": _frac_str(p.delta),
            "forced_symbol_steps": seq.forced_symbol_steps,
        })
    elif seq.construction == "separator":
        p = seq.params
        markers = {}
        for n in (1, 2, 3):
            if n >= sched.max_level:
                break
            deco = seq.decomposition(n)
            markers[str(n)] = {"p": str(deco.p), "q": str(deco.q)}
        params.update({
            "K": p.K, "L": p.L, "toy_mode": p.toy_mode,
            "delta_limit": _frac_str(p.delta_limit) if p.delta_limit is not None else None,
            "markers": markers,
        })
    elif seq.construction == "interior":
        p = seq.params
        params.update({
            "delta": _frac_str(p.delta),
            "target_seed": p.seed,
            "targets": [tv.to_json() for tv in seq.targets],
            "snap_events": sum(1 for tv in seq.targets if tv.snapped),
        })
    return manifest


def write_sequence(path, seq, length: int, seeds=None) -> dict:
    """Write omega(1..length) with its manifest; atomic (temp file + rename)."""
    if seq.horizon is not None and length > seq.horizon:
        raise SequenceFileError(f"length {length} exceeds the materialized horizon {seq.horizon}")
    manifest = build_manifest(seq, length, seeds=seeds)
    if seq.horizon is not None:
        body = bytes(seq.data[:length]).translate(_TO_DIGITS)
    else:
        body = bytes(seq.values(1, length)).translate(_TO_DIGITS)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(HEADER_PREFIX.encode())
            fh.write(json.dumps(manifest, sort_keys=True, separators=(",", ":")).encode())
            fh.write(b"\n")
            for off in range(0, len(body), LINE_WIDTH):
                fh.write(body[off:off + LINE_WIDTH])
                fh.write(b"\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return manifest


class FileSequence(MaterializedSequence):
    """A sequence read back from a .tpz file."""

    def __init__(self, schedule, data, manifest):
        super().__init__(schedule, data, construction=manifest["construction"])
        self.manifest = manifest


def read_sequence(path) -> FileSequence:
    with open(path, "rb") as fh:
        header = fh.readline().decode()
        if not header.startswith(HEADER_PREFIX):
            raise SequenceFileError("missing #TPZ1 header")
        try:
            manifest = json.loads(header[len(HEADER_PREFIX):])
        except json.JSONDecodeError as exc:
            raise SequenceFileError(f"bad manifest: {exc}") from exc
        body = fh.read().replace(b"\n", b"")
    horizon = int(manifest.get("horizon", len(body)))
    if len(body) != horizon:
        raise SequenceFileError(f"body length {len(body)} != manifest horizon {horizon}")
    if body.strip(b"012") != b"":
        raise SequenceFileError("body contains symbols outside {0,1,2}")
    schedule = BlockSchedule.from_json(manifest["schedule"])
    return FileSequence(schedule, body.translate(_FROM_DIGITS), manifest)


def rebuild_params(manifest):
    """Reconstruct the construction parameters recorded in a manifest."""
    construction = manifest["construction"]
    params = manifest["params"]
    if construction == "segment":
        v = tuple(_parse_frac(c) for c in params["v"])
        return derive_segment_params(v, a1_override=int(params["a1"]))
    if construction == "separator":
        d_rule = manifest["schedule"]["d"]
        from .blocks import LevelRule
        return make_separator_params(int(params["K"]), int(params["L"]),
                                     d_rule=LevelRule.from_json(d_rule),
                                     toy_mode=bool(params.get("toy_mode", False)))
    if construction == "interior":
        sched = manifest["schedule"]
        d = sched["d"]
        if d.get("kind") != "pow2":
            raise SequenceFileError("interior manifests require a pow2 d rule")
        return make_interior_params(int(sched["a1"]), int(d["shift"]),
                                    seed=int(params.get("target_seed", 0)))
    raise SequenceFileError(f"unknown construction {construction!r}")


def rebuild_sequence(manifest, cap=None):
    """Re-derive a native sequence object from a manifest (pointwise access)."""
    construction = manifest["construction"]
    params = rebuild_params(manifest)
    if construction == "segment":
        return SegmentSequence(params, int(manifest["horizon"]))
    if construction == "separator":
        return SeparatorSequence(params)
    if construction == "interior":
        levels = len(manifest["params"].get("targets", [])) or None
        kwargs = {"levels": levels}
        if cap is not None:
            kwargs["cap"] = cap
        return InteriorSequence(params, **kwargs)
    raise SequenceFileError(f"unknown construction {construction!r}")
