"""JSON and binary serialization for configs, result records and point clouds.

Conventions:

* rationals are ``[numerator, denominator]`` integer pairs;
* reals are decimal strings with 17 significant digits (round-trip exact);
* clouds are flat binary files: the magic ``b"TCLOUD01"``, a little-endian
  uint64 point count, then little-endian float64 ``x, y`` pairs. They are named
  by the SHA-256 of their content.
"""
from __future__ import annotations

import hashlib
import json
import math
import os
import struct
import tempfile
from fractions import Fraction
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .dynamics import ConjugatedTranslation, LiftWord, Linear, RescaledLift, Shear, Translation
from .errors import InvalidInput
from .geom import Mat2Z

__all__ = [
    "CLOUD_MAGIC", "encode", "dumps_record", "atomic_write", "write_cloud", "read_cloud",
    "cloud_bytes", "load_schema", "validate_config", "load_config", "parse_rational",
    "parse_real", "parse_generator", "parse_word", "parse_map", "generator_to_json", "map_to_json",
]

CLOUD_MAGIC = b"TCLOUD01"


def encode(x):
    """Convert results to JSON-ready values following the module conventions."""
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, Fraction):
        return [x.numerator, x.denominator]
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".17g")
    if isinstance(x, dict):
        return {str(k): encode(v) for k, v in x.items()}
    if isinstance(x, np.ndarray):
        return [encode(v) for v in x.tolist()]
    if isinstance(x, (list, tuple)):
        return [encode(v) for v in x]
    raise TypeError(f"cannot encode {type(x).__name__}")


def dumps_record(record: dict) -> str:
    return json.dumps(encode(record), sort_keys=True, indent=2) + "\n"


def atomic_write(path, data: bytes | str) -> Path:
    """Write to a temporary file in the target directory, then rename over ``path``."""
    path = Path(path)
    if isinstance(data, str):
        data = data.encode("utf-8")
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def cloud_bytes(points) -> bytes:
    P = np.ascontiguousarray(np.asarray(points, dtype="<f8").reshape(-1, 2))
    return CLOUD_MAGIC + struct.pack("<Q", len(P)) + P.tobytes()


def write_cloud(directory, points) -> tuple[str, str]:
    """Store a cloud under its content hash; returns ``(file name, sha256)``."""
    data = cloud_bytes(points)
    digest = hashlib.sha256(data).hexdigest()
    name = f"cloud-{digest[:16]}.tcloud"
    target = Path(directory) / name
    if not target.exists():
        atomic_write(target, data)
    return name, digest


def read_cloud(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if data[:8] != CLOUD_MAGIC:
        raise InvalidInput(f"{path}: not a cloud file (bad magic)")
    (n,) = struct.unpack("<Q", data[8:16])
    if len(data) != 16 + 16 * n:
        raise InvalidInput(f"{path}: truncated cloud file")
    return np.frombuffer(data, dtype="<f8", offset=16).reshape(n, 2).astype(float)


# ---------------------------------------------------------------------------
# configs

def load_schema() -> dict:
    text = resources.files("torus_spreader").joinpath("schema/config.schema.json").read_text()
    return json.loads(text)


def _field_name(err: jsonschema.ValidationError) -> str:
    parts = [str(p) for p in err.absolute_path]
    return ".".join(parts) if parts else "<root>"


def validate_config(config: dict) -> dict:
    validator = jsonschema.Draft202012Validator(load_schema())
    errors = sorted(validator.iter_errors(config), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        err = errors[0]
        raise InvalidInput(f"config field '{_field_name(err)}': {err.message}")
    return config


def load_config(path) -> dict:
    try:
        config = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"{path}: invalid JSON ({exc})") from None
    return validate_config(config)


def parse_rational(v) -> Fraction:
    if isinstance(v, bool):
        raise InvalidInput(f"not a rational: {v!r}")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, list) and len(v) == 2 and all(isinstance(c, int) for c in v) and v[1] != 0:
        return Fraction(v[0], v[1])
    raise InvalidInput(f"not a rational: {v!r}")


def parse_real(v):
    """Reals may be numbers, decimal strings or rational pairs (kept exact)."""
    if isinstance(v, (int, list)) and not isinstance(v, bool):
        return parse_rational(v)
    if isinstance(v, float):
        return v
    if isinstance(v, str):
        try:
            return float(v)
        except ValueError:
            raise InvalidInput(f"not a real: {v!r}") from None
    raise InvalidInput(f"not a real: {v!r}")


def parse_generator(spec: dict):
    kind = spec["type"]
    if kind == "translation":
        return Translation(tuple(parse_real(c) for c in spec["theta"]))
    if kind == "linear":
        return Linear(Mat2Z.from_rows(spec["matrix"]))
    if kind == "shear":
        return Shear(parse_real(spec["eta"]), spec["xi"])
    raise InvalidInput(f"unknown generator type {kind!r}")


def parse_word(spec: dict):
    word = LiftWord(tuple(parse_generator(g) for g in spec["word"]))
    q = spec.get("q")
    return RescaledLift(word, q) if q is not None else word


def parse_map(spec: dict):
    """A word (optionally rescaled by ``q``) or ``{"conjugate": word, "theta": [x, y]}``."""
    if "conjugate" in spec:
        return ConjugatedTranslation(parse_word(spec["conjugate"]), tuple(parse_real(c) for c in spec["theta"]))
    return parse_word(spec)


def generator_to_json(g) -> dict:
    if isinstance(g, Translation):
        return {"type": "translation", "theta": list(g.theta)}
    if isinstance(g, Linear):
        return {"type": "linear", "matrix": g.A.rows()}
    if isinstance(g, Shear):
        return {"type": "shear", "eta": g.eta, "xi": g.xi}
    raise InvalidInput(f"not a generator: {g!r}")


def map_to_json(m) -> dict:
    if isinstance(m, LiftWord):
        return {"word": [generator_to_json(g) for g in m.gens]}
    if isinstance(m, RescaledLift):
        out = map_to_json(m.base)
        out["q"] = m.q
        return out
    if isinstance(m, ConjugatedTranslation):
        return {"conjugate": map_to_json(m.h), "theta": list(m.theta)}
    raise InvalidInput(f"cannot serialise {type(m).__name__}")
