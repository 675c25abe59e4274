"""JSON state files and state-family generation."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import states as st
from .linalg import check_shape


class StateFileError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class StateFile:
    shape: tuple[int, ...]
    entries: list
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        shape = check_shape(self.shape)
        d = int(np.prod(shape))
        if len(self.entries) != d * d:
            raise StateFileError(f"{len(self.entries)} entries for shape {list(shape)}, expected {d * d}")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "metadata", {str(k): str(v) for k, v in self.metadata.items()})

    @classmethod
    def from_density(cls, rho, metadata: dict | None = None) -> "StateFile":
        rho = st.as_density(rho)
        flat = rho.matrix.reshape(-1)
        entries = [[float(z.real), float(z.imag)] for z in flat]
        return cls(rho.dims, entries, metadata or {})

    def matrix(self) -> np.ndarray:
        d = int(np.prod(self.shape))
        arr = np.array(self.entries, dtype=float).reshape(d * d, 2)
        return (arr[:, 0] + 1j * arr[:, 1]).reshape(d, d)

    def density(self) -> st.DensityMatrix:
        return st.DensityMatrix(self.matrix(), self.shape)

    def to_dict(self) -> dict:
        return {"shape": list(self.shape), "entries": self.entries, "metadata": dict(self.metadata)}

    def to_json(self) -> str:
        # repr-based float output is the shortest string that round-trips
        return json.dumps(self.to_dict(), allow_nan=False) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "StateFile":
        try:
            shape = d["shape"]
            entries = d["entries"]
        except (KeyError, TypeError):
            raise StateFileError("state file needs 'shape' and 'entries'") from None
        for e in entries:
            if len(e) != 2 or not all(isinstance(x, (int, float)) and math.isfinite(x) for x in e):
                raise StateFileError(f"entry {e!r} is not a finite [re, im] pair")
        return cls(tuple(shape), [[float(a), float(b)] for a, b in entries], d.get("metadata", {}))


def save_state(rho, path, metadata: dict | None = None) -> StateFile:
    sf = StateFile.from_density(rho, metadata)
    Path(path).write_text(sf.to_json())
    return sf


def load_state(path) -> tuple[st.DensityMatrix, dict]:
    try:
        d = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise StateFileError(f"{path}: invalid JSON ({exc})") from None
    sf = StateFile.from_dict(d)
    return sf.density(), sf.metadata


def parse_params(text: str | None) -> dict[str, str]:
    """``"a=1,b=2"`` to ``{"a": "1", "b": "2"}``."""
    out = {}
    if not text:
        return out
    for item in text.split(","):
        if "=" not in item:
            raise StateFileError(f"parameter {item!r} is not key=value")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def parse_shape(text: str) -> tuple[int, ...]:
    try:
        return check_shape(int(x) for x in str(text).lower().split("x"))
    except ValueError:
        raise StateFileError(f"shape {text!r} is not of the form 2x2x2") from None


def _num(params, key, default=None) -> float:
    if key not in params:
        if default is None:
            raise StateFileError(f"missing parameter {key!r}")
        return default
    try:
        return float(params[key])
    except ValueError:
        raise StateFileError(f"parameter {key}={params[key]!r} is not a number") from None


def _int(params, key, default=None) -> int:
    x = _num(params, key, default)
    if x != int(x):
        raise StateFileError(f"parameter {key} must be an integer")
    return int(x)


_BELL = {
    "phi+": [1, 0, 0, 1], "phi-": [1, 0, 0, -1],
    "psi+": [0, 1, 1, 0], "psi-": [0, 1, -1, 0],
}


def _maximally_entangled(d: int) -> st.PureState:
    v = np.zeros(d * d, dtype=complex)
    v[:: d + 1] = 1 / np.sqrt(d)
    return st.PureState(v, (d, d))


def _white_noise_pure(params) -> st.PureState:
    if "schmidt" in params:
        s = [float(x) for x in params["schmidt"].split(";")]
        d = _int(params, "d", len(s))
        return st.schmidt_pure(s, d)
    return _maximally_entangled(_int(params, "d", 2))


def build_family(family: str, params: dict, seed=None) -> st.DensityMatrix:
    """Construct a named state family from string parameters."""
    if family == "rho-alpha":
        return st.rho_alpha(_num(params, "alpha"))
    if family == "rho-abc":
        return st.rho_abc(_num(params, "a"), _num(params, "b"), _num(params, "c"))
    if family == "werner":
        return st.werner(_num(params, "p"))
    if family == "white-noise":
        return st.white_noise_mix(_white_noise_pure(params), _num(params, "p"))
    if family == "ghz":
        return st.ghz(_int(params, "n", 3)).density()
    if family == "w":
        return st.w_state(_int(params, "n", 3)).density()
    if family == "bell":
        which = params.get("which", "phi+")
        if which not in _BELL:
            raise StateFileError(f"unknown Bell state {which!r}")
        return st.PureState(np.array(_BELL[which]) / np.sqrt(2), (2, 2)).density()
    if family == "random-separable":
        return st.random_separable(parse_shape(params.get("shape", "2x2")), _int(params, "terms", 4), seed)
    if family == "random-biseparable":
        return st.random_biseparable(parse_shape(params.get("shape", "2x2x2")), _int(params, "terms", 4), seed)
    if family == "random":
        shape = parse_shape(params.get("shape", "2x2"))
        d = int(np.prod(shape))
        rank = _int(params, "rank", d)
        return st.random_density(d, rank, seed, shape)
    raise StateFileError(f"unknown family {family!r}")


FAMILY_NAMES = ("rho-alpha", "rho-abc", "werner", "white-noise", "ghz", "w", "bell",
                "random-separable", "random-biseparable", "random")


def gen_state(family: str, params: dict | str | None = None, seed=None) -> StateFile:
    if isinstance(params, str) or params is None:
        params = parse_params(params)
    rho = build_family(family, params, seed)
    meta = {"family": family, **{f"param.{k}": v for k, v in sorted(params.items())}}
    if seed is not None:
        meta["seed"] = str(seed)
    return StateFile.from_density(rho, meta)


def family_params(metadata: dict) -> dict[str, str]:
    return {k[len("param."):]: v for k, v in metadata.items() if k.startswith("param.")}
