"""Run configuration: parsing, validation and a re-runnable echo.

A configuration is one JSON document::

    {
      "preset": "s1",
      "geometry": {"N_P": 32, "P_sep": 4},
      "bem": {"kind": "ce", "K": 2},
      "mode": "siso",
      "patterns": [{"harmonics": [0, 4, 8], "chi": [1, 0]}],
      "simulation": {"model": "bem-exact", "trials": 10, "snr_db": [10, 30],
                     "seed": 0, "data": false, "profile": "uniform"}
    }

``geometry`` entries override the preset; without a preset every
geometry field is required. ``bem.Q`` and ``bem.f_D`` override the
geometry's values. ``patterns`` replaces the built-in design and is not
checked against the counting bounds. Complex scalars are ``[re, im]``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Optional

from .bem import BemKind, BemSpec
from .channel import ChannelModel
from .geometry import PRESETS, GeometryError, Mode, SystemGeometry

SCHEMA_VERSION = "1.0"

_GEOMETRY_FIELDS = [f.name for f in fields(SystemGeometry)]
_REQUIRED_GEOMETRY = ["N", "N_P", "P_sep", "P_b", "L_P", "B_c", "L", "Q"]
_TOP_KEYS = {"preset", "geometry", "bem", "mode", "n_tx", "patterns", "simulation",
             "schema_version"}
_BEM_KEYS = {"kind", "Q", "f_D", "K", "bandwidth"}
_SIM_KEYS = {"model", "trials", "snr_db", "seed", "data", "profile"}
_PATTERN_KEYS = {"harmonics", "chi", "matrix"}


class ConfigError(ValueError):
    """The configuration cannot be parsed or validated."""


def parse_complex(value) -> complex:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    if (isinstance(value, (list, tuple)) and len(value) == 2
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)):
        return complex(value[0], value[1])
    raise ConfigError(f"expected a number or [re, im], got {value!r}")


def complex_pair(z: complex) -> List[float]:
    return [float(z.real), float(z.imag)]


@dataclass(frozen=True)
class SimulationConfig:
    model: ChannelModel = ChannelModel.BEM_EXACT
    trials: int = 1
    snr_db: List[Optional[float]] = field(default_factory=lambda: [None])
    seed: int = 0
    data: bool = False
    profile: str = "uniform"

    def as_dict(self) -> Dict[str, Any]:
        return {"model": self.model.value, "trials": self.trials, "snr_db": list(self.snr_db),
                "seed": self.seed, "data": self.data, "profile": self.profile}


@dataclass(frozen=True)
class PatternConfig:
    """A hand-specified pattern: harmonic columns or an explicit matrix."""

    harmonics: Optional[List[Optional[int]]] = None
    chi: complex = 1.0
    matrix: Optional[List[List[complex]]] = None

    def as_dict(self) -> Dict[str, Any]:
        if self.matrix is not None:
            return {"matrix": [[complex_pair(z) for z in row] for row in self.matrix]}
        return {"harmonics": list(self.harmonics), "chi": complex_pair(self.chi)}


@dataclass(frozen=True)
class RunConfig:
    geometry: SystemGeometry
    bem: BemSpec
    mode: Mode
    preset: Optional[str] = None
    patterns: Optional[List[PatternConfig]] = None
    simulation: SimulationConfig = field(default_factory=SimulationConfig)

    @property
    def n_tx(self) -> int:
        if self.patterns is not None:
            return len(self.patterns)
        return self.geometry.N_T if self.mode.is_mimo else 1

    def as_dict(self) -> Dict[str, Any]:
        """Fully expanded echo; feeding it back reproduces this config."""
        out = {
            "schema_version": SCHEMA_VERSION,
            "preset": self.preset,
            "geometry": self.geometry.as_dict(),
            "bem": {"kind": self.bem.kind.value, "Q": self.bem.Q, "f_D": self.bem.f_D,
                    "K": self.bem.K, "bandwidth": self.bem.bandwidth},
            "mode": self.mode.value,
            "simulation": self.simulation.as_dict(),
        }
        if self.patterns is not None:
            out["patterns"] = [p.as_dict() for p in self.patterns]
        return out

    def with_changes(self, **changes) -> "RunConfig":
        """Copy with ``geometry``/``bem`` field overrides, re-validated.

        Keys ``bem`` (kind), ``mode`` and any geometry field are accepted.
        """
        doc = self.as_dict()
        for key, value in changes.items():
            if key == "bem":
                doc["bem"]["kind"] = value
            elif key == "mode":
                doc["mode"] = value
            elif key in _GEOMETRY_FIELDS:
                doc["geometry"][key] = value
                if key in ("Q", "f_D"):
                    doc["bem"][key] = value
            else:
                raise ConfigError(f"cannot change {key!r}")
        return parse_config(doc)


def _check_keys(block: Dict[str, Any], allowed, where: str):
    if not isinstance(block, dict):
        raise ConfigError(f"{where} must be an object")
    unknown = sorted(set(block) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown {where} keys: {', '.join(unknown)}")


def _int(value, name):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    return value


def _parse_geometry(doc: Dict[str, Any]) -> (SystemGeometry, Optional[str]):
    preset = doc.get("preset")
    block = doc.get("geometry", {})
    _check_keys(block, _GEOMETRY_FIELDS, "geometry")
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; choose from {', '.join(PRESETS)}")
        values = PRESETS[preset].as_dict()
        values = {k: values[k] for k in _GEOMETRY_FIELDS}
    else:
        missing = [k for k in _REQUIRED_GEOMETRY if k not in block]
        if missing:
            raise ConfigError(f"geometry is missing {', '.join(missing)} (no preset given)")
        values = {}
    values.update(block)
    bem_block = doc.get("bem", {})
    for key in ("Q", "f_D"):
        if bem_block.get(key) is not None:
            values[key] = bem_block[key]
    values.setdefault("f_D", 0.0)
    values.setdefault("N_T", 1)
    if "n_tx" in doc and doc["n_tx"] is not None:
        values["N_T"] = doc["n_tx"]
    if isinstance(values.get("f_D"), int) and not isinstance(values["f_D"], bool):
        values["f_D"] = float(values["f_D"])
    try:
        return SystemGeometry(**values), preset
    except (GeometryError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid geometry: {exc}") from exc


def _parse_bem(doc: Dict[str, Any], geo: SystemGeometry) -> BemSpec:
    block = doc.get("bem", {})
    _check_keys(block, _BEM_KEYS, "bem")
    try:
        kind = BemKind(block.get("kind", "ce"))
    except ValueError:
        raise ConfigError(f"unknown BEM kind {block.get('kind')!r}") from None
    try:
        return BemSpec(kind, geo.N, geo.Q, geo.f_D, K=_int(block.get("K", 2), "bem.K"),
                       bandwidth=block.get("bandwidth"))
    except ValueError as exc:
        raise ConfigError(f"invalid bem: {exc}") from exc


def _parse_patterns(items, geo: SystemGeometry) -> Optional[List[PatternConfig]]:
    if items is None:
        return None
    if not isinstance(items, list) or not items:
        raise ConfigError("patterns must be a non-empty list")
    out = []
    for k, item in enumerate(items):
        _check_keys(item, _PATTERN_KEYS, f"patterns[{k}]")
        if ("matrix" in item) == ("harmonics" in item):
            raise ConfigError(f"patterns[{k}] needs exactly one of harmonics or matrix")
        if "matrix" in item:
            rows = item["matrix"]
            if (not isinstance(rows, list) or len(rows) != geo.N_P
                    or any(not isinstance(r, list) or len(r) != geo.L_P for r in rows)):
                raise ConfigError(f"patterns[{k}].matrix must be {geo.N_P} x {geo.L_P}")
            out.append(PatternConfig(matrix=[[parse_complex(z) for z in r] for r in rows]))
        else:
            harm = item["harmonics"]
            if not isinstance(harm, list) or len(harm) != geo.L_P:
                raise ConfigError(f"patterns[{k}].harmonics needs {geo.L_P} entries")
            harm = [None if g is None else _int(g, f"patterns[{k}].harmonics") for g in harm]
            out.append(PatternConfig(harmonics=harm, chi=parse_complex(item.get("chi", 1.0))))
    return out


def _parse_snr(values) -> List[Optional[float]]:
    if not isinstance(values, list):
        values = [values]
    out = []
    for v in values:
        if v is None:
            out.append(None)
        elif isinstance(v, (int, float)) and not isinstance(v, bool):
            out.append(float(v))
        else:
            raise ConfigError(f"bad SNR value {v!r}")
    return out


def _parse_simulation(block) -> SimulationConfig:
    block = block or {}
    _check_keys(block, _SIM_KEYS, "simulation")
    try:
        model = ChannelModel(block.get("model", ChannelModel.BEM_EXACT.value))
    except ValueError:
        raise ConfigError(f"unknown channel model {block.get('model')!r}") from None
    trials = _int(block.get("trials", 1), "simulation.trials")
    if trials < 0:
        raise ConfigError("simulation.trials must be non-negative")
    profile = block.get("profile", "uniform")
    if profile not in ("uniform", "exponential"):
        raise ConfigError(f"unknown power profile {profile!r}")
    data = block.get("data", False)
    if not isinstance(data, bool):
        raise ConfigError("simulation.data must be true or false")
    return SimulationConfig(model, trials, _parse_snr(block.get("snr_db", [None])),
                            _int(block.get("seed", 0), "simulation.seed"), data, profile)


def parse_config(doc: Dict[str, Any]) -> RunConfig:
    """Validate a decoded configuration document.

    Raises
    ------
    ConfigError
        On any unknown key, missing field or invariant violation.
    """
    _check_keys(doc, _TOP_KEYS, "top-level")
    version = doc.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version!r}")
    geo, preset = _parse_geometry(doc)
    spec = _parse_bem(doc, geo)
    try:
        mode = Mode(doc.get("mode", Mode.HARMONIC_SISO.value))
    except ValueError:
        raise ConfigError(f"unknown mode {doc.get('mode')!r}") from None
    return RunConfig(geo, spec, mode, preset, _parse_patterns(doc.get("patterns"), geo),
                     _parse_simulation(doc.get("simulation")))


def load_document(path) -> Dict[str, Any]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return doc
