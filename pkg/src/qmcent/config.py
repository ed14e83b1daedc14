"""Experiment configuration: flat key=value files with [section] headers.

The format is intentionally diff-friendly for experiment logs::

    # comment
    [system]
    preset = helium
    spin   = opposite

    [tdqmc]
    m_walkers = 500

Unknown keys are rejected by name. Environment variables with the
``QMCENT_`` prefix override file values (``QMCENT_RUN_SEED=7`` overrides
``[run] seed``), so CI can vary single knobs without editing files.
All resolved values feed a config hash that is embedded in every output.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .errors import ConfigError
from .model import SpinConfig, SystemModel, build_system
from .partition import StripPartition, make_strips

ENV_PREFIX = "QMCENT_"

AUTO = "auto"


@dataclass(frozen=True)
class SystemSection:
    preset: str = "helium"
    spin: str = "opposite"
    a_en: float = 1.0
    a_ee: float = 1.0
    ee_coupling: float = 1.0
    bond_length: float = 3.0
    omega: float = 0.0
    nuclei: str = ""
    grid_min: float | None = None
    grid_max: float | None = None
    grid_n: int | None = None


@dataclass(frozen=True)
class ExactSection:
    dtau: float = 0.01
    max_steps: int = 50_000
    energy_tol: float = 1e-9
    burn_in: int = 2000
    thin: int = 10


@dataclass(frozen=True)
class TdqmcSection:
    m_walkers: int = 500
    dtau: float = 0.01
    max_steps: int = 4000
    min_steps: int = 1500
    energy_tol: float = 1e-5
    kernel_width: str = AUTO  # "auto" or a float literal
    moves_per_step: int = 1
    proposal_width: float = 0.1


@dataclass(frozen=True)
class StripsSection:
    n_strips: int = 11
    lo: str = AUTO  # "auto" or a float literal
    hi: str = AUTO
    electron: int = 1


@dataclass(frozen=True)
class RunSection:
    seed: int = 1
    pipelines: str = "both"  # both | exact | tdqmc


@dataclass(frozen=True)
class ExperimentConfig:
    system: SystemSection = field(default_factory=SystemSection)
    exact: ExactSection = field(default_factory=ExactSection)
    tdqmc: TdqmcSection = field(default_factory=TdqmcSection)
    strips: StripsSection = field(default_factory=StripsSection)
    run: RunSection = field(default_factory=RunSection)

    def build_model(self) -> SystemModel:
        s = self.system
        overrides: dict = {
            "a_en": s.a_en, "a_ee": s.a_ee,
            "ee_coupling": s.ee_coupling, "omega": s.omega,
            "spin": SpinConfig(s.spin),
        }
        if s.preset == "molecule":
            overrides["bond_length"] = s.bond_length
        if s.preset == "custom" and s.nuclei:
            pairs = []
            for token in s.nuclei.split(";"):
                pos, _, charge = token.partition(":")
                pairs.append((float(pos), float(charge)))
            overrides["nuclei"] = pairs
        for key in ("grid_min", "grid_max", "grid_n"):
            value = getattr(s, key)
            if value is not None:
                overrides[key] = value
        return build_system(s.preset, overrides)

    def kernel_width_value(self) -> float | None:
        """None selects the adaptive policy."""
        raw = self.tdqmc.kernel_width
        if raw == AUTO:
            return None
        return float(raw)

    def resolve_strips(self, walker_x=None) -> StripPartition:
        """Strip layout; ``auto`` edges span 80% of the walker cloud range,
        symmetrized about x = 0, and need walker coordinates to resolve."""
        s = self.strips
        if s.lo == AUTO or s.hi == AUTO:
            if walker_x is None:
                raise ConfigError(
                    "strip range is 'auto' but no walker cloud is available; "
                    "set [strips] lo/hi explicitly", key="strips.lo",
                )
            span = 0.8 * float(max(abs(float(min(walker_x))), abs(float(max(walker_x)))))
            lo = -span if s.lo == AUTO else float(s.lo)
            hi = span if s.hi == AUTO else float(s.hi)
        else:
            lo, hi = float(s.lo), float(s.hi)
        return make_strips(lo, hi, s.n_strips, axis=s.electron)

    def canonical_text(self) -> str:
        lines = []
        for section_field in fields(self):
            section = getattr(self, section_field.name)
            lines.append(f"[{section_field.name}]")
            for f in fields(section):
                value = getattr(section, f.name)
                lines.append(f"{f.name} = {'' if value is None else value}")
            lines.append("")
        return "\n".join(lines)

    def hash(self) -> str:
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()[:12]


_SECTIONS = {
    "system": SystemSection,
    "exact": ExactSection,
    "tdqmc": TdqmcSection,
    "strips": StripsSection,
    "run": RunSection,
}


def _coerce(section: str, key: str, raw: str, target_type):
    raw = raw.strip()
    try:
        if target_type is float or target_type == float | None:
            return float(raw)
        if target_type is int or target_type == int | None:
            return int(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(
            f"config key [{section}] {key} has invalid value {raw!r}",
            key=f"{section}.{key}",
        ) from exc


def _field_types(cls) -> dict:
    return {f.name: f.type for f in fields(cls)}


_TYPE_NAMES = {
    "float": float, "int": int, "str": str,
    "float | None": float | None, "int | None": int | None,
}


def parse_config_text(text: str, source: str = "<config>") -> ExperimentConfig:
    """Parse the key=value format; unknown sections/keys raise by name."""
    values: dict[str, dict] = {name: {} for name in _SECTIONS}
    section = None
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            if section not in _SECTIONS:
                raise ConfigError(
                    f"{source}:{lineno}: unknown config section [{section}]",
                    key=section,
                )
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        if section is None:
            raise ConfigError(f"{source}:{lineno}: key outside any [section]")
        key, _, raw_value = line.partition("=")
        key = key.strip().lower()
        types = _field_types(_SECTIONS[section])
        if key not in types:
            raise ConfigError(
                f"{source}:{lineno}: unknown config key [{section}] {key}",
                key=f"{section}.{key}",
            )
        target = _TYPE_NAMES.get(types[key], str) if isinstance(types[key], str) else types[key]
        special = raw_value.strip().lower() == AUTO and key in ("kernel_width", "lo", "hi")
        values[section][key] = AUTO if special else _coerce(section, key, raw_value, target)
    sections = {name: cls(**values[name]) for name, cls in _SECTIONS.items()}
    return ExperimentConfig(**sections)


def apply_env_overrides(cfg: ExperimentConfig, environ=None) -> ExperimentConfig:
    environ = os.environ if environ is None else environ
    updates: dict[str, dict] = {}
    for name, value in sorted(environ.items()):
        if not name.startswith(ENV_PREFIX):
            continue
        rest = name[len(ENV_PREFIX):].lower()
        section, _, key = rest.partition("_")
        if section not in _SECTIONS:
            raise ConfigError(f"env override {name} names unknown section", key=section)
        types = _field_types(_SECTIONS[section])
        if key not in types:
            raise ConfigError(f"env override {name} names unknown key", key=f"{section}.{key}")
        target = _TYPE_NAMES.get(types[key], str) if isinstance(types[key], str) else types[key]
        special = value.strip().lower() == AUTO and key in ("kernel_width", "lo", "hi")
        updates.setdefault(section, {})[key] = AUTO if special else _coerce(section, key, value, target)
    for section, kv in updates.items():
        cfg = replace(cfg, **{section: replace(getattr(cfg, section), **kv)})
    return cfg


def load_config(path: str | Path, environ=None) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    cfg = parse_config_text(path.read_text(), source=str(path))
    return apply_env_overrides(cfg, environ)
