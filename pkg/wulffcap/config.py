from __future__ import annotations

import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict

import yaml


CONFIG_DIR = Path(os.environ.get("WULFFCAP_CONFIG_DIR", "~/.config/wulffcap")).expanduser()
CONFIG_FILE = CONFIG_DIR / "config.yaml"

DEFAULT_SEED = 20240601


def _safe_int(value: Any, default: int, *, minimum: int | None = None, maximum: int | None = None) -> int:
    try:
        result = int(value)
    except Exception:
        result = default
    if minimum is not None:
        result = max(minimum, result)
    if maximum is not None:
        result = min(maximum, result)
    return result


def _safe_float(value: Any, default: float, *, minimum: float | None = None) -> float:
    try:
        result = float(value)
    except Exception:
        result = default
    if result != result:  # NaN
        result = default
    if minimum is not None:
        result = max(minimum, result)
    return result


def _safe_positive(value: Any, default: float) -> float:
    result = _safe_float(value, default)
    return result if result > 0 else default


def _safe_path(value: Any, default: Path) -> Path:
    if value is None:
        return default.expanduser()
    try:
        return Path(value).expanduser()
    except Exception:
        return default.expanduser()


def _safe_levels(value: Any, default: list[int]) -> list[int]:
    if isinstance(value, str):
        value = [part for part in value.replace(" ", "").split(",") if part]
    try:
        levels = sorted({_safe_int(v, -1, minimum=1, maximum=7) for v in value})
    except TypeError:
        return list(default)
    levels = [lvl for lvl in levels if lvl > 0]
    return levels if len(levels) >= 3 else list(default)


@dataclass
class ToleranceConfig:
    """Tolerance policy; every verdict is a pure function of these and the residuals."""

    identity: float = 1e-6
    equality: float = 1e-6
    boundary: float = 1e-8
    pointwise: float = 1e-9
    quadrature_factor: float = 10.0
    inequality_margin_factor: float = 10.0

    def normalize(self) -> "ToleranceConfig":
        return ToleranceConfig(
            identity=_safe_positive(self.identity, 1e-6),
            equality=_safe_positive(self.equality, 1e-6),
            boundary=_safe_positive(self.boundary, 1e-8),
            pointwise=_safe_positive(self.pointwise, 1e-9),
            quadrature_factor=_safe_float(self.quadrature_factor, 10.0, minimum=1.0),
            inequality_margin_factor=_safe_float(self.inequality_margin_factor, 10.0, minimum=1.0),
        )


@dataclass
class LadderConfig:
    level: int = 4
    levels: list[int] = field(default_factory=lambda: [3, 4, 5])
    fd_scale: float = 0.25

    def normalize(self) -> "LadderConfig":
        return LadderConfig(
            level=_safe_int(self.level, 4, minimum=1, maximum=7),
            levels=_safe_levels(self.levels, [3, 4, 5]),
            fd_scale=_safe_positive(self.fd_scale, 0.25),
        )


@dataclass
class SolverConfig:
    grid: int = 256
    max_iterations: int = 60
    tolerance: float = 1e-10
    damping_floor: float = 2.0**-10
    starts: int = 20

    def normalize(self) -> "SolverConfig":
        grid = _safe_int(self.grid, 256, minimum=8, maximum=1 << 14)
        return SolverConfig(
            grid=grid + (grid % 2),  # even, so t = 0 is a node
            max_iterations=_safe_int(self.max_iterations, 60, minimum=1, maximum=10_000),
            tolerance=_safe_positive(self.tolerance, 1e-10),
            damping_floor=min(0.5, _safe_positive(self.damping_floor, 2.0**-10)),
            starts=_safe_int(self.starts, 20, minimum=2, maximum=1000),
        )


@dataclass
class NormConfig:
    derivative_step: float = 1e-4
    admissibility_nodes_2d: int = 512
    admissibility_nodes_1d: int = 256

    def normalize(self) -> "NormConfig":
        return NormConfig(
            derivative_step=_safe_positive(self.derivative_step, 1e-4),
            admissibility_nodes_2d=_safe_int(self.admissibility_nodes_2d, 512, minimum=16),
            admissibility_nodes_1d=_safe_int(self.admissibility_nodes_1d, 256, minimum=16),
        )

    def nodes_for(self, dim_ambient: int) -> int:
        return self.admissibility_nodes_1d if dim_ambient == 2 else self.admissibility_nodes_2d


@dataclass
class OutputConfig:
    report_dir: Path = Path(os.environ.get("WULFFCAP_REPORT_DIR", "reports"))
    jobs: int = 1
    seed: int = field(default_factory=lambda: _safe_int(os.environ.get("WULFFCAP_SEED", DEFAULT_SEED), DEFAULT_SEED))

    def normalize(self) -> "OutputConfig":
        return OutputConfig(
            report_dir=_safe_path(self.report_dir, Path("reports")),
            jobs=_safe_int(self.jobs, 1, minimum=1, maximum=256),
            seed=_safe_int(self.seed, DEFAULT_SEED, minimum=0),
        )


# YAML section name -> dataclass, in file order.
SECTIONS: Dict[str, type] = {
    "tolerances": ToleranceConfig,
    "ladder": LadderConfig,
    "solver": SolverConfig,
    "norms": NormConfig,
    "output": OutputConfig,
}


@dataclass
class AppConfig:
    tolerances: ToleranceConfig = field(default_factory=ToleranceConfig)
    ladder: LadderConfig = field(default_factory=LadderConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    norms: NormConfig = field(default_factory=NormConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def normalize(self) -> "AppConfig":
        return AppConfig(**{key: getattr(self, key).normalize() for key in SECTIONS})


@dataclass
class RunConfig:
    """Everything needed to reproduce one CLI invocation; embedded in its report."""

    command: str
    target: str = ""
    parameters: Dict[str, Any] = field(default_factory=dict)
    levels: list[int] = field(default_factory=lambda: [3, 4, 5])
    level: int = 4
    tolerance_overrides: Dict[str, float] = field(default_factory=dict)
    report_path: str | None = None
    csv_dir: str | None = None
    seed: int = DEFAULT_SEED
    jobs: int = 1

    def to_payload(self) -> Dict[str, Any]:
        payload = asdict(self)
        payload["parameters"] = {k: payload["parameters"][k] for k in sorted(payload["parameters"])}
        payload["tolerance_overrides"] = {
            k: float(v) for k, v in sorted(payload["tolerance_overrides"].items())
        }
        return payload

    def tolerances(self, base: ToleranceConfig) -> ToleranceConfig:
        """Apply ``tolerance_overrides`` on top of the configured policy."""
        merged = asdict(base)
        for key, value in self.tolerance_overrides.items():
            if key in merged:
                merged[key] = value
        return ToleranceConfig(**merged).normalize()


def ensure_config_dir(path: Path = CONFIG_DIR) -> None:
    path.mkdir(parents=True, exist_ok=True)


def _load_yaml(path: Path) -> Dict[str, Any]:
    if not path.exists():
        return {}
    try:
        data = yaml.safe_load(path.read_text())
    except Exception:
        # Corrupted YAML should not stop a verification run; fall back to defaults.
        return {}
    return data if isinstance(data, dict) else {}


def _yaml_value(value: Any) -> Any:
    return str(value) if isinstance(value, Path) else value


def _to_payload(config: AppConfig) -> Dict[str, Any]:
    return {
        key: {name: _yaml_value(value) for name, value in asdict(getattr(config, key)).items()}
        for key in SECTIONS
    }


def _section(data: Dict[str, Any], key: str) -> Dict[str, Any]:
    value = data.get(key, {})
    return value if isinstance(value, dict) else {}


def _merge_config(data: Dict[str, Any]) -> AppConfig:
    """Known keys of each section override the defaults; ``normalize`` repairs their types."""
    defaults = AppConfig()
    sections = {}
    for key, section_cls in SECTIONS.items():
        raw, base = _section(data, key), getattr(defaults, key)
        sections[key] = section_cls(**{f.name: raw.get(f.name, getattr(base, f.name)) for f in fields(section_cls)})
    return AppConfig(**sections).normalize()


def load_config(path: Path | None = None) -> AppConfig:
    target = path or CONFIG_FILE
    ensure_config_dir(target.parent)
    data = _load_yaml(target)
    config = _merge_config(data)
    save_config(config, target)
    return config


def save_config(config: AppConfig, path: Path | None = None) -> None:
    payload = _to_payload(config.normalize())
    target = path or CONFIG_FILE
    ensure_config_dir(target.parent)

    current = _load_yaml(target)
    if current == payload:
        return

    tmp = target.with_suffix(".tmp")
    tmp.write_text(yaml.safe_dump(payload, sort_keys=False, allow_unicode=False))
    tmp.replace(target)
