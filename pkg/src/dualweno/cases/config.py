"""Run configuration: JSON schema, defaults per case and validation."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from dualweno.boundary import BoundaryConditions, Periodic, parse_kind
from dualweno.errors import ConfigurationError
from dualweno.reconstruction import SchemeVariant

SCHEMA_VERSION = 1
CASE_IDS = ("conv1d", "diff1d", "blob", "buoyancy")
CASE_ALIASES = {"buoyancy-desk": ("buoyancy", "desk"), "buoyancy-paper": ("buoyancy", "paper")}
DEFAULT_SWEEP = (10, 20, 40, 80, 160, 320, 640)
BLOB_SWEEP = (40, 80, 160, 320)
# buoyancy coefficient giving a growth rate of about 0.478 per unit time on the desk preset
DESK_RI = 0.6


@dataclass
class DisturbanceSpec:
    """Uniform random temperature perturbation added once at ``t_inject``.

    One value is drawn per block of a ``cells = [mx, mz]`` lattice (the base
    grid when unset) and copied onto every fine cell inside the block, so
    runs that differ only in refinement factor see the same perturbation.
    """

    t_inject: float = 11.0
    amplitude: float = 0.02
    seed: int = 20240611
    file: str | None = None
    cells: list[int] | None = None


@dataclass
class OutputPlan:
    """What a run writes besides its summary.

    ``interval`` is the spacing of time-series samples and snapshots;
    ``profiles`` are line specs such as ``"z=4.5"`` or ``"x=1.3"``.
    """

    interval: float = 0.5
    snapshots: bool = True
    profiles: list[str] = field(default_factory=list)


@dataclass
class CaseConfig:
    """Everything needed to reproduce one run."""

    case: str
    preset: str | None = None
    variant: str = "weno5-loc"
    epsilon: float = 1e-6
    power: int | None = None
    delta: float | None = None
    sizes: list[int] | None = None
    nx: int | None = None
    nz: int | None = None
    refine: int = 1
    domain: list[float] | None = None
    re: float = 100.0
    sc: float = 500.0
    pr: float = 6.0
    ri: float = 0.74
    cfl: float = 0.4
    dt_cap: float | None = None
    dt_mode: str = "auto"
    dt_fixed: float | None = None
    end_time: float | None = None
    plume_depth: float = 4.0
    plume_threshold: float = 0.5
    poisson_tol: float = 1e-10
    disturbance: DisturbanceSpec = field(default_factory=DisturbanceSpec)
    output: OutputPlan = field(default_factory=OutputPlan)
    bcs: dict | None = None
    schema_version: int = SCHEMA_VERSION

    @property
    def scalar_diffusivity(self) -> float:
        return 1.0 / (self.re * self.sc)

    @property
    def thermal_diffusivity(self) -> float:
        return 1.0 / (self.re * self.pr)

    def scheme(self) -> SchemeVariant:
        return SchemeVariant.from_name(self.variant, self.epsilon, self.power)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def with_updates(self, **changes) -> CaseConfig:
        return replace(self, **changes)


def _check_keys(doc: dict, cls, path: str) -> None:
    allowed = {f.name for f in fields(cls)}
    unknown = sorted(set(doc) - allowed)
    if unknown:
        where = f" in {path}" if path else ""
        raise ConfigurationError(f"unknown keys{where}: {', '.join(unknown)}")


def _positive(cfg: CaseConfig, names) -> None:
    for name in names:
        value = getattr(cfg, name)
        if value is not None and not value > 0:
            raise ConfigurationError(f"{name}: must be > 0, got {value}")


def case_defaults(case: str, preset: str | None) -> dict:
    """Values filled in when the document leaves them out."""
    if case == "conv1d":
        return dict(delta=0.0, sizes=list(DEFAULT_SWEEP), domain=[0.0, 2.0], end_time=1.0)
    if case == "diff1d":
        return dict(delta=3.0, sizes=list(DEFAULT_SWEEP), domain=[0.0, 5.0], end_time=1.0)
    if case == "blob":
        return dict(delta=0.0, sizes=list(BLOB_SWEEP), domain=[0.0, 5.0, 0.0, 5.0], end_time=2.0, cfl=0.1)
    if preset == "paper":
        return dict(delta=3.0, nx=400, nz=256, refine=3, sc=500.0, domain=[0.0, 5.0, 0.0, 5.0], end_time=45.0)
    return dict(delta=2.5, nx=128, nz=128, refine=2, sc=50.0, ri=DESK_RI, domain=[0.0, 5.0, 0.0, 5.0],
                end_time=34.0)


def default_bcs(case: str) -> dict:
    if case == "blob":
        return {
            "velocity": {"left": "periodic", "right": "periodic", "bottom": "free-slip", "top": "free-slip"},
            "phi": {"left": "periodic", "right": "periodic", "bottom": "neumann", "top": "neumann"},
        }
    if case == "buoyancy":
        return {
            "velocity": {"left": "periodic", "right": "periodic", "bottom": "free-slip", "top": "free-slip"},
            "T": {"left": "periodic", "right": "periodic", "bottom": "neumann", "top": {"dirichlet": 0.0}},
            "phi": {"left": "periodic", "right": "periodic", "bottom": "neumann", "top": {"dirichlet": 1.0}},
        }
    return {}


def boundary_conditions(cfg: CaseConfig, name: str) -> BoundaryConditions:
    spec = (cfg.bcs or {}).get(name)
    if spec is None:
        raise ConfigurationError(f"bcs.{name}: not defined for case {cfg.case}")
    return BoundaryConditions.from_dict(spec)


def _validate_bcs(cfg: CaseConfig) -> None:
    reference = default_bcs(cfg.case)
    for name, sides in (cfg.bcs or {}).items():
        if name not in reference:
            raise ConfigurationError(f"bcs.{name}: unknown field for case {cfg.case}")
        if not isinstance(sides, dict):
            raise ConfigurationError(f"bcs.{name}: expected an object")
        for side, kind in sides.items():
            path = f"bcs.{name}.{side}"
            if side not in reference[name]:
                raise ConfigurationError(f"{path}: unknown side")
            try:
                parsed = parse_kind(kind)
            except ConfigurationError as exc:
                raise ConfigurationError(f"{path}: {exc}") from None
            expected = parse_kind(reference[name][side])
            if isinstance(expected, Periodic) != isinstance(parsed, Periodic):
                if isinstance(expected, Periodic):
                    raise ConfigurationError(f"{path}: {parsed} on a periodic side")
                raise ConfigurationError(f"{path}: periodic not supported on a bounded side")
            if name == "velocity" and not isinstance(parsed, Periodic) and str(parsed) != "free-slip":
                raise ConfigurationError(f"{path}: velocity walls must be free-slip")
        try:
            BoundaryConditions.from_dict({**reference[name], **sides})
        except ConfigurationError as exc:
            raise ConfigurationError(f"bcs.{name}: {exc}") from None


def config_from_dict(doc: dict) -> CaseConfig:
    """Validate a JSON document and fill in per-case defaults."""
    if not isinstance(doc, dict):
        raise ConfigurationError("configuration must be a JSON object")
    _check_keys(doc, CaseConfig, "")
    doc = dict(doc)
    version = doc.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigurationError(f"schema_version: unsupported version {version}")
    if "case" not in doc:
        raise ConfigurationError("case: required")
    case = doc["case"]
    preset = doc.get("preset")
    if case in CASE_ALIASES:
        case, preset = CASE_ALIASES[case]
    if case not in CASE_IDS:
        raise ConfigurationError(f"case: unknown case {case!r}; expected one of {list(CASE_IDS) + list(CASE_ALIASES)}")
    if case == "buoyancy" and preset is None:
        preset = "desk"
    if preset not in (None, "desk", "paper"):
        raise ConfigurationError(f"preset: unknown preset {preset!r}")
    doc["case"] = case
    doc["preset"] = preset

    nested = {}
    for key, cls in (("disturbance", DisturbanceSpec), ("output", OutputPlan)):
        sub = doc.pop(key, {}) or {}
        if isinstance(sub, (DisturbanceSpec, OutputPlan)):
            sub = asdict(sub)
        if not isinstance(sub, dict):
            raise ConfigurationError(f"{key}: expected an object")
        _check_keys(sub, cls, key)
        nested[key] = cls(**sub)

    merged = case_defaults(case, preset)
    merged.update({k: v for k, v in doc.items() if v is not None})
    bcs = default_bcs(case)
    for name, sides in (doc.get("bcs") or {}).items():
        bcs[name] = {**bcs.get(name, {}), **(sides if isinstance(sides, dict) else {})}
    cfg = CaseConfig(**{**merged, **nested, "bcs": None})
    cfg.bcs = doc.get("bcs") or None
    _validate_bcs(cfg)
    cfg.bcs = bcs or None
    validate(cfg)
    return cfg


def validate(cfg: CaseConfig) -> None:
    _positive(cfg, ("re", "sc", "pr", "ri", "cfl", "epsilon", "end_time", "dt_cap", "dt_fixed", "poisson_tol"))
    if cfg.delta is not None and not cfg.delta >= 0:
        raise ConfigurationError(f"delta: must be >= 0, got {cfg.delta}")
    if cfg.cfl > 1:
        raise ConfigurationError(f"cfl: must be <= 1, got {cfg.cfl}")
    if cfg.dt_mode not in ("auto", "fixed"):
        raise ConfigurationError(f"dt_mode: expected 'auto' or 'fixed', got {cfg.dt_mode!r}")
    if cfg.dt_mode == "fixed" and cfg.dt_fixed is None:
        raise ConfigurationError("dt_fixed: required when dt_mode is 'fixed'")
    try:
        cfg.scheme()
    except ConfigurationError as exc:
        raise ConfigurationError(f"variant: {exc}") from None
    if cfg.sizes is not None and any(int(n) < 4 for n in cfg.sizes):
        raise ConfigurationError("sizes: every mesh needs at least 4 cells")
    for name in ("nx", "nz"):
        value = getattr(cfg, name)
        if value is not None and value < 4:
            raise ConfigurationError(f"{name}: must be >= 4, got {value}")
    if cfg.refine not in (1, 2, 3, 4, 5):
        raise ConfigurationError(f"refine: must be one of 1..5, got {cfg.refine}")
    if cfg.disturbance.amplitude < 0:
        raise ConfigurationError("disturbance.amplitude: must be >= 0")
    cells = cfg.disturbance.cells
    if cells is not None and (len(cells) != 2 or any(int(c) < 1 for c in cells)):
        raise ConfigurationError(f"disturbance.cells: expected [mx, mz] with positive entries, got {cells}")
    if cfg.output.interval <= 0:
        raise ConfigurationError("output.interval: must be > 0")
    if cfg.domain is not None:
        d = cfg.domain
        if len(d) not in (2, 4) or any(not d[i] < d[i + 1] for i in range(0, len(d), 2)):
            raise ConfigurationError(f"domain: expected [x0, x1] or [x0, x1, z0, z1] with x0 < x1, got {d}")


def parse_config(path) -> CaseConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"configuration file not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: invalid JSON ({exc})") from None
    return config_from_dict(doc)


def emit_config(cfg: CaseConfig, path=None) -> str:
    text = cfg.to_json()
    if path is not None:
        Path(path).write_text(text + "\n")
    return text
