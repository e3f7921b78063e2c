"""Experiment configuration: a JSON-serializable dataclass mirroring the
run parameters of the figure reproductions, with validation and hashing."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from .errors import ConfigError
from .fock import CoherentParams, FockDim, HihoParams, coherent_tail, TAIL_TOL
from .husimi import PhaseGrid


@dataclass(frozen=True)
class LabeledPoint:
    label: str
    q: float
    p: float


@dataclass(frozen=True)
class FitSpec:
    """Either a fixed window (t_lo, t_hi) or an auto window search."""

    window: tuple[float, float] | None = None
    auto: bool = False
    min_span: float = 0.08
    search: tuple[float, float] | None = None


@dataclass(frozen=True)
class HusimiSpec:
    grid: PhaseGrid
    snapshot_times: tuple[float, ...]


@dataclass(frozen=True)
class ExperimentConfig:
    system: str  # "iho" | "hiho"
    n_p: tuple[int, ...]
    points: tuple[LabeledPoint, ...]
    t_end: float
    n_samples: int
    gamma: float | None = None
    g: float | None = None
    dt: float = 1e-3
    husimi: HusimiSpec | None = None
    fit: FitSpec | None = None
    output_dir: str | None = None

    def hiho_params(self) -> HihoParams:
        return HihoParams(self.gamma, self.g)

    def validate(self):
        if self.system not in ("iho", "hiho"):
            raise ConfigError(f"unknown system {self.system!r}")
        if self.system == "hiho":
            if self.gamma is None or self.g is None:
                raise ConfigError("hiho requires gamma and g")
            if self.gamma <= 0 or self.g <= 0:
                raise ConfigError("gamma and g must be positive")
        if not self.n_p or any(k < 1 for k in self.n_p):
            raise ConfigError("n_p entries must be >= 1")
        if not self.points:
            raise ConfigError("at least one initial point is required")
        if self.t_end <= 0:
            raise ConfigError("t_end must be positive")
        if self.n_samples < 2:
            raise ConfigError("n_samples must be >= 2")
        if self.dt <= 0:
            raise ConfigError("dt must be positive")
        for k in self.n_p:
            dim = FockDim(k)
            for pt in self.points:
                mu = abs(CoherentParams(pt.q, pt.p).beta) ** 2
                if coherent_tail(mu, dim) >= TAIL_TOL:
                    raise ConfigError(
                        f"point {pt.label} ({pt.q}, {pt.p}) violates the coherent "
                        f"tail precondition at n_p={k}"
                    )


def config_to_dict(cfg: ExperimentConfig) -> dict:
    d = {
        "system": cfg.system,
        "n_p": list(cfg.n_p),
        "points": [{"label": p.label, "q": p.q, "p": p.p} for p in cfg.points],
        "t_end": cfg.t_end,
        "n_samples": cfg.n_samples,
        "dt": cfg.dt,
    }
    if cfg.gamma is not None:
        d["gamma"] = cfg.gamma
    if cfg.g is not None:
        d["g"] = cfg.g
    if cfg.husimi is not None:
        g = cfg.husimi.grid
        d["husimi"] = {
            "q_min": g.q_min,
            "q_max": g.q_max,
            "p_min": g.p_min,
            "p_max": g.p_max,
            "n_q": g.n_q,
            "n_p": g.n_p,
            "snapshot_times": list(cfg.husimi.snapshot_times),
        }
    if cfg.fit is not None:
        if cfg.fit.auto:
            f = {"window": "auto", "min_span": cfg.fit.min_span}
            if cfg.fit.search is not None:
                f["search"] = list(cfg.fit.search)
        else:
            f = {"window": list(cfg.fit.window)}
        d["fit"] = f
    if cfg.output_dir is not None:
        d["output_dir"] = cfg.output_dir
    return d


def config_from_dict(d: dict) -> ExperimentConfig:
    try:
        husimi = None
        if "husimi" in d:
            h = d["husimi"]
            husimi = HusimiSpec(
                grid=PhaseGrid(
                    q_min=h["q_min"],
                    q_max=h["q_max"],
                    p_min=h["p_min"],
                    p_max=h["p_max"],
                    n_q=h["n_q"],
                    n_p=h["n_p"],
                ),
                snapshot_times=tuple(h["snapshot_times"]),
            )
        fit = None
        if "fit" in d:
            f = d["fit"]
            if f.get("window") == "auto":
                fit = FitSpec(
                    auto=True,
                    min_span=f.get("min_span", 0.08),
                    search=tuple(f["search"]) if "search" in f else None,
                )
            else:
                fit = FitSpec(window=tuple(f["window"]))
        return ExperimentConfig(
            system=d["system"],
            n_p=tuple(d["n_p"]),
            points=tuple(
                LabeledPoint(label=p["label"], q=p["q"], p=p["p"])
                for p in d["points"]
            ),
            t_end=d["t_end"],
            n_samples=d["n_samples"],
            gamma=d.get("gamma"),
            g=d.get("g"),
            dt=d.get("dt", 1e-3),
            husimi=husimi,
            fit=fit,
            output_dir=d.get("output_dir"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed config: {exc}") from exc


def serialize(cfg: ExperimentConfig) -> str:
    return json.dumps(config_to_dict(cfg), sort_keys=True, indent=2) + "\n"


def parse(text: str) -> ExperimentConfig:
    try:
        return config_from_dict(json.loads(text))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc


def load(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        cfg = parse(fh.read())
    cfg.validate()
    return cfg


def config_hash(cfg: ExperimentConfig) -> str:
    canon = json.dumps(config_to_dict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()
