"""Run configuration: a YAML file plus command-line overrides.

The file is a single human-editable document with nested sections; the
effective configuration is always persisted alongside run artifacts as JSON
(``config.resolved``) so runs can be replayed and compared across tools.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import yaml

from .acquisition import PI, UCB, AcquisitionConfig
from .baselines import CobylaConfig, PsoConfig
from .bo import BoConfig
from .gp import KernelConfig
from .objectives import ObjectiveSpec, parse_command
from .space import SearchSpace, default_space

OPTIMIZERS = ("bo", "cobyla", "pso", "random")


class ConfigError(Exception):
    """Invalid run configuration; the message names the offending field."""


@dataclass(frozen=True)
class RunConfig:
    space: SearchSpace
    objective: ObjectiveSpec
    optimizer: str = "bo"
    seed: int = 42
    max_evals: int = 50
    output_dir: str = "runs"
    bo: BoConfig = field(default_factory=BoConfig)
    cobyla: CobylaConfig = field(default_factory=CobylaConfig)
    pso: PsoConfig = field(default_factory=PsoConfig)

    def __post_init__(self):
        if self.optimizer not in OPTIMIZERS:
            raise ConfigError(
                f"optimizer: unknown value {self.optimizer!r}; choose from {OPTIMIZERS}"
            )
        if self.max_evals < 1:
            raise ConfigError("max_evals: must be positive")

    def effective(self) -> "RunConfig":
        """Push the top-level seed and budget into the optimizer blocks."""
        return replace(
            self,
            bo=replace(self.bo, seed=self.seed, max_iterations=self.max_evals),
            cobyla=replace(self.cobyla, seed=self.seed, max_evals=self.max_evals),
            pso=replace(self.pso, seed=self.seed),
        )


def default_config() -> RunConfig:
    """The shipped default: BO with UCB on the proxy landscape, seed 42."""
    return RunConfig(space=default_space(), objective=ObjectiveSpec("builtin", "gan_proxy"))


def _section(data: dict, key: str) -> dict:
    value = data.get(key, {})
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"{key}: expected a mapping, got {type(value).__name__}")
    return value


def _build_space(data: dict) -> SearchSpace:
    if "space" not in data:
        return default_space()
    entries = data["space"]
    if not isinstance(entries, list) or not entries:
        raise ConfigError("space: expected a non-empty list of parameter entries")
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict):
            raise ConfigError(f"space[{i}]: expected a mapping")
        for required in ("name", "lower", "upper"):
            if required not in entry:
                raise ConfigError(f"space[{i}]: missing field {required!r}")
    try:
        return SearchSpace.from_json(entries)
    except ValueError as exc:
        raise ConfigError(f"space: {exc}")


def _build_objective(data: dict) -> ObjectiveSpec:
    section = _section(data, "objective")
    if not section:
        return ObjectiveSpec("builtin", "gan_proxy")
    kind = section.get("kind", "builtin")
    try:
        if kind == "external":
            if "command" not in section:
                raise ConfigError("objective.command: missing for external objective")
            return ObjectiveSpec(
                kind="external",
                command=parse_command(section["command"]),
                negate=bool(section.get("negate", False)),
                timeout=float(section.get("timeout", 600.0)),
            )
        return ObjectiveSpec(
            kind=kind,
            builtin_id=section.get("builtin_id"),
            negate=bool(section.get("negate", False)),
        )
    except ValueError as exc:
        raise ConfigError(f"objective: {exc}")


def _build_kernel(section: dict) -> KernelConfig:
    ls = section.get("length_scale", 0.2)
    if isinstance(ls, list):
        ls = tuple(float(v) for v in ls)
    else:
        ls = float(ls)
    try:
        return KernelConfig(
            signal_variance=float(section.get("signal_variance", 1.0)),
            length_scale=ls,
            noise_variance=float(section.get("noise_variance", 1e-6)),
            jitter=float(section.get("jitter", 1e-9)),
        )
    except ValueError as exc:
        raise ConfigError(f"bo.kernel: {exc}")


def _build_acquisition(section: dict) -> AcquisitionConfig:
    kind = section.get("kind", UCB)
    if kind not in (UCB, PI):
        raise ConfigError(f"acquisition.kind: unknown value {kind!r}")
    return AcquisitionConfig(kind=kind, lam=float(section.get("lambda", 1.0)))


def _build_bo(data: dict) -> BoConfig:
    section = _section(data, "bo")
    try:
        return BoConfig(
            n_initial=int(section.get("n_initial", 3)),
            refit_period=int(section.get("refit_period", 5)),
            allow_revisit=bool(section.get("allow_revisit", False)),
            kernel=_build_kernel(_section(section, "kernel")),
            acquisition=_build_acquisition(_section(section, "acquisition")),
        )
    except ValueError as exc:
        raise ConfigError(f"bo: {exc}")


def _build_cobyla(data: dict) -> CobylaConfig:
    section = _section(data, "cobyla")
    try:
        return CobylaConfig(
            rho_begin=float(section.get("rho_begin", 0.25)),
            rho_end=float(section.get("rho_end", 0.02)),
        )
    except ValueError as exc:
        raise ConfigError(f"cobyla: {exc}")


def _build_pso(data: dict) -> PsoConfig:
    section = _section(data, "pso")
    try:
        return PsoConfig(
            n_particles=int(section.get("n_particles", 8)),
            inertia=float(section.get("inertia", 0.729)),
            cognitive=float(section.get("cognitive", 1.49445)),
            social=float(section.get("social", 1.49445)),
            max_iters=int(section.get("max_iters", 25)),
            v_max=float(section.get("v_max", 0.25)),
        )
    except ValueError as exc:
        raise ConfigError(f"pso: {exc}")


def parse_config(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("top level: expected a mapping")
    return RunConfig(
        space=_build_space(data),
        objective=_build_objective(data),
        optimizer=str(data.get("optimizer", "bo")),
        seed=int(data.get("seed", 42)),
        max_evals=int(data.get("max_evals", 50)),
        output_dir=str(data.get("output_dir", "runs")),
        bo=_build_bo(data),
        cobyla=_build_cobyla(data),
        pso=_build_pso(data),
    )


def load_config(path: str | Path | None, overrides: dict | None = None) -> RunConfig:
    """Load a YAML config file (or the defaults) and apply CLI overrides."""
    if path is None:
        data: dict = {}
    else:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}")
        try:
            data = yaml.safe_load(text) or {}
        except yaml.YAMLError as exc:
            # YAML errors carry line/column marks; keep them in the message.
            raise ConfigError(f"config parse error: {exc}")
    cfg = parse_config(data)
    if overrides:
        cfg = apply_overrides(cfg, overrides)
    return cfg


def apply_overrides(cfg: RunConfig, overrides: dict) -> RunConfig:
    """CLI flags take precedence over the file."""
    fields = {}
    for key in ("optimizer", "seed", "max_evals", "output_dir"):
        if overrides.get(key) is not None:
            fields[key] = overrides[key]
    if fields:
        cfg = replace(cfg, **fields)
    if overrides.get("acquisition") is not None or overrides.get("lam") is not None:
        acq = cfg.bo.acquisition
        if overrides.get("acquisition") is not None:
            kind = overrides["acquisition"]
            if kind not in (UCB, PI):
                raise ConfigError(f"--acquisition: unknown value {kind!r}")
            acq = replace(acq, kind=kind)
        if overrides.get("lam") is not None:
            acq = replace(acq, lam=float(overrides["lam"]))
        cfg = replace(cfg, bo=replace(cfg.bo, acquisition=acq))
    return cfg


def resolved_dict(cfg: RunConfig) -> dict:
    """The full effective configuration as a JSON-ready dictionary."""
    eff = cfg.effective()
    kernel = eff.bo.kernel
    return {
        "space": eff.space.to_json(),
        "objective": {
            "kind": eff.objective.kind,
            "builtin_id": eff.objective.builtin_id,
            "command": list(eff.objective.command) if eff.objective.command else None,
            "negate": eff.objective.negate,
            "timeout": eff.objective.timeout,
        },
        "optimizer": eff.optimizer,
        "seed": eff.seed,
        "max_evals": eff.max_evals,
        "output_dir": eff.output_dir,
        "bo": {
            "n_initial": eff.bo.n_initial,
            "refit_period": eff.bo.refit_period,
            "allow_revisit": eff.bo.allow_revisit,
            "kernel": {
                "signal_variance": kernel.signal_variance,
                "length_scale": list(kernel.length_scale)
                if isinstance(kernel.length_scale, tuple)
                else kernel.length_scale,
                "noise_variance": kernel.noise_variance,
                "jitter": kernel.jitter,
            },
            "acquisition": {
                "kind": eff.bo.acquisition.kind,
                "lambda": eff.bo.acquisition.lam,
            },
        },
        "cobyla": {
            "rho_begin": eff.cobyla.rho_begin,
            "rho_end": eff.cobyla.rho_end,
        },
        "pso": {
            "n_particles": eff.pso.n_particles,
            "inertia": eff.pso.inertia,
            "cognitive": eff.pso.cognitive,
            "social": eff.pso.social,
            "max_iters": eff.pso.max_iters,
            "v_max": eff.pso.v_max,
        },
    }


def config_from_resolved(data: dict) -> RunConfig:
    """Rebuild a RunConfig from a persisted ``config.resolved`` document."""
    objective = data["objective"]
    spec = (
        ObjectiveSpec(
            kind="external",
            command=tuple(objective["command"]),
            negate=objective["negate"],
            timeout=objective["timeout"],
        )
        if objective["kind"] == "external"
        else ObjectiveSpec(
            kind="builtin",
            builtin_id=objective["builtin_id"],
            negate=objective["negate"],
        )
    )
    bo = data["bo"]
    kernel = bo["kernel"]
    ls = kernel["length_scale"]
    return RunConfig(
        space=SearchSpace.from_json(data["space"]),
        objective=spec,
        optimizer=data["optimizer"],
        seed=data["seed"],
        max_evals=data["max_evals"],
        output_dir=data["output_dir"],
        bo=BoConfig(
            n_initial=bo["n_initial"],
            refit_period=bo["refit_period"],
            allow_revisit=bo["allow_revisit"],
            kernel=KernelConfig(
                signal_variance=kernel["signal_variance"],
                length_scale=tuple(ls) if isinstance(ls, list) else ls,
                noise_variance=kernel["noise_variance"],
                jitter=kernel["jitter"],
            ),
            acquisition=AcquisitionConfig(
                kind=bo["acquisition"]["kind"], lam=bo["acquisition"]["lambda"]
            ),
        ),
        cobyla=CobylaConfig(
            rho_begin=data["cobyla"]["rho_begin"],
            rho_end=data["cobyla"]["rho_end"],
        ),
        pso=PsoConfig(
            n_particles=data["pso"]["n_particles"],
            inertia=data["pso"]["inertia"],
            cognitive=data["pso"]["cognitive"],
            social=data["pso"]["social"],
            max_iters=data["pso"]["max_iters"],
            v_max=data["pso"]["v_max"],
        ),
    )
