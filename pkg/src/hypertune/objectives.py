"""Objective registry: built-in benchmark landscapes and external processes.

Built-ins are pure functions of the lattice point, so runs are reproducible
bit for bit.  External objectives delegate each evaluation to a child process
speaking newline-delimited JSON on stdin/stdout:

    request   {"id": 7, "params": {"m": 3, "n": 140, "k": 3}}
    response  {"id": 7, "score": -0.25}
           or {"id": 7, "error": "out of memory"}

One request is in flight at a time per child; the child receives
``{"cmd": "shutdown"}`` when the run ends.  Any protocol violation (timeout,
malformed line, mismatched id, early exit) raises an :class:`EvaluationError`
subclass, which the optimizer failure policy consumes.
"""

from __future__ import annotations

import json
import math
import os
import queue
import shlex
import subprocess
import threading
from dataclasses import dataclass

import numpy as np

from .space import ParamPoint, SearchSpace, default_space

BUILTIN_IDS = ("sphere", "rastrigin_discrete", "gan_proxy")


class EvaluationError(Exception):
    """An objective evaluation failed; the optimizer may retry elsewhere."""


class ObjectiveTimeoutError(EvaluationError):
    pass


class ProtocolError(EvaluationError):
    pass


class ObjectiveProcessError(EvaluationError):
    pass


@dataclass(frozen=True)
class ObjectiveSpec:
    """A scored black box: a built-in function id or an external command.

    ``negate`` flips the sign of raw scores so that quantities natively
    expressed as losses fit the internal maximize orientation.
    """

    kind: str  # "builtin" | "external"
    builtin_id: str | None = None
    command: tuple[str, ...] | None = None
    negate: bool = False
    timeout: float = 600.0

    def __post_init__(self):
        if self.kind == "builtin":
            if not self.builtin_id or self.command is not None:
                raise ValueError("builtin objective needs builtin_id and no command")
            if self.builtin_id not in BUILTIN_IDS:
                raise ValueError(
                    f"unknown builtin {self.builtin_id!r}; choose from {BUILTIN_IDS}"
                )
        elif self.kind == "external":
            if not self.command or self.builtin_id is not None:
                raise ValueError("external objective needs command and no builtin_id")
            if self.timeout <= 0:
                raise ValueError("timeout must be positive")
        else:
            raise ValueError(f"unknown objective kind {self.kind!r}")

    @property
    def objective_id(self) -> str:
        if self.kind == "builtin":
            return self.builtin_id  # type: ignore[return-value]
        return "external:" + os.path.basename(self.command[0])


# --- built-in landscapes ---------------------------------------------------

PROXY_PEAK: ParamPoint = (3, 140, 3)

# Quadratic bowl coefficients and ripple amplitude.  The smallest score gap
# between adjacent lattice levels along any axis is min(a, b, c) = 0.5, and
# the ripple amplitude 0.1 is below half that gap, so the landscape is
# strictly coordinate-monotone toward the peak and the argmax is unique.
_PROXY_A = 1.0
_PROXY_B = 0.5
_PROXY_C = 1.0
_PROXY_RIPPLE = 0.1


def gan_proxy(point: ParamPoint) -> float:
    """Deterministic stand-in landscape on the (m, n, k) lattice.

    A concave quadratic peaked at (3, 140, 3) plus a small sinusoidal ripple;
    the global argmax is unique by construction, giving optimizer tests a
    known ground truth.
    """
    if not default_space().validate(point):
        raise ValueError(f"point {tuple(point)} is off the (m, n, k) lattice")
    m, n, k = point
    u = (n - 140) / 4.0
    quad = (
        -_PROXY_A * (m - 3) ** 2 - _PROXY_B * u**2 - _PROXY_C * (k - 3) ** 2
    )
    ripple = _PROXY_RIPPLE * math.sin(1.3 * m + 0.7 * (n / 4.0) + 2.1 * k)
    return quad + ripple


def sphere(space: SearchSpace, point: ParamPoint) -> float:
    """Negative squared distance from the center of the normalized cube."""
    x = space.normalize(point)
    return -float(((x - 0.5) ** 2).sum())


def rastrigin_discrete(space: SearchSpace, point: ParamPoint) -> float:
    """Negated Rastrigin on the lattice mapped to [-5.12, 5.12]^d."""
    x = (space.normalize(point) * 2.0 - 1.0) * 5.12
    value = 10.0 * x.size + float(np.sum(x**2 - 10.0 * np.cos(2.0 * math.pi * x)))
    return -value


BUILTINS = {
    "sphere": sphere,
    "rastrigin_discrete": rastrigin_discrete,
    "gan_proxy": lambda space, point: gan_proxy(point),
}


# --- runtime objective handles ---------------------------------------------


class Objective:
    """A live, closeable objective bound to one search space."""

    def __init__(self, spec: ObjectiveSpec, space: SearchSpace):
        self.spec = spec
        self.space = space

    @property
    def objective_id(self) -> str:
        return self.spec.objective_id

    def evaluate(self, point: ParamPoint) -> float:
        raise NotImplementedError

    def close(self) -> None:
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class BuiltinObjective(Objective):
    def __init__(self, spec: ObjectiveSpec, space: SearchSpace):
        super().__init__(spec, space)
        self._fn = BUILTINS[spec.builtin_id]

    def evaluate(self, point: ParamPoint) -> float:
        score = self._fn(self.space, tuple(point))
        return -score if self.spec.negate else score


class ExternalObjective(Objective):
    """Child-process objective over the line-oriented JSON protocol.

    The handle is exclusive: one request outstanding at a time.  A timeout or
    protocol violation leaves the channel desynchronized, so the child is
    terminated and subsequent calls fail fast; a well-formed ``error``
    response keeps the child alive and only fails the current evaluation.
    """

    def __init__(self, spec: ObjectiveSpec, space: SearchSpace):
        super().__init__(spec, space)
        command = list(spec.command)
        self._proc = subprocess.Popen(
            command,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )
        self._lines: queue.Queue[str | None] = queue.Queue()
        self._reader = threading.Thread(target=self._drain, daemon=True)
        self._reader.start()
        self._next_id = 0
        self._broken = False

    def _drain(self) -> None:
        assert self._proc.stdout is not None
        for line in self._proc.stdout:
            self._lines.put(line)
        self._lines.put(None)  # EOF sentinel

    def _abandon(self) -> None:
        self._broken = True
        if self._proc.poll() is None:
            self._proc.kill()
            self._proc.wait()

    def evaluate(self, point: ParamPoint) -> float:
        if self._broken or self._proc.poll() is not None:
            raise ObjectiveProcessError("objective process is not running")
        self._next_id += 1
        request = {"id": self._next_id, "params": self.space.point_as_dict(point)}
        try:
            self._proc.stdin.write(json.dumps(request, separators=(",", ":")) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            self._abandon()
            raise ObjectiveProcessError(f"objective process closed stdin: {exc}")

        try:
            line = self._lines.get(timeout=self.spec.timeout)
        except queue.Empty:
            self._abandon()
            raise ObjectiveTimeoutError(
                f"no response within {self.spec.timeout:g}s for id {self._next_id}"
            )
        if line is None:
            self._abandon()
            raise ObjectiveProcessError("objective process exited before responding")

        try:
            response = json.loads(line)
        except json.JSONDecodeError as exc:
            self._abandon()
            raise ProtocolError(f"malformed response line: {exc}")
        if not isinstance(response, dict) or "id" not in response:
            self._abandon()
            raise ProtocolError(f"response missing id: {line.strip()!r}")
        if response["id"] != self._next_id:
            self._abandon()
            raise ProtocolError(
                f"response id {response['id']} does not match request id "
                f"{self._next_id}"
            )
        if "error" in response:
            # Child answered properly; the channel stays usable.
            raise EvaluationError(str(response["error"]))
        try:
            score = float(response["score"])
        except (KeyError, TypeError, ValueError):
            self._abandon()
            raise ProtocolError(f"response carries no usable score: {line.strip()!r}")
        if not math.isfinite(score):
            raise EvaluationError(f"non-finite score {score!r}")
        return -score if self.spec.negate else score

    def close(self) -> None:
        if self._proc.poll() is None and not self._broken:
            try:
                self._proc.stdin.write('{"cmd":"shutdown"}\n')
                self._proc.stdin.flush()
                self._proc.stdin.close()
            except (BrokenPipeError, OSError):
                pass
            try:
                self._proc.wait(timeout=10.0)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()
        elif self._proc.poll() is None:
            self._abandon()


def make_objective(spec: ObjectiveSpec, space: SearchSpace) -> Objective:
    if spec.kind == "builtin":
        return BuiltinObjective(spec, space)
    return ExternalObjective(spec, space)


def parse_command(command: str | list[str] | tuple[str, ...]) -> tuple[str, ...]:
    """Accept either a shell-style string or an argv list."""
    if isinstance(command, str):
        return tuple(shlex.split(command))
    return tuple(command)


def evaluate(spec: ObjectiveSpec, space: SearchSpace, point: ParamPoint) -> float:
    """One-shot evaluation; external objectives spawn a child just for it."""
    with make_objective(spec, space) as objective:
        return objective.evaluate(point)
