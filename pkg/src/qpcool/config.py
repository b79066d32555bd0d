"""Scenario configuration: flat key = value files.

Grammar: one ``key = value`` pair per line; blank lines and lines whose
first non-space character is ``#`` are ignored.  Values are typed by
key: integers, floats, enumerated strings, or comma-separated lists for
the sweep axes.  Unknown keys are parse errors; engine/setup
incompatibilities are validation errors.

Example::

    name = fig2a
    J = 0.1
    g = 0.2
    n_sites = 20
    setup = edge
    engine = both
    pulses = scp:4:0.3, mcp:28:9.333333333333334
    theta = 0.02
    cycles = 750000
    samples = 120

A pulse spec is ``scp:T:h`` or ``mcp:T:beta``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

from .errors import ParseError, ValidationError
from .pulses import Pulse, make_mcp, make_scp
from .spectrum import ModelParams

ENGINES = ("kinetic", "gaussian", "oracle", "scaling", "both")
SETUPS = ("edge", "bulk")

_STANDARD_POINTS = {"pm": (0.1, 0.2), "afm": (0.2, 0.1)}


@dataclass
class PulseSpec:
    kind: str
    T: int
    param: float  # h for scp, beta for mcp

    def build(self) -> Pulse:
        if self.kind == "scp":
            return make_scp(self.T, self.param)
        return make_mcp(self.T, self.param)

    def label(self) -> str:
        return f"{self.kind}_T{self.T}"


@dataclass
class Scenario:
    """Validated description of one experiment run."""

    name: str = "run"
    J: float = 0.1
    g: float = 0.2
    n_sites: int = 20
    setup: str = "edge"
    engine: str = "kinetic"
    edges: str = "both"
    pulses: List[PulseSpec] = field(default_factory=lambda: [PulseSpec("mcp", 28, 28 / 3)])
    theta: float = 0.02
    cycles: int = 750_000
    samples: int = 120
    gamma_d: float = 0.0
    gamma_phi: float = 0.0
    seed: int = 0
    betas: List[float] = field(default_factory=list)
    sweep_gamma_over_theta2: List[float] = field(default_factory=list)
    sweep_n_sites: List[int] = field(default_factory=list)
    sweep_phases: List[str] = field(default_factory=list)
    t_over_beta: float = 3.0

    def params(self, phase: Optional[str] = None, n_sites: Optional[int] = None) -> ModelParams:
        j, g = (self.J, self.g)
        if phase is not None:
            j, g = _STANDARD_POINTS[phase.lower()]
        return ModelParams(j, g, n_sites if n_sites is not None else self.n_sites)

    def to_manifest(self) -> dict:
        return {
            "name": self.name,
            "J": self.J,
            "g": self.g,
            "n_sites": self.n_sites,
            "setup": self.setup,
            "engine": self.engine,
            "edges": self.edges,
            "pulses": [f"{p.kind}:{p.T}:{p.param:.17g}" for p in self.pulses],
            "theta": self.theta,
            "cycles": self.cycles,
            "samples": self.samples,
            "gamma_d": self.gamma_d,
            "gamma_phi": self.gamma_phi,
            "seed": self.seed,
            "betas": self.betas,
            "sweep_gamma_over_theta2": self.sweep_gamma_over_theta2,
            "sweep_n_sites": self.sweep_n_sites,
            "sweep_phases": self.sweep_phases,
            "t_over_beta": self.t_over_beta,
        }


def _parse_pulse(token: str, line_no: int) -> PulseSpec:
    parts = token.strip().split(":")
    if len(parts) != 3 or parts[0] not in ("scp", "mcp"):
        raise ParseError(f"bad pulse spec {token!r} (want kind:T:param)", line=line_no)
    try:
        return PulseSpec(parts[0], int(parts[1]), float(parts[2]))
    except ValueError as exc:
        raise ParseError(f"bad pulse spec {token!r}: {exc}", line=line_no)


_FLOAT_KEYS = {"J", "g", "theta", "gamma_d", "gamma_phi", "t_over_beta"}
_INT_KEYS = {"n_sites", "cycles", "samples", "seed"}
_STR_KEYS = {"name", "setup", "engine", "edges"}
_LIST_FLOAT_KEYS = {"betas", "sweep_gamma_over_theta2"}
_LIST_INT_KEYS = {"sweep_n_sites"}
_LIST_STR_KEYS = {"sweep_phases"}


def parse_config(text: str) -> Scenario:
    """Parse and validate a scenario config; see the module docstring."""
    sc = Scenario()
    seen_pulses = False
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError("expected 'key = value'", line=line_no)
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.split("#")[0].strip()
        try:
            if key in _FLOAT_KEYS:
                setattr(sc, key, float(val))
            elif key in _INT_KEYS:
                setattr(sc, key, int(val))
            elif key in _STR_KEYS:
                setattr(sc, key, val)
            elif key in _LIST_FLOAT_KEYS:
                setattr(sc, key, [float(v) for v in val.split(",") if v.strip()])
            elif key in _LIST_INT_KEYS:
                setattr(sc, key, [int(v) for v in val.split(",") if v.strip()])
            elif key in _LIST_STR_KEYS:
                setattr(sc, key, [v.strip().lower() for v in val.split(",") if v.strip()])
            elif key == "pulses":
                sc.pulses = [_parse_pulse(tok, line_no) for tok in val.split(",") if tok.strip()]
                seen_pulses = True
            else:
                raise ParseError(f"unknown key {key!r}", line=line_no, key=key)
        except ParseError:
            raise
        except ValueError as exc:
            raise ParseError(f"bad value for {key!r}: {exc}", line=line_no, key=key)
    del seen_pulses
    validate_scenario(sc)
    return sc


def validate_scenario(sc: Scenario):
    if sc.engine not in ENGINES:
        raise ValidationError(f"engine must be one of {ENGINES}, got {sc.engine!r}")
    if sc.setup not in SETUPS:
        raise ValidationError(f"setup must be one of {SETUPS}, got {sc.setup!r}")
    if sc.edges not in ("left", "both"):
        raise ValidationError("edges must be 'left' or 'both'")
    if sc.engine in ("gaussian", "both") and sc.setup != "edge":
        raise ValidationError("the covariance engine requires the edge setup")
    if sc.engine == "oracle":
        n_aux = sc.n_sites if sc.setup == "bulk" else (2 if sc.edges == "both" else 1)
        if sc.n_sites + n_aux > 10:
            raise ValidationError("oracle engine is capped at 10 total qubits")
    if sc.engine == "scaling" and not sc.sweep_gamma_over_theta2:
        raise ValidationError("scaling engine needs a sweep_gamma_over_theta2 axis")
    for ph in sc.sweep_phases:
        if ph not in _STANDARD_POINTS:
            raise ValidationError(f"unknown phase point {ph!r} (want pm/afm)")
    if not sc.pulses:
        raise ValidationError("at least one pulse is required")
    if sc.theta < 0:
        raise ValidationError("theta must be non-negative")
