"""Experiment configuration with a JSON file format."""

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import List, Union

from .circuit import build_grover_iteration, grover_period
from .exceptions import ConfigError
from .theory import DEFAULT_R, epsilon_critical

DEFAULT_MEMORY_MB = 2048


@dataclass
class ExperimentConfig:
    """Everything needed to regenerate an ensemble bit for bit.

    ``eps`` is read in units of eps_c when ``eps_relative`` is set.
    ``tau`` is a fixed index or the string "random" (drawn per realization).
    ``substeps`` is the split-propagator slice count per gate slot.
    """

    L_x: int = 3
    L_y: int = 4
    tau: Union[int, str] = 0
    eps: List[float] = field(default_factory=lambda: [0.0])
    eps_relative: bool = False
    realizations: int = 1
    master_seed: int = 12345
    tf_multiplier: float = 5.0
    R: float = DEFAULT_R
    output_dir: str = "out"
    emit_timeseries: bool = False
    emit_spectra: bool = False
    emit_husimi: bool = False
    emit_heatmaps: bool = False
    substeps: int = 1
    memory_budget_mb: float = DEFAULT_MEMORY_MB

    def __post_init__(self):
        self.eps = [float(e) for e in self.eps]
        self.validate()

    def validate(self):
        if self.L_x < 1 or self.L_y < 1 or self.L_x * self.L_y < 2:
            raise ConfigError(f"lattice {self.L_x}x{self.L_y} needs n_tot >= 2")
        if not self.eps or any(not math.isfinite(e) or e < 0 for e in self.eps):
            raise ConfigError(f"eps values must be finite and >= 0, got {self.eps}")
        if self.realizations < 1:
            raise ConfigError("realizations must be >= 1")
        if not 0 < self.R <= 1:
            raise ConfigError(f"R={self.R} outside (0, 1]")
        if self.tf_multiplier <= 0:
            raise ConfigError("tf_multiplier must be > 0")
        if self.substeps < 1:
            raise ConfigError("substeps must be >= 1")
        if isinstance(self.tau, str):
            if self.tau != "random":
                raise ConfigError(f"tau must be an integer or 'random', got {self.tau!r}")
        elif not 0 <= int(self.tau) < (1 << self.n_q):
            raise ConfigError(f"tau={self.tau} outside [0, {1 << self.n_q})")

    @property
    def n_tot(self):
        return self.L_x * self.L_y

    @property
    def n_q(self):
        return self.n_tot - 1

    @property
    def n_g(self):
        return build_grover_iteration(self.n_q, 0).n_g

    @property
    def eps_c(self):
        return epsilon_critical(self.n_g, self.n_tot)

    @property
    def T_f(self):
        return max(2, int(round(self.tf_multiplier * grover_period(self.n_q))))

    def eps_values(self):
        scale = self.eps_c if self.eps_relative else 1.0
        return [e * scale for e in self.eps]

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def dumps(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def save(self, path):
        Path(path).write_text(self.dumps())

    @classmethod
    def load(cls, path):
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        return cls.from_dict(data)
