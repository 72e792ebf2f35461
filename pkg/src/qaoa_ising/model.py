"""Plain data containers shared across the package."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np


class Boundary(str, enum.Enum):
    PBC = "PBC"
    ABC = "ABC"


@dataclass(frozen=True)
class QaoaAngles:
    """The 2P circuit angles of a depth-P QAOA / digitized-QA sequence.

    ``gammas[m]`` multiplies the Ising coupling term, ``betas[m]`` the
    transverse-field driver, with step ``m = 0`` applied first.
    """

    gammas: np.ndarray
    betas: np.ndarray

    def __post_init__(self):
        g = np.array(self.gammas, dtype=float).reshape(-1)
        b = np.array(self.betas, dtype=float).reshape(-1)
        if g.size == 0 or g.size != b.size:
            raise ValueError(
                f"gammas and betas must have equal length >= 1, got {g.size} and {b.size}"
            )
        if not (np.all(np.isfinite(g)) and np.all(np.isfinite(b))):
            raise ValueError("angles must be finite")
        g.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "gammas", g)
        object.__setattr__(self, "betas", b)

    @property
    def p(self) -> int:
        return self.gammas.size

    def to_vector(self) -> np.ndarray:
        """Flatten to ``[gammas..., betas...]``."""
        return np.concatenate([self.gammas, self.betas])

    @classmethod
    def from_vector(cls, x) -> "QaoaAngles":
        x = np.asarray(x, dtype=float)
        if x.ndim != 1 or x.size % 2:
            raise ValueError("angle vector must be 1-d with even length")
        p = x.size // 2
        return cls(x[:p], x[p:])

    @classmethod
    def zeros(cls, p: int) -> "QaoaAngles":
        return cls(np.zeros(p), np.zeros(p))

    def schedule_values(self, h: float = 0.0) -> np.ndarray:
        """Step-wise schedule ``s_m = gamma_m / (beta_m + (1 - h) gamma_m)``, the inverse of the Trotter mapping."""
        return self.gammas / (self.betas + (1.0 - h) * self.gammas)

    def to_dict(self) -> dict:
        return {"gammas": self.gammas.tolist(), "betas": self.betas.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "QaoaAngles":
        return cls(d["gammas"], d["betas"])


@dataclass(frozen=True)
class ChainSpec:
    """Antiferromagnetic Ising ring of ``n_sites`` spins in transverse field ``field``.

    ``n_eval`` optionally overrides the ring length used when ``field != 0``
    (the full-chain evaluation path); it defaults to ``n_sites``.
    """

    n_sites: int
    field: float = 0.0
    boundary: Boundary = Boundary.PBC
    n_eval: int | None = None

    def __post_init__(self):
        if int(self.n_sites) != self.n_sites or self.n_sites < 4 or self.n_sites % 2:
            raise ValueError(f"n_sites must be an even integer >= 4, got {self.n_sites}")
        if not math.isfinite(self.field) or self.field < 0:
            raise ValueError(f"field must be a finite real >= 0, got {self.field}")
        if self.n_eval is not None and (self.n_eval < 4 or self.n_eval % 2):
            raise ValueError(f"n_eval must be an even integer >= 4, got {self.n_eval}")
        object.__setattr__(self, "boundary", Boundary(self.boundary))


@dataclass(frozen=True)
class EnergyReport:
    energy: float
    eps_res: float
    e_min: float
    e_max: float


@dataclass
class Gradient:
    d_gammas: np.ndarray
    d_betas: np.ndarray

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.d_gammas, self.d_betas])

    @classmethod
    def from_vector(cls, x) -> "Gradient":
        x = np.asarray(x, dtype=float)
        p = x.size // 2
        return cls(x[:p].copy(), x[p:].copy())


@dataclass
class OptimResult:
    angles: QaoaAngles
    eps_res: float
    grad_norm: float
    n_iterations: int
    n_evaluations: int
    converged: bool
    warnings: list[str] = field(default_factory=list)

    @property
    def p(self) -> int:
        return self.angles.p

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "gammas": self.angles.gammas.tolist(),
            "betas": self.angles.betas.tolist(),
            "eps_res": float(self.eps_res),
            "grad_norm": float(self.grad_norm),
            "n_iterations": int(self.n_iterations),
            "n_evaluations": int(self.n_evaluations),
            "converged": bool(self.converged),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "OptimResult":
        return cls(
            angles=QaoaAngles(d["gammas"], d["betas"]),
            eps_res=d["eps_res"],
            grad_norm=d["grad_norm"],
            n_iterations=d["n_iterations"],
            n_evaluations=d["n_evaluations"],
            converged=d["converged"],
        )
