"""Continuous-time annealing of the Ising ring, its step digitization, and scaling fits."""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numba
import numpy as np

from .fermion import digitize, energy_expectation, mode_set
from .model import ChainSpec, EnergyReport, OptimResult


class Variant(str, enum.Enum):
    LINEAR = "linear"
    ROLAND_CERF = "roland-cerf"
    PIECEWISE = "piecewise"


@dataclass(frozen=True)
class AnnealSchedule:
    """Schedule ``s(t)`` on ``[0, total_time]``.

    ``RolandCerf`` follows the local-adiabatic law ``ds/dt = v (Delta(s)^2 + g^2)``
    with ``Delta(s) = 2|1 - 2s|``; its closed-form solution is used directly.
    """

    variant: Variant
    total_time: float
    velocity_scale: float | None = None
    gap_floor: float | None = None
    s_values: tuple | None = None
    dt_values: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if not self.total_time > 0:
            raise ValueError("total_time must be positive")
        if self.variant is Variant.PIECEWISE:
            if self.s_values is None or self.dt_values is None or len(self.s_values) != len(self.dt_values):
                raise ValueError("piecewise schedule needs equal-length s_values and dt_values")
            if not math.isclose(sum(self.dt_values), self.total_time, rel_tol=1e-12, abs_tol=1e-12):
                raise ValueError("dt_values must sum to total_time")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        tau = self.total_time
        if self.variant is Variant.LINEAR:
            return np.clip(t / tau, 0.0, 1.0)
        if self.variant is Variant.ROLAND_CERF:
            g = self.gap_floor
            x = np.clip(2.0 * t / tau - 1.0, -1.0, 1.0)
            return 0.5 + 0.25 * g * np.tan(math.atan(2.0 / g) * x)
        edges = np.concatenate([[0.0], np.cumsum(self.dt_values)])
        i = np.clip(np.searchsorted(edges, t, side="right") - 1, 0, len(self.s_values) - 1)
        return np.asarray(self.s_values)[i]


def linear_schedule(tau: float) -> AnnealSchedule:
    return AnnealSchedule(Variant.LINEAR, tau)


def roland_cerf_schedule(tau: float, gap_floor: float, velocity_scale: float | None = None) -> AnnealSchedule:
    """Local-adiabatic schedule that crawls through ``s = 1/2`` where the zero-field gap closes.

    The velocity scale is fixed by ``s(tau) = 1``; passing an inconsistent one
    is an error.
    """
    if not (tau > 0 and gap_floor > 0):
        raise ValueError("tau and gap_floor must be positive")
    v = math.atan(2.0 / gap_floor) / (2.0 * gap_floor * tau)
    if velocity_scale is not None and not math.isclose(velocity_scale, v, rel_tol=1e-9):
        raise ValueError(f"velocity_scale {velocity_scale} incompatible with s(tau)=1 (needs {v})")
    return AnnealSchedule(Variant.ROLAND_CERF, tau, velocity_scale=v, gap_floor=gap_floor)


def step_discretize(schedule: AnnealSchedule, dt_m: float) -> AnnealSchedule:
    """Sample ``s(t)`` at the midpoints of ``P = tau / dt_m`` equal steps."""
    if schedule.variant is Variant.PIECEWISE:
        return schedule
    if not dt_m > 0:
        raise ValueError("dt_m must be positive")
    ratio = schedule.total_time / dt_m
    p = int(round(ratio))
    if p < 1 or abs(ratio - p) > 1e-9 * max(1.0, ratio):
        raise ValueError(f"total time {schedule.total_time} is not an integer multiple of {dt_m}")
    t_mid = (np.arange(1, p + 1) - 0.5) * dt_m
    s = tuple(float(v) for v in schedule(t_mid))
    return AnnealSchedule(Variant.PIECEWISE, schedule.total_time, s_values=s, dt_values=(float(dt_m),) * p)


def default_dt(tau: float) -> float:
    return tau / max(1000.0, 100.0 * tau)


@numba.njit(cache=True)
def _rk4_modes(bx, bz, s_knots, a_knots, dt, n_steps):
    # d tau/dt = 4 tau x c with c = (s bx, 0, s bz + a); knots hold s, a at half steps
    n_modes = bx.size
    out = np.empty((n_modes, 3))
    drift = 0.0
    h6 = dt / 6.0
    for k in range(n_modes):
        x, y, z = 0.0, 0.0, 1.0
        for i in range(n_steps):
            cx0 = s_knots[2 * i] * bx[k]
            cz0 = s_knots[2 * i] * bz[k] + a_knots[2 * i]
            cx1 = s_knots[2 * i + 1] * bx[k]
            cz1 = s_knots[2 * i + 1] * bz[k] + a_knots[2 * i + 1]
            cx2 = s_knots[2 * i + 2] * bx[k]
            cz2 = s_knots[2 * i + 2] * bz[k] + a_knots[2 * i + 2]

            k1x = 4.0 * y * cz0
            k1y = 4.0 * (z * cx0 - x * cz0)
            k1z = -4.0 * y * cx0
            x2 = x + 0.5 * dt * k1x
            y2 = y + 0.5 * dt * k1y
            z2 = z + 0.5 * dt * k1z
            k2x = 4.0 * y2 * cz1
            k2y = 4.0 * (z2 * cx1 - x2 * cz1)
            k2z = -4.0 * y2 * cx1
            x3 = x + 0.5 * dt * k2x
            y3 = y + 0.5 * dt * k2y
            z3 = z + 0.5 * dt * k2z
            k3x = 4.0 * y3 * cz1
            k3y = 4.0 * (z3 * cx1 - x3 * cz1)
            k3z = -4.0 * y3 * cx1
            x4 = x + dt * k3x
            y4 = y + dt * k3y
            z4 = z + dt * k3z
            k4x = 4.0 * y4 * cz2
            k4y = 4.0 * (z4 * cx2 - x4 * cz2)
            k4z = -4.0 * y4 * cx2

            x = x + h6 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
            y = y + h6 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
            z = z + h6 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z)
            norm = np.sqrt(x * x + y * y + z * z)
            if abs(norm - 1.0) > drift:
                drift = abs(norm - 1.0)
            x /= norm
            y /= norm
            z /= norm
        out[k, 0] = x
        out[k, 1] = y
        out[k, 2] = z
    return out, drift


def bloch_evolve(schedule: AnnealSchedule, chain: ChainSpec, dt_step: float | None = None) -> EnergyReport:
    """Integrate every pseudo-spin through a continuous schedule and report the final energy.

    Classical fixed-step RK4, Bloch vectors renormalised after every step.
    """
    if schedule.variant is Variant.PIECEWISE:
        raise ValueError("bloch_evolve takes a continuous schedule; digitize piecewise schedules instead")
    tau = schedule.total_time
    dt_step = default_dt(tau) if dt_step is None else dt_step
    if not dt_step > 0:
        raise ValueError("dt_step must be positive")
    n_steps = max(1, int(math.ceil(tau / dt_step - 1e-9)))
    dt = tau / n_steps

    modes = mode_set(1, chain, n_eval=chain.n_eval or chain.n_sites)
    h = chain.field
    bx, bz = modes.axes[:, 0].copy(), modes.axes[:, 2].copy()
    t_knots = np.arange(2 * n_steps + 1) * (0.5 * dt)
    s_knots = np.asarray(schedule(t_knots), dtype=float)
    a_knots = 1.0 - s_knots + h * s_knots
    taus, drift = _rk4_modes(bx, bz, s_knots, a_knots, dt, n_steps)
    if drift > 1e-6:
        warnings.warn(f"RK4 norm drift {drift:.2e} per step exceeds 1e-6; reduce dt_step", RuntimeWarning)

    d = taus - modes.targets
    eps = float(modes.weights @ np.einsum("ij,ij->i", d, d))
    energy = -2.0 * float(np.sum(taus[:, 0] * bx + taus[:, 2] * bz + h * taus[:, 2]))
    return EnergyReport(energy=energy, eps_res=eps, e_min=modes.e_min, e_max=modes.e_max)


def digitized_evolve(schedule: AnnealSchedule, chain: ChainSpec, dt_m: float = 1.0) -> EnergyReport:
    """Residual energy of the Trotterised (digitized-QA) version of ``schedule``."""
    pc = step_discretize(schedule, dt_m)
    angles = digitize(pc.s_values, pc.dt_values, chain.field)
    return energy_expectation(angles, chain, n_eval=chain.n_eval or chain.n_sites)


DEFAULT_GAP_FLOORS = tuple(float(g) for g in np.geomspace(0.02, 1.0, 12))


def tune_roland_cerf(tau: float, chain: ChainSpec, gap_floors=DEFAULT_GAP_FLOORS,
                     digital: bool = False, dt_m: float = 1.0) -> tuple[float, EnergyReport]:
    """Pick the gap floor giving the lowest residual energy at annealing time ``tau``.

    ``digital=True`` scores the step-discretized schedule instead of the
    continuous one.  Ties go to the first floor in ``gap_floors``.
    """
    best = None
    for g in gap_floors:
        sched = roland_cerf_schedule(tau, g)
        rep = digitized_evolve(sched, chain, dt_m) if digital else bloch_evolve(sched, chain)
        if best is None or rep.eps_res < best[1].eps_res:
            best = (float(g), rep)
    if best is None:
        raise ValueError("gap_floors is empty")
    return best


@dataclass(frozen=True)
class ScalingFit:
    exponent: float
    prefactor: float
    r_squared: float
    fit_window: tuple[float, float]
    inv_a: float
    inv_b: float
    inv_r_squared: float


def _r2(y, yhat):
    ss_res = float(np.sum((y - yhat) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    return 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - ss_res / ss_tot)


def scaling_fit(points, window: tuple[float, float] | None = None) -> ScalingFit:
    """Fit ``eps = prefactor * tau**exponent`` in log-log space and ``eps = 1/(a tau + b)``.

    The inverse form is fitted as a straight line through ``(tau, 1/eps)``
    and ``inv_r_squared`` is the coefficient of determination of that line.
    """
    pts = np.asarray(points, dtype=float)
    tau, eps = pts[:, 0], pts[:, 1]
    if np.any(tau <= 0) or np.any(eps <= 0):
        raise ValueError("scaling fit needs positive tau and eps")
    if window is not None:
        keep = (tau >= window[0]) & (tau <= window[1])
        tau, eps = tau[keep], eps[keep]
    if np.unique(tau).size < 3:
        raise ValueError("scaling fit needs at least three distinct tau values")
    lt, le = np.log(tau), np.log(eps)
    slope, icpt = np.polyfit(lt, le, 1)
    r2 = _r2(le, slope * lt + icpt)
    a, b = np.polyfit(tau, 1.0 / eps, 1)
    inv_r2 = _r2(1.0 / eps, a * tau + b)
    return ScalingFit(float(slope), float(np.exp(icpt)), r2, (float(tau.min()), float(tau.max())),
                      float(a), float(b), inv_r2)


def collapse_transform(ladder, h: float = 0.0) -> list[np.ndarray]:
    """Rescale every ladder level to ``(t_m / tau, (s_m - 1/2) * tau)``.

    ``t_m`` is the midpoint of step ``m``, with step durations
    ``dt_m = beta_m + (1 - h) gamma_m``.
    """
    curves = []
    for res in ladder:
        ang = res.angles if isinstance(res, OptimResult) else res
        dt = ang.betas + (1.0 - h) * ang.gammas
        tau = float(np.sum(dt))
        t_mid = np.cumsum(dt) - 0.5 * dt
        s = ang.schedule_values(h)
        curves.append(np.stack([t_mid / tau, (s - 0.5) * tau], axis=1))
    return curves


def collapse_distance(curve_a: np.ndarray, curve_b: np.ndarray, window: tuple[float, float] | None = None) -> float:
    """Largest vertical gap between two rescaled curves over their common abscissa range.

    ``window`` further restricts the abscissae compared; both curves are
    still interpolated from all their points.
    """
    lo = max(curve_a[0, 0], curve_b[0, 0])
    hi = min(curve_a[-1, 0], curve_b[-1, 0])
    if window is not None:
        lo, hi = max(lo, window[0]), min(hi, window[1])
    xs = np.concatenate([curve_a[:, 0], curve_b[:, 0], [lo, hi]])
    xs = np.unique(xs[(xs >= lo) & (xs <= hi)])
    if xs.size == 0:
        raise ValueError("curves do not overlap")
    ya = np.interp(xs, curve_a[:, 0], curve_a[:, 1])
    yb = np.interp(xs, curve_b[:, 0], curve_b[:, 1])
    return float(np.max(np.abs(ya - yb)))
