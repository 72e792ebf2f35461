"""BFGS search over QAOA angles, degenerate-minimum enumeration and the regular ladder."""

from __future__ import annotations

import dataclasses
import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, line_search

from .fermion import digitize, mode_set
from .gradient import _excess_and_grad
from .model import ChainSpec, OptimResult, QaoaAngles

log = logging.getLogger(__name__)

HALF_PI = 0.5 * np.pi


class NumericalFailure(RuntimeError):
    """Raised when the objective or its gradient turns non-finite; carries the last good iterate."""

    def __init__(self, message, last_angles: QaoaAngles):
        super().__init__(message)
        self.last_angles = last_angles


@dataclass(frozen=True)
class OptimOptions:
    grad_tol: float = 1e-9
    max_iters: int = 10000
    c1: float = 1e-4
    c2: float = 0.9

    def __post_init__(self):
        if not self.grad_tol > 0:
            raise ValueError("grad_tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not 0 < self.c1 < self.c2 < 1:
            raise ValueError("line-search constants need 0 < c1 < c2 < 1")


class _Objective:
    """Excess residual energy above the analytic floor, with a one-point cache."""

    def __init__(self, p, chain):
        self.p = p
        self.modes = mode_set(p, chain)
        self.n_evals = 0
        self._key = None
        self._val = None

    def __call__(self, x):
        key = x.tobytes()
        if key != self._key:
            self.n_evals += 1
            f, g = _excess_and_grad(QaoaAngles.from_vector(x), self.modes)
            if not (np.isfinite(f) and np.all(np.isfinite(g))):
                raise FloatingPointError(f"non-finite objective at x = {x}")
            self._key, self._val = key, (f, g)
        return self._val

    def f(self, x):
        return self(x)[0]

    def g(self, x):
        return self(x)[1]


def _wolfe(obj, x, pk, g, f, f_prev, opts):
    # a failed search returns None, which the caller handles; silence scipy's warning
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message=r".*line search", category=RuntimeWarning)
        alpha, *_ = line_search(obj.f, obj.g, x, pk, gfk=g, old_fval=f, old_old_fval=f_prev,
                                c1=opts.c1, c2=opts.c2, maxiter=50)
    return alpha


def minimize(initial: QaoaAngles, chain: ChainSpec, opts: OptimOptions | None = None) -> OptimResult:
    """Minimise the residual energy by BFGS with a strong-Wolfe line search.

    The inverse Hessian is kept dense and rescaled after the first step.  The
    search stops when the Euclidean gradient norm drops to ``opts.grad_tol``,
    after ``opts.max_iters`` steps, or when no step satisfying the Wolfe
    conditions exists even along steepest descent (precision exhausted).
    """
    opts = opts or OptimOptions()
    obj = _Objective(initial.p, chain)
    x = initial.to_vector().copy()
    n = x.size
    try:
        f, g = obj(x)
    except FloatingPointError as exc:
        raise NumericalFailure(str(exc), initial) from exc

    hinv = np.eye(n)
    first = True
    f_prev = None
    n_iter = 0
    status = []
    while np.linalg.norm(g) > opts.grad_tol and n_iter < opts.max_iters:
        pk = -hinv @ g
        if g @ pk >= 0:
            hinv = np.eye(n)
            pk = -g
        try:
            alpha = _wolfe(obj, x, pk, g, f, f_prev, opts)
            if alpha is None and not np.array_equal(pk, -g):
                # restart from steepest descent before giving up
                hinv = np.eye(n)
                pk = -g
                first = True
                alpha = _wolfe(obj, x, pk, g, f, None, opts)
        except FloatingPointError as exc:
            raise NumericalFailure(str(exc), QaoaAngles.from_vector(x)) from exc
        if alpha is None:
            status.append("line search failed; precision exhausted")
            break
        s = alpha * pk
        x_new = x + s
        f_new, g_new = obj(x_new)
        y = g_new - g
        sy = s @ y
        if sy > 0:
            if first:
                hinv = np.eye(n) * (sy / (y @ y))
                first = False
            rho = 1.0 / sy
            hy = hinv @ y
            hinv = hinv + (rho * rho * (y @ hy) + rho) * np.outer(s, s) - rho * (np.outer(hy, s) + np.outer(s, hy))
        f_prev, f, g, x = f, f_new, g_new, x_new
        n_iter += 1

    grad_norm = float(np.linalg.norm(g))
    converged = grad_norm <= opts.grad_tol
    if not converged and n_iter >= opts.max_iters:
        status.append("max_iters reached")
    return OptimResult(
        angles=QaoaAngles.from_vector(x),
        eps_res=obj.modes.floor + f,
        grad_norm=grad_norm,
        n_iterations=n_iter,
        n_evaluations=obj.n_evals,
        converged=converged,
        warnings=status,
    )


def canonicalize(angles: QaoaAngles) -> QaoaAngles:
    """Fold every angle into ``[0, pi/2)``; rotations by ``4*angle`` make this a symmetry."""
    x = np.mod(angles.to_vector(), HALF_PI)
    x[x >= HALF_PI] = 0.0
    return QaoaAngles.from_vector(x)


def _periodic_distance(a, b):
    d = np.abs(a - b) % HALF_PI
    return float(np.max(np.minimum(d, HALF_PI - d)))


@dataclass
class MinimaSearch:
    minima: list[OptimResult]
    n_starts: int
    n_dropped: int
    n_non_global: int

    @property
    def n_distinct(self) -> int:
        return len(self.minima)


def random_angles(p: int, rng: np.random.Generator) -> QaoaAngles:
    x = rng.uniform(0.0, HALF_PI, size=2 * p)
    return QaoaAngles.from_vector(x)


def enumerate_minima(p: int, chain: ChainSpec, n_starts: int, seed: int, cluster_tol: float = 1e-4,
                     opts: OptimOptions | None = None, energy_tol: float = 1e-7,
                     executor=None) -> MinimaSearch:
    """Collect the distinct global minima reached from seeded random starts.

    Starts are uniform in ``[0, pi/2)^(2p)``.  Runs that do not converge, or
    converge to a value further than ``energy_tol`` from ``1/(2p+2)``, are
    dropped and counted.  Canonical angle vectors are clustered greedily in
    max-norm with periodic wrap-around.  An optional ``concurrent.futures``
    executor runs the restarts in parallel; results keep start order.
    """
    if 2 * p >= chain.n_sites or chain.field != 0.0:
        raise ValueError("minima enumeration needs 2p < n_sites and zero field")
    rng = np.random.default_rng(seed)
    starts = [random_angles(p, rng) for _ in range(n_starts)]
    bound = 1.0 / (2 * p + 2)
    kept = []
    n_dropped = n_non_global = 0
    if executor is None:
        runs = [minimize(start, chain, opts) for start in starts]
    else:
        runs = list(executor.map(minimize, starts, [chain] * n_starts, [opts] * n_starts))
    for res in runs:
        if not res.converged:
            n_dropped += 1
            log.info("dropped non-converged run (grad_norm=%.3e)", res.grad_norm)
            continue
        if abs(res.eps_res - bound) > energy_tol:
            n_non_global += 1
            log.warning("local minimum above the bound: eps_res=%.12g", res.eps_res)
            continue
        kept.append(dataclasses.replace(res, angles=canonicalize(res.angles)))

    kept.sort(key=lambda r: tuple(np.round(r.angles.to_vector(), 6)))
    reps: list[OptimResult] = []
    for res in kept:
        x = res.angles.to_vector()
        if all(_periodic_distance(x, r.angles.to_vector()) > cluster_tol for r in reps):
            reps.append(res)
    return MinimaSearch(reps, n_starts, n_dropped, n_non_global)


def interpolate_angles(source: QaoaAngles, target_depth: int, method: str = "edge") -> QaoaAngles:
    """Resample angles onto a deeper circuit.

    ``method="linear"``: step ``m`` of a depth-P circuit sits at ``m / (P + 1)``
    and the new steps at ``m / (P' + 1)`` are read off the piecewise-linear
    curve through the old ones, continuing the end segments outwards.

    ``method="edge"`` (default): optimal angles near either end of the
    circuit depend on the step index rather than on the fraction ``m/P``.
    The distance ``d'`` of a new step from its nearest end is mapped to an old
    distance ``d = a log(1 + d'/a)`` with ``a`` fixed so the two centres
    coincide; the first steps keep their index, the bulk is compressed.
    """
    p = source.p
    if target_depth < p:
        raise ValueError("target depth must not be smaller than the source depth")
    if target_depth == p:
        return source
    if p == 1:
        return QaoaAngles(np.full(target_depth, source.gammas[0]), np.full(target_depth, source.betas[0]))
    if method == "linear":
        return _interp_linear(source, target_depth)
    if method != "edge":
        raise ValueError(f"unknown interpolation method {method!r}")
    half_new = 0.5 * target_depth
    a = brentq(lambda a: a * np.log1p(half_new / a) - 0.5 * p, 1e-9, 1e9 * target_depth)
    m = np.arange(1, target_depth + 1)
    d = np.minimum(m, target_depth + 1 - m) - 0.5
    x = a * np.log1p(d / a) + 0.5
    old_index = np.where(m <= half_new, x, p + 1 - x)
    idx = np.arange(1, p + 1)
    return QaoaAngles(np.interp(old_index, idx, source.gammas), np.interp(old_index, idx, source.betas))


def _interp_linear(source: QaoaAngles, target_depth: int) -> QaoaAngles:
    p = source.p
    x_old = np.arange(1, p + 1) / (p + 1)
    x_new = np.arange(1, target_depth + 1) / (target_depth + 1)

    def resample(y):
        out = np.interp(x_new, x_old, y)
        lo = x_new < x_old[0]
        hi = x_new > x_old[-1]
        out[lo] = y[0] + (x_new[lo] - x_old[0]) * (y[1] - y[0]) / (x_old[1] - x_old[0])
        out[hi] = y[-1] + (x_new[hi] - x_old[-1]) * (y[-1] - y[-2]) / (x_old[-1] - x_old[-2])
        return out

    return QaoaAngles(resample(source.gammas), resample(source.betas))


def linear_start(p: int, h: float = 0.0) -> QaoaAngles:
    """Digitized linear schedule ``s_m = m/(p+1)`` with unit time steps."""
    s = np.arange(1, p + 1) / (p + 1)
    return digitize(s, np.ones(p), h)


def _level_chain(chain: ChainSpec, p: int, n_eval_per_p: int | None) -> ChainSpec:
    if n_eval_per_p is None:
        return chain
    return dataclasses.replace(chain, n_eval=n_eval_per_p * p)


def field_continuation(start: QaoaAngles, chain: ChainSpec, n_steps: int = 10,
                       opts: OptimOptions | None = None) -> OptimResult:
    """Carry a zero-field optimum to ``chain.field`` in ``n_steps`` equal field increments.

    Optima at non-zero field are degenerate as well; following the field
    from ``h = 0`` keeps the smooth branch.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    res = None
    ang = start
    for h in np.linspace(0.0, chain.field, n_steps + 1)[1:]:
        res = minimize(ang, dataclasses.replace(chain, field=float(h)), opts)
        ang = res.angles
    return res


def regular_ladder(levels, chain: ChainSpec, opts: OptimOptions | None = None,
                   n_eval_per_p: int | None = None) -> list[OptimResult]:
    """Optimise at each depth in ``levels``, seeding every level with the previous optimum.

    The first level starts from the digitized linear schedule; for a non-zero
    field it is solved at ``h = 0`` and then carried along the field.  Levels
    that fail to converge, or miss the ``1/(2P+2)`` floor in the zero-field
    bound regime, keep going but carry a warning.
    """
    levels = list(levels)
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise ValueError("ladder levels must be strictly increasing")
    results = []
    guess = None
    for p in levels:
        level_chain = _level_chain(chain, p, n_eval_per_p)
        if guess is not None:
            res = minimize(interpolate_angles(guess, p), level_chain, opts)
        elif chain.field == 0.0:
            res = minimize(linear_start(p), level_chain, opts)
        else:
            zero = minimize(linear_start(p), dataclasses.replace(level_chain, field=0.0), opts)
            res = field_continuation(zero.angles, level_chain, opts=opts)
        if not res.converged:
            res.warnings.append(f"P={p}: not converged (grad_norm={res.grad_norm:.3e})")
        n = level_chain.n_eval or level_chain.n_sites
        if chain.field == 0.0 and 2 * p < n and abs(res.eps_res - 1.0 / (2 * p + 2)) > 1e-7:
            res.warnings.append(f"P={p}: degraded solution, eps_res={res.eps_res:.12g}")
        for w in res.warnings:
            log.warning(w)
        results.append(res)
        guess = res.angles
    return results


def doubling_levels(p_target: int, p_start: int = 2) -> list[int]:
    levels = [p_start]
    while levels[-1] < p_target:
        levels.append(2 * levels[-1])
    if levels[-1] != p_target:
        raise ValueError(f"p_target={p_target} is not {p_start} times a power of two")
    return levels


def regular_schedule(p_target: int, chain: ChainSpec, opts: OptimOptions | None = None,
                     n_eval_per_p: int | None = None) -> list[OptimResult]:
    """Regular optimal schedule built on the doubling ladder ``P = 2, 4, 8, ..., p_target``."""
    return regular_ladder(doubling_levels(p_target), chain, opts, n_eval_per_p)


def cost_accounting(ladder) -> list[dict]:
    """Per-level iteration counts and the ``n_iter * P`` cost proxy, with running totals."""
    rows = []
    cum_iter = cum_tcc = 0
    for res in ladder:
        t_cc = res.n_iterations * res.p
        cum_iter += res.n_iterations
        cum_tcc += t_cc
        rows.append({"p": res.p, "n_iter": res.n_iterations, "t_cc": t_cc,
                     "cum_iter": cum_iter, "cum_t_cc": cum_tcc})
    return rows
