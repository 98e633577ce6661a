"""Search over spin-state families for the largest gravity-induced entanglement.

Every search is a coarse uniform grid over the free parameters followed by
golden-section refinement around the best node.  The geometry symmetry is
used to tie mass B's state to mass A's: parallel set-ups use the same state,
linear set-ups the mirrored one (``c_m -> c_{-m}``, i.e. ``theta -> pi - theta``
for coherent states).
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .decoherence import DecoherenceModel, long_mask, short_mask
from .entanglement import (
    BipartiteState,
    ExperimentConfig,
    entanglement_entropy,
    joint_state,
    negativity_value,
    phase_matrix,
    pure_negativity,
)
from .errors import DomainError
from .spin_states import (
    SpinState,
    coherent_spin_state,
    squeezed_spin_state,
    symmetric_superposition,
)

FAMILIES = ("css", "css_superposition_symmetric", "sss_one_axis", "sss_two_axis")
OBJECTIVES = ("entropy", "negativity")
GOLDEN_TOL = 1e-4
DEFAULT_GRID_1D = 201
DEFAULT_GRID_2D = 61


@dataclass(frozen=True)
class StateFamilySpec:
    """A spin-state family and the ranges of its free parameters.

    ``theta=None`` leaves the coherent-state polar angle free; a number pins
    it.  Squeezed families pin ``theta = pi/2`` by default and search
    ``chi`` over ``chi_range``.
    """

    family: str = "css"
    theta: float | None = None
    phi: float = 0.0
    chi_range: tuple = (0.0, 1.0)
    delta_theta_range: tuple = (0.0, math.pi)
    delta_phi_range: tuple = (0.0, math.pi)
    delta_phi_free: bool = True
    theta0: float = math.pi / 2  # centre of the superposition family

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if self.theta is not None and not 0 <= self.theta <= math.pi:
            raise DomainError("theta must lie in [0, pi]")
        for name, (lo, hi) in (
            ("chi_range", self.chi_range),
            ("delta_theta_range", self.delta_theta_range),
            ("delta_phi_range", self.delta_phi_range),
        ):
            if lo > hi:
                raise DomainError(f"{name} is empty")
        for name, (lo, hi) in (("delta_theta_range", self.delta_theta_range), ("delta_phi_range", self.delta_phi_range)):
            if lo < 0 or hi > math.pi:
                raise DomainError(f"{name} must lie within [0, pi]")
        object.__setattr__(self, "chi_range", tuple(float(v) for v in self.chi_range))
        object.__setattr__(self, "delta_theta_range", tuple(float(v) for v in self.delta_theta_range))
        object.__setattr__(self, "delta_phi_range", tuple(float(v) for v in self.delta_phi_range))

    @classmethod
    def default(cls, family: str) -> "StateFamilySpec":
        if family.startswith("sss"):
            return cls(family=family, theta=math.pi / 2)
        return cls(family=family)

    def free_parameters(self):
        """``[(name, lo, hi), ...]`` in search order."""
        if self.family == "css":
            return [] if self.theta is not None else [("theta", 0.0, math.pi)]
        if self.family == "css_superposition_symmetric":
            out = [("delta_theta", *self.delta_theta_range)]
            if self.delta_phi_free:
                out.append(("delta_phi", *self.delta_phi_range))
            return out
        out = [("chi", *self.chi_range)]
        if self.theta is None:
            out.append(("theta", 0.0, math.pi))
        return out

    def state(self, j, point: dict) -> SpinState:
        """State of mass A at ``point``."""
        if self.family == "css":
            return coherent_spin_state(j, point.get("theta", self.theta), self.phi)
        if self.family == "css_superposition_symmetric":
            return symmetric_superposition(j, point["delta_theta"], point.get("delta_phi", 0.0), self.theta0)
        mode = "one_axis" if self.family == "sss_one_axis" else "two_axis"
        theta = point.get("theta", self.theta)
        return squeezed_spin_state(j, point["chi"], theta, self.phi, mode)


def mirror_state(state: SpinState) -> SpinState:
    """Reflect ``m -> -m``; maps a real coherent state at ``theta`` to ``pi - theta``."""
    return SpinState.from_amplitudes(state.j, state.amplitudes[::-1])


def partner_state(state: SpinState, geometry: str) -> SpinState:
    return mirror_state(state) if geometry == "linear" else state


class Evaluator:
    """Objective evaluator for one configuration; safe to call from several threads."""

    def __init__(self, spec: StateFamilySpec, config: ExperimentConfig, objective="entropy", decoherence=None):
        if objective not in OBJECTIVES:
            raise DomainError(f"objective must be one of {OBJECTIVES}, got {objective!r}")
        self.spec = spec
        self.config = config
        self.objective = objective
        self.phases = phase_matrix(config)
        self.names = [p[0] for p in spec.free_parameters()]
        self.mask = None
        if decoherence is not None and (decoherence.gamma_short or decoherence.gamma_long):
            if objective != "negativity":
                raise DomainError("with decoherence only the negativity objective is defined")
            d = config.dim
            mask = np.ones((d, d, d, d))
            if decoherence.gamma_short:
                mask = mask * short_mask(d, decoherence.gamma_short * decoherence.tau)
            if decoherence.gamma_long:
                mask = mask * long_mask(d, decoherence.gamma_long * decoherence.delta_x**2 * decoherence.tau)
            # [m, m', n, n'] -> [(m, n), (m', n')]
            self.mask = np.ascontiguousarray(mask.transpose(0, 2, 1, 3)).reshape(d * d, d * d)

    def bipartite(self, values) -> BipartiteState:
        point = dict(zip(self.names, values))
        a = self.spec.state(self.config.j, point)
        b = partner_state(a, self.config.geometry)
        return joint_state(a, b, self.phases, self.config.k)

    def __call__(self, values) -> float:
        psi = self.bipartite(values)
        if self.objective == "entropy":
            return entanglement_entropy(psi)
        if self.mask is None:
            return pure_negativity(psi)
        v = psi.amplitudes.ravel()
        return negativity_value(np.outer(v, v.conj()) * self.mask)

    def score(self, values) -> float:
        """Lower is better."""
        value = self(values)
        return -value if self.objective == "entropy" else value


def golden_section(f, lo, hi, tol=GOLDEN_TOL):
    """Minimize a unimodal ``f`` on ``[lo, hi]``; returns ``(x, f(x))``."""
    invphi = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def _map(fn, items, threads):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


@dataclass
class SweepResult:
    """Grid of objective values with its optimum and provenance."""

    objective: str
    family: str
    axes: dict  # name -> 1-D grid
    values: np.ndarray  # shape = tuple(len(axis) for axis in axes)
    optimum: dict  # parameter values at the optimum
    optimum_value: float
    config: dict
    extras: dict = field(default_factory=dict)  # name -> array shaped like values
    metadata: dict = field(default_factory=dict)

    def rows(self):
        """Long-format rows ``(axis values..., value, extras...)`` in C order."""
        names = list(self.axes)
        grids = [np.asarray(self.axes[n]) for n in names]
        for idx in np.ndindex(*self.values.shape):
            row = [float(grids[k][i]) for k, i in enumerate(idx)]
            row.append(float(self.values[idx]))
            row.extend(float(self.extras[e][idx]) for e in self.extras)
            yield row

    def header(self):
        return list(self.axes) + [self.objective] + list(self.extras)


def config_snapshot(config: ExperimentConfig) -> dict:
    snap = asdict(config)
    snap["constants"] = asdict(config.constants)
    return snap


def _is_better(objective, a, b):
    return a > b if objective == "entropy" else a < b


def optimize(spec: StateFamilySpec, config: ExperimentConfig, objective="entropy", grid_n=None,
             refine=True, decoherence: DecoherenceModel | None = None, threads=1) -> SweepResult:
    """Coarse grid plus golden-section refinement of one family at one configuration."""
    start = time.perf_counter()
    ev = Evaluator(spec, config, objective, decoherence)
    free = spec.free_parameters()
    if grid_n is None:
        grid_n = DEFAULT_GRID_1D if len(free) <= 1 else DEFAULT_GRID_2D
    if grid_n < 3:
        raise DomainError("grid_n must be at least 3")
    axes = {name: np.linspace(lo, hi, grid_n) for name, lo, hi in free}
    if not free:
        value = ev(())
        return SweepResult(objective, spec.family, {}, np.array(value), {}, value, config_snapshot(config),
                           metadata=dict(grid_n=0, refine=False, wall_time=time.perf_counter() - start))
    points = list(np.array(np.meshgrid(*axes.values(), indexing="ij")).reshape(len(free), -1).T)
    values = np.array(_map(ev, [tuple(p) for p in points], threads)).reshape([grid_n] * len(free))
    scores = -values if objective == "entropy" else values
    best_idx = np.unravel_index(int(np.argmin(scores)), scores.shape)
    best = np.array([axes[name][i] for name, i in zip(axes, best_idx)])
    best_score = float(scores[best_idx])
    if refine:
        best, best_score = _refine(ev, free, axes, best, best_score)
    value = -best_score if objective == "entropy" else best_score
    meta = dict(grid_n=grid_n, refine=refine, threads=threads, wall_time=time.perf_counter() - start)
    return SweepResult(objective, spec.family, axes, values, dict(zip(axes, map(float, best))), float(value),
                       config_snapshot(config), metadata=meta)


def _refine(ev, free, axes, best, best_score):
    steps = np.array([axes[name][1] - axes[name][0] for name, _, _ in free])
    x = best.copy()
    for _ in range(50):
        moved = 0.0
        for k, (_, lo, hi) in enumerate(free):
            a, b = max(lo, x[k] - steps[k]), min(hi, x[k] + steps[k])
            if b - a <= GOLDEN_TOL:
                continue

            def f(t, k=k):
                y = x.copy()
                y[k] = t
                return ev.score(tuple(y))

            t, s = golden_section(f, a, b)
            if s < best_score:
                moved = max(moved, abs(t - x[k]))
                x[k] = t
                best_score = s
        if len(free) == 1 or moved < GOLDEN_TOL:
            break
    return x, best_score


def sweep_theta_surface(config: ExperimentConfig, grid_n=101, objective="entropy", threads=1) -> SweepResult:
    """Objective over independent ``(theta_A, theta_B)`` for coherent states."""
    start = time.perf_counter()
    theta = np.linspace(0.0, math.pi, grid_n)
    phases = phase_matrix(config)
    states = [coherent_spin_state(config.j, t) for t in theta]
    measure = entanglement_entropy if objective == "entropy" else pure_negativity

    def row(i):
        return [measure(joint_state(states[i], states[k], phases, config.k)) for k in range(grid_n)]

    values = np.array(_map(row, range(grid_n), threads))
    scores = -values if objective == "entropy" else values
    i, k = np.unravel_index(int(np.argmin(scores)), values.shape)
    return SweepResult(objective, "css", {"theta_A": theta, "theta_B": theta}, values,
                       {"theta_A": float(theta[i]), "theta_B": float(theta[k])}, float(values[i, k]),
                       config_snapshot(config), metadata=dict(grid_n=grid_n, wall_time=time.perf_counter() - start))


def ridge_width(surface: SweepResult) -> float:
    """Full width at half maximum of the entropy ridge, across the ``theta_A = theta_B`` line.

    The cross-section runs along ``(t + u, t - u)`` through the surface
    maximum on the diagonal; the width is measured in radians along ``u``.
    """
    values = surface.values
    n = values.shape[0]
    theta = surface.axes["theta_A"]
    diag = np.diag(values)
    c = int(np.argmax(diag))
    reach = min(c, n - 1 - c)
    offsets = np.arange(-reach, reach + 1)
    profile = values[c + offsets, c - offsets]
    half = diag[c] / 2
    above = profile >= half
    centre = reach
    lo = centre
    while lo > 0 and above[lo - 1]:
        lo -= 1
    hi = centre
    while hi < len(profile) - 1 and above[hi + 1]:
        hi += 1
    step = theta[1] - theta[0]
    return float((hi - lo) * step * math.sqrt(2))


def sweep_parameter(spec: StateFamilySpec, config: ExperimentConfig, name: str, grid, objective="entropy",
                    grid_n=None, decoherence=None, threads=1, configure=None) -> SweepResult:
    """Re-optimize the family at every value of an outer parameter."""
    start = time.perf_counter()
    grid = np.asarray(grid, dtype=float)
    values = np.empty(grid.size)
    extras = {p[0] + "_opt": np.full(grid.size, np.nan) for p in spec.free_parameters()}
    for i, g in enumerate(grid):
        cfg, deco = configure(g) if configure else (config.with_(**{name: g}), decoherence)
        res = optimize(spec, cfg, objective, grid_n, True, deco, threads)
        values[i] = res.optimum_value
        for p, v in res.optimum.items():
            extras[p + "_opt"][i] = v
    best = int(np.argmax(values) if objective == "entropy" else np.argmin(values))
    return SweepResult(objective, spec.family, {name: grid}, values, {name: float(grid[best])}, float(values[best]),
                       config_snapshot(config), extras,
                       metadata=dict(grid_n=grid_n, wall_time=time.perf_counter() - start))


def sweep_time(spec, config, tau_grid, objective="entropy", grid_n=None, threads=1) -> SweepResult:
    if np.any(np.asarray(tau_grid) < 0):
        raise DomainError("interaction times must be non-negative")
    return sweep_parameter(spec, config, "tau", tau_grid, objective, grid_n, None, threads)


def sweep_spin(spec, config, j_list, objective="entropy", grid_n=None, threads=1) -> SweepResult:
    res = sweep_parameter(spec, config, "j", j_list, objective, grid_n, None, threads)
    res.metadata["asymptote"] = float(res.values[-1])
    return res


def sweep_decoherence(config: ExperimentConfig, rate_grid, limit="short", j_list=(0.5, 2, 5, 10),
                      spec: StateFamilySpec | None = None, grid_n=41, threads=1) -> SweepResult:
    """Minimal negativity per spin as a function of the decoherence rate.

    ``rate_grid`` holds ``gamma_short`` in Hz for the short-wavelength limit
    or ``Gamma_long`` in Hz/m^2 for the long-wavelength one; the angle is
    re-optimized at every rate.
    """
    if limit not in ("short", "long"):
        raise DomainError(f"limit must be 'short' or 'long', got {limit!r}")
    rates = np.asarray(rate_grid, dtype=float)
    if np.any(rates < 0):
        raise DomainError("decoherence rates must be non-negative")
    spec = spec or StateFamilySpec()
    start = time.perf_counter()
    js = np.asarray(j_list, dtype=float)
    values = np.empty((js.size, rates.size))
    extras = {p[0] + "_opt": np.full(values.shape, np.nan) for p in spec.free_parameters()}
    for a, j in enumerate(js):
        cfg = config.with_(j=j)
        for b, r in enumerate(rates):
            kw = {"gamma_short": r} if limit == "short" else {"gamma_long": r}
            deco = DecoherenceModel(delta_x=cfg.delta_x, tau=cfg.tau, **kw)
            res = optimize(spec, cfg, "negativity", grid_n, True, deco, threads)
            values[a, b] = res.optimum_value
            for p, v in res.optimum.items():
                extras[p + "_opt"][a, b] = v
    a, b = np.unravel_index(int(np.argmin(values)), values.shape)
    return SweepResult("negativity", spec.family, {"j": js, "rate": rates}, values,
                       {"j": float(js[a]), "rate": float(rates[b])}, float(values[a, b]),
                       config_snapshot(config), extras,
                       metadata=dict(limit=limit, grid_n=grid_n, wall_time=time.perf_counter() - start))


def objective(spec: StateFamilySpec, point: dict, config: ExperimentConfig, kind="entropy",
              decoherence: DecoherenceModel | None = None) -> float:
    """Objective at one family point (keys as in ``spec.free_parameters``)."""
    ev = Evaluator(spec, config, kind, decoherence)
    missing = [n for n in ev.names if n not in point]
    if missing:
        raise DomainError(f"missing family parameters: {missing}")
    return ev(tuple(point[n] for n in ev.names))


def table_values(config: ExperimentConfig, families=FAMILIES, j_list=(0.5, 2, 5, 10), objective="entropy",
                 threads=1) -> dict:
    """``{family: [optimum per j]}`` in the parallel geometry."""
    cfg = replace(config, geometry="parallel")
    out = {}
    for fam in families:
        spec = StateFamilySpec.default(fam)
        out[fam] = [optimize(spec, cfg.with_(j=j), objective, threads=threads).optimum_value for j in j_list]
    return out
