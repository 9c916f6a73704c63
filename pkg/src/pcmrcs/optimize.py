"""Bandwidth objective and a bounded derivative-free design search.

Two built-in engines score a unit-cell geometry:

* ``TL_MODEL``: grounded slab loaded by a quasi-static sheet impedance per
  principal axis (fast, seconds for a whole optimisation);
* ``SOLVER``: the full-wave FDTD solver (minutes per design).

Any callable ``engine(values: dict) -> float`` can stand in as a surrogate;
its return value is maximised directly.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Mapping, Union

import numpy as np
from scipy.constants import epsilon_0 as EPS0
from scipy.constants import mu_0 as MU0

from .errors import AxisError, FitError, NoFeasibleError
from .geometry import StackUp, UnitCellGeometry, build_unit_cell
from .jones import pcr_array, rotate_basis, tl_converter_model

GEOMETRY_KEYS = ("major_axis", "minor_axis", "period", "h")


class Engine(str, Enum):
    TL_MODEL = "TL_MODEL"
    SOLVER = "SOLVER"


EngineLike = Union[Engine, str, Callable[[Mapping[str, float]], float]]


@dataclass(frozen=True)
class DesignVector:
    """Named parameters (mm) with inclusive (min, max) bounds."""

    values: dict
    bounds: dict

    def __post_init__(self):
        if set(self.values) != set(self.bounds):
            raise ValueError("values and bounds must name the same parameters")
        for k, (lo, hi) in self.bounds.items():
            if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
                raise ValueError(f"bad bounds for {k}: ({lo}, {hi})")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(sorted(self.values))

    def in_bounds(self) -> bool:
        return all(self.bounds[k][0] <= v <= self.bounds[k][1] for k, v in self.values.items())


def design_from_cell(cell: UnitCellGeometry, rel: float = 0.25) -> DesignVector:
    """Design vector at ``cell`` with bounds of +-``rel`` around each value."""
    vals = {
        "major_axis": cell.major_axis,
        "minor_axis": cell.minor_axis,
        "period": cell.period,
        "h": cell.stack.h,
    }
    return DesignVector(vals, {k: (v * (1 - rel), v * (1 + rel)) for k, v in vals.items()})


def cell_from_values(values: Mapping[str, float], base: UnitCellGeometry | None = None) -> UnitCellGeometry:
    """Geometry for a design point; missing parameters come from ``base`` (paper cell by default)."""
    from .geometry import paper_cell

    base = base or paper_cell()
    stack = base.stack
    if "h" in values:
        stack = StackUp(stack.substrate, float(values["h"]), stack.t_m, stack.ground)
    return build_unit_cell(
        float(values.get("period", base.period)),
        float(values.get("major_axis", base.major_axis)),
        float(values.get("minor_axis", base.minor_axis)),
        stack,
        base.handedness,
    )


def is_feasible(values: Mapping[str, float], base: UnitCellGeometry | None = None) -> bool:
    if not any(k in values for k in GEOMETRY_KEYS):
        return True
    try:
        cell_from_values(values, base)
    except (FitError, AxisError, ValueError):
        return False
    return True


# --- quasi-static sheet model ---------------------------------------------------


def sheet_lc(length: float, width: float, period: float, eps_r: float) -> tuple[float, float]:
    """Series L (H) and C (F) of a patch grid for E along a patch dimension ``length``.

    Strip-grid formulas: the gap ``period - length`` sets a capacitive
    grid with ``C = eps0 * eps_eff * (2p/pi) * ln(csc(pi g / 2p))`` and the
    transverse patch ``width`` sets the inductance of the current path,
    ``L = mu0 * (p/2pi) * ln(csc(pi w / 2p))``, with ``eps_eff`` the mean
    of the substrate and air permittivities. All lengths in mm.
    """
    p = period * 1e-3
    gap = max(period - length, 1e-3 * period)
    w = min(max(width, 1e-3 * period), period)
    eps_eff = 0.5 * (eps_r + 1.0)
    c = EPS0 * eps_eff * (2.0 * p / math.pi) * math.log(1.0 / math.sin(math.pi * gap / (2.0 * period)))
    l_ = MU0 * (p / (2.0 * math.pi)) * math.log(1.0 / math.sin(math.pi * w / (2.0 * period)))
    return l_, max(c, 1e-30)


def tl_spectrum_r(cell: UnitCellGeometry, freqs) -> np.ndarray:
    """(n, 2, 2) XY Jones matrices from the sheet model."""
    eps_r = cell.stack.substrate.eps_r
    lu, cu = sheet_lc(cell.major_axis, cell.minor_axis, cell.period, eps_r)
    lv, cv = sheet_lc(cell.minor_axis, cell.major_axis, cell.period, eps_r)
    out = []
    for f in np.asarray(freqs, dtype=float):
        w = 2.0 * math.pi * f * 1e9
        zu = 1j * (w * lu - 1.0 / (w * cu))
        zv = 1j * (w * lv - 1.0 / (w * cv))
        j = tl_converter_model(cell.stack, zu, zv, f)
        out.append(rotate_basis(j, cell.orientation).r)
    return np.array(out)


# --- objective ---------------------------------------------------------------------


def widest_band(freqs, ok) -> tuple[float, float] | None:
    """(f_lo, f_hi) of the widest contiguous run of True samples."""
    best, start = None, None
    ok = list(ok) + [False]
    for i, flag in enumerate(ok):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            lo, hi = freqs[start], freqs[i - 1]
            if best is None or hi - lo > best[1] - best[0]:
                best = (float(lo), float(hi))
            start = None
    return best


def fractional_bandwidth(freqs, pcr, threshold) -> float:
    band = widest_band(np.asarray(freqs), np.asarray(pcr) >= threshold)
    if band is None:
        return 0.0
    lo, hi = band
    return 2.0 * (hi - lo) / (hi + lo)


def evaluate_design(
    values: Mapping[str, float],
    band=(20.0, 60.0),
    threshold: float = 0.9,
    engine: EngineLike = Engine.TL_MODEL,
    n_freq: int = 401,
    base: UnitCellGeometry | None = None,
    solver_config=None,
) -> float:
    """Fractional width of the widest contiguous sub-band with PCR >= threshold.

    Raises ``FitError``/``AxisError`` for infeasible geometry. A callable
    engine is returned as-is (surrogate).
    """
    if callable(engine) and not isinstance(engine, (Engine, str)):
        return float(engine(values))
    engine = Engine(engine)
    cell = cell_from_values(values, base)
    if engine is Engine.TL_MODEL:
        freqs = np.linspace(band[0], band[1], n_freq)
        pcr = pcr_array(tl_spectrum_r(cell, freqs))
    else:
        from .solver import SolverConfig, run_unit_cell

        cfg = solver_config or SolverConfig(band=tuple(band))
        spec = run_unit_cell(cell, cfg)
        freqs, pcr = spec.freqs, spec.pcr()
    return fractional_bandwidth(freqs, pcr, threshold)


# --- pattern search ----------------------------------------------------------------


@dataclass(frozen=True)
class TraceRow:
    iteration: int
    evaluations: int
    values: dict
    score: float
    best_score: float


@dataclass
class OptimizeResult:
    best: DesignVector
    score: float
    initial_score: float
    trace: list = field(default_factory=list)
    evaluations: int = 0


def optimize_design(
    start: DesignVector,
    band=(20.0, 60.0),
    threshold: float = 0.9,
    budget: int = 200,
    engine: EngineLike = Engine.TL_MODEL,
    seed: int = 0,
    tol: float = 1e-9,
    threads: int = 1,
    base: UnitCellGeometry | None = None,
    **engine_kw,
) -> OptimizeResult:
    """Compass pattern search with seeded random restarts.

    Steps start at a quarter of each bound range, poll +- along every free
    coordinate in sorted-name order, move to the best strict improvement,
    and halve when nothing improves. Once every step is below ``tol`` times
    its range, the search restarts from a seeded uniform point. Moves are
    only ever accepted on improvement, so the best score never decreases.
    Infeasible points score -inf and still consume budget.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    names = start.names
    lo = np.array([start.bounds[k][0] for k in names])
    hi = np.array([start.bounds[k][1] for k in names])
    span = hi - lo
    free = span > 0
    rng = np.random.default_rng(seed)
    used = 0
    trace: list[TraceRow] = []
    best_x, best_s = None, -math.inf
    it = 0

    def to_values(x):
        return {k: float(v) for k, v in zip(names, x)}

    def score_many(xs):
        nonlocal used
        xs = xs[: budget - used]
        used += len(xs)

        def one(x):
            vals = to_values(x)
            if not is_feasible(vals, base):
                return -math.inf
            return evaluate_design(vals, band, threshold, engine, base=base, **engine_kw)

        if threads > 1 and len(xs) > 1:
            with ThreadPoolExecutor(threads) as ex:
                return xs, list(ex.map(one, xs))
        return xs, [one(x) for x in xs]

    def record(x, s):
        nonlocal best_x, best_s
        if s > best_s:
            best_x, best_s = x.copy(), s
        trace.append(TraceRow(it, used, to_values(x), s, best_s))

    x = np.clip(np.array([start.values[k] for k in names], dtype=float), lo, hi)
    _, (s0,) = score_many([x])
    initial = s0
    record(x, s0)
    while used < budget:
        # restart point must be feasible before polling starts
        while s0 == -math.inf and used < budget:
            it += 1
            x = lo + rng.random(len(names)) * span
            _, (s0,) = score_many([x])
            record(x, s0)
        if s0 == -math.inf:
            break
        step = 0.25 * span
        cur, cur_s = x.copy(), s0
        while used < budget and np.any(step[free] >= tol * span[free]):
            it += 1
            polls = []
            for d in np.flatnonzero(free):
                for sgn in (1.0, -1.0):
                    y = cur.copy()
                    y[d] = min(max(y[d] + sgn * step[d], lo[d]), hi[d])
                    if y[d] != cur[d]:
                        polls.append(y)
            if not polls:
                break
            polls, scores = score_many(polls)
            for y, s in zip(polls, scores):
                record(y, s)
            k = int(np.argmax(scores))
            if scores[k] > cur_s:
                cur, cur_s = polls[k], scores[k]
            else:
                step = step * 0.5
        if used >= budget:
            break
        it += 1
        x = lo + rng.random(len(names)) * span
        _, (s0,) = score_many([x])
        record(x, s0)
    if best_x is None:
        raise NoFeasibleError(f"no feasible design among {used} evaluations")
    best = DesignVector(to_values(best_x), dict(start.bounds))
    return OptimizeResult(best, best_s, initial, trace, used)


def paper_design(rel: float = 0.25) -> DesignVector:
    from .geometry import paper_cell

    return design_from_cell(paper_cell(), rel)


__all__ = [
    "DesignVector",
    "Engine",
    "OptimizeResult",
    "TraceRow",
    "design_from_cell",
    "cell_from_values",
    "evaluate_design",
    "fractional_bandwidth",
    "is_feasible",
    "optimize_design",
    "paper_design",
    "sheet_lc",
    "tl_spectrum_r",
    "widest_band",
]
