"""Price <-> load feedback loop between a utility and DSM households.

Demand is price-elastic: a participating household facing price P serves
only the elastic fraction of its base need phi, so its realized load is

    l = kappa * phi * P**eps + (1 - kappa) * phi

with kappa the DSM participation fraction and eps < 0 the demand
elasticity. The utility inverts the same model to steer the aggregate
toward a target L': given a forecast of the aggregate base load and an
assumed elasticity it posts

    P_t = (L* / forecast) ** (1 / eps_hat)

where L* is the (possibly history-corrected) adjusted target. Because the
posted price shapes the very loads the utility observes next, the two form
a closed loop -- which is exactly the surface the attack and detection
modules probe.

Targeting goals
---------------
goal1: L* = L'_t (track the target directly)
goal2: L* = L'_t + (L'_{t-1} - L_{t-1}) (correct last hour's miss)

A non-positive L* is replaced by a small positive floor so the posted
price stays physical.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from gridloop.attack import inject_post_hoc
from gridloop.loadgen import Microgrid

__all__ = [
    "DemandCurve",
    "GridConfig",
    "SimulationTrace",
    "aggregate_load",
    "elastic_demand",
    "household_load",
    "read_trace",
    "set_price",
    "simulate",
    "write_trace",
]

TRACE_COLUMNS = [
    "hour",
    "price",
    "base_load",
    "forecast",
    "target",
    "lstar",
    "observed_load",
    "attack_truth",
]


@dataclass(frozen=True)
class DemandCurve:
    """Constant-elasticity demand: quantity = scale * (price + market_cost)**elasticity."""

    scale: float
    elasticity: float
    market_cost: float = 0.0

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        if self.elasticity >= 0:
            raise ValueError("elasticity must be negative")
        if self.market_cost < 0:
            raise ValueError("market_cost must be non-negative")


def elastic_demand(curve: DemandCurve, price: float):
    """Quantity demanded at ``price`` (scalar or array)."""
    p = np.asarray(price, dtype=float) + curve.market_cost
    if np.any(p <= 0):
        raise ValueError("non-physical price: effective price must be positive")
    q = curve.scale * p**curve.elasticity
    return float(q) if np.ndim(price) == 0 else q


def household_load(base_load, kappa: float, price, eps: float):
    """Realized load of a household (or vector of households).

    The participating fraction kappa of the base need responds to price
    with elasticity eps; the rest is served inelastically.
    """
    if not 0.0 <= kappa <= 1.0:
        raise ValueError("kappa must lie in [0, 1]")
    if eps >= 0:
        raise ValueError("elasticity must be negative")
    if np.any(np.asarray(price) <= 0):
        raise ValueError("non-physical price: price must be positive")
    phi = np.asarray(base_load, dtype=float)
    out = kappa * phi * np.asarray(price, dtype=float) ** eps + (1.0 - kappa) * phi
    return float(out) if out.ndim == 0 else out


def aggregate_load(loads) -> float:
    """Total load across homes."""
    return float(np.sum(np.asarray(loads, dtype=float)))


def set_price(
    target: float,
    phi_hat: float,
    eps_hat: float,
    goal: str = "goal1",
    prev_target: float | None = None,
    prev_load: float | None = None,
    lstar_floor: float = 10.0,
) -> tuple[float, float]:
    """Posted price and adjusted target for one pricing step.

    goal1 tracks the raw target; goal2 additionally folds in the previous
    step's tracking error (prev_target - prev_load). On the first step,
    where no history exists, goal2 degenerates to goal1. An adjusted
    target <= 0 is replaced by ``lstar_floor``.

    Returns (price, lstar).
    """
    if goal not in ("goal1", "goal2"):
        raise ValueError(f"unknown goal {goal!r}")
    if not np.isfinite(phi_hat) or phi_hat <= 0:
        raise ValueError("invalid forecast: base-load forecast must be positive")
    if eps_hat >= 0:
        raise ValueError("elasticity must be negative")
    if target <= 0:
        raise ValueError("target must be positive")
    if lstar_floor <= 0:
        raise ValueError("lstar_floor must be positive")

    if goal == "goal2" and prev_target is not None and prev_load is not None:
        lstar = target + (prev_target - prev_load)
    else:
        lstar = target
    if lstar <= 0:
        lstar = lstar_floor
    price = (lstar / phi_hat) ** (1.0 / eps_hat)
    return float(price), float(lstar)


@dataclass(frozen=True)
class GridConfig:
    """Closed-loop simulation parameters.

    target may be a scalar (constant target) or a per-hour sequence.
    eps_dsm_hat is the utility's assumed elasticity; None means it matches
    the true household elasticity.
    """

    n_homes: int
    kappa: float
    eps_dsm: float = -1.0
    eps_dsm_hat: float | None = None
    goal: str = "goal1"
    target: float | Sequence[float] = 200.0
    lstar_floor: float = 10.0
    seed: int = 0

    def __post_init__(self):
        if self.n_homes < 1:
            raise ValueError("n_homes must be >= 1")
        if not 0.0 <= self.kappa <= 1.0:
            raise ValueError("kappa must lie in [0, 1]")
        if self.eps_dsm >= 0:
            raise ValueError("eps_dsm must be negative")
        if self.eps_dsm_hat is not None and self.eps_dsm_hat >= 0:
            raise ValueError("eps_dsm_hat must be negative")
        if self.goal not in ("goal1", "goal2"):
            raise ValueError(f"unknown goal {self.goal!r}")
        t = np.asarray(self.target, dtype=float)
        if np.any(t <= 0) or not np.all(np.isfinite(t)):
            raise ValueError("target must be positive")
        if self.lstar_floor <= 0:
            raise ValueError("lstar_floor must be positive")

    @property
    def effective_eps_hat(self) -> float:
        return self.eps_dsm if self.eps_dsm_hat is None else self.eps_dsm_hat


@dataclass
class SimulationTrace:
    """Hourly record of one closed-loop run.

    per_home is the (hours x homes) matrix of realized household loads, or
    None when the trace was read back from CSV. clamped counts household
    loads that a direct manipulation pushed below zero (truncated to 0).
    """

    hour: np.ndarray
    price: np.ndarray
    base_load: np.ndarray
    forecast: np.ndarray
    target: np.ndarray
    lstar: np.ndarray
    observed_load: np.ndarray
    attack_truth: np.ndarray
    per_home: np.ndarray | None = None
    clamped: int = 0

    def __len__(self) -> int:
        return len(self.hour)


def simulate(
    grid,
    cfg: GridConfig,
    forecaster: Callable[[np.ndarray], float] | None = None,
    schedule=None,
    injection: str = "closed_loop",
) -> SimulationTrace:
    """Run the pricing loop over a base-load matrix.

    grid: Microgrid or (hours x homes) array of base loads phi[t, i].
    forecaster: callable mapping the history of aggregate base loads
        (phi totals for hours 0..t-1) to the forecast for hour t. Defaults
        to naive persistence. Hour 0 uses the true total (no history yet).
    schedule: optional AttackSchedule.
    injection: "closed_loop" applies the schedule inside the loop, where
        its effect feeds back through prices and history; "post_hoc" runs
        the loop clean and tampers only the recorded aggregate afterwards.

    The loop itself draws no randomness: identical inputs give bit-identical
    traces.
    """
    base = grid.kwh if isinstance(grid, Microgrid) else np.asarray(grid, dtype=float)
    if base.ndim != 2:
        raise ValueError("grid must be a (hours x homes) matrix")
    n_hours, n_homes = base.shape
    if n_homes != cfg.n_homes:
        raise ValueError(f"grid has {n_homes} homes but config says {cfg.n_homes}")
    if injection not in ("closed_loop", "post_hoc"):
        raise ValueError(f"unknown injection mode {injection!r}")

    targets = np.broadcast_to(np.asarray(cfg.target, dtype=float).ravel(), (n_hours,)) \
        if np.ndim(cfg.target) == 0 else np.asarray(cfg.target, dtype=float)
    if targets.shape != (n_hours,):
        raise ValueError("per-hour target length must match the horizon")

    if forecaster is None:
        forecaster = _naive
    eps = cfg.eps_dsm
    eps_hat = cfg.effective_eps_hat

    in_loop = schedule is not None and injection == "closed_loop"
    victims = schedule.victim_indices(n_homes) if in_loop else None

    base_total = base.sum(axis=1)
    price = np.empty(n_hours)
    forecast = np.empty(n_hours)
    lstar = np.empty(n_hours)
    observed = np.empty(n_hours)
    truth = np.zeros(n_hours, dtype=np.int8)
    per_home = np.empty_like(base)
    clamped = 0

    for t in range(n_hours):
        phi = base[t]
        if t == 0:
            phi_hat = float(base_total[0])
        else:
            phi_hat = float(forecaster(base_total[:t]))
        if not np.isfinite(phi_hat) or phi_hat <= 0:
            raise ValueError("invalid forecast: base-load forecast must be positive")

        p_t, l_t = set_price(
            float(targets[t]),
            phi_hat,
            eps_hat,
            goal=cfg.goal,
            prev_target=float(targets[t - 1]) if t > 0 else None,
            prev_load=float(observed[t - 1]) if t > 0 else None,
            lstar_floor=cfg.lstar_floor,
        )
        price[t] = p_t
        forecast[t] = phi_hat
        lstar[t] = l_t

        delta = schedule.value_at(t) if in_loop else 0.0
        if delta != 0.0 and schedule.mode == "price":
            seen = np.full(n_homes, p_t)
            seen[victims] = seen[victims] + delta
            if np.any(seen <= 0):
                raise ValueError("non-physical price: attacked price must stay positive")
            loads = cfg.kappa * phi * seen**eps + (1.0 - cfg.kappa) * phi
            truth[t] = 1
        else:
            loads = cfg.kappa * phi * p_t**eps + (1.0 - cfg.kappa) * phi
            if delta != 0.0:  # load manipulation, split across victims
                loads = loads.copy()
                loads[victims] = loads[victims] + delta / len(victims)
                neg = loads < 0
                if np.any(neg):
                    clamped += int(neg.sum())
                    loads = np.where(neg, 0.0, loads)
                truth[t] = 1

        per_home[t] = loads
        observed[t] = loads.sum()

    trace = SimulationTrace(
        hour=np.arange(n_hours),
        price=price,
        base_load=base_total,
        forecast=forecast,
        target=targets.copy(),
        lstar=lstar,
        observed_load=observed,
        attack_truth=truth,
        per_home=per_home,
        clamped=clamped,
    )
    if schedule is not None and injection == "post_hoc":
        trace = inject_post_hoc(trace, schedule)
    return trace


def _naive(history: np.ndarray) -> float:
    return float(history[-1])


def write_trace(trace: SimulationTrace, path: str) -> None:
    """Aggregate trace CSV (per-home matrix is not persisted)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_COLUMNS)
        for t in range(len(trace)):
            writer.writerow(
                [int(trace.hour[t])]
                + [
                    repr(float(col[t]))
                    for col in (
                        trace.price,
                        trace.base_load,
                        trace.forecast,
                        trace.target,
                        trace.lstar,
                        trace.observed_load,
                    )
                ]
                + [int(trace.attack_truth[t])]
            )


def read_trace(path: str) -> SimulationTrace:
    cols: dict[str, list[float]] = {c: [] for c in TRACE_COLUMNS}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != TRACE_COLUMNS:
            raise ValueError(f"{path}: expected header {','.join(TRACE_COLUMNS)}")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(TRACE_COLUMNS):
                raise ValueError(f"{path}:{lineno}: malformed row")
            for c, v in zip(TRACE_COLUMNS, row):
                cols[c].append(float(v))
    return SimulationTrace(
        hour=np.asarray(cols["hour"], dtype=np.int64),
        price=np.asarray(cols["price"]),
        base_load=np.asarray(cols["base_load"]),
        forecast=np.asarray(cols["forecast"]),
        target=np.asarray(cols["target"]),
        lstar=np.asarray(cols["lstar"]),
        observed_load=np.asarray(cols["observed_load"]),
        attack_truth=np.asarray(cols["attack_truth"], dtype=np.int8),
        per_home=None,
    )
