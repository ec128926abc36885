"""Integrity attacks on the pricing loop.

Two attack surfaces exist. A *price* attack perturbs the price signal a
set of victim homes receives (their meters see P + a and respond to it);
a *load* attack adds energy directly to victim loads (or, injected
post-hoc, to the recorded aggregate). Because households respond to price
deterministically, the two surfaces are interchangeable whenever some load
is price-responsive: a price offset a_P moves a household's load by

    a_L = kappa * phi * ((P + a_P)**eps - P**eps)

and that relation inverts to recover the offset that reproduces a desired
load change. With kappa = 0 nothing responds to price and no equivalence
exists.

Temporal shapes: ramp (grows by a fixed step each hour in the window),
sudden (constant level), point (isolated spikes at chosen hours).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

__all__ = [
    "AttackSchedule",
    "apply_to_load",
    "apply_to_price",
    "equivalent_load_delta",
    "equivalent_price_delta",
    "inject_post_hoc",
    "make_point",
    "make_ramp",
    "make_sudden",
    "read_schedule",
    "write_schedule",
]

MODES = ("load", "price")
KINDS = ("ramp", "sudden", "point")


@dataclass(frozen=True, eq=False)
class AttackSchedule:
    """When, whom, and by how much to attack.

    window is [start, end) in hours. values are aggregate magnitudes: a
    load attack splits the hour's value equally across victims when applied
    per home, while a price attack broadcasts it to every victim unscaled
    (a price offset is not divisible across meters). victims = None means
    every home.
    """

    mode: str
    kind: str
    window: tuple[int, int]
    params: dict = field(default_factory=dict)
    victims: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")
        start, end = self.window
        if not (0 <= start < end):
            raise ValueError("window must satisfy 0 <= start < end")
        if self.victims is not None:
            if len(self.victims) == 0:
                raise ValueError("victims must be None (all homes) or non-empty")
            if len(set(self.victims)) != len(self.victims):
                raise ValueError("victims must be distinct")
        if self.kind == "ramp":
            if not np.isfinite(self.params.get("step", np.nan)):
                raise ValueError("ramp needs a finite 'step' parameter")
        elif self.kind == "sudden":
            if not np.isfinite(self.params.get("level", np.nan)):
                raise ValueError("sudden needs a finite 'level' parameter")
        else:
            values = self.params.get("values")
            if not values:
                raise ValueError("point needs a non-empty 'values' map")
            for t, v in values.items():
                if not (start <= int(t) < end):
                    raise ValueError(f"point hour {t} outside window [{start}, {end})")
                if not np.isfinite(v):
                    raise ValueError(f"point value at hour {t} must be finite")

    def __eq__(self, other):
        if not isinstance(other, AttackSchedule):
            return NotImplemented
        return (
            self.mode == other.mode
            and self.kind == other.kind
            and self.window == other.window
            and self.params == other.params
            and self.victims == other.victims
        )

    def value_at(self, t: int) -> float:
        """Aggregate attack magnitude at hour t (0 outside the window)."""
        start, end = self.window
        if not (start <= t < end):
            return 0.0
        if self.kind == "ramp":
            return float(self.params["step"]) * (t - start + 1)
        if self.kind == "sudden":
            return float(self.params["level"])
        return float(self.params["values"].get(t, 0.0))

    def active(self, t: int) -> bool:
        return self.value_at(t) != 0.0

    def victim_indices(self, n_homes: int) -> np.ndarray:
        if self.victims is None:
            return np.arange(n_homes)
        idx = np.asarray(self.victims, dtype=np.int64)
        if np.any(idx < 0) or np.any(idx >= n_homes):
            raise ValueError(f"victim index out of range for {n_homes} homes")
        return idx


def make_ramp(window, step: float, mode: str = "load", victims=None) -> AttackSchedule:
    """Magnitude step, 2*step, ... across the window."""
    return AttackSchedule(
        mode=mode, kind="ramp", window=tuple(window), params={"step": float(step)},
        victims=None if victims is None else tuple(victims),
    )


def make_sudden(window, level: float, mode: str = "load", victims=None) -> AttackSchedule:
    """Constant magnitude across the window."""
    return AttackSchedule(
        mode=mode, kind="sudden", window=tuple(window), params={"level": float(level)},
        victims=None if victims is None else tuple(victims),
    )


def make_point(values: dict, window=None, mode: str = "load", victims=None) -> AttackSchedule:
    """Isolated spikes: {hour: magnitude}. Window defaults to the hull."""
    values = {int(t): float(v) for t, v in values.items()}
    if window is None:
        window = (min(values), max(values) + 1)
    return AttackSchedule(
        mode=mode, kind="point", window=tuple(window), params={"values": values},
        victims=None if victims is None else tuple(victims),
    )


# ---------------------------------------------------------------------------
# primitive applications

def apply_to_price(price: float, delta: float) -> float:
    """Tampered price a victim meter sees; must stay physical."""
    out = price + delta
    if out <= 0:
        raise ValueError("non-physical price: attacked price must stay positive")
    return out


def apply_to_load(load: float, delta: float) -> tuple[float, bool]:
    """Tampered load value, truncated at zero; flags when truncation bit."""
    out = load + delta
    if out < 0:
        return 0.0, True
    return out, False


# ---------------------------------------------------------------------------
# equivalence between the two attack surfaces

def _check_equiv_args(kappa, price, eps):
    if kappa == 0:
        raise ValueError("modes not equivalent: kappa = 0 leaves no price-responsive load")
    if not 0 < kappa <= 1:
        raise ValueError("kappa must lie in (0, 1] for equivalence")
    if price <= 0:
        raise ValueError("non-physical price: price must be positive")
    if eps >= 0:
        raise ValueError("elasticity must be negative")


def equivalent_load_delta(
    price_delta: float,
    base_load: float,
    kappa: float,
    price: float,
    eps: float,
    paper_literal: bool = False,
) -> float:
    """Load change on one household equivalent to a price offset.

    With paper_literal=True, uses the legacy closed form
    a_L = kappa*phi*a_P**eps + (1-kappa)*phi, which treats the attack value
    as the household's entire compromised load evaluated at price a_P
    rather than as an additive delta; it requires a_P > 0.
    """
    _check_equiv_args(kappa, price, eps)
    if paper_literal:
        if price_delta <= 0:
            raise ValueError("non-physical price: literal form needs a positive value")
        return kappa * base_load * price_delta**eps + (1.0 - kappa) * base_load
    new_price = price + price_delta
    if new_price <= 0:
        raise ValueError("non-physical price: attacked price must stay positive")
    return kappa * base_load * (new_price**eps - price**eps)


def equivalent_price_delta(
    load_delta: float,
    base_load: float,
    kappa: float,
    price: float,
    eps: float,
    paper_literal: bool = False,
) -> float:
    """Price offset on one household equivalent to a load change.

    Inverse of equivalent_load_delta. Raises when no positive attacked
    price can produce the requested load change (the elastic share cannot
    go below zero).
    """
    _check_equiv_args(kappa, price, eps)
    if base_load <= 0:
        raise ValueError("no equivalent price exists for a zero base load")
    if paper_literal:
        num = (load_delta - (1.0 - kappa) * base_load) / (kappa * base_load)
        if num <= 0:
            raise ValueError("no equivalent price exists for this load value")
        return num ** (1.0 / eps)
    root = load_delta / (kappa * base_load) + price**eps
    if root <= 0:
        raise ValueError("no equivalent price exists for this load delta")
    return root ** (1.0 / eps) - price


# ---------------------------------------------------------------------------
# post-hoc injection and schedule serialization

def inject_post_hoc(trace, schedule: AttackSchedule):
    """Tamper the recorded aggregate of a finished run (no feedback).

    Only load-mode schedules make sense here: households already responded
    to the genuine price, so a price schedule has nothing to act on.
    Per-home loads (if present) are left untouched -- the attack forges the
    aggregate record, not the physical behavior. Negative results truncate
    to zero and are counted in ``clamped``.
    """
    if schedule.mode != "load":
        raise ValueError("price attacks require closed_loop injection")
    values = np.array([schedule.value_at(int(t)) for t in trace.hour])
    observed = trace.observed_load + values
    neg = observed < 0
    truth = np.where(values != 0.0, 1, trace.attack_truth).astype(np.int8)
    return replace(
        trace,
        observed_load=np.where(neg, 0.0, observed),
        attack_truth=truth,
        clamped=trace.clamped + int(neg.sum()),
    )


def write_schedule(schedule: AttackSchedule, path: str) -> None:
    payload = {
        "mode": schedule.mode,
        "kind": schedule.kind,
        "window": list(schedule.window),
        "victims": None if schedule.victims is None else list(schedule.victims),
        "params": _params_to_json(schedule),
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_schedule(path: str) -> AttackSchedule:
    with open(path) as fh:
        payload = json.load(fh)
    params = dict(payload["params"])
    if payload["kind"] == "point":
        params["values"] = {int(t): float(v) for t, v in params["values"].items()}
    victims = payload.get("victims")
    return AttackSchedule(
        mode=payload["mode"],
        kind=payload["kind"],
        window=tuple(payload["window"]),
        params=params,
        victims=None if victims is None else tuple(victims),
    )


def _params_to_json(schedule: AttackSchedule) -> dict:
    if schedule.kind == "point":
        return {"values": {str(t): v for t, v in schedule.params["values"].items()}}
    return dict(schedule.params)
