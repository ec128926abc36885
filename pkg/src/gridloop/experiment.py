"""End-to-end experiment protocol and the per-scenario pipeline stages.

A full run sweeps participation levels x attack kinds over seeded
replications. Each replication bootstraps a fresh micro-grid, simulates
the nominal pricing loop per participation level, injects each attack
kind post-hoc into the recorded aggregate of the final day, runs every
detector over the test window, and scores them at their ROC-selected
operating points. Per-scenario artifacts (trace.csv, detections.csv,
metrics.json, roc.csv) land in kappa_*/<attack>/rep_*/ directories under
the output root, plus summary.json / summary.csv aggregated over
replications.

The detect/evaluate stage functions here are exactly what the CLI
subcommands call, so chaining the subcommands by hand reproduces a
run_experiment scenario bit for bit.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from gridloop import classifiers, detect, evaluation, forecast
from gridloop.attack import AttackSchedule, inject_post_hoc, make_point, make_ramp, make_sudden
from gridloop.feedback import GridConfig, SimulationTrace, simulate, write_trace
from gridloop.ingest import HourlySeries
from gridloop.loadgen import BootstrapConfig, synthesize_microgrid
from gridloop.seeds import seed_sequence, stream
from gridloop.synth import synthetic_hourly_templates

__all__ = [
    "DETECTORS",
    "TABLE_DETECTORS",
    "ExperimentConfig",
    "detect_stage",
    "evaluate_stage",
    "prepare_detectors",
    "protocol_schedule",
    "run_experiment",
    "scenario_dir",
]

# everything emitted per scenario; TABLE_DETECTORS is the comparison set
# used for cross-detector aggregate statements (interval-scored CUSUM is a
# reporting variant of the same statistic, not an extra detector)
DETECTORS = ("glrt", "cusum", "cusum_interval", "logreg", "gnb", "forest")
TABLE_DETECTORS = ("glrt", "cusum", "logreg", "gnb", "forest")

ATTACK_KINDS = ("ramp", "sudden", "point")

# point-spike template: (fraction of the attack window as 24ths, magnitude)
_POINT_PATTERN = ((0, 250.0), (5, 200.0), (10, 300.0), (13, 100.0), (22, 150.0))
_RAMP_STEP = 5.0
_SUDDEN_LEVEL = 150.0


@dataclass(frozen=True)
class ExperimentConfig:
    """Full protocol description; defaults reproduce the reference setup."""

    n_homes: int = 200
    kappas: tuple[float, ...] = (0.1, 0.9)
    attacks: tuple[str, ...] = ATTACK_KINDS
    train_days: int = 28
    test_hours: int = 48
    attack_hours: int = 24
    eps_dsm: float = -1.0
    eps_dsm_hat: float | None = None
    goal: str = "goal1"
    target: float = 200.0
    lstar_floor: float = 10.0
    seed: int = 0
    replications: int = 1
    template_homes: int = 7
    template_days: int = 28
    glrt_window: int = 24
    glrt_p_fa: float = 0.05
    cusum_k_sigma: float = 0.5
    cusum_h_sigma: float = 2.0
    ar_order: int = 2
    feature_lags: int = 24
    forest_trees: int = 100
    sweep_points: int = 101
    cusum_sweep_sigmas: float = 6.0

    def __post_init__(self):
        if not self.kappas:
            raise ValueError("need at least one kappa")
        for k in self.kappas:
            if not 0.0 <= k <= 1.0:
                raise ValueError("kappa must lie in [0, 1]")
        for a in self.attacks:
            if a not in ATTACK_KINDS:
                raise ValueError(f"unknown attack kind {a!r}")
        if self.train_days < 4:
            raise ValueError("train_days must be >= 4")
        if not 1 <= self.attack_hours <= self.test_hours:
            raise ValueError("need 1 <= attack_hours <= test_hours")
        if self.attack_hours >= self.test_hours:
            raise ValueError("test window needs nominal hours before the attack")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.sweep_points < 2:
            raise ValueError("sweep_points must be >= 2")
        # delegate the grid-parameter checks
        GridConfig(
            n_homes=self.n_homes,
            kappa=self.kappas[0],
            eps_dsm=self.eps_dsm,
            eps_dsm_hat=self.eps_dsm_hat,
            goal=self.goal,
            target=self.target,
            lstar_floor=self.lstar_floor,
        )

    @property
    def train_hours(self) -> int:
        return 24 * self.train_days

    @property
    def horizon(self) -> int:
        return self.train_hours + self.test_hours

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            payload = json.load(fh)
        known = set(cls.__dataclass_fields__)
        unknown = set(payload) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        for key in ("kappas", "attacks"):
            if key in payload:
                payload[key] = tuple(payload[key])
        return cls(**payload)


def protocol_schedule(kind: str, cfg: ExperimentConfig) -> AttackSchedule:
    """The reference attack for `kind`, aimed at the run's final hours.

    Window is the last attack_hours of the horizon. Ramp grows by 5 kWh
    each hour, sudden adds a constant 150 kWh, and point drops five
    spikes (250/200/300/100/150 kWh) at fixed offsets of the window.
    """
    start = cfg.horizon - cfg.attack_hours
    end = cfg.horizon
    if kind == "ramp":
        return make_ramp((start, end), step=_RAMP_STEP)
    if kind == "sudden":
        return make_sudden((start, end), level=_SUDDEN_LEVEL)
    if kind == "point":
        values = {}
        for frac24, magnitude in _POINT_PATTERN:
            t = start + int(frac24 * cfg.attack_hours / 24)
            values.setdefault(t, magnitude)
        return make_point(values, window=(start, end))
    raise ValueError(f"unknown attack kind {kind!r}")


def scenario_dir(out_root, kappa: float, attack: str, rep: int) -> Path:
    return Path(out_root) / f"kappa_{kappa:g}" / attack / f"rep_{rep:03d}"


# ---------------------------------------------------------------------------
# detect stage

@dataclass
class SharedDetectors:
    """Per-(kappa, replication) fits reused across attack kinds."""

    ar_model: forecast.SeasonalARModel
    predictions: np.ndarray
    models: dict


def _forest_seed(cfg: ExperimentConfig, rep: int, kappa_index: int) -> int:
    return int(seed_sequence(cfg.seed, "forest", rep, kappa_index).generate_state(1)[0])


def prepare_detectors(
    train_series: np.ndarray, cfg: ExperimentConfig, kappa_index: int, rep: int
) -> SharedDetectors:
    """Fit everything that depends only on the nominal training window."""
    model = forecast.fit_seasonal_ar(train_series, order=cfg.ar_order)
    predictions = forecast.forecast(model, cfg.test_hours)

    rng = stream(cfg.seed, "train_attacks", rep, kappa_index)
    doubled, labels = detect.build_training_set(train_series, rng)
    X, y = detect.make_features(doubled, labels, cfg.feature_lags)
    models = {
        "logreg": classifiers.LogisticRegression().fit(X, y),
        "gnb": classifiers.GaussianNaiveBayes().fit(X, y),
        "forest": classifiers.RandomForest(
            n_trees=cfg.forest_trees, seed=_forest_seed(cfg, rep, kappa_index)
        ).fit(X, y),
    }
    return SharedDetectors(ar_model=model, predictions=predictions, models=models)


def detect_stage(
    trace: SimulationTrace,
    cfg: ExperimentConfig,
    kappa: float,
    attack: str,
    kappa_index: int,
    rep: int,
    out_dir,
    shared: SharedDetectors | None = None,
) -> None:
    """Run every detector over the trace's test window.

    Writes detections.csv (per-hour score, default-config decision, truth
    label for each detector, plus the raw forecast residuals) and
    detect_meta.json (noise scale and detector settings, enough for the
    evaluate stage to rebuild threshold sweeps exactly).
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    observed = trace.observed_load
    labels = trace.attack_truth
    if len(observed) != cfg.horizon:
        raise ValueError(f"trace has {len(observed)} hours, config wants {cfg.horizon}")
    train = observed[: cfg.train_hours]
    if np.any(labels[: cfg.train_hours]):
        raise ValueError("training window is attacked; detectors assume a clean train set")

    if shared is None:
        shared = prepare_detectors(train, cfg, kappa_index, rep)
    sigma = shared.ar_model.sigma
    test = observed[cfg.train_hours :]
    test_labels = labels[cfg.train_hours :]
    residuals = test - shared.predictions

    glrt_res = detect.glrt_detect(
        residuals,
        detect.GlrtConfig(sigma=sigma, window=cfg.glrt_window, p_fa=cfg.glrt_p_fa),
    )
    cusum_res = detect.cusum_detect(
        residuals,
        detect.CusumConfig(
            sigma=sigma, k=cfg.cusum_k_sigma * sigma, h=cfg.cusum_h_sigma * sigma
        ),
    )

    X_all, _ = detect.make_features(observed, labels, cfg.feature_lags)
    X_test = X_all[cfg.train_hours - cfg.feature_lags :]
    scores = {name: model.predict_score(X_test) for name, model in shared.models.items()}

    hours = trace.hour[cfg.train_hours :]
    with open(out_dir / "detections.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["hour", "detector", "score", "decision", "label"])
        rows = {
            "glrt": (glrt_res.scores, glrt_res.decisions),
            "cusum": (cusum_res.scores, cusum_res.decisions),
            "cusum_interval": (cusum_res.scores, cusum_res.interval_decisions),
            "logreg": (scores["logreg"], scores["logreg"] >= 0.5),
            "gnb": (scores["gnb"], scores["gnb"] >= 0.5),
            "forest": (scores["forest"], scores["forest"] >= 0.5),
            "residual": (residuals, np.zeros(len(residuals), dtype=np.int8)),
        }
        for name, (svals, dvals) in rows.items():
            for i, hour in enumerate(hours):
                writer.writerow(
                    [int(hour), name, repr(float(svals[i])), int(dvals[i]), int(test_labels[i])]
                )

    meta = {
        "kappa": kappa,
        "attack_type": attack,
        "rep": rep,
        "sigma": sigma,
        "ar_order": shared.ar_model.order,
        "train_hours": cfg.train_hours,
        "glrt": {"window": cfg.glrt_window, "p_fa": cfg.glrt_p_fa},
        "cusum": {"k": cfg.cusum_k_sigma * sigma, "h": cfg.cusum_h_sigma * sigma},
        "sweep": {
            "points": cfg.sweep_points,
            "cusum_sigmas": cfg.cusum_sweep_sigmas,
            "cusum_k": cfg.cusum_k_sigma * sigma,
        },
    }
    with open(out_dir / "detect_meta.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# evaluate stage

def _read_detections(path):
    table: dict[str, dict[str, list[float]]] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["hour", "detector", "score", "decision", "label"]:
            raise ValueError(f"{path}: unexpected header {header}")
        for row in reader:
            rec = table.setdefault(row[1], {"score": [], "label": []})
            rec["score"].append(float(row[2]))
            rec["label"].append(int(row[4]))
    return {
        name: (np.asarray(rec["score"]), np.asarray(rec["label"], dtype=np.int8))
        for name, rec in table.items()
    }


def _json_float(x: float):
    if math.isnan(x):
        return None
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return x


def _sweep_best(thresholds, rows, labels):
    """ROC + metrics at the distance-optimal threshold of a sweep."""
    roc = evaluation.roc_from_sweep(thresholds, rows, labels)
    th = evaluation.best_threshold(roc)
    if np.isposinf(th):
        decisions = np.zeros(len(labels), dtype=np.int8)
    elif np.isneginf(th):
        decisions = np.ones(len(labels), dtype=np.int8)
    else:
        decisions = rows[int(np.nonzero(thresholds == th)[0][0])]
    ms = evaluation.metrics_from_confusion(evaluation.confusion(labels, decisions))
    return roc, th, ms


def evaluate_stage(det_dir, out_dir=None) -> list[dict]:
    """Score a detect-stage directory into metrics.json and roc.csv.

    Classifier-style detectors are evaluated from their stored scores;
    GLRT and CUSUM threshold sweeps are rebuilt from the stored residuals
    and noise scale. Returns the metrics entries (one per detector).
    """
    det_dir = Path(det_dir)
    out_dir = det_dir if out_dir is None else Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(det_dir / "detect_meta.json") as fh:
        meta = json.load(fh)
    table = _read_detections(det_dir / "detections.csv")
    residuals, labels = table["residual"]
    sigma = float(meta["sigma"])
    sweep = meta["sweep"]

    curves: dict[str, evaluation.RocCurve] = {}
    entries = []
    for name in DETECTORS:
        if name == "glrt":
            ths, rows = detect.glrt_sweep(
                residuals, sigma, window=int(meta["glrt"]["window"]), n_points=int(sweep["points"])
            )
            roc, th, ms = _sweep_best(ths, rows, labels)
        elif name in ("cusum", "cusum_interval"):
            ths, rows = detect.cusum_sweep(
                residuals,
                sigma,
                k=float(sweep["cusum_k"]),
                n_points=int(sweep["points"]),
                h_max_sigmas=float(sweep["cusum_sigmas"]),
                interval=name == "cusum_interval",
            )
            roc, th, ms = _sweep_best(ths, rows, labels)
        else:
            scores, labels_c = table[name]
            roc = evaluation.roc_from_scores(scores, labels_c)
            th = evaluation.best_threshold(roc)
            ms = evaluation.metrics_at_threshold(scores, labels_c, th)
        curves[name] = roc
        entries.append(
            {
                "detector": name,
                "kappa": meta["kappa"],
                "attack_type": meta["attack_type"],
                "accuracy": _json_float(ms.accuracy),
                "precision": _json_float(ms.precision),
                "recall": _json_float(ms.recall),
                "fpr": _json_float(ms.fpr),
                "auc": _json_float(roc.auc),
                "best_threshold": _json_float(th),
                "undefined": list(ms.undefined),
            }
        )

    with open(out_dir / "metrics.json", "w") as fh:
        json.dump(entries, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(out_dir / "roc.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["detector", "threshold", "fpr", "tpr"])
        for name in DETECTORS:
            roc = curves[name]
            for i in range(len(roc.thresholds)):
                writer.writerow(
                    [name, repr(float(roc.thresholds[i])), repr(float(roc.fpr[i])), repr(float(roc.tpr[i]))]
                )
    return entries


# ---------------------------------------------------------------------------
# full protocol

def _metric_value(entry: dict, key: str) -> float:
    v = entry[key]
    if v is None:
        return float("nan")
    if isinstance(v, str):
        return float("inf") if v == "Infinity" else float("-inf")
    return float(v)


def run_experiment(cfg: ExperimentConfig, out_root, templates: list[HourlySeries] | None = None) -> dict:
    """Run the whole protocol; returns the summary (also written to disk)."""
    out_root = Path(out_root)
    out_root.mkdir(parents=True, exist_ok=True)
    if templates is None:
        templates = synthetic_hourly_templates(
            cfg.template_homes, cfg.template_days, seed=cfg.seed
        )

    num_days = -(-cfg.horizon // 24)
    per_scenario: dict[tuple, list[list[dict]]] = {}
    for rep in range(cfg.replications):
        grid_seed = int(seed_sequence(cfg.seed, "grid", rep).generate_state(1)[0])
        grid = synthesize_microgrid(
            templates, BootstrapConfig(n_homes=cfg.n_homes, num_days=num_days, seed=grid_seed)
        )
        base = grid.kwh[: cfg.horizon]
        for k_idx, kappa in enumerate(cfg.kappas):
            gcfg = GridConfig(
                n_homes=cfg.n_homes,
                kappa=kappa,
                eps_dsm=cfg.eps_dsm,
                eps_dsm_hat=cfg.eps_dsm_hat,
                goal=cfg.goal,
                target=cfg.target,
                lstar_floor=cfg.lstar_floor,
                seed=cfg.seed,
            )
            nominal = simulate(base, gcfg)
            shared = prepare_detectors(
                nominal.observed_load[: cfg.train_hours], cfg, k_idx, rep
            )
            for attack in cfg.attacks:
                schedule = protocol_schedule(attack, cfg)
                trace = inject_post_hoc(nominal, schedule)
                sdir = scenario_dir(out_root, kappa, attack, rep)
                sdir.mkdir(parents=True, exist_ok=True)
                write_trace(trace, sdir / "trace.csv")
                detect_stage(trace, cfg, kappa, attack, k_idx, rep, sdir, shared=shared)
                entries = evaluate_stage(sdir)
                per_scenario.setdefault((kappa, attack), []).append(entries)

    table = []
    for (kappa, attack), reps in sorted(per_scenario.items()):
        for detector in DETECTORS:
            row = {"kappa": kappa, "attack_type": attack, "detector": detector,
                   "replications": len(reps)}
            for key in ("accuracy", "precision", "recall", "fpr", "auc"):
                vals = np.array(
                    [
                        _metric_value(next(e for e in rep_entries if e["detector"] == detector), key)
                        for rep_entries in reps
                    ]
                )
                finite = vals[np.isfinite(vals)]
                row[key] = _json_float(float(np.mean(finite))) if len(finite) else None
                row[f"{key}_std"] = (
                    _json_float(float(np.std(finite, ddof=1))) if len(finite) > 1 else 0.0
                )
            table.append(row)

    summary = {
        "config": asdict(cfg),
        "table": table,
        "scenarios": [
            {
                "kappa": kappa,
                "attack_type": attack,
                "replications": len(reps),
                "dir": str(Path(f"kappa_{kappa:g}") / attack),
            }
            for (kappa, attack), reps in sorted(per_scenario.items())
        ],
    }
    with open(out_root / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")

    metric_cols = []
    for key in ("accuracy", "precision", "recall", "fpr", "auc"):
        metric_cols += [key, f"{key}_std"]
    with open(out_root / "summary.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["kappa", "attack_type", "detector", "replications"] + metric_cols)
        for row in table:
            writer.writerow(
                [row["kappa"], row["attack_type"], row["detector"], row["replications"]]
                + [
                    "nan" if row[c] is None else repr(float(row[c])) if not isinstance(row[c], str) else row[c]
                    for c in metric_cols
                ]
            )
    return summary
