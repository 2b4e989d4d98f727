"""Parameter sweeps, matching-point search and loss sensitivity."""

from __future__ import annotations

import csv
import dataclasses
import datetime as _dt
import io
import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import analytic, model
from .comb import build_comb, dephasing_factor
from .dynamics import (
    InputPulse,
    RegimeWarning,
    SimulationConfig,
    calibrate_coupling,
    extract_efficiency,
    simulate,
)
from .errors import AFCError, ConsistencyError, ParameterError

VARIABLES = ("r1", "r2", "d_tilde", "finesse_a", "cooperativity")
ENGINES = ("analytic", "time_domain")

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_max(f, a, b, tol=1e-10, max_iter=500):
    """Maximizer of a unimodal ``f`` on [a, b]."""
    a, b = min(a, b), max(a, b)
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


@dataclass(frozen=True)
class TimeDomainScenario:
    """Everything the time-domain engine needs besides the swept variable.

    ``kappa`` is the field decay rate of the lossless mode cavity.
    """

    comb: model.CombParams
    pulse: InputPulse
    kappa: float
    cooperativity: float = 1.0
    config: SimulationConfig = SimulationConfig()


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    lo: float
    hi: float
    count: int
    fixed: dict = field(default_factory=dict)
    engine: str = "analytic"
    scenario: Optional[TimeDomainScenario] = None

    def __post_init__(self):
        if self.variable not in VARIABLES:
            raise ParameterError(f"unknown sweep variable {self.variable!r}; expected one of {VARIABLES}")
        if self.engine not in ENGINES:
            raise ParameterError(f"unknown engine {self.engine!r}; expected one of {ENGINES}")
        if not self.lo < self.hi:
            raise ParameterError("sweep range needs lo < hi")
        if int(self.count) != self.count or self.count < 2:
            raise ParameterError("sweep needs at least two points")
        if self.engine == "time_domain":
            if self.scenario is None:
                raise ParameterError("time_domain engine needs a TimeDomainScenario")
            if self.variable not in ("cooperativity", "finesse_a"):
                raise ParameterError("time_domain engine sweeps cooperativity or finesse_a only")
        else:
            needed = {"r1", "r2", "d_tilde", "finesse_a"} - {self.variable}
            if self.variable == "cooperativity":
                needed.discard("r1")
            missing = needed - set(self.fixed)
            if missing:
                raise ParameterError(f"missing fixed parameters: {sorted(missing)}")

    def values(self):
        return np.linspace(self.lo, self.hi, int(self.count))


@dataclass(frozen=True)
class SweepPoint:
    value: float
    eta_total: float
    reflection_intensity: float
    eta_dephasing: float
    valid: bool = True
    error: Optional[str] = None


@dataclass(frozen=True)
class SweepResult:
    variable: str
    points: tuple
    argmax: Optional[float]
    metadata: dict

    def column(self, name):
        return np.array([getattr(p, name) for p in self.points])

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([self.variable, "eta_total", "reflection_intensity", "eta_dephasing", "validity_flag"])
        for p in self.points:
            writer.writerow(
                [
                    _fmt(p.value),
                    _fmt(p.eta_total),
                    _fmt(p.reflection_intensity),
                    _fmt(p.eta_dephasing),
                    "ok" if p.valid else (p.error or "invalid"),
                ]
            )
        return buf.getvalue()

    def to_json(self):
        doc = {
            "variable": self.variable,
            "argmax": self.argmax,
            "metadata": self.metadata,
            "points": [dataclasses.asdict(p) for p in self.points],
        }
        return json.dumps(doc, indent=2, sort_keys=True, default=_json_default)


def _fmt(x):
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "nan"
    return f"{x:.9g}"


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if dataclasses.is_dataclass(obj):
        return dataclasses.asdict(obj)
    if hasattr(obj, "value"):
        return obj.value
    raise TypeError(f"not serializable: {type(obj)!r}")


def _analytic_point(variable, value, fixed):
    p = dict(fixed)
    p[variable] = value
    try:
        if variable == "cooperativity":
            p["r1"] = 1.0 - model.t1_for_cooperativity(p["d_tilde"], value)
            if not 0.0 <= p["r1"] <= 1.0:
                raise ParameterError(f"cooperativity {value:g} needs r1 = {p['r1']:g} outside [0, 1]")
        br = analytic.total_efficiency(p["r1"], p["r2"], p["d_tilde"], p["finesse_a"])
        r = analytic.reflection_exact(p["r1"], p["r2"], p["d_tilde"])
        return SweepPoint(value, br.eta_total, r * r, br.eta_dephasing)
    except AFCError as exc:
        eta_dep = model.eta_f(p["finesse_a"]) if p.get("finesse_a", 0) > 0 else float("nan")
        return SweepPoint(value, float("nan"), float("nan"), eta_dep, False, exc.code)


def _time_domain_point(variable, value, sc: TimeDomainScenario):
    try:
        comb_params = sc.comb
        c = sc.cooperativity
        if variable == "finesse_a":
            comb_params = dataclasses.replace(comb_params, finesse_a=value)
        else:
            c = value
        comb = build_comb(comb_params, sc.config.resolution)
        g = calibrate_coupling(comb, sc.kappa, c)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RegimeWarning)
            rec = simulate(sc.kappa, comb, sc.pulse, sc.config, coupling=g)
        rep = extract_efficiency(rec, comb_params.delta, sc.pulse)
        return SweepPoint(value, rep.echo_efficiency, rep.reflected_during_input, dephasing_factor(comb))
    except AFCError as exc:
        return SweepPoint(value, float("nan"), float("nan"), float("nan"), False, exc.code)


def run_sweep(spec: SweepSpec, threads=1) -> SweepResult:
    """Evaluate the chosen engine at every point of ``spec``.

    Points are independent; with ``threads > 1`` they are spread over a
    thread pool and reassembled in grid order.  Per-point failures are
    recorded as invalid points instead of aborting the sweep.
    """
    values = [float(v) for v in spec.values()]
    if spec.engine == "analytic":
        task = lambda v: _analytic_point(spec.variable, v, spec.fixed)  # noqa: E731
    else:
        task = lambda v: _time_domain_point(spec.variable, v, spec.scenario)  # noqa: E731
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            points = tuple(pool.map(task, values))
    else:
        points = tuple(task(v) for v in values)

    valid = [p for p in points if p.valid and not math.isnan(p.eta_total)]
    argmax = max(valid, key=lambda p: p.eta_total).value if valid else None
    snapshot = dict(spec.fixed)
    if spec.scenario is not None:
        snapshot["scenario"] = dataclasses.asdict(spec.scenario)
    metadata = {
        "engine": spec.engine,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "parameters": snapshot,
        "range": [spec.lo, spec.hi, int(spec.count)],
        "reflection_normalization": "intensity |r|^2",
    }
    return SweepResult(spec.variable, points, argmax, metadata)


@dataclass(frozen=True)
class MatchedPoint:
    r1: float
    eta: float
    finesse_c: float
    r1_numeric: float


def find_matched_point(r2, d_tilde, finesse_a, tol=1e-6) -> MatchedPoint:
    """Impedance-matched input mirror, its efficiency and the cavity finesse.

    The closed-form r1 is cross-checked against a golden-section maximization
    of the efficiency over r1 in [0, 1].
    """
    r1 = model.matched_r1(r2, d_tilde)
    eta = analytic.total_efficiency(r1, r2, d_tilde, finesse_a).eta_total
    try:
        finesse = model.cavity_finesse(r1, r2)
    except AFCError:
        finesse = math.inf
    if d_tilde == 0:
        # efficiency vanishes for every r1; nothing to maximize
        return MatchedPoint(r1, eta, finesse, r1)

    def f(x):
        return analytic.total_efficiency(x, r2, d_tilde, finesse_a).eta_total

    r1_num = golden_section_max(f, 0.0, 1.0, tol=1e-12)
    if abs(r1_num - r1) > tol:
        raise ConsistencyError(
            f"closed-form matched r1={r1:.9g} disagrees with numerical maximum {r1_num:.9g}"
        )
    return MatchedPoint(r1, eta, finesse, r1_num)


@dataclass(frozen=True)
class LossRow:
    r2: float
    r1_rematched: float
    eta_rematched: Optional[float]
    eta_fixed: Optional[float]
    valid: bool = True


def loss_sensitivity(r2_values, d_tilde, finesse_a, rematch=True, baseline_r2=None):
    """Efficiency as the back mirror degrades.

    ``rematch=True`` re-matches r1 for each r2, ``False`` holds r1 at the
    value matched to ``baseline_r2`` (default: first entry), ``None`` emits
    both columns.
    """
    r2_values = [float(r) for r in r2_values]
    if not r2_values:
        return []
    for r in r2_values:
        if not (0.0 < r <= 1.0):
            raise ParameterError(f"r2 must lie in (0, 1], got {r!r}")
    base = r2_values[0] if baseline_r2 is None else baseline_r2
    r1_fixed = model.matched_r1(base, d_tilde)
    rows = []
    for r2 in r2_values:
        r1 = model.matched_r1(r2, d_tilde)
        ok = True
        eta_re = eta_fx = None
        try:
            if rematch in (True, None):
                eta_re = analytic.total_efficiency(r1, r2, d_tilde, finesse_a).eta_total
            if rematch in (False, None):
                eta_fx = analytic.total_efficiency(r1_fixed, r2, d_tilde, finesse_a).eta_total
        except AFCError:
            ok = False
        rows.append(LossRow(r2, r1, eta_re, eta_fx, ok))
    return rows


def loss_table_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["r2", "r1_rematched", "eta_rematched", "eta_fixed_r1", "validity_flag"])
    for r in rows:
        w.writerow(
            [
                _fmt(r.r2),
                _fmt(r.r1_rematched),
                "" if r.eta_rematched is None else _fmt(r.eta_rematched),
                "" if r.eta_fixed is None else _fmt(r.eta_fixed),
                "ok" if r.valid else "invalid",
            ]
        )
    return buf.getvalue()


# reference layout: R2 = 0.999, d~ = 0.1, r1 on [0.60, 0.999] with 400 points
FIGURE2_R2 = 0.999
FIGURE2_D_TILDE = 0.1
FIGURE2_FINESSES = (10.0, 6.0, 4.0)
FIGURE2_RANGE = (0.60, 0.999, 400)


def figure2_curves(threads=1):
    """Efficiency-vs-r1 sweeps for the three comb finesses and the reflection curve."""
    lo, hi, n = FIGURE2_RANGE
    curves = {}
    for fa in FIGURE2_FINESSES:
        spec = SweepSpec(
            "r1", lo, hi, n, fixed={"r2": FIGURE2_R2, "d_tilde": FIGURE2_D_TILDE, "finesse_a": fa}
        )
        curves[fa] = run_sweep(spec, threads=threads)
    return curves
