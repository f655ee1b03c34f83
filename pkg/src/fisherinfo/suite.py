"""Expand a ``RunConfig`` into independent tasks, run them and collect a report."""

from __future__ import annotations

import itertools
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .channel import ChannelModel, bayesian_var_identities, var_additivity_mc_check
from .config import RunConfig, config_from_dict
from .density import GridSpec, default_grid, default_grid_2d, grid_for, materialize, shared_grid
from .errors import FisherInfoError
from .harness import (
    IDENTITY_STEPS,
    identity_step_check,
    bayesian_proof_sweep,
    communications_proof_sweep,
    cross_pipeline_check,
    de_bruijn_check,
    dependent_fii_check,
    fii_check,
    gaussianity_gap_probe,
    scaled_mixture,
    stam_check,
    standard_gaussian_like,
)
from .mutual_info import moment_matched_nongaussian
from .results import DEGENERATE, FAIL, PASS, CheckResult, SweepReport
from .specs import is_2d

# numerical failures inside a check; anything else is a bug and propagates
NUMERICAL_ERRORS = (FisherInfoError, ValueError, ArithmeticError, np.linalg.LinAlgError)


@dataclass
class Entry:
    """One executed task: ``id`` is unique, ``check`` is the selection it belongs to."""

    id: str
    check: str
    result: CheckResult | SweepReport

    @property
    def verdict(self) -> str:
        return self.result.verdict

    def to_dict(self):
        kind = "sweep" if isinstance(self.result, SweepReport) else "check"
        return {"id": self.id, "check": self.check, "type": kind, "result": self.result.to_dict()}

    @classmethod
    def from_dict(cls, d):
        load = SweepReport.from_dict if d["type"] == "sweep" else CheckResult.from_dict
        return cls(d["id"], d["check"], load(d["result"]))


@dataclass
class RunReport:
    config: RunConfig
    entries: list
    version: str = __version__
    timing: dict = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        return PASS if self.entries and all(e.verdict == PASS for e in self.entries) else FAIL

    def counts(self) -> dict:
        out = {PASS: 0, FAIL: 0, DEGENERATE: 0}
        for e in self.entries:
            out[e.verdict] += 1
        return out

    def to_dict(self):
        return {
            "artifact": "fisherinfo",
            "version": self.version,
            "verdict": self.verdict,
            "counts": self.counts(),
            "config": self.config.to_dict(),
            "checks": [e.to_dict() for e in self.entries],
            # the only field that changes between identical runs
            "timing": self.timing,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            config_from_dict(d["config"]),
            [Entry.from_dict(e) for e in d["checks"]],
            d.get("version", __version__),
            dict(d.get("timing", {})),
        )


class _Densities:
    """Lazily materialized catalog; a failure is stored and re-raised inside each task."""

    def __init__(self, config: RunConfig):
        self.config = config
        self._lock = threading.Lock()
        self._cache = {}
        specs = config.specs_1d
        self._floor = config.tail_floor
        self._shared = shared_grid(list(specs.values()), config.n_points, self._floor) if specs else None
        self._overrides = dict(config.grid_overrides)

    def _build(self, name):
        spec = self.config.specs[name]
        g = self._overrides.get(name)
        if g is not None:
            grid = GridSpec(g.x_min, g.x_max, g.n_points)
            return materialize(spec, grid, grid if is_2d(spec) else None, self._floor)
        if is_2d(spec):
            g1, g2 = default_grid_2d(spec, self.config.n_points_2d)
            return materialize(spec, g1, g2, self._floor)
        return materialize(spec, self._shared, None, self._floor)

    def __getitem__(self, name):
        with self._lock:
            if name not in self._cache:
                try:
                    self._cache[name] = self._build(name)
                except NUMERICAL_ERRORS as exc:
                    self._cache[name] = exc
            item = self._cache[name]
        if isinstance(item, Exception):
            raise item
        return item


def _fmt(v) -> str:
    return f"{v:g}"


def build_tasks(config: RunConfig, threads: int = 1) -> list:
    """``[(id, check, callable)]`` in a fixed order."""
    d = _Densities(config)
    tol = config.tol
    one_d = list(config.specs_1d)
    pairs = list(itertools.combinations_with_replacement(one_d, 2))
    tasks = []

    def add(check, ident, fn):
        tasks.append((f"{check}/{ident}", check, fn))

    for check in config.checks:
        if check == "fii":
            for (n1, n2), (a, b) in itertools.product(pairs, config.weights):
                add(check, f"{n1}+{n2}/a={_fmt(a)},b={_fmt(b)}",
                    lambda n1=n1, n2=n2, a=a, b=b: fii_check(d[n1], d[n2], a, b, tol["fisher"]))
        elif check == "stam":
            for n1, n2 in pairs:
                add(check, f"{n1}+{n2}", lambda n1=n1, n2=n2: stam_check(d[n1], d[n2], tol["fisher"]))
        elif check == "dependent-fii":
            for name, (a, b) in itertools.product(config.specs_2d, config.weights):
                add(check, f"{name}/a={_fmt(a)},b={_fmt(b)}",
                    lambda name=name, a=a, b=b: dependent_fii_check(d[name], a, b, tol["fisher"]))
        elif check == "lemma1":
            for name, s2 in itertools.product(one_d, config.sigma2_values):
                for step in IDENTITY_STEPS:
                    add(check, f"{name}/sigma2={_fmt(s2)}/{step}",
                        lambda name=name, s2=s2, step=step: identity_step_check(
                            d[name], s2, step, tol["identity"], tol["orthogonality"]))
        elif check == "debruijn":
            for name in one_d:
                add(check, f"{name}/w=gaussian", lambda name=name: _debruijn(d[name], None, config))
                add(check, f"{name}/w=moment-matched",
                    lambda name=name: _debruijn(d[name], "moment-matched", config))
                add(check, f"{name}/fisher-routes",
                    lambda name=name: cross_pipeline_check(d[name], config.t_values, tol["limit_rtol"]))
        elif check == "comm-proof":
            for (n1, n2), (a, b) in itertools.product(pairs, config.weights):
                add(check, f"{n1}+{n2}/a={_fmt(a)},b={_fmt(b)}",
                    lambda n1=n1, n2=n2, a=a, b=b: communications_proof_sweep(
                        d[n1], d[n2], a, b, config.t_values, None, tol["fisher"], tol["limit_rtol"]))
        elif check == "bayes-proof":
            t_all = tuple(sorted(config.bayes_extra_t, reverse=True)) + tuple(config.t_values)
            for (n1, n2), (a, b) in itertools.product(pairs, config.weights):
                if a > 0 and b > 0:
                    add(check, f"{n1}+{n2}/a={_fmt(a)},b={_fmt(b)}",
                        lambda n1=n1, n2=n2, a=a, b=b: bayesian_proof_sweep(
                            d[n1], d[n2], a, b, t_all, tol["fisher"], tol["limit_rtol"]))
            for name in one_d:
                gain, t = config.mc.gains[0], config.mc.t
                add(check, f"{name}/var-identity",
                    lambda name=name, gain=gain, t=t: bayesian_var_identities(d[name], gain, t, tol["identity"]))
        elif check == "gap-probe":
            add(check, "family", lambda: gaussianity_gap_probe(
                config.gap_family, config.gap_epsilons,
                default_grid(scaled_mixture(config.gap_family, max(config.gap_epsilons)), config.n_points),
                tol["fisher"], tol["gap_slack"]))
        elif check == "var-additivity":
            mc = config.mc
            for n1, n2 in mc.pairs:
                add(check, f"{n1}+{n2}", lambda n1=n1, n2=n2: var_additivity_mc_check(
                    d[n1], d[n2], ChannelModel.bayesian(mc.gains[0], mc.gains[1], mc.t),
                    mc.samples, mc.seed, mc.bins, threads, tol["mc_se"]))
    return tasks


def _debruijn(fN, w_kind, config):
    if w_kind is None:
        return de_bruijn_check(standard_gaussian_like(fN), fN, 1.0, config.t_values, config.tol["limit_rtol"], "debruijn")
    spec = moment_matched_nongaussian().to_spec()
    fW = materialize(spec, grid_for(spec, fN.step))
    return de_bruijn_check(fW, fN, 1.0, config.t_values, config.tol["limit_rtol"], "debruijn-moment-matched")


def _run_one(task):
    ident, check, fn = task
    start = time.perf_counter()
    try:
        result = fn()
    except NUMERICAL_ERRORS as exc:
        result = CheckResult.degenerate(ident, 0.0, f"{type(exc).__name__}: {exc}")
    return Entry(ident, check, result), time.perf_counter() - start


def run_suite(config: RunConfig, threads: int = 1, progress=None) -> RunReport:
    """Run every selected check; failures and numerical errors are recorded, never raised.

    Entries keep the order of ``build_tasks`` whatever the number of threads.
    """
    started = datetime.now(timezone.utc).isoformat(timespec="seconds")
    tasks = build_tasks(config, threads)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            done = list(pool.map(_run_one, tasks))
    else:
        done = []
        for task in tasks:
            done.append(_run_one(task))
            if progress:
                progress(done[-1][0])
    entries = [e for e, _ in done]
    timing = {"started": started, "wall_clock_seconds": {e.id: round(s, 3) for e, s in done}}
    return RunReport(config, entries, timing=timing)
