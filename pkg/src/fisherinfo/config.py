"""Run configuration: YAML ingestion, defaults and validation.

A config file is a YAML mapping.  Every key is optional; see
``configs/default.yaml`` for the full set with their default values.
JSON is valid YAML, so the ``config`` block of a JSON report can be fed
back in unchanged.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace

import yaml

from .density import TAIL_FLOOR
from .errors import ParseError, ValidationError
from .extrapolation import DEFAULT_T_VALUES
from .harness import DEFAULT_CATALOG, DEFAULT_WEIGHTS
from .specs import Gaussian2D, GaussianMixture, Mixture2D, is_2d, spec_from_dict

CHECKS = (
    "fii",
    "stam",
    "dependent-fii",
    "lemma1",
    "debruijn",
    "comm-proof",
    "bayes-proof",
    "gap-probe",
    "var-additivity",
)

DEFAULT_TOLERANCES = {
    "fisher": 1e-5,  # absolute, Fisher-scale inequalities
    "limit_rtol": 0.01,  # relative, extrapolated limits
    "identity": 1e-4,  # Fisher-MMSE and score identities
    "orthogonality": 1e-5,
    "mi": 1e-9,  # nats
    "gap_slack": 1e-6,  # monotonicity of the Stam gap
    "mc_se": 3.0,  # Monte Carlo standard errors
}

DEFAULT_JOINTS = {
    "gauss2d-rho-0.5": Gaussian2D((0.0, 0.0), ((1.0, -0.5), (-0.5, 1.0))),
    "gauss2d-rho0": Gaussian2D((0.0, 0.0), ((1.0, 0.0), (0.0, 1.0))),
    "gauss2d-rho0.5": Gaussian2D((0.0, 0.0), ((1.0, 0.5), (0.5, 1.0))),
    "gauss2d-rho0.9": Gaussian2D((0.0, 0.0), ((1.0, 0.9), (0.9, 1.0))),
    "mixture2d": Mixture2D((
        (0.5, Gaussian2D((-1.0, -0.5), ((1.0, 0.3), (0.3, 0.8)))),
        (0.5, Gaussian2D((1.0, 0.5), ((0.8, -0.2), (-0.2, 1.0)))),
    )),
}

DEFAULT_GAP_FAMILY = GaussianMixture(((0.5, -1.0, 1.0), (0.5, 1.0, 1.0)))
DEFAULT_EPSILONS = (0.0, 0.25, 0.5, 0.75, 1.0)
DEFAULT_SIGMA2 = (0.25, 1.0, 4.0)
DEFAULT_EXTRA_T = (5.0,)
DEFAULT_OUTPUT = "fisherinfo-report"


@dataclass(frozen=True)
class GridOverride:
    x_min: float
    x_max: float
    n_points: int


@dataclass(frozen=True)
class MonteCarloConfig:
    seed: int | None = None
    samples: int = 10_000_000
    pairs: tuple = (("gmm-symmetric", "gmm-skewed"), ("gauss-unit", "laplace"))
    gains: tuple = (1.0, 2.0)
    t: float = 0.2
    bins: int = 64


@dataclass(frozen=True)
class RunConfig:
    catalog: tuple = tuple(DEFAULT_CATALOG.items()) + tuple(DEFAULT_JOINTS.items())
    n_points: int = 1025
    n_points_2d: int = 257
    tail_floor: float = TAIL_FLOOR
    grid_overrides: tuple = ()
    checks: tuple = CHECKS
    tolerances: tuple = tuple(DEFAULT_TOLERANCES.items())
    t_values: tuple = tuple(DEFAULT_T_VALUES)
    bayes_extra_t: tuple = DEFAULT_EXTRA_T
    weights: tuple = DEFAULT_WEIGHTS
    sigma2_values: tuple = DEFAULT_SIGMA2
    gap_family: GaussianMixture = DEFAULT_GAP_FAMILY
    gap_epsilons: tuple = DEFAULT_EPSILONS
    mc: MonteCarloConfig = field(default_factory=MonteCarloConfig)
    output: str = DEFAULT_OUTPUT

    @property
    def tol(self) -> dict:
        return dict(self.tolerances)

    @property
    def specs(self) -> dict:
        return dict(self.catalog)

    @property
    def specs_1d(self) -> dict:
        return {k: s for k, s in self.catalog if not is_2d(s)}

    @property
    def specs_2d(self) -> dict:
        return {k: s for k, s in self.catalog if is_2d(s)}

    def scaled(self, factor: float) -> "RunConfig":
        """All tolerances multiplied by ``factor``."""
        return replace(self, tolerances=tuple((k, v * factor) for k, v in self.tolerances))

    def with_seed(self, seed: int) -> "RunConfig":
        return replace(self, mc=replace(self.mc, seed=int(seed)))

    def with_checks(self, checks) -> "RunConfig":
        return replace(self, checks=tuple(checks))

    def to_dict(self) -> dict:
        return {
            "catalog": [{"name": n, **s.to_dict()} for n, s in self.catalog],
            "grid": {
                "n_points": self.n_points,
                "n_points_2d": self.n_points_2d,
                "tail_floor": self.tail_floor,
                "overrides": {n: {"x_min": g.x_min, "x_max": g.x_max, "n_points": g.n_points}
                              for n, g in self.grid_overrides},
            },
            "checks": list(self.checks),
            "tolerances": dict(self.tolerances),
            "t_values": list(self.t_values),
            "bayes_extra_t": list(self.bayes_extra_t),
            "weights": [list(w) for w in self.weights],
            "sigma2_values": list(self.sigma2_values),
            "gap_probe": {"family": self.gap_family.to_dict(), "epsilon": list(self.gap_epsilons)},
            "mc": {
                "seed": self.mc.seed,
                "samples": self.mc.samples,
                "pairs": [list(p) for p in self.mc.pairs],
                "gains": list(self.mc.gains),
                "t": self.mc.t,
                "bins": self.mc.bins,
            },
            "output": self.output,
        }


# -- parsing ------------------------------------------------------------------


class _Loader(yaml.SafeLoader):
    """Safe loader that also reads ``1e-12`` (no dot) as a float, as JSON and YAML 1.2 do."""


_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"^[-+]?(?:[0-9]+(?:\.[0-9]*)?|\.[0-9]+)[eE][-+]?[0-9]+$"),
    list("-+0123456789."),
)


def _line_map(node, path=(), out=None):
    """``{field path: 1-based line}`` for every node of a composed YAML document."""
    out = {} if out is None else out
    out[path] = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            _line_map(v, path + (str(k.value),), out)
    elif isinstance(node, yaml.SequenceNode):
        for i, v in enumerate(node.value):
            _line_map(v, path + (i,), out)
    return out


def _fmt(path) -> str:
    s = ""
    for p in path:
        s += f"[{p}]" if isinstance(p, int) else (f".{p}" if s else str(p))
    return s


def parse_config(path, seed: int | None = None) -> RunConfig:
    """Read, default-fill and validate a YAML config file.

    ``seed`` (when given) replaces ``mc.seed`` before validation.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read config: {exc}") from exc
    return parse_config_text(text, seed)


def parse_config_text(text: str, seed: int | None = None) -> RunConfig:
    try:
        node = yaml.compose(text, Loader=_Loader)
        raw = yaml.load(text, Loader=_Loader)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        raise ParseError(str(exc.problem or exc), line=mark.line + 1 if mark else None) from exc
    except yaml.YAMLError as exc:
        raise ParseError(str(exc)) from exc
    if raw is None:
        raw = {}
    lines = _line_map(node) if node is not None else {}
    if not isinstance(raw, dict):
        raise ParseError("top level must be a mapping", line=lines.get((), None))
    if seed is not None:
        raw.setdefault("mc", {})
        if not isinstance(raw["mc"], dict):
            raise ParseError("must be a mapping", line=lines.get(("mc",)), field="mc")
        raw["mc"]["seed"] = seed
    return config_from_dict(raw, lines)


class _Problems:
    def __init__(self, lines):
        self.lines = lines
        self.items = []

    def add(self, path, message):
        line = self.lines.get(tuple(path))
        where = _fmt(path) + (f" (line {line})" if line else "")
        self.items.append(f"{where}: {message}")


_TOP_KEYS = {"catalog", "grid", "checks", "tolerances", "t_values", "bayes_extra_t", "weights",
             "sigma2_values", "gap_probe", "mc", "output"}


def _floats(value, path, problems, positive=False, length=None):
    if not isinstance(value, (list, tuple)):
        problems.add(path, "must be a list of numbers")
        return None
    out = []
    for i, v in enumerate(value):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            problems.add(list(path) + [i], f"must be a finite number, got {v!r}")
            return None
        if positive and not v > 0:
            problems.add(list(path) + [i], f"must be positive, got {v!r}")
            return None
        out.append(float(v))
    if length is not None and len(out) != length:
        problems.add(path, f"must have {length} entries")
        return None
    return tuple(out)


def _int(value, path, problems, minimum):
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        problems.add(path, f"must be an integer >= {minimum}, got {value!r}")
        return None
    return value


def _spec(d, path, problems):
    if not isinstance(d, dict):
        problems.add(path, "must be a mapping")
        return None
    try:
        return spec_from_dict(d)
    except KeyError as exc:
        problems.add(list(path) + [exc.args[0]], "is required")
    except (ValueError, TypeError) as exc:
        # point at the offending numeric field when the message names it
        sub = next((k for k in ("variance", "scale", "cov", "components", "kind") if k in str(exc) or k in d), None)
        problems.add(list(path) + ([sub] if sub else []), str(exc))
    return None


def config_from_dict(raw: dict, lines: dict | None = None) -> RunConfig:
    """Validate a plain mapping; every violated invariant is reported at once."""
    p = _Problems(lines or {})
    base = RunConfig()
    kw = {}
    for key in raw:
        if key not in _TOP_KEYS:
            p.add([key], "unknown field")

    if "catalog" in raw:
        cat = raw["catalog"]
        if not isinstance(cat, list) or not cat:
            p.add(["catalog"], "must be a non-empty list of named distributions")
        else:
            entries, seen = [], set()
            for i, item in enumerate(cat):
                if not isinstance(item, dict) or not isinstance(item.get("name"), str):
                    p.add(["catalog", i], "needs a string 'name'")
                    continue
                name = item["name"]
                if name in seen:
                    p.add(["catalog", i, "name"], f"duplicate name {name!r}")
                seen.add(name)
                spec = _spec({k: v for k, v in item.items() if k != "name"}, ["catalog", i], p)
                if spec is not None:
                    entries.append((name, spec))
            kw["catalog"] = tuple(entries)
    names = {n for n, _ in kw.get("catalog", base.catalog)}
    names_1d = {n for n, s in kw.get("catalog", base.catalog) if not is_2d(s)}

    grid = raw.get("grid", {})
    if not isinstance(grid, dict):
        p.add(["grid"], "must be a mapping")
        grid = {}
    for k in grid:
        if k not in ("n_points", "n_points_2d", "tail_floor", "overrides"):
            p.add(["grid", k], "unknown field")
    for key in ("n_points", "n_points_2d"):
        if key in grid:
            v = _int(grid[key], ["grid", key], p, 33)
            if v is not None and v % 2 == 0:
                p.add(["grid", key], "must be odd (Simpson quadrature)")
            kw[key] = v
    if "tail_floor" in grid:
        v = grid["tail_floor"]
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not 0 < v <= 1e-6:
            p.add(["grid", "tail_floor"], f"must be a number in (0, 1e-6], got {v!r}")
        else:
            kw["tail_floor"] = float(v)
    overrides = grid.get("overrides", {})
    if not isinstance(overrides, dict):
        p.add(["grid", "overrides"], "must be a mapping of name to grid")
        overrides = {}
    ov = []
    for name, g in overrides.items():
        path = ["grid", "overrides", name]
        if name not in names:
            p.add(path, f"no catalog entry named {name!r}")
        if not isinstance(g, dict) or not {"x_min", "x_max", "n_points"} <= set(g):
            p.add(path, "needs x_min, x_max and n_points")
            continue
        n = _int(g["n_points"], path + ["n_points"], p, 33)
        lo_hi = _floats([g["x_min"], g["x_max"]], path, p)
        if n is not None and n % 2 == 0:
            p.add(path + ["n_points"], "must be odd (Simpson quadrature)")
        if lo_hi and not lo_hi[0] < lo_hi[1]:
            p.add(path + ["x_max"], "must exceed x_min")
        if n is not None and lo_hi:
            ov.append((name, GridOverride(lo_hi[0], lo_hi[1], n)))
    kw["grid_overrides"] = tuple(ov)

    if "checks" in raw:
        checks = raw["checks"]
        if not isinstance(checks, list) or not checks:
            p.add(["checks"], "must be a non-empty list")
        else:
            for i, c in enumerate(checks):
                if c not in CHECKS:
                    p.add(["checks", i], f"unknown check {c!r}; choose from {', '.join(CHECKS)}")
            if len(set(checks)) != len(checks):
                p.add(["checks"], "duplicate entries")
            kw["checks"] = tuple(c for c in CHECKS if c in checks)
    checks = kw.get("checks", base.checks)

    if "tolerances" in raw:
        tol = raw["tolerances"]
        if not isinstance(tol, dict):
            p.add(["tolerances"], "must be a mapping")
        else:
            merged = dict(DEFAULT_TOLERANCES)
            for k, v in tol.items():
                if k not in DEFAULT_TOLERANCES:
                    p.add(["tolerances", k], f"unknown tolerance; choose from {', '.join(DEFAULT_TOLERANCES)}")
                elif isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
                    p.add(["tolerances", k], f"must be a positive number, got {v!r}")
                else:
                    merged[k] = float(v)
            kw["tolerances"] = tuple(merged.items())

    for key in ("t_values", "bayes_extra_t", "sigma2_values"):
        if key in raw:
            v = _floats(raw[key], [key], p, positive=True)
            if v is not None:
                kw[key] = v
    t_values = kw.get("t_values", base.t_values)
    if len(t_values) < 4:
        p.add(["t_values"], "needs at least 4 values")
    if any(b >= a for a, b in zip(t_values, t_values[1:])):
        p.add(["t_values"], "must be strictly decreasing")
    if t_values and min(t_values) < 1e-5:
        p.add(["t_values"], "smallest value must be >= 1e-5")
    extra = kw.get("bayes_extra_t", base.bayes_extra_t)
    if t_values and any(e <= t_values[0] for e in extra):
        p.add(["bayes_extra_t"], "values must exceed every t_values entry")
    if not kw.get("sigma2_values", base.sigma2_values):
        p.add(["sigma2_values"], "must be non-empty")

    if "weights" in raw:
        w = raw["weights"]
        if not isinstance(w, list) or not w:
            p.add(["weights"], "must be a non-empty list of [a, b] pairs")
        else:
            pairs = []
            for i, pair in enumerate(w):
                v = _floats(pair, ["weights", i], p, length=2)
                if v is None:
                    continue
                if v[0] < 0 or v[1] < 0 or (v[0] == 0 and v[1] == 0):
                    p.add(["weights", i], "weights must be non-negative and not both zero")
                else:
                    pairs.append(v)
            kw["weights"] = tuple(pairs)

    if "gap_probe" in raw:
        gp = raw["gap_probe"]
        if not isinstance(gp, dict):
            p.add(["gap_probe"], "must be a mapping")
        else:
            if "family" in gp:
                fam = _spec(gp["family"], ["gap_probe", "family"], p)
                if fam is not None and not isinstance(fam, GaussianMixture):
                    p.add(["gap_probe", "family", "kind"], "must be a gmm")
                elif fam is not None:
                    kw["gap_family"] = fam
            if "epsilon" in gp:
                eps = _floats(gp["epsilon"], ["gap_probe", "epsilon"], p)
                if eps is not None and (not eps or min(eps) < 0):
                    p.add(["gap_probe", "epsilon"], "must be a non-empty list of values >= 0")
                elif eps is not None:
                    kw["gap_epsilons"] = eps

    mc_raw = raw.get("mc", {})
    mc = base.mc
    if not isinstance(mc_raw, dict):
        p.add(["mc"], "must be a mapping")
        mc_raw = {}
    for k in mc_raw:
        if k not in ("seed", "samples", "pairs", "gains", "t", "bins"):
            p.add(["mc", k], "unknown field")
    if mc_raw.get("seed") is not None:
        s = _int(mc_raw["seed"], ["mc", "seed"], p, 0)
        if s is not None and s >= 2**64:
            p.add(["mc", "seed"], "must fit in 64 bits")
        mc = replace(mc, seed=s)
    if "samples" in mc_raw:
        mc = replace(mc, samples=_int(mc_raw["samples"], ["mc", "samples"], p, 1_000_000))
    if "bins" in mc_raw:
        mc = replace(mc, bins=_int(mc_raw["bins"], ["mc", "bins"], p, 2))
    if "gains" in mc_raw:
        g = _floats(mc_raw["gains"], ["mc", "gains"], p, positive=True, length=2)
        if g is not None:
            mc = replace(mc, gains=g)
    if "t" in mc_raw:
        t = _floats([mc_raw["t"]], ["mc", "t"], p, positive=True)
        if t is not None:
            mc = replace(mc, t=t[0])
    if "pairs" in mc_raw:
        pairs_raw = mc_raw["pairs"]
        if not isinstance(pairs_raw, list):
            p.add(["mc", "pairs"], "must be a list of [name, name] pairs")
            pairs_raw = []
        pairs = []
        for i, pair in enumerate(pairs_raw):
            if not (isinstance(pair, list) and len(pair) == 2 and all(isinstance(x, str) for x in pair)):
                p.add(["mc", "pairs", i], "must be a [name, name] pair")
            elif not set(pair) <= names_1d:
                p.add(["mc", "pairs", i], "names must refer to 1-D catalog entries")
            else:
                pairs.append(tuple(pair))
        mc = replace(mc, pairs=tuple(pairs))
    if "pairs" not in mc_raw and not all(set(pair) <= names_1d for pair in mc.pairs):
        # default pairs name the built-in catalog; fall back to the first and last 1-D entries
        ordered = [n for n, s in kw.get("catalog", base.catalog) if not is_2d(s)]
        mc = replace(mc, pairs=((ordered[0], ordered[-1]),) if ordered else ())
    kw["mc"] = mc

    if "output" in raw:
        if not isinstance(raw["output"], str) or not raw["output"]:
            p.add(["output"], "must be a non-empty path string")
        else:
            kw["output"] = raw["output"]

    # cross-field invariants
    if "var-additivity" in checks and mc.seed is None:
        p.add(["mc", "seed"], "required when var-additivity is selected")
    if "var-additivity" in checks and not mc.pairs:
        p.add(["mc", "pairs"], "at least one pair is required when var-additivity is selected")
    one_d_checks = set(checks) - {"dependent-fii", "gap-probe"}
    if one_d_checks and not names_1d:
        p.add(["catalog"], f"checks {sorted(one_d_checks)} need at least one 1-D distribution")
    if "dependent-fii" in checks and len(names) == len(names_1d):
        p.add(["catalog"], "dependent-fii needs at least one 2-D distribution")
    if any(a == 0 or b == 0 for a, b in kw.get("weights", base.weights)) and \
            all(a == 0 or b == 0 for a, b in kw.get("weights", base.weights)) and "bayes-proof" in checks:
        p.add(["weights"], "bayes-proof needs at least one pair with a, b > 0")

    if p.items:
        raise ValidationError(p.items)
    return replace(base, **kw)


def config_to_yaml(config: RunConfig) -> str:
    return yaml.safe_dump(config.to_dict(), sort_keys=False)
