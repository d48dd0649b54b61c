"""Unified command-line front end.

One subcommand per experiment family; every run is keyed by a 64-bit seed
and emits an RFC-4180 style CSV with a metadata header, so identical
configurations reproduce byte-identical data sections. Optional matplotlib
figures are rendered next to the delimited output.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from . import chaining, config, dyadic, harmonic, similarity, translations
from .core import FiniteGroup, IndicatorSet, RandomStream
from .errors import BudgetError, InvariantError, SchemaError

SUBCOMMANDS = ("bohr", "cover", "dudley", "tails", "fkw", "lambdap", "ergodic",
               "similarity")

# parameter name -> (parser, default); None default means required
_SCHEMAS: dict[str, dict] = {
    "bohr": {"N": (int, 10000), "freqs": (str, "0.618033988749895"),
             "rho0": (float, 0.05), "kappa": (float, config.REGULARITY_KAPPA)},
    "cover": {"group": (str, "cyclic:100"), "density": (float, 0.05),
              "N": (int, 20), "trials": (int, 1000)},
    "dudley": {"points_file": (str, ""), "file_kind": (str, "coords"),
               "iid": (int, 0), "samples": (int, 20000)},
    "tails": {"dist": (str, "gauss"), "lambdas": (str, "1,2,3"),
              "samples": (int, 100000)},
    "fkw": {"grid": (int, 64), "K": (int, 180), "ladder": (str, ""),
            "auto_lacunary": (int, 8), "set": (str, "square:1.0"),
            "delta": (float, 0.1)},
    "lambdap": {"n": (int, 64), "p": (float, 4.0), "trials": (int, 10),
                "probes": (int, 8)},
    "ergodic": {"m": (int, 5), "shift": (int, 1), "f": (str, "indicator:0"),
                "x": (int, 0), "lam": (float, 2.0), "breaks": (str, ""),
                "Nmax": (int, 1024), "mode": (str, "var")},
    "similarity": {"J0": (int, 2), "ratio": (float, 0.25), "eps": (float, 0.5),
                   "cube_side": (float, 0.0), "t_samples": (int, 0),
                   "x_samples": (int, 1000), "trials": (int, 2000),
                   "t": (float, 1.5), "delta": (float, 0.1),
                   "mode": (str, "coverage")},
}


@dataclass(frozen=True)
class ExperimentConfig:
    """A validated (subcommand, parameters, seed) triple."""

    subcommand: str
    params: dict
    seed: int
    out: str | None = None

    def __post_init__(self):
        if self.subcommand not in _SCHEMAS:
            raise SchemaError(f"unknown subcommand '{self.subcommand}'")
        schema = _SCHEMAS[self.subcommand]
        unknown = set(self.params) - set(schema)
        if unknown:
            raise SchemaError(f"unknown parameters for {self.subcommand}: {sorted(unknown)}")
        coerced = {}
        for name, (typ, default) in schema.items():
            raw = self.params.get(name, default)
            try:
                coerced[name] = typ(raw)
            except (TypeError, ValueError) as exc:
                raise SchemaError(f"parameter {name}={raw!r} is not a valid {typ.__name__}") from exc
        object.__setattr__(self, "params", coerced)

    def config_hash(self) -> str:
        blob = json.dumps({"sub": self.subcommand, "params": self.params,
                           "seed": self.seed}, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def to_json(self) -> str:
        return json.dumps({"subcommand": self.subcommand, "params": self.params,
                           "seed": self.seed}, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        d = json.loads(text)
        return cls(d["subcommand"], d.get("params", {}), int(d.get("seed", 0)))


@dataclass
class ResultTable:
    columns: tuple[str, ...]
    rows: list[tuple]
    metadata: dict = field(default_factory=dict)

    def add(self, *values):
        if len(values) != len(self.columns):
            raise InvariantError("row-width", "row does not match the column count")
        self.rows.append(tuple(values))


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def emit(table: ResultTable, stream) -> None:
    """Write metadata comment lines, a header row, then the data rows."""
    for k, v in table.metadata.items():
        stream.write(f"# {k}={_fmt(v)}\n")
    stream.write(",".join(table.columns) + "\n")
    for row in table.rows:
        stream.write(",".join(_fmt(v) for v in row) + "\n")


def _parse_floats(text: str) -> list[float]:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if "/" in tok:
            a, b = tok.split("/")
            out.append(float(a) / float(b))
        else:
            out.append(float(tok))
    return out


def _parse_group(spec: str) -> FiniteGroup:
    kind, _, rest = spec.partition(":")
    if kind == "cyclic":
        return FiniteGroup.cyclic(int(rest))
    if kind == "product":
        return FiniteGroup.product_of(int(x) for x in rest.split(","))
    raise SchemaError(f"unknown group spec '{spec}'")


# -- per-subcommand drivers -----------------------------------------------------


def _run_bohr(cfg: ExperimentConfig) -> ResultTable:
    p = cfg.params
    freqs = _parse_floats(p["freqs"])
    report = dyadic.regular_radius(p["N"], freqs, p["rho0"], p["kappa"])
    t = ResultTable(("rho_candidate", "size", "verified"), [])
    for rho, size, ok in report.candidates:
        t.add(rho, size, ok)
    t.metadata.update(found=report.found,
                      rho=report.rho if report.rho is not None else math.nan,
                      n_freqs=len(freqs))
    return t


def _run_cover(cfg: ExperimentConfig) -> ResultTable:
    p = cfg.params
    group = _parse_group(p["group"])
    k = max(0, min(group.order, round(p["density"] * group.order)))
    E = IndicatorSet.explicit(group, range(k))
    rep = translations.random_cover_search(E, p["N"], p["trials"],
                                           RandomStream(cfg.seed))
    t = ResultTable(("trial", "union_measure"), [])
    for i, v in enumerate(rep.trial_measures):
        t.add(i, v)
    t.add("mean", rep.empirical_mean)
    t.metadata.update(mu=k / group.order, bound=rep.best.bound,
                      best_union=rep.best.union_measure,
                      achieved=rep.best.achieved)
    return t


def _dudley_space(cfg: ExperimentConfig):
    p = cfg.params
    if p["iid"] > 0:
        spec = chaining.GaussianProcessSpec.iid(p["iid"])
        return spec.metric_space(), spec
    if not p["points_file"]:
        raise SchemaError("dudley needs --points-file or --iid")
    data = np.loadtxt(p["points_file"], delimiter=",", ndmin=2)
    if p["file_kind"] == "cov":
        spec = chaining.GaussianProcessSpec(data)
        return spec.metric_space(), spec
    if p["file_kind"] != "coords":
        raise SchemaError("file_kind must be 'coords' or 'cov'")
    space = chaining.FiniteMetricSpace.from_points(data)
    cov = data @ data.T  # linear process over the coordinates
    return space, chaining.GaussianProcessSpec(cov)


def _run_dudley(cfg: ExperimentConfig) -> ResultTable:
    space, spec = _dudley_space(cfg)
    bound = chaining.dudley_bound(space)
    est = chaining.empirical_sup(spec, cfg.params["samples"], RandomStream(cfg.seed))
    t = ResultTable(("dudley_sum", "empirical_sup", "ratio"), [])
    t.add(bound, est.mean, est.mean / bound if bound > 0 else math.nan)
    t.metadata.update(n=space.n, stderr=est.stderr)
    return t


def _run_tails(cfg: ExperimentConfig) -> ResultTable:
    p = cfg.params
    lambdas = _parse_floats(p["lambdas"])
    r = RandomStream(cfg.seed)
    if p["dist"] == "gauss":
        sampler = chaining.gaussian_sampler
        scale = None
        ranges = None
    elif p["dist"].startswith("coins:"):
        n_coins = int(p["dist"].split(":")[1])
        sampler = chaining.coin_sum_sampler(n_coins)
        ranges = [2.0] * n_coins
        scale = math.sqrt(sum(x * x for x in ranges))
    else:
        raise SchemaError("dist must be 'gauss' or 'coins:n'")
    rep = chaining.empirical_tail(sampler, lambdas, p["samples"], r, scale=scale)
    t = ResultTable(("lambda", "frequency", "stderr", "chebyshev", "hoeffding"), [])
    for lam, f, se in zip(rep.lambdas, rep.frequencies, rep.stderrs):
        cheb = chaining.chebyshev_bound(lam) if lam > 0 else 1.0
        t.add(lam, f, se, cheb, chaining.hoeffding_bound(lam, ranges))
    t.metadata.update(mean=rep.mean, std=rep.std, scale=rep.scale, dist=p["dist"])
    return t


def _parse_plane_set(grid: harmonic.PlaneGrid, spec: str, seed: int) -> np.ndarray:
    kind, _, rest = spec.partition(":")
    if kind == "full":
        return ~grid.empty_mask()
    if kind == "square":
        s = float(rest) / 2.0
        return grid.rect_mask([(-s, -s, s, s)])
    if kind == "disk":
        return grid.disk_mask(0.0, 0.0, float(rest))
    if kind == "rects":
        parts = rest.split(":")
        max_rects = int(parts[0]) if parts[0] else 200
        target = float(parts[1]) if len(parts) > 1 else 0.1
        return grid.random_rect_union(RandomStream(seed, stream_id=7), target,
                                      max_rects=max_rects)
    raise SchemaError(f"unknown set spec '{spec}'")


def _run_fkw(cfg: ExperimentConfig) -> ResultTable:
    p = cfg.params
    grid = harmonic.PlaneGrid(p["grid"])
    circle = harmonic.CircleMeasure(p["K"])
    mask = _parse_plane_set(grid, p["set"], cfg.seed)
    if p["ladder"]:
        ladder = dyadic.ScaleLadder(tuple(_parse_floats(p["ladder"])))
    else:
        ladder = dyadic.ScaleLadder.geometric(p["auto_lacunary"])
    scan = harmonic.fkw_scan(grid, mask, ladder, circle,
                             enforce_guard=(p["set"] != "full"))
    t = ResultTable(("j", "t", "correlation", "passes_threshold"), [])
    for j, (scale, corr) in enumerate(zip(scan.scales, scan.correlations), start=1):
        t.add(j, scale, corr, corr >= scan.threshold)
    split = harmonic.fkw_frequency_split(grid, mask, scan.scales[0], p["delta"],
                                         circle, enforce_guard=(p["set"] != "full"))
    t.metadata.update(measure=scan.measure, threshold=scan.threshold,
                      argmax=scan.argmax, max_correlation=scan.max_correlation,
                      passed=scan.passed, split_low=split.low,
                      split_medium=split.medium, split_high=split.high)
    return t


def _run_lambdap(cfg: ExperimentConfig) -> ResultTable:
    p = cfg.params
    rep = harmonic.lambda_p_random_trial(p["n"], p["p"], p["trials"],
                                         RandomStream(cfg.seed), probes=p["probes"])
    t = ResultTable(("trial", "kind", "set_size", "K"), [])
    for i, (s, v) in enumerate(zip(rep.random_sizes, rep.random_estimates)):
        t.add(i, "random", s, v)
    t.add(len(rep.random_sizes), "structured", len(rep.structured_indices),
          rep.structured_estimate)
    t.metadata.update(random_median=rep.random_median, random_max=rep.random_max,
                      structured_K=rep.structured_estimate)
    return t


def _run_ergodic(cfg: ExperimentConfig) -> ResultTable:
    p = cfg.params
    f_kind, _, f_rest = p["f"].partition(":")
    if f_kind == "indicator":
        sys_ = harmonic.CyclicSystem.indicator(p["m"], int(f_rest), p["shift"])
    elif f_kind == "values":
        sys_ = harmonic.CyclicSystem(p["m"], p["shift"],
                                     tuple(_parse_floats(f_rest)))
    else:
        raise SchemaError("f must be 'indicator:k' or 'values:v0,v1,...'")
    mode = p["mode"]
    if mode == "avg":
        avgs = harmonic.ergodic_averages_prefix(sys_, p["x"], p["Nmax"])
        t = ResultTable(("N", "average"), [])
        step = max(1, p["Nmax"] // 256)
        for n in range(1, p["Nmax"] + 1):
            if n % step == 0 or n == 1 or n == p["Nmax"]:
                t.add(n, float(avgs[n - 1]))
        return t
    if mode == "max":
        t = ResultTable(("N_max", "maximal"), [])
        t.add(p["Nmax"], harmonic.maximal_function(sys_, p["x"], p["Nmax"]))
        return t
    if mode != "var":
        raise SchemaError("mode must be avg, var, or max")
    if p["breaks"]:
        breaks = [int(v) for v in _parse_floats(p["breaks"])]
    else:
        breaks = harmonic.z_lambda(p["lam"], p["Nmax"])
    rep = harmonic.variational_sum(sys_, p["x"], p["lam"], breaks)
    t = ResultTable(("block", "N_start", "N_end", "sup_dev", "l2_sup_dev"), [])
    for j, (a, b) in enumerate(zip(breaks, breaks[1:])):
        t.add(j, a, b, rep.blocks[j], rep.l2_blocks[j])
    t.metadata.update(total=rep.total, l2_total=rep.l2_total)
    return t


def _run_similarity(cfg: ExperimentConfig) -> ResultTable:
    p = cfg.params
    scfg = similarity.SimilarityConfig(
        J0=p["J0"], ratio=p["ratio"], eps=p["eps"],
        cube_side=(p["cube_side"] if p["cube_side"] > 0 else None),
        seed=cfg.seed, x_samples=p["x_samples"],
        t_samples=(p["t_samples"] if p["t_samples"] > 0 else None))
    fam = similarity.build_construction(scfg)
    mode = p["mode"]
    if mode == "separation":
        probes = np.linspace(scfg.t_lo, scfg.t_hi, 101)
        t = ResultTable(("t", "min_pairwise"), [])
        for tv in probes:
            rep_t = similarity.separation(fam, [float(tv)])
            t.add(float(tv), rep_t.minimum)
        rep = similarity.separation(fam, probes)
        t.metadata.update(minimum=rep.minimum, t_witness=rep.t_witness)
        return t
    if mode == "entropy":
        speed = fam.max_coordinate_speed()
        need = int(math.ceil(2 * speed / p["delta"])) + 1
        rep = similarity.orbit_entropy(fam, p["delta"], need)
        t = ResultTable(("delta", "net_size", "exponent", "t_samples"), [])
        t.add(rep.delta, rep.net_size, rep.exponent, rep.t_samples)
        return t
    if mode == "coverage":
        rep = similarity.coverage_probability(scfg, fam, p["trials"], t=p["t"])
        t = ResultTable(("trials", "empirical", "exact", "stderr"), [])
        t.add(rep.trials, rep.empirical, rep.exact, rep.stderr)
        t.metadata.update(min_separation=rep.min_separation, t=rep.t)
        return t
    if mode == "ratio":
        rep = similarity.inf_sup_experiment(scfg, fam)
        t = ResultTable(("int_f", "int_F", "int_F_plain", "ratio",
                         "stderr_f", "stderr_F"), [])
        t.add(rep.int_f, rep.int_F, rep.int_F_plain, rep.ratio,
              rep.stderr_f, rep.stderr_F)
        t.metadata.update(net_points=rep.net_points, ball_radius=rep.ball_radius)
        return t
    if mode == "b1":
        torus = similarity.GridTorus(1, 64)
        B = IndicatorSet.explicit(torus, [(i,) for i in range(20)])  # [0, 0.3125)
        rep = similarity.build_B1(B, [0.5], [1.0], [1.0])
        t = ResultTable(("measure_B", "measure_B1"), [])
        t.add(20 / 64, rep.measure)
        return t
    raise SchemaError("mode must be separation, entropy, coverage, ratio, or b1")


_DISPATCH = {
    "bohr": _run_bohr, "cover": _run_cover, "dudley": _run_dudley,
    "tails": _run_tails, "fkw": _run_fkw, "lambdap": _run_lambdap,
    "ergodic": _run_ergodic, "similarity": _run_similarity,
}


def run(cfg: ExperimentConfig) -> ResultTable:
    """Dispatch a validated config to its experiment driver."""
    t0 = time.perf_counter()
    table = _DISPATCH[cfg.subcommand](cfg)
    meta = {"tool_version": __version__, "subcommand": cfg.subcommand,
            "seed": cfg.seed, "config_hash": cfg.config_hash()}
    meta.update(table.metadata)
    meta["walltime_s"] = time.perf_counter() - t0
    table.metadata = meta
    return table


# -- argument parsing -------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="boundlab",
                                 description="seeded verification experiments")
    sub = ap.add_subparsers(dest="subcommand", required=True)
    aliases = {"lam": ["--lambda"]}
    for name, schema in _SCHEMAS.items():
        sp = sub.add_parser(name)
        for pname, (typ, default) in schema.items():
            flag = "--" + pname.replace("_", "-")
            sp.add_argument(flag, *aliases.get(pname, []), dest=pname, type=typ,
                            default=None)
        if name == "similarity":
            sp.add_argument("--auto-net", dest="t_samples", action="store_const",
                            const=0, help="size the certified dilation net automatically")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", type=str, default=None)
        sp.add_argument("--threads", type=int, default=1,
                        help="hint only; never affects results")
        sp.add_argument("--config", type=str, default=None,
                        help="JSON or key=value file; explicit flags override")
        sp.add_argument("--plot", type=str, nargs="?", const="", default=None,
                        help="render a PNG figure; with no value, next to the CSV")
    return ap


def _load_config_file(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    text_stripped = text.strip()
    if text_stripped.startswith("{"):
        d = json.loads(text_stripped)
        if not isinstance(d, dict):
            raise SchemaError("config file must hold an object")
        return d
    out = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise SchemaError(f"bad config line: {line!r}")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def main(argv=None) -> int:
    ap = _build_parser()
    ns = ap.parse_args(argv)
    try:
        params = {}
        seed = ns.seed
        if ns.config:
            file_params = _load_config_file(ns.config)
            if "seed" in file_params:
                seed = int(file_params.pop("seed"))
            params.update(file_params)
        for name in _SCHEMAS[ns.subcommand]:
            val = getattr(ns, name)
            if val is not None:
                params[name] = val
        cfg = ExperimentConfig(ns.subcommand, params, seed, ns.out)
        table = run(cfg)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BudgetError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return 3
    except InvariantError as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return 4

    try:
        if cfg.out:
            with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
                emit(table, fh)
        else:
            emit(table, sys.stdout)
        if ns.plot is not None:
            plot_path = ns.plot
            if not plot_path:
                stem = cfg.out.rsplit(".", 1)[0] if cfg.out else f"boundlab_{cfg.subcommand}"
                plot_path = stem + ".png"
            from . import plotting
            plotting.render(table, cfg.subcommand, plot_path)
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return 5
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
