"""One-off calibration runs behind the frozen constants in ``config``.

Each subcommand reruns the seeded oracle that produced a frozen value and
prints what it observed, so the regression data can be audited or refreshed:

    python -m boundlab.calibrate dudley
    python -m boundlab.calibrate lambdap
    python -m boundlab.calibrate separation
    python -m boundlab.calibrate entropy
    python -m boundlab.calibrate infsup
"""

from __future__ import annotations

import math
import sys

import numpy as np

from . import chaining, harmonic, similarity
from .core import RandomStream

CALIBRATION_SEED = 20260808


def dudley_domination(n_specs: int = 200, max_n: int = 32, samples: int = 20000):
    base = RandomStream(CALIBRATION_SEED, stream_id=0xD0D)
    worst = 0.0
    worst_n = 0
    for k in range(n_specs):
        rs = base.substream(k)
        n = 2 + rs.randint(max_n - 1)
        spec = chaining.random_process_spec(n, rs.substream(1))
        bound = chaining.dudley_bound(spec.metric_space())
        est = chaining.empirical_sup(spec, samples, rs.substream(2))
        ratio = est.mean / bound
        if ratio > worst:
            worst, worst_n = ratio, n
    print(f"dudley domination: max empirical_sup / entropy_sum = {worst:.4f} "
          f"(n={worst_n}, {n_specs} specs, seed {CALIBRATION_SEED})")
    return worst


def lambdap_median(n: int = 256, p: float = 4.0, trials: int = 50):
    rep = harmonic.lambda_p_random_trial(n, p, trials,
                                         RandomStream(CALIBRATION_SEED, stream_id=0x1A),
                                         probes=8)
    full = harmonic.lambda_p_estimate(n, p, list(range(n)), probes=8,
                                      r=RandomStream(CALIBRATION_SEED, stream_id=0x1B))
    print(f"lambdap: median K = {rep.random_median:.4f}, max = {rep.random_max:.4f}, "
          f"full-set K = {full:.4f} (n={n}, p={p}, {trials} draws)")
    return rep.random_median, rep.random_max, full


def separation_floors():
    out = {}
    for J0 in (2, 3):
        fam = similarity.build_construction(similarity.SimilarityConfig(J0=J0, ratio=0.25))
        rep = similarity.separation(fam, np.linspace(1.0, 2.0, 101))
        out[(J0, 0.25)] = rep.minimum
        print(f"separation J0={J0} r=1/4: min = {rep.minimum:.6f} at t = {rep.t_witness}")
    return out


def entropy_nets(delta: float = 0.1, ratio: float = 1 / 3):
    out = {}
    for J0 in (1, 2, 3):
        fam = similarity.build_construction(similarity.SimilarityConfig(J0=J0, ratio=ratio))
        need = int(math.ceil(2 * fam.max_coordinate_speed() / delta)) + 1
        rep = similarity.orbit_entropy(fam, delta, need)
        out[J0] = rep.net_size
        print(f"entropy J0={J0}: net = {rep.net_size}, exponent = {rep.exponent:.2f}")
    return out


def infsup_reference():
    cfg = similarity.SimilarityConfig(J0=2, ratio=1 / 3, eps=0.5,
                                      seed=CALIBRATION_SEED, x_samples=1000)
    fam = similarity.build_construction(cfg)
    rep = similarity.inf_sup_experiment(cfg, fam)
    print(f"infsup reference: int_f = {rep.int_f:.4f}, int_F = {rep.int_F:.4f}, "
          f"ratio = {rep.ratio:.4f}, net = {rep.net_points}")
    return rep


def main(argv=None) -> int:
    args = sys.argv[1:] if argv is None else argv
    which = args[0] if args else "all"
    if which in ("dudley", "all"):
        dudley_domination()
    if which in ("lambdap", "all"):
        lambdap_median()
    if which in ("separation", "all"):
        separation_floors()
    if which in ("entropy", "all"):
        entropy_nets()
    if which in ("infsup", "all"):
        infsup_reference()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
