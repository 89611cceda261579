"""Acceptance suite: one test per headline criterion, at its stated tolerance.

Each test prints a single PASS/FAIL line (run with ``pytest -s`` to see them
inline; they also appear for failed criteria in the captured output).
"""

import math
import time

import numpy as np
import pytest

from confbayes.analytic_cp import analytic_full_cp, reflection_vector
from confbayes.cli import main as cli_main
from confbayes.core import ObservedSample
from confbayes.full_cp import aoi_ppd, full_cp_grid, full_cp_pvalue, loo_ppd
from confbayes.models import (
    BetaPrior,
    BinomialModel,
    NormalGammaPrior,
    betabinomial_ppd,
    betabinomial_ppd_from_stats,
    normal_ppd,
    sample_posterior,
)
from confbayes.scores import make_score
from confbayes.sim import DEFAULT_SWEEP_GRID, StudyConfig, prior_sweep, run_study

NOMINAL = 0.90
COVERAGE_FLOOR = NOMINAL - 3 * math.sqrt(0.9 * 0.1 / 1000)  # ~0.872

CP_METHODS = (
    "full:ppd",
    "full:bres",
    "full:qbres",
    "full:dbres",
    "analytic",
    "split:bres",
    "split:qbres",
    "split:ppd",
    "split:dbres",
)


def _report(name: str, ok: bool, detail: str) -> None:
    print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")


class TestAcceptance:
    def test_coverage_validity_reference_design(self):
        """Every CP method covers at >= 0.872 on the n=20, m=20, theta=0.7,
        Beta(0.5, 0.5), alpha=0.1, 1000-replication design."""
        t0 = time.time()
        cfg = StudyConfig()  # defaults are the reference design
        rep = run_study(cfg)
        elapsed = time.time() - t0
        cov = {mid: rep.methods[mid].coverage for mid in CP_METHODS}
        failures = {mid: c for mid, c in cov.items() if c < COVERAGE_FLOOR}
        ok = not failures and elapsed < 600 and rep.extras.get(
            "analytic_vs_full_bres_mismatches", 0
        ) == 0
        detail = (
            f"min coverage {min(cov.values()):.3f} (floor {COVERAGE_FLOOR:.3f}), "
            f"{elapsed:.1f}s, analytic/grid mismatches "
            f"{rep.extras.get('analytic_vs_full_bres_mismatches')}"
        )
        _report("coverage-validity", ok, detail)
        assert not failures, f"methods under the floor: {failures}"
        assert rep.extras["analytic_vs_full_bres_mismatches"] == 0
        assert elapsed < 600

    def test_analytic_equals_grid(self):
        """200 random Binomial instances (n<=25, m<=25, a,b in (0.1,30),
        alpha in {0.05,0.1,0.2}): closed form == grid search, exactly."""
        t0 = time.time()
        rng = np.random.default_rng(1234)
        mismatches = 0
        for _ in range(200):
            n = int(rng.integers(1, 26))
            m = int(rng.integers(1, 26))
            a, b = rng.uniform(0.1, 30, 2)
            data = ObservedSample(rng.integers(0, m + 1, n), trial_size=m)
            prior = BetaPrior(float(a), float(b))
            alpha = float(rng.choice([0.05, 0.1, 0.2]))
            got = analytic_full_cp(data, prior, alpha)
            ref = full_cp_grid(data, BinomialModel(m), prior, make_score("bres"), alpha=alpha)
            if got.kind.members != ref.kind.members:
                mismatches += 1
        elapsed = time.time() - t0
        ok = mismatches == 0 and elapsed < 60
        _report("analytic-equals-grid", ok, f"{mismatches}/200 mismatches, {elapsed:.1f}s")
        assert mismatches == 0
        assert elapsed < 60

    def test_mean_containment(self):
        """The posterior predictive mean lies inside every non-empty
        closed-form interval: 500 random instances per model, zero
        violations."""
        rng = np.random.default_rng(777)
        violations = 0
        for _ in range(500):  # Binomial
            n = int(rng.integers(1, 26))
            m = int(rng.integers(1, 26))
            data = ObservedSample(rng.integers(0, m + 1, n), trial_size=m)
            prior = BetaPrior(*[float(v) for v in rng.uniform(0.1, 30, 2)])
            alpha = float(rng.uniform(0.02, 0.5))
            ps = analytic_full_cp(data, prior, alpha)
            if ps.is_empty:
                continue
            mean = betabinomial_ppd(data, prior).mean
            rv = reflection_vector(data, prior, alpha)
            if rv.k >= 1:
                v = np.sort(rv.v)
                lo, hi = v[rv.k - 1], v[2 * data.n - rv.k]
                if not lo <= mean <= hi:
                    violations += 1
        for _ in range(500):  # Normal
            n = int(rng.integers(2, 26))
            data = ObservedSample(rng.normal(rng.normal() * 3, rng.uniform(0.5, 3), n))
            prior = NormalGammaPrior(
                float(rng.normal()), float(rng.uniform(0.2, 8)),
                float(rng.uniform(0.5, 6)), float(rng.uniform(0.5, 6)),
            )
            alpha = float(rng.uniform(0.02, 0.5))
            ps = analytic_full_cp(data, prior, alpha)
            mean = normal_ppd(data, prior).mean
            if not ps.contains(mean) and not math.isinf(ps.kind.lower):
                # open interval: the mean strictly inside is the claim
                violations += 1
        ok = violations == 0
        _report("mean-containment", ok, f"{violations}/1000 violations")
        assert violations == 0

    def test_add_one_in_and_leave_one_out_fidelity(self):
        """AOI reweighting within 0.005 of the exact augmented pmf uniformly
        over the support (G=2e4, averaged over 50 seeds); LOO within 0.01 of
        the exact deleted refit at G=5e4."""
        data = ObservedSample([14, 15, 13, 16, 12, 14, 15, 13, 14, 15], trial_size=20)
        prior = BetaPrior(0.5, 0.5)
        model = BinomialModel(20)
        m, n = 20, data.n
        s = int(sum(data.outcomes))

        worst_aoi = 0.0
        for y_cand in (8, 14, 19):
            exact = betabinomial_ppd_from_stats(m, n + 1, s + y_cand, prior).pmf_all()
            err_sum = np.zeros(m + 1)
            for seed in range(50):
                draws = sample_posterior(data, prior, 20_000, seed=seed)
                approx = aoi_ppd(np.arange(m + 1), y_cand, draws, model)
                err_sum += np.abs(approx - exact)
            worst_aoi = max(worst_aoi, float(np.max(err_sum / 50)))
        aoi_ok = worst_aoi <= 0.005

        draws = sample_posterior(data, prior, 50_000, seed=99)
        worst_loo = 0.0
        for y_cand, i_del in ((8, 0), (17, 3)):
            y_del = data.outcomes[i_del]
            exact = betabinomial_ppd_from_stats(
                m, n, s - int(y_del) + y_cand, prior
            ).pmf_all()
            approx = np.array(
                [loo_ppd(float(yt), float(y_cand), float(y_del), draws, model) for yt in range(m + 1)]
            )
            worst_loo = max(worst_loo, float(np.max(np.abs(approx - exact))))
        loo_ok = worst_loo <= 0.01

        ok = aoi_ok and loo_ok
        _report(
            "draw-recycling-fidelity",
            ok,
            f"AOI sup-error {worst_aoi:.4f} (<=0.005), LOO sup-error {worst_loo:.4f} (<=0.01)",
        )
        assert aoi_ok and loo_ok

    def test_pvalue_threshold_equivalence_and_superuniformity(self):
        """Test inversion and rank thresholding give identical sets on 100
        random instances; null conformal p-values are super-uniform."""
        rng = np.random.default_rng(4321)
        mism = 0
        for _ in range(100):
            n = int(rng.integers(1, 26))
            m = int(rng.integers(1, 26))
            data = ObservedSample(rng.integers(0, m + 1, n), trial_size=m)
            prior = BetaPrior(*[float(v) for v in rng.uniform(0.1, 30, 2)])
            alpha = float(rng.choice([0.05, 0.1, 0.2]))
            name = str(rng.choice(["ppd", "bres", "qbres", "dbres"]))
            spec = make_score(name, alpha if name == "qbres" else None)
            a = full_cp_grid(data, BinomialModel(m), prior, spec, alpha=alpha)
            b = full_cp_pvalue(data, BinomialModel(m), prior, spec, alpha=alpha)
            if a.kind.members != b.kind.members:
                mism += 1

        n, trials = 24, 10_000
        draws = np.random.default_rng(8).standard_normal((trials, n + 1))
        counts = np.sum(draws[:, :n] <= draws[:, [n]], axis=1)
        pvals = (counts + 1) / (n + 1)
        su_ok = True
        worst = ""
        for alpha in (0.05, 0.1, 0.25):
            freq = float(np.mean(pvals <= alpha))
            se = math.sqrt(alpha * (1 - alpha) / trials)
            if freq > alpha + 3 * se:
                su_ok = False
                worst = f"P(p<={alpha}) = {freq:.4f}"
        ok = mism == 0 and su_ok
        _report(
            "pvalue-threshold-equivalence",
            ok,
            f"{mism}/100 set mismatches; super-uniformity {'ok' if su_ok else worst}",
        )
        assert mism == 0 and su_ok

    def test_prior_sweep_qualitative(self):
        """Default 7x7 sweep at 1000 reps/cell: conformal coverage holds in
        every cell, the unadjusted baseline fails somewhere, and the
        narrowest conformal cell has prior mean among the grid's closest to
        0.7."""
        t0 = time.time()
        cfg = StudyConfig()
        cells = prior_sweep(cfg, DEFAULT_SWEEP_GRID, DEFAULT_SWEEP_GRID)
        elapsed = time.time() - t0

        cp_below = [
            (a, b) for a, b, rep in cells if rep.methods["analytic"].coverage < COVERAGE_FLOOR
        ]
        hppd_fail_cells = [
            (a, b) for a, b, rep in cells if rep.methods["hppd"].coverage < COVERAGE_FLOOR
        ]
        widths = {(a, b): rep.methods["analytic"].mean_width for a, b, rep in cells}
        argmin_cell = min(widths, key=widths.get)
        argmin_mean = argmin_cell[0] / (argmin_cell[0] + argmin_cell[1])
        dists = sorted({abs(a / (a + b) - 0.7) for a, b, _ in cells})
        close_ok = abs(argmin_mean - 0.7) <= dists[2] + 1e-12  # top-3 closest prior means

        ok = not cp_below and bool(hppd_fail_cells) and close_ok
        _report(
            "prior-sweep-qualitative",
            ok,
            f"CP cells below floor: {len(cp_below)}; baseline failing cells: "
            f"{len(hppd_fail_cells)}; argmin-width cell {argmin_cell} "
            f"(prior mean {argmin_mean:.3f}); {elapsed:.0f}s",
        )
        assert not cp_below, f"conformal coverage broke in cells {cp_below}"
        assert hppd_fail_cells, "expected at least one undercovering baseline cell"
        assert close_ok

    def test_quantile_law(self):
        """Rank uniformity within 4 se per rank and the finite-sample
        quantile guarantee within 3 se, 1e4 batches each."""
        n, batches = 9, 10_000
        rng = np.random.default_rng(1618)
        draws = rng.standard_normal((batches, n + 1))
        ranks = 1 + np.sum(draws[:, :n] < draws[:, [n]], axis=1)
        p = 1.0 / (n + 1)
        se_rank = math.sqrt(p * (1 - p) / batches)
        rank_ok = all(
            abs(float(np.mean(ranks == r)) - p) <= 4 * se_rank for r in range(1, n + 2)
        )

        n2, alpha = 19, 0.1
        draws2 = rng.standard_normal((batches, n2 + 1))
        rank = math.ceil((n2 + 1) * (1 - alpha))
        q = np.sort(draws2[:, :n2], axis=1)[:, rank - 1]
        cover = float(np.mean(draws2[:, n2] <= q))
        se_cov = math.sqrt(alpha * (1 - alpha) / batches)
        cover_ok = cover >= 1 - alpha - 3 * se_cov

        ok = rank_ok and cover_ok
        _report("quantile-law", ok, f"rank uniformity {rank_ok}, coverage {cover:.4f}")
        assert rank_ok and cover_ok

    def test_simulation_determinism(self, tmp_path, capsys):
        """cmd_simulate emits byte-identical CSVs across runs and worker
        counts for a fixed seed."""
        outs = [tmp_path / f"det-{i}.csv" for i in range(3)]
        argsets = [
            ["simulate", "--reps", "25", "--seed", "31415", "--out", str(outs[0])],
            ["simulate", "--reps", "25", "--seed", "31415", "--out", str(outs[1])],
            ["simulate", "--reps", "25", "--seed", "31415", "--workers", "2",
             "--out", str(outs[2])],
        ]
        for argv in argsets:
            assert cli_main(argv) == 0
        capsys.readouterr()
        blobs = [p.read_bytes() for p in outs]
        ok = blobs[0] == blobs[1] == blobs[2]
        _report("simulation-determinism", ok, f"{len(blobs[0])} bytes x 3 runs identical: {ok}")
        assert ok
