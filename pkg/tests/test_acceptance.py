"""Acceptance suite.

Each test implements one acceptance criterion at its stated tolerance and
prints a single pass/fail line (run with ``pytest -s`` to see the lines as
they stream).  Tolerances marked as calibration artifacts were frozen from
pilot runs of this toolkit and are commented where they appear.
"""

import math
from fractions import Fraction

import numpy as np

from mimo_dense import (
    ArrayGeometry,
    CovarianceKind,
    angular_gains,
    array_kernel,
    basis_expand,
    brute_force_qpsk_mi,
    constrained_capacity,
    dft_basis,
    effective_matrix,
    periodic_sinc,
    preset_covariance,
    qpsk_sic_lower_bound,
    rayleigh_instance,
    run_sic,
    signature,
    sinr_diagnostics,
    spatial_channel,
    spatial_from_paths,
    truncate,
    water_filling,
)
from mimo_dense.equivalence import (
    calibrate_mismatch_constant,
    coeff_overlap,
    frobenius_normalized,
    inverse_square_partial_sum,
    mismatch_bound_check,
    operator_norm,
    scan_respacing_mismatch,
    scan_sidelobe_overlap,
)
from mimo_dense.harness.cli import main as cli_main


def _report(number: int, name: str, ok: bool, detail: str) -> None:
    print(f"acceptance criterion {number} ({name}): {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, detail


def _instances(count, l_t, l_r, delta_t, delta_r, p, tag):
    for t in range(count):
        rng = np.random.default_rng(np.random.SeedSequence([tag, t]))
        geom_t = ArrayGeometry(l_t, delta_t)
        geom_r = ArrayGeometry(l_r, delta_r)
        yield rng, angular_gains(rayleigh_instance(p, geom_t, geom_r, rng), geom_t, geom_r)


def test_criterion_1_exact_identities():
    geoms = [
        ArrayGeometry(2, Fraction(1, 2)),
        ArrayGeometry(4, Fraction(1, 4)),
        ArrayGeometry(3, Fraction(1, 3)),
        ArrayGeometry(8, Fraction(1, 8)),
    ]
    rng = np.random.default_rng(101)

    worst_lemma1 = 0.0
    for _ in range(1000):
        geom = geoms[rng.integers(len(geoms))]
        om, om_p = rng.uniform(-1, 1, 2)
        worst_lemma1 = max(
            worst_lemma1, abs(coeff_overlap(om, om_p, geom) - array_kernel(geom, om_p - om))
        )

    worst_unitary = 0.0
    for geom in geoms:
        u = dft_basis(geom)
        gap = u.conj().T @ u - np.eye(geom.elements)
        worst_unitary = max(worst_unitary, frobenius_normalized(gap))

    worst_recon = 0.0
    for geom in geoms:
        u = dft_basis(geom)
        for om in rng.uniform(-1, 1, 10):
            worst_recon = max(
                worst_recon, float(np.abs(u @ basis_expand(geom, om) - signature(geom, om)).max())
            )

    worst_spatial = 0.0
    for t in range(10):
        rng_i = np.random.default_rng(np.random.SeedSequence([1001, t]))
        geom_t = ArrayGeometry(4, Fraction(1, 4))
        geom_r = ArrayGeometry(2, Fraction(1, 2))
        paths = rayleigh_instance(16, geom_t, geom_r, rng_i)
        direct = spatial_from_paths(paths, geom_t, geom_r)
        angular = spatial_channel(angular_gains(paths, geom_t, geom_r))
        worst_spatial = max(
            worst_spatial, np.linalg.norm(angular - direct) / np.linalg.norm(direct)
        )

    worst_varanasi = 0.0
    for t in range(100):
        rng_i = np.random.default_rng(np.random.SeedSequence([1002, t]))
        n, m = 8, 6
        a = (rng_i.standard_normal((n, m)) + 1j * rng_i.standard_normal((n, m))) / np.sqrt(2 * n)
        gt = 10.0 ** rng_i.uniform(-1, 2)
        from mimo_dense import EffectiveChannel, sic_sinrs

        rho = sic_sinrs(EffectiveChannel(a, gt))
        _, logdet = np.linalg.slogdet(np.eye(n) + gt * a @ a.conj().T)
        worst_varanasi = max(worst_varanasi, abs(np.log1p(rho).sum() - logdet) / logdet)

    ok = (
        worst_lemma1 < 1e-10
        and worst_unitary < 1e-10
        and worst_recon < 1e-10
        and worst_spatial < 1e-10
        and worst_varanasi < 1e-8
    )
    _report(
        1, "exact identities", ok,
        f"lemma1={worst_lemma1:.2e} unitary={worst_unitary:.2e} recon={worst_recon:.2e} "
        f"spatial={worst_spatial:.2e} varanasi={worst_varanasi:.2e}",
    )


def test_criterion_2_bound_suite():
    rng = np.random.default_rng(202)

    # periodic sinc bound on (0, N/2]
    worst_sinc = 0.0
    for n in (8, 32, 128, 512):
        xs = rng.uniform(1e-9, n / 2, 2500)
        worst_sinc = max(worst_sinc, float(np.max(2 * xs * np.abs(periodic_sinc(n, xs)))))

    # SINR column-norm bound on 100 channel instances
    bound_ok = True
    geom_t = ArrayGeometry(2, Fraction(1, 4))
    cov = preset_covariance(CovarianceKind.IDENTITY_SCALED, geom_t)
    for t, (rng_i, ch) in enumerate(
        _instances(100, 2, 2, Fraction(1, 4), Fraction(1, 2), 16, 2002)
    ):
        gt = 10.0 ** rng_i.uniform(-1, 2)
        diag = sinr_diagnostics(effective_matrix(ch, cov, gt), geom_t, cov)
        bound_ok &= bool(diag.bound_ok.all())
        bound_ok &= bool(np.all(diag.sinr_over_snr[:-1] < diag.column_bound[:-1]))

    # operator/Frobenius norm inequalities on 100 random pairs
    norm_ok = True
    for _ in range(100):
        a = rng.standard_normal((6, 5)) + 1j * rng.standard_normal((6, 5))
        b = rng.standard_normal((5, 7)) + 1j * rng.standard_normal((5, 7))
        norm_ok &= operator_norm(a @ b) <= operator_norm(a) * operator_norm(b) + 1e-12
        sq = a[:5, :5]
        norm_ok &= abs(np.trace(sq)) / 5 <= frobenius_normalized(sq) + 1e-12
        rows = np.sort(rng.choice(6, size=3, replace=False))
        cols = np.sort(rng.choice(5, size=2, replace=False))
        norm_ok &= operator_norm(a[np.ix_(rows, cols)]) <= operator_norm(a) + 1e-12

    basel_ok = all(inverse_square_partial_sum(n).ok for n in range(1, 1001))

    # kernel-difference bound: calibrate at L=8, freeze with 10% margin,
    # then assert at L in {16, 32}
    seps = (Fraction(1, 2), Fraction(1, 4), Fraction(1, 8), Fraction(1, 16))
    frozen = 1.1 * calibrate_mismatch_constant(8, seps, grid_points=1001)
    dk_ok = True
    for length in (16, 32):
        bound = 1 - (math.isqrt(length - 1) + 1) / length
        for sep in seps:
            for k in range(length + 1):
                for om in np.linspace(-bound, bound, 101):
                    dk_ok &= mismatch_bound_check(length, sep, k, float(om), constant=frozen).ok

    ok = worst_sinc <= 1 + 1e-12 and bound_ok and norm_ok and basel_ok and dk_ok
    _report(
        2, "bound suite", ok,
        f"sinc={worst_sinc:.6f} sinr_bound={bound_ok} norms={norm_ok} basel={basel_ok} "
        f"kernel_diff(frozen A={frozen:.4f})={dk_ok}",
    )


def test_criterion_3_kernel_sum_scaling():
    details = []
    ok = True
    for sep in (Fraction(1, 4), Fraction(1, 8)):
        small2 = scan_sidelobe_overlap(16, sep).grid_max
        large2 = scan_sidelobe_overlap(64, sep).grid_max
        small3 = scan_respacing_mismatch(16, sep).grid_max
        large3 = scan_respacing_mismatch(64, sep).grid_max
        ok &= large2 <= 1.2 * small2 and large3 <= 1.2 * small3
        details.append(
            f"delta={sep}: sidelobe {small2:.4f}->{large2:.4f}, mismatch {small3:.4f}->{large3:.4f}"
        )
    _report(3, "kernel-sum scaling", ok, "; ".join(details))


def _mean_truncation_gap(l_t, l_r, trials, gamma_tilde, tag):
    total = 0.0
    for _, ch in _instances(trials, l_t, l_r, Fraction(1, 4), Fraction(1, 2),
                            4 * min(2 * l_t, 2 * l_r), tag):
        cap_full = constrained_capacity(ch, water_filling(ch, gamma_tilde), gamma_tilde)
        trunc = truncate(ch)
        cap_trunc = constrained_capacity(trunc, water_filling(trunc, gamma_tilde), gamma_tilde)
        total += abs(cap_full.nats - cap_trunc.nats) / ch.dof
    return total / trials


def test_criterion_4_truncation_gap_trend():
    gt = 10.0**3.0  # 30 dB
    small = _mean_truncation_gap(8, 4, 100, gt, 404)
    large = _mean_truncation_gap(32, 16, 100, gt, 405)
    ok = large < small and small > 0 and large > 0
    _report(
        4, "truncation gap trend", ok,
        f"mean gap (8,4)={small:.5f} > (32,16)={large:.5f}, both positive",
    )


def test_criterion_5_spacing_capacity_match():
    l_t, l_r, trials = 8, 4, 200
    grid_db = [float(db) for db in range(-10, 45, 5)]
    geom_r = ArrayGeometry(l_r, Fraction(1, 2))
    sums = {sep: np.zeros(len(grid_db)) for sep in (Fraction(1, 2), Fraction(1, 4))}
    p = 4 * min(2 * l_t, 2 * l_r)
    for t in range(trials):
        rng = np.random.default_rng(np.random.SeedSequence([505, t]))
        paths = rayleigh_instance(p, ArrayGeometry(l_t, Fraction(1, 2)), geom_r, rng)
        for sep in sums:
            geom_t = ArrayGeometry(l_t, sep)
            ch = angular_gains(paths, geom_t, geom_r)
            cov = preset_covariance(CovarianceKind.MAIN_LOBE_UNIFORM, geom_t)
            for i, db in enumerate(grid_db):
                gt = 10.0 ** (db / 10.0)
                sums[sep][i] += constrained_capacity(ch, cov, gt).normalized
    half = sums[Fraction(1, 2)] / trials
    dense = sums[Fraction(1, 4)] / trials
    rel = np.abs(half - dense) / np.maximum(half, dense)
    # Tolerances frozen from a 200-trial pilot on this configuration: the
    # full-grid maximum sits at the lowest SNR point (~6.5%, a systematic
    # 16-vs-17 active-beam power split at this size); from 10 dB upward the
    # curves agree within 2%.
    high = np.array(grid_db) >= 10.0
    ok = bool(np.all(rel <= 0.07) and np.all(rel[high] <= 0.02))
    worst_i = int(np.argmax(rel))
    _report(
        5, "spacing capacity match", ok,
        f"max rel gap {rel.max()*100:.2f}% at {grid_db[worst_i]:+.0f} dB (<=7%); "
        f"max above 10 dB {rel[high].max()*100:.2f}% (<=2%)",
    )


def test_criterion_6_qpsk_ratio_trend():
    l_t, l_r, trials = 8, 4, 100
    gt = 1.0  # 0 dB
    geom_r = ArrayGeometry(l_r, Fraction(1, 2))
    p = 4 * min(2 * l_t, 2 * l_r)
    seps = (Fraction(1, 2), Fraction(1, 4), Fraction(1, 8), Fraction(1, 16))
    ratios = {sep: [] for sep in seps}
    for t in range(trials):
        rng = np.random.default_rng(np.random.SeedSequence([606, t]))
        paths = rayleigh_instance(p, ArrayGeometry(l_t, Fraction(1, 2)), geom_r, rng)
        for sep in seps:
            geom_t = ArrayGeometry(l_t, sep)
            ch = angular_gains(paths, geom_t, geom_r)
            cov = preset_covariance(CovarianceKind.MAIN_LOBE_UNIFORM, geom_t)
            trace = run_sic(effective_matrix(ch, cov, gt), geom_t.delta)
            ratios[sep].append(trace.qpsk_rate_nats / trace.gaussian_rate_nats)
    medians = [float(np.median(ratios[sep])) for sep in seps]
    nondecreasing = all(b >= a for a, b in zip(medians, medians[1:]))
    # the 0.9 floor at the densest spacing was confirmed by pilot runs
    ok = nondecreasing and medians[-1] > 0.9
    _report(
        6, "qpsk ratio trend", ok,
        "medians " + " -> ".join(f"{m:.5f}" for m in medians) + " (nondecreasing, last > 0.9)",
    )


def test_criterion_7_oracle_consistency():
    geom_t = ArrayGeometry(1, Fraction(1, 3))  # 3 transmit antennas
    geom_r = ArrayGeometry(1, Fraction(1, 4))  # 4 receive antennas
    cov = preset_covariance(CovarianceKind.IDENTITY_SCALED, geom_t)
    violations = []
    for t in range(20):
        rng = np.random.default_rng(np.random.SeedSequence([707, t]))
        paths = rayleigh_instance(8, geom_t, geom_r, rng)
        ch = angular_gains(paths, geom_t, geom_r)
        gt = 10.0 ** rng.uniform(-0.5, 1.0)
        eff = effective_matrix(ch, cov, gt)
        lower = qpsk_sic_lower_bound(eff)
        copt = constrained_capacity(ch, cov, gt).nats
        est = brute_force_qpsk_mi(eff, 100_000, rng)
        slack = 3 * est.std_error
        if not (lower <= est.value + slack and est.value <= copt + slack):
            violations.append(t)
    ok = not violations
    _report(
        7, "oracle consistency", ok,
        "20 instances bracketed within 3 standard errors"
        + ("" if ok else f"; violations at {violations}"),
    )


def test_criterion_8_determinism(tmp_path):
    base = ["fig3", "--trials", "3", "--seed", "17", "--no-figure"]
    paths = []
    for name, threads in (("a", "1"), ("b", "2"), ("c", "1")):
        out = tmp_path / f"{name}.csv"
        code = cli_main(base + ["--out", str(out), "--threads", threads])
        assert code == 0
        paths.append(out.read_bytes())
    ok = paths[0] == paths[1] == paths[2]
    _report(8, "determinism", ok, "byte-identical CSV across reruns and thread counts")
