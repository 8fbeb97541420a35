"""Acceptance suite: one printed pass/fail line per criterion.

Each test prints ``[criterion NN] PASS/FAIL name: detail`` on the real
stdout (bypassing capture) and then asserts, so a full run shows the
scoreboard even when everything is green.
"""

import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from germflow import (
    DiffeoMap,
    HomotopySystem,
    SamplingSpec,
    Verdict,
    check_c0_criterion,
    check_cr_criterion,
    compare_exponents,
    displacement_profile,
    estimate_lojasiewicz,
    generate_pair,
    integrate_trajectory,
    lojasiewicz_spec,
    parse,
    parse_poly,
    random_multipliers,
    serialize,
    verify_equivalence,
)

from .support import bisect, fd_partial, multi_indices, points, polys

RADIAL_PHI_01 = 0.09950854917683447  # sqrt((-1 + sqrt(1.04))/2)


def _emit(capsys, idx, name, ok, detail):
    status = "PASS" if ok else "FAIL"
    with capsys.disabled():
        print(f"[criterion {idx:02d}] {status} {name}: {detail}")
    assert ok, f"criterion {idx:02d} {name}: {detail}"


def _spec_200(n):
    return SamplingSpec(n, shells=10, points_per_shell=20)


def test_criterion_01_cubic_equivalence(capsys, cubic_pair):
    t0 = time.perf_counter()
    f, g = cubic_pair
    spec = SamplingSpec(1)
    report = check_cr_criterion(f, g, 1, spec)
    system = HomotopySystem(f, g)
    diffeo = DiffeoMap(system)
    eq = verify_equivalence(system, diffeo, spec)
    phi = float(diffeo([0.1])[0])
    root = bisect(lambda s: s * s + 0.25 * s**3 - 0.01, 0.05, 0.15)
    elapsed = time.perf_counter() - t0
    ok = (
        report.verdict is Verdict.PASS
        and abs(report.c_estimate - 0.1875) <= 1e-9
        and eq.max_residual <= 1e-8
        and abs(phi - root) <= 1e-7
        and elapsed < 5.0
    )
    _emit(
        capsys, 1, "1-D cubic equivalence", ok,
        f"verdict={report.verdict.value} C={report.c_estimate:.12f} "
        f"residual={eq.max_residual:.2e} |phi(0.1)-root|={abs(phi - root):.2e} "
        f"runtime={elapsed:.2f}s",
    )


def test_criterion_02_radial_equivalence(capsys, radial_pair):
    t0 = time.perf_counter()
    f, g = radial_pair
    system = HomotopySystem(f, g)
    diffeo = DiffeoMap(system)
    eq = verify_equivalence(system, diffeo, _spec_200(2))
    phi_norm = float(np.linalg.norm(diffeo([0.1, 0.0])))
    elapsed = time.perf_counter() - t0
    ok = (
        len(eq.residuals) == 200
        and eq.max_residual <= 1e-8
        and abs(phi_norm - RADIAL_PHI_01) <= 1e-7
        and elapsed < 30.0
    )
    _emit(
        capsys, 2, "2-D radial equivalence", ok,
        f"samples={len(eq.residuals)} residual={eq.max_residual:.2e} "
        f"|phi((0.1,0))|err={abs(phi_norm - RADIAL_PHI_01):.2e} runtime={elapsed:.2f}s",
    )


def test_criterion_03_conservation(capsys, cubic_pair, radial_pair):
    drifts = []
    for pair, spec in ((cubic_pair, SamplingSpec(1)), (radial_pair, _spec_200(2))):
        system = HomotopySystem(*pair)
        diffeo = DiffeoMap(system)
        eq = verify_equivalence(system, diffeo, spec)
        drifts.append(eq.max_conservation_drift)
    worst = max(drifts)
    ok = worst <= 1e-9
    _emit(capsys, 3, "conservation along trajectories", ok, f"max drift={worst:.2e}")


def test_criterion_04_degeneracies(capsys, cubic_pair, radial_pair):
    checks = []
    for pair in (cubic_pair, radial_pair):
        system = HomotopySystem(*pair)
        diffeo = DiffeoMap(system)
        origin = np.zeros(system.n)
        checks.append(np.array_equal(diffeo(origin), origin))
    for f, spec in ((cubic_pair[0], SamplingSpec(1)), (radial_pair[0], SamplingSpec(2))):
        system = HomotopySystem(f, f)
        diffeo = DiffeoMap(system)
        from germflow import sample_domain

        checks.append(
            all(np.array_equal(diffeo(x), np.asarray(x)) for x in sample_domain(spec))
        )
    ok = all(checks)
    _emit(
        capsys, 4, "fixed point and identity degeneracies", ok,
        f"phi(0)=0 exact and f=g identity bit-exact on all samples: {checks}",
    )


def test_criterion_05_round_trip(capsys, cubic_pair, radial_pair):
    from germflow import sample_domain

    worst = 0.0
    total = 0
    for pair, n in ((cubic_pair, 1), (radial_pair, 2)):
        system = HomotopySystem(*pair)
        diffeo = DiffeoMap(system)
        for x in sample_domain(_spec_200(n)):
            back = diffeo.inverse(diffeo.forward(x))
            worst = max(worst, float(np.linalg.norm(back - np.asarray(x))))
            total += 1
    ok = worst <= 1e-7 and total == 400
    _emit(capsys, 5, "round trip on 200 samples per fixture", ok,
          f"max |psi(phi(x))-x|={worst:.2e} over {total} points")


def test_criterion_06_displacement_decay(capsys, cubic_pair):
    system = HomotopySystem(*cubic_pair)
    profile = displacement_profile(DiffeoMap(system), SamplingSpec(1))
    ok = profile.slope is not None and profile.slope >= 1.9
    _emit(capsys, 6, "displacement decay slope", ok,
          f"slope={profile.slope:.4f} (need >= 1.9)")


def test_criterion_07_negative_control(capsys, divergent_pair):
    f, g = divergent_pair
    reports = []
    for rmin in (1e-2, 1e-3, 1e-4):
        reports.append(check_cr_criterion(f, g, 1, SamplingSpec(1, radius_min=rmin)))
    worsts = [rep.c_estimate for rep in reports]
    slopes = [min(rec.ratio_slope for rec in rep.records) for rep in reports]
    growth = [worsts[i + 1] / worsts[i] for i in range(2)]
    ok = (
        all(rep.verdict is Verdict.FAIL for rep in reports)
        and all(s < -0.25 for s in slopes)
        and all(rep.c_estimate >= 10.0 * max(rec.outer_ratio for rec in rep.records)
                for rep in reports)
        and all(gf >= 9.9 for gf in growth)
    )
    _emit(
        capsys, 7, "negative control FAIL", ok,
        f"verdicts={[rep.verdict.value for rep in reports]} min slope={min(slopes):.3f} "
        f"worst ratios={[f'{w:.3g}' for w in worsts]} growth per decade={[f'{g:.2f}' for g in growth]}",
    )


def test_criterion_08_lojasiewicz(capsys, cubic_pair, radial_pair):
    eta_errs = []
    for k in (2, 3, 4):
        est = estimate_lojasiewicz(parse(f"x1^{k}", 1), lojasiewicz_spec(1))
        eta_errs.append(abs(est.eta_hat - (k - 1) / k))
    deltas = [
        compare_exponents(*cubic_pair, lojasiewicz_spec(1)).delta,
        compare_exponents(*radial_pair, lojasiewicz_spec(2)).delta,
    ]
    ok = all(e <= 0.05 for e in eta_errs) and all(d <= 0.05 for d in deltas)
    _emit(
        capsys, 8, "gradient-inequality exponent estimates", ok,
        f"eta errors={[f'{e:.2e}' for e in eta_errs]} fixture deltas={[f'{d:.2e}' for d in deltas]}",
    )


def test_criterion_09_ideal_pipeline(capsys):
    t0 = time.perf_counter()
    germs = [
        parse("x1^2", 1),
        parse("x1^2 + x2^2", 2),
        parse("x1^2 + 2*x2^2", 2),
        parse("x1^2 - x2^2", 2),
    ]
    fails = []
    worst_residual = 0.0
    for i in range(20):
        f = germs[i % len(germs)]
        g = generate_pair(f, 1, random_multipliers(f.n, 3, seed=i))
        # the construction guarantees the bound on a small enough ball, so
        # sample within 0.1; 32 directions per shell keep the slope fit's
        # direction-sampling noise well inside the PASS band
        spec = SamplingSpec(f.n, radius_max=0.1, points_per_shell=32)
        report = check_cr_criterion(f, g, 1, spec)
        system = HomotopySystem(f, g)
        eq = verify_equivalence(system, DiffeoMap(system), spec)
        worst_residual = max(worst_residual, eq.max_residual)
        if report.verdict is not Verdict.PASS or eq.max_residual > 1e-7:
            fails.append((i, report.verdict.value, eq.max_residual))
    elapsed = time.perf_counter() - t0
    ok = not fails and elapsed < 300.0
    _emit(
        capsys, 9, "randomized ideal-power pipeline", ok,
        f"20 pairs, worst residual={worst_residual:.2e}, failures={fails}, "
        f"runtime={elapsed:.1f}s",
    )


def test_criterion_10_value_gradient_path(capsys):
    f = parse("x1^2", 1)
    g = parse("x1^2 + x1^4", 1)
    spec = SamplingSpec(1)
    report = check_c0_criterion(f, g, spec)
    system = HomotopySystem(f, g)
    eq = verify_equivalence(system, DiffeoMap(system), spec)
    ok = report.verdict is Verdict.PASS and eq.max_residual <= 1e-8
    _emit(
        capsys, 10, "value/gradient ratio path", ok,
        f"verdict={report.verdict.value} flow residual={eq.max_residual:.2e}",
    )


def test_criterion_11_symbolic_core(capsys):
    @settings(max_examples=1000, deadline=None)
    @given(p=polys())
    def round_trip(p):
        assert parse_poly(serialize(p), p.n) == p

    @settings(max_examples=1000, deadline=None)
    @given(data=st.data(), n=st.integers(1, 3))
    def fd_agreement(data, n):
        p = data.draw(polys(n=n))
        m = data.draw(multi_indices(n))
        x = data.draw(points(n))
        sym = p.partial(m).evaluate(x)
        fd = fd_partial(p.evaluate, x, m)
        assert sym == pytest.approx(fd, rel=1e-6, abs=1e-6)

    round_trip()
    fd_agreement()
    _emit(capsys, 11, "symbolic core property suites", True,
          "1000-case parse/serialize round trip and derivative/FD agreement")
