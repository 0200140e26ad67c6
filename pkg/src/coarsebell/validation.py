"""Cross-backend validation suite.

Every check compares two independent computational routes (closed form,
coherent engine, Fock oracle, thermal quadrature) or asserts a physics
invariant (trace preservation, Hermiticity, channel composition,
probability normalization, bound compliance).  The "quick" suite runs in
well under two minutes; "full" adds the dense closed-form/engine grid,
oracle truncation doubling, and a randomized oracle-equivalence batch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from coarsebell import closedform as cf
from coarsebell import engine as eng
from coarsebell import fock
from coarsebell import inequalities as ineq
from coarsebell import numerics, thermal


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: float
    tolerance: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: measured {self.measured:.3e} (tol {self.tolerance:.0e})"


def _check(name: str, measured: float, tolerance: float) -> CheckResult:
    return CheckResult(name, bool(measured <= tolerance), float(measured), tolerance)


def _random_operator(rng, scale=1.5) -> eng.CoherentOperator:
    """Random Hermitian dyad set with bounded labels."""
    n = 4
    kets_a = scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    kets_b = scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    coeff = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    op = eng.CoherentOperator(
        np.concatenate([coeff, np.conj(coeff), np.ones(n)]),
        np.concatenate([kets_a, np.roll(kets_a, 1), kets_a]),
        np.concatenate([kets_b, np.roll(kets_b, 1), kets_b]),
        np.concatenate([np.roll(kets_a, 1), kets_a, kets_a]),
        np.concatenate([np.roll(kets_b, 1), kets_b, kets_b]),
    )
    return op


def _quick_checks() -> list[CheckResult]:
    rng = np.random.default_rng(20260810)
    out: list[CheckResult] = []

    # --- special functions ------------------------------------------------
    out.append(_check("faddeeva at origin", abs(numerics.faddeeva(0j) - 1.0), 1e-14))
    out.append(
        _check(
            "faddeeva unit imaginary",
            abs(numerics.faddeeva(1j) - 0.4275835761558070),
            1e-13,
        )
    )
    z = rng.uniform(-3, 3, 64) + 1j * rng.uniform(-3, 3, 64)
    refl = np.max(
        np.abs(numerics.faddeeva(-z) - (2.0 * np.exp(-z * z) - numerics.faddeeva(z)))
    )
    out.append(_check("faddeeva reflection", refl, 1e-10))
    out.append(
        _check("erf real axis", abs(numerics.erf_complex(2.0 + 0j) - 0.9953222650189527), 1e-12)
    )
    from scipy.special import wofz

    zz = rng.uniform(-4, 4, 128) + 1j * rng.uniform(-4, 4, 128)
    out.append(
        _check(
            "faddeeva vs scipy.wofz",
            float(np.max(np.abs(numerics.faddeeva(zz) - wofz(zz)) / np.abs(wofz(zz)))),
            1e-11,
        )
    )

    # --- quadrature ---------------------------------------------------------
    for order in (20, 64):
        rule = numerics.gauss_hermite(order)
        out.append(
            _check(
                f"gauss-hermite weight sum (order {order})",
                abs(rule.weights.sum() - math.sqrt(math.pi)),
                1e-12,
            )
        )
    rule = numerics.gauss_hermite(3)
    out.append(
        _check(
            "gauss-hermite quartic moment",
            abs(rule.integrate(lambda x: x**4) - 0.75 * math.sqrt(math.pi)),
            1e-12,
        )
    )

    # --- engine invariants ----------------------------------------------------
    op = _random_operator(rng)
    tr0 = op.trace()
    for name, trans in [
        ("displace", lambda o: eng.displace(o, "A", 0.3 - 0.2j)),
        ("kerr", lambda o: eng.kerr(o, "B")),
        ("beamsplit", lambda o: eng.beamsplit(o, 0.8)),
        ("loss", lambda o: eng.loss(o, "A", 0.6)),
    ]:
        out.append(
            _check(f"trace preservation ({name})", abs(trans(op).trace() - tr0), 1e-11)
        )
    pipeline = eng.loss(eng.kerr(eng.displace(op, "A", 0.2j), "A"), "B", 0.7)
    out.append(_check("hermiticity through pipeline", pipeline.hermiticity_defect(), 1e-10))

    twice = eng.loss(eng.loss(op, "A", 0.9), "A", 0.7)
    once = eng.loss(op, "A", 0.63)
    diff = max(
        float(np.max(np.abs(twice.coeff - once.coeff))),
        float(np.max(np.abs(twice.ket_a - once.ket_a))),
        float(np.max(np.abs(twice.bra_a - once.bra_a))),
    )
    out.append(_check("loss composition eta1*eta2", diff, 1e-10))

    branch = eng.ets_branch(1.0 + 0.2j, 0.8)
    out.append(
        _check(
            "correlation within [-1, 1]",
            max(0.0, abs(eng.correlation(branch, 0.8)) - 1.0),
            1e-9,
        )
    )
    probs = eng.joint_probs(branch, 0.8)
    out.append(_check("joint probabilities sum to 1", abs(sum(probs) - 1.0), 1e-9))
    out.append(_check("joint probabilities nonnegative", max(0.0, -min(probs)), 1e-12))
    corr_from_probs = probs[0] + probs[3] - probs[1] - probs[2]
    out.append(
        _check(
            "correlation equals probability combination",
            abs(corr_from_probs - eng.correlation(branch, 0.8)),
            1e-9,
        )
    )

    # --- engine vs Fock oracle ---------------------------------------------
    dim = 30
    gamma = 0.7 + 0.4j
    ours = eng.sign_element(np.conj(gamma) * 0 + (-gamma), gamma)
    s_mat = fock.fock_sign(dim)
    va = fock.fock_coherent(gamma, dim)
    vb = fock.fock_coherent(-gamma, dim)
    out.append(
        _check("sign element vs oracle", abs(ours - vb.conj() @ s_mat @ va), 1e-10)
    )

    psi = fock.fock_kerr(dim) @ fock.fock_coherent(1.2, dim)
    target = (
        np.exp(-0.25j * math.pi)
        * (fock.fock_coherent(1.2, dim) + 1j * fock.fock_coherent(-1.2, dim))
        / math.sqrt(2.0)
    )
    out.append(_check("Kerr cat phase vs oracle", float(np.max(np.abs(psi - target))), 1e-9))

    rho = np.outer(va, va.conj())
    lossy = fock.fock_loss(np.outer(va, vb.conj()), 0.5, dim)
    ours = math.exp(-2.0 * (1.0 - 0.5) * abs(gamma) ** 2)
    va2 = fock.fock_coherent(math.sqrt(0.5) * gamma, dim)
    vb2 = fock.fock_coherent(-math.sqrt(0.5) * gamma, dim)
    want = ours * np.outer(va2, vb2.conj())
    out.append(
        _check("loss coherence suppression vs oracle", float(np.max(np.abs(lossy - want))), 1e-10)
    )
    out.append(
        _check(
            "loss trace preservation (oracle)",
            abs(np.trace(fock.fock_loss(rho, 0.37, dim)) - np.trace(rho)),
            1e-10,
        )
    )

    for family in ("qubit", "alt"):
        sc = fock.BellScenario(
            V=1.0, d=1.0, eta=0.75, family=family, settings=(0.35, -0.5), kind="bell"
        )
        if family == "qubit":
            op = eng.ets_branch(1.0, 1.0)
        else:
            op = eng.alt_branch(1.0, 1.0)
        op = eng.apply_bell_setting(op, 0.35, "A", 1.0)
        op = eng.apply_bell_setting(op, -0.5, "B", 1.0)
        out.append(
            _check(
                f"engine vs oracle correlation ({family})",
                abs(eng.correlation(op, 0.75) - fock.oracle_correlation(sc, dim=30)),
                1e-8,
            )
        )
    sc = fock.BellScenario(
        V=1.0, d=1.1, eta=0.9, family="qubit",
        settings=((0.8, 0.3), (1.2, -0.6)), kind="leggett",
    )
    op = eng.ets_branch(1.1, 1.1)
    op = eng.apply_leggett_setting(op, (0.8, 0.3), "A", 1.1)
    op = eng.apply_leggett_setting(op, (1.2, -0.6), "B", 1.1)
    out.append(
        _check(
            "engine vs oracle correlation (rotation sequence)",
            abs(eng.correlation(op, 0.9) - fock.oracle_correlation(sc, dim=30)),
            1e-8,
        )
    )

    # --- closed form vs engine and quadrature --------------------------------
    worst = 0.0
    for ta in np.linspace(-2, 2, 3):
        for tb in np.linspace(-2, 2, 3):
            op = eng.ets_branch(1.0, 1.0)
            op = eng.apply_bell_setting(op, ta, "A", 1.0)
            op = eng.apply_bell_setting(op, tb, "B", 1.0)
            worst = max(
                worst,
                abs(
                    eng.correlation(op, 1.0)
                    - cf.correlation(ta, tb, cf.EtsParams(1.0, 1.0, 1.0))
                ),
            )
    out.append(_check("closed form vs engine (pure branch)", worst, 1e-6))

    for V in (3.0, 10.0):
        ens = thermal.ensemble_correlation("qubit", (0.4, -0.3), V, 1.2, 0.7)
        cls = cf.correlation(0.4, -0.3, cf.EtsParams(V, 1.2, 0.7))
        out.append(_check(f"closed form vs quadrature (V={V:g})", abs(ens - cls), 1e-4))
    ens = thermal.ensemble_correlation(
        "qubit", ((0.9, 0.4), (1.4, -0.8)), 5.0, 2.0, 0.9, kind="rotation"
    )
    cls = cf.leggett_correlation(
        (0.9, 0.4), (1.4, -0.8), cf.EtsParams(5.0, 2.0, 0.9)
    )
    out.append(_check("closed form vs quadrature (span rotation)", abs(ens - cls), 1e-4))

    val, converged = thermal.converged_correlation("qubit", (0.5, 0.1), 8.0, 1.5, 0.4)
    out.append(_check("quadrature order-doubling convergence", 0.0 if converged else 1.0, 0.5))

    ens = thermal.ensemble_correlation("alt", (0.2, -0.7), 1.0, 1.1, 0.6)
    op = eng.alt_branch(1.1, 1.1)
    op = eng.apply_bell_setting(op, 0.2, "A", 1.1)
    op = eng.apply_bell_setting(op, -0.7, "B", 1.1)
    out.append(
        _check("quadrature V=1 limit (alt) vs engine", abs(ens - eng.correlation(op, 0.6)), 1e-9)
    )

    # --- thermal weights, entropy, optimizer ---------------------------------
    grid = thermal.pfunc_grid(3.0, 1.5, 24)
    mean = np.sum(grid.weights * grid.alphas)
    var = np.sum(grid.weights * np.abs(grid.alphas - mean) ** 2)
    out.append(_check("phase-space grid mean", abs(mean - 1.5), 1e-10))
    out.append(_check("phase-space grid variance", abs(var - (3.0 - 1.0) / 2.0), 1e-8))

    s_pure, _ = thermal.linear_entropy(1.0, 1.0)
    out.append(_check("linear entropy pure state", abs(s_pure), 1e-12))
    s1, e1 = thermal.linear_entropy(4.0, 1.0, mc_samples=40_000, seed=1)
    s2, e2 = thermal.linear_entropy(4.0, 1.0, mc_samples=40_000, seed=2)
    out.append(
        _check(
            "linear entropy seed stability (3 sigma)",
            abs(s1 - s2) / (3.0 * math.hypot(e1, e2)),
            1.0,
        )
    )

    cfg = numerics.OptimizerConfig(bounds=((-5.0, 5.0),), restarts=4, seed=1)
    res1 = numerics.minimize(lambda v: (v[0] - 1.0) ** 2, cfg)
    res2 = numerics.minimize(lambda v: (v[0] - 1.0) ** 2, cfg)
    out.append(_check("optimizer determinism", abs(res1.fun - res2.fun), 0.0))
    out.append(_check("optimizer quadratic argmin", abs(res1.x[0] - 1.0), 1e-5))

    # --- bound compliance ------------------------------------------------------
    p = cf.EtsParams(2.0, 1.0, 0.8)
    theta = 0.37
    b_equal = cf.bell_value(cf.ChshAngles(theta, theta, theta, theta), p)
    out.append(
        _check(
            "equal-angle CHSH identity B = 2 C",
            abs(b_equal - 2.0 * cf.correlation(theta, theta, p)),
            1e-12,
        )
    )
    worst = 0.0
    for _ in range(40):
        v = rng.uniform(-math.pi, math.pi, 4)
        val = abs(cf.bell_value(cf.ChshAngles(*v), cf.EtsParams(3.0, 1.3, 0.9)))
        worst = max(worst, val - ineq.TSIRELSON)
    out.append(_check("quantum bound on random sweep", max(0.0, worst), 1e-6))

    # sign binning thresholds at zero, so the quadrature-scale convention
    # (x = (a+a^dag)/sqrt(2) vs x = a+a^dag) cannot change the element
    from scipy.integrate import quad

    s_mat12 = fock.fock_sign(12)
    s_doubled, _ = quad(
        lambda y: float(
            np.prod(fock._hermite_functions(np.array([y / math.sqrt(2.0)]), 2)[:, 0])
        )
        / math.sqrt(2.0),
        0.0,
        14.0,
        epsabs=1e-12,
    )
    out.append(
        _check(
            "binning convention independence", abs(2.0 * s_doubled - s_mat12[0, 1]), 1e-8
        )
    )

    return out


def _full_checks() -> list[CheckResult]:
    rng = np.random.default_rng(77)
    out: list[CheckResult] = []

    # dense closed-form vs engine grid (the transcription-replacement check)
    worst = 0.0
    for eta in (0.3, 0.7, 1.0):
        p = cf.EtsParams(1.0, 1.0, eta)
        for ta in np.linspace(-math.pi, math.pi, 5):
            for tb in np.linspace(-math.pi, math.pi, 5):
                op = eng.ets_branch(1.0, 1.0)
                op = eng.apply_bell_setting(op, ta, "A", 1.0)
                op = eng.apply_bell_setting(op, tb, "B", 1.0)
                worst = max(worst, abs(eng.correlation(op, eta) - cf.correlation(ta, tb, p)))
    out.append(_check("closed form vs engine, 5x5x3 grid", worst, 1e-6))

    # oracle truncation doubling
    sc = fock.BellScenario(
        V=1.0, d=1.0, eta=0.8, family="qubit", settings=(0.4, -0.2), kind="bell"
    )
    c40 = fock.oracle_correlation(sc, dim=40)
    c80 = fock.oracle_correlation(sc, dim=80)
    out.append(_check("oracle truncation doubling 40->80", abs(c80 - c40), 1e-9))

    # randomized oracle equivalence over every operation
    worst = 0.0
    for k in range(24):
        d = rng.uniform(0.6, 1.4)
        eta = rng.uniform(0.3, 1.0)
        family = "qubit" if k % 2 == 0 else "alt"
        if k % 3 == 0:
            settings = (
                (rng.uniform(0, math.pi), rng.uniform(-math.pi, math.pi)),
                (rng.uniform(0, math.pi), rng.uniform(-math.pi, math.pi)),
            )
            kind = "leggett"
            if family == "alt":
                family = "qubit"
        else:
            settings = (rng.uniform(-2, 2), rng.uniform(-2, 2))
            kind = "bell"
        sc = fock.BellScenario(V=1.0, d=d, eta=eta, family=family, settings=settings, kind=kind)
        op = eng.ets_branch(d, d) if family == "qubit" else eng.alt_branch(d, d)
        apply = (
            eng.apply_bell_setting if kind == "bell" else eng.apply_leggett_setting
        )
        op = apply(op, settings[0], "A", d)
        op = apply(op, settings[1], "B", d)
        worst = max(worst, abs(eng.correlation(op, eta) - fock.oracle_correlation(sc, dim=42)))
    out.append(_check("randomized oracle equivalence (24 scenarios)", worst, 1e-8))

    # stratified closed-form vs quadrature sample
    worst = 0.0
    for _ in range(8):
        V = rng.uniform(1.0, 50.0)
        d = rng.uniform(0.3, 3.0)
        eta = rng.uniform(0.05, 1.0)
        ta, tb = rng.uniform(-math.pi, math.pi, 2)
        ens = thermal.ensemble_correlation("qubit", (ta, tb), V, d, eta)
        out_cf = cf.correlation(ta, tb, cf.EtsParams(V, d, eta))
        worst = max(worst, abs(ens - out_cf))
    out.append(_check("stratified closed form vs quadrature (V in [1,50])", worst, 1e-4))

    # pulse sequence converges to the exact span rotation at large separation
    vals = []
    for d in (4.0, 8.0, 16.0):
        p = cf.EtsParams(1.0, d, 1.0)
        seq = cf.leggett_correlation((0.9, 0.4), (1.4, -0.8), p, realization="sequence")
        rot = cf.leggett_correlation((0.9, 0.4), (1.4, -0.8), p, realization="rotation")
        vals.append(abs(seq - rot))
    decreasing = vals[0] > vals[1] > vals[2]
    out.append(_check("sequence -> rotation convergence", 0.0 if decreasing and vals[-1] < 2e-3 else 1.0, 0.5))

    return out


def run_suite(suite: str = "quick") -> list[CheckResult]:
    """Run the validation checks; suite is "quick" or "full"."""
    checks = _quick_checks()
    if suite == "full":
        checks.extend(_full_checks())
    elif suite != "quick":
        raise ValueError("suite must be 'quick' or 'full'")
    return checks
