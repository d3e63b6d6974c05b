"""End-to-end acceptance checks, one test per shipped guarantee.

Run with ``pytest tests/test_acceptance.py -s`` to see one verdict line per
check.  Every test prints ``PASS``/``FAIL`` with its measured statistics
before asserting, so a red run still reports what was observed.  The whole
module is seeded and finishes in well under two minutes.
"""

import json
import subprocess
import sys

import numpy as np

from coopt.continuous import (
    ContinuousProblem,
    Grid1D,
    build_potential,
    default_sigmas,
    delta_trap_demo,
    euler_step,
    kernel_step,
    make_kernel,
    solve_ground,
    uniform_field,
)
from coopt.discrete import (
    CoopConfig,
    alpha_update,
    offset_update,
    pairwise_update,
    random_profile,
    solve_discrete,
    zero_profile,
)
from coopt.model import build_model
from coopt.oracle import energy_landscape, ground_eig
from coopt.soft import maxproduct_update, sumproduct_update, uniform_soft

ACC_SEED = 97

GRID = Grid1D(-8.0, 8.0, 401)


def verdict(ok, label, stats):
    print(f"{'PASS' if ok else 'FAIL'} {label}: {stats}")
    assert ok, f"{label}: {stats}"


def random_instance(rng, n_hi=8):
    n = int(rng.integers(2, n_hi + 1))
    sizes = rng.integers(2, 6, size=n)
    unary = [rng.uniform(0.0, 10.0, size=int(m)) for m in sizes]
    pairwise = {}
    for i in range(n):
        for j in range(i + 1, n):
            if rng.uniform() < 0.4:
                pairwise[(i, j)] = rng.uniform(
                    0.0, 10.0, size=(int(sizes[i]), int(sizes[j])))
    return build_model(unary, pairwise)


def harmonic_problem(n=1, k_pair=None):
    pairs = {}
    if k_pair is not None:
        pairs = {(0, 1): lambda x, y: 0.5 * k_pair * (x - y) ** 2,
                 (1, 0): lambda x, y: 0.5 * k_pair * (x - y) ** 2}
    return ContinuousProblem(masses=np.ones(n),
                             unary=[lambda x: 0.5 * x * x for _ in range(n)],
                             pairs=pairs)


def test_c01_bound_validity_and_monotonicity():
    rng = np.random.default_rng(ACC_SEED)
    bound_violations = monotone_violations = 0
    for _ in range(100):
        model = random_instance(rng)
        idx, energies = energy_landscape(model)
        config = CoopConfig(lam=0.5)
        profile = zero_profile(model, "pairwise")
        for _t in range(100):
            new = pairwise_update(profile, model, config)
            gathered = sum(t[idx[:, i]] for i, t in enumerate(new.tables))
            if np.max(gathered + model.shift - energies) > 1e-9:
                bound_violations += 1
            drop = min(float(np.min(b - a))
                       for a, b in zip(profile.tables, new.tables))
            if drop < -1e-9:
                monotone_violations += 1
            profile = new
    ok = bound_violations == 0 and monotone_violations == 0
    verdict(ok, "c01 bound validity & monotonicity",
            f"100 instances x 100 steps, {bound_violations} bound / "
            f"{monotone_violations} monotonicity violations")


def test_c02_certificates_match_enumeration():
    rng = np.random.default_rng(ACC_SEED)
    certified = mismatches = 0
    for _ in range(100):
        model = random_instance(rng)
        _, energies = energy_landscape(model)
        report = solve_discrete(model, CoopConfig(lam=0.5, max_iters=100))
        if report.certificate.certified:
            certified += 1
            if abs(report.certificate.upper_bound - float(energies.min())) > 1e-9:
                mismatches += 1
    ok = mismatches == 0
    verdict(ok, "c02 certificate soundness",
            f"{certified}/100 certified, {mismatches} disagree with "
            "enumeration beyond 1e-9")


def test_c03_variant_equivalence_chain():
    rng = np.random.default_rng(ACC_SEED + 3)
    worst_alpha = worst_offset = 0.0
    hbar = 1.0
    for _ in range(20):
        model = random_instance(rng, n_hi=6)
        a_uniform = 1.0 / (model.n - 1)
        cfg = CoopConfig(lam=0.5)
        p_pair = zero_profile(model, "pairwise")
        p_alpha = zero_profile(model, "alpha")
        p_off = zero_profile(model, "offset")
        soft = uniform_soft(model, hbar, "maxprod")
        for _t in range(50):
            p_pair = pairwise_update(p_pair, model, cfg)
            p_alpha = alpha_update(p_alpha, model, 0.5 * a_uniform)
            worst_alpha = max(worst_alpha, max(
                float(np.max(np.abs(0.5 * ta - tp)))
                for ta, tp in zip(p_alpha.tables, p_pair.tables)))
            p_off = offset_update(p_off, model, 0.8 * a_uniform)
            soft = maxproduct_update(soft, model, alpha=0.8 * a_uniform)
            with np.errstate(divide="ignore"):
                worst_offset = max(worst_offset, max(
                    float(np.max(np.abs(-hbar * np.log(psi) - t)))
                    for psi, t in zip(soft.tables, p_off.tables)))
    ok = worst_alpha <= 1e-12 and worst_offset <= 1e-9
    verdict(ok, "c03 variant equivalence chain",
            f"20 instances x 50 steps, pairwise-vs-alpha sup {worst_alpha:.2e} "
            f"(<=1e-12), offset-vs-log-maxproduct sup {worst_offset:.2e} (<=1e-9)")


def test_c04_offset_fixed_point_ignores_initialization():
    rng = np.random.default_rng(ACC_SEED + 4)
    flagged = runs = 0
    worst = 0.0
    for _ in range(20):
        model = random_instance(rng, n_hi=6)
        config = CoopConfig(lam=0.8, alpha=0.8 / (model.n - 1),
                            tol=1e-12, max_iters=3000)
        reference = None
        for _init in range(10):
            runs += 1
            start = random_profile(model, rng, variant="offset")
            report = solve_discrete(model, config, variant="offset",
                                    initial=start)
            if not report.converged:
                flagged += 1
                continue
            state = np.hstack([np.hstack(report.profile.tables),
                               report.profile.z_acc])
            if reference is None:
                reference = state
            else:
                worst = max(worst, float(np.max(np.abs(state - reference))))
    ok = worst <= 1e-6
    verdict(ok, "c04 initialization robustness",
            f"20 instances x 10 random starts, {flagged}/{runs} flagged "
            f"non-convergent, converged sup-norm spread {worst:.2e} (<=1e-6)")


def test_c05_normalization_every_step():
    rng = np.random.default_rng(ACC_SEED + 5)
    worst_mass = 0.0
    for _ in range(20):
        model = random_instance(rng, n_hi=6)
        soft = uniform_soft(model, 1.0, "sumprod")
        for _t in range(50):
            soft = sumproduct_update(soft, model)
            worst_mass = max(worst_mass, max(
                abs(float(t @ t) - 1.0) for t in soft.tables))
    worst_quad = 0.0
    prob = harmonic_problem()
    for integrator, dt in (("kernel", 1e-3), ("euler", 4e-4)):
        kern = make_kernel(default_sigmas(prob, 1.0), dt, GRID.h)
        field = uniform_field(prob, GRID)
        for _t in range(300):
            if integrator == "kernel":
                field = kernel_step(field, prob, kern)
            else:
                field = euler_step(field, build_potential(field, prob),
                                   prob, kern)
            mass = GRID.h * float(field.psi[0] @ field.psi[0])
            worst_quad = max(worst_quad, abs(mass - 1.0))
    ok = worst_mass <= 1e-12 and worst_quad <= 1e-9
    verdict(ok, "c05 per-step normalization",
            f"soft squared-mass error {worst_mass:.2e} (<=1e-12), quadrature "
            f"error {worst_quad:.2e} (<=1e-9)")


def test_c06_harmonic_ground_state_both_integrators():
    prob = harmonic_problem()
    eig = ground_eig(0.5 * GRID.xs ** 2, GRID, mass=1.0, hbar=1.0)
    stats = []
    ok = True
    for integrator, dt in (("euler", 4e-4), ("kernel", 1e-4)):
        field, result = solve_ground(prob, GRID, dt=dt, tol=1e-6,
                                     integrator=integrator)
        overlap = abs(GRID.h * float(field.psi[0] @ eig.vector))
        e_err = abs(result.energies[0] - eig.value)
        res = result.residuals[0]
        ok = ok and (result.converged and e_err <= 1e-2
                     and overlap >= 0.999 and res <= 1e-4)
        stats.append(f"{integrator}: |dE|={e_err:.1e} overlap={overlap:.6f} "
                     f"residual={res:.1e}")
    verdict(ok, "c06 harmonic ground state", "; ".join(stats))


def test_c07_box_ground_state():
    prob = ContinuousProblem(masses=[1.0], unary=[lambda x: 0.0 * x], pairs={})
    eig = ground_eig(np.zeros(GRID.n), GRID, mass=1.0, hbar=1.0)
    field, result = solve_ground(prob, GRID, dt=2e-3, tol=1e-6,
                                 integrator="kernel")
    rel = abs(result.energies[0] - eig.value) / eig.value
    ok = result.converged and rel <= 0.02
    verdict(ok, "c07 box ground state",
            f"E={result.energies[0]:.6f} vs {eig.value:.6f}, "
            f"relative error {rel:.2e} (<=2e-2)")


def test_c08_coupled_pair_self_consistency():
    prob = harmonic_problem(n=2, k_pair=1.0)
    field, result = solve_ground(prob, GRID, dt=4e-4, tol=1e-6,
                                 integrator="euler")
    v = build_potential(field, prob)
    ok = result.converged
    stats = []
    for i in range(2):
        eig = ground_eig(v[i], GRID, mass=1.0, hbar=1.0)
        e_err = abs(result.energies[i] - eig.value)
        ok = ok and result.residuals[i] <= 1e-4 and e_err <= 1e-3
        stats.append(f"p{i}: residual={result.residuals[i]:.1e} |dE|={e_err:.1e}")
    verdict(ok, "c08 coupled mean-field self-consistency", "; ".join(stats))


def test_c09_one_hot_trap_and_smoothed_escape():
    prob = harmonic_problem()
    report = delta_trap_demo(prob, GRID, [3.0])
    final_overlap = report["escape_overlaps"][-1]
    ok = (report["frozen_max_step_change"] <= 1e-12
          and report["frozen_steps"] == 100
          and report["escape_converged"] and final_overlap >= 0.99)
    verdict(ok, "c09 one-hot trap escape",
            f"frozen per-step change {report['frozen_max_step_change']:.1e} "
            f"over {report['frozen_steps']} steps, smoothed final overlap "
            f"{final_overlap:.6f} (>=0.99)")


def test_c10_integrator_discrepancy_halves_with_dt():
    prob = harmonic_problem()
    t_final = 0.2
    discrepancies = []
    for k in range(4):
        dt = 4e-4 / 2 ** k
        steps = round(t_final / dt)
        kern = make_kernel(default_sigmas(prob, 1.0), dt, GRID.h)
        f_kernel = uniform_field(prob, GRID)
        f_euler = uniform_field(prob, GRID)
        for _ in range(steps):
            f_kernel = kernel_step(f_kernel, prob, kern)
            f_euler = euler_step(f_euler, build_potential(f_euler, prob),
                                 prob, kern)
        discrepancies.append(float(np.max(np.abs(f_kernel.psi - f_euler.psi))))
    ratios = [b / a for a, b in zip(discrepancies, discrepancies[1:])]
    ok = all(abs(r - 0.5) <= 0.15 for r in ratios)
    verdict(ok, "c10 integrator discrepancy halving",
            f"ratios {[f'{r:.3f}' for r in ratios]} (each within 0.5+-0.15)")


def test_c11_cli_runs_are_byte_identical(tmp_path):
    problem = tmp_path / "problem.json"
    problem.write_text(json.dumps({
        "variables": [{"values": [0, 1]}, {"values": [0, 1, 2]}],
        "unary": [[0.0, 1.0], [0.0, 2.0, 4.0]],
        "pairwise": [{"i": 0, "j": 1, "table": [[0, 6, 1], [5, 0, 1]]}],
    }))
    particle = tmp_path / "particle.json"
    particle.write_text(json.dumps(
        {"particles": [{"potential": {"type": "harmonic"}}]}))
    commands = [
        ["solve-discrete", str(problem), "--seed", "7"],
        ["solve-ground", str(particle), "--grid", "-6:6:61"],
    ]
    ok = True
    stats = []
    for cmd in commands:
        outputs = []
        for run_dir in ("a", "b"):
            out = tmp_path / f"{cmd[0]}_{run_dir}"
            proc = subprocess.run(
                [sys.executable, "-m", "coopt.cli", *cmd, "--out", str(out)],
                capture_output=True, text=True)
            assert proc.returncode == 0, proc.stderr
            lines = (out / "result.json").read_text().splitlines()
            outputs.append([l for l in lines if "wall_time_s" not in l])
        same = outputs[0] == outputs[1]
        ok = ok and same
        stats.append(f"{cmd[0]}: {'identical' if same else 'differs'}")
    verdict(ok, "c11 CLI determinism",
            "; ".join(stats) + " (result.json, wall time excluded)")
