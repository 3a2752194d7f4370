//! Release acceptance sweep. Each test prints one PASS/FAIL line (visible
//! with --nocapture) and then asserts, so a red run still shows the whole
//! scoreboard. Tolerances were frozen against measured margins of at least
//! one order of magnitude; see the per-test comments.

use std::process::Command;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use wulff_core::anisotropy::AnisoNorm;
use wulff_core::geometry::random_convex_polygon;
use wulff_core::pde::sparse::{cg_solve, CsrMatrix};
use wulff_core::pde::{
    solve_dirichlet, solve_epsilon_schedule, Mesh, ProblemSpec, SolveConfig, SourceTerm,
};
use wulff_core::quad;
use wulff_core::radial::{
    branch_membership_check, max_residual_on_grid, power_profile_residual_fd, solve_beta,
    ProblemParams, RadialBranch, RadialError, RadialSolution, SecondSolution,
};
use wulff_core::rearrange::{decreasing_rearrangement, marcinkiewicz_norm, GridFunction};
use wulff_core::verify::{
    compare_profiles, hardy_family_check, isoperimetric_check, norm_estimate_check,
    ode_inequality_check, smallness_check, OdeCheckOptions, VStar,
};

fn gate(idx: usize, name: &str, pass: bool, detail: &str) {
    println!(
        "acceptance {idx:02} {name}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "{name}: {detail}");
}

fn params(n: usize, p: f64, q: f64, frac: f64) -> ProblemParams {
    let base = ProblemParams::new(n, p, q, 0.0, 1.0).unwrap();
    ProblemParams::new(n, p, q, frac * base.lambda_max(), 1.0).unwrap()
}

/// The quadratic case has the closed-form exponent 1/4, the critical
/// strength 1/4 must be rejected, and the bisection is sub-millisecond.
#[test]
fn a01_decay_exponent_oracle_and_rejection() {
    let good = ProblemParams::new(3, 2.0, 2.0, 3.0 / 16.0, 1.0).unwrap();
    let t0 = Instant::now();
    let mut beta = 0.0;
    for _ in 0..100 {
        beta = solve_beta(&good).unwrap();
    }
    let per_solve = t0.elapsed().as_secs_f64() / 100.0;

    let critical = ProblemParams::new(3, 2.0, 2.0, 0.25, 1.0).unwrap();
    let rejected = matches!(solve_beta(&critical), Err(RadialError::LambdaTooLarge { .. }));

    let pass = (beta - 0.25).abs() < 1e-10 && rejected && per_solve < 1e-3;
    gate(
        1,
        "decay exponent oracle",
        pass,
        &format!("beta = {beta:.15}, rejected critical = {rejected}, {per_solve:.1e} s/solve"),
    );
}

/// The quadrature transform of v must reproduce the closed-form power
/// profile across random admissible exponent sets in the plane and in
/// space. Measured worst gap is at rounding level (~1e-14).
#[test]
fn a02_transform_matches_closed_form_profile() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let radii = quad::log_grid(0.01, 1.0, 1000);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let n = if rng.random::<f64>() < 0.5 { 2 } else { 3 };
        let p = if n == 2 {
            1.05 + 0.90 * rng.random::<f64>()
        } else {
            1.05 + 1.45 * rng.random::<f64>()
        };
        // Stay inside the admissible wedge (and below the gradient
        // integrability ceiling) with a positive margin.
        let lo = if n == 2 { 1.5 * p - 1.0 } else { (4.0 * p - 3.0) / 3.0 };
        let q = lo + (p - lo) * (0.05 + 0.95 * rng.random::<f64>());
        let base = ProblemParams::new(n, p, q, 0.0, 1.0).unwrap();
        let lambda = base.lambda_max() * (0.05 + 0.9 * rng.random::<f64>());
        let sol =
            RadialSolution::new(ProblemParams::new(n, p, q, lambda, 1.0).unwrap()).unwrap();
        for &r in &radii {
            worst = worst.max((sol.transform_v(r) - sol.phi_eval(r)).abs());
        }
    }
    gate(
        2,
        "exp-transform identity",
        worst < 1e-9,
        &format!("worst |V - Phi| = {worst:.2e} over 20 sets x 1000 radii"),
    );
}

/// Strong-form residual of the transformed profile: rounding-level with
/// analytic derivatives, second order under step halving with central
/// differences.
#[test]
fn a03_profile_residual_analytic_and_finite_difference() {
    let cases = [
        ProblemParams::new(3, 2.0, 2.0, 3.0 / 16.0, 1.0).unwrap(),
        params(2, 1.75, 1.65, 0.5),
    ];
    let grid: Vec<f64> = (1..=200).map(|i| 0.05 + 0.9 * i as f64 / 200.0).collect();
    let mut pass = true;
    let mut detail = String::new();
    for (c, prm) in cases.iter().enumerate() {
        let beta = solve_beta(prm).unwrap();
        let analytic = max_residual_on_grid(prm, beta, &grid);
        pass &= analytic < 1e-8;
        let fd: Vec<f64> = [4e-4, 2e-4, 1e-4]
            .iter()
            .map(|&h| {
                grid.iter()
                    .map(|&r| power_profile_residual_fd(prm, beta, r, h).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        // First order demanded, second order delivered; the constant in
        // the residual-vs-step bound is ~4, frozen at 25.
        pass &= fd[0] < 25.0 * 4e-4 && (fd[0] / fd[1]).log2() >= 1.0 && (fd[1] / fd[2]).log2() >= 1.0;
        detail += &format!(
            "case {c}: analytic {analytic:.1e}, fd order {:.2}/{:.2}; ",
            (fd[0] / fd[1]).log2(),
            (fd[1] / fd[2]).log2()
        );
    }
    gate(3, "profile residual", pass, detail.trim_end_matches("; "));
}

/// The measure-space differential relation holds with equality on exact
/// radial profiles: relative gap below 1e-3 (measured ~1e-13) on a log
/// set, a plane power set, and a space power set.
#[test]
fn a04_measure_ode_equality_on_radial_profiles() {
    let sets = [(2usize, 1.8, 1.8, 0.5), (2, 1.9, 1.85, 0.3), (3, 2.5, 2.4, 0.7)];
    let mut pass = true;
    let mut worst = 0.0f64;
    for &(n, p, q, frac) in &sets {
        let prm = params(n, p, q, frac);
        let sol = RadialSolution::new(prm).unwrap();
        let kappa = AnisoNorm::euclidean(n).unwrap().wulff_kappa().unwrap();
        let vstar = VStar::new(sol, kappa).unwrap();
        let report = ode_inequality_check(&vstar, &prm, kappa, &OdeCheckOptions::default());
        pass &= report.pass;
        worst = worst.max(report.artifacts["max_metric"]);
    }
    gate(
        4,
        "measure-space ODE equality",
        pass,
        &format!("worst relative gap {worst:.2e} over {} sets", sets.len()),
    );
}

/// Comparison at desk scale: rearranged finite-element solutions stay
/// under the radial profile with slack 0.05 sqrt(h) at every truncation
/// stage, for the round and the elliptical gauge. Measured overshoot is
/// ~5e-5 at 64 rings (slack ~8e-3) and shrinks linearly with h.
#[test]
fn a05_rearranged_solves_stay_under_radial_profile() {
    let prm = params(2, 1.8, 1.8, 0.5);
    let sol = RadialSolution::new(prm).unwrap();
    let norms = [
        ("euclidean", AnisoNorm::euclidean(2).unwrap()),
        ("ellipse", AnisoNorm::ellipse(2.0, 1.0).unwrap()),
    ];
    let mut pass = true;
    let mut detail = String::new();
    for (name, norm) in norms {
        let t0 = Instant::now();
        let kappa = norm.wulff_kappa().unwrap();
        let vstar = VStar::new(sol.clone(), kappa).unwrap();
        let mesh = Mesh::wulff_disc(&norm, 1.0, 64).unwrap();
        let h = mesh.mesh_size();
        let spec = ProblemSpec::new(
            norm.clone(),
            prm.p,
            prm.q,
            SourceTerm::SingularPower { lambda: prm.lambda, gamma: prm.gamma() },
            0.1,
        );
        let reports =
            solve_epsilon_schedule(&mesh, &spec, &SolveConfig::default(), &[0.1, 0.05, 0.025])
                .unwrap();
        let mut worst_gap = f64::NEG_INFINITY;
        for rep in &reports {
            pass &= rep.converged;
            let profile = decreasing_rearrangement(&mesh.cell_function(&rep.u));
            let cmp = compare_profiles(&profile, &vstar, 0.05 * h.sqrt(), 512).unwrap();
            pass &= cmp.pass && cmp.artifacts["violating_fraction"] == 0.0;
            worst_gap = worst_gap.max(cmp.artifacts["max_gap"] + 0.05 * h.sqrt());
        }
        let secs = t0.elapsed().as_secs_f64();
        pass &= secs < 60.0;
        detail += &format!("{name}: overshoot {worst_gap:+.1e} vs slack {:.1e} in {secs:.1}s; ", 0.05 * h.sqrt());
    }
    gate(5, "comparison under symmetrization", pass, detail.trim_end_matches("; "));
}

/// Quadratic-case cross-check: the gradient term is linearized exactly by
/// w = e^u - 1, so the nonlinear solve must match log(1 + w) of an
/// independently assembled linear solve on the same 64 x 64 grid.
#[test]
fn a06_log_transform_linearization_cross_check() {
    let n = 64usize;
    let h = 1.0 / n as f64;
    let tol = 1e-10;
    let mesh = Mesh::rectangle([0.0, 0.0], [1.0, 1.0], n, n).unwrap();
    let e = AnisoNorm::euclidean(2).unwrap();
    let spec = ProblemSpec::new(e, 2.0, 2.0, SourceTerm::Constant(4.0), tol);
    let cfg = SolveConfig { tol, ..Default::default() };
    let report = solve_dirichlet(&mesh, &spec, &cfg, None).unwrap();

    // -lap w - 4 w = 4 with the same elements and one-point quadrature.
    let nv = mesh.n_vertices();
    let mut dof = vec![usize::MAX; nv];
    let mut n_int = 0;
    for v in 0..nv {
        if !mesh.is_boundary(v) {
            dof[v] = n_int;
            n_int += 1;
        }
    }
    let mut triplets = Vec::new();
    let mut rhs = vec![0.0; n_int];
    for t in 0..mesh.n_triangles() {
        let hg = mesh.hat_gradients(t);
        let area = mesh.tri_area(t);
        let tri = mesh.triangles()[t];
        for i in 0..3 {
            let di = dof[tri[i]];
            if di == usize::MAX {
                continue;
            }
            rhs[di] += 4.0 * area / 3.0;
            for j in 0..3 {
                let dj = dof[tri[j]];
                if dj == usize::MAX {
                    continue;
                }
                let stiff = area * (hg[i][0] * hg[j][0] + hg[i][1] * hg[j][1]);
                triplets.push((di, dj, stiff - 4.0 * area / 9.0));
            }
        }
    }
    let k = CsrMatrix::from_triplets(n_int, &triplets);
    let mut w = vec![0.0; n_int];
    let out = cg_solve(&k, &rhs, &mut w, 1e-14, 40_000);

    let mut gap = 0.0f64;
    for v in 0..nv {
        if dof[v] != usize::MAX {
            gap = gap.max((report.u[v] - (1.0 + w[dof[v]]).ln()).abs());
        }
    }
    let allow = 5.0 * (h * h + tol);
    let pass = report.converged && out.converged && gap <= allow;
    gate(
        6,
        "log-transform cross-check",
        pass,
        &format!("sup gap {gap:.2e} <= {allow:.2e} on {n}x{n}"),
    );
}

/// Near-extremal family of the weighted gradient inequality: quotients
/// decrease toward the sharp constant without crossing it (1% band), the
/// mesh evaluation agrees with the radial quadrature, and the quotient is
/// scale invariant to 1e-12.
#[test]
fn a07_sharp_weighted_quotient_family() {
    let families = [
        ("euclidean", AnisoNorm::euclidean(2).unwrap(), 1.8),
        ("ellipse", AnisoNorm::ellipse(2.0, 1.0).unwrap(), 1.5),
    ];
    let mut pass = true;
    let mut detail = String::new();
    for (name, norm, gamma) in families {
        let a = (2.0 - gamma) / gamma;
        let deltas: Vec<f64> = [0.75, 0.5, 0.3, 0.15].iter().map(|f| f * a).collect();
        let report = hardy_family_check(&norm, gamma, 48, &deltas).unwrap();
        pass &= report.pass && report.artifacts["scale_gap"] <= 1e-12;
        detail += &format!(
            "{name}: margin {:+.2e}, scale gap {:.1e}; ",
            report.margin, report.artifacts["scale_gap"]
        );
    }
    gate(7, "weighted quotient family", pass, detail.trim_end_matches("; "));
}

/// Anisotropic perimeter-to-measure ratio: random convex hulls stay at or
/// above the sharp constant and the 1024-gon approximation of the optimal
/// region sits within 1e-3 of it, for three gauge families.
#[test]
fn a08_isoperimetric_ratio_three_gauges() {
    let norms = [
        ("euclidean", AnisoNorm::euclidean(2).unwrap()),
        ("r4", AnisoNorm::r_norm(2, 4.0).unwrap()),
        ("ellipse", AnisoNorm::ellipse(2.0, 1.0).unwrap()),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut pass = true;
    let mut detail = String::new();
    for (name, norm) in norms {
        let polygons: Vec<Vec<[f64; 2]>> =
            (0..20).map(|_| random_convex_polygon(&mut rng, 16, 1.0)).collect();
        let report = isoperimetric_check(&norm, &polygons).unwrap();
        pass &= report.pass;
        detail += &format!(
            "{name}: min ratio {:.6}, optimal-region ratio {:.6}; ",
            report.artifacts["min_ratio"], report.artifacts["wulff_ratio"]
        );
    }
    gate(8, "isoperimetric ratio", pass, detail.trim_end_matches("; "));
}

/// Weak-scale quasi-norm of the model source on a 512^2 polar partition
/// matches the closed form within 1e-3 (measured error is the last-shell
/// midpoint offset, ~gamma/(4 shells) = 8.8e-4), and the smallness
/// threshold reproduces its closed form exactly.
#[test]
fn a09_weak_norm_of_model_source() {
    let prm = params(2, 1.8, 1.8, 0.5);
    let gamma = prm.gamma();
    let norms = [
        ("euclidean", AnisoNorm::euclidean(2).unwrap()),
        ("ellipse", AnisoNorm::ellipse(2.0, 1.0).unwrap()),
    ];
    let mut pass = true;
    let mut detail = String::new();
    for (name, norm) in norms {
        let kappa = norm.wulff_kappa().unwrap();
        let field = GridFunction::wulff_polar_field(&norm, 1.0, 512, 512, |r| {
            prm.lambda * r.powf(-gamma)
        })
        .unwrap();
        let measured = marcinkiewicz_norm(&field, 2.0 / gamma);
        let exact = prm.lambda * kappa.powf(gamma / 2.0);
        let rel = (measured - exact).abs() / exact;

        let report = smallness_check(&prm, kappa, measured);
        let closed = kappa.powf(gamma / 2.0)
            * (gamma - 1.0).powf(gamma - 1.0)
            * ((2.0 - gamma) / gamma).powf(gamma);
        let threshold_gap = (report.artifacts["threshold"] - closed).abs() / closed;

        pass &= rel <= 1e-3 && threshold_gap <= 1e-12 && report.pass;
        detail += &format!("{name}: rel err {rel:.2e}, threshold gap {threshold_gap:.1e}; ");
    }
    gate(9, "weak-scale quasi-norm", pass, detail.trim_end_matches("; "));
}

/// Integral-norm ladder for the strict-gap demo: computed norms of the
/// rearranged solve stay under the closed-form bounds with 5% slack, up
/// to the rung at 90% of the integrability ceiling.
#[test]
fn a10_integral_norm_ladder() {
    let prm = params(2, 1.75, 1.65, 0.5);
    let sol = RadialSolution::new(prm).unwrap();
    let norm = AnisoNorm::euclidean(2).unwrap();
    let kappa = norm.wulff_kappa().unwrap();
    let mesh = Mesh::wulff_disc(&norm, 1.0, 32).unwrap();
    let spec = ProblemSpec::new(
        norm.clone(),
        prm.p,
        prm.q,
        SourceTerm::SingularPower { lambda: prm.lambda, gamma: prm.gamma() },
        0.1,
    );
    let reports =
        solve_epsilon_schedule(&mesh, &spec, &SolveConfig::default(), &[0.1, 0.05, 0.025])
            .unwrap();
    let last = reports.last().unwrap();
    let profile = decreasing_rearrangement(&mesh.cell_function(&last.u));
    let top = 0.9 * prm.s_tilde() / (prm.p - prm.q);
    let ladder = [1.0, 2.0, top];
    let report = norm_estimate_check(&profile, &sol, kappa, &ladder, 0.05).unwrap();
    let pass = last.converged && report.pass;
    gate(
        10,
        "integral-norm ladder",
        pass,
        &format!("max ratio {:.3} over rungs {{1, 2, {top:.1}}}", report.artifacts["max_ratio"]),
    );
}

/// Branch discrimination: the energy-membership probe accepts the
/// variational branch and rejects the spurious power profile, whose
/// integrand is exactly marginal at the threshold exponent.
#[test]
fn a11_branch_membership_discriminates() {
    let good = RadialSolution::new(params(2, 1.75, 1.65, 0.5)).unwrap();
    let spurious =
        SecondSolution::new(ProblemParams::new(2, 1.75, 1.65, 0.0, 1.0).unwrap()).unwrap();
    let r_good = branch_membership_check(&good);
    let r_bad = branch_membership_check(&spurious);
    let marginal = r_bad
        .entries
        .iter()
        .min_by(|a, b| {
            (a.delta - r_bad.delta_threshold)
                .abs()
                .partial_cmp(&(b.delta - r_bad.delta_threshold).abs())
                .unwrap()
        })
        .map(|e| e.integrand_exponent)
        .unwrap();
    let pass = r_good.pass && !r_bad.pass && (marginal + 1.0).abs() < 1e-3;
    gate(
        11,
        "branch membership",
        pass,
        &format!(
            "variational pass = {}, spurious pass = {}, marginal exponent {marginal:.4}",
            r_good.pass, r_bad.pass
        ),
    );
}

/// Repeated pipeline runs are byte-identical, independent of the worker
/// thread count.
#[test]
fn a12_pipeline_runs_are_byte_identical() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    let mut ok = true;
    for (dir, threads) in [(&first, "2"), (&second, "5")] {
        let out = Command::new(env!("CARGO_BIN_EXE_wulff"))
            .arg("verify")
            .arg("--out")
            .arg(dir.path())
            .env("WULFF_THREADS", threads)
            .output()
            .expect("run verify");
        ok &= out.status.success();
    }
    let mut identical = true;
    for name in ["report.json", "profiles.csv", "overlay.svg"] {
        identical &= std::fs::read(first.path().join(name)).unwrap()
            == std::fs::read(second.path().join(name)).unwrap();
    }
    gate(
        12,
        "deterministic pipeline",
        ok && identical,
        &format!("exit ok = {ok}, artifacts identical = {identical}"),
    );
}
