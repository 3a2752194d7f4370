use serde_json::json;
use wulff_core::pde::{solve_epsilon_schedule, ProblemSpec, SolveConfig};
use wulff_core::rearrange::decreasing_rearrangement;

use crate::config::{self, SolveJobConfig};
use crate::{output, CliError, Ctx};

/// Run the mesh solver through its truncation schedule and write the
/// final solution, its decreasing profile and a stage-by-stage report.
pub fn run(ctx: &Ctx) -> Result<(), CliError> {
    let cfg: SolveJobConfig = match &ctx.config {
        Some(path) => config::load(path)?,
        None => SolveJobConfig::default(),
    };
    if cfg.epsilons.is_empty() {
        return Err(CliError::Config("epsilon schedule must not be empty".into()));
    }
    let norm = cfg.norm.build(2)?;
    let mesh = cfg.domain.build(&norm)?;
    let spec = ProblemSpec::new(norm, cfg.p, cfg.q, cfg.source.build(), cfg.epsilons[0]);
    let solve_cfg = SolveConfig { tol: cfg.tol, max_iter: cfg.max_iter, ..SolveConfig::default() };
    let reports = solve_epsilon_schedule(&mesh, &spec, &solve_cfg, &cfg.epsilons)?;
    let last = reports.last().expect("schedule is non-empty");

    output::ensure_dir(&ctx.out)?;
    let rows = mesh
        .vertices()
        .iter()
        .zip(&last.u)
        .map(|(v, u)| format!("{},{},{}", v[0], v[1], u));
    output::write_csv(&ctx.out, "solution.csv", "x,y,u", rows)?;

    let profile = decreasing_rearrangement(&mesh.cell_function(&last.u));
    let breaks = profile.breakpoints();
    let profile_rows = profile
        .step_values()
        .iter()
        .enumerate()
        .map(|(i, v)| format!("{},{},{}", breaks[i], breaks[i + 1], v));
    output::write_csv(&ctx.out, "profile.csv", "s_lo,s_hi,value", profile_rows)?;

    let stages: Vec<_> = cfg
        .epsilons
        .iter()
        .zip(&reports)
        .map(|(eps, r)| {
            json!({
                "epsilon": eps,
                "iterations": r.iterations,
                "residual": r.residual,
                "converged": r.converged,
                "energy_p": r.energy_p,
                "energy_q": r.energy_q,
            })
        })
        .collect();
    let all_converged = reports.iter().all(|r| r.converged);
    let doc = json!({
        "converged": all_converged,
        "mesh": {
            "vertices": mesh.n_vertices(),
            "triangles": mesh.n_triangles(),
            "h": mesh.mesh_size(),
            "area": mesh.area(),
        },
        "p": cfg.p,
        "q": cfg.q,
        "tol": cfg.tol,
        "stages": stages,
    });
    output::write_json(&ctx.out, "report.json", &doc)?;
    println!(
        "solve: {} stages on {} vertices, final residual {} -> {}",
        reports.len(),
        mesh.n_vertices(),
        last.residual,
        ctx.out.display()
    );
    if !all_converged {
        return Err(CliError::NoConvergence(last.residual));
    }
    Ok(())
}
