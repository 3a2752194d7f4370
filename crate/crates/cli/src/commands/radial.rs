use serde_json::json;
use wulff_core::quad;
use wulff_core::radial::{RadialBranch, RadialSolution};
use wulff_core::verify::{MeasureProfile, VStar};

use crate::config::{self, NormSpec, RadialConfig};
use crate::{output, CliError, Ctx};

/// Tabulate the exact radial fields: radial.csv carries Phi, v and the
/// exp-transform V over a log grid of radii, vstar.csv the same solution
/// read as a decreasing function of level-set measure.
pub fn run(ctx: &Ctx) -> Result<(), CliError> {
    let cfg: RadialConfig = match &ctx.config {
        Some(path) => config::load(path)?,
        None => RadialConfig::default(),
    };
    if cfg.points < 2 || !(cfg.floor > 0.0 && cfg.floor < 1.0) {
        return Err(CliError::Config(
            "radial tables need points >= 2 and floor in (0, 1)".into(),
        ));
    }
    let params = cfg.params.build()?;
    let norm_spec = cfg.norm.clone().unwrap_or(NormSpec::Euclidean);
    let norm = norm_spec.build(params.n)?;
    let kappa = norm.wulff_kappa()?;

    let sol = RadialSolution::new(params.clone())?;
    let radii = quad::log_grid(cfg.floor * params.radius, params.radius, cfg.points);
    let rows = radii.iter().map(|&r| {
        format!(
            "{},{},{},{}",
            r,
            sol.phi_eval(r),
            sol.v_eval(r),
            sol.transform_v(r)
        )
    });
    output::ensure_dir(&ctx.out)?;
    output::write_csv(&ctx.out, "radial.csv", "r,phi,v,V", rows)?;

    let vstar = VStar::new(sol.clone(), kappa)?;
    let total = vstar.total_measure();
    let nf = params.n as f64;
    let measures = quad::log_grid(kappa * (cfg.floor * params.radius).powf(nf), total, cfg.points);
    let vrows = measures.iter().map(|&s| format!("{},{}", s, vstar.value(s)));
    output::write_csv(&ctx.out, "vstar.csv", "s,v_star", vrows)?;

    let doc = json!({
        "beta": sol.beta(),
        "case": sol.case(),
        "theta": sol.theta(),
        "kappa": kappa,
        "total_measure": total,
        "n": params.n,
        "p": params.p,
        "q": params.q,
        "lambda": params.lambda,
        "radius": params.radius,
    });
    output::write_json(&ctx.out, "radial.json", &doc)?;
    println!(
        "radial: beta = {}, case = {:?}, {} rows -> {}",
        sol.beta(),
        sol.case(),
        cfg.points,
        ctx.out.display()
    );
    Ok(())
}
