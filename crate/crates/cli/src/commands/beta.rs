use serde_json::json;
use wulff_core::radial::{solve_beta, RadialSolution};

use crate::config::{self, BetaConfig};
use crate::{output, CliError, Ctx};

/// Solve the exponent equation, print the derived constants to stdout
/// and mirror them into beta.json.
pub fn run(ctx: &Ctx) -> Result<(), CliError> {
    let cfg: BetaConfig = match &ctx.config {
        Some(path) => config::load(path)?,
        None => BetaConfig::default(),
    };
    let params = cfg.params.build()?;
    let beta = solve_beta(&params)?;
    let sol = RadialSolution::new(params.clone())?;
    let doc = json!({
        "beta": beta,
        "case": sol.case(),
        "theta": sol.theta(),
        "gamma": params.gamma(),
        "sigma": params.sigma(),
        "c_gamma": params.c_gamma(),
        "lambda_gamma": params.lambda_gamma(),
        "lambda_max": params.lambda_max(),
        "s_tilde": params.s_tilde(),
        "delta_tilde": params.delta_tilde(),
        "n": params.n,
        "p": params.p,
        "q": params.q,
        "lambda": params.lambda,
        "radius": params.radius,
    });
    println!("{}", serde_json::to_string_pretty(&doc)?);
    output::ensure_dir(&ctx.out)?;
    output::write_json(&ctx.out, "beta.json", &doc)?;
    Ok(())
}
