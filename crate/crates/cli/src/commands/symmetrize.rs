use serde_json::json;
use wulff_core::rearrange::{convex_symmetrization, decreasing_rearrangement, GridFunction};

use crate::config::{self, GridSpec, SymmetrizeConfig};
use crate::{output, CliError, Ctx};

/// Sample a field on a cell partition of the Wulff region, rearrange it
/// and write the field, its decreasing profile and its convex
/// symmetrization.
pub fn run(ctx: &Ctx) -> Result<(), CliError> {
    let cfg: SymmetrizeConfig = match &ctx.config {
        Some(path) => config::load(path)?,
        None => SymmetrizeConfig::default(),
    };
    if !(cfg.radius > 0.0) {
        return Err(CliError::Config("radius must be positive".into()));
    }
    let norm = cfg.norm.build(2)?;
    let mut u = match cfg.grid {
        GridSpec::Cartesian { cells } => {
            GridFunction::cartesian_wulff_mask(&norm, cfg.radius, cells)?
        }
        GridSpec::Polar { shells, sectors } => {
            GridFunction::wulff_polar_grid(&norm, cfg.radius, shells, sectors)?
        }
    };
    u.fill(|x| cfg.field.eval(&norm, cfg.radius, x))?;

    output::ensure_dir(&ctx.out)?;
    let centers = u.centers().expect("both partitions carry centers");
    let field_rows = centers
        .iter()
        .zip(u.measures())
        .zip(u.values())
        .map(|((c, m), v)| format!("{},{},{},{}", c[0], c[1], m, v));
    output::write_csv(&ctx.out, "field.csv", "x,y,measure,value", field_rows)?;

    let profile = decreasing_rearrangement(&u);
    let breaks = profile.breakpoints();
    let steps = profile.step_values();
    let profile_rows = steps
        .iter()
        .enumerate()
        .map(|(i, v)| format!("{},{},{}", breaks[i], breaks[i + 1], v));
    output::write_csv(&ctx.out, "profile.csv", "s_lo,s_hi,value", profile_rows)?;

    let sym = convex_symmetrization(&u, &norm, &u)?;
    let sym_rows = centers
        .iter()
        .zip(sym.values())
        .map(|(c, v)| format!("{},{},{}", c[0], c[1], v));
    output::write_csv(&ctx.out, "symmetrized.csv", "x,y,value", sym_rows)?;

    let sup = u.values().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let doc = json!({
        "cells": u.len(),
        "plateaus": steps.len(),
        "total_measure": u.total_measure(),
        "l1": u.lp_norm(1.0),
        "l2": u.lp_norm(2.0),
        "sup": sup,
        "l1_symmetrized": sym.lp_norm(1.0),
        "l2_symmetrized": sym.lp_norm(2.0),
    });
    output::write_json(&ctx.out, "summary.json", &doc)?;
    println!(
        "symmetrize: {} cells, {} plateaus, measure {} -> {}",
        u.len(),
        steps.len(),
        u.total_measure(),
        ctx.out.display()
    );
    Ok(())
}
