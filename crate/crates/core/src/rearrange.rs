//! Distribution functions, decreasing rearrangements, convex
//! symmetrization, Marcinkiewicz quasi-norms, and anisotropic perimeters
//! of discrete fields.
//!
//! A `GridFunction` is a scalar field on a finite family of cells with
//! positive measures; the mesh may be a Cartesian mask, a polar partition
//! of a Wulff region, or the triangle list of a finite-element mesh. The
//! decreasing rearrangement u*(s) of |u| is the right-continuous step
//! profile obtained by a stable descending sort of (value, measure) pairs;
//! ties keep mesh order, so results are reproducible bit for bit.
//!
//! Convex symmetrization replaces u by the radial field u*(kappa H°(x)^N)
//! living on the Wulff region of the same total measure; it preserves
//! every distribution-derived quantity and is the discrete counterpart of
//! the symmetrized comparison functions used elsewhere in this crate.

use thiserror::Error;

use crate::anisotropy::AnisoNorm;
use crate::geometry;

#[derive(Debug, Error, PartialEq)]
pub enum RearrangeError {
    #[error("field has no cells")]
    EmptyField,
    #[error("cell {0} has non-positive measure")]
    NonPositiveMeasure(usize),
    #[error("values and measures differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("operation needs cell centers but the field carries none")]
    MissingCenters,
    #[error("domain measures differ beyond tolerance: {ours} vs {theirs}")]
    MeasureMismatch { ours: f64, theirs: f64 },
    #[error("polygon is self-intersecting")]
    SelfIntersecting,
    #[error("{0}")]
    BadArgument(String),
    #[error(transparent)]
    Gauge(#[from] crate::anisotropy::AnisoError),
}

/// Scalar field over cells with positive measures; centers are optional
/// and only needed by geometric operations (symmetrization, sampling).
#[derive(Debug, Clone)]
pub struct GridFunction {
    values: Vec<f64>,
    measures: Vec<f64>,
    centers: Option<Vec<[f64; 2]>>,
    total: f64,
}

impl GridFunction {
    pub fn from_parts(values: Vec<f64>, measures: Vec<f64>) -> Result<Self, RearrangeError> {
        if values.is_empty() {
            return Err(RearrangeError::EmptyField);
        }
        if values.len() != measures.len() {
            return Err(RearrangeError::LengthMismatch(values.len(), measures.len()));
        }
        for (i, m) in measures.iter().enumerate() {
            if !(m > &0.0) {
                return Err(RearrangeError::NonPositiveMeasure(i));
            }
        }
        let total = measures.iter().sum();
        Ok(Self { values, measures, centers: None, total })
    }

    pub fn with_centers(
        values: Vec<f64>,
        measures: Vec<f64>,
        centers: Vec<[f64; 2]>,
    ) -> Result<Self, RearrangeError> {
        if centers.len() != values.len() {
            return Err(RearrangeError::LengthMismatch(values.len(), centers.len()));
        }
        let mut g = Self::from_parts(values, measures)?;
        g.centers = Some(centers);
        Ok(g)
    }

    /// Cartesian mask of the Wulff region {H° < r}: an n x n grid of
    /// rectangular cells covering the region's support box
    /// [-r H(e1), r H(e1)] x [-r H(e2), r H(e2)], keeping cells whose
    /// half-offset centers lie inside. Values start at zero.
    pub fn cartesian_wulff_mask(norm: &AnisoNorm, r: f64, n: usize) -> Result<Self, RearrangeError> {
        if norm.dim() != 2 || r <= 0.0 || n < 2 {
            return Err(RearrangeError::BadArgument(
                "mask needs a plane gauge, r > 0 and n >= 2".into(),
            ));
        }
        let wx = r * norm.h(&[1.0, 0.0]);
        let wy = r * norm.h(&[0.0, 1.0]);
        let hx = 2.0 * wx / n as f64;
        let hy = 2.0 * wy / n as f64;
        let mut centers = Vec::new();
        for j in 0..n {
            for i in 0..n {
                let x = -wx + hx * (i as f64 + 0.5);
                let y = -wy + hy * (j as f64 + 0.5);
                if norm.polar(&[x, y]) < r {
                    centers.push([x, y]);
                }
            }
        }
        if centers.is_empty() {
            return Err(RearrangeError::EmptyField);
        }
        let k = centers.len();
        Self::with_centers(vec![0.0; k], vec![hx * hy; k], centers)
    }

    /// Polar partition of the Wulff region {H° < r} into radial shells and
    /// angular sectors. Shell boundaries are spaced so every shell has the
    /// same measure (the natural mesh for radial data: cell measures are
    /// exact, no lattice artifacts). Values start at zero.
    pub fn wulff_polar_grid(
        norm: &AnisoNorm,
        r: f64,
        shells: usize,
        sectors: usize,
    ) -> Result<Self, RearrangeError> {
        if norm.dim() != 2 || r <= 0.0 || shells < 1 || sectors < 1 {
            return Err(RearrangeError::BadArgument(
                "polar grid needs a plane gauge, r > 0 and positive counts".into(),
            ));
        }
        let kappa = norm.wulff_kappa()?;
        // Angular measure fractions of the unit Wulff region per sector.
        let mut fractions = Vec::with_capacity(sectors);
        for j in 0..sectors {
            let a = std::f64::consts::TAU * j as f64 / sectors as f64;
            let b = std::f64::consts::TAU * (j + 1) as f64 / sectors as f64;
            let mut f = |phi: f64| {
                let d = [phi.cos(), phi.sin()];
                let rho = 1.0 / norm.polar(&d);
                0.5 * rho * rho
            };
            fractions.push(crate::quad::gl_composite(&mut f, a, b, 4, 8));
        }
        let fsum: f64 = fractions.iter().sum();
        for f in &mut fractions {
            *f /= fsum;
        }
        let mut values = Vec::with_capacity(shells * sectors);
        let mut measures = Vec::with_capacity(shells * sectors);
        let mut centers = Vec::with_capacity(shells * sectors);
        for i in 0..shells {
            let r_in = r * (i as f64 / shells as f64).sqrt();
            let r_out = r * ((i + 1) as f64 / shells as f64).sqrt();
            let r_mid = 0.5 * (r_in + r_out);
            let shell_measure = kappa * (r_out * r_out - r_in * r_in);
            for (j, frac) in fractions.iter().enumerate() {
                let phi = std::f64::consts::TAU * (j as f64 + 0.5) / sectors as f64;
                let d = [phi.cos(), phi.sin()];
                let hp = norm.polar(&d);
                centers.push([r_mid * d[0] / hp, r_mid * d[1] / hp]);
                measures.push(shell_measure * frac);
                values.push(0.0);
            }
        }
        Self::with_centers(values, measures, centers)
    }

    /// Polar partition as `wulff_polar_grid`, with values of a radial
    /// field f(H°(x)) taken from the exact shell mid-radius. All cells of
    /// a shell receive the bit-identical value, so the rearrangement sees
    /// one plateau per shell; evaluating f at cell centers instead would
    /// split the ties at rounding level and scatter spurious breakpoints
    /// through each plateau.
    pub fn wulff_polar_field(
        norm: &AnisoNorm,
        r: f64,
        shells: usize,
        sectors: usize,
        f: impl Fn(f64) -> f64,
    ) -> Result<Self, RearrangeError> {
        let mut g = Self::wulff_polar_grid(norm, r, shells, sectors)?;
        for i in 0..shells {
            let r_in = r * (i as f64 / shells as f64).sqrt();
            let r_out = r * ((i + 1) as f64 / shells as f64).sqrt();
            let value = f(0.5 * (r_in + r_out));
            for v in &mut g.values[i * sectors..(i + 1) * sectors] {
                *v = value;
            }
        }
        Ok(g)
    }

    /// Evaluate f at every cell center.
    pub fn fill(&mut self, f: impl Fn(&[f64; 2]) -> f64) -> Result<(), RearrangeError> {
        let centers = self.centers.as_ref().ok_or(RearrangeError::MissingCenters)?;
        for (v, c) in self.values.iter_mut().zip(centers) {
            *v = f(c);
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn measures(&self) -> &[f64] {
        &self.measures
    }

    pub fn centers(&self) -> Option<&[[f64; 2]]> {
        self.centers.as_deref()
    }

    pub fn total_measure(&self) -> f64 {
        self.total
    }

    /// L^p norm from cell values and measures, p >= 1.
    pub fn lp_norm(&self, p: f64) -> f64 {
        assert!(p >= 1.0);
        let s: f64 = self
            .values
            .iter()
            .zip(&self.measures)
            .map(|(v, m)| v.abs().powf(p) * m)
            .sum();
        s.powf(1.0 / p)
    }
}

/// Right-continuous decreasing step profile u*(s) on [0, |Omega|].
#[derive(Debug, Clone, PartialEq)]
pub struct RearrangementProfile {
    /// k+1 increasing breakpoints, breaks[0] = 0, breaks[k] = |Omega|.
    breaks: Vec<f64>,
    /// k step values, strictly decreasing.
    values: Vec<f64>,
}

impl RearrangementProfile {
    /// Build from (value, measure) steps already sorted non-increasing;
    /// equal adjacent values are merged.
    fn from_sorted(pairs: impl Iterator<Item = (f64, f64)>) -> Self {
        let mut breaks = vec![0.0];
        let mut values: Vec<f64> = Vec::new();
        let mut acc = 0.0;
        for (v, m) in pairs {
            acc += m;
            match values.last() {
                Some(&last) if last == v => {
                    *breaks.last_mut().unwrap() = acc;
                }
                _ => {
                    values.push(v);
                    breaks.push(acc);
                }
            }
        }
        Self { breaks, values }
    }

    /// Tabulate a decreasing function as a profile on the given increasing
    /// grid ending at the domain measure; the step on [s_i, s_{i+1}) takes
    /// the value at s_i.
    pub fn tabulate(f: impl Fn(f64) -> f64, grid: &[f64]) -> Self {
        assert!(grid.len() >= 2 && grid[0] >= 0.0);
        let mut breaks = Vec::with_capacity(grid.len() + 1);
        let mut values = Vec::with_capacity(grid.len());
        if grid[0] > 0.0 {
            breaks.push(0.0);
            values.push(f(0.5 * grid[0]));
        }
        for w in grid.windows(2) {
            breaks.push(w[0]);
            values.push(f(w[0]));
        }
        breaks.push(grid[grid.len() - 1]);
        Self { breaks, values }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    pub fn step_values(&self) -> &[f64] {
        &self.values
    }

    pub fn total_measure(&self) -> f64 {
        *self.breaks.last().unwrap()
    }

    /// Right-continuous evaluation; at s = |Omega| the final step value.
    pub fn eval(&self, s: f64) -> f64 {
        let total = self.total_measure();
        debug_assert!(s >= 0.0 && s <= total * (1.0 + 1e-12));
        if s >= total {
            return *self.values.last().unwrap();
        }
        // First break strictly greater than s; value index is that - 1.
        let idx = match self.breaks.binary_search_by(|b| b.partial_cmp(&s).unwrap()) {
            Ok(i) => i,       // s is exactly breaks[i]; step [b_i, b_{i+1}) applies
            Err(i) => i - 1,  // s in (breaks[i-1], breaks[i])
        };
        self.values[idx.min(self.values.len() - 1)]
    }

    /// Measure of {u* > t}; equals the distribution function of the
    /// source field.
    pub fn distribution(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for (i, v) in self.values.iter().enumerate() {
            if v.abs() > t {
                acc = self.breaks[i + 1];
            } else {
                break;
            }
        }
        acc
    }

    /// L^p integral norm of the step profile (exact).
    pub fn lp_norm(&self, p: f64) -> f64 {
        assert!(p >= 1.0);
        let s: f64 = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| v.abs().powf(p) * (self.breaks[i + 1] - self.breaks[i]))
            .sum();
        s.powf(1.0 / p)
    }

    /// sup over profile breakpoints of u*(s) s^(1/r), the Marcinkiewicz
    /// quasi-norm of the step profile.
    pub fn marcinkiewicz(&self, r: f64) -> f64 {
        assert!(r > 1.0);
        let inv_r = 1.0 / r;
        self.breaks
            .iter()
            .skip(1)
            .map(|&s| self.eval(s) * s.powf(inv_r))
            .fold(0.0, f64::max)
    }
}

/// Measure of {|u| > t}.
pub fn distribution_function(u: &GridFunction, t: f64) -> f64 {
    u.values
        .iter()
        .zip(&u.measures)
        .filter(|(v, _)| v.abs() > t)
        .map(|(_, m)| m)
        .sum()
}

/// Decreasing rearrangement of |u| as a step profile. Stable descending
/// sort: cells with equal |value| keep mesh order.
pub fn decreasing_rearrangement(u: &GridFunction) -> RearrangementProfile {
    let mut pairs: Vec<(f64, f64)> = u
        .values
        .iter()
        .zip(&u.measures)
        .map(|(v, m)| (v.abs(), *m))
        .collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    RearrangementProfile::from_sorted(pairs.into_iter())
}

/// sup_s u*(s) s^(1/r) over the profile breakpoints of u.
pub fn marcinkiewicz_norm(u: &GridFunction, r: f64) -> f64 {
    decreasing_rearrangement(u).marcinkiewicz(r)
}

/// Convex symmetrization: the radial decreasing field
/// u#(x) = u*(kappa H°(x)^2) sampled at the target cells. The target mesh
/// must cover a region of the same total measure (1% tolerance).
pub fn convex_symmetrization(
    u: &GridFunction,
    norm: &AnisoNorm,
    target: &GridFunction,
) -> Result<GridFunction, RearrangeError> {
    if norm.dim() != 2 {
        return Err(RearrangeError::BadArgument("plane gauges only".into()));
    }
    let centers = target.centers.as_ref().ok_or(RearrangeError::MissingCenters)?;
    let rel = (target.total - u.total).abs() / u.total;
    if rel > 0.01 {
        return Err(RearrangeError::MeasureMismatch { ours: u.total, theirs: target.total });
    }
    let kappa = norm.wulff_kappa()?;
    let profile = decreasing_rearrangement(u);
    let total = profile.total_measure();
    let values: Vec<f64> = centers
        .iter()
        .map(|c| {
            let hp = norm.polar(c);
            profile.eval((kappa * hp * hp).min(total))
        })
        .collect();
    Ok(GridFunction {
        values,
        measures: target.measures.clone(),
        centers: target.centers.clone(),
        total: target.total,
    })
}

/// Anisotropic perimeter of a simple polygon: sum over edges of
/// H(outward normal) times edge length. By the even homogeneity of H the
/// vertex orientation does not matter.
pub fn anisotropic_perimeter(polygon: &[[f64; 2]], norm: &AnisoNorm) -> Result<f64, RearrangeError> {
    if polygon.len() < 3 {
        return Err(RearrangeError::BadArgument("polygon needs at least 3 vertices".into()));
    }
    if norm.dim() != 2 {
        return Err(RearrangeError::BadArgument("plane gauges only".into()));
    }
    if geometry::polygon_self_intersects(polygon) {
        return Err(RearrangeError::SelfIntersecting);
    }
    let k = polygon.len();
    let mut acc = 0.0;
    for i in 0..k {
        let a = polygon[i];
        let b = polygon[(i + 1) % k];
        // H scales edge length into the normal evaluation.
        acc += norm.h(&[b[1] - a[1], a[0] - b[0]]);
    }
    Ok(acc)
}
