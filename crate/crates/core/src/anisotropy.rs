//! Anisotropic norms (convex gauges) and their polar functions.
//!
//! A gauge H here is convex, positively 1-homogeneous with H(t xi) =
//! |t| H(xi), positive away from the origin, and sandwiched between
//! Euclidean norms: c1 |xi| <= H(xi) <= c2 |xi|. Its polar is
//!
//!   H°(x) = sup_{xi != 0} (x . xi) / H(xi).
//!
//! The sublevel set {H° < r} (the Wulff region of H at scale r) plays the
//! role the ball plays for the Euclidean norm; `wulff_kappa` returns its
//! unit measure kappa_N.
//!
//! Four families are provided. Euclidean, the l^r norms (r > 1), and
//! ellipse norms sqrt(xi . Q xi) are smooth away from the origin and admit
//! analytic gradients and polars. Sampled gauges (support functions of a
//! centrally symmetric convex polygon) are admitted for perimeter and
//! symmetrization work only and are flagged `smooth = false`; their polar
//! is evaluated variationally by a direction sweep with golden-section
//! refinement.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quad;

#[derive(Debug, Error, PartialEq)]
pub enum AnisoError {
    #[error("dimension must be at least 2, got {0}")]
    BadDimension(usize),
    #[error("{0}")]
    BadParameter(String),
    #[error("matrix is not symmetric positive definite")]
    NotPositiveDefinite,
    #[error("sampled gauge needs at least 4 symmetric vertices spanning the plane")]
    DegenerateGauge,
    #[error("operation requires a smooth gauge")]
    NonSmoothNorm,
    #[error("gradient undefined at the origin without regularization")]
    OriginGradient,
    #[error("unsupported dimension {0} for this gauge family")]
    UnsupportedDimension(usize),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
enum Family {
    Euclidean,
    RNorm {
        r: f64,
        dual: f64,
    },
    Ellipse {
        q: [[f64; 2]; 2],
        q_inv: [[f64; 2]; 2],
        det: f64,
    },
    /// Support function of the symmetric convex polygon with these
    /// vertices (counter-clockwise). `edge_normals` and `edge_support`
    /// describe the same polygon as an intersection of half-planes
    /// x . n_e <= h_e, which is the closed form of the polar gauge.
    Sampled {
        vertices: Vec<[f64; 2]>,
        edge_normals: Vec<[f64; 2]>,
        edge_support: Vec<f64>,
    },
}

/// A convex gauge together with its dimension and sandwich constants.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnisoNorm {
    family: Family,
    n: usize,
    smooth: bool,
    c1: f64,
    c2: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

impl AnisoNorm {
    pub fn euclidean(n: usize) -> Result<Self, AnisoError> {
        if n < 2 {
            return Err(AnisoError::BadDimension(n));
        }
        Ok(Self { family: Family::Euclidean, n, smooth: true, c1: 1.0, c2: 1.0 })
    }

    /// The l^r norm, 1 < r < infinity. Its polar is the l^r' norm with
    /// 1/r + 1/r' = 1.
    pub fn r_norm(n: usize, r: f64) -> Result<Self, AnisoError> {
        if n < 2 {
            return Err(AnisoError::BadDimension(n));
        }
        if !(r > 1.0) || !r.is_finite() {
            return Err(AnisoError::BadParameter(format!(
                "l^r exponent must satisfy 1 < r < inf, got {r}"
            )));
        }
        let dual = r / (r - 1.0);
        // Extremes of H on the Euclidean sphere sit at an axis and at the
        // all-ones direction.
        let diag = (n as f64).powf(1.0 / r - 0.5);
        let (c1, c2) = if r >= 2.0 { (diag.min(1.0), 1.0) } else { (1.0, diag.max(1.0)) };
        Ok(Self { family: Family::RNorm { r, dual }, n, smooth: true, c1, c2 })
    }

    /// Ellipse gauge H(xi) = sqrt(xi . Q xi) with Q symmetric positive
    /// definite, plane only.
    pub fn ellipse_matrix(q: [[f64; 2]; 2]) -> Result<Self, AnisoError> {
        if (q[0][1] - q[1][0]).abs() > 1e-12 * (q[0][1].abs() + q[1][0].abs()).max(1.0) {
            return Err(AnisoError::NotPositiveDefinite);
        }
        let det = q[0][0] * q[1][1] - q[0][1] * q[1][0];
        if q[0][0] <= 0.0 || det <= 0.0 {
            return Err(AnisoError::NotPositiveDefinite);
        }
        let q_inv = [
            [q[1][1] / det, -q[0][1] / det],
            [-q[1][0] / det, q[0][0] / det],
        ];
        // Eigenvalues of Q give the sandwich constants.
        let tr = q[0][0] + q[1][1];
        let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
        let (lo, hi) = (0.5 * tr - disc, 0.5 * tr + disc);
        Ok(Self {
            family: Family::Ellipse { q, q_inv, det },
            n: 2,
            smooth: true,
            c1: lo.sqrt(),
            c2: hi.sqrt(),
        })
    }

    /// Axis-aligned ellipse gauge with H(e1) = a, H(e2) = b. Its unit
    /// Wulff region is the ellipse with semi-axes a and b.
    pub fn ellipse(a: f64, b: f64) -> Result<Self, AnisoError> {
        if !(a > 0.0 && b > 0.0) {
            return Err(AnisoError::BadParameter(format!(
                "ellipse semi-axes must be positive, got {a}, {b}"
            )));
        }
        Self::ellipse_matrix([[a * a, 0.0], [0.0, b * b]])
    }

    /// Gauge given as the support function of the symmetric convex hull of
    /// `points` and their negatives: H(xi) = max_k w_k . xi. Plane only,
    /// flagged non-smooth.
    pub fn sampled(points: &[[f64; 2]]) -> Result<Self, AnisoError> {
        let mut pts: Vec<[f64; 2]> = Vec::with_capacity(2 * points.len());
        for p in points {
            pts.push(*p);
            pts.push([-p[0], -p[1]]);
        }
        let hull = crate::geometry::convex_hull(&pts);
        if hull.len() < 4 {
            return Err(AnisoError::DegenerateGauge);
        }
        let k = hull.len();
        let mut edge_normals = Vec::with_capacity(k);
        let mut edge_support = Vec::with_capacity(k);
        for i in 0..k {
            let a = hull[i];
            let b = hull[(i + 1) % k];
            let e = [b[0] - a[0], b[1] - a[1]];
            let len = norm2(&e);
            if len < 1e-14 {
                continue;
            }
            // Hull is counter-clockwise, so (dy, -dx) points outward.
            let nrm = [e[1] / len, -e[0] / len];
            let h = nrm[0] * a[0] + nrm[1] * a[1];
            if h <= 1e-12 {
                // Origin not interior; the symmetric hull degenerated.
                return Err(AnisoError::DegenerateGauge);
            }
            edge_normals.push(nrm);
            edge_support.push(h);
        }
        // Exact linearity constants of a polygonal support function: the
        // minimum over unit directions sits at an edge normal (value: the
        // edge support), the maximum at a vertex direction (value: the
        // vertex length).
        let c1 = edge_support.iter().copied().fold(f64::INFINITY, f64::min);
        let c2 = hull.iter().map(|w| norm2(w)).fold(0.0f64, f64::max);
        Ok(Self {
            family: Family::Sampled { vertices: hull, edge_normals, edge_support },
            n: 2,
            smooth: false,
            c1,
            c2,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn is_smooth(&self) -> bool {
        self.smooth
    }

    /// Lower sandwich constant: c1 |xi| <= H(xi).
    pub fn c1(&self) -> f64 {
        self.c1
    }

    /// Upper sandwich constant: H(xi) <= c2 |xi|.
    pub fn c2(&self) -> f64 {
        self.c2
    }

    /// Gauge value H(xi).
    pub fn h(&self, xi: &[f64]) -> f64 {
        debug_assert_eq!(xi.len(), self.n);
        match &self.family {
            Family::Euclidean => norm2(xi),
            Family::RNorm { r, .. } => lp_norm(xi, *r),
            Family::Ellipse { q, .. } => {
                let qx = mat_vec(q, [xi[0], xi[1]]);
                (xi[0] * qx[0] + xi[1] * qx[1]).max(0.0).sqrt()
            }
            Family::Sampled { vertices, .. } => vertices
                .iter()
                .map(|w| w[0] * xi[0] + w[1] * xi[1])
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Regularized gauge H_eps = sqrt(H^2 + (eps c1)^2); H_0 = H.
    pub fn h_reg(&self, xi: &[f64], eps_reg: f64) -> f64 {
        let h = self.h(xi);
        if eps_reg == 0.0 {
            h
        } else {
            let e = eps_reg * self.c1;
            (h * h + e * e).sqrt()
        }
    }

    /// Gradient of H away from the origin, or of the regularized gauge
    /// H_eps when `eps_reg > 0` (then defined everywhere, vanishing at 0).
    pub fn h_grad(&self, xi: &[f64], eps_reg: f64) -> Result<Vec<f64>, AnisoError> {
        debug_assert_eq!(xi.len(), self.n);
        let h = self.h(xi);
        if eps_reg == 0.0 && h == 0.0 {
            return Err(AnisoError::OriginGradient);
        }
        let raw = self.h_grad_raw(xi, h);
        if eps_reg == 0.0 {
            return Ok(raw);
        }
        let he = self.h_reg(xi, eps_reg);
        Ok(raw.into_iter().map(|g| g * h / he).collect())
    }

    /// dH at xi assuming xi != 0; for sampled gauges this is the active
    /// vertex, valid almost everywhere.
    fn h_grad_raw(&self, xi: &[f64], h: f64) -> Vec<f64> {
        match &self.family {
            Family::Euclidean => {
                if h == 0.0 {
                    vec![0.0; self.n]
                } else {
                    xi.iter().map(|x| x / h).collect()
                }
            }
            Family::RNorm { r, .. } => {
                if h == 0.0 {
                    return vec![0.0; self.n];
                }
                xi.iter()
                    .map(|x| (x.abs() / h).powf(r - 1.0) * x.signum())
                    .collect()
            }
            Family::Ellipse { q, .. } => {
                if h == 0.0 {
                    return vec![0.0; 2];
                }
                let qx = mat_vec(q, [xi[0], xi[1]]);
                vec![qx[0] / h, qx[1] / h]
            }
            Family::Sampled { vertices, .. } => {
                let mut best = 0usize;
                let mut val = f64::NEG_INFINITY;
                for (k, w) in vertices.iter().enumerate() {
                    let s = w[0] * xi[0] + w[1] * xi[1];
                    if s > val {
                        val = s;
                        best = k;
                    }
                }
                vec![vertices[best][0], vertices[best][1]]
            }
        }
    }

    /// Hessian of H^2/2 for plane gauges with a closed form (Euclidean and
    /// ellipse, where it is constant). Satisfies Hess(xi) xi = H dH exactly.
    pub fn half_sq_hessian(&self) -> Option<[[f64; 2]; 2]> {
        if self.n != 2 {
            return None;
        }
        match &self.family {
            Family::Euclidean => Some([[1.0, 0.0], [0.0, 1.0]]),
            Family::Ellipse { q, .. } => Some(*q),
            _ => None,
        }
    }

    /// Polar gauge H°(x) = sup_{xi != 0} (x . xi)/H(xi).
    pub fn polar(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.n);
        match &self.family {
            Family::Euclidean => norm2(x),
            Family::RNorm { dual, .. } => lp_norm(x, *dual),
            Family::Ellipse { q_inv, .. } => {
                let qx = mat_vec(q_inv, [x[0], x[1]]);
                (x[0] * qx[0] + x[1] * qx[1]).max(0.0).sqrt()
            }
            Family::Sampled { edge_normals, edge_support, .. } => {
                // Gauge of the polygon: max over faces of x.n/h.
                edge_normals
                    .iter()
                    .zip(edge_support)
                    .map(|(nrm, h)| (nrm[0] * x[0] + nrm[1] * x[1]) / h)
                    .fold(0.0f64, f64::max)
            }
        }
    }

    /// Variational evaluation of the polar by a direction sweep with
    /// golden-section refinement; works for every plane gauge and is the
    /// reference the closed forms are tested against.
    pub fn polar_variational(&self, x: &[f64; 2], tol: f64) -> f64 {
        let scale = norm2(x);
        if scale == 0.0 {
            return 0.0;
        }
        let mut g = |phi: f64| {
            let d = [phi.cos(), phi.sin()];
            (x[0] * d[0] + x[1] * d[1]) / self.h(&d)
        };
        let coarse = 1024;
        let mut best_phi = 0.0;
        let mut best = f64::NEG_INFINITY;
        for i in 0..coarse {
            let phi = std::f64::consts::TAU * i as f64 / coarse as f64;
            let v = g(phi);
            if v > best {
                best = v;
                best_phi = phi;
            }
        }
        let half = std::f64::consts::TAU / coarse as f64;
        let (_, v) = quad::golden_max(&mut g, best_phi - half, best_phi + half, tol / scale.max(1.0));
        v.max(best)
    }

    /// Gradient of the polar gauge for smooth families, away from 0.
    pub fn polar_grad(&self, x: &[f64]) -> Result<Vec<f64>, AnisoError> {
        debug_assert_eq!(x.len(), self.n);
        let hp = self.polar(x);
        if hp == 0.0 {
            return Err(AnisoError::OriginGradient);
        }
        match &self.family {
            Family::Euclidean => Ok(x.iter().map(|v| v / hp).collect()),
            Family::RNorm { dual, .. } => Ok(x
                .iter()
                .map(|v| (v.abs() / hp).powf(dual - 1.0) * v.signum())
                .collect()),
            Family::Ellipse { q_inv, .. } => {
                let qx = mat_vec(q_inv, [x[0], x[1]]);
                Ok(vec![qx[0] / hp, qx[1] / hp])
            }
            Family::Sampled { .. } => Err(AnisoError::NonSmoothNorm),
        }
    }

    /// Measure of the unit Wulff region {H° < 1}.
    ///
    /// Closed forms: Euclidean unit-ball volume in any dimension, the
    /// l^r' unit ball for l^r gauges, pi sqrt(det Q) for ellipses, and the
    /// defining polygon area for sampled gauges.
    pub fn wulff_kappa(&self) -> Result<f64, AnisoError> {
        match &self.family {
            Family::Euclidean => Ok(unit_ball_volume(self.n)),
            Family::RNorm { dual, .. } => {
                use statrs::function::gamma::ln_gamma;
                let n = self.n as f64;
                let ln = n * (2f64.ln() + ln_gamma(1.0 + 1.0 / dual)) - ln_gamma(1.0 + n / dual);
                Ok(ln.exp())
            }
            Family::Ellipse { det, .. } => Ok(std::f64::consts::PI * det.sqrt()),
            Family::Sampled { vertices, .. } => {
                if self.n != 2 {
                    return Err(AnisoError::UnsupportedDimension(self.n));
                }
                Ok(crate::geometry::polygon_area(vertices))
            }
        }
    }

    /// Plane Wulff measure by polar-coordinate quadrature,
    /// kappa = 1/2 int rho(phi)^2 dphi with rho = 1/H°(direction).
    /// Cross-check path for `wulff_kappa`; plane gauges only.
    pub fn wulff_kappa_quadrature(&self) -> Result<f64, AnisoError> {
        if self.n != 2 {
            return Err(AnisoError::UnsupportedDimension(self.n));
        }
        let mut f = |phi: f64| {
            let d = [phi.cos(), phi.sin()];
            let rho = 1.0 / self.polar(&d);
            0.5 * rho * rho
        };
        let mut prev = quad::gl_composite(&mut f, 0.0, std::f64::consts::TAU, 64, 16);
        for panels in [128usize, 256, 512] {
            let next = quad::gl_composite(&mut f, 0.0, std::f64::consts::TAU, panels, 16);
            if (next - prev).abs() <= 1e-10 * next.abs() {
                return Ok(next);
            }
            prev = next;
        }
        Ok(prev)
    }

    /// Maximum deviation of the duality identities over `samples` seeded
    /// sample vectors. Derivative identities run on smooth gauges only;
    /// the variational lower bound H°(x) >= x.xi/H(xi) runs everywhere.
    pub fn check_identities(&self, samples: usize, seed: u64) -> IdentityReport {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut report = IdentityReport::default();
        for _ in 0..samples {
            let xi: Vec<f64> = (0..self.n).map(|_| rng.random_range(-1.0..1.0)).collect();
            if norm2(&xi) < 1e-3 {
                continue;
            }
            let h = self.h(&xi);
            let hp = self.polar(&xi);
            // Sandwich bounds for both gauges.
            let e = norm2(&xi);
            report.track_sandwich(
                h >= self.c1 * e * (1.0 - 1e-10)
                    && h <= self.c2 * e * (1.0 + 1e-10)
                    && hp >= e / self.c2 * (1.0 - 1e-10)
                    && hp <= e / self.c1 * (1.0 + 1e-10),
            );
            // Variational lower bound for the polar.
            let probe: Vec<f64> = (0..self.n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let hprobe = self.h(&probe);
            if hprobe > 1e-9 {
                let lower = dot(&xi, &probe) / hprobe;
                report.polar_lower = report.polar_lower.max(lower - hp);
            }
            if !self.smooth {
                continue;
            }
            let dh = self.h_grad(&xi, 0.0).expect("xi away from 0");
            let dhp = self.polar_grad(&xi).expect("xi away from 0");
            // Euler: dH(xi) . xi = H(xi), and the same for the polar.
            report.euler = report
                .euler
                .max((dot(&dh, &xi) - h).abs() / h.max(1e-300))
                .max((dot(&dhp, &xi) - hp).abs() / hp.max(1e-300));
            // Unit duality: H°(dH) = 1 and H(dH°) = 1.
            report.unit = report
                .unit
                .max((self.polar(&dh) - 1.0).abs())
                .max((self.h(&dhp) - 1.0).abs());
            // Inversion: H°(xi) dH(dH°(xi)) = xi.
            let dh_at = self.h_grad(&dhp, 0.0).expect("dual gradient is away from 0");
            let mut inv_dev = 0.0f64;
            for i in 0..self.n {
                inv_dev = inv_dev.max((hp * dh_at[i] - xi[i]).abs());
            }
            report.inversion = report.inversion.max(inv_dev / e);
        }
        report
    }
}

/// Deviations collected by `check_identities`; all should sit at rounding
/// level for smooth gauges.
#[derive(Debug, Default, Clone, Serialize)]
pub struct IdentityReport {
    pub euler: f64,
    pub unit: f64,
    pub inversion: f64,
    /// max over samples of (x.xi/H(xi) - H°(x)); positive values break
    /// the variational definition.
    pub polar_lower: f64,
    pub sandwich_ok: bool,
    #[serde(skip)]
    sandwich_seen: bool,
}

impl IdentityReport {
    fn track_sandwich(&mut self, ok: bool) {
        if !self.sandwich_seen {
            self.sandwich_ok = ok;
            self.sandwich_seen = true;
        } else {
            self.sandwich_ok &= ok;
        }
    }

    pub fn pass(&self, tol: f64) -> bool {
        self.euler <= tol
            && self.unit <= tol
            && self.inversion <= tol
            && self.polar_lower <= tol
            && self.sandwich_ok
    }
}

fn lp_norm(v: &[f64], p: f64) -> f64 {
    // Scale out the max to avoid overflow for large p.
    let m = v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if m == 0.0 {
        return 0.0;
    }
    let s: f64 = v.iter().map(|x| (x.abs() / m).powf(p)).sum();
    m * s.powf(1.0 / p)
}

fn mat_vec(m: &[[f64; 2]; 2], v: [f64; 2]) -> [f64; 2] {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

/// Volume of the Euclidean unit ball via the dimension recursion
/// v_n = 2 pi v_{n-2} / n, v_0 = 1, v_1 = 2.
fn unit_ball_volume(n: usize) -> f64 {
    let mut v = if n % 2 == 0 { 1.0 } else { 2.0 };
    let mut k = if n % 2 == 0 { 2 } else { 3 };
    while k <= n {
        v *= std::f64::consts::TAU / k as f64;
        k += 2;
    }
    v
}
