//! Exact radial solutions of the model Dirichlet problem on a Wulff
//! region, the scalar equation for their decay exponent, and the
//! Sobolev-membership checks that select the physical branch.
//!
//! The stationary profiles solve, in the radial variable r = H°(x),
//!
//!   -|V'|^(gamma-2) ((gamma-1) V'' + (N-1)/r V') = (lambda/c_gamma) (1+V)^(gamma-1) / r^gamma
//!
//! with gamma = q/(q-(p-1)), c_gamma = (gamma-1)^(gamma-1). Power
//! profiles V = (R/r)^beta - 1 solve it exactly when beta satisfies
//!
//!   F(beta) = (N-gamma) beta^(gamma-1) - (gamma-1) beta^gamma = lambda / c_gamma,
//!
//! which has two roots for 0 < lambda < c_gamma Lambda_gamma,
//! Lambda_gamma = ((N-gamma)/gamma)^gamma; only the root in
//! [0, (N-gamma)/gamma) gives a profile of finite gamma-energy. The
//! companion first-order field v (with exp-transform V = e^(v-like) - 1)
//! admits closed forms in both the q < p and q = p cases.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quad;

#[derive(Debug, Error, PartialEq)]
pub enum RadialError {
    #[error("dimension must be at least 2, got {0}")]
    BadDimension(usize),
    #[error("exponents out of range: {0}")]
    InadmissibleExponents(String),
    #[error("lambda must be non-negative, got {0}")]
    NegativeLambda(f64),
    #[error("lambda = {lambda} reaches the solvability threshold {max}")]
    LambdaTooLarge { lambda: f64, max: f64 },
    #[error("radius must be positive, got {0}")]
    BadRadius(f64),
    #[error("second solution exists only for q < p")]
    NeedsStrictGradientGap,
}

/// Data of the radial model problem on the Wulff region of radius R.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ProblemParams {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub lambda: f64,
    pub radius: f64,
}

impl ProblemParams {
    /// Validates the structural hypotheses: N >= 2, p > 1,
    /// p-1 < q <= p, q > N(p-1)/(N-1) (equivalently gamma < N), a
    /// non-negative lambda and a positive radius. The solvability bound
    /// lambda < c_gamma Lambda_gamma is deliberately not enforced here:
    /// over-threshold data must stay representable so the checks can
    /// reject it.
    pub fn new(n: usize, p: f64, q: f64, lambda: f64, radius: f64) -> Result<Self, RadialError> {
        if n < 2 {
            return Err(RadialError::BadDimension(n));
        }
        if !(p > 1.0) || !p.is_finite() {
            return Err(RadialError::InadmissibleExponents(format!("p = {p}, need p > 1")));
        }
        if !(q > p - 1.0) || !(q <= p) {
            return Err(RadialError::InadmissibleExponents(format!(
                "q = {q}, need p-1 < q <= p with p = {p}"
            )));
        }
        let q_low = n as f64 * (p - 1.0) / (n as f64 - 1.0);
        if !(q > q_low) {
            return Err(RadialError::InadmissibleExponents(format!(
                "q = {q} <= N(p-1)/(N-1) = {q_low}: gamma would reach the dimension"
            )));
        }
        if !(lambda >= 0.0) {
            return Err(RadialError::NegativeLambda(lambda));
        }
        if !(radius > 0.0) {
            return Err(RadialError::BadRadius(radius));
        }
        Ok(Self { n, p, q, lambda, radius })
    }

    /// sigma = q - (p-1), the gap between gradient growth and degeneracy.
    pub fn sigma(&self) -> f64 {
        self.q - (self.p - 1.0)
    }

    /// gamma = q / (q - (p-1)); in (1, N) for admissible data.
    pub fn gamma(&self) -> f64 {
        self.q / self.sigma()
    }

    /// c_gamma = (gamma-1)^(gamma-1).
    pub fn c_gamma(&self) -> f64 {
        let g = self.gamma();
        (g - 1.0).powf(g - 1.0)
    }

    /// Lambda_gamma = ((N-gamma)/gamma)^gamma, the Hardy-type constant.
    pub fn lambda_gamma(&self) -> f64 {
        let g = self.gamma();
        ((self.n as f64 - g) / g).powf(g)
    }

    /// Solvability threshold c_gamma Lambda_gamma for lambda.
    pub fn lambda_max(&self) -> f64 {
        self.c_gamma() * self.lambda_gamma()
    }

    /// s~ = N (q - (p-1)), the summability ceiling exponent.
    pub fn s_tilde(&self) -> f64 {
        self.n as f64 * self.sigma()
    }

    /// delta~ = s~ / (s~ - (p-1)) = N / (N - gamma + 1), the membership
    /// threshold for (1+V)^(gamma-1).
    pub fn delta_tilde(&self) -> f64 {
        let st = self.s_tilde();
        st / (st - (self.p - 1.0))
    }
}

/// F(beta) = (N-gamma) beta^(gamma-1) - (gamma-1) beta^gamma; increasing
/// from 0 to Lambda_gamma on [0, (N-gamma)/gamma].
pub fn beta_equation(params: &ProblemParams, beta: f64) -> f64 {
    let g = params.gamma();
    let nf = params.n as f64;
    (nf - g) * beta.powf(g - 1.0) - (g - 1.0) * beta.powf(g)
}

/// Decay exponent: the unique root of F(beta) = lambda/c_gamma in
/// [0, (N-gamma)/gamma). Bisection; F is strictly increasing there.
pub fn solve_beta(params: &ProblemParams) -> Result<f64, RadialError> {
    if params.lambda == 0.0 {
        return Ok(0.0);
    }
    let target = params.lambda / params.c_gamma();
    if target >= params.lambda_gamma() {
        return Err(RadialError::LambdaTooLarge {
            lambda: params.lambda,
            max: params.lambda_max(),
        });
    }
    let g = params.gamma();
    let mut lo = 0.0_f64;
    let mut hi = (params.n as f64 - g) / g;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if beta_equation(params, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Which closed form the first-order field v takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialCase {
    /// lambda = 0: v and V vanish identically.
    Zero,
    /// q < p: v is a power, v = theta (r^-alpha - R^-alpha).
    Power,
    /// q = p: v is logarithmic, v = (p-1) beta log(R/r).
    Log,
}

/// Anything exposing the first-order radial field v of a solution branch;
/// the exp-transform and membership checks run off these two evaluators.
pub trait RadialBranch {
    fn params(&self) -> &ProblemParams;
    /// v(r) for 0 < r <= R.
    fn v_eval(&self, r: f64) -> f64;
    /// v'(r) <= 0 for 0 < r <= R.
    fn v_prime(&self, r: f64) -> f64;

    /// V(r) = exp( (1/(gamma-1)) int_r^R (-v')^sigma ) - 1 by numeric
    /// quadrature of the closed-form derivative.
    fn transform_v(&self, r: f64) -> f64 {
        let p = self.params();
        let (g, s, big_r) = (p.gamma(), p.sigma(), p.radius);
        if r >= big_r {
            return 0.0;
        }
        let mut f = |t: f64| (-self.v_prime(t)).powf(s);
        let integral = quad::gl_log_panels(&mut f, r, big_r, 8, 16);
        (integral / (g - 1.0)).exp() - 1.0
    }

    /// (1+V)^(gamma-1) = exp( int_r^R (-v')^sigma ).
    fn one_plus_v_pow(&self, r: f64) -> f64 {
        let p = self.params();
        if r >= p.radius {
            return 1.0;
        }
        let mut f = |t: f64| (-self.v_prime(t)).powf(p.sigma());
        quad::gl_log_panels(&mut f, r, p.radius, 8, 16).exp()
    }
}

/// The physical radial solution: beta on the finite-energy branch,
/// closed-form v, and the exp-transformed profile V = Phi.
#[derive(Debug, Clone)]
pub struct RadialSolution {
    params: ProblemParams,
    beta: f64,
    case: RadialCase,
    /// Power case amplitude theta = ((gamma-1) beta)^(1/sigma) sigma/(p-q).
    theta: f64,
    /// Power case decay alpha = (p-q)/sigma.
    alpha: f64,
}

impl RadialSolution {
    pub fn new(params: ProblemParams) -> Result<Self, RadialError> {
        let beta = solve_beta(&params)?;
        let sigma = params.sigma();
        let (case, theta, alpha) = if params.lambda == 0.0 {
            (RadialCase::Zero, 0.0, 0.0)
        } else if params.q < params.p {
            let alpha = (params.p - params.q) / sigma;
            let theta =
                ((params.gamma() - 1.0) * beta).powf(1.0 / sigma) * sigma / (params.p - params.q);
            (RadialCase::Power, theta, alpha)
        } else {
            (RadialCase::Log, 0.0, 0.0)
        };
        Ok(Self { params, beta, case, theta, alpha })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn case(&self) -> RadialCase {
        self.case
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Phi(r) = (R/r)^beta - 1, the transformed profile in closed form.
    pub fn phi_eval(&self, r: f64) -> f64 {
        (self.params.radius / r).powf(self.beta) - 1.0
    }

    /// L^s norm of v over the Wulff region of gauge volume kappa:
    /// ||v||_s^s = N kappa int_0^R v^s r^(N-1) dr. Exact closed forms:
    /// the power case reduces to a Beta function by t = (r/R)^alpha, the
    /// log case to a Gamma function. Finite iff s < s~/(p-q) (power case).
    pub fn v_lp_norm(&self, s: f64, kappa: f64) -> Option<f64> {
        assert!(s >= 1.0 && kappa > 0.0);
        let nf = self.params.n as f64;
        let big_r = self.params.radius;
        match self.case {
            RadialCase::Zero => Some(0.0),
            RadialCase::Power => {
                let a = nf / self.alpha - s;
                if a <= 0.0 {
                    return None; // v^s is not integrable
                }
                let ln_b = statrs::function::gamma::ln_gamma(a)
                    + statrs::function::gamma::ln_gamma(s + 1.0)
                    - statrs::function::gamma::ln_gamma(a + s + 1.0);
                let val = self.theta.powf(s)
                    * nf
                    * kappa
                    * big_r.powf(nf - self.alpha * s)
                    * (ln_b.exp() / self.alpha);
                Some(val.powf(1.0 / s))
            }
            RadialCase::Log => {
                let amp = (self.params.p - 1.0) * self.beta;
                let ln_g = statrs::function::gamma::ln_gamma(s + 1.0);
                let val = kappa * big_r.powf(nf) * amp.powf(s) * (ln_g - s * nf.ln()).exp();
                Some(val.powf(1.0 / s))
            }
        }
    }
}

impl RadialBranch for RadialSolution {
    fn params(&self) -> &ProblemParams {
        &self.params
    }

    fn v_eval(&self, r: f64) -> f64 {
        match self.case {
            RadialCase::Zero => 0.0,
            RadialCase::Power => {
                self.theta * (r.powf(-self.alpha) - self.params.radius.powf(-self.alpha))
            }
            RadialCase::Log => (self.params.p - 1.0) * self.beta * (self.params.radius / r).ln(),
        }
    }

    fn v_prime(&self, r: f64) -> f64 {
        match self.case {
            RadialCase::Zero => 0.0,
            RadialCase::Power => {
                // -v' = ((gamma-1) beta)^(1/sigma) r^(-1/sigma)
                let sigma = self.params.sigma();
                -((self.params.gamma() - 1.0) * self.beta).powf(1.0 / sigma)
                    * r.powf(-1.0 / sigma)
            }
            RadialCase::Log => -(self.params.p - 1.0) * self.beta / r,
        }
    }
}

/// The spurious radial solution of the lambda = 0 problem (q < p): a
/// power profile with amplitude K fixed by the exponents alone. Its
/// transform is the outer root beta_2 = (N-gamma)/(gamma-1) of F = 0,
/// which sits outside the finite-energy branch.
#[derive(Debug, Clone)]
pub struct SecondSolution {
    params: ProblemParams,
    k_const: f64,
    alpha: f64,
}

impl SecondSolution {
    pub fn new(params: ProblemParams) -> Result<Self, RadialError> {
        if !(params.q < params.p) {
            return Err(RadialError::NeedsStrictGradientGap);
        }
        let sigma = params.sigma();
        let nf = params.n as f64;
        let s2 = ((nf - 1.0) * params.q - (params.p - 1.0) * nf) / sigma;
        debug_assert!(s2 > 0.0);
        let alpha = (params.p - params.q) / sigma;
        let k_const = (sigma / (params.p - params.q)) * s2.powf(1.0 / sigma);
        Ok(Self { params, k_const, alpha })
    }

    pub fn k_const(&self) -> f64 {
        self.k_const
    }

    /// Exponent of the transformed profile: 1+V = (R/r)^beta2.
    pub fn beta_outer(&self) -> f64 {
        let g = self.params.gamma();
        (self.params.n as f64 - g) / (g - 1.0)
    }
}

impl RadialBranch for SecondSolution {
    fn params(&self) -> &ProblemParams {
        &self.params
    }

    fn v_eval(&self, r: f64) -> f64 {
        self.k_const * (r.powf(-self.alpha) - self.params.radius.powf(-self.alpha))
    }

    fn v_prime(&self, r: f64) -> f64 {
        -self.k_const * self.alpha * r.powf(-self.alpha - 1.0)
    }
}

/// Strong-form residual of the 1-D profile equation at r for the power
/// profile V = (R/r)^beta - 1 with an arbitrary exponent (analytic
/// derivatives). Vanishes exactly at both roots of F(beta) = lambda/c.
pub fn power_profile_residual(params: &ProblemParams, beta: f64, r: f64) -> f64 {
    let g = params.gamma();
    let nf = params.n as f64;
    let big_r = params.radius;
    let vp = -beta * big_r.powf(beta) * r.powf(-beta - 1.0);
    let vpp = beta * (beta + 1.0) * big_r.powf(beta) * r.powf(-beta - 2.0);
    let one_plus_v = (big_r / r).powf(beta);
    let lhs = -vp.abs().powf(g - 2.0) * ((g - 1.0) * vpp + (nf - 1.0) / r * vp);
    let rhs = params.lambda / params.c_gamma() * one_plus_v.powf(g - 1.0) / r.powf(g);
    lhs - rhs
}

/// Same residual with second-order central differences of step h in
/// place of analytic derivatives.
pub fn power_profile_residual_fd(params: &ProblemParams, beta: f64, r: f64, h: f64) -> f64 {
    let g = params.gamma();
    let nf = params.n as f64;
    let phi = |x: f64| (params.radius / x).powf(beta) - 1.0;
    let vp = (phi(r + h) - phi(r - h)) / (2.0 * h);
    let vpp = (phi(r + h) - 2.0 * phi(r) + phi(r - h)) / (h * h);
    let lhs = -vp.abs().powf(g - 2.0) * ((g - 1.0) * vpp + (nf - 1.0) / r * vp);
    let rhs = params.lambda / params.c_gamma() * (1.0 + phi(r)).powf(g - 1.0) / r.powf(g);
    lhs - rhs
}

/// Maximum absolute residual over a grid.
pub fn max_residual_on_grid(params: &ProblemParams, beta: f64, grid: &[f64]) -> f64 {
    grid.iter()
        .map(|&r| power_profile_residual(params, beta, r).abs())
        .fold(0.0, f64::max)
}

/// Asymptotic-exponent estimate of a radial Sobolev integral: fits the
/// slope of log psi(r) = log[w(r) r^(N-1)] against log r near the origin;
/// the integral int_0 psi dr is bounded iff the slope exceeds -1.
#[derive(Debug, Clone, Serialize)]
pub struct MembershipEstimate {
    /// Fitted local exponent of the integrand near r = 0.
    pub integrand_exponent: f64,
    /// True when the exponent is above -1 by a safe margin.
    pub bounded: bool,
}

fn integrand_exponent(w: impl Fn(f64) -> f64, n: usize, big_r: f64) -> MembershipEstimate {
    // Least-squares slope over two decades well inside the domain.
    let rs = quad::log_grid(1e-6 * big_r, 1e-4 * big_r, 9);
    let pts: Vec<(f64, f64)> = rs
        .iter()
        .map(|&r| (r.ln(), (w(r).max(f64::MIN_POSITIVE) * r.powi(n as i32 - 1)).ln()))
        .collect();
    let k = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    MembershipEstimate { integrand_exponent: slope, bounded: slope > -1.0 + 1e-4 }
}

/// Membership of the power profile (R/r)^beta - 1 in the gamma-energy
/// space: integrand |Phi'|^gamma r^(N-1); selects the inner root.
pub fn phi_energy_membership(params: &ProblemParams, beta: f64) -> MembershipEstimate {
    let g = params.gamma();
    let big_r = params.radius;
    if beta == 0.0 {
        return MembershipEstimate { integrand_exponent: 0.0, bounded: true };
    }
    let w = move |r: f64| (beta * big_r.powf(beta) * r.powf(-beta - 1.0)).powf(g);
    integrand_exponent(w, params.n, big_r)
}

#[derive(Debug, Clone, Serialize)]
pub struct MembershipEntry {
    pub delta: f64,
    pub integrand_exponent: f64,
    pub bounded: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MembershipReport {
    pub delta_threshold: f64,
    pub entries: Vec<MembershipEntry>,
    /// True when some exponent strictly above the threshold is bounded.
    pub pass: bool,
}

/// Estimates, for delta on a grid around the threshold delta~, whether
/// (1+V)^(gamma-1) has a bounded delta-gradient integral near the
/// origin; the physical branch admits some delta > delta~, the spurious
/// one is exactly marginal and admits none.
pub fn branch_membership_check(branch: &(impl RadialBranch + ?Sized)) -> MembershipReport {
    let params = *branch.params();
    let dt = params.delta_tilde();
    let sigma = params.sigma();
    let big_r = params.radius;
    let entries: Vec<MembershipEntry> = [0.85, 0.95, 1.0, 1.05, 1.15, 1.3]
        .iter()
        .map(|&fac| {
            let delta = fac * dt;
            // |D (1+V)^(gamma-1)| = (1+V)^(gamma-1) (-v')^sigma.
            let w = |r: f64| {
                (branch.one_plus_v_pow(r) * (-branch.v_prime(r)).powf(sigma)).powf(delta)
            };
            let est = integrand_exponent(w, params.n, big_r);
            MembershipEntry {
                delta,
                integrand_exponent: est.integrand_exponent,
                bounded: est.bounded,
            }
        })
        .collect();
    let pass = entries.iter().any(|e| e.delta > dt * (1.0 + 1e-12) && e.bounded);
    MembershipReport { delta_threshold: dt, entries, pass }
}
