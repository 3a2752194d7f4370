//! Small quadrature and scalar-optimization helpers shared by the other
//! modules.
//!
//! Everything here is deterministic. Gauss-Legendre nodes are produced by
//! Newton iteration on the Legendre recurrence instead of a baked-in table,
//! so any panel order up to 64 is available at full f64 accuracy.

/// Gauss-Legendre nodes and weights on [-1, 1].
///
/// Nodes are symmetric and sorted ascending; weights are positive and sum
/// to 2 (up to rounding).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1 && n <= 64, "panel order out of range");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-like initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_pair(n, x);
            let step = p / d;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_pair(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Value and derivative of the Legendre polynomial P_n at x.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Integrate f over [a, b] with a single Gauss-Legendre panel of order n.
pub fn gl_panel(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(&weights) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Integrate f over [a, b] with `panels` equal panels of order n.
pub fn gl_composite(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, panels: usize, n: usize) -> f64 {
    assert!(panels >= 1);
    let step = (b - a) / panels as f64;
    let mut acc = 0.0;
    for k in 0..panels {
        let lo = a + step * k as f64;
        acc += gl_panel(f, lo, lo + step, n);
    }
    acc
}

/// Integrate f over [a, b] (0 < a < b) with panels equspaced in log r.
///
/// Suited to integrands with power-law behaviour toward the left endpoint;
/// `per_decade` panels are used for each factor of ten in b/a.
pub fn gl_log_panels(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, per_decade: usize, n: usize) -> f64 {
    assert!(a > 0.0 && b > a);
    let decades = (b / a).log10();
    let panels = ((decades * per_decade as f64).ceil() as usize).max(1);
    let ratio = (b / a).powf(1.0 / panels as f64);
    let mut acc = 0.0;
    let mut lo = a;
    for _ in 0..panels {
        let hi = lo * ratio;
        acc += gl_panel(f, lo, hi.min(b), n);
        lo = hi;
    }
    acc
}

/// Integrate f over (0, b] where f behaves like C r^(e) with e > -1 near 0.
///
/// The interval [cut, b] is handled by log panels; the head (0, cut) is
/// completed with a local power-law fit through f(cut) and f(2 cut), which
/// is exact for pure powers. `cut` must satisfy 0 < 2 cut < b.
pub fn integrate_power_head(f: &mut dyn FnMut(f64) -> f64, b: f64, cut: f64, per_decade: usize, n: usize) -> f64 {
    assert!(cut > 0.0 && 2.0 * cut < b);
    let body = gl_log_panels(f, cut, b, per_decade, n);
    let f1 = f(cut);
    let f2 = f(2.0 * cut);
    if f1 <= 0.0 || f2 <= 0.0 {
        // No usable power fit; fall back to a one-sided rectangle.
        return body + f1.max(0.0) * cut;
    }
    let e = (f2 / f1).ln() / 2f64.ln();
    if e <= -1.0 + 1e-9 {
        // Integral is (numerically) divergent at 0; report the body plus a
        // large sentinel head so callers see the blow-up.
        return body + f1 * cut * 1e12;
    }
    body + f1 * cut / (e + 1.0)
}

/// Locate the maximizer of a unimodal f on [a, b] by golden-section search.
///
/// Returns (argmax, max). Width tolerance `tol` is absolute in x.
pub fn golden_max(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut lo = a;
    let mut hi = b;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    let xm = 0.5 * (lo + hi);
    (xm, f(xm))
}

/// Log-spaced grid of n points on [lo, hi], endpoints included.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let la = lo.ln();
    let lb = hi.ln();
    (0..n)
        .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_nodes_integrate_polynomials_exactly() {
        // Order n is exact through degree 2n-1; check the top even degree.
        for n in [2usize, 5, 8, 16] {
            let even = 2 * n - 2;
            let exact = 2.0 / (even as f64 + 1.0);
            let got = gl_panel(&mut |x: f64| x.powi(even as i32), -1.0, 1.0, n);
            assert!((got - exact).abs() < 1e-13, "n={n} got={got}");
            let odd = 2 * n - 1;
            let got_odd = gl_panel(&mut |x: f64| x.powi(odd as i32), -1.0, 1.0, n);
            assert!(got_odd.abs() < 1e-13, "n={n} odd");
        }
    }

    #[test]
    fn gl_weights_sum_to_two() {
        for n in [1usize, 3, 7, 20, 64] {
            let (_, w) = gauss_legendre(n);
            let s: f64 = w.iter().sum();
            assert!((s - 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn log_panels_handle_inverse_power() {
        // int_a^1 dr/r = -ln a, integrand smooth in log variable.
        let a = 1e-8;
        let got = gl_log_panels(&mut |r| 1.0 / r, a, 1.0, 4, 16);
        assert!((got + a.ln()).abs() < 1e-12);
    }

    #[test]
    fn power_head_completes_singular_integrand() {
        // int_0^1 r^(-0.9) dr = 10, integrand singular but integrable.
        let got = integrate_power_head(&mut |r| r.powf(-0.9), 1.0, 1e-6, 6, 16);
        assert!((got - 10.0).abs() < 1e-9, "got={got}");
    }

    #[test]
    fn golden_finds_quadratic_peak() {
        let (x, v) = golden_max(&mut |x| 3.0 - (x - 0.7) * (x - 0.7), 0.0, 2.0, 1e-10);
        // Argmax of a flat quadratic peak resolves only to sqrt(eps);
        // the maximum value itself is what downstream callers consume.
        assert!((x - 0.7).abs() < 1e-6);
        assert!((v - 3.0).abs() < 1e-14);
    }

    #[test]
    fn log_grid_endpoints_and_monotone() {
        let g = log_grid(1e-4, 2.0, 33);
        assert_eq!(g.len(), 33);
        assert!((g[0] - 1e-4).abs() < 1e-18);
        assert!((g[32] - 2.0).abs() < 1e-12);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }
}
