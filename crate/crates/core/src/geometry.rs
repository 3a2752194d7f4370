//! Plane geometry primitives shared by the rearrangement and verification
//! modules: convex hulls, polygon measures, level-set extraction on
//! Cartesian grids, and Wulff-shape polygon generators.

use crate::anisotropy::AnisoNorm;

pub type Point = [f64; 2];

/// Signed area of a polygon (positive for counter-clockwise orientation).
pub fn polygon_signed_area(vertices: &[Point]) -> f64 {
    let k = vertices.len();
    let mut acc = 0.0;
    for i in 0..k {
        let a = vertices[i];
        let b = vertices[(i + 1) % k];
        acc += a[0] * b[1] - b[0] * a[1];
    }
    0.5 * acc
}

/// Absolute polygon area.
pub fn polygon_area(vertices: &[Point]) -> f64 {
    polygon_signed_area(vertices).abs()
}

/// Euclidean perimeter.
pub fn polygon_perimeter(vertices: &[Point]) -> f64 {
    let k = vertices.len();
    (0..k)
        .map(|i| {
            let a = vertices[i];
            let b = vertices[(i + 1) % k];
            ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
        })
        .sum()
}

/// Convex hull by monotone chain; returns counter-clockwise vertices
/// without the closing repeat. Collinear interior points are dropped.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a[0].partial_cmp(&b[0]).unwrap().then(a[1].partial_cmp(&b[1]).unwrap()));
    pts.dedup_by(|a, b| (a[0] - b[0]).abs() < 1e-15 && (a[1] - b[1]).abs() < 1e-15);
    let n = pts.len();
    if n < 3 {
        return pts;
    }
    let cross = |o: Point, a: Point, b: Point| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut hull: Vec<Point> = Vec::with_capacity(2 * n);
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev() {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// True if the closed polygon has a proper self-intersection between two
/// non-adjacent edges.
pub fn polygon_self_intersects(vertices: &[Point]) -> bool {
    let k = vertices.len();
    if k < 4 {
        return false;
    }
    for i in 0..k {
        let a1 = vertices[i];
        let a2 = vertices[(i + 1) % k];
        for j in i + 1..k {
            // Skip adjacent edges (shared vertex).
            if j == i || (j + 1) % k == i || (i + 1) % k == j {
                continue;
            }
            let b1 = vertices[j];
            let b2 = vertices[(j + 1) % k];
            if segments_properly_intersect(a1, a2, b1, b2) {
                return true;
            }
        }
    }
    false
}

fn segments_properly_intersect(a1: Point, a2: Point, b1: Point, b2: Point) -> bool {
    let orient = |p: Point, q: Point, r: Point| (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]);
    let d1 = orient(b1, b2, a1);
    let d2 = orient(b1, b2, a2);
    let d3 = orient(a1, a2, b1);
    let d4 = orient(a1, a2, b2);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// Boundary polygon of the Wulff region {H° <= r} sampled at k angles:
/// vertices r d(phi) / H°(d(phi)). Inscribed in the exact region, so its
/// area increases to kappa r^2 as k grows.
pub fn wulff_polygon(norm: &AnisoNorm, r: f64, k: usize) -> Vec<Point> {
    assert!(norm.dim() == 2 && r > 0.0 && k >= 3);
    (0..k)
        .map(|i| {
            let phi = std::f64::consts::TAU * i as f64 / k as f64;
            let d = [phi.cos(), phi.sin()];
            let hp = norm.polar(&d);
            [r * d[0] / hp, r * d[1] / hp]
        })
        .collect()
}

/// Random convex polygon: hull of `points` uniform samples in the square
/// [-scale, scale]^2. Always returns at least a triangle.
pub fn random_convex_polygon(rng: &mut impl rand::Rng, points: usize, scale: f64) -> Vec<Point> {
    assert!(points >= 3);
    loop {
        let pts: Vec<Point> = (0..points)
            .map(|_| [rng.random_range(-scale..scale), rng.random_range(-scale..scale)])
            .collect();
        let hull = convex_hull(&pts);
        if hull.len() >= 3 && polygon_area(&hull) > 1e-6 * scale * scale {
            return hull;
        }
    }
}

/// Level-set segments of a vertex-sampled field on a Cartesian grid by
/// marching squares. `values` holds (nx+1) x (ny+1) vertex samples in row
/// -major order (x fastest); cell (i, j) spans
/// [origin_x + i dx, origin_x + (i+1) dx] x [origin_y + j dy, ...].
/// Returns the segments of the contour {u = level}; saddle cells are split
/// by the cell-center average.
pub fn marching_squares(
    values: &[f64],
    nx: usize,
    ny: usize,
    origin: Point,
    dx: f64,
    dy: f64,
    level: f64,
) -> Vec<(Point, Point)> {
    assert_eq!(values.len(), (nx + 1) * (ny + 1));
    let at = |i: usize, j: usize| values[j * (nx + 1) + i];
    let mut segments = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            // Corner values: a = lower-left, b = lower-right,
            // c = upper-right, d = upper-left.
            let a = at(i, j);
            let b = at(i + 1, j);
            let c = at(i + 1, j + 1);
            let d = at(i, j + 1);
            let x0 = origin[0] + dx * i as f64;
            let y0 = origin[1] + dy * j as f64;
            // Interpolated crossing points on the four edges.
            let frac = |u: f64, v: f64| (level - u) / (v - u);
            let south = || [x0 + dx * frac(a, b), y0];
            let east = || [x0 + dx, y0 + dy * frac(b, c)];
            let north = || [x0 + dx * frac(d, c), y0 + dy];
            let west = || [x0, y0 + dy * frac(a, d)];
            let code = (usize::from(a > level))
                | (usize::from(b > level) << 1)
                | (usize::from(c > level) << 2)
                | (usize::from(d > level) << 3);
            match code {
                0 | 15 => {}
                // Single corner above: one cut across that corner.
                1 | 14 => segments.push((west(), south())),
                2 | 13 => segments.push((south(), east())),
                4 | 11 => segments.push((east(), north())),
                8 | 7 => segments.push((north(), west())),
                // Two adjacent corners above: a straight cut.
                3 | 12 => segments.push((west(), east())),
                6 | 9 => segments.push((south(), north())),
                // Saddles: disambiguate with the center average.
                5 | 10 => {
                    let center = 0.25 * (a + b + c + d);
                    let above = center > level;
                    if (code == 5) == above {
                        segments.push((west(), north()));
                        segments.push((south(), east()));
                    } else {
                        segments.push((west(), south()));
                        segments.push((east(), north()));
                    }
                }
                _ => unreachable!(),
            }
        }
    }
    segments
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shoelace_and_hull_on_unit_square() {
        let square = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        assert!((polygon_area(&square) - 1.0).abs() < 1e-15);
        assert!((polygon_perimeter(&square) - 4.0).abs() < 1e-15);
        let hull = convex_hull(&[[0.0, 0.0], [1.0, 0.0], [0.5, 0.5], [1.0, 1.0], [0.0, 1.0]]);
        assert_eq!(hull.len(), 4);
        assert!(polygon_signed_area(&hull) > 0.0, "hull must be counter-clockwise");
    }

    #[test]
    fn self_intersection_detects_bowtie() {
        let bowtie = vec![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(polygon_self_intersects(&bowtie));
        let square = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        assert!(!polygon_self_intersects(&square));
    }

    #[test]
    fn wulff_polygon_area_converges_to_kappa() {
        let norm = AnisoNorm::euclidean(2).unwrap();
        let poly = wulff_polygon(&norm, 1.0, 1024);
        let defect = std::f64::consts::PI - polygon_area(&poly);
        assert!(defect > 0.0 && defect < 1e-4, "defect={defect}");
    }

    #[test]
    fn marching_squares_circle_perimeter() {
        // u = 1 - |x|; the level set {u = 0.5} is the circle of radius 0.5.
        let n = 128;
        let h = 2.0 / n as f64;
        let mut vals = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                let x = -1.0 + h * i as f64;
                let y = -1.0 + h * j as f64;
                vals.push(1.0 - (x * x + y * y).sqrt());
            }
        }
        let segs = marching_squares(&vals, n, n, [-1.0, -1.0], h, h, 0.5);
        let length: f64 = segs
            .iter()
            .map(|(p, q)| ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt())
            .sum();
        let exact = std::f64::consts::PI; // 2 pi r with r = 1/2
        assert!((length - exact).abs() < 0.01, "length={length}");
    }

    #[test]
    fn random_hulls_are_convex_and_positive() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let poly = random_convex_polygon(&mut rng, 12, 1.0);
            assert!(poly.len() >= 3);
            assert!(!polygon_self_intersects(&poly));
            assert!(polygon_signed_area(&poly) > 0.0);
        }
    }
}
