//! Conforming triangle meshes for the planar Dirichlet solves: structured
//! rectangles, ring-bridged Wulff discs, and masked grids (with holes).
//! All constructors are pure functions of their arguments, so meshes are
//! reproducible bit for bit.

use std::collections::HashMap;

use crate::anisotropy::AnisoNorm;
use crate::pde::PdeError;
use crate::rearrange::GridFunction;

#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<[f64; 2]>,
    /// Counter-clockwise vertex index triples.
    triangles: Vec<[usize; 3]>,
    boundary: Vec<bool>,
    /// Representative mesh size (longest edge).
    h: f64,
}

impl Mesh {
    fn finish(vertices: Vec<[f64; 2]>, triangles: Vec<[usize; 3]>) -> Result<Self, PdeError> {
        if vertices.len() < 3 || triangles.is_empty() {
            return Err(PdeError::DegenerateDomain("empty triangulation".into()));
        }
        // Boundary = endpoints of edges incident to exactly one triangle.
        let mut edge_count: HashMap<(usize, usize), u32> = HashMap::new();
        for t in &triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                *edge_count.entry(key).or_insert(0) += 1;
            }
        }
        let mut boundary = vec![false; vertices.len()];
        for (&(a, b), &c) in &edge_count {
            if c == 1 {
                boundary[a] = true;
                boundary[b] = true;
            } else if c > 2 {
                return Err(PdeError::DegenerateDomain("non-manifold edge".into()));
            }
        }
        let mut h = 0.0f64;
        for t in &triangles {
            let area = tri_area(&vertices, t);
            if area <= 0.0 {
                return Err(PdeError::DegenerateDomain(format!(
                    "non-positive triangle area {area}"
                )));
            }
            for k in 0..3 {
                let a = vertices[t[k]];
                let b = vertices[t[(k + 1) % 3]];
                h = h.max(((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt());
            }
        }
        Ok(Self { vertices, triangles, boundary, h })
    }

    /// Structured rectangle [a0,b0] x [a1,b1] with nx x ny cells, each
    /// split along the diagonal into two triangles.
    pub fn rectangle(a: [f64; 2], b: [f64; 2], nx: usize, ny: usize) -> Result<Self, PdeError> {
        if !(b[0] > a[0] && b[1] > a[1]) || nx < 1 || ny < 1 {
            return Err(PdeError::DegenerateDomain("rectangle needs b > a and cells".into()));
        }
        let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                vertices.push([
                    a[0] + (b[0] - a[0]) * i as f64 / nx as f64,
                    a[1] + (b[1] - a[1]) * j as f64 / ny as f64,
                ]);
            }
        }
        let idx = |i: usize, j: usize| j * (nx + 1) + i;
        let mut triangles = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                triangles.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
                triangles.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
            }
        }
        Self::finish(vertices, triangles)
    }

    /// Wulff region {H° < r} triangulated by concentric scaled copies of
    /// the boundary: ring i of n carries 6i vertices, consecutive rings
    /// are bridged by an angular two-pointer sweep. The polygonal
    /// boundary sits within O(h^2) of the true curve.
    pub fn wulff_disc(norm: &AnisoNorm, r: f64, n_rings: usize) -> Result<Self, PdeError> {
        if norm.dim() != 2 {
            return Err(PdeError::DegenerateDomain("wulff disc needs a plane gauge".into()));
        }
        if !(r > 0.0) || n_rings < 1 {
            return Err(PdeError::DegenerateDomain("need r > 0 and at least one ring".into()));
        }
        let mut vertices = vec![[0.0, 0.0]];
        let mut ring_start = vec![0usize; n_rings + 1];
        for i in 1..=n_rings {
            ring_start[i] = vertices.len();
            let k = 6 * i;
            let rho = r * i as f64 / n_rings as f64;
            for j in 0..k {
                let phi = std::f64::consts::TAU * j as f64 / k as f64;
                let d = [phi.cos(), phi.sin()];
                let hp = norm.polar(&d);
                vertices.push([rho * d[0] / hp, rho * d[1] / hp]);
            }
        }
        let mut triangles = Vec::new();
        // Center fan to ring 1.
        for j in 0..6usize {
            triangles.push([0, ring_start[1] + j, ring_start[1] + (j + 1) % 6]);
        }
        // Bridge ring i (6i points) to ring i+1 (6i+6 points).
        for i in 1..n_rings {
            let (ki, ko) = (6 * i, 6 * (i + 1));
            let (si, so) = (ring_start[i], ring_start[i + 1]);
            let inner = |j: usize| si + j % ki;
            let outer = |l: usize| so + l % ko;
            let (mut j, mut l) = (0usize, 0usize);
            while j < ki || l < ko {
                let fj = (j + 1) as f64 / ki as f64;
                let fl = (l + 1) as f64 / ko as f64;
                if l >= ko || (j < ki && fj <= fl) {
                    triangles.push([inner(j), outer(l), inner(j + 1)]);
                    j += 1;
                } else {
                    triangles.push([inner(j), outer(l), outer(l + 1)]);
                    l += 1;
                }
            }
        }
        Self::finish(vertices, triangles)
    }

    /// Masked structured grid: keep the cells of an nx x ny grid over
    /// [a, b] whose centers satisfy the predicate; unreferenced vertices
    /// are dropped. Boundary flags (outer and around holes alike) come
    /// from edge topology.
    pub fn from_mask(
        a: [f64; 2],
        b: [f64; 2],
        nx: usize,
        ny: usize,
        keep: impl Fn(f64, f64) -> bool,
    ) -> Result<Self, PdeError> {
        if !(b[0] > a[0] && b[1] > a[1]) || nx < 1 || ny < 1 {
            return Err(PdeError::DegenerateDomain("mask needs b > a and cells".into()));
        }
        let dx = (b[0] - a[0]) / nx as f64;
        let dy = (b[1] - a[1]) / ny as f64;
        let idx = |i: usize, j: usize| j * (nx + 1) + i;
        let mut used = vec![usize::MAX; (nx + 1) * (ny + 1)];
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                let cx = a[0] + dx * (i as f64 + 0.5);
                let cy = a[1] + dy * (j as f64 + 0.5);
                if !keep(cx, cy) {
                    continue;
                }
                let corners = [idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)];
                let mut local = [0usize; 4];
                for (s, &g) in corners.iter().enumerate() {
                    if used[g] == usize::MAX {
                        used[g] = vertices.len();
                        vertices.push([
                            a[0] + dx * ((g % (nx + 1)) as f64),
                            a[1] + dy * ((g / (nx + 1)) as f64),
                        ]);
                    }
                    local[s] = used[g];
                }
                triangles.push([local[0], local[1], local[2]]);
                triangles.push([local[0], local[2], local[3]]);
            }
        }
        Self::finish(vertices, triangles)
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary[v]
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn mesh_size(&self) -> f64 {
        self.h
    }

    pub fn tri_area(&self, t: usize) -> f64 {
        tri_area(&self.vertices, &self.triangles[t])
    }

    pub fn tri_centroid(&self, t: usize) -> [f64; 2] {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        [(pa[0] + pb[0] + pc[0]) / 3.0, (pa[1] + pb[1] + pc[1]) / 3.0]
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.tri_area(t)).sum()
    }

    /// Constant gradient of a vertex field on triangle t.
    pub fn tri_gradient(&self, t: usize, u: &[f64]) -> [f64; 2] {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        let det = (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]);
        let (ua, ub, uc) = (u[a], u[b], u[c]);
        [
            ((ub - ua) * (pc[1] - pa[1]) - (uc - ua) * (pb[1] - pa[1])) / det,
            ((uc - ua) * (pb[0] - pa[0]) - (ub - ua) * (pc[0] - pa[0])) / det,
        ]
    }

    /// Gradients of the three hat functions on triangle t.
    pub fn hat_gradients(&self, t: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        let det = (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]);
        [
            [(pb[1] - pc[1]) / det, (pc[0] - pb[0]) / det],
            [(pc[1] - pa[1]) / det, (pa[0] - pc[0]) / det],
            [(pa[1] - pb[1]) / det, (pb[0] - pa[0]) / det],
        ]
    }

    /// Cell field of a vertex field: one cell per triangle with the
    /// vertex mean (the centroid value of the linear interpolant), the
    /// triangle area as measure, the centroid as center.
    pub fn cell_function(&self, u: &[f64]) -> GridFunction {
        assert_eq!(u.len(), self.n_vertices());
        let k = self.n_triangles();
        let mut values = Vec::with_capacity(k);
        let mut measures = Vec::with_capacity(k);
        let mut centers = Vec::with_capacity(k);
        for t in 0..k {
            let [a, b, c] = self.triangles[t];
            values.push((u[a] + u[b] + u[c]) / 3.0);
            measures.push(self.tri_area(t));
            centers.push(self.tri_centroid(t));
        }
        GridFunction::with_centers(values, measures, centers)
            .expect("triangle areas are positive")
    }
}

fn tri_area(vertices: &[[f64; 2]], t: &[usize; 3]) -> f64 {
    let (a, b, c) = (vertices[t[0]], vertices[t[1]], vertices[t[2]]);
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}
