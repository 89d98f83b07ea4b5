//! Oriented simplicial complexes with metric data: the discrete Cauchy surface.
//!
//! A complex stores, per degree `k`, the sorted vertex tuples of its oriented
//! k-simplices, the signed boundary incidence, and primal/dual volumes. The
//! diagonal Hodge star `M_k = dual/primal` makes every calculus operator in
//! the crate exactly computable.
//!
//! Orientation convention: simplices are ordered by ascending vertex index and
//! incidence signs come from permutation parity, so generators are
//! deterministic and `boundary . boundary = 0` holds in integer arithmetic.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};
use crate::io;
use crate::linalg::Fnv1a;

/// Content fingerprint of a complex; cochains carry it so cross-complex
/// arithmetic is rejected.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub struct ComplexId(pub u64);

impl fmt::Display for ComplexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

/// Signed incidence of k-simplices on (k-1)-simplices, stored by column
/// (one column per k-simplex) so that `d = transpose(boundary)` applies
/// sparsely.
#[derive(Clone, Debug)]
pub struct Boundary {
    rows: usize,
    cols: usize,
    entries: Vec<Vec<(usize, i8)>>,
}

impl Boundary {
    fn empty(rows: usize, cols: usize) -> Self {
        Boundary {
            rows,
            cols,
            entries: vec![Vec::new(); cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> &[(usize, i8)] {
        &self.entries[j]
    }

    /// Max |entry| of the integer product `self . next`; zero iff dd = 0.
    pub fn compose_max_abs(&self, next: &Boundary) -> i64 {
        let mut worst = 0i64;
        let mut acc: BTreeMap<usize, i64> = BTreeMap::new();
        for col in 0..next.cols {
            acc.clear();
            for &(mid, s1) in &next.entries[col] {
                for &(row, s2) in &self.entries[mid] {
                    *acc.entry(row).or_insert(0) += i64::from(s1) * i64::from(s2);
                }
            }
            for v in acc.values() {
                worst = worst.max(v.abs());
            }
        }
        worst
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.rows, self.cols);
        for j in 0..self.cols {
            for &(i, s) in &self.entries[j] {
                m[(i, j)] = f64::from(s);
            }
        }
        m
    }
}

/// The discrete Cauchy surface (Sigma, h): oriented simplices by degree with
/// boundary incidence and circumcentric metric data. Immutable after
/// construction; safe to share across threads.
#[derive(Clone, Debug)]
pub struct SimplicialComplex {
    dim: usize,
    vertices: Vec<[f64; 3]>,
    simplices: Vec<Vec<Vec<usize>>>,
    boundary: Vec<Boundary>,
    primal_volume: Vec<Vec<f64>>,
    dual_volume: Vec<Vec<f64>>,
    mass: Vec<DVector<f64>>,
    meta: String,
    id: ComplexId,
}

impl SimplicialComplex {
    /// Triangulated flat 2-torus on an `nx` x `ny` lattice with side lengths
    /// `lx`, `ly`. Rows are sheared by half a cell so every triangle is acute
    /// and the circumcentric dual is strictly positive; this needs
    /// `ly/ny > lx/(2 nx)`.
    pub fn torus_lattice(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        if nx < 3 {
            return Err(Error::TooSmall { what: "nx", min: 3, got: nx });
        }
        if ny < 3 {
            return Err(Error::TooSmall { what: "ny", min: 3, got: ny });
        }
        if lx <= 0.0 {
            return Err(Error::NonPositive { what: "lx", got: lx });
        }
        if ly <= 0.0 {
            return Err(Error::NonPositive { what: "ly", got: ly });
        }
        let hx = lx / nx as f64;
        let hy = ly / ny as f64;
        if hy <= 0.5 * hx {
            return Err(Error::NotWellCentered {
                what: "torus aspect ratio (need ly/ny > lx/(2 nx))",
            });
        }
        let sx = 0.5 * hx;
        let vid = |i: usize, j: usize| (j % ny) * nx + (i % nx);
        let pos = |i: usize, j: usize| -> [f64; 3] {
            // unwrapped chart coordinates of lattice point (i, j)
            [i as f64 * hx + j as f64 * sx, j as f64 * hy, 0.0]
        };

        let vertices: Vec<[f64; 3]> = (0..ny)
            .flat_map(|j| (0..nx).map(move |i| pos(i, j)))
            .collect();

        let mut faces = Vec::with_capacity(2 * nx * ny);
        let mut coords = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let (a, b, c, d) = (vid(i, j), vid(i + 1, j), vid(i, j + 1), vid(i + 1, j + 1));
                let (pa, pb, pc, pd) = (pos(i, j), pos(i + 1, j), pos(i, j + 1), pos(i + 1, j + 1));
                faces.push([a, b, c]);
                coords.push([pa, pb, pc]);
                faces.push([b, d, c]);
                coords.push([pb, pd, pc]);
            }
        }
        let meta = format!("torus_lattice(nx={nx}, ny={ny}, lx={lx}, ly={ly})");
        Self::from_surface(vertices, faces, coords, meta)
    }

    /// Subdivided icosahedron projected to the sphere of the given radius.
    pub fn icosphere(subdivisions: u32, radius: f64) -> Result<Self> {
        const MAX_SUBDIV: u32 = 5;
        if subdivisions > MAX_SUBDIV {
            return Err(Error::SubdivisionCap {
                max: MAX_SUBDIV,
                got: subdivisions,
            });
        }
        if radius <= 0.0 {
            return Err(Error::NonPositive { what: "radius", got: radius });
        }
        let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
        let raw: [[f64; 3]; 12] = [
            [-1.0, phi, 0.0], [1.0, phi, 0.0], [-1.0, -phi, 0.0], [1.0, -phi, 0.0],
            [0.0, -1.0, phi], [0.0, 1.0, phi], [0.0, -1.0, -phi], [0.0, 1.0, -phi],
            [phi, 0.0, -1.0], [phi, 0.0, 1.0], [-phi, 0.0, -1.0], [-phi, 0.0, 1.0],
        ];
        let project = |p: [f64; 3]| -> [f64; 3] {
            let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            [p[0] / n * radius, p[1] / n * radius, p[2] / n * radius]
        };
        let mut verts: Vec<[f64; 3]> = raw.iter().map(|&p| project(p)).collect();
        let mut faces: Vec<[usize; 3]> = vec![
            [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
            [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
            [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
            [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
        ];
        for _ in 0..subdivisions {
            let mut midpoint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
            let mut next_faces = Vec::with_capacity(faces.len() * 4);
            for f in &faces {
                let mut mid = [0usize; 3];
                for e in 0..3 {
                    let (u, v) = (f[e], f[(e + 1) % 3]);
                    let key = (u.min(v), u.max(v));
                    mid[e] = *midpoint.entry(key).or_insert_with(|| {
                        let p = [
                            0.5 * (verts[u][0] + verts[v][0]),
                            0.5 * (verts[u][1] + verts[v][1]),
                            0.5 * (verts[u][2] + verts[v][2]),
                        ];
                        verts.push(project(p));
                        verts.len() - 1
                    });
                }
                next_faces.push([f[0], mid[0], mid[2]]);
                next_faces.push([f[1], mid[1], mid[0]]);
                next_faces.push([f[2], mid[2], mid[1]]);
                next_faces.push([mid[0], mid[1], mid[2]]);
            }
            faces = next_faces;
        }
        let coords: Vec<[[f64; 3]; 3]> = faces
            .iter()
            .map(|f| [verts[f[0]], verts[f[1]], verts[f[2]]])
            .collect();
        let meta = format!("icosphere(subdivisions={subdivisions}, radius={radius})");
        Self::from_surface(verts, faces, coords, meta)
    }

    /// Uniform n-vertex cycle of total length `length`.
    pub fn circle(n: usize, length: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::TooSmall { what: "n", min: 3, got: n });
        }
        if length <= 0.0 {
            return Err(Error::NonPositive { what: "length", got: length });
        }
        let h = length / n as f64;
        let r = length / std::f64::consts::TAU;
        let vertices: Vec<[f64; 3]> = (0..n)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / n as f64;
                [r * t.cos(), r * t.sin(), 0.0]
            })
            .collect();
        let mut edges: Vec<Vec<usize>> = (0..n)
            .map(|i| {
                let mut e = vec![i, (i + 1) % n];
                e.sort_unstable();
                e
            })
            .collect();
        edges.sort();
        edges.dedup();
        let simplices = vec![(0..n).map(|i| vec![i]).collect::<Vec<_>>(), edges];
        let primal_volume = vec![vec![1.0; n], vec![h; n]];
        let dual_volume = vec![vec![h; n], vec![1.0; n]];
        let meta = format!("circle(n={n}, length={length})");
        Self::assemble(1, vertices, simplices, primal_volume, dual_volume, meta)
    }

    /// Assemble a 2-complex from triangles plus per-face corner coordinates.
    ///
    /// Coordinates are given per face (a local chart) so periodic
    /// identifications keep their intrinsic flat geometry; circumcentric dual
    /// lengths and areas are chart-invariant.
    fn from_surface(
        vertices: Vec<[f64; 3]>,
        faces: Vec<[usize; 3]>,
        face_coords: Vec<[[f64; 3]; 3]>,
        meta: String,
    ) -> Result<Self> {
        let nv = vertices.len();
        // canonical ascending-vertex order, coordinates permuted alongside
        let mut tris: Vec<([usize; 3], [[f64; 3]; 3])> = faces
            .into_iter()
            .zip(face_coords)
            .map(|(f, c)| {
                let mut idx = [0, 1, 2];
                idx.sort_by_key(|&k| f[k]);
                (
                    [f[idx[0]], f[idx[1]], f[idx[2]]],
                    [c[idx[0]], c[idx[1]], c[idx[2]]],
                )
            })
            .collect();
        tris.sort_by_key(|(f, _)| *f);

        let mut edge_index: BTreeMap<[usize; 2], usize> = BTreeMap::new();
        for (f, _) in &tris {
            for pair in [[f[1], f[2]], [f[0], f[2]], [f[0], f[1]]] {
                let next = edge_index.len();
                edge_index.entry(pair).or_insert(next);
            }
        }
        // re-number edges in sorted tuple order
        let edges: Vec<[usize; 2]> = edge_index.keys().copied().collect();
        for (rank, e) in edges.iter().enumerate() {
            *edge_index.get_mut(e).unwrap() = rank;
        }
        let ne = edges.len();
        let nf = tris.len();

        let mut primal_edge = vec![0.0f64; ne];
        let mut dual_edge = vec![0.0f64; ne];
        let mut primal_face = vec![0.0f64; nf];
        let mut dual_vertex = vec![0.0f64; nv];

        for (fi, (f, c)) in tris.iter().enumerate() {
            primal_face[fi] = triangle_area(c);
            let center = circumcenter(c);
            for e in 0..3 {
                let (u, v, opp) = match e {
                    0 => (0, 1, 2),
                    1 => (1, 2, 0),
                    _ => (0, 2, 1),
                };
                let pair = [f[u], f[v]];
                let ei = edge_index[&pair];
                let len = dist(&c[u], &c[v]);
                primal_edge[ei] = len;
                // signed distance from the circumcenter to the edge,
                // positive toward the opposite vertex
                let w = signed_edge_distance(&c[u], &c[v], &c[opp], &center);
                dual_edge[ei] += w;
                // the two kite triangles this edge contributes around u and v
                dual_vertex[f[u]] += 0.25 * len * w;
                dual_vertex[f[v]] += 0.25 * len * w;
            }
        }

        let simplices = vec![
            (0..nv).map(|i| vec![i]).collect::<Vec<_>>(),
            edges.iter().map(|e| e.to_vec()).collect::<Vec<_>>(),
            tris.iter().map(|(f, _)| f.to_vec()).collect::<Vec<_>>(),
        ];
        let primal_volume = vec![vec![1.0; nv], primal_edge, primal_face];
        let dual_volume = vec![dual_vertex, dual_edge, vec![1.0; nf]];
        Self::assemble(2, vertices, simplices, primal_volume, dual_volume, meta)
    }

    /// Build a complex from raw parts, recomputing incidence and the mass
    /// matrices. This is the loader entry point; it checks structural
    /// consistency but not metric positivity (use [`validate`]).
    ///
    /// [`validate`]: SimplicialComplex::validate
    pub fn from_raw_parts(
        dim: usize,
        vertices: Vec<[f64; 3]>,
        simplices: Vec<Vec<Vec<usize>>>,
        primal_volume: Vec<Vec<f64>>,
        dual_volume: Vec<Vec<f64>>,
        meta: String,
    ) -> Result<Self> {
        Self::assemble(dim, vertices, simplices, primal_volume, dual_volume, meta)
    }

    fn assemble(
        dim: usize,
        vertices: Vec<[f64; 3]>,
        simplices: Vec<Vec<Vec<usize>>>,
        primal_volume: Vec<Vec<f64>>,
        dual_volume: Vec<Vec<f64>>,
        meta: String,
    ) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::Format(format!("unsupported dimension {dim}")));
        }
        if simplices.len() != dim + 1 || primal_volume.len() != dim + 1 || dual_volume.len() != dim + 1 {
            return Err(Error::Format("per-degree arrays must have length dim + 1".into()));
        }
        for k in 0..=dim {
            let n = simplices[k].len();
            if primal_volume[k].len() != n || dual_volume[k].len() != n {
                return Err(Error::Format(format!("volume arrays of degree {k} disagree with simplex count")));
            }
            for s in &simplices[k] {
                if s.len() != k + 1 || s.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::Format(format!("degree-{k} simplex is not a strictly ascending ({})-tuple", k + 1)));
                }
                if s.iter().any(|&v| v >= vertices.len()) {
                    return Err(Error::Format("simplex references a missing vertex".into()));
                }
            }
        }

        let mut boundary = Vec::with_capacity(dim + 1);
        boundary.push(Boundary::empty(0, simplices[0].len()));
        for k in 1..=dim {
            let index: BTreeMap<&[usize], usize> = simplices[k - 1]
                .iter()
                .enumerate()
                .map(|(i, s)| (s.as_slice(), i))
                .collect();
            let mut b = Boundary::empty(simplices[k - 1].len(), simplices[k].len());
            for (j, s) in simplices[k].iter().enumerate() {
                for drop in 0..=k {
                    let face: Vec<usize> = s
                        .iter()
                        .enumerate()
                        .filter_map(|(pos, &v)| (pos != drop).then_some(v))
                        .collect();
                    let row = *index
                        .get(face.as_slice())
                        .ok_or_else(|| Error::Format(format!("face {face:?} of a degree-{k} simplex is missing")))?;
                    let sign = if drop % 2 == 0 { 1 } else { -1 };
                    b.entries[j].push((row, sign));
                }
            }
            boundary.push(b);
        }

        let mass: Vec<DVector<f64>> = (0..=dim)
            .map(|k| {
                DVector::from_iterator(
                    simplices[k].len(),
                    primal_volume[k]
                        .iter()
                        .zip(&dual_volume[k])
                        .map(|(p, d)| d / p),
                )
            })
            .collect();

        let id = {
            let mut h = Fnv1a::new();
            h.write_u64(dim as u64);
            h.write(meta.as_bytes());
            for k in 0..=dim {
                h.write_u64(simplices[k].len() as u64);
                for s in &simplices[k] {
                    for &v in s {
                        h.write_u64(v as u64);
                    }
                }
                for &v in &primal_volume[k] {
                    h.write_f64(v);
                }
                for &v in &dual_volume[k] {
                    h.write_f64(v);
                }
            }
            ComplexId(h.finish())
        };

        Ok(SimplicialComplex {
            dim,
            vertices,
            simplices,
            boundary,
            primal_volume,
            dual_volume,
            mass,
            meta,
            id,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn id(&self) -> ComplexId {
        self.id
    }

    pub fn meta(&self) -> &str {
        &self.meta
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    pub fn num_simplices(&self, k: usize) -> usize {
        self.simplices.get(k).map_or(0, Vec::len)
    }

    pub fn simplices(&self, k: usize) -> &[Vec<usize>] {
        &self.simplices[k]
    }

    /// Boundary incidence of degree k (maps k-chains to (k-1)-chains).
    pub fn boundary(&self, k: usize) -> &Boundary {
        &self.boundary[k]
    }

    pub fn primal_volume(&self, k: usize) -> &[f64] {
        &self.primal_volume[k]
    }

    pub fn dual_volume(&self, k: usize) -> &[f64] {
        &self.dual_volume[k]
    }

    /// Diagonal Hodge star (dual/primal volume ratio) of degree k.
    pub fn mass(&self, k: usize) -> &DVector<f64> {
        &self.mass[k]
    }

    pub fn check_degree(&self, k: usize) -> Result<()> {
        if k > self.dim {
            Err(Error::InvalidDegree { degree: k, dim: self.dim })
        } else {
            Ok(())
        }
    }

    /// Euler characteristic from simplex counts.
    pub fn euler_characteristic(&self) -> i64 {
        (0..=self.dim)
            .map(|k| {
                let n = self.num_simplices(k) as i64;
                if k % 2 == 0 { n } else { -n }
            })
            .sum()
    }

    /// Number of connected components (via edges).
    pub fn connected_components(&self) -> usize {
        let n = self.num_simplices(0);
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for e in &self.simplices[1] {
            let (a, b) = (find(&mut parent, e[0]), find(&mut parent, e[1]));
            if a != b {
                parent[a] = b;
            }
        }
        (0..n).filter(|&v| find(&mut parent, v) == v).count()
    }

    /// Run every structural and metric invariant; failures are reported, not
    /// raised.
    pub fn validate(&self) -> ValidationReport {
        let mut checks = Vec::new();

        let mut worst_dd = 0i64;
        for k in 2..=self.dim {
            worst_dd = worst_dd.max(self.boundary[k - 1].compose_max_abs(&self.boundary[k]));
        }
        checks.push(ValidationCheck {
            name: "boundary_squared_zero",
            passed: worst_dd == 0,
            worst: worst_dd as f64,
        });

        for (name, vols) in [
            ("primal_volumes_positive", &self.primal_volume),
            ("dual_volumes_positive", &self.dual_volume),
        ] {
            let min = vols
                .iter()
                .flat_map(|v| v.iter().copied())
                .fold(f64::INFINITY, f64::min);
            checks.push(ValidationCheck {
                name,
                passed: min > 0.0,
                worst: if min > 0.0 { 0.0 } else { min.abs().max(f64::MIN_POSITIVE) },
            });
        }

        let components = self.connected_components();
        checks.push(ValidationCheck {
            name: "connected",
            passed: components == 1,
            worst: components.saturating_sub(1) as f64,
        });

        ValidationReport { checks }
    }

    // ------------------------------------------------------------------
    // first-order calculus (sparse application; see the cochain module for
    // the cochain-level API)
    // ------------------------------------------------------------------

    pub(crate) fn apply_d(&self, degree: usize, values: &DVector<Complex64>) -> DVector<Complex64> {
        let b = &self.boundary[degree + 1];
        let mut out = DVector::from_element(b.cols(), Complex64::new(0.0, 0.0));
        for j in 0..b.cols() {
            let mut acc = Complex64::new(0.0, 0.0);
            for &(row, sign) in b.column(j) {
                acc += f64::from(sign) * values[row];
            }
            out[j] = acc;
        }
        out
    }

    pub(crate) fn apply_delta(&self, degree: usize, values: &DVector<Complex64>) -> DVector<Complex64> {
        let b = &self.boundary[degree];
        let m_hi = &self.mass[degree];
        let m_lo = &self.mass[degree - 1];
        let mut out = DVector::from_element(b.rows(), Complex64::new(0.0, 0.0));
        for j in 0..b.cols() {
            let scaled = values[j] * m_hi[j];
            for &(row, sign) in b.column(j) {
                out[row] += f64::from(sign) * scaled;
            }
        }
        for i in 0..out.len() {
            out[i] /= m_lo[i];
        }
        out
    }

    /// Dense matrix of the exterior derivative d_k.
    pub fn d_matrix(&self, k: usize) -> nalgebra::DMatrix<f64> {
        assert!(k < self.dim, "d is undefined at top degree");
        self.boundary[k + 1].to_dense().transpose()
    }

    /// Dense matrix of the codifferential delta_k = M_{k-1}^-1 d^T M_k.
    pub fn delta_matrix(&self, k: usize) -> nalgebra::DMatrix<f64> {
        assert!(k >= 1, "delta is undefined at degree zero");
        let mut m = self.boundary[k].to_dense();
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                m[(i, j)] *= self.mass[k][j] / self.mass[k - 1][i];
            }
        }
        m
    }

    // ------------------------------------------------------------------
    // file format
    // ------------------------------------------------------------------

    /// Serialize to the mesh JSON document (floats carry 17 significant
    /// digits).
    pub fn to_json(&self) -> String {
        let mut w = io::JsonWriter::new();
        w.begin_object();
        w.field("dim");
        w.number_usize(self.dim);
        w.field("meta");
        w.string(&self.meta);
        w.field("vertices");
        w.begin_array();
        for v in &self.vertices {
            w.begin_array();
            for &x in v {
                w.number_f64(x);
            }
            w.end_array();
        }
        w.end_array();
        w.field("simplices");
        w.begin_array();
        for k in 0..=self.dim {
            w.begin_array();
            for s in &self.simplices[k] {
                w.begin_array();
                for &v in s {
                    w.number_usize(v);
                }
                w.end_array();
            }
            w.end_array();
        }
        w.end_array();
        for (name, vols) in [
            ("primal_volume", &self.primal_volume),
            ("dual_volume", &self.dual_volume),
        ] {
            w.field(name);
            w.begin_array();
            for degree_vols in vols.iter() {
                w.begin_array();
                for &v in degree_vols {
                    w.number_f64(v);
                }
                w.end_array();
            }
            w.end_array();
        }
        w.end_object();
        w.finish()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct MeshFile {
            dim: usize,
            meta: String,
            vertices: Vec<[f64; 3]>,
            simplices: Vec<Vec<Vec<usize>>>,
            primal_volume: Vec<Vec<f64>>,
            dual_volume: Vec<Vec<f64>>,
        }
        let f: MeshFile = serde_json::from_str(text)?;
        Self::from_raw_parts(f.dim, f.vertices, f.simplices, f.primal_volume, f.dual_volume, f.meta)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Clone, Debug)]
pub struct ValidationCheck {
    pub name: &'static str,
    pub passed: bool,
    /// magnitude of the worst violation; 0 when the check passes
    pub worst: f64,
}

#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub checks: Vec<ValidationCheck>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&ValidationCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn sub(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: &[f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

fn dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    norm(&sub(a, b))
}

fn triangle_area(c: &[[f64; 3]; 3]) -> f64 {
    let a = sub(&c[1], &c[0]);
    let b = sub(&c[2], &c[0]);
    0.5 * norm(&cross(&a, &b))
}

fn circumcenter(c: &[[f64; 3]; 3]) -> [f64; 3] {
    let a = sub(&c[1], &c[0]);
    let b = sub(&c[2], &c[0]);
    let n = cross(&a, &b);
    let n2 = dot(&n, &n);
    let bn = cross(&b, &n);
    let na = cross(&n, &a);
    let la = dot(&a, &a);
    let lb = dot(&b, &b);
    [
        c[0][0] + (la * bn[0] + lb * na[0]) / (2.0 * n2),
        c[0][1] + (la * bn[1] + lb * na[1]) / (2.0 * n2),
        c[0][2] + (la * bn[2] + lb * na[2]) / (2.0 * n2),
    ]
}

/// In-plane distance from `center` to the edge (u, v), positive on the side
/// of the opposite vertex.
fn signed_edge_distance(u: &[f64; 3], v: &[f64; 3], opposite: &[f64; 3], center: &[f64; 3]) -> f64 {
    let e = sub(v, u);
    let el = norm(&e);
    let eh = [e[0] / el, e[1] / el, e[2] / el];
    let mid = [
        0.5 * (u[0] + v[0]),
        0.5 * (u[1] + v[1]),
        0.5 * (u[2] + v[2]),
    ];
    let to_opp = sub(opposite, &mid);
    let t = dot(&to_opp, &eh);
    let mut inplane = [to_opp[0] - t * eh[0], to_opp[1] - t * eh[1], to_opp[2] - t * eh[2]];
    let l = norm(&inplane);
    inplane = [inplane[0] / l, inplane[1] / l, inplane[2] / l];
    let to_center = sub(center, &mid);
    dot(&to_center, &inplane)
}
