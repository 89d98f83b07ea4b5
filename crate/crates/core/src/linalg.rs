//! Small dense linear-algebra helpers shared across the crate.
//!
//! Everything here works with the weighted (mass-matrix) inner product
//! `<a, b> = conj(a)^T diag(w) b`, since that is the inner product under
//! which the calculus operators are self-adjoint.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Eigendecomposition of a matrix `a` that is self-adjoint with respect to
/// `diag(w)`, `w > 0` entrywise.
///
/// Returns eigenvalues sorted ascending and a `diag(w)`-orthonormal
/// eigenvector basis (one column per eigenvalue). The problem is symmetrized
/// as `B = W^1/2 A W^-1/2` so a plain symmetric solver applies; eigenvector
/// signs are canonicalized so rebuilding a cache is bit-reproducible.
pub fn weighted_sym_eigen(a: &DMatrix<f64>, w: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = a.nrows();
    assert_eq!(a.ncols(), n);
    assert_eq!(w.len(), n);
    let sqrt_w: DVector<f64> = w.map(f64::sqrt);

    let mut b = a.clone();
    for i in 0..n {
        for j in 0..n {
            b[(i, j)] *= sqrt_w[i] / sqrt_w[j];
        }
    }
    // enforce exact symmetry before the solver sees it
    for i in 0..n {
        for j in (i + 1)..n {
            let s = 0.5 * (b[(i, j)] + b[(j, i)]);
            b[(i, j)] = s;
            b[(j, i)] = s;
        }
    }

    let eig = b.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

    let mut values = DVector::zeros(n);
    let mut basis = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        values[dst] = eig.eigenvalues[src];
        let mut col = eig.eigenvectors.column(src).clone_owned();
        // back to the A-eigenvector: e = W^-1/2 v, then renormalize in diag(w)
        for i in 0..n {
            col[i] /= sqrt_w[i];
        }
        let norm = weighted_norm_real(&col, w);
        col /= norm;
        // canonical sign: the entry of largest magnitude is positive
        let lead = (0..n).max_by(|&i, &j| col[i].abs().total_cmp(&col[j].abs())).unwrap();
        if col[lead] < 0.0 {
            col = -col;
        }
        basis.set_column(dst, &col);
    }
    (values, basis)
}

pub fn weighted_norm_real(v: &DVector<f64>, w: &DVector<f64>) -> f64 {
    v.iter().zip(w.iter()).map(|(x, wi)| wi * x * x).sum::<f64>().sqrt()
}

pub fn weighted_inner(a: &DVector<Complex64>, b: &DVector<Complex64>, w: &DVector<f64>) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..a.len() {
        acc += a[i].conj() * b[i] * w[i];
    }
    acc
}

pub fn weighted_norm(v: &DVector<Complex64>, w: &DVector<f64>) -> f64 {
    weighted_inner(v, v, w).re.max(0.0).sqrt()
}

/// Spectral (2-)norm. Computed on the real embedding
/// `[[Re, -Im], [Im, Re]]`, whose singular values are those of the complex
/// matrix doubled; this sidesteps nalgebra's complex SVD.
pub fn spectral_norm(a: &DMatrix<Complex64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let (m, n) = (a.nrows(), a.ncols());
    let mut e = DMatrix::<f64>::zeros(2 * m, 2 * n);
    for i in 0..m {
        for j in 0..n {
            let z = a[(i, j)];
            e[(i, j)] = z.re;
            e[(i, n + j)] = -z.im;
            e[(m + i, j)] = z.im;
            e[(m + i, n + j)] = z.re;
        }
    }
    e.singular_values().iter().cloned().fold(0.0f64, f64::max)
}

/// Operator norm of `a : (C^n, diag(w_in)) -> (C^m, diag(w_out))`,
/// i.e. the 2-norm of `W_out^1/2 A W_in^-1/2`.
pub fn weighted_op_norm(a: &DMatrix<Complex64>, w_out: &DVector<f64>, w_in: &DVector<f64>) -> f64 {
    let mut m = a.clone();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            m[(i, j)] *= (w_out[i] / w_in[j]).sqrt();
        }
    }
    spectral_norm(&m)
}

pub fn to_complex(a: &DMatrix<f64>) -> DMatrix<Complex64> {
    a.map(|x| Complex64::new(x, 0.0))
}

/// Orthogonal projector onto the column span of a (possibly rank-deficient)
/// matrix, in the inner product `diag(w)`. Built once, applied many times.
///
/// Uses modified Gram-Schmidt with reorthogonalization; nalgebra's complex
/// SVD pairs u-columns with singular values inconsistently, so it cannot be
/// trusted for the basis here.
pub struct SubspaceProjector {
    /// Euclidean-orthonormal basis of `W^1/2 * cols`
    q: Vec<DVector<Complex64>>,
    sqrt_w: DVector<f64>,
}

impl SubspaceProjector {
    pub fn new(cols: &DMatrix<Complex64>, w: &DVector<f64>, rank_tol: f64) -> Self {
        let sqrt_w: DVector<f64> = w.map(f64::sqrt);
        let mut q: Vec<DVector<Complex64>> = Vec::new();
        let mut max_norm = 0.0f64;
        for j in 0..cols.ncols() {
            let mut v = cols.column(j).clone_owned();
            for i in 0..v.len() {
                v[i] *= sqrt_w[i];
            }
            max_norm = max_norm.max(v.norm());
            for _ in 0..2 {
                for b in &q {
                    let c = b.dotc(&v);
                    v.axpy(-c, b, Complex64::ONE);
                }
            }
            let norm = v.norm();
            if norm > rank_tol * max_norm.max(1e-300) {
                q.push(v / Complex64::from(norm));
            }
        }
        Self { q, sqrt_w }
    }

    pub fn rank(&self) -> usize {
        self.q.len()
    }

    /// Distance of `v` from the subspace, in the `diag(w)` norm.
    pub fn distance(&self, v: &DVector<Complex64>) -> f64 {
        self.residual_scaled(v).norm()
    }

    /// Orthogonal projection of `v` onto the subspace (in the `diag(w)`
    /// inner product), returned in the original coordinates.
    pub fn project(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        let residual = self.residual_scaled(v);
        DVector::from_fn(v.len(), |i, _| {
            v[i] - residual[i] / self.sqrt_w[i]
        })
    }

    fn residual_scaled(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        let mut scaled = v.clone();
        for i in 0..scaled.len() {
            scaled[i] *= self.sqrt_w[i];
        }
        for _ in 0..2 {
            for b in &self.q {
                let c = b.dotc(&scaled);
                scaled.axpy(-c, b, Complex64::ONE);
            }
        }
        scaled
    }
}

/// FNV-1a, used for stable content fingerprints of meshes and cochains.
#[derive(Clone)]
pub struct Fnv1a(u64);

impl Fnv1a {
    pub fn new() -> Self {
        Fnv1a(0xcbf29ce484222325)
    }

    pub fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(0x100000001b3);
        }
    }

    pub fn write_u64(&mut self, x: u64) {
        self.write(&x.to_le_bytes());
    }

    pub fn write_f64(&mut self, x: f64) {
        self.write(&x.to_bits().to_le_bytes());
    }

    pub fn finish(&self) -> u64 {
        self.0
    }
}

impl Default for Fnv1a {
    fn default() -> Self {
        Self::new()
    }
}

/// SplitMix64 step; documented seed-expansion for replayable trials.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}
