//! Hodge Laplacians and their spectral calculus: eigenbases, fractional
//! powers, the orthogonal Hodge decomposition, harmonic spaces, the Poisson
//! solver and the Coulomb projector.
//!
//! All spectral operators are exact finite-dimensional functional calculus:
//! the complete eigenbasis of each Laplacian is computed once per degree and
//! every operator downstream (Sobolev norms, mollifiers, square roots, wave
//! propagators) is a function applied to that basis. In finite dimensions
//! every range is closed, so subspace membership questions reduce to
//! least-squares distances against assembled column spans.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::cochain::Cochain;
use crate::error::{Error, Result};
use crate::io;
use crate::mesh::{ComplexId, SimplicialComplex};

/// Dense storage cap per degree; the eigensolver is O(n^3).
pub const CACHE_SIZE_CAP: usize = 4096;

/// Hodge Laplacian `Delta_k = delta d + d delta` as a dense matrix
/// (self-adjoint in the Hodge inner product, positive semidefinite).
pub fn assemble_laplacian(complex: &SimplicialComplex, k: usize) -> Result<DMatrix<f64>> {
    complex.check_degree(k)?;
    let n = complex.num_simplices(k);
    let mut lap = DMatrix::zeros(n, n);
    if k < complex.dim() {
        lap += complex.delta_matrix(k + 1) * complex.d_matrix(k);
    }
    if k > 0 {
        lap += complex.d_matrix(k - 1) * complex.delta_matrix(k);
    }
    Ok(lap)
}

/// Complete orthonormal eigenpairs of `Delta_k`, the backbone of all spectral
/// operators. Eigenvalues ascend; eigenvectors are real, orthonormal in the
/// Hodge inner product, with deterministic signs.
#[derive(Clone, Debug)]
pub struct SpectralCache {
    degree: usize,
    eigenvalues: DVector<f64>,
    basis: DMatrix<f64>,
    mass: DVector<f64>,
    harmonic_tol: f64,
    complex_id: ComplexId,
}

impl SpectralCache {
    pub fn build(complex: &SimplicialComplex, degree: usize) -> Result<Self> {
        Self::build_with_tol(complex, degree, None)
    }

    /// `harmonic_tol` defaults to `1e-8 * lambda_max` when not given.
    pub fn build_with_tol(
        complex: &SimplicialComplex,
        degree: usize,
        harmonic_tol: Option<f64>,
    ) -> Result<Self> {
        complex.check_degree(degree)?;
        let n = complex.num_simplices(degree);
        if n > CACHE_SIZE_CAP {
            return Err(Error::CacheTooLarge {
                degree,
                size: n,
                cap: CACHE_SIZE_CAP,
            });
        }
        let mass = complex.mass(degree).clone();
        let sqrt_m: DVector<f64> = mass.map(f64::sqrt);

        // symmetrized Laplacian assembled as a sum of Gram matrices G^T G,
        // exactly symmetric and PSD by construction
        let mut sym = DMatrix::zeros(n, n);
        if degree < complex.dim() {
            let mut g = complex.d_matrix(degree);
            let sqrt_up: DVector<f64> = complex.mass(degree + 1).map(f64::sqrt);
            for i in 0..g.nrows() {
                for j in 0..g.ncols() {
                    g[(i, j)] *= sqrt_up[i] / sqrt_m[j];
                }
            }
            sym += g.tr_mul(&g);
        }
        if degree > 0 {
            let mut g = complex.d_matrix(degree - 1).transpose();
            let sqrt_down: DVector<f64> = complex.mass(degree - 1).map(f64::sqrt);
            for i in 0..g.nrows() {
                for j in 0..g.ncols() {
                    g[(i, j)] *= sqrt_m[j] / sqrt_down[i];
                }
            }
            sym += g.tr_mul(&g);
        }

        let eig = sym.symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

        let mut eigenvalues = DVector::zeros(n);
        let mut basis = DMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            eigenvalues[dst] = eig.eigenvalues[src].max(0.0);
            let mut col = eig.eigenvectors.column(src).clone_owned();
            for i in 0..n {
                col[i] /= sqrt_m[i];
            }
            let norm = crate::linalg::weighted_norm_real(&col, &mass);
            col /= norm;
            let lead = (0..n)
                .max_by(|&i, &j| col[i].abs().total_cmp(&col[j].abs()))
                .unwrap();
            if col[lead] < 0.0 {
                col = -col;
            }
            basis.set_column(dst, &col);
        }

        let lambda_max = eigenvalues[n - 1].max(f64::MIN_POSITIVE);
        Ok(SpectralCache {
            degree,
            eigenvalues,
            basis,
            mass,
            harmonic_tol: harmonic_tol.unwrap_or(1e-8 * lambda_max),
            complex_id: complex.id(),
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Hodge-star weights of the owning complex at this degree.
    pub fn mass(&self) -> &DVector<f64> {
        &self.mass
    }

    pub fn harmonic_tol(&self) -> f64 {
        self.harmonic_tol
    }

    pub fn complex_id(&self) -> ComplexId {
        self.complex_id
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Betti number: dimension of the harmonic space at `harmonic_tol`.
    pub fn betti(&self) -> usize {
        self.eigenvalues.iter().filter(|&&l| l < self.harmonic_tol).count()
    }

    pub fn smallest_nonzero_eigenvalue(&self) -> Option<f64> {
        self.eigenvalues.iter().copied().find(|&l| l >= self.harmonic_tol)
    }

    pub fn is_harmonic_mode(&self, i: usize) -> bool {
        self.eigenvalues[i] < self.harmonic_tol
    }

    /// i-th eigenvector as a cochain.
    pub fn eigencochain(&self, i: usize) -> Cochain {
        let col = self.basis.column(i).map(|x| Complex64::new(x, 0.0));
        Cochain::raw(self.degree, col, self.complex_id)
    }

    pub fn check_owns(&self, w: &Cochain) -> Result<()> {
        if w.complex_id() != self.complex_id {
            return Err(Error::ComplexMismatch);
        }
        if w.degree() != self.degree {
            return Err(Error::MissingCache { degree: w.degree() });
        }
        Ok(())
    }

    /// Coefficients of `values` in the eigenbasis (the basis is orthonormal
    /// in the Hodge inner product, so this is `B^T M values`).
    pub fn coefficients(&self, values: &DVector<Complex64>) -> DVector<Complex64> {
        let n = self.len();
        DVector::from_fn(n, |i, _| {
            let mut acc = Complex64::ZERO;
            for j in 0..n {
                acc += self.basis[(j, i)] * self.mass[j] * values[j];
            }
            acc
        })
    }

    pub fn synthesize(&self, coeffs: &DVector<Complex64>) -> DVector<Complex64> {
        let n = self.len();
        DVector::from_fn(n, |j, _| {
            let mut acc = Complex64::ZERO;
            for i in 0..n {
                acc += self.basis[(j, i)] * coeffs[i];
            }
            acc
        })
    }

    /// Apply the scalar spectral multiplier `f(lambda)`.
    pub(crate) fn apply_fn(
        &self,
        values: &DVector<Complex64>,
        f: impl Fn(f64) -> f64,
    ) -> DVector<Complex64> {
        let mut coeffs = self.coefficients(values);
        for i in 0..coeffs.len() {
            coeffs[i] *= f(self.eigenvalues[i]);
        }
        self.synthesize(&coeffs)
    }

    /// Apply a complex-valued spectral multiplier.
    pub fn apply_cfn(
        &self,
        values: &DVector<Complex64>,
        f: impl Fn(f64) -> Complex64,
    ) -> DVector<Complex64> {
        let mut coeffs = self.coefficients(values);
        for i in 0..coeffs.len() {
            coeffs[i] *= f(self.eigenvalues[i]);
        }
        self.synthesize(&coeffs)
    }

    /// Dense matrix of the spectral multiplier `f(lambda)`.
    pub fn fn_matrix(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let n = self.len();
        // B diag(f) B^T diag(m)
        let mut scaled = self.basis.clone();
        for i in 0..n {
            let fi = f(self.eigenvalues[i]);
            for j in 0..n {
                scaled[(j, i)] *= fi;
            }
        }
        let mut bt_m = self.basis.transpose();
        for j in 0..n {
            for i in 0..n {
                bt_m[(i, j)] *= self.mass[j];
            }
        }
        scaled * bt_m
    }

    /// Norm fraction of the harmonic component of `values`.
    pub fn kernel_fraction(&self, values: &DVector<Complex64>) -> f64 {
        let coeffs = self.coefficients(values);
        let mut kernel = 0.0;
        let mut total = 0.0;
        for i in 0..coeffs.len() {
            let c2 = coeffs[i].norm_sqr();
            total += c2;
            if self.is_harmonic_mode(i) {
                kernel += c2;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            (kernel / total).sqrt()
        }
    }

    /// Persist eigenvalues and eigenvectors (17 significant digits).
    pub fn to_json(&self) -> String {
        let mut w = io::JsonWriter::new();
        w.begin_object();
        w.field("degree");
        w.number_usize(self.degree);
        w.field("complex");
        w.string(&self.complex_id.to_string());
        w.field("harmonic_tol");
        w.number_f64(self.harmonic_tol);
        w.field("eigenvalues");
        w.begin_array();
        for &l in self.eigenvalues.iter() {
            w.number_f64(l);
        }
        w.end_array();
        w.field("eigenvectors");
        w.begin_array();
        for i in 0..self.len() {
            w.begin_array();
            for j in 0..self.len() {
                w.number_f64(self.basis[(j, i)]);
            }
            w.end_array();
        }
        w.end_array();
        w.end_object();
        w.finish()
    }

    pub fn from_json(complex: &SimplicialComplex, text: &str) -> Result<Self> {
        #[derive(serde::Deserialize)]
        struct CacheFile {
            degree: usize,
            complex: String,
            harmonic_tol: f64,
            eigenvalues: Vec<f64>,
            eigenvectors: Vec<Vec<f64>>,
        }
        let f: CacheFile = serde_json::from_str(text)?;
        if f.complex != complex.id().to_string() {
            return Err(Error::ComplexMismatch);
        }
        let n = complex.num_simplices(f.degree);
        if f.eigenvalues.len() != n || f.eigenvectors.len() != n {
            return Err(Error::Format("cache size disagrees with complex".into()));
        }
        let mut basis = DMatrix::zeros(n, n);
        for (i, col) in f.eigenvectors.iter().enumerate() {
            if col.len() != n {
                return Err(Error::Format("ragged eigenvector matrix".into()));
            }
            for (j, &x) in col.iter().enumerate() {
                basis[(j, i)] = x;
            }
        }
        Ok(SpectralCache {
            degree: f.degree,
            eigenvalues: DVector::from_vec(f.eigenvalues),
            basis,
            mass: complex.mass(f.degree).clone(),
            harmonic_tol: f.harmonic_tol,
            complex_id: complex.id(),
        })
    }
}

/// Caches for every degree of one complex.
#[derive(Clone, Debug)]
pub struct SpectralCacheSet {
    caches: Vec<SpectralCache>,
    complex_id: ComplexId,
}

impl SpectralCacheSet {
    pub fn build(complex: &SimplicialComplex) -> Result<Self> {
        Self::build_with_tol(complex, None)
    }

    pub fn build_with_tol(complex: &SimplicialComplex, harmonic_tol: Option<f64>) -> Result<Self> {
        let caches = (0..=complex.dim())
            .map(|k| SpectralCache::build_with_tol(complex, k, harmonic_tol))
            .collect::<Result<Vec<_>>>()?;
        Ok(SpectralCacheSet {
            caches,
            complex_id: complex.id(),
        })
    }

    pub fn get(&self, degree: usize) -> Result<&SpectralCache> {
        self.caches.get(degree).ok_or(Error::MissingCache { degree })
    }

    pub fn complex_id(&self) -> ComplexId {
        self.complex_id
    }

    pub fn max_degree(&self) -> usize {
        self.caches.len() - 1
    }

    /// Betti numbers b_0 .. b_dim.
    pub fn betti_numbers(&self) -> Vec<usize> {
        self.caches.iter().map(SpectralCache::betti).collect()
    }
}

/// Named scalar functions for [`spectral_fn`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpectralFn {
    /// lambda^s (s < 0 rejects inputs with a kernel component)
    Power(f64),
    /// exp(-eps (1 + lambda)), the mollifier J_eps
    ExpNeg(f64),
    /// `sqrt(lambda + mu^2 [lambda < tol])`: regularized square root
    SqrtShifted(f64),
    /// its inverse
    InvSqrtShifted(f64),
    /// 1/lambda on the non-kernel modes, 0 on the kernel
    Pinv,
    /// exp(-t lambda)
    Heat(f64),
}

/// Relative kernel-component threshold above which a singular function
/// refuses to act.
const SINGULAR_KERNEL_FRACTION: f64 = 1e-8;

/// Apply a named spectral function of the Laplacian to a cochain.
pub fn spectral_fn(cache: &SpectralCache, f: SpectralFn, w: &Cochain) -> Result<Cochain> {
    cache.check_owns(w)?;
    let tol = cache.harmonic_tol();
    match f {
        SpectralFn::Power(s) => {
            if s < 0.0 {
                let fraction = cache.kernel_fraction(w.values());
                if fraction > SINGULAR_KERNEL_FRACTION {
                    return Err(Error::SingularOnKernel { fraction });
                }
                Ok(w.with_values(
                    cache.apply_fn(w.values(), |l| if l < tol { 0.0 } else { l.powf(s) }),
                ))
            } else {
                Ok(w.with_values(cache.apply_fn(w.values(), |l| l.powf(s))))
            }
        }
        SpectralFn::ExpNeg(eps) => {
            if eps <= 0.0 {
                return Err(Error::NonPositive { what: "eps", got: eps });
            }
            Ok(w.with_values(cache.apply_fn(w.values(), |l| (-eps * (1.0 + l)).exp())))
        }
        SpectralFn::SqrtShifted(mu) => {
            if mu <= 0.0 {
                return Err(Error::NonPositive { what: "mu", got: mu });
            }
            Ok(w.with_values(cache.apply_fn(w.values(), |l| {
                if l < tol { (l + mu * mu).sqrt() } else { l.sqrt() }
            })))
        }
        SpectralFn::InvSqrtShifted(mu) => {
            if mu <= 0.0 {
                return Err(Error::NonPositive { what: "mu", got: mu });
            }
            Ok(w.with_values(cache.apply_fn(w.values(), |l| {
                if l < tol { 1.0 / (l + mu * mu).sqrt() } else { 1.0 / l.sqrt() }
            })))
        }
        SpectralFn::Pinv => Ok(w.with_values(
            cache.apply_fn(w.values(), |l| if l < tol { 0.0 } else { 1.0 / l }),
        )),
        SpectralFn::Heat(t) => Ok(w.with_values(cache.apply_fn(w.values(), |l| (-t * l).exp()))),
    }
}

/// The three components of the Hodge decomposition, pairwise orthogonal in
/// every Sobolev inner product.
#[derive(Clone, Debug)]
pub struct HodgeSplit {
    pub exact: Cochain,
    pub coexact: Cochain,
    pub harmonic: Cochain,
}

impl HodgeSplit {
    pub fn reconstruct(&self) -> Result<Cochain> {
        self.exact.add(&self.coexact)?.add(&self.harmonic)
    }
}

/// Orthogonal Hodge decomposition of a k-cochain into exact, coexact and
/// harmonic parts. Potentials are minimum-norm (orthogonal to the kernel),
/// so the output is deterministic.
pub fn hodge_decompose(
    complex: &SimplicialComplex,
    caches: &SpectralCacheSet,
    w: &Cochain,
) -> Result<HodgeSplit> {
    if w.complex_id() != complex.id() || caches.complex_id() != complex.id() {
        return Err(Error::ComplexMismatch);
    }
    let k = w.degree();
    complex.check_degree(k)?;

    let exact = if k == 0 {
        Cochain::zeros(complex, 0)?
    } else {
        let potential = spectral_fn(caches.get(k - 1)?, SpectralFn::Pinv, &complex.delta(w)?)?;
        complex.d(&potential)?
    };
    let coexact = if k == complex.dim() {
        Cochain::zeros(complex, k)?
    } else {
        let copotential = spectral_fn(caches.get(k + 1)?, SpectralFn::Pinv, &complex.d(w)?)?;
        complex.delta(&copotential)?
    };
    let cache_k = caches.get(k)?;
    let tol = cache_k.harmonic_tol();
    let harmonic = w.with_values(
        cache_k.apply_fn(w.values(), |l| if l < tol { 1.0 } else { 0.0 }),
    );
    Ok(HodgeSplit {
        exact,
        coexact,
        harmonic,
    })
}

/// Mean-zero solution of the Poisson equation `Delta_0 a = delta w` for a
/// 1-cochain `w`; the right side is automatically orthogonal to constants.
pub fn solve_poisson(
    complex: &SimplicialComplex,
    cache0: &SpectralCache,
    w: &Cochain,
) -> Result<Cochain> {
    if w.degree() != 1 {
        return Err(Error::DegreeMismatch {
            left: w.degree(),
            right: 1,
        });
    }
    spectral_fn(cache0, SpectralFn::Pinv, &complex.delta(w)?)
}

/// Coulomb projector on 1-cochains: `Pi = 1 - d pinv(Delta_0) delta`,
/// the orthogonal projector onto coclosed 1-forms.
pub fn coulomb_projector(complex: &SimplicialComplex, cache0: &SpectralCache) -> Result<DMatrix<f64>> {
    if cache0.complex_id() != complex.id() || cache0.degree() != 0 {
        return Err(Error::MissingCache { degree: 0 });
    }
    complex.check_degree(1)?;
    let n1 = complex.num_simplices(1);
    let tol = cache0.harmonic_tol();
    let pinv0 = cache0.fn_matrix(|l| if l < tol { 0.0 } else { 1.0 / l });
    let correction = complex.d_matrix(0) * pinv0 * complex.delta_matrix(1);
    Ok(DMatrix::identity(n1, n1) - correction)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cochain::inner_sobolev;
    use crate::linalg::{to_complex, weighted_op_norm};
    use crate::sampling::{random_cochain, rng_for};

    fn torus() -> SimplicialComplex {
        SimplicialComplex::torus_lattice(4, 4, 1.0, 1.0).unwrap()
    }

    #[test]
    fn circle_spectrum_matches_circulant_closed_form() {
        let n = 16usize;
        let c = SimplicialComplex::circle(n, std::f64::consts::TAU).unwrap();
        let cache = SpectralCache::build(&c, 0).unwrap();
        let h = std::f64::consts::TAU / n as f64;
        // closed-form circulant eigenvalues (2 - 2 cos(2 pi j / n)) / h^2,
        // each nonzero one with multiplicity 2
        let mut expected: Vec<f64> = (0..n)
            .map(|j| (2.0 - 2.0 * (std::f64::consts::TAU * j as f64 / n as f64).cos()) / (h * h))
            .collect();
        expected.sort_by(f64::total_cmp);
        for (i, &l) in cache.eigenvalues().iter().enumerate() {
            let e = expected[i];
            assert!((l - e).abs() <= 1e-9 * e.max(1.0), "mode {i}: {l} vs {e}");
        }
        let nonzero: Vec<f64> = expected.iter().copied().filter(|&l| l > 1e-9).collect();
        for pair in nonzero.chunks(2) {
            if pair.len() == 2 {
                assert!((pair[0] - pair[1]).abs() < 1e-9 * pair[0].max(1.0));
            }
        }
    }

    #[test]
    fn betti_numbers_torus_and_sphere() {
        let caches = SpectralCacheSet::build(&torus()).unwrap();
        assert_eq!(caches.betti_numbers(), vec![1, 2, 1]);

        let sphere = SimplicialComplex::icosphere(1, 1.0).unwrap();
        let caches = SpectralCacheSet::build(&sphere).unwrap();
        assert_eq!(caches.betti_numbers(), vec![1, 0, 1]);
    }

    #[test]
    fn euler_poincare_holds() {
        for complex in [
            torus(),
            SimplicialComplex::icosphere(0, 1.0).unwrap(),
            SimplicialComplex::circle(8, 8.0).unwrap(),
        ] {
            let caches = SpectralCacheSet::build(&complex).unwrap();
            let alt: i64 = caches
                .betti_numbers()
                .iter()
                .enumerate()
                .map(|(k, &b)| if k % 2 == 0 { b as i64 } else { -(b as i64) })
                .sum();
            assert_eq!(alt, complex.euler_characteristic());
        }
    }

    #[test]
    fn eigenpairs_satisfy_residual_and_orthogonality() {
        let c = torus();
        for k in 0..=2 {
            let lap = assemble_laplacian(&c, k).unwrap();
            let cache = SpectralCache::build(&c, k).unwrap();
            let lam_max = cache.eigenvalues()[cache.len() - 1];
            for i in 0..cache.len() {
                let e = cache.eigencochain(i);
                let lhs = to_complex(&lap) * e.values();
                let residual = (&lhs - e.values() * Complex64::from(cache.eigenvalues()[i]))
                    .map(|z| z.norm())
                    .max();
                assert!(residual <= 1e-9 * lam_max.max(1.0));
            }
            for i in 0..cache.len() {
                for j in i..cache.len() {
                    let dot = c
                        .inner_l2(&cache.eigencochain(i), &cache.eigencochain(j))
                        .unwrap();
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((dot.re - expect).abs() < 1e-10 && dot.im.abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn green_identity() {
        let c = torus();
        let mut rng = rng_for(5, "green-identity");
        for _ in 0..100 {
            let w = random_cochain(&c, 1, &mut rng);
            let lap = assemble_laplacian(&c, 1).unwrap();
            let lw = Cochain::from_values(&c, 1, to_complex(&lap) * w.values()).unwrap();
            let quad = c.inner_l2(&lw, &w).unwrap();
            let dw = c.norm_l2(&c.d(&w).unwrap()).unwrap();
            let deltaw = c.norm_l2(&c.delta(&w).unwrap()).unwrap();
            let expect = dw * dw + deltaw * deltaw;
            assert!(quad.re >= 0.0);
            assert!((quad.re - expect).abs() <= 1e-11 * expect.max(1.0));
            // quadratic form of a self-adjoint operator: conjugate order agrees
            let quad2 = c.inner_l2(&w, &lw).unwrap();
            assert!((quad - quad2.conj()).norm() <= 1e-11 * expect.max(1.0));
        }
    }

    #[test]
    fn spectral_fn_consistency() {
        let c = torus();
        let cache = SpectralCache::build(&c, 1).unwrap();
        let lap = to_complex(&assemble_laplacian(&c, 1).unwrap());
        let mut rng = rng_for(9, "spectral");
        let w = random_cochain(&c, 1, &mut rng);

        // power(2) equals applying the assembled Laplacian twice
        let p2 = spectral_fn(&cache, SpectralFn::Power(2.0), &w).unwrap();
        let direct = &lap * (&lap * w.values());
        let err = (p2.values() - &direct).map(|z| z.norm()).max();
        let scale = direct.map(|z| z.norm()).max();
        assert!(err <= 1e-9 * scale);

        // pinv . Delta = identity off the kernel, zero on it
        let lw = w.with_values(&lap * w.values());
        let pinv_lw = spectral_fn(&cache, SpectralFn::Pinv, &lw).unwrap();
        let tol = cache.harmonic_tol();
        let nonkernel = w.with_values(cache.apply_fn(w.values(), |l| if l < tol { 0.0 } else { 1.0 }));
        let err = c.norm_l2(&pinv_lw.sub(&nonkernel).unwrap()).unwrap();
        assert!(err <= 1e-10 * c.norm_l2(&w).unwrap());

        // heat(0) is the identity
        let h0 = spectral_fn(&cache, SpectralFn::Heat(0.0), &w).unwrap();
        let err = c.norm_l2(&h0.sub(&w).unwrap()).unwrap();
        assert!(err <= 1e-11 * c.norm_l2(&w).unwrap());
    }

    #[test]
    fn laplacians_intertwine_with_d_and_delta() {
        let c = torus();
        let lap: Vec<DMatrix<f64>> = (0..=2).map(|k| assemble_laplacian(&c, k).unwrap()).collect();
        for k in 0..2 {
            let d = c.d_matrix(k);
            let comm = &d * &lap[k] - &lap[k + 1] * &d;
            let scale = weighted_op_norm(&to_complex(&(&d * &lap[k])), c.mass(k + 1), c.mass(k));
            let err = weighted_op_norm(&to_complex(&comm), c.mass(k + 1), c.mass(k));
            assert!(err <= 1e-12 * scale, "d Delta_{k}: {err} vs {scale}");
        }
        for k in 1..=2 {
            let delta = c.delta_matrix(k);
            let comm = &delta * &lap[k] - &lap[k - 1] * &delta;
            let scale = weighted_op_norm(&to_complex(&(&delta * &lap[k])), c.mass(k - 1), c.mass(k));
            let err = weighted_op_norm(&to_complex(&comm), c.mass(k - 1), c.mass(k));
            assert!(err <= 1e-12 * scale, "delta Delta_{k}: {err} vs {scale}");
        }
    }

    #[test]
    fn exp_neg_is_the_mollifier() {
        let c = torus();
        let cache = SpectralCache::build(&c, 1).unwrap();
        let mut rng = rng_for(21, "expneg");
        let w = random_cochain(&c, 1, &mut rng);
        let eps = 0.2;
        let a = spectral_fn(&cache, SpectralFn::ExpNeg(eps), &w).unwrap();
        let b = crate::cochain::mollify(&cache, &w, eps).unwrap();
        assert!(c.norm_l2(&a.sub(&b).unwrap()).unwrap() <= 1e-13 * c.norm_l2(&w).unwrap());
    }

    #[test]
    fn sqrt_shifted_squares_to_laplacian_plus_harmonic_shift() {
        let c = torus();
        let cache = SpectralCache::build(&c, 1).unwrap();
        let mu = 0.7;
        let tol = cache.harmonic_tol();
        let eps = cache.fn_matrix(|l| if l < tol { (l + mu * mu).sqrt() } else { l.sqrt() });
        let harmonic = cache.fn_matrix(|l| if l < tol { 1.0 } else { 0.0 });
        let lap = assemble_laplacian(&c, 1).unwrap();
        let resid = &eps * &eps - &lap - harmonic * (mu * mu);
        let norm = weighted_op_norm(&to_complex(&resid), c.mass(1), c.mass(1));
        assert!(norm <= 1e-10 * (1.0 + mu * mu));
    }

    #[test]
    fn singular_power_rejects_kernel_component() {
        let c = torus();
        let cache = SpectralCache::build(&c, 0).unwrap();
        let ones = Cochain::from_fn(&c, 0, |_| Complex64::ONE).unwrap();
        assert!(matches!(
            spectral_fn(&cache, SpectralFn::Power(-1.0), &ones),
            Err(Error::SingularOnKernel { .. })
        ));
        assert!(matches!(
            spectral_fn(&cache, SpectralFn::SqrtShifted(0.0), &ones),
            Err(Error::NonPositive { .. })
        ));
    }

    #[test]
    fn decompose_pure_cases() {
        let c = torus();
        let caches = SpectralCacheSet::build(&c).unwrap();
        let mut rng = rng_for(13, "decompose");

        let f = random_cochain(&c, 0, &mut rng);
        let df = c.d(&f).unwrap();
        let split = hodge_decompose(&c, &caches, &df).unwrap();
        let norm = c.norm_l2(&df).unwrap();
        assert!(c.norm_l2(&split.coexact).unwrap() <= 1e-9 * norm);
        assert!(c.norm_l2(&split.harmonic).unwrap() <= 1e-9 * norm);
        assert!(c.norm_l2(&split.exact.sub(&df).unwrap()).unwrap() <= 1e-9 * norm);

        // a harmonic eigenvector decomposes to its harmonic part alone
        let cache1 = caches.get(1).unwrap();
        assert!(cache1.is_harmonic_mode(0));
        let h = cache1.eigencochain(0);
        let split = hodge_decompose(&c, &caches, &h).unwrap();
        assert!(c.norm_l2(&split.exact).unwrap() <= 1e-9);
        assert!(c.norm_l2(&split.coexact).unwrap() <= 1e-9);
        assert!(c.norm_l2(&split.harmonic.sub(&h).unwrap()).unwrap() <= 1e-9);
    }

    #[test]
    fn decompose_random_reconstructs_orthogonally() {
        let c = torus();
        let caches = SpectralCacheSet::build(&c).unwrap();
        let cache1 = caches.get(1).unwrap();
        let mut rng = rng_for(17, "decompose-random");
        for _ in 0..25 {
            let w = random_cochain(&c, 1, &mut rng);
            let split = hodge_decompose(&c, &caches, &w).unwrap();
            let rec = split.reconstruct().unwrap();
            let norm = c.norm_l2(&w).unwrap();
            assert!(c.norm_l2(&rec.sub(&w).unwrap()).unwrap() <= 1e-10 * norm);
            for s in [0.0, 1.0, 2.0] {
                let pairs = [
                    (&split.exact, &split.coexact),
                    (&split.exact, &split.harmonic),
                    (&split.coexact, &split.harmonic),
                ];
                for (a, b) in pairs {
                    let ip = inner_sobolev(cache1, a, b, s).unwrap();
                    let na = inner_sobolev(cache1, a, a, s).unwrap().re.sqrt();
                    let nb = inner_sobolev(cache1, b, b, s).unwrap().re.sqrt();
                    let scale = (na * nb).max(1e-30);
                    assert!(ip.norm() <= 1e-10 * scale.max(norm * norm));
                }
            }
        }
    }

    #[test]
    fn decompose_matches_least_squares_oracle() {
        // independent oracle: project onto ran(d) and ran(delta) by direct
        // least squares (orthonormalized column spans), no spectral calculus
        let c = torus();
        let caches = SpectralCacheSet::build(&c).unwrap();
        let mut rng = rng_for(47, "lstsq-oracle");
        let lstsq_image = |a: &DMatrix<f64>, rhs: &DVector<Complex64>| -> DVector<Complex64> {
            crate::linalg::SubspaceProjector::new(&to_complex(a), c.mass(1), 1e-12).project(rhs)
        };
        for _ in 0..5 {
            let w = random_cochain(&c, 1, &mut rng);
            let split = hodge_decompose(&c, &caches, &w).unwrap();
            let norm = c.norm_l2(&w).unwrap();

            let exact_oracle = lstsq_image(&c.d_matrix(0), w.values());
            let err = (split.exact.values() - &exact_oracle).map(|z| z.norm()).max();
            assert!(err <= 1e-9 * norm, "exact: {err}");

            let coexact_oracle = lstsq_image(&c.delta_matrix(2), w.values());
            let err = (split.coexact.values() - &coexact_oracle).map(|z| z.norm()).max();
            assert!(err <= 1e-9 * norm, "coexact: {err}");

            let harmonic_oracle = w.values() - exact_oracle - coexact_oracle;
            let err = (split.harmonic.values() - harmonic_oracle).map(|z| z.norm()).max();
            assert!(err <= 1e-9 * norm, "harmonic: {err}");
        }
    }

    #[test]
    fn kernel_counts_match_rank_nullity_of_d() {
        // ker(d_1) = exact + harmonic and ker(delta_1) = coexact + harmonic,
        // as dimension counts via SVD ranks
        let c = torus();
        let caches = SpectralCacheSet::build(&c).unwrap();
        let b = caches.betti_numbers();
        let rank = |m: &DMatrix<f64>| -> usize {
            let sv = m.clone().svd(false, false).singular_values;
            let smax = sv.iter().cloned().fold(0.0f64, f64::max);
            sv.iter().filter(|&&s| s > 1e-10 * smax).count()
        };
        let n1 = c.num_simplices(1);
        let rank_d1 = rank(&c.d_matrix(1));
        let rank_d0 = rank(&c.d_matrix(0));
        // dim ker d_1 = dim exact + b_1
        assert_eq!(n1 - rank_d1, rank_d0 + b[1]);
        // dim ker delta_1 = dim coexact + b_1; delta and d^T have equal rank
        assert_eq!(n1 - rank_d0, rank_d1 + b[1]);
    }

    #[test]
    fn harmonic_basis_is_closed_and_coclosed() {
        for complex in [torus(), SimplicialComplex::icosphere(0, 1.0).unwrap()] {
            let caches = SpectralCacheSet::build(&complex).unwrap();
            for k in 0..=complex.dim() {
                let cache = caches.get(k).unwrap();
                for i in 0..cache.len() {
                    if !cache.is_harmonic_mode(i) {
                        continue;
                    }
                    let g = cache.eigencochain(i);
                    let mut total = 0.0;
                    if k < complex.dim() {
                        total += complex.norm_l2(&complex.d(&g).unwrap()).unwrap();
                    }
                    if k > 0 {
                        total += complex.norm_l2(&complex.delta(&g).unwrap()).unwrap();
                    }
                    assert!(total <= 1e-8);
                }
            }
        }
    }

    #[test]
    fn poisson_examples_and_direct_solve_oracle() {
        let c = torus();
        let cache0 = SpectralCache::build(&c, 0).unwrap();
        let mut rng = rng_for(19, "poisson");

        // w = d g with g mean-zero recovers g
        let g_raw = random_cochain(&c, 0, &mut rng);
        let tol = cache0.harmonic_tol();
        let g = g_raw.with_values(cache0.apply_fn(g_raw.values(), |l| if l < tol { 0.0 } else { 1.0 }));
        let a = solve_poisson(&c, &cache0, &c.d(&g).unwrap()).unwrap();
        assert!(c.norm_l2(&a.sub(&g).unwrap()).unwrap() <= 1e-9 * c.norm_l2(&g).unwrap());

        // coclosed right side gives zero
        let cache1 = SpectralCache::build(&c, 1).unwrap();
        let h = cache1.eigencochain(0);
        let a = solve_poisson(&c, &cache0, &h).unwrap();
        assert!(c.norm_l2(&a).unwrap() <= 1e-10);

        // random w: residual check plus dense direct-solve oracle
        let w = random_cochain(&c, 1, &mut rng);
        let a = solve_poisson(&c, &cache0, &w).unwrap();
        let lap = to_complex(&assemble_laplacian(&c, 0).unwrap());
        let rhs = c.delta(&w).unwrap();
        let residual = (&lap * a.values() - rhs.values()).map(|z| z.norm()).max();
        assert!(residual <= 1e-9 * rhs.values().map(|z| z.norm()).max());

        // oracle: LU solve of (Delta_0 + constants-projector) x = rhs
        let n0 = c.num_simplices(0);
        let vol: f64 = c.mass(0).iter().sum();
        let mut aug = assemble_laplacian(&c, 0).unwrap();
        for i in 0..n0 {
            for j in 0..n0 {
                aug[(i, j)] += c.mass(0)[j] / vol;
            }
        }
        let lu = aug.lu();
        let mut x_re = DVector::zeros(n0);
        let mut x_im = DVector::zeros(n0);
        let rhs_re = rhs.values().map(|z| z.re);
        let rhs_im = rhs.values().map(|z| z.im);
        x_re.copy_from(&lu.solve(&rhs_re).unwrap());
        x_im.copy_from(&lu.solve(&rhs_im).unwrap());
        // remove the weighted mean to land in the same gauge
        let mean_re: f64 = x_re.iter().zip(c.mass(0).iter()).map(|(x, m)| x * m).sum::<f64>() / vol;
        let mean_im: f64 = x_im.iter().zip(c.mass(0).iter()).map(|(x, m)| x * m).sum::<f64>() / vol;
        let oracle = DVector::from_fn(n0, |i, _| Complex64::new(x_re[i] - mean_re, x_im[i] - mean_im));
        let diff = (a.values() - &oracle).map(|z| z.norm()).max();
        assert!(diff <= 1e-9 * oracle.map(|z| z.norm()).max());
    }

    #[test]
    fn coulomb_projector_properties() {
        let c = torus();
        let cache0 = SpectralCache::build(&c, 0).unwrap();
        let pi = coulomb_projector(&c, &cache0).unwrap();
        let m1 = c.mass(1);

        let idem = &pi * &pi - &pi;
        assert!(weighted_op_norm(&to_complex(&idem), m1, m1) <= 1e-10);

        // self-adjoint in the Hodge inner product: M Pi = Pi^T M
        let mut mp = pi.clone();
        let mut pm = pi.transpose();
        for i in 0..mp.nrows() {
            for j in 0..mp.ncols() {
                mp[(i, j)] *= m1[i];
                pm[(i, j)] *= m1[j];
            }
        }
        assert!(weighted_op_norm(&to_complex(&(mp - pm)), m1, m1) <= 1e-10);

        let lap1 = assemble_laplacian(&c, 1).unwrap();
        let comm = &pi * &lap1 - &lap1 * &pi;
        let lam_max = SpectralCache::build(&c, 1).unwrap().eigenvalues().max();
        assert!(weighted_op_norm(&to_complex(&comm), m1, m1) <= 1e-10 * lam_max);
    }

    #[test]
    fn cache_json_round_trip() {
        let c = SimplicialComplex::circle(8, 8.0).unwrap();
        let cache = SpectralCache::build(&c, 0).unwrap();
        let text = cache.to_json();
        let back = SpectralCache::from_json(&c, &text).unwrap();
        assert_eq!(back.degree(), 0);
        assert_eq!(back.eigenvalues(), cache.eigenvalues());
        assert_eq!(back.basis(), cache.basis());
    }

    #[test]
    fn harmonic_tol_is_overridable() {
        let c = torus();
        // an absurdly large threshold classifies every mode as harmonic
        let cache = SpectralCache::build_with_tol(&c, 1, Some(1e9)).unwrap();
        assert_eq!(cache.betti(), c.num_simplices(1));
        assert_eq!(cache.smallest_nonzero_eigenvalue(), None);
        let caches = SpectralCacheSet::build_with_tol(&c, Some(1e-12)).unwrap();
        // a tighter-than-default threshold still clears the true kernel
        assert_eq!(caches.betti_numbers(), vec![1, 2, 1]);
    }

    #[test]
    fn cache_cap_and_missing_cache_errors() {
        let c = torus();
        let caches = SpectralCacheSet::build(&c).unwrap();
        assert!(matches!(caches.get(3), Err(Error::MissingCache { degree: 3 })));
        let cache1 = caches.get(1).unwrap();
        let w0 = Cochain::zeros(&c, 0).unwrap();
        assert!(matches!(cache1.check_owns(&w0), Err(Error::MissingCache { degree: 0 })));
    }
}
