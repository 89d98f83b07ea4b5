//! Complex-valued discrete k-forms and the first-order calculus: d, delta,
//! the Hodge inner product, Sobolev inner products and the mollifier family.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hodge::SpectralCache;
use crate::io;
use crate::mesh::{ComplexId, SimplicialComplex};

/// A discrete k-form: one complex value per oriented k-simplex.
#[derive(Clone, Debug, PartialEq)]
pub struct Cochain {
    degree: usize,
    values: DVector<Complex64>,
    complex_id: ComplexId,
}

impl Cochain {
    pub fn zeros(complex: &SimplicialComplex, degree: usize) -> Result<Self> {
        complex.check_degree(degree)?;
        Ok(Cochain {
            degree,
            values: DVector::from_element(complex.num_simplices(degree), Complex64::ZERO),
            complex_id: complex.id(),
        })
    }

    pub fn from_values(
        complex: &SimplicialComplex,
        degree: usize,
        values: DVector<Complex64>,
    ) -> Result<Self> {
        complex.check_degree(degree)?;
        if values.len() != complex.num_simplices(degree) {
            return Err(Error::LengthMismatch {
                degree,
                expected: complex.num_simplices(degree),
                got: values.len(),
            });
        }
        Ok(Cochain {
            degree,
            values,
            complex_id: complex.id(),
        })
    }

    pub fn from_fn(
        complex: &SimplicialComplex,
        degree: usize,
        mut f: impl FnMut(usize) -> Complex64,
    ) -> Result<Self> {
        let n = complex.num_simplices(degree);
        Self::from_values(complex, degree, DVector::from_fn(n, |i, _| f(i)))
    }

    /// Indicator cochain of a single simplex.
    pub fn indicator(complex: &SimplicialComplex, degree: usize, index: usize) -> Result<Self> {
        let mut c = Self::zeros(complex, degree)?;
        c.values[index] = Complex64::ONE;
        Ok(c)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn values(&self) -> &DVector<Complex64> {
        &self.values
    }

    pub fn complex_id(&self) -> ComplexId {
        self.complex_id
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn check_compatible(&self, other: &Cochain) -> Result<()> {
        if self.complex_id != other.complex_id {
            return Err(Error::ComplexMismatch);
        }
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch {
                left: self.degree,
                right: other.degree,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Cochain) -> Result<Cochain> {
        self.check_compatible(other)?;
        Ok(Cochain {
            degree: self.degree,
            values: &self.values + &other.values,
            complex_id: self.complex_id,
        })
    }

    pub fn sub(&self, other: &Cochain) -> Result<Cochain> {
        self.check_compatible(other)?;
        Ok(Cochain {
            degree: self.degree,
            values: &self.values - &other.values,
            complex_id: self.complex_id,
        })
    }

    pub fn scale(&self, factor: Complex64) -> Cochain {
        Cochain {
            degree: self.degree,
            values: &self.values * factor,
            complex_id: self.complex_id,
        }
    }

    pub(crate) fn with_values(&self, values: DVector<Complex64>) -> Cochain {
        Cochain {
            degree: self.degree,
            values,
            complex_id: self.complex_id,
        }
    }

    pub(crate) fn raw(
        degree: usize,
        values: DVector<Complex64>,
        complex_id: ComplexId,
    ) -> Cochain {
        Cochain {
            degree,
            values,
            complex_id,
        }
    }

    // ------------------------------------------------------------------
    // file format: CSV with a `#`-prefixed JSON sidecar line
    // ------------------------------------------------------------------

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "# {{\"degree\":{},\"complex\":\"{}\"}}\n",
            self.degree, self.complex_id
        ));
        out.push_str("simplex_index,re,im\n");
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{},{}\n", i, io::fmt_complex(v.re, v.im)));
        }
        out
    }

    pub fn from_csv(complex: &SimplicialComplex, text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let sidecar = lines
            .next()
            .ok_or_else(|| Error::Format("empty cochain file".into()))?;
        let sidecar = sidecar
            .strip_prefix('#')
            .ok_or_else(|| Error::Format("missing `#` sidecar line".into()))?
            .trim();
        #[derive(serde::Deserialize)]
        struct Sidecar {
            degree: usize,
            complex: String,
        }
        let meta: Sidecar = serde_json::from_str(sidecar)?;
        if meta.complex != complex.id().to_string() {
            return Err(Error::ComplexMismatch);
        }
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("missing cochain header row".into()))?;
        if header.trim() != "simplex_index,re,im" {
            return Err(Error::Format(format!("unexpected header `{header}`")));
        }
        let n = complex.num_simplices(meta.degree);
        let mut values = DVector::from_element(n, Complex64::ZERO);
        let mut seen = vec![false; n];
        let mut count = 0usize;
        for line in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let idx: usize = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Format(format!("bad row `{line}`")))?;
            let re: f64 = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Format(format!("bad row `{line}`")))?;
            let im: f64 = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Format(format!("bad row `{line}`")))?;
            if idx >= n {
                return Err(Error::Format(format!("simplex index {idx} out of range")));
            }
            if seen[idx] {
                return Err(Error::Format(format!("duplicate simplex index {idx}")));
            }
            seen[idx] = true;
            values[idx] = Complex64::new(re, im);
            count += 1;
        }
        if count != n {
            return Err(Error::LengthMismatch {
                degree: meta.degree,
                expected: n,
                got: count,
            });
        }
        Cochain::from_values(complex, meta.degree, values)
    }
}

impl SimplicialComplex {
    /// Exterior derivative (coboundary): transpose of the boundary incidence.
    pub fn d(&self, w: &Cochain) -> Result<Cochain> {
        self.check_owned(w)?;
        if w.degree() == self.dim() {
            return Err(Error::TopDegree { degree: w.degree() });
        }
        Ok(Cochain::raw(
            w.degree() + 1,
            self.apply_d(w.degree(), w.values()),
            self.id(),
        ))
    }

    /// Codifferential: the adjoint of d in the Hodge inner product,
    /// `delta = M_{k-1}^-1 d^T M_k`.
    pub fn delta(&self, w: &Cochain) -> Result<Cochain> {
        self.check_owned(w)?;
        if w.degree() == 0 {
            return Err(Error::DegreeZero);
        }
        Ok(Cochain::raw(
            w.degree() - 1,
            self.apply_delta(w.degree(), w.values()),
            self.id(),
        ))
    }

    /// Hodge inner product; conjugate-linear in the first argument.
    pub fn inner_l2(&self, a: &Cochain, b: &Cochain) -> Result<Complex64> {
        self.check_owned(a)?;
        self.check_owned(b)?;
        if a.degree() != b.degree() {
            return Err(Error::DegreeMismatch {
                left: a.degree(),
                right: b.degree(),
            });
        }
        Ok(crate::linalg::weighted_inner(
            a.values(),
            b.values(),
            self.mass(a.degree()),
        ))
    }

    pub fn norm_l2(&self, a: &Cochain) -> Result<f64> {
        Ok(self.inner_l2(a, a)?.re.max(0.0).sqrt())
    }

    fn check_owned(&self, w: &Cochain) -> Result<()> {
        if w.complex_id() != self.id() {
            return Err(Error::ComplexMismatch);
        }
        Ok(())
    }
}

/// Sobolev inner product `<E^{s/2} a, E^{s/2} b>_{L2}` with `E = 1 + Laplacian`,
/// applied spectrally. `s = 0` reduces to the Hodge inner product exactly.
pub fn inner_sobolev(
    cache: &SpectralCache,
    a: &Cochain,
    b: &Cochain,
    s: f64,
) -> Result<Complex64> {
    cache.check_owns(a)?;
    cache.check_owns(b)?;
    if s == 0.0 {
        // E^0 is the identity: agree with the Hodge inner product bitwise
        return Ok(crate::linalg::weighted_inner(
            a.values(),
            b.values(),
            cache.mass(),
        ));
    }
    let ca = cache.coefficients(a.values());
    let cb = cache.coefficients(b.values());
    let mut acc = Complex64::ZERO;
    for i in 0..ca.len() {
        let weight = (1.0 + cache.eigenvalues()[i]).powf(s);
        acc += ca[i].conj() * cb[i] * weight;
    }
    Ok(acc)
}

pub fn norm_sobolev(cache: &SpectralCache, a: &Cochain, s: f64) -> Result<f64> {
    Ok(inner_sobolev(cache, a, a, s)?.re.max(0.0).sqrt())
}

/// Mollifier `J_eps = exp(-eps E)`: damps the eigencomponent at eigenvalue
/// `lambda` by `exp(-eps (1 + lambda))`. A contraction in every Sobolev norm
/// that commutes with d and delta.
pub fn mollify(cache: &SpectralCache, w: &Cochain, eps: f64) -> Result<Cochain> {
    if eps <= 0.0 {
        return Err(Error::NonPositive { what: "eps", got: eps });
    }
    cache.check_owns(w)?;
    Ok(w.with_values(cache.apply_fn(w.values(), |lambda| (-eps * (1.0 + lambda)).exp())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hodge::SpectralCacheSet;
    use crate::sampling::{random_cochain, rng_for};

    fn torus() -> SimplicialComplex {
        SimplicialComplex::torus_lattice(4, 4, 1.0, 1.0).unwrap()
    }

    #[test]
    fn dd_is_zero() {
        let c = torus();
        let mut rng = rng_for(7, "dd");
        for _ in 0..20 {
            let w = random_cochain(&c, 0, &mut rng);
            let ddw = c.d(&c.d(&w).unwrap()).unwrap();
            // the incidence product is exactly zero; applied to floats the
            // cancellation leaves only rounding
            assert!(c.norm_l2(&ddw).unwrap() <= 1e-14 * c.norm_l2(&w).unwrap());
        }
    }

    #[test]
    fn d_of_constant_vanishes() {
        let c = torus();
        let ones = Cochain::from_fn(&c, 0, |_| Complex64::ONE).unwrap();
        let d = c.d(&ones).unwrap();
        assert_eq!(c.norm_l2(&d).unwrap(), 0.0);
    }

    #[test]
    fn d_indicator_on_circle_matches_incidence() {
        let c = SimplicialComplex::circle(4, 4.0).unwrap();
        let v = 1usize;
        let ind = Cochain::indicator(&c, 0, v).unwrap();
        let d = c.d(&ind).unwrap();
        // expected straight from the boundary incidence
        let b = c.boundary(1);
        for j in 0..c.num_simplices(1) {
            let expect: f64 = b
                .column(j)
                .iter()
                .filter(|&&(row, _)| row == v)
                .map(|&(_, s)| f64::from(s))
                .sum();
            assert_eq!(d.values()[j], Complex64::new(expect, 0.0));
        }
        let nonzero = d.values().iter().filter(|z| z.norm() > 0.0).count();
        assert_eq!(nonzero, 2);
    }

    #[test]
    fn d_delta_adjoint() {
        let c = torus();
        let mut rng = rng_for(3, "adjoint");
        for _ in 0..100 {
            let a = random_cochain(&c, 0, &mut rng);
            let b = random_cochain(&c, 1, &mut rng);
            let lhs = c.inner_l2(&c.d(&a).unwrap(), &b).unwrap();
            let rhs = c.inner_l2(&a, &c.delta(&b).unwrap()).unwrap();
            let scale = c.norm_l2(&a).unwrap() * c.norm_l2(&b).unwrap();
            assert!((lhs - rhs).norm() <= 1e-12 * scale.max(1.0));
        }
    }

    #[test]
    fn inner_l2_properties() {
        let c = torus();
        let mut rng = rng_for(11, "inner");
        let a = random_cochain(&c, 1, &mut rng);
        let b = random_cochain(&c, 1, &mut rng);
        let ab = c.inner_l2(&a, &b).unwrap();
        let ba = c.inner_l2(&b, &a).unwrap();
        assert!((ab - ba.conj()).norm() < 1e-13 * ab.norm().max(1.0));
        let aa = c.inner_l2(&a, &a).unwrap();
        assert!(aa.im.abs() < 1e-14 * aa.re);
        assert!(aa.re > 0.0);

        let v = 5usize;
        let ind = Cochain::indicator(&c, 0, v).unwrap();
        let norm2 = c.inner_l2(&ind, &ind).unwrap();
        assert!((norm2.re - c.dual_volume(0)[v]).abs() < 1e-15);
    }

    #[test]
    fn degree_and_complex_errors() {
        let c = torus();
        let other = SimplicialComplex::torus_lattice(4, 4, 2.0, 2.0).unwrap();
        let w2 = Cochain::zeros(&c, 2).unwrap();
        assert!(matches!(c.d(&w2), Err(Error::TopDegree { .. })));
        let w0 = Cochain::zeros(&c, 0).unwrap();
        assert!(matches!(c.delta(&w0), Err(Error::DegreeZero)));
        let foreign = Cochain::zeros(&other, 1).unwrap();
        assert!(matches!(c.d(&foreign), Err(Error::ComplexMismatch)));
        let w1 = Cochain::zeros(&c, 1).unwrap();
        assert!(matches!(c.inner_l2(&w0, &w1), Err(Error::DegreeMismatch { .. })));
        assert!(matches!(w0.add(&w1), Err(Error::DegreeMismatch { .. })));
    }

    #[test]
    fn sobolev_at_zero_matches_l2_and_monotone() {
        let c = torus();
        let caches = SpectralCacheSet::build(&c).unwrap();
        let cache = caches.get(1).unwrap();
        let mut rng = rng_for(23, "sobolev");
        for _ in 0..50 {
            let w = random_cochain(&c, 1, &mut rng);
            let l2 = c.inner_l2(&w, &w).unwrap().re;
            let s0 = inner_sobolev(cache, &w, &w, 0.0).unwrap().re;
            assert!((l2 - s0).abs() <= 1e-12 * l2);
            let grid = [0.0, 1.0, 2.0, 4.0];
            for (i, &s) in grid.iter().enumerate() {
                for &r in &grid[i..] {
                    let ns = norm_sobolev(cache, &w, s).unwrap();
                    let nr = norm_sobolev(cache, &w, r).unwrap();
                    assert!(ns <= nr * (1.0 + 1e-13));
                }
            }
        }
    }

    #[test]
    fn d_is_h_s_bounded() {
        let c = torus();
        let caches = SpectralCacheSet::build(&c).unwrap();
        let mut rng = rng_for(29, "dbound");
        for _ in 0..50 {
            let phi = random_cochain(&c, 0, &mut rng);
            let dphi = c.d(&phi).unwrap();
            for s in [1.0, 2.0, 3.0] {
                let lhs = norm_sobolev(caches.get(1).unwrap(), &dphi, s - 1.0).unwrap();
                let rhs = norm_sobolev(caches.get(0).unwrap(), &phi, s).unwrap();
                assert!(lhs <= rhs, "s={s}: {lhs} > {rhs}");
            }
        }
    }

    #[test]
    fn mollifier_commutes_with_d_and_converges() {
        let c = torus();
        let caches = SpectralCacheSet::build(&c).unwrap();
        let mut rng = rng_for(31, "mollify");
        let w = random_cochain(&c, 0, &mut rng);
        let eps = 0.05;
        let lhs = c.d(&mollify(caches.get(0).unwrap(), &w, eps).unwrap()).unwrap();
        let rhs = mollify(caches.get(1).unwrap(), &c.d(&w).unwrap(), eps).unwrap();
        let diff = lhs.sub(&rhs).unwrap();
        let scale = c.norm_l2(&rhs).unwrap();
        assert!(c.norm_l2(&diff).unwrap() <= 1e-10 * scale);

        let mut last = f64::INFINITY;
        for eps in [1.0, 0.1, 0.01, 0.001] {
            let jw = mollify(caches.get(0).unwrap(), &w, eps).unwrap();
            let err = c.norm_l2(&jw.sub(&w).unwrap()).unwrap();
            assert!(err < last);
            last = err;
        }

        let z = Cochain::zeros(&c, 0).unwrap();
        let jz = mollify(caches.get(0).unwrap(), &z, 0.5).unwrap();
        assert_eq!(c.norm_l2(&jz).unwrap(), 0.0);
    }

    #[test]
    fn d_delta_adjoint_in_every_sobolev_norm() {
        let c = torus();
        let caches = SpectralCacheSet::build(&c).unwrap();
        let mut rng = rng_for(43, "hs-adjoint");
        for _ in 0..25 {
            let a = random_cochain(&c, 0, &mut rng);
            let b = random_cochain(&c, 1, &mut rng);
            let da = c.d(&a).unwrap();
            let deltab = c.delta(&b).unwrap();
            for s in [0.0, 0.5, 1.0, 2.0] {
                let lhs = inner_sobolev(caches.get(1).unwrap(), &da, &b, s).unwrap();
                let rhs = inner_sobolev(caches.get(0).unwrap(), &a, &deltab, s).unwrap();
                let scale = norm_sobolev(caches.get(1).unwrap(), &da, s).unwrap()
                    * norm_sobolev(caches.get(1).unwrap(), &b, s).unwrap();
                assert!((lhs - rhs).norm() <= 1e-10 * scale.max(1.0), "s={s}");
            }
        }
    }

    #[test]
    fn mollifier_is_a_contraction_in_h_s() {
        let c = torus();
        let caches = SpectralCacheSet::build(&c).unwrap();
        let cache = caches.get(1).unwrap();
        let mut rng = rng_for(37, "contraction");
        for _ in 0..30 {
            let w = random_cochain(&c, 1, &mut rng);
            for s in [0.0, 0.5, 1.0, 2.0] {
                let jw = mollify(cache, &w, 0.01).unwrap();
                let num = norm_sobolev(cache, &jw, s).unwrap();
                let den = norm_sobolev(cache, &w, s).unwrap();
                assert!(num <= den);
            }
        }
    }

    #[test]
    fn csv_round_trip() {
        let c = torus();
        let mut rng = rng_for(41, "csv");
        let w = random_cochain(&c, 1, &mut rng);
        let text = w.to_csv();
        let back = Cochain::from_csv(&c, &text).unwrap();
        assert_eq!(w, back);

        let other = SimplicialComplex::torus_lattice(5, 5, 1.0, 1.0).unwrap();
        assert!(matches!(Cochain::from_csv(&other, &text), Err(Error::ComplexMismatch)));
    }
}
