//! Maxwell Cauchy data on the surface and its constraint algebra: the
//! gauge-injection operator `K` and its adjoint `K+` (whose kernel carries
//! the physical phase space), the Hermitian forms `q0`/`q1`, the radiation
//! projector `T`, and the gauge-fixing map onto radiation-gauge data.
//!
//! Data layout follows the first-order split of the vector potential
//! `A = A0 dt + AS` into `(a0, pi0, aS, piS)` where the momenta are
//! `i^-1 d/dt` of the fields at t = 0.
//!
//! On a compact surface the Coulomb condition does not imply the temporal
//! one (constants are harmonic scalars), so [`check_constraints`] reports
//! the temporal and Coulomb residuals separately and never infers one from
//! the other.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::cochain::Cochain;
use crate::error::{Error, Result};
use crate::hodge::{solve_poisson, SpectralCache};
use crate::linalg::to_complex;
use crate::mesh::{ComplexId, SimplicialComplex};

/// Default residual tolerance for "is constraint data" checks.
pub const CONSTRAINT_TOL: f64 = 1e-8;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Cauchy data for the vector potential: `(a0, pi0, aS, piS)` with the two
/// scalar blocks of degree 0 and the two spatial blocks of degree 1.
#[derive(Clone, Debug, PartialEq)]
pub struct MaxwellData {
    pub a0: Cochain,
    pub pi0: Cochain,
    pub a_sigma: Cochain,
    pub pi_sigma: Cochain,
}

/// Cauchy data for a gauge scalar: `(a, pi)`, both of degree 0.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeData {
    pub a: Cochain,
    pub pi: Cochain,
}

impl MaxwellData {
    pub fn new(a0: Cochain, pi0: Cochain, a_sigma: Cochain, pi_sigma: Cochain) -> Result<Self> {
        let id = a0.complex_id();
        for (c, deg) in [(&a0, 0), (&pi0, 0), (&a_sigma, 1), (&pi_sigma, 1)] {
            if c.complex_id() != id {
                return Err(Error::ComplexMismatch);
            }
            if c.degree() != deg {
                return Err(Error::DegreeMismatch {
                    left: c.degree(),
                    right: deg,
                });
            }
        }
        Ok(MaxwellData {
            a0,
            pi0,
            a_sigma,
            pi_sigma,
        })
    }

    pub fn zeros(complex: &SimplicialComplex) -> Result<Self> {
        Ok(MaxwellData {
            a0: Cochain::zeros(complex, 0)?,
            pi0: Cochain::zeros(complex, 0)?,
            a_sigma: Cochain::zeros(complex, 1)?,
            pi_sigma: Cochain::zeros(complex, 1)?,
        })
    }

    pub fn complex_id(&self) -> ComplexId {
        self.a0.complex_id()
    }

    pub fn add(&self, other: &MaxwellData) -> Result<MaxwellData> {
        Ok(MaxwellData {
            a0: self.a0.add(&other.a0)?,
            pi0: self.pi0.add(&other.pi0)?,
            a_sigma: self.a_sigma.add(&other.a_sigma)?,
            pi_sigma: self.pi_sigma.add(&other.pi_sigma)?,
        })
    }

    pub fn sub(&self, other: &MaxwellData) -> Result<MaxwellData> {
        Ok(MaxwellData {
            a0: self.a0.sub(&other.a0)?,
            pi0: self.pi0.sub(&other.pi0)?,
            a_sigma: self.a_sigma.sub(&other.a_sigma)?,
            pi_sigma: self.pi_sigma.sub(&other.pi_sigma)?,
        })
    }

    pub fn scale(&self, factor: Complex64) -> MaxwellData {
        MaxwellData {
            a0: self.a0.scale(factor),
            pi0: self.pi0.scale(factor),
            a_sigma: self.a_sigma.scale(factor),
            pi_sigma: self.pi_sigma.scale(factor),
        }
    }

    /// Flatten to `(a0 | pi0 | aS | piS)` for matrix operators.
    pub fn pack(&self) -> DVector<Complex64> {
        let (n0, n1) = (self.a0.len(), self.a_sigma.len());
        let mut out = DVector::from_element(2 * n0 + 2 * n1, Complex64::ZERO);
        out.rows_mut(0, n0).copy_from(self.a0.values());
        out.rows_mut(n0, n0).copy_from(self.pi0.values());
        out.rows_mut(2 * n0, n1).copy_from(self.a_sigma.values());
        out.rows_mut(2 * n0 + n1, n1).copy_from(self.pi_sigma.values());
        out
    }

    pub fn unpack(complex: &SimplicialComplex, v: &DVector<Complex64>) -> Result<Self> {
        let (n0, n1) = (complex.num_simplices(0), complex.num_simplices(1));
        if v.len() != 2 * n0 + 2 * n1 {
            return Err(Error::LengthMismatch {
                degree: 1,
                expected: 2 * n0 + 2 * n1,
                got: v.len(),
            });
        }
        Ok(MaxwellData {
            a0: Cochain::from_values(complex, 0, v.rows(0, n0).clone_owned())?,
            pi0: Cochain::from_values(complex, 0, v.rows(n0, n0).clone_owned())?,
            a_sigma: Cochain::from_values(complex, 1, v.rows(2 * n0, n1).clone_owned())?,
            pi_sigma: Cochain::from_values(complex, 1, v.rows(2 * n0 + n1, n1).clone_owned())?,
        })
    }

    /// Serialize as four cochain CSV blocks with section headers.
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        for (name, c) in [
            ("[a0]", &self.a0),
            ("[pi0]", &self.pi0),
            ("[aS]", &self.a_sigma),
            ("[piS]", &self.pi_sigma),
        ] {
            out.push_str(name);
            out.push('\n');
            out.push_str(&c.to_csv());
        }
        out
    }

    pub fn from_file_string(complex: &SimplicialComplex, text: &str) -> Result<Self> {
        let mut sections: Vec<(String, String)> = Vec::new();
        for line in text.lines() {
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| Error::Format(format!("bad section header `{line}`")))?;
                sections.push((name.to_string(), String::new()));
            } else if let Some((_, body)) = sections.last_mut() {
                body.push_str(line);
                body.push('\n');
            } else if !line.trim().is_empty() {
                return Err(Error::Format("data before first section header".into()));
            }
        }
        let get = |want: &str| -> Result<Cochain> {
            let (_, body) = sections
                .iter()
                .find(|(name, _)| name == want)
                .ok_or_else(|| Error::Format(format!("missing section [{want}]")))?;
            Cochain::from_csv(complex, body)
        };
        MaxwellData::new(get("a0")?, get("pi0")?, get("aS")?, get("piS")?)
    }
}

impl GaugeData {
    pub fn new(a: Cochain, pi: Cochain) -> Result<Self> {
        if a.complex_id() != pi.complex_id() {
            return Err(Error::ComplexMismatch);
        }
        for c in [&a, &pi] {
            if c.degree() != 0 {
                return Err(Error::DegreeMismatch {
                    left: c.degree(),
                    right: 0,
                });
            }
        }
        Ok(GaugeData { a, pi })
    }

    pub fn zeros(complex: &SimplicialComplex) -> Result<Self> {
        Ok(GaugeData {
            a: Cochain::zeros(complex, 0)?,
            pi: Cochain::zeros(complex, 0)?,
        })
    }

    pub fn pack(&self) -> DVector<Complex64> {
        let n0 = self.a.len();
        let mut out = DVector::from_element(2 * n0, Complex64::ZERO);
        out.rows_mut(0, n0).copy_from(self.a.values());
        out.rows_mut(n0, n0).copy_from(self.pi.values());
        out
    }
}

/// Weights of the fiducial inner product on packed Maxwell data.
pub fn v_rho1_weights(complex: &SimplicialComplex) -> DVector<f64> {
    let m0 = complex.mass(0);
    let m1 = complex.mass(1);
    let (n0, n1) = (m0.len(), m1.len());
    let mut w = DVector::zeros(2 * n0 + 2 * n1);
    w.rows_mut(0, n0).copy_from(m0);
    w.rows_mut(n0, n0).copy_from(m0);
    w.rows_mut(2 * n0, n1).copy_from(m1);
    w.rows_mut(2 * n0 + n1, n1).copy_from(m1);
    w
}

pub fn v_rho0_weights(complex: &SimplicialComplex) -> DVector<f64> {
    let m0 = complex.mass(0);
    let n0 = m0.len();
    let mut w = DVector::zeros(2 * n0);
    w.rows_mut(0, n0).copy_from(m0);
    w.rows_mut(n0, n0).copy_from(m0);
    w
}

/// Fiducial inner product on Maxwell data (sum of the four Hodge products).
pub fn inner_v1(complex: &SimplicialComplex, f: &MaxwellData, g: &MaxwellData) -> Result<Complex64> {
    Ok(complex.inner_l2(&f.a0, &g.a0)?
        + complex.inner_l2(&f.pi0, &g.pi0)?
        + complex.inner_l2(&f.a_sigma, &g.a_sigma)?
        + complex.inner_l2(&f.pi_sigma, &g.pi_sigma)?)
}

pub fn norm_v1(complex: &SimplicialComplex, f: &MaxwellData) -> Result<f64> {
    Ok(inner_v1(complex, f, f)?.re.max(0.0).sqrt())
}

pub fn inner_v0(complex: &SimplicialComplex, x: &GaugeData, y: &GaugeData) -> Result<Complex64> {
    Ok(complex.inner_l2(&x.a, &y.a)? + complex.inner_l2(&x.pi, &y.pi)?)
}

pub fn norm_v0(complex: &SimplicialComplex, x: &GaugeData) -> Result<f64> {
    Ok(inner_v0(complex, x, x)?.re.max(0.0).sqrt())
}

/// Surface gauge injection: `K (a, pi) = (i pi, i Lap0 a, d a, d pi)`.
/// Its range is the pure-gauge directions inside the Cauchy data.
pub fn k_sigma(complex: &SimplicialComplex, g: &GaugeData) -> Result<MaxwellData> {
    let lap_a = complex.delta(&complex.d(&g.a)?)?;
    MaxwellData::new(
        g.pi.scale(I),
        lap_a.scale(I),
        complex.d(&g.a)?,
        complex.d(&g.pi)?,
    )
}

/// Adjoint of [`k_sigma`] w.r.t. the forms `q0`/`q1`: the surface Lorenz
/// constraint `K+ f = (delta aS + i pi0, i Lap0 a0 + delta piS)`.
pub fn k_sigma_dagger(complex: &SimplicialComplex, f: &MaxwellData) -> Result<GaugeData> {
    let lap_a0 = complex.delta(&complex.d(&f.a0)?)?;
    GaugeData::new(
        complex.delta(&f.a_sigma)?.add(&f.pi0.scale(I))?,
        lap_a0.scale(I).add(&complex.delta(&f.pi_sigma)?)?,
    )
}

/// Hermitian form on gauge data, `q0(x, y) = <a_x, pi_y> + <pi_x, a_y>`.
pub fn q0_sigma(complex: &SimplicialComplex, x: &GaugeData, y: &GaugeData) -> Result<Complex64> {
    Ok(complex.inner_l2(&x.a, &y.pi)? + complex.inner_l2(&x.pi, &y.a)?)
}

/// Hermitian form on Maxwell data,
/// `q1(f, g) = -<a0_f, pi0_g> - <pi0_f, a0_g> + <aS_f, piS_g> + <piS_f, aS_g>`.
/// This is `i (f, G1 g)` for the surface causal-propagator matrix `G1`.
pub fn q1_sigma(complex: &SimplicialComplex, f: &MaxwellData, g: &MaxwellData) -> Result<Complex64> {
    Ok(-complex.inner_l2(&f.a0, &g.pi0)? - complex.inner_l2(&f.pi0, &g.a0)?
        + complex.inner_l2(&f.a_sigma, &g.pi_sigma)?
        + complex.inner_l2(&f.pi_sigma, &g.a_sigma)?)
}

/// Temporal-gauge extractor in its ultrastatic form: keeps `(a0, pi0)`.
pub fn r_sigma(complex: &SimplicialComplex, f: &MaxwellData) -> Result<MaxwellData> {
    MaxwellData::new(
        f.a0.clone(),
        f.pi0.clone(),
        Cochain::zeros(complex, 1)?,
        Cochain::zeros(complex, 1)?,
    )
}

/// Radiation projector `T = diag(0, 0, Pi, Pi)` built from the Coulomb
/// projector `Pi` on 1-cochains.
pub fn t_sigma(
    complex: &SimplicialComplex,
    f: &MaxwellData,
    coulomb: &DMatrix<f64>,
) -> Result<MaxwellData> {
    let pi_c = to_complex(coulomb);
    MaxwellData::new(
        Cochain::zeros(complex, 0)?,
        Cochain::zeros(complex, 0)?,
        Cochain::from_values(complex, 1, &pi_c * f.a_sigma.values())?,
        Cochain::from_values(complex, 1, &pi_c * f.pi_sigma.values())?,
    )
}

/// Residuals of the gauge conditions on Cauchy data.
#[derive(Clone, Debug)]
pub struct ConstraintReport {
    /// `(|delta aS + i pi0|, |i Lap0 a0 + delta piS|)`
    pub lorenz: [f64; 2],
    /// `(|a0|, |pi0|)`
    pub temporal: [f64; 2],
    /// `(|delta aS|, |delta piS|)`
    pub coulomb: [f64; 2],
    pub radiation_ok: bool,
    pub tol: f64,
}

impl ConstraintReport {
    pub fn lorenz_residual(&self) -> f64 {
        self.lorenz[0].max(self.lorenz[1])
    }

    pub fn temporal_residual(&self) -> f64 {
        self.temporal[0].max(self.temporal[1])
    }

    pub fn coulomb_residual(&self) -> f64 {
        self.coulomb[0].max(self.coulomb[1])
    }

    pub fn rows(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("lorenz_constraint_first", self.lorenz[0]),
            ("lorenz_constraint_second", self.lorenz[1]),
            ("temporal_a0", self.temporal[0]),
            ("temporal_pi0", self.temporal[1]),
            ("coulomb_a_sigma", self.coulomb[0]),
            ("coulomb_pi_sigma", self.coulomb[1]),
        ]
    }
}

/// Evaluate all gauge-condition residuals at tolerance `tol`.
pub fn check_constraints(
    complex: &SimplicialComplex,
    f: &MaxwellData,
    tol: f64,
) -> Result<ConstraintReport> {
    let kf = k_sigma_dagger(complex, f)?;
    let lorenz = [complex.norm_l2(&kf.a)?, complex.norm_l2(&kf.pi)?];
    let temporal = [complex.norm_l2(&f.a0)?, complex.norm_l2(&f.pi0)?];
    let coulomb = [
        complex.norm_l2(&complex.delta(&f.a_sigma)?)?,
        complex.norm_l2(&complex.delta(&f.pi_sigma)?)?,
    ];
    let radiation_ok = lorenz
        .iter()
        .chain(&temporal)
        .chain(&coulomb)
        .all(|&r| r <= tol);
    Ok(ConstraintReport {
        lorenz,
        temporal,
        coulomb,
        radiation_ok,
        tol,
    })
}

/// Fix the Cauchy radiation gauge on constraint data.
///
/// For `f` with `K+ f = 0` (checked, relative tolerance
/// [`CONSTRAINT_TOL`]), solves the surface system: `a` is the mean-zero
/// solution of `Lap0 a = delta aS` and `pi = -i a0`, and returns
/// `(f - K (a, pi), (a, pi))`. The fixed data satisfies
/// `a0 = pi0 = 0`, `delta aS = delta piS = 0` and coincides with `T f`.
pub fn gauge_fix(
    complex: &SimplicialComplex,
    cache0: &SpectralCache,
    f: &MaxwellData,
) -> Result<(MaxwellData, GaugeData)> {
    let kf = k_sigma_dagger(complex, f)?;
    let residual = norm_v0(complex, &kf)?;
    let scale = norm_v1(complex, f)?.max(1.0);
    if residual > CONSTRAINT_TOL * scale {
        return Err(Error::ConstraintViolation {
            residual,
            tol: CONSTRAINT_TOL * scale,
        });
    }
    let a = solve_poisson(complex, cache0, &f.a_sigma)?;
    let pi = f.a0.scale(-I);
    let gauge = GaugeData::new(a, pi)?;
    let fixed = f.sub(&k_sigma(complex, &gauge)?)?;
    Ok((fixed, gauge))
}

// ----------------------------------------------------------------------
// dense operator assembly (verification and the build-state artifact)
// ----------------------------------------------------------------------

fn real_block(
    dst: &mut DMatrix<Complex64>,
    row: usize,
    col: usize,
    block: &DMatrix<f64>,
    factor: Complex64,
) {
    for i in 0..block.nrows() {
        for j in 0..block.ncols() {
            dst[(row + i, col + j)] = factor * block[(i, j)];
        }
    }
}

/// `K` as a dense matrix from packed gauge data to packed Maxwell data.
pub fn k_sigma_matrix(complex: &SimplicialComplex) -> DMatrix<Complex64> {
    let (n0, n1) = (complex.num_simplices(0), complex.num_simplices(1));
    let lap0 = complex.delta_matrix(1) * complex.d_matrix(0);
    let d0 = complex.d_matrix(0);
    let eye = DMatrix::<f64>::identity(n0, n0);
    let mut k = DMatrix::from_element(2 * n0 + 2 * n1, 2 * n0, Complex64::ZERO);
    real_block(&mut k, 0, n0, &eye, I);
    real_block(&mut k, n0, 0, &lap0, I);
    real_block(&mut k, 2 * n0, 0, &d0, Complex64::ONE);
    real_block(&mut k, 2 * n0 + n1, n0, &d0, Complex64::ONE);
    k
}

/// `K+` as a dense matrix from packed Maxwell data to packed gauge data.
pub fn k_sigma_dagger_matrix(complex: &SimplicialComplex) -> DMatrix<Complex64> {
    let (n0, n1) = (complex.num_simplices(0), complex.num_simplices(1));
    let lap0 = complex.delta_matrix(1) * complex.d_matrix(0);
    let delta1 = complex.delta_matrix(1);
    let eye = DMatrix::<f64>::identity(n0, n0);
    let mut k = DMatrix::from_element(2 * n0, 2 * n0 + 2 * n1, Complex64::ZERO);
    real_block(&mut k, 0, n0, &eye, I);
    real_block(&mut k, 0, 2 * n0, &delta1, Complex64::ONE);
    real_block(&mut k, n0, 0, &lap0, I);
    real_block(&mut k, n0, 2 * n0 + n1, &delta1, Complex64::ONE);
    k
}

/// `T = diag(0, 0, Pi, Pi)` as a dense matrix on packed Maxwell data.
pub fn t_sigma_matrix(complex: &SimplicialComplex, coulomb: &DMatrix<f64>) -> DMatrix<Complex64> {
    let (n0, n1) = (complex.num_simplices(0), complex.num_simplices(1));
    let mut t = DMatrix::from_element(2 * n0 + 2 * n1, 2 * n0 + 2 * n1, Complex64::ZERO);
    real_block(&mut t, 2 * n0, 2 * n0, coulomb, Complex64::ONE);
    real_block(&mut t, 2 * n0 + n1, 2 * n0 + n1, coulomb, Complex64::ONE);
    t
}

/// The surface pairing matrix `G1` with `q1(f, g) = i (f, G1 g)`.
pub fn g1_sigma_matrix(complex: &SimplicialComplex) -> DMatrix<Complex64> {
    let (n0, n1) = (complex.num_simplices(0), complex.num_simplices(1));
    let eye0 = DMatrix::<f64>::identity(n0, n0);
    let eye1 = DMatrix::<f64>::identity(n1, n1);
    let mut g = DMatrix::from_element(2 * n0 + 2 * n1, 2 * n0 + 2 * n1, Complex64::ZERO);
    // (1/i) * (0, -1; -1, 0) on the scalar blocks and (0, 1; 1, 0) on the
    // spatial blocks
    real_block(&mut g, 0, n0, &eye0, I);
    real_block(&mut g, n0, 0, &eye0, I);
    real_block(&mut g, 2 * n0, 2 * n0 + n1, &eye1, -I);
    real_block(&mut g, 2 * n0 + n1, 2 * n0, &eye1, -I);
    g
}
