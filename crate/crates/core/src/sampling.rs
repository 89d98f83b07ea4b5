//! Deterministic random data for verification trials.
//!
//! One 64-bit seed expands into independent streams: the stream key is
//! `splitmix64(seed ^ fnv1a(label))`, fed to ChaCha8. Identical seeds and
//! labels replay identical trials on every platform.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::cochain::Cochain;
use crate::hodge::{solve_poisson, SpectralCache};
use crate::linalg::{splitmix64, Fnv1a};
use crate::maxwell::{GaugeData, MaxwellData};
use crate::mesh::SimplicialComplex;

/// Independent generator for the stream named by `label`.
pub fn rng_for(seed: u64, label: &str) -> ChaCha8Rng {
    let mut h = Fnv1a::new();
    h.write(label.as_bytes());
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ h.finish()))
}

/// Generator for trial `index` of the stream named by `label`.
pub fn rng_for_trial(seed: u64, label: &str, index: u64) -> ChaCha8Rng {
    let mut h = Fnv1a::new();
    h.write(label.as_bytes());
    h.write_u64(index);
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ h.finish()))
}

/// Standard complex Gaussian vector in the simplex basis.
pub fn random_values(n: usize, rng: &mut impl Rng) -> DVector<Complex64> {
    DVector::from_fn(n, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Random k-cochain with i.i.d. standard complex Gaussian entries.
pub fn random_cochain(complex: &SimplicialComplex, degree: usize, rng: &mut impl Rng) -> Cochain {
    Cochain::from_values(complex, degree, random_values(complex.num_simplices(degree), rng))
        .expect("degree in range")
}

pub fn random_gauge(complex: &SimplicialComplex, rng: &mut impl Rng) -> GaugeData {
    GaugeData::new(random_cochain(complex, 0, rng), random_cochain(complex, 0, rng))
        .expect("matching complexes")
}

pub fn random_maxwell(complex: &SimplicialComplex, rng: &mut impl Rng) -> MaxwellData {
    MaxwellData::new(
        random_cochain(complex, 0, rng),
        random_cochain(complex, 0, rng),
        random_cochain(complex, 1, rng),
        random_cochain(complex, 1, rng),
    )
    .expect("matching complexes")
}

/// Random element of `ker(K+)`: the free parameters are `a0`, `aS` and a
/// coclosed part of `piS`; the sampler then sets `pi0 = i delta aS` and
/// `piS = -i d a0 + coclosed`, which parametrizes the kernel exactly.
pub fn random_constrained(
    complex: &SimplicialComplex,
    cache0: &SpectralCache,
    rng: &mut impl Rng,
) -> MaxwellData {
    let i = num_complex::Complex64::new(0.0, 1.0);
    let a0 = random_cochain(complex, 0, rng);
    let a_sigma = random_cochain(complex, 1, rng);
    let pi0 = complex.delta(&a_sigma).expect("degree 1").scale(i);
    let raw = random_cochain(complex, 1, rng);
    let potential = solve_poisson(complex, cache0, &raw).expect("poisson solve");
    let coclosed = raw
        .sub(&complex.d(&potential).expect("degree 0"))
        .expect("same complex");
    let pi_sigma = coclosed
        .sub(&complex.d(&a0).expect("degree 0").scale(i))
        .expect("same complex");
    MaxwellData::new(a0, pi0, a_sigma, pi_sigma).expect("matching complexes")
}
