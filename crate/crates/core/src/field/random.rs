//! Random band-limited fields and range-compatible sinograms for tests and
//! noise generation.

use num_complex::Complex;
use rand::Rng;

use super::{TorusField, TorusSinogram};
use crate::lattice::{band_frequencies, FrequencyIndex, SubspaceFamily};
use crate::scalar::Real;

fn uniform<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    T::lit(rng.gen_range(-1.0..1.0))
}

fn uniform_complex<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Complex<T> {
    let re = uniform(rng);
    Complex::new(re, uniform(rng))
}

/// Coefficients uniform in `[−1, 1] + i[−1, 1]` on the whole band. Real
/// fields draw one value per pair `±k` and a real mean.
pub fn random_field<T: Real, R: Rng + ?Sized>(dim: usize, band: i64, real: bool, rng: &mut R) -> TorusField<T> {
    let mut f = TorusField::zeros(dim, band);
    for k in band_frequencies(dim, band) {
        if !real {
            f.set(k, uniform_complex(rng)).expect("in band");
            continue;
        }
        let minus = k.neg();
        if k.is_zero() {
            f.set(k, Complex::new(uniform(rng), T::zero())).expect("in band");
        } else if k > minus {
            let c: Complex<T> = uniform_complex(rng);
            f.set(minus, c.conj()).expect("in band");
            f.set(k, c).expect("in band");
        }
    }
    f.set_real_flag(real);
    f
}

/// A random element of the data space over `family`: for every `k ≠ 0` in
/// the band and every `A ∈ Ω_k` an independent value, plus a random mean.
/// With `real` set, each slice is Hermitian and the mean is real.
pub fn random_sinogram<T: Real, R: Rng + ?Sized>(
    family: &SubspaceFamily,
    band: i64,
    real: bool,
    rng: &mut R,
) -> TorusSinogram<T> {
    let dim = family.dim();
    let mean = if real { Complex::new(uniform(rng), T::zero()) } else { uniform_complex(rng) };
    let mut slices: Vec<TorusField<T>> = (0..family.len()).map(|_| TorusField::zeros(dim, band)).collect();
    for k in band_frequencies(dim, band) {
        if k.is_zero() {
            continue;
        }
        let minus = k.neg();
        if real && k < minus {
            continue;
        }
        for i in family.omega(&k) {
            let c: Complex<T> = uniform_complex(rng);
            if real {
                slices[i].set(minus.clone(), c.conj()).expect("in band");
            }
            slices[i].set(k.clone(), c).expect("in band");
        }
    }
    let mut g = TorusSinogram::new(dim, family.sub_dim(), band, mean).expect("family dimensions are valid");
    for (a, mut f) in family.members().iter().zip(slices) {
        if f.stored_len() > 0 {
            f.set_real_flag(real);
            g.insert_slice(a.clone(), f).expect("slice matches family");
        }
    }
    g
}

/// Zero-mean copy of `f`.
pub fn without_mean<T: Real>(f: &TorusField<T>) -> TorusField<T> {
    let mut out = f.clone();
    out.remove(&FrequencyIndex::zero(f.dim()));
    out
}
