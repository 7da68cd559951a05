//! Band-limited periodic fields on `Tⁿ`, their sinograms, weights and norms.
//!
//! A [`TorusField`] stores Fourier coefficients `f̂(k)` for `|k|_∞ ≤ K`;
//! absent keys are zero. The band is the universal discretization: on it
//! every transform identity holds exactly, so norms are evaluated directly
//! on coefficients and grids are only used for `Lᵖ` norms with `p ≠ 2`.

pub mod io;
pub mod random;
mod sinogram;
mod weight;

use std::collections::BTreeMap;

use num_complex::Complex;
use rustfft::FftDirection;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::{fft_nd, wrapped_index};
use crate::lattice::{band_frequencies, FrequencyIndex};
use crate::scalar::{bracket_pow2, cis_turns, Real};

pub use sinogram::{
    data_sobolev_norm, enforce_moment_constraint, enforce_moment_constraint_unweighted, sinogram_inner,
    sinogram_norm, sinogram_norm_on_grid, RawSinogram, TorusSinogram,
};
pub use weight::{complete_cover_height, weight_build, WeightKind, WeightRule, WeightTable};

/// Exponent of a discrete `Lᵖ` norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LpExponent {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "inf")]
    Infinity,
}

impl std::str::FromStr for LpExponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" => Ok(LpExponent::One),
            "2" => Ok(LpExponent::Two),
            "inf" | "infinity" => Ok(LpExponent::Infinity),
            _ => Err(Error::Parse(format!("exponent must be 1, 2 or inf, got {s:?}"))),
        }
    }
}

/// Truncated Fourier series on `Tⁿ` with band `|k|_∞ ≤ band`.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusField<T: Real> {
    dim: usize,
    band: i64,
    real: bool,
    coeffs: BTreeMap<FrequencyIndex, Complex<T>>,
}

pub(crate) fn czero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

impl<T: Real> TorusField<T> {
    pub fn zeros(dim: usize, band: i64) -> Self {
        TorusField { dim, band, real: true, coeffs: BTreeMap::new() }
    }

    pub fn constant(dim: usize, value: T) -> Self {
        let mut f = Self::zeros(dim, 0);
        f.coeffs.insert(FrequencyIndex::zero(dim), Complex::new(value, T::zero()));
        f
    }

    /// `amplitude · e^{2πi k·x}` with band `|k|_∞`.
    pub fn harmonic(k: FrequencyIndex, amplitude: Complex<T>) -> Self {
        let mut f = Self::zeros(k.dim(), k.sup_norm());
        f.real = k.is_zero() && amplitude.im == T::zero();
        f.coeffs.insert(k, amplitude);
        f
    }

    pub fn from_coefficients(
        dim: usize,
        band: i64,
        coeffs: impl IntoIterator<Item = (FrequencyIndex, Complex<T>)>,
    ) -> Result<Self> {
        let mut f = Self::zeros(dim, band);
        f.real = false;
        for (k, c) in coeffs {
            f.set(k, c)?;
        }
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn band(&self) -> i64 {
        self.band
    }

    /// Whether the field is flagged as real-valued (`f̂(−k) = conj f̂(k)`).
    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn set_real_flag(&mut self, real: bool) {
        self.real = real;
    }

    pub fn coefficient(&self, k: &FrequencyIndex) -> Complex<T> {
        self.coeffs.get(k).copied().unwrap_or_else(czero)
    }

    pub fn set(&mut self, k: FrequencyIndex, c: Complex<T>) -> Result<()> {
        self.check_index(&k)?;
        self.coeffs.insert(k, c);
        Ok(())
    }

    pub fn add_to(&mut self, k: FrequencyIndex, c: Complex<T>) -> Result<()> {
        self.check_index(&k)?;
        *self.coeffs.entry(k).or_insert_with(czero) += c;
        Ok(())
    }

    pub fn remove(&mut self, k: &FrequencyIndex) -> Option<Complex<T>> {
        self.coeffs.remove(k)
    }

    fn check_index(&self, k: &FrequencyIndex) -> Result<()> {
        if k.dim() != self.dim {
            return Err(Error::DimensionMismatch(format!("frequency {k} in a field on T^{}", self.dim)));
        }
        if k.sup_norm() > self.band {
            return Err(Error::OutOfBand(format!("{k} with band {}", self.band)));
        }
        Ok(())
    }

    /// Stored coefficients in lexicographic order of `k`.
    pub fn iter(&self) -> impl Iterator<Item = (&FrequencyIndex, &Complex<T>)> {
        self.coeffs.iter()
    }

    pub fn stored_len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.values().all(|c| c.re == T::zero() && c.im == T::zero())
    }

    pub fn mean(&self) -> Complex<T> {
        self.coefficient(&FrequencyIndex::zero(self.dim))
    }

    /// Same coefficients on a wider band.
    pub fn with_band(mut self, band: i64) -> Result<Self> {
        if let Some((k, _)) = self.coeffs.iter().find(|(k, _)| k.sup_norm() > band) {
            return Err(Error::OutOfBand(format!("{k} with band {band}")));
        }
        self.band = band;
        Ok(self)
    }

    /// Drops every coefficient outside `|k|_∞ ≤ band`.
    pub fn truncated(&self, band: i64) -> Self {
        TorusField {
            dim: self.dim,
            band,
            real: self.real,
            coeffs: self.coeffs.iter().filter(|(k, _)| k.sup_norm() <= band).map(|(k, c)| (k.clone(), *c)).collect(),
        }
    }

    /// Pointwise value of the truncated series at `x ∈ ℝⁿ`.
    pub fn evaluate(&self, x: &[T]) -> Complex<T> {
        let width = (2 * self.band + 1) as usize;
        let tables: Vec<Vec<Complex<T>>> = x
            .iter()
            .map(|&xi| (-self.band..=self.band).map(|m| cis_turns(T::from_i64_exact(m) * xi)).collect())
            .collect();
        debug_assert!(tables.iter().all(|t| t.len() == width));
        let mut acc = czero();
        for (k, c) in &self.coeffs {
            let mut term = *c;
            for (axis, &ki) in k.as_slice().iter().enumerate() {
                term *= tables[axis][(ki + self.band) as usize];
            }
            acc += term;
        }
        acc
    }

    /// Applies a real Fourier multiplier coefficientwise.
    pub fn multiplied(&self, symbol: impl Fn(&FrequencyIndex) -> T) -> Self {
        TorusField {
            dim: self.dim,
            band: self.band,
            real: self.real,
            coeffs: self.coeffs.iter().map(|(k, c)| (k.clone(), c.scale(symbol(k)))).collect(),
        }
    }

    pub fn scaled(&self, factor: Complex<T>) -> Self {
        let real = self.real && factor.im == T::zero();
        TorusField {
            dim: self.dim,
            band: self.band,
            real,
            coeffs: self.coeffs.iter().map(|(k, c)| (k.clone(), *c * factor)).collect(),
        }
    }

    fn combine(&self, other: &Self, sign: T) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(format!("T^{} vs T^{}", self.dim, other.dim)));
        }
        let mut out = self.clone();
        out.band = self.band.max(other.band);
        out.real = self.real && other.real;
        for (k, c) in &other.coeffs {
            *out.coeffs.entry(k.clone()).or_insert_with(czero) += c.scale(sign);
        }
        Ok(out)
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.combine(other, T::one())
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, -T::one())
    }

    /// `max_k |f̂(k) − ĝ(k)|` over the union of stored keys.
    pub fn max_coefficient_diff(&self, other: &Self) -> T {
        let mut worst = T::zero();
        for (k, c) in &self.coeffs {
            worst = worst.max((*c - other.coefficient(k)).norm());
        }
        for (k, c) in &other.coeffs {
            if !self.coeffs.contains_key(k) {
                worst = worst.max(c.norm());
            }
        }
        worst
    }

    /// `max_k |f̂(−k) − conj f̂(k)|`; zero for real-valued fields.
    pub fn hermitian_defect(&self) -> T {
        self.coeffs
            .iter()
            .map(|(k, c)| (self.coefficient(&k.neg()) - c.conj()).norm())
            .fold(T::zero(), T::max)
    }
}

fn check_grid(grid: usize, band: i64) -> Result<()> {
    if (grid as i64) < 2 * band + 2 {
        return Err(Error::BandTooLarge { grid, band });
    }
    Ok(())
}

/// Fourier coefficients of a grid function: `f̂(k) = N^{−n} Σ_j s_j e^{−2πi k·j/N}`
/// restricted to `|k|_∞ ≤ band`. Samples are row-major over `j ∈ {0..N−1}ⁿ`
/// at the points `x_j = j/N`, axis 0 slowest.
pub fn to_coefficients<T: Real>(samples: &[Complex<T>], dim: usize, grid: usize, band: i64) -> Result<TorusField<T>> {
    check_grid(grid, band)?;
    if samples.len() != grid.pow(dim as u32) {
        return Err(Error::DimensionMismatch(format!(
            "{} samples for a {grid}^{dim} grid",
            samples.len()
        )));
    }
    let real = samples.iter().all(|s| s.im == T::zero());
    let mut work = samples.to_vec();
    fft_nd(&mut work, dim, grid, FftDirection::Forward);
    let scale = T::one() / T::from_usize(work.len()).expect("grid size");
    let mut f = TorusField::zeros(dim, band);
    for k in band_frequencies(dim, band) {
        let c = work[wrapped_index(k.as_slice(), grid)].scale(scale);
        f.coeffs.insert(k, c);
    }
    f.real = real;
    Ok(f)
}

/// Values of the truncated series at `x_j = j/N`, row-major, axis 0 slowest.
pub fn to_samples<T: Real>(f: &TorusField<T>, grid: usize) -> Result<Vec<Complex<T>>> {
    check_grid(grid, f.band)?;
    let mut work = vec![czero(); grid.pow(f.dim as u32)];
    for (k, c) in &f.coeffs {
        work[wrapped_index(k.as_slice(), grid)] += *c;
    }
    fft_nd(&mut work, f.dim, grid, FftDirection::Inverse);
    Ok(work)
}

/// `‖f‖_{H^s}² = Σ_k ⟨k⟩^{2s} |f̂(k)|²` over the band.
pub fn sobolev_norm<T: Real>(f: &TorusField<T>, s: T) -> T {
    f.iter().map(|(k, c)| bracket_pow2::<T>(k.as_slice(), s) * c.norm_sqr()).fold(T::zero(), |a, b| a + b).sqrt()
}

/// `⟨f, g⟩_{H^s} = Σ_k ⟨k⟩^{2s} f̂(k) conj ĝ(k)`.
pub fn sobolev_inner<T: Real>(f: &TorusField<T>, g: &TorusField<T>, s: T) -> Complex<T> {
    f.iter()
        .map(|(k, c)| (*c * g.coefficient(k).conj()).scale(bracket_pow2::<T>(k.as_slice(), s)))
        .fold(czero(), |a, b| a + b)
}

/// Discrete `Lᵖ` norm of grid samples: Riemann sums for `p ∈ {1, 2}`, the
/// maximum modulus for `p = ∞`.
pub fn grid_lp_norm<T: Real>(samples: &[Complex<T>], p: LpExponent) -> T {
    let count = T::from_usize(samples.len().max(1)).expect("sample count");
    match p {
        LpExponent::One => samples.iter().map(|s| s.norm()).fold(T::zero(), |a, b| a + b) / count,
        LpExponent::Two => (samples.iter().map(|s| s.norm_sqr()).fold(T::zero(), |a, b| a + b) / count).sqrt(),
        LpExponent::Infinity => samples.iter().map(|s| s.norm()).fold(T::zero(), T::max),
    }
}

/// Bessel potential norm `‖f‖_{L^p_s} = ‖Σ ⟨k⟩^s f̂(k) e^{2πik·x}‖_{L^p}`,
/// evaluated on the `grid^n` sample grid.
pub fn bessel_norm<T: Real>(f: &TorusField<T>, s: T, p: LpExponent, grid: usize) -> Result<T> {
    let lifted = f.multiplied(|k| bracket_pow2::<T>(k.as_slice(), s / T::lit(2.0)));
    Ok(grid_lp_norm(&to_samples(&lifted, grid)?, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::random::random_field;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn constant_grid_has_only_a_mean() {
        for grid in [4, 7, 8] {
            let f = to_coefficients(&vec![c(3.0, 0.0); grid * grid], 2, grid, 1).unwrap();
            assert!((f.mean() - c(3.0, 0.0)).norm() < 1e-14);
            for (k, v) in f.iter() {
                if !k.is_zero() {
                    assert!(v.norm() < 1e-14);
                }
            }
            assert!(f.is_real());
        }
    }

    #[test]
    fn single_harmonic_on_grid() {
        let grid = 8;
        let samples: Vec<Complex<f64>> = (0..grid * grid)
            .map(|idx| cis_turns((idx / grid) as f64 / grid as f64))
            .collect();
        let f = to_coefficients(&samples, 2, grid, 2).unwrap();
        for (k, v) in f.iter() {
            let expect = if k.as_slice() == [1, 0] { 1.0 } else { 0.0 };
            assert!((v - c(expect, 0.0)).norm() < 1e-14, "{k}");
        }
    }

    #[test]
    fn to_samples_examples() {
        let one = TorusField::constant(2, 1.0);
        assert!(to_samples(&one, 4).unwrap().iter().all(|s| (s - c(1.0, 0.0)).norm() < 1e-15));
        let h = TorusField::harmonic([1, 0].into(), c(1.0, 0.0));
        let s = to_samples(&h, 4).unwrap();
        let expect = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
        for j0 in 0..4 {
            for j1 in 0..4 {
                assert!((s[j0 * 4 + j1] - expect[j0]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn grid_too_small_is_rejected() {
        let f: TorusField<f64> = TorusField::zeros(2, 3);
        assert_eq!(to_samples(&f, 7), Err(Error::BandTooLarge { grid: 7, band: 3 }));
        assert!(to_coefficients(&vec![c(0.0, 0.0); 49], 2, 7, 3).is_err());
    }

    #[test]
    fn round_trip_and_direct_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for dim in [1, 2, 3] {
            let band = 3;
            let grid = 8;
            let f: TorusField<f64> = random_field(dim, band, false, &mut rng);
            let samples = to_samples(&f, grid).unwrap();
            let back = to_coefficients(&samples, dim, grid, band).unwrap();
            assert!(back.max_coefficient_diff(&f) < 1e-12);
            for (idx, s) in samples.iter().enumerate().step_by(5) {
                let mut rem = idx;
                let mut x = vec![0.0; dim];
                for axis in (0..dim).rev() {
                    x[axis] = (rem % grid) as f64 / grid as f64;
                    rem /= grid;
                }
                assert!((f.evaluate(&x) - s).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn sobolev_norm_examples() {
        let f: TorusField<f64> = TorusField::constant(2, 3.0);
        for s in [-1.0, 0.0, 2.5] {
            assert!((sobolev_norm(&f, s) - 3.0).abs() < 1e-15);
        }
        let h = TorusField::harmonic([1, 0].into(), c(1.0, 0.0));
        assert!((sobolev_norm(&h, 2.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn parseval_against_grid_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let f: TorusField<f64> = random_field(2, 5, true, &mut rng);
            let grid_l2 = grid_lp_norm(&to_samples(&f, 16).unwrap(), LpExponent::Two);
            assert!((sobolev_norm(&f, 0.0) - grid_l2).abs() < 1e-12);
        }
    }

    #[test]
    fn bessel_norm_examples() {
        let f: TorusField<f64> = TorusField::constant(2, 3.0);
        for p in [LpExponent::One, LpExponent::Two, LpExponent::Infinity] {
            assert!((bessel_norm(&f, 1.5, p, 6).unwrap() - 3.0).abs() < 1e-14);
        }
        let h = TorusField::harmonic([1, 0].into(), c(1.0, 0.0));
        assert!((bessel_norm(&h, 0.0, LpExponent::Infinity, 8).unwrap() - 1.0).abs() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g: TorusField<f64> = random_field(2, 4, true, &mut rng);
        for s in [-1.0, 0.0, 1.0, 2.0] {
            let b = bessel_norm(&g, s, LpExponent::Two, 12).unwrap();
            assert!((b - sobolev_norm(&g, s)).abs() < 1e-10 * b.max(1.0));
        }
    }

    #[test]
    fn real_fields_sample_to_real_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f: TorusField<f64> = random_field(2, 6, true, &mut rng);
        assert!(f.is_real());
        assert!(f.hermitian_defect() == 0.0);
        let s = to_samples(&f, 14).unwrap();
        assert!(s.iter().all(|v| v.im.abs() < 1e-12));
    }

    #[test]
    fn single_precision_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f: TorusField<f32> = random_field(2, 3, true, &mut rng);
        let back = to_coefficients(&to_samples(&f, 8).unwrap(), 2, 8, 3).unwrap();
        assert!(back.max_coefficient_diff(&f) < 1e-5);
    }

    #[test]
    fn out_of_band_coefficients_are_rejected() {
        let mut f: TorusField<f64> = TorusField::zeros(2, 1);
        assert!(f.set([2, 0].into(), c(1.0, 0.0)).is_err());
        assert!(f.set([1, 0, 0].into(), c(1.0, 0.0)).is_err());
        assert!(f.set([1, -1].into(), c(1.0, 0.0)).is_ok());
    }
}
