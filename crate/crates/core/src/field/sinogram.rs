use std::collections::BTreeMap;

use num_complex::Complex;
use rayon::prelude::*;

use super::{czero, grid_lp_norm, to_samples, LpExponent, TorusField, WeightRule};
use crate::error::{Error, Result};
use crate::lattice::{FrequencyIndex, RationalSubspace};
use crate::scalar::{bracket_pow2, Real};

/// Data on `Tⁿ × Gr(d, n)`: one slice field per subspace holding the
/// frequencies `k ≠ 0`, plus one mean shared by every slice.
///
/// Subspaces without a stored slice carry only the mean.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusSinogram<T: Real> {
    dim: usize,
    sub_dim: usize,
    band: i64,
    mean: Complex<T>,
    slices: BTreeMap<RationalSubspace, TorusField<T>>,
}

impl<T: Real> TorusSinogram<T> {
    pub fn new(dim: usize, sub_dim: usize, band: i64, mean: Complex<T>) -> Result<Self> {
        if sub_dim == 0 || sub_dim >= dim {
            return Err(Error::InvalidDimension(format!("need 1 <= d <= n - 1, got d = {sub_dim}, n = {dim}")));
        }
        Ok(TorusSinogram { dim, sub_dim, band, mean, slices: BTreeMap::new() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sub_dim(&self) -> usize {
        self.sub_dim
    }

    pub fn band(&self) -> i64 {
        self.band
    }

    pub fn mean(&self) -> Complex<T> {
        self.mean
    }

    pub fn set_mean(&mut self, mean: Complex<T>) {
        self.mean = mean;
    }

    /// Stores the slice for `a`, dropping its `k = 0` coefficient.
    pub fn insert_slice(&mut self, a: RationalSubspace, mut field: TorusField<T>) -> Result<()> {
        if a.ambient_dim() != self.dim || a.sub_dim() != self.sub_dim {
            return Err(Error::DimensionMismatch(format!(
                "subspace {a} in a sinogram over Gr({}, {})",
                self.sub_dim, self.dim
            )));
        }
        if field.dim() != self.dim {
            return Err(Error::DimensionMismatch(format!("slice on T^{} in a sinogram on T^{}", field.dim(), self.dim)));
        }
        if field.band() > self.band {
            return Err(Error::OutOfBand(format!("slice band {} exceeds {}", field.band(), self.band)));
        }
        field.remove(&FrequencyIndex::zero(self.dim));
        self.slices.insert(a, field.with_band(self.band)?);
        Ok(())
    }

    pub fn slice(&self, a: &RationalSubspace) -> Option<&TorusField<T>> {
        self.slices.get(a)
    }

    /// `ĝ(k, A)`, with the shared mean at `k = 0`.
    pub fn coefficient(&self, k: &FrequencyIndex, a: &RationalSubspace) -> Complex<T> {
        if k.is_zero() {
            return self.mean;
        }
        self.slices.get(a).map(|f| f.coefficient(k)).unwrap_or_else(czero)
    }

    /// Stored slices in canonical subspace order.
    pub fn slices(&self) -> impl Iterator<Item = (&RationalSubspace, &TorusField<T>)> {
        self.slices.iter()
    }

    pub fn slice_count(&self) -> usize {
        self.slices.len()
    }

    /// The slice over `a` including the shared mean.
    pub fn full_slice(&self, a: &RationalSubspace) -> TorusField<T> {
        let mut f = self.slices.get(a).cloned().unwrap_or_else(|| TorusField::zeros(self.dim, self.band));
        f.set(FrequencyIndex::zero(self.dim), self.mean).expect("zero frequency is in band");
        f
    }

    /// Largest `|ĝ(k, A)|` stored at a frequency not orthogonal to `A`; zero
    /// for data in the range of the transform.
    pub fn support_defect(&self) -> T {
        self.slices
            .iter()
            .flat_map(|(a, f)| f.iter().filter(|(k, _)| !a.is_orthogonal_to(k.as_slice())).map(|(_, c)| c.norm()))
            .fold(T::zero(), T::max)
    }

    /// Largest spread `|ĝ(k, A) − ĝ(k, B)|` between stored slices that both
    /// contain `k`. Range data takes the value `f̂(k)` on every `A ⊥ k`, which
    /// is only a constraint when `Ω_k` has more than one element (`d < n − 1`).
    pub fn consistency_defect(&self) -> T {
        let mut first: BTreeMap<&FrequencyIndex, Complex<T>> = BTreeMap::new();
        let mut worst = T::zero();
        for (a, f) in &self.slices {
            for (k, c) in f.iter() {
                if !a.is_orthogonal_to(k.as_slice()) {
                    continue;
                }
                match first.get(k) {
                    Some(c0) => worst = worst.max((*c - *c0).norm()),
                    None => {
                        first.insert(k, *c);
                    }
                }
            }
        }
        // Members of Ω_k without a stored slice hold ĝ(k, A) = 0.
        worst
    }

    pub fn scaled(&self, factor: Complex<T>) -> Self {
        TorusSinogram {
            mean: self.mean * factor,
            slices: self.slices.iter().map(|(a, f)| (a.clone(), f.scaled(factor))).collect(),
            ..self.clone_shape()
        }
    }

    fn clone_shape(&self) -> Self {
        TorusSinogram { dim: self.dim, sub_dim: self.sub_dim, band: self.band, mean: czero(), slices: BTreeMap::new() }
    }

    fn combine(&self, other: &Self, sign: T) -> Result<Self> {
        if self.dim != other.dim || self.sub_dim != other.sub_dim {
            return Err(Error::DimensionMismatch(format!(
                "Gr({}, {}) vs Gr({}, {})",
                self.sub_dim, self.dim, other.sub_dim, other.dim
            )));
        }
        let mut out = self.clone();
        out.band = self.band.max(other.band);
        out.mean = self.mean + other.mean.scale(sign);
        for f in out.slices.values_mut() {
            *f = f.clone().with_band(out.band)?;
        }
        for (a, f) in &other.slices {
            let merged = match out.slices.get(a) {
                Some(mine) => mine.combine(f, sign)?,
                None => f.scaled(Complex::new(sign, T::zero())).with_band(out.band)?,
            };
            out.slices.insert(a.clone(), merged);
        }
        Ok(out)
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.combine(other, T::one())
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, -T::one())
    }

    /// Splits the shared mean back onto every slice over `subspaces`.
    pub fn to_raw<'a>(&self, subspaces: impl IntoIterator<Item = &'a RationalSubspace>) -> RawSinogram<T> {
        let mut raw = RawSinogram::new(self.dim, self.sub_dim, self.band);
        for a in subspaces {
            raw.slices.insert(a.clone(), self.full_slice(a));
        }
        raw
    }
}

/// Sinogram data whose slices each carry their own mean, as produced by
/// measurements or by a Euclidean bridge.
#[derive(Clone, Debug, PartialEq)]
pub struct RawSinogram<T: Real> {
    dim: usize,
    sub_dim: usize,
    band: i64,
    slices: BTreeMap<RationalSubspace, TorusField<T>>,
}

impl<T: Real> RawSinogram<T> {
    pub fn new(dim: usize, sub_dim: usize, band: i64) -> Self {
        RawSinogram { dim, sub_dim, band, slices: BTreeMap::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sub_dim(&self) -> usize {
        self.sub_dim
    }

    pub fn band(&self) -> i64 {
        self.band
    }

    pub fn insert_slice(&mut self, a: RationalSubspace, field: TorusField<T>) -> Result<()> {
        if a.ambient_dim() != self.dim || a.sub_dim() != self.sub_dim || field.dim() != self.dim {
            return Err(Error::DimensionMismatch(format!("slice {a} in raw data over Gr({}, {})", self.sub_dim, self.dim)));
        }
        self.slices.insert(a, field.with_band(self.band)?);
        Ok(())
    }

    pub fn slices(&self) -> impl Iterator<Item = (&RationalSubspace, &TorusField<T>)> {
        self.slices.iter()
    }

    pub fn slice(&self, a: &RationalSubspace) -> Option<&TorusField<T>> {
        self.slices.get(a)
    }

    fn with_shared_mean(&self, mean: Complex<T>) -> Result<TorusSinogram<T>> {
        let mut g = TorusSinogram::new(self.dim, self.sub_dim, self.band, mean)?;
        for (a, f) in &self.slices {
            g.insert_slice(a.clone(), f.clone())?;
        }
        Ok(g)
    }

    /// `Σ_A Σ_k ⟨k⟩^{2s} w(k, A)² |ĝ(k, A)|²` with per-slice means.
    pub fn weighted_norm_sq(&self, s: T, w: &WeightRule<T>) -> Result<T> {
        let mut total = T::zero();
        for (a, f) in &self.slices {
            for (k, c) in f.iter() {
                let wk = w.weight_at(k, a)?;
                total += bracket_pow2::<T>(k.as_slice(), s) * wk * wk * c.norm_sqr();
            }
        }
        Ok(total)
    }
}

/// Projects raw data onto the shared-mean constraint: the common mean is
/// `Σ_A w(0, A)² m_A / Σ_A w(0, A)²`, the minimizer of the weighted `L²`
/// distance.
pub fn enforce_moment_constraint<T: Real>(raw: &RawSinogram<T>, w: &WeightRule<T>) -> Result<TorusSinogram<T>> {
    let zero = FrequencyIndex::zero(raw.dim);
    let mut num = czero();
    let mut den = T::zero();
    for (a, f) in &raw.slices {
        let wa = w.weight_at(&zero, a)?;
        num += f.coefficient(&zero).scale(wa * wa);
        den += wa * wa;
    }
    let mean = if den > T::zero() { num.unscale(den) } else { czero() };
    raw.with_shared_mean(mean)
}

/// Shared mean as the arithmetic mean of the per-slice means (`w ≡ 1`).
pub fn enforce_moment_constraint_unweighted<T: Real>(raw: &RawSinogram<T>) -> Result<TorusSinogram<T>> {
    let zero = FrequencyIndex::zero(raw.dim);
    let count = raw.slices.len();
    let sum = raw.slices.values().map(|f| f.coefficient(&zero)).fold(czero(), |a, b| a + b);
    let mean = if count > 0 { sum.unscale(T::from_usize(count).expect("slice count")) } else { czero() };
    raw.with_shared_mean(mean)
}

fn check_family<T: Real>(g: &TorusSinogram<T>, w: &WeightRule<T>) -> Result<()> {
    if g.dim != w.family().dim() || g.sub_dim != w.family().sub_dim() {
        return Err(Error::DimensionMismatch(format!(
            "sinogram over Gr({}, {}) with a weight over Gr({}, {})",
            g.sub_dim,
            g.dim,
            w.family().sub_dim(),
            w.family().dim()
        )));
    }
    if let Some((a, f)) = g.slices.iter().find(|(a, _)| !w.family().contains(a)) {
        let k = f.iter().next().map(|(k, _)| k.to_string()).unwrap_or_else(|| "0".into());
        return Err(Error::WeightUndefined { frequency: k, subspace: a.to_string() });
    }
    Ok(())
}

fn slice_norm<T: Real>(g: &TorusSinogram<T>, i: usize, s: T, w: &WeightRule<T>, p: LpExponent, grid: usize) -> Result<T> {
    let a = w.family().get(i);
    let zero = FrequencyIndex::zero(g.dim);
    let w0 = w.weight(&zero, i)?;
    let slice = g.slices.get(a);
    if p == LpExponent::Two {
        let mut total = w0 * w0 * g.mean.norm_sqr();
        if let Some(f) = slice {
            for (k, c) in f.iter() {
                let wk = w.weight(k, i)?;
                total += bracket_pow2::<T>(k.as_slice(), s) * wk * wk * c.norm_sqr();
            }
        }
        return Ok(total.sqrt());
    }
    let Some(f) = slice else {
        return Ok(w0 * g.mean.norm());
    };
    let mut lifted = TorusField::zeros(g.dim, g.band);
    lifted.set(zero, g.mean.scale(w0))?;
    let half = s / T::lit(2.0);
    for (k, c) in f.iter() {
        lifted.set(k.clone(), c.scale(bracket_pow2::<T>(k.as_slice(), half) * w.weight(k, i)?))?;
    }
    Ok(grid_lp_norm(&to_samples(&lifted, grid)?, p))
}

fn aggregate<T: Real>(parts: &[T], l: LpExponent) -> T {
    match l {
        LpExponent::One => parts.iter().fold(T::zero(), |a, &b| a + b),
        LpExponent::Two => parts.iter().fold(T::zero(), |a, &b| a + b * b).sqrt(),
        LpExponent::Infinity => parts.iter().fold(T::zero(), |a, &b| a.max(b)),
    }
}

/// Weighted data norm `‖g‖_{L^{p,l}_s(w)}`: the `L^p_s` norm of
/// `w(·, A) ĝ(·, A)` per member of the weight's family, aggregated in `ℓ^l`.
///
/// For `p = l = 2` this is `W_0 |mean|² + Σ_{k≠0} Σ_{A∈Ω_k} ⟨k⟩^{2s} w² |ĝ(k, A)|²`.
/// Slices for `p ≠ 2` are sampled on a `(2K + 2)ⁿ` grid.
pub fn sinogram_norm<T: Real>(g: &TorusSinogram<T>, s: T, w: &WeightRule<T>, p: LpExponent, l: LpExponent) -> Result<T> {
    sinogram_norm_on_grid(g, s, w, p, l, (2 * g.band + 2) as usize)
}

/// [`sinogram_norm`] with an explicit sampling grid for `p ≠ 2`.
pub fn sinogram_norm_on_grid<T: Real>(
    g: &TorusSinogram<T>,
    s: T,
    w: &WeightRule<T>,
    p: LpExponent,
    l: LpExponent,
    grid: usize,
) -> Result<T> {
    check_family(g, w)?;
    let parts: Vec<T> = (0..w.family().len())
        .into_par_iter()
        .map(|i| slice_norm(g, i, s, w, p, grid))
        .collect::<Result<_>>()?;
    Ok(aggregate(&parts, l))
}

/// Unweighted data norm `‖g‖_{H^s(Tⁿ×Q)}`: the mean counted once plus every
/// stored slice coefficient.
pub fn data_sobolev_norm<T: Real>(g: &TorusSinogram<T>, s: T) -> T {
    let slices: T = g
        .slices
        .values()
        .flat_map(|f| f.iter())
        .map(|(k, c)| bracket_pow2::<T>(k.as_slice(), s) * c.norm_sqr())
        .fold(T::zero(), |a, b| a + b);
    (g.mean.norm_sqr() + slices).sqrt()
}

/// `⟨g, h⟩_{L^{2,2}_s(w)} = W_0 m_g conj m_h + Σ_A Σ_{k≠0} ⟨k⟩^{2s} w(k, A)² ĝ conj ĥ`.
pub fn sinogram_inner<T: Real>(g: &TorusSinogram<T>, h: &TorusSinogram<T>, s: T, w: &WeightRule<T>) -> Result<Complex<T>> {
    check_family(g, w)?;
    check_family(h, w)?;
    let mut total = (g.mean * h.mean.conj()).scale(w.mean_mass());
    for (a, f) in &g.slices {
        let Some(other) = h.slices.get(a) else { continue };
        let i = w.family().index_of(a).expect("checked membership");
        for (k, c) in f.iter() {
            let wk = w.weight(k, i)?;
            total += (*c * other.coefficient(k).conj()).scale(bracket_pow2::<T>(k.as_slice(), s) * wk * wk);
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::random::{random_field, random_sinogram};
    use crate::field::{sobolev_norm, weight_build, WeightKind};
    use crate::lattice::{direction_cover, SubspaceFamily};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn c(re: f64) -> Complex<f64> {
        Complex::new(re, 0.0)
    }

    fn canonical(band: i64) -> WeightRule<f64> {
        let family = SubspaceFamily::from_directions(&direction_cover(band)).unwrap();
        WeightRule::over_family(WeightKind::CanonicalSingleton, Arc::new(family), band).unwrap()
    }

    #[test]
    fn zero_and_mean_only_norms() {
        let w = canonical(2);
        let zero = TorusSinogram::new(2, 1, 2, c(0.0)).unwrap();
        let mean = TorusSinogram::new(2, 1, 2, c(5.0)).unwrap();
        for s in [-1.0, 0.0, 3.0] {
            assert_eq!(sinogram_norm(&zero, s, &w, LpExponent::Two, LpExponent::Two).unwrap(), 0.0);
            assert!((sinogram_norm(&mean, s, &w, LpExponent::Two, LpExponent::Two).unwrap() - 5.0).abs() < 1e-14);
            assert!((data_sobolev_norm(&mean, s) - 5.0).abs() < 1e-15);
        }
    }

    #[test]
    fn moment_constraint_averages_means() {
        let dirs = direction_cover(1);
        let mut raw = RawSinogram::new(2, 1, 1);
        let a = RationalSubspace::from_direction(&dirs[0]);
        let b = RationalSubspace::from_direction(&dirs[1]);
        raw.insert_slice(a.clone(), TorusField::constant(2, 1.0)).unwrap();
        raw.insert_slice(b.clone(), TorusField::constant(2, 3.0)).unwrap();
        let g = enforce_moment_constraint_unweighted(&raw).unwrap();
        assert!((g.mean() - c(2.0)).norm() < 1e-15);
        let family = SubspaceFamily::from_members(2, 1, [a, b]).unwrap();
        let w = WeightRule::over_family(WeightKind::HeightDecay, Arc::new(family), 0).unwrap();
        let g = enforce_moment_constraint(&raw, &w).unwrap();
        assert!((g.mean() - c(2.0)).norm() < 1e-15);
    }

    #[test]
    fn consistent_data_is_a_fixed_point() {
        let w = canonical(3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g: TorusSinogram<f64> = random_sinogram(w.family(), 3, true, &mut rng);
        let raw = g.to_raw(w.family().members());
        assert_eq!(enforce_moment_constraint(&raw, &w).unwrap(), g);
    }

    #[test]
    fn moment_constraint_is_a_projection() {
        let w: WeightRule<f64> = weight_build(WeightKind::HeightDecay, 1, 2, 3, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut raw = RawSinogram::new(2, 1, 3);
        for a in w.family().members() {
            let f: TorusField<f64> = random_field(2, 3, true, &mut rng);
            let kept: Vec<_> =
                f.iter().filter(|(k, _)| a.is_orthogonal_to(k.as_slice())).map(|(k, v)| (k.clone(), *v)).collect();
            raw.insert_slice(a.clone(), TorusField::from_coefficients(2, 3, kept).unwrap()).unwrap();
        }
        let projected = enforce_moment_constraint(&raw, &w).unwrap();
        let dist = |h: &TorusSinogram<f64>| {
            let mut diff = RawSinogram::new(2, 1, 3);
            for (a, f) in raw.slices() {
                diff.insert_slice(a.clone(), f.checked_sub(&h.full_slice(a)).unwrap()).unwrap();
            }
            diff.weighted_norm_sq(0.0, &w).unwrap()
        };
        let best = dist(&projected);
        for _ in 0..50 {
            let h = random_sinogram(w.family(), 3, true, &mut rng);
            assert!(best <= dist(&h) + 1e-12);
            let mut shifted = projected.clone();
            shifted.set_mean(projected.mean() + c(rand::Rng::gen_range(&mut rng, -0.1..0.1)));
            assert!(best <= dist(&shifted) + 1e-12);
        }
    }

    #[test]
    fn norm_axioms_on_random_pairs() {
        let w: WeightRule<f64> = weight_build(WeightKind::HeightDecay, 1, 2, 3, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let ps = [LpExponent::One, LpExponent::Two, LpExponent::Infinity];
        for _ in 0..5 {
            let g = random_sinogram(w.family(), 3, true, &mut rng);
            let h = random_sinogram(w.family(), 3, true, &mut rng);
            let sum = g.checked_add(&h).unwrap();
            for s in [-1.0, 0.0, 1.5] {
                for p in ps {
                    for l in ps {
                        let ng = sinogram_norm(&g, s, &w, p, l).unwrap();
                        let nh = sinogram_norm(&h, s, &w, p, l).unwrap();
                        let ns = sinogram_norm(&sum, s, &w, p, l).unwrap();
                        assert!(ns <= ng + nh + 1e-12);
                        let n3 = sinogram_norm(&g.scaled(Complex::new(-3.0, 0.0)), s, &w, p, l).unwrap();
                        assert!((n3 - 3.0 * ng).abs() < 1e-11 * ng.max(1.0));
                    }
                }
            }
        }
    }

    #[test]
    fn two_two_norm_matches_grid_evaluation() {
        let w: WeightRule<f64> = weight_build(WeightKind::HeightDecay, 1, 2, 2, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let g = random_sinogram(w.family(), 2, true, &mut rng);
        let direct = sinogram_norm(&g, 1.0, &w, LpExponent::Two, LpExponent::Two).unwrap();
        let parts: Vec<f64> = (0..w.family().len())
            .map(|i| {
                let a = w.family().get(i);
                let lifted = g.full_slice(a).multiplied(|k| {
                    bracket_pow2::<f64>(k.as_slice(), 0.5) * w.weight(k, i).unwrap()
                });
                grid_lp_norm(&to_samples(&lifted, 8).unwrap(), LpExponent::Two)
            })
            .collect();
        assert!((aggregate(&parts, LpExponent::Two) - direct).abs() < 1e-12);
    }

    #[test]
    fn inner_product_matches_norm() {
        let w: WeightRule<f64> = weight_build(WeightKind::HeightDecay, 1, 2, 2, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let g = random_sinogram(w.family(), 2, false, &mut rng);
        let n = sinogram_norm(&g, 0.5, &w, LpExponent::Two, LpExponent::Two).unwrap();
        let ip = sinogram_inner(&g, &g, 0.5, &w).unwrap();
        assert!((ip.re - n * n).abs() < 1e-12 && ip.im.abs() < 1e-12);
    }

    #[test]
    fn slices_outside_the_weight_family_are_undefined() {
        let w = canonical(1);
        let mut g = TorusSinogram::new(2, 1, 2, c(0.0)).unwrap();
        let outside = RationalSubspace::from_direction(&"1,2".parse().unwrap());
        g.insert_slice(outside, TorusField::harmonic([2, -1].into(), c(1.0))).unwrap();
        let err = sinogram_norm(&g, 0.0, &w, LpExponent::Two, LpExponent::Two).unwrap_err();
        assert!(matches!(err, Error::WeightUndefined { .. }));
    }

    #[test]
    fn support_defect_flags_off_range_data() {
        let mut g = TorusSinogram::new(2, 1, 2, c(0.0)).unwrap();
        let a = RationalSubspace::from_direction(&"1,0".parse().unwrap());
        g.insert_slice(a.clone(), TorusField::harmonic([0, 1].into(), c(1.0))).unwrap();
        assert_eq!(g.support_defect(), 0.0);
        g.insert_slice(a, TorusField::harmonic([1, 1].into(), c(0.5))).unwrap();
        assert_eq!(g.support_defect(), 0.5);
        let f = TorusField::harmonic([1, 1].into(), c(2.0));
        assert!((sobolev_norm(&f, 0.0) - 2.0).abs() < 1e-15);
    }
}
