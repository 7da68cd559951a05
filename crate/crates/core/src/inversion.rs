//! Inversion of the torus transforms.
//!
//! - [`slice_reconstruct_coeff`] reads `f̂(k)` off a single slice by
//!   integrating along a coordinate line.
//! - [`adjoint`] and [`normal_multiplier`]: `R*` and the symbol `W_k` of `R*R`.
//! - [`invert_filtered`] (`F_{W⁻¹} R*`) and [`adjoint_normalized`] (`R*`
//!   with `w̃ = w/√W_k`), both left inverses of the forward sinogram.
//! - [`invert_sum`]: the filter-free sum of hyperplane slices.

use std::collections::BTreeMap;
use std::time::Duration;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{
    czero, data_sobolev_norm, grid_lp_norm, sobolev_norm, to_samples, LpExponent, TorusField, TorusSinogram,
    WeightRule,
};
use crate::lattice::{band_frequencies, FrequencyIndex, PrimitiveDirection, RationalSubspace, SubspaceFamily};
use crate::scalar::{cis_turns, Real};

/// Coordinate line a planar slice is integrated over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SliceAxis {
    /// The line `y = 0`, integrated against `e^{−2πi k₁ x}`.
    AlongX,
    /// The line `x = 0`, integrated against `e^{−2πi k₂ y}`.
    AlongY,
}

/// Axis used by [`slice_reconstruct_coeff`]: the larger `|kᵢ|`, ties to
/// [`SliceAxis::AlongY`]. For `k = 0` any axis transversal to `v` works.
pub fn default_axis(k: &FrequencyIndex, v: &PrimitiveDirection) -> SliceAxis {
    let (k1, k2) = (k.as_slice()[0], k.as_slice()[1]);
    if k.is_zero() {
        return if v.components()[0] != 0 { SliceAxis::AlongY } else { SliceAxis::AlongX };
    }
    if k2.abs() >= k1.abs() {
        SliceAxis::AlongY
    } else {
        SliceAxis::AlongX
    }
}

/// Recovers `f̂(k)` from `g_v = I_v f` (including its mean) for a direction
/// `v` with `k·v = 0`, by a midpoint rule with `steps` nodes along the
/// default axis.
pub fn slice_reconstruct_coeff<T: Real>(
    g_v: &TorusField<T>,
    v: &PrimitiveDirection,
    k: &FrequencyIndex,
    steps: usize,
) -> Result<Complex<T>> {
    if k.dim() != 2 {
        return Err(Error::InvalidDimension(format!("slice reconstruction needs n = 2, got n = {}", k.dim())));
    }
    slice_reconstruct_coeff_on_axis(g_v, v, k, default_axis(k, v), steps)
}

/// [`slice_reconstruct_coeff`] along an explicit axis.
///
/// On the line `x = 0` the slice is `Σ_{m⊥v} f̂(m) e^{2πi m₂ y}`; when
/// `v₁ ≠ 0` the map `m ↦ m₂` is injective on `v^⊥`, so the `k₂`-th Fourier
/// coefficient of the restriction is `f̂(k)`. The line `y = 0` needs `v₂ ≠ 0`.
pub fn slice_reconstruct_coeff_on_axis<T: Real>(
    g_v: &TorusField<T>,
    v: &PrimitiveDirection,
    k: &FrequencyIndex,
    axis: SliceAxis,
    steps: usize,
) -> Result<Complex<T>> {
    if k.dim() != 2 || v.dim() != 2 || g_v.dim() != 2 {
        return Err(Error::InvalidDimension("slice reconstruction needs n = 2".into()));
    }
    if v.dot(k.as_slice()) != 0 {
        return Err(Error::NotOrthogonal { direction: v.to_string(), frequency: k.to_string() });
    }
    let (transversal, freq) = match axis {
        SliceAxis::AlongY => (v.components()[0], k.as_slice()[1]),
        SliceAxis::AlongX => (v.components()[1], k.as_slice()[0]),
    };
    if transversal == 0 {
        return Err(Error::AxisDegenerate(k.to_string()));
    }
    let required = (2 * g_v.band() * v.l1_norm()) as usize;
    if steps <= required {
        return Err(Error::QuadratureTooCoarse { steps, required });
    }
    let h = T::one() / T::from_usize(steps).expect("step count");
    let mut acc = czero();
    for j in 0..steps {
        let t = (T::from_usize(j).expect("index") + T::lit(0.5)) * h;
        let point = match axis {
            SliceAxis::AlongY => [T::zero(), t],
            SliceAxis::AlongX => [t, T::zero()],
        };
        acc += g_v.evaluate(&point) * cis_turns(-T::from_i64_exact(freq) * t);
    }
    Ok(acc.scale(h))
}

fn check_family<T: Real>(g: &TorusSinogram<T>, family: &SubspaceFamily) -> Result<()> {
    if g.dim() != family.dim() || g.sub_dim() != family.sub_dim() {
        return Err(Error::DimensionMismatch(format!(
            "sinogram over Gr({}, {}) with a family in Gr({}, {})",
            g.sub_dim(),
            g.dim(),
            family.sub_dim(),
            family.dim()
        )));
    }
    Ok(())
}

fn weighted_backprojection<T: Real>(
    g: &TorusSinogram<T>,
    w: &WeightRule<T>,
    weight: impl Fn(&FrequencyIndex, usize) -> Result<T>,
) -> Result<TorusField<T>> {
    check_family(g, w.family())?;
    let zero = FrequencyIndex::zero(g.dim());
    let mut out = TorusField::zeros(g.dim(), g.band());
    out.set(zero.clone(), g.mean().scale(weight_mass(w, &zero, &weight)?))?;
    // Slices are visited in family order, so each coefficient is summed over
    // Ω_k in the same order as W_k.
    for (a, f) in g.slices() {
        let i = w.family().index_of(a).ok_or_else(|| Error::WeightUndefined {
            frequency: f.iter().next().map(|(k, _)| k.to_string()).unwrap_or_default(),
            subspace: a.to_string(),
        })?;
        for (k, c) in f.iter() {
            if k.is_zero() || !a.is_orthogonal_to(k.as_slice()) {
                continue;
            }
            let wk = weight(k, i)?;
            out.add_to(k.clone(), c.scale(wk * wk))?;
        }
    }
    Ok(out)
}

fn weight_mass<T: Real>(
    w: &WeightRule<T>,
    k: &FrequencyIndex,
    weight: &impl Fn(&FrequencyIndex, usize) -> Result<T>,
) -> Result<T> {
    let mut total = T::zero();
    for i in w.omega(k) {
        let wk = weight(k, i)?;
        total += wk * wk;
    }
    Ok(total)
}

/// `(R* g)^(k) = Σ_{A∈Ω_k} w(k, A)² ĝ(k, A)`; the `k = 0` term is `W_0 · mean`.
pub fn adjoint<T: Real>(g: &TorusSinogram<T>, w: &WeightRule<T>) -> Result<TorusField<T>> {
    let mut out = weighted_backprojection(g, w, |k, i| w.weight(k, i))?;
    out.set(FrequencyIndex::zero(g.dim()), g.mean().scale(w.mean_mass()))?;
    Ok(out)
}

/// `W_k = Σ_{A∈Ω_k} w(k, A)²`, the symbol of `R*R`.
pub fn normal_multiplier<T: Real>(w: &WeightRule<T>, k: &FrequencyIndex) -> Result<T> {
    w.normal_multiplier(k)
}

fn check_filter<T: Real>(w: &WeightRule<T>, dim: usize, band: i64) -> Result<()> {
    for k in band_frequencies(dim, band) {
        if w.normal_multiplier(&k)? == T::zero() {
            return Err(Error::SingularFilter(k.to_string()));
        }
    }
    Ok(())
}

/// `F_{W⁻¹} R* g`: the adjoint divided by `W_k`.
pub fn invert_filtered<T: Real>(g: &TorusSinogram<T>, w: &WeightRule<T>) -> Result<TorusField<T>> {
    check_filter(w, g.dim(), g.band())?;
    let back = adjoint(g, w)?;
    let mut out = TorusField::zeros(back.dim(), back.band());
    for (k, c) in back.iter() {
        out.set(k.clone(), c.unscale(w.normal_multiplier(k)?))?;
    }
    out.set_real_flag(g.slices().all(|(_, f)| f.is_real()) && g.mean().im == T::zero());
    Ok(out)
}

/// `R*` with the normalized weight `w̃ = w/√W_k`, for which `R^{*,w̃} R = I`.
///
/// Since `Σ_{A∈Ω_k} w̃² ĝ = W_k⁻¹ Σ_{A∈Ω_k} w² ĝ`, this agrees with
/// [`invert_filtered`] on all data, in or out of the range.
pub fn adjoint_normalized<T: Real>(g: &TorusSinogram<T>, w: &WeightRule<T>) -> Result<TorusField<T>> {
    check_filter(w, g.dim(), g.band())?;
    let mut out = weighted_backprojection(g, w, |k, i| w.normalized_weight(k, i))?;
    out.set_real_flag(g.slices().all(|(_, f)| f.is_real()) && g.mean().im == T::zero());
    Ok(out)
}

/// Relative tolerance on the mean accepted by [`invert_sum`].
pub const SUM_MEAN_TOLERANCE: f64 = 1e-12;

/// `f = Σ_A R_{n−1,A} f` for zero-mean data over hyperplanes: the stored
/// slices of `g` summed coefficientwise.
///
/// Every nonzero frequency of the band must have its hyperplane `k^⊥` in
/// `family`; otherwise the sum would silently drop it and
/// [`Error::IncompleteCover`] is returned.
pub fn invert_sum<T: Real>(g: &TorusSinogram<T>, family: &SubspaceFamily) -> Result<TorusField<T>> {
    check_family(g, family)?;
    if g.sub_dim() + 1 != g.dim() {
        return Err(Error::InvalidDimension(format!(
            "summation inversion needs d = n - 1, got d = {}, n = {}",
            g.sub_dim(),
            g.dim()
        )));
    }
    let tolerance = SUM_MEAN_TOLERANCE * data_sobolev_norm(g, T::zero()).as_f64();
    if g.mean().norm().as_f64() > tolerance {
        return Err(Error::NonzeroMean { mean: g.mean().norm().as_f64(), tolerance });
    }
    for k in band_frequencies(g.dim(), g.band()) {
        if k.is_zero() {
            continue;
        }
        let a = RationalSubspace::hyperplane(k.as_slice())?;
        if !family.contains(&a) {
            return Err(Error::IncompleteCover(k.to_string()));
        }
    }
    let mut out = TorusField::zeros(g.dim(), g.band());
    for (a, f) in g.slices() {
        if !family.contains(a) {
            return Err(Error::ParamViolation(format!("slice {a} lies outside the family")));
        }
        for (k, c) in f.iter() {
            out.add_to(k.clone(), *c)?;
        }
    }
    out.set_real_flag(g.slices().all(|(_, f)| f.is_real()));
    Ok(out)
}

/// Error summary of one reconstruction against a known truth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub method: String,
    pub parameters: BTreeMap<String, serde_json::Value>,
    /// `(s, ‖f − f_rec‖_{H^s})`.
    pub sobolev_errors: Vec<(f64, f64)>,
    pub grid_l2_error: f64,
    pub grid_linf_error: f64,
    pub duration_seconds: f64,
}

impl ReconstructionReport {
    pub fn measure<T: Real>(
        method: &str,
        truth: &TorusField<T>,
        recon: &TorusField<T>,
        orders: &[f64],
        grid: usize,
        duration: Duration,
    ) -> Result<Self> {
        let diff = recon.checked_sub(truth)?;
        let samples = to_samples(&diff, grid)?;
        Ok(ReconstructionReport {
            method: method.to_string(),
            parameters: BTreeMap::new(),
            sobolev_errors: orders.iter().map(|&s| (s, sobolev_norm(&diff, T::lit(s)).as_f64())).collect(),
            grid_l2_error: grid_lp_norm(&samples, LpExponent::Two).as_f64(),
            grid_linf_error: grid_lp_norm(&samples, LpExponent::Infinity).as_f64(),
            duration_seconds: duration.as_secs_f64(),
        })
    }

    pub fn with_parameter(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.parameters.insert(key.to_string(), value.into());
        self
    }

    /// `‖f − f_rec‖_{H^s}` if `s` was measured.
    pub fn sobolev_error(&self, s: f64) -> Option<f64> {
        self.sobolev_errors.iter().find(|(t, _)| *t == s).map(|(_, e)| *e)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// `method,s,error` rows for the Sobolev errors.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,s,error\n");
        for (s, e) in &self.sobolev_errors {
            out.push_str(&format!("{},{},{:e}\n", self.method, s, e));
        }
        out
    }
}
