//! Tikhonov regularization for the planar X-ray transform.
//!
//! The minimizer of `‖If − g‖²_{H^r(T²×Q)} + α‖f‖²_{H^s}` is
//! `P^{s−r}_α I* g`, with `P^s_α` the Fourier multiplier
//! `(1 + α⟨k⟩^{2s})⁻¹`. The strategy `P^s_α I*` with `α(ε)` from
//! [`alpha_schedule`] converges at the rate given by [`error_bound`].

use std::collections::BTreeSet;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{data_sobolev_norm, sobolev_norm, TorusField, TorusSinogram, WeightRule};
use crate::inversion::adjoint;
use crate::lattice::{orthogonal_primitive, FrequencyIndex, RationalSubspace, SubspaceFamily};
use crate::scalar::{bracket_pow2, Real};
use crate::xray::forward_sinogram;

/// Smoothness indices and parameters of a regularized reconstruction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegParams {
    /// Data smoothness index.
    pub r: f64,
    /// Penalty smoothness index.
    pub s: f64,
    /// Index of the norm the noise is measured in.
    pub t: f64,
    /// Extra smoothness of the truth, `f ∈ H^{r+δ}`.
    pub delta: f64,
    pub alpha: f64,
    pub eps: f64,
}

impl RegParams {
    /// Hypotheses of the closed-form minimizer: `s ≥ r`, `α > 0`.
    pub fn check_minimizer(&self) -> Result<()> {
        check_minimizer(self.r, self.s, self.alpha)
    }

    /// Hypotheses of the regularization strategy: `2s + t ≥ r`, `δ ≥ 0`, `s > 0`.
    pub fn check_strategy(&self) -> Result<()> {
        if !(2.0 * self.s + self.t >= self.r) {
            return Err(Error::ParamViolation(format!("need 2s + t >= r, got s = {}, t = {}, r = {}", self.s, self.t, self.r)));
        }
        if !(self.delta >= 0.0 && self.s > 0.0) {
            return Err(Error::ParamViolation(format!("need delta >= 0 and s > 0, got delta = {}, s = {}", self.delta, self.s)));
        }
        Ok(())
    }

    /// Hypotheses of the quantitative bound: `0 < δ < 2s`, `0 < α ≤ 2s/δ − 1`, `ε ≥ 0`.
    pub fn check_bound(&self) -> Result<()> {
        check_bound(self.alpha, self.eps, self.delta, self.s)
    }
}

fn check_minimizer(r: f64, s: f64, alpha: f64) -> Result<()> {
    if !(s >= r) {
        return Err(Error::ParamViolation(format!("need s >= r, got s = {s}, r = {r}")));
    }
    if !(alpha > 0.0) {
        return Err(Error::ParamViolation(format!("need alpha > 0, got {alpha}")));
    }
    Ok(())
}

fn check_bound(alpha: f64, eps: f64, delta: f64, s: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 2.0 * s) {
        return Err(Error::ParamViolation(format!("need 0 < delta < 2s, got delta = {delta}, s = {s}")));
    }
    let cap = 2.0 * s / delta - 1.0;
    if !(alpha > 0.0 && alpha <= cap) {
        return Err(Error::ParamViolation(format!("need 0 < alpha <= 2s/delta - 1 = {cap}, got {alpha}")));
    }
    if !(eps >= 0.0) {
        return Err(Error::ParamViolation(format!("need eps >= 0, got {eps}")));
    }
    Ok(())
}

/// `P^s_α f`: multiplies `f̂(k)` by `(1 + α⟨k⟩^{2s})⁻¹`.
pub fn post_process<T: Real>(f: &TorusField<T>, s: T, alpha: T) -> TorusField<T> {
    f.multiplied(|k| T::one() / (T::one() + alpha * bracket_pow2::<T>(k.as_slice(), s)))
}

/// `I* g` for the unweighted data space: `Σ_{A∋stored, k⊥A} ĝ(k, A)` per
/// frequency and the mean at `k = 0`.
pub fn adjoint_unweighted<T: Real>(g: &TorusSinogram<T>) -> TorusField<T> {
    let mut out = TorusField::zeros(g.dim(), g.band());
    out.set(FrequencyIndex::zero(g.dim()), g.mean()).expect("zero frequency is in band");
    for (a, f) in g.slices() {
        for (k, c) in f.iter() {
            if !k.is_zero() && a.is_orthogonal_to(k.as_slice()) {
                out.add_to(k.clone(), *c).expect("same band");
            }
        }
    }
    out.set_real_flag(g.slices().all(|(_, f)| f.is_real()) && g.mean().im == T::zero());
    out
}

fn check_planar<T: Real>(g: &TorusSinogram<T>) -> Result<()> {
    if g.dim() != 2 || g.sub_dim() != 1 {
        return Err(Error::InvalidDimension(format!(
            "Tikhonov reconstruction is defined for planar X-ray data, got d = {}, n = {}",
            g.sub_dim(),
            g.dim()
        )));
    }
    Ok(())
}

/// The minimizer `P^{s−r}_α I* g` of the Tikhonov functional.
pub fn tikhonov_reconstruct<T: Real>(g: &TorusSinogram<T>, r: T, s: T, alpha: T) -> Result<TorusField<T>> {
    check_planar(g)?;
    check_minimizer(r.as_f64(), s.as_f64(), alpha.as_f64())?;
    Ok(post_process(&adjoint_unweighted(g), s - r, alpha))
}

/// The strategy operator `P^s_α I* g`.
pub fn regularized_reconstruct<T: Real>(g: &TorusSinogram<T>, s: T, alpha: T) -> Result<TorusField<T>> {
    check_planar(g)?;
    if !(alpha > T::zero()) {
        return Err(Error::ParamViolation(format!("need alpha > 0, got {alpha}")));
    }
    Ok(post_process(&adjoint_unweighted(g), s, alpha))
}

/// Weighted `d`-plane analogue: `f̂(k) = (R* g)^(k) / (W_k + α⟨k⟩^{2(s−r)})`,
/// the minimizer of `‖Rf − g‖²_{L^{2,2}_r(w)} + α‖f‖²_{H^s}`. Experimental.
pub fn tikhonov_reconstruct_weighted<T: Real>(
    g: &TorusSinogram<T>,
    w: &WeightRule<T>,
    r: T,
    s: T,
    alpha: T,
) -> Result<TorusField<T>> {
    check_minimizer(r.as_f64(), s.as_f64(), alpha.as_f64())?;
    let back = adjoint(g, w)?;
    let mut out = TorusField::zeros(back.dim(), back.band());
    for (k, c) in back.iter() {
        let denom = w.normal_multiplier(k)? + alpha * bracket_pow2::<T>(k.as_slice(), s - r);
        out.set(k.clone(), c.unscale(denom))?;
    }
    out.set_real_flag(back.is_real());
    Ok(out)
}

/// `‖If − g‖²_{H^r(T²×Q)} + α‖f‖²_{H^s}`.
///
/// `If` is taken over the slices of `g` together with the direction
/// orthogonal to every frequency of `f`; all other directions contribute
/// zero on both sides.
pub fn tikhonov_objective<T: Real>(f: &TorusField<T>, g: &TorusSinogram<T>, r: T, s: T, alpha: T) -> Result<T> {
    check_planar(g)?;
    if f.dim() != 2 {
        return Err(Error::DimensionMismatch(format!("field on T^{} with planar data", f.dim())));
    }
    if !(alpha >= T::zero()) {
        return Err(Error::ParamViolation(format!("need alpha >= 0, got {alpha}")));
    }
    let mut members: BTreeSet<RationalSubspace> = g.slices().map(|(a, _)| a.clone()).collect();
    for (k, _) in f.iter() {
        if !k.is_zero() {
            members.insert(RationalSubspace::from_direction(&orthogonal_primitive(k)?));
        }
    }
    let data = if members.is_empty() {
        let mut empty = TorusSinogram::new(2, 1, f.band(), f.mean())?;
        empty.set_mean(f.mean() - g.mean());
        data_sobolev_norm(&empty, r)
    } else {
        let family = SubspaceFamily::from_members(2, 1, members)?;
        data_sobolev_norm(&forward_sinogram(f, &family)?.checked_sub(g)?, r)
    };
    let penalty = sobolev_norm(f, s);
    Ok(data * data + alpha * penalty * penalty)
}

/// How `α` follows the noise level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Schedule {
    /// `α = √ε`.
    Strategy,
    /// `α = ε^λ` with `λ = (1 + δ/2s)⁻¹`.
    Optimal,
}

impl std::str::FromStr for Schedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strategy" => Ok(Schedule::Strategy),
            "optimal" => Ok(Schedule::Optimal),
            _ => Err(Error::Parse(format!("schedule must be strategy or optimal, got {s:?}"))),
        }
    }
}

pub fn alpha_schedule(eps: f64, delta: f64, s: f64, mode: Schedule) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::ParamViolation(format!("need eps > 0, got {eps}")));
    }
    match mode {
        Schedule::Strategy => Ok(eps.sqrt()),
        Schedule::Optimal => {
            if !(delta >= 0.0 && s > 0.0) {
                return Err(Error::ParamViolation(format!("need delta >= 0 and s > 0, got delta = {delta}, s = {s}")));
            }
            Ok(eps.powf(optimal_exponent(delta, s)))
        }
    }
}

/// `λ = (1 + δ/2s)⁻¹`.
pub fn optimal_exponent(delta: f64, s: f64) -> f64 {
    1.0 / (1.0 + delta / (2.0 * s))
}

/// Convergence rate `δ/(2s + δ)` in `ε` under the optimal schedule.
pub fn optimal_rate(delta: f64, s: f64) -> f64 {
    delta / (2.0 * s + delta)
}

/// `C(x) = x (1/x − 1)^{1−x}` for `0 < x < 1`.
pub fn c_factor(x: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::ParamViolation(format!("C(x) needs 0 < x < 1, got {x}")));
    }
    Ok(x * (1.0 / x - 1.0).powf(1.0 - x))
}

/// `α^{δ/2s} C(δ/2s) M_f + ε/α`, bounding `‖P^s_α I*(If + noise) − f‖_{H^r}`
/// when `‖f‖_{H^{r+δ}} ≤ M_f` and the noise has `H^t` norm at most `ε`.
pub fn error_bound(alpha: f64, eps: f64, delta: f64, s: f64, m_f: f64) -> Result<f64> {
    check_bound(alpha, eps, delta, s)?;
    let x = delta / (2.0 * s);
    Ok(alpha.powf(x) * c_factor(x)? * m_f + eps / alpha)
}

/// `‖P^s_α f‖_{H^{r+2s}} ≤ α⁻¹ ‖f‖_{H^r}` slack, for checking the smoothing bound.
pub fn smoothing_ratio<T: Real>(f: &TorusField<T>, r: T, s: T, alpha: T) -> T {
    let num = sobolev_norm(&post_process(f, s, alpha), r + s + s);
    let den = sobolev_norm(f, r) / alpha;
    if den == T::zero() {
        T::zero()
    } else {
        num / den
    }
}

/// Scales a field by a complex factor; used to build noise of exact norm.
pub fn rescaled_to_norm<T: Real>(g: &TorusSinogram<T>, t: T, target: T) -> TorusSinogram<T> {
    let current = data_sobolev_norm(g, t);
    if current == T::zero() {
        return g.clone();
    }
    g.scaled(Complex::new(target / current, T::zero()))
}
