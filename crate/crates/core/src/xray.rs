//! Forward transforms on `Tⁿ`.
//!
//! With the period-1 parametrization `γ(t) = x + t·v` the transform along a
//! primitive direction keeps exactly the coefficients with `k·v = 0`; the
//! `d`-plane transform over `A` keeps those with `k ⊥ A`. Both are exact on
//! the band. A midpoint-rule quadrature of the defining integral serves as an
//! independent check.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{czero, TorusField, TorusSinogram};
use crate::lattice::{FrequencyIndex, PrimitiveDirection, RationalSubspace, SubspaceFamily};
use crate::scalar::Real;

/// A closed geodesic (`d = 1`) or a flat `d`-torus through `base`, spanned by
/// the canonical basis rows of `span`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicSpec<T: Real> {
    base: Vec<T>,
    span: RationalSubspace,
}

impl<T: Real> GeodesicSpec<T> {
    pub fn new(base: Vec<T>, span: RationalSubspace) -> Result<Self> {
        if base.len() != span.ambient_dim() {
            return Err(Error::DimensionMismatch(format!(
                "base point in R^{} for a subspace of Q^{}",
                base.len(),
                span.ambient_dim()
            )));
        }
        if base.iter().any(|&x| !(x >= T::zero() && x < T::one())) {
            return Err(Error::ParamViolation("base point must lie in [0, 1)^n".into()));
        }
        Ok(GeodesicSpec { base, span })
    }

    pub fn line(base: Vec<T>, v: &PrimitiveDirection) -> Result<Self> {
        Self::new(base, RationalSubspace::from_direction(v))
    }

    pub fn base(&self) -> &[T] {
        &self.base
    }

    pub fn span(&self) -> &RationalSubspace {
        &self.span
    }
}

/// Parametrization a line-integral datum refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    /// `∫₀¹ f(x + tv) dt`, the internal convention.
    PeriodOne,
    /// Integral against arc length, `|v|` times the period-1 value.
    ArcLength,
}

fn check_dim<T: Real>(f: &TorusField<T>, n: usize) -> Result<()> {
    if f.dim() != n {
        return Err(Error::DimensionMismatch(format!("field on T^{} transformed in Q^{n}", f.dim())));
    }
    Ok(())
}

fn keep_orthogonal<T: Real>(f: &TorusField<T>, a: &RationalSubspace) -> TorusField<T> {
    let mut out = TorusField::zeros(f.dim(), f.band());
    for (k, c) in f.iter() {
        if a.is_orthogonal_to(k.as_slice()) {
            out.set(k.clone(), *c).expect("same band");
        }
    }
    out.set_real_flag(f.is_real());
    out
}

/// `I_v f`: keeps `f̂(k)` where `k·v = 0`.
pub fn forward_direction<T: Real>(f: &TorusField<T>, v: &PrimitiveDirection) -> Result<TorusField<T>> {
    check_dim(f, v.dim())?;
    forward_subspace(f, &RationalSubspace::from_direction(v))
}

/// `R_{d,A} f`: keeps `f̂(k)` where `k ⊥ A`.
pub fn forward_subspace<T: Real>(f: &TorusField<T>, a: &RationalSubspace) -> Result<TorusField<T>> {
    check_dim(f, a.ambient_dim())?;
    Ok(keep_orthogonal(f, a))
}

/// The transform over every member of `family`, assembled into a sinogram:
/// `ĝ(k, A) = f̂(k)` for `k ≠ 0` and `A ∈ Ω_k`, mean `f̂(0)`.
pub fn forward_sinogram<T: Real>(f: &TorusField<T>, family: &SubspaceFamily) -> Result<TorusSinogram<T>> {
    check_dim(f, family.dim())?;
    if family.is_empty() {
        return Err(Error::ParamViolation("forward transform over an empty family".into()));
    }
    let mut slices: Vec<TorusField<T>> = (0..family.len()).map(|_| TorusField::zeros(f.dim(), f.band())).collect();
    for (k, c) in f.iter() {
        if k.is_zero() {
            continue;
        }
        for i in family.omega(k) {
            slices[i].set(k.clone(), *c)?;
        }
    }
    let mut g = TorusSinogram::new(f.dim(), family.sub_dim(), f.band(), f.mean())?;
    for (a, mut s) in family.members().iter().zip(slices) {
        if s.stored_len() > 0 {
            s.set_real_flag(f.is_real());
            g.insert_slice(a.clone(), s)?;
        }
    }
    Ok(g)
}

/// Midpoint rule for `∫_{[0,1]^d} f(x + Σ tᵢ aᵢ) dt` over the basis rows `aᵢ`
/// of the span, with `steps` nodes per axis.
///
/// The integrand restricted to axis `i` has frequencies `|k·aᵢ| ≤ K|aᵢ|₁`;
/// `steps > 2K|aᵢ|₁` is required on every axis.
pub fn quadrature_line_integral<T: Real>(f: &TorusField<T>, spec: &GeodesicSpec<T>, steps: usize) -> Result<Complex<T>> {
    let n = spec.span.ambient_dim();
    check_dim(f, n)?;
    let rows: Vec<&[i64]> = spec.span.rows().collect();
    for row in &rows {
        let l1: i64 = row.iter().map(|c| c.abs()).sum();
        let required = (2 * f.band() * l1) as usize;
        if steps <= required {
            return Err(Error::QuadratureTooCoarse { steps, required });
        }
    }
    let d = rows.len();
    let h = T::one() / T::from_usize(steps).expect("step count");
    let nodes: Vec<T> = (0..steps).map(|j| (T::from_usize(j).expect("index") + T::lit(0.5)) * h).collect();
    let mut idx = vec![0usize; d];
    let mut acc = czero();
    let mut point = vec![T::zero(); n];
    loop {
        for (axis, p) in point.iter_mut().enumerate() {
            let mut x = spec.base[axis];
            for (i, row) in rows.iter().enumerate() {
                x += nodes[idx[i]] * T::from_i64_exact(row[axis]);
            }
            // Reduce mod 1 so the exponent tables stay accurate.
            *p = x - x.floor();
        }
        acc += f.evaluate(&point);
        let mut advanced = false;
        for c in idx.iter_mut().rev() {
            if *c + 1 < steps {
                *c += 1;
                advanced = true;
                break;
            }
            *c = 0;
        }
        if !advanced {
            break;
        }
    }
    Ok(acc.scale(h.powi(d as i32)))
}

/// Converts a line integral between the period-1 and arc-length conventions.
pub fn rescale_convention<T: Real>(value: Complex<T>, v: &PrimitiveDirection, target: Convention) -> Complex<T> {
    let len: T = v.euclidean_norm();
    match target {
        Convention::ArcLength => value.scale(len),
        Convention::PeriodOne => value.unscale(len),
    }
}

/// Distance of `g` from the range of the transform over `family`: the larger
/// of the largest coefficient off the support rule and the largest spread of
/// `ĝ(k, ·)` across `Ω_k` (missing slices count as zero).
pub fn range_defect<T: Real>(g: &TorusSinogram<T>, family: &SubspaceFamily) -> T {
    let mut worst = g.support_defect();
    let mut seen = std::collections::BTreeSet::<FrequencyIndex>::new();
    for (_, f) in g.slices() {
        for (k, _) in f.iter() {
            if !seen.insert(k.clone()) {
                continue;
            }
            let values: Vec<Complex<T>> = family.omega(k).into_iter().map(|i| g.coefficient(k, family.get(i))).collect();
            if let Some(first) = values.first() {
                for v in &values[1..] {
                    worst = worst.max((*v - *first).norm());
                }
            }
        }
    }
    worst
}

/// Whether `g` is the transform of a band-limited field, up to `tol`.
pub fn in_range<T: Real>(g: &TorusSinogram<T>, family: &SubspaceFamily, tol: T) -> bool {
    range_defect(g, family) <= tol
}
