use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{band_frequencies, FrequencyIndex, RationalSubspace, SubspaceFamily};
use crate::scalar::Real;

/// Family a [`WeightRule`] is drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightKind {
    /// `d = n − 1`: `w(k, k^⊥) = 1` for `k ≠ 0` and `w(0, A) = |family|^{−1/2}`,
    /// so every `W_k` equals 1.
    CanonicalSingleton,
    /// `w(k, A) = 2^{−h(A)}` with `h` the height of the canonical basis.
    HeightDecay,
    /// Explicit values per `(k, A)`; missing entries are undefined.
    CustomTable,
}

impl std::str::FromStr for WeightKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "canonical-singleton" | "canonical" => Ok(WeightKind::CanonicalSingleton),
            "height-decay" => Ok(WeightKind::HeightDecay),
            "custom-table" => Ok(WeightKind::CustomTable),
            _ => Err(Error::Parse(format!("unknown weight kind {s:?}"))),
        }
    }
}

/// Explicit weight values keyed by frequency and subspace.
#[derive(Clone, Debug, Default)]
pub struct WeightTable<T> {
    entries: HashMap<(FrequencyIndex, RationalSubspace), T>,
}

impl<T: Real> WeightTable<T> {
    pub fn new() -> Self {
        WeightTable { entries: HashMap::new() }
    }

    pub fn insert(&mut self, k: FrequencyIndex, a: RationalSubspace, w: T) -> Result<()> {
        if !(w > T::zero()) {
            return Err(Error::ParamViolation(format!("weight at ({k}, {a}) must be positive, got {w}")));
        }
        self.entries.insert((k, a), w);
        Ok(())
    }

    pub fn get(&self, k: &FrequencyIndex, a: &RationalSubspace) -> Option<T> {
        self.entries.get(&(k.clone(), a.clone())).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// A weight `w(k, A)` on a finite subspace family together with the normal
/// symbol `W_k = Σ_{A∈Ω_k} w(k, A)²` and its certified bounds
/// `c_w² ≤ W_k ≤ C_w²` over the band (including `k = 0`).
#[derive(Clone, Debug)]
pub struct WeightRule<T: Real> {
    kind: WeightKind,
    family: Arc<SubspaceFamily>,
    band: i64,
    omega: HashMap<FrequencyIndex, Vec<usize>>,
    normal: HashMap<FrequencyIndex, T>,
    lower: T,
    upper: T,
    table: Option<WeightTable<T>>,
}

/// Builds a weight on `Gr_H(d, n)` and certifies its constants over the band
/// `|k|_∞ ≤ band` by exhaustive summation.
pub fn weight_build<T: Real>(kind: WeightKind, d: usize, n: usize, h: i64, band: i64) -> Result<WeightRule<T>> {
    let family = SubspaceFamily::truncated(d, n, h)?;
    WeightRule::over_family(kind, Arc::new(family), band)
}

/// Smallest height `H` such that `Gr_H(d, n)` contains a subspace orthogonal
/// to every nonzero `k` in the band.
pub fn complete_cover_height(d: usize, n: usize, band: i64) -> Result<i64> {
    if d == 0 || d >= n {
        return Err(Error::InvalidDimension(format!("need 1 <= d <= n - 1, got d = {d}, n = {n}")));
    }
    let freqs: Vec<FrequencyIndex> = band_frequencies(n, band).into_iter().filter(|k| !k.is_zero()).collect();
    if d + 1 == n {
        let mut h = 1;
        for k in &freqs {
            h = h.max(RationalSubspace::hyperplane(k.as_slice())?.height());
        }
        return Ok(h);
    }
    let mut h = 1;
    loop {
        let family = SubspaceFamily::truncated(d, n, h)?;
        if freqs.iter().all(|k| !family.omega(k).is_empty()) {
            return Ok(h);
        }
        h += 1;
    }
}

impl<T: Real> WeightRule<T> {
    /// Certifies `kind` on an explicit family, e.g. a direction cover.
    pub fn over_family(kind: WeightKind, family: Arc<SubspaceFamily>, band: i64) -> Result<Self> {
        match kind {
            WeightKind::CanonicalSingleton if family.sub_dim() + 1 != family.dim() => {
                return Err(Error::UnsupportedWeight(format!(
                    "canonical-singleton needs d = n - 1, got d = {}, n = {}",
                    family.sub_dim(),
                    family.dim()
                )))
            }
            WeightKind::CustomTable => {
                return Err(Error::UnsupportedWeight("custom-table weights are built with from_table".into()))
            }
            _ => {}
        }
        Self::certify(kind, family, band, None)
    }

    pub fn from_table(family: Arc<SubspaceFamily>, band: i64, table: WeightTable<T>) -> Result<Self> {
        Self::certify(WeightKind::CustomTable, family, band, Some(table))
    }

    fn certify(kind: WeightKind, family: Arc<SubspaceFamily>, band: i64, table: Option<WeightTable<T>>) -> Result<Self> {
        if family.is_empty() {
            return Err(Error::ParamViolation("weight over an empty family".into()));
        }
        let mut rule = WeightRule {
            kind,
            family,
            band,
            omega: HashMap::new(),
            normal: HashMap::new(),
            lower: T::zero(),
            upper: T::zero(),
            table,
        };
        let mut lo = T::infinity();
        let mut hi = T::zero();
        for k in band_frequencies(rule.family.dim(), band) {
            let om = rule.family.omega(&k);
            let mut total = T::zero();
            for &i in &om {
                let w = rule.weight(&k, i)?;
                total += w * w;
            }
            if total == T::zero() {
                return Err(Error::DegenerateWeight(k.to_string()));
            }
            lo = lo.min(total);
            hi = hi.max(total);
            rule.normal.insert(k.clone(), total);
            rule.omega.insert(k, om);
        }
        rule.lower = lo.sqrt();
        rule.upper = hi.sqrt();
        Ok(rule)
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn family(&self) -> &SubspaceFamily {
        &self.family
    }

    pub fn shared_family(&self) -> Arc<SubspaceFamily> {
        Arc::clone(&self.family)
    }

    pub fn band(&self) -> i64 {
        self.band
    }

    /// `w(k, A)` for the family member with index `i`.
    pub fn weight(&self, k: &FrequencyIndex, i: usize) -> Result<T> {
        let a = self.family.get(i);
        match self.kind {
            WeightKind::CanonicalSingleton => Ok(if k.is_zero() {
                T::one() / T::from_usize(self.family.len()).expect("family size").sqrt()
            } else {
                T::one()
            }),
            WeightKind::HeightDecay => Ok(T::lit(2.0).powi(-(a.height() as i32))),
            WeightKind::CustomTable => self
                .table
                .as_ref()
                .and_then(|t| t.get(k, a))
                .ok_or_else(|| Error::WeightUndefined { frequency: k.to_string(), subspace: a.to_string() }),
        }
    }

    /// `w(k, A)` looked up by subspace.
    pub fn weight_at(&self, k: &FrequencyIndex, a: &RationalSubspace) -> Result<T> {
        let i = self
            .family
            .index_of(a)
            .ok_or_else(|| Error::WeightUndefined { frequency: k.to_string(), subspace: a.to_string() })?;
        self.weight(k, i)
    }

    /// Indices of `Ω_k` within the family, ascending.
    pub fn omega(&self, k: &FrequencyIndex) -> Vec<usize> {
        match self.omega.get(k) {
            Some(om) => om.clone(),
            None => self.family.omega(k),
        }
    }

    /// `W_k`; cached on the band, summed on demand outside it.
    pub fn normal_multiplier(&self, k: &FrequencyIndex) -> Result<T> {
        if let Some(&w) = self.normal.get(k) {
            return Ok(w);
        }
        let mut total = T::zero();
        for i in self.family.omega(k) {
            let w = self.weight(k, i)?;
            total += w * w;
        }
        Ok(total)
    }

    /// `w̃(k, A) = w(k, A) / √W_k`, so that `Σ_{A∈Ω_k} w̃² = 1`.
    pub fn normalized_weight(&self, k: &FrequencyIndex, i: usize) -> Result<T> {
        let total = self.normal_multiplier(k)?;
        if total == T::zero() {
            return Err(Error::SingularFilter(k.to_string()));
        }
        Ok(self.weight(k, i)? / total.sqrt())
    }

    /// `c_w = min_k √W_k` over the band.
    pub fn lower_bound(&self) -> T {
        self.lower
    }

    /// `C_w = max_k √W_k` over the band.
    pub fn upper_bound(&self) -> T {
        self.upper
    }

    /// `W_0 = Σ_A w(0, A)²`, the weight carried by the shared mean.
    pub fn mean_mass(&self) -> T {
        self.normal[&FrequencyIndex::zero(self.family.dim())]
    }

    /// Constants `(c_A, m_A)` with `w(k, A) ≥ c_A ⟨k⟩^{−m_A}` on the band.
    pub fn decay_bound(&self, i: usize) -> Result<(T, T)> {
        match self.kind {
            WeightKind::CanonicalSingleton | WeightKind::HeightDecay => {
                let at_zero = self.weight(&FrequencyIndex::zero(self.family.dim()), i)?;
                let elsewhere = self.weight(&FrequencyIndex(vec![1; self.family.dim()]), i)?;
                Ok((at_zero.min(elsewhere), T::zero()))
            }
            WeightKind::CustomTable => {
                let mut lo = T::infinity();
                for k in band_frequencies(self.family.dim(), self.band) {
                    if self.omega.get(&k).is_some_and(|om| om.contains(&i)) {
                        lo = lo.min(self.weight(&k, i)?);
                    }
                }
                Ok((lo, T::zero()))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{direction_cover, enumerate_directions};

    #[test]
    fn canonical_weight_has_unit_symbol() {
        let rule: WeightRule<f64> = weight_build(WeightKind::CanonicalSingleton, 1, 2, 4, 4).unwrap();
        for k in band_frequencies(2, 4) {
            assert!((rule.normal_multiplier(&k).unwrap() - 1.0).abs() < 1e-15, "{k}");
        }
        assert!((rule.lower_bound() - 1.0).abs() < 1e-15);
        assert!((rule.upper_bound() - 1.0).abs() < 1e-15);
        assert!((rule.mean_mass() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn height_decay_on_lines_in_space() {
        let rule: WeightRule<f64> = weight_build(WeightKind::HeightDecay, 1, 3, 1, 1).unwrap();
        let k = FrequencyIndex::from([0, 0, 1]);
        assert_eq!(rule.omega(&k).len(), 4);
        assert!((rule.normal_multiplier(&k).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn normalized_weights_sum_to_one() {
        let rule: WeightRule<f64> = weight_build(WeightKind::HeightDecay, 1, 3, 2, 2).unwrap();
        for k in band_frequencies(3, 2) {
            let total: f64 = rule.omega(&k).iter().map(|&i| rule.normalized_weight(&k, i).unwrap().powi(2)).sum();
            assert!((total - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn incomplete_family_is_degenerate() {
        let family = SubspaceFamily::from_directions(&enumerate_directions(2, 1)).unwrap();
        let err = WeightRule::<f64>::over_family(WeightKind::CanonicalSingleton, Arc::new(family), 2).unwrap_err();
        assert!(matches!(err, Error::DegenerateWeight(_)));
    }

    #[test]
    fn canonical_weight_needs_hyperplanes() {
        let err = weight_build::<f64>(WeightKind::CanonicalSingleton, 1, 3, 1, 1).unwrap_err();
        assert!(matches!(err, Error::UnsupportedWeight(_)));
    }

    #[test]
    fn custom_table_reports_missing_entries() {
        let family = Arc::new(SubspaceFamily::from_directions(&direction_cover(1)).unwrap());
        let mut table = WeightTable::new();
        table.insert(FrequencyIndex::zero(2), family.get(0).clone(), 1.0).unwrap();
        let err = WeightRule::from_table(family, 1, table).unwrap_err();
        assert!(matches!(err, Error::WeightUndefined { .. }));
    }

    #[test]
    fn custom_table_certifies_constants() {
        let family = Arc::new(SubspaceFamily::from_directions(&direction_cover(1)).unwrap());
        let mut table = WeightTable::new();
        for k in band_frequencies(2, 1) {
            for i in family.omega(&k) {
                table.insert(k.clone(), family.get(i).clone(), 0.5).unwrap();
            }
        }
        let rule: WeightRule<f64> = WeightRule::from_table(family, 1, table).unwrap();
        assert!((rule.lower_bound() - 0.5).abs() < 1e-15);
        assert!((rule.upper_bound() - 1.0).abs() < 1e-15);
        assert_eq!(rule.decay_bound(0).unwrap(), (0.5, 0.0));
    }

    #[test]
    fn complete_cover_heights() {
        assert_eq!(complete_cover_height(1, 2, 8).unwrap(), 8);
        assert_eq!(complete_cover_height(1, 3, 8).unwrap(), 3);
        assert_eq!(complete_cover_height(2, 3, 8).unwrap(), 8);
    }
}
