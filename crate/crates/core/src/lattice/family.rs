use std::collections::HashMap;

use super::hnf::{combinations, maximal_minor_gcd};
use super::{FrequencyIndex, PrimitiveDirection, RationalSubspace};
use crate::error::{Error, Result};

/// A finite, sorted set of canonical subspaces of one `(d, n)` type, usually
/// the height truncation `Gr_H(d, n)` or a direction cover.
#[derive(Clone, Debug)]
pub struct SubspaceFamily {
    dim: usize,
    sub_dim: usize,
    members: Vec<RationalSubspace>,
    lookup: HashMap<RationalSubspace, usize>,
}

impl SubspaceFamily {
    /// `Gr_H(d, n)`: every subspace whose canonical basis has entries in
    /// `[-h, h]`.
    ///
    /// Enumerates echelon matrices in Hermite normal form directly (pivots in
    /// `1..=h`, entries above a pivot reduced modulo it, free entries in
    /// `[-h, h]`) and keeps the saturated ones, so each subspace appears once.
    pub fn truncated(sub_dim: usize, dim: usize, h: i64) -> Result<Self> {
        if sub_dim == 0 || sub_dim >= dim {
            return Err(Error::InvalidDimension(format!("need 1 <= d <= n - 1, got d = {sub_dim}, n = {dim}")));
        }
        if h < 1 {
            return Err(Error::ParamViolation(format!("height bound must be >= 1, got {h}")));
        }
        let mut members = Vec::new();
        for_each_hnf(sub_dim, dim, h, |m| {
            if maximal_minor_gcd(m, sub_dim, dim) == 1 {
                members.push(RationalSubspace::from_hnf_unchecked(sub_dim, dim, m.to_vec()));
            }
        });
        Self::from_members(dim, sub_dim, members)
    }

    pub fn from_members(dim: usize, sub_dim: usize, members: impl IntoIterator<Item = RationalSubspace>) -> Result<Self> {
        let mut members: Vec<RationalSubspace> = members.into_iter().collect();
        if let Some(bad) = members.iter().find(|a| a.ambient_dim() != dim || a.sub_dim() != sub_dim) {
            return Err(Error::DimensionMismatch(format!("{bad} is not a {sub_dim}-subspace of Q^{dim}")));
        }
        members.sort();
        members.dedup();
        let lookup = members.iter().enumerate().map(|(i, a)| (a.clone(), i)).collect();
        Ok(SubspaceFamily { dim, sub_dim, members, lookup })
    }

    pub fn from_directions(dirs: &[PrimitiveDirection]) -> Result<Self> {
        let dim = dirs.first().map(|v| v.dim()).ok_or_else(|| Error::ParamViolation("empty direction family".into()))?;
        Self::from_members(dim, 1, dirs.iter().map(RationalSubspace::from_direction))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sub_dim(&self) -> usize {
        self.sub_dim
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[RationalSubspace] {
        &self.members
    }

    pub fn get(&self, i: usize) -> &RationalSubspace {
        &self.members[i]
    }

    pub fn index_of(&self, a: &RationalSubspace) -> Option<usize> {
        self.lookup.get(a).copied()
    }

    pub fn contains(&self, a: &RationalSubspace) -> bool {
        self.lookup.contains_key(a)
    }

    pub fn max_height(&self) -> i64 {
        self.members.iter().map(|a| a.height()).max().unwrap_or(0)
    }

    /// Indices of the members orthogonal to `k`, ascending. For hyperplane
    /// families this is a single lookup of `k^⊥`.
    pub fn omega(&self, k: &FrequencyIndex) -> Vec<usize> {
        if k.is_zero() {
            return (0..self.members.len()).collect();
        }
        if self.sub_dim + 1 == self.dim {
            return RationalSubspace::hyperplane(k.as_slice())
                .ok()
                .and_then(|a| self.index_of(&a))
                .into_iter()
                .collect();
        }
        self.members
            .iter()
            .enumerate()
            .filter(|(_, a)| a.is_orthogonal_to(k.as_slice()))
            .map(|(i, _)| i)
            .collect()
    }
}

/// Calls `f` on every `d × n` matrix (row-major) in Hermite normal form whose
/// entries are bounded by `h`.
fn for_each_hnf(d: usize, n: usize, h: i64, mut f: impl FnMut(&[i64])) {
    for pivots in combinations(n, d) {
        let mut pivot_vals = vec![1i64; d];
        loop {
            let mut m = vec![0i64; d * n];
            let mut cells: Vec<(usize, i64, i64)> = Vec::new();
            for i in 0..d {
                m[i * n + pivots[i]] = pivot_vals[i];
                for j in pivots[i] + 1..n {
                    match pivots.iter().position(|&p| p == j) {
                        Some(l) => cells.push((i * n + j, 0, pivot_vals[l] - 1)),
                        None => cells.push((i * n + j, -h, h)),
                    }
                }
            }
            for &(idx, lo, _) in &cells {
                m[idx] = lo;
            }
            'cells: loop {
                f(&m);
                for &(idx, lo, hi) in cells.iter().rev() {
                    if m[idx] < hi {
                        m[idx] += 1;
                        continue 'cells;
                    }
                    m[idx] = lo;
                }
                break;
            }
            let mut advanced = false;
            for p in pivot_vals.iter_mut().rev() {
                if *p < h {
                    *p += 1;
                    advanced = true;
                    break;
                }
                *p = 1;
            }
            if !advanced {
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{canonicalize_subspace, enumerate_directions};

    #[test]
    fn lines_agree_with_direction_enumeration() {
        for (n, h) in [(2, 1), (2, 4), (3, 1), (3, 2)] {
            let fam = SubspaceFamily::truncated(1, n, h).unwrap();
            let dirs: Vec<RationalSubspace> =
                enumerate_directions(n, h).iter().map(RationalSubspace::from_direction).collect();
            assert_eq!(fam.members(), &dirs[..], "n={n} h={h}");
        }
    }

    #[test]
    fn truncated_planes_are_canonical_and_bounded() {
        let fam = SubspaceFamily::truncated(2, 3, 2).unwrap();
        assert_eq!(fam.len(), 73);
        for a in fam.members() {
            let rows: Vec<Vec<i64>> = a.rows().map(|r| r.to_vec()).collect();
            assert_eq!(&canonicalize_subspace(&rows, 2).unwrap(), a);
            assert!(a.height() <= 2);
        }
    }

    /// Independent route to `Gr_H(2, 3)`: canonicalize every pair of
    /// primitive vectors of height `≤ h` and keep results of height `≤ h`.
    #[test]
    fn truncated_planes_match_pairwise_canonicalization() {
        let h = 2;
        let dirs = enumerate_directions(3, h);
        let mut seen = std::collections::BTreeSet::new();
        for (i, u) in dirs.iter().enumerate() {
            for v in &dirs[i + 1..] {
                let a = canonicalize_subspace(&[u.components().to_vec(), v.components().to_vec()], 2).unwrap();
                if a.height() <= h {
                    seen.insert(a);
                }
            }
        }
        let fam = SubspaceFamily::truncated(2, 3, h).unwrap();
        assert_eq!(fam.members(), &seen.into_iter().collect::<Vec<_>>()[..]);
    }

    #[test]
    fn grassmannian_counts_match_duality() {
        // Gr_1(2, 3) and Gr_1(1, 3) both have 13 elements.
        assert_eq!(SubspaceFamily::truncated(2, 3, 1).unwrap().len(), 13);
        assert_eq!(SubspaceFamily::truncated(2, 3, 3).unwrap().len(), 425);
    }

    #[test]
    fn omega_indices_are_orthogonal() {
        let fam = SubspaceFamily::truncated(1, 3, 2).unwrap();
        let k = FrequencyIndex::from([1, -1, 0]);
        let om = fam.omega(&k);
        assert!(!om.is_empty());
        for &i in &om {
            assert!(fam.get(i).is_orthogonal_to(k.as_slice()));
        }
        assert_eq!(fam.omega(&FrequencyIndex::zero(3)).len(), fam.len());
    }
}
