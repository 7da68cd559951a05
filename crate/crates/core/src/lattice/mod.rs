//! Integer-lattice engine: primitive directions (the set `Q`), canonical
//! rational subspaces (elements of `Gr(d, n)`), the sets
//! `Ω_k = {A : k ⊥ A}` and direction covers of frequency bands.
//!
//! The infinite Grassmannian is replaced by its height truncation
//! `Gr_H(d, n)`: subspaces whose canonical basis has entries bounded by `H`
//! in absolute value. Every function taking a height documents that the
//! answer depends on it.

mod family;
pub mod hnf;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{japanese_bracket, Real};

pub use family::SubspaceFamily;

/// A frequency `k ∈ ℤⁿ`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FrequencyIndex(pub Vec<i64>);

impl FrequencyIndex {
    pub fn new(k: impl Into<Vec<i64>>) -> Self {
        FrequencyIndex(k.into())
    }

    pub fn zero(dim: usize) -> Self {
        FrequencyIndex(vec![0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn sup_norm(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    pub fn dot(&self, v: &[i64]) -> i64 {
        self.0.iter().zip(v).map(|(a, b)| a * b).sum()
    }

    pub fn neg(&self) -> Self {
        FrequencyIndex(self.0.iter().map(|c| -c).collect())
    }

    /// `⟨k⟩ = (1 + |k|²)^{1/2}`.
    pub fn bracket<T: Real>(&self) -> T {
        japanese_bracket(&self.0)
    }
}

impl From<Vec<i64>> for FrequencyIndex {
    fn from(v: Vec<i64>) -> Self {
        FrequencyIndex(v)
    }
}

impl<const N: usize> From<[i64; N]> for FrequencyIndex {
    fn from(v: [i64; N]) -> Self {
        FrequencyIndex(v.to_vec())
    }
}

impl fmt::Display for FrequencyIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", join(&self.0, ","))
    }
}

fn join(v: &[i64], sep: &str) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep)
}

fn parse_ints(s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .map(|t| t.trim().parse::<i64>().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
        .collect()
}

/// Nonzero integer vector with coprime entries whose first nonzero entry is
/// positive. Every nonzero `v ∈ ℤⁿ` is an integer multiple of exactly one.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct PrimitiveDirection(Vec<i64>);

impl PrimitiveDirection {
    pub fn components(&self) -> &[i64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn l1_norm(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).sum()
    }

    pub fn sup_norm(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    pub fn euclidean_norm<T: Real>(&self) -> T {
        let sq: i64 = self.0.iter().map(|c| c * c).sum();
        T::from_i64_exact(sq).sqrt()
    }

    pub fn dot(&self, k: &[i64]) -> i64 {
        self.0.iter().zip(k).map(|(a, b)| a * b).sum()
    }

    /// `v^⊥ = (−v₂, v₁)` for planar directions.
    pub fn perp(&self) -> Result<[i64; 2]> {
        match self.0.as_slice() {
            &[a, b] => Ok([-b, a]),
            _ => Err(Error::InvalidDimension(format!("perp needs n = 2, got n = {}", self.dim()))),
        }
    }
}

impl TryFrom<Vec<i64>> for PrimitiveDirection {
    type Error = Error;

    fn try_from(v: Vec<i64>) -> Result<Self> {
        let p = primitive_reduce(&v)?;
        if p.0 != v {
            return Err(Error::Parse(format!("{} is not a canonical primitive vector", join(&v, ","))));
        }
        Ok(p)
    }
}

impl From<PrimitiveDirection> for Vec<i64> {
    fn from(p: PrimitiveDirection) -> Self {
        p.0
    }
}

impl fmt::Display for PrimitiveDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&join(&self.0, ","))
    }
}

/// Parses comma-separated integers and reduces them to the canonical
/// representative of their line.
impl FromStr for PrimitiveDirection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        primitive_reduce(&parse_ints(s)?)
    }
}

/// `v / gcd(v)` with the first nonzero entry made positive.
pub fn primitive_reduce(v: &[i64]) -> Result<PrimitiveDirection> {
    let g = v.iter().fold(0i64, |g, &x| g.gcd(&x));
    if g == 0 {
        return Err(Error::ZeroVector);
    }
    let lead = v.iter().copied().find(|&x| x != 0).unwrap_or(0);
    let sign = if lead < 0 { -1 } else { 1 };
    Ok(PrimitiveDirection(v.iter().map(|x| sign * x / g).collect()))
}

/// The unique direction in `Q` orthogonal to a nonzero planar frequency.
pub fn orthogonal_primitive(k: &FrequencyIndex) -> Result<PrimitiveDirection> {
    match k.as_slice() {
        &[a, b] => primitive_reduce(&[-b, a]),
        _ => Err(Error::InvalidDimension(format!("orthogonal_primitive needs n = 2, got n = {}", k.dim()))),
    }
}

/// Steps `v` through the cube `[-h, h]^n` in lexicographic order.
fn next_in_cube(v: &mut [i64], h: i64) -> bool {
    for c in v.iter_mut().rev() {
        if *c < h {
            *c += 1;
            return true;
        }
        *c = -h;
    }
    false
}

/// Every canonical primitive vector with `|v|_∞ ≤ h`, sorted
/// lexicographically. This is `Q` truncated at height `h`.
pub fn enumerate_directions(n: usize, h: i64) -> Vec<PrimitiveDirection> {
    if n == 0 || h < 1 {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut v = vec![-h; n];
    loop {
        if let Ok(p) = primitive_reduce(&v) {
            if p.0 == v {
                out.push(p);
            }
        }
        if !next_in_cube(&mut v, h) {
            break;
        }
    }
    out
}

/// All frequencies `k ∈ ℤⁿ` with `|k|_∞ ≤ band`, lexicographic.
pub fn band_frequencies(n: usize, band: i64) -> Vec<FrequencyIndex> {
    let mut out = Vec::with_capacity((2 * band.max(0) as usize + 1).pow(n as u32));
    if band < 0 {
        return out;
    }
    let mut v = vec![-band; n];
    loop {
        out.push(FrequencyIndex(v.clone()));
        if !next_in_cube(&mut v, band) {
            break;
        }
    }
    out
}

/// Greedy set of planar directions such that every `k` with
/// `0 < |k|_∞ ≤ radius` is orthogonal to one of them.
///
/// Candidates are ranked by how many uncovered frequencies they annihilate,
/// ties broken lexicographically. In the plane each frequency line has a
/// single orthogonal direction, so residual coverage of the remaining
/// candidates never changes and the greedy order is a single sort. The
/// result is not claimed to be minimal.
pub fn direction_cover(radius: i64) -> Vec<PrimitiveDirection> {
    if radius <= 0 {
        return vec![PrimitiveDirection(vec![1, 0])];
    }
    let mut coverage: std::collections::BTreeMap<PrimitiveDirection, usize> = Default::default();
    for k in band_frequencies(2, radius) {
        if let Ok(v) = orthogonal_primitive(&k) {
            *coverage.entry(v).or_default() += 1;
        }
    }
    let mut ranked: Vec<(PrimitiveDirection, usize)> = coverage.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.into_iter().map(|(v, _)| v).collect()
}

/// A `d`-dimensional subspace of `ℚⁿ`, stored as the Hermite normal form of
/// the saturated lattice it cuts out of `ℤⁿ`. Equal values are equal
/// subspaces.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RationalSubspace {
    dim: usize,
    sub_dim: usize,
    basis: Vec<i64>,
}

impl RationalSubspace {
    /// Caller guarantees `basis` is already a saturated HNF basis.
    pub(crate) fn from_hnf_unchecked(sub_dim: usize, dim: usize, basis: Vec<i64>) -> Self {
        debug_assert_eq!(basis.len(), sub_dim * dim);
        RationalSubspace { dim, sub_dim, basis }
    }

    pub fn from_direction(v: &PrimitiveDirection) -> Self {
        RationalSubspace { dim: v.dim(), sub_dim: 1, basis: v.0.clone() }
    }

    /// The hyperplane `k^⊥` for a nonzero `k`.
    pub fn hyperplane(k: &[i64]) -> Result<Self> {
        let n = k.len();
        if n < 2 {
            return Err(Error::InvalidDimension(format!("hyperplane needs n >= 2, got {n}")));
        }
        if k.iter().all(|&c| c == 0) {
            return Err(Error::ZeroVector);
        }
        let basis = if k.iter().all(|c| c.abs() <= 1 << 20) {
            let row: Vec<i128> = k.iter().map(|&c| c as i128).collect();
            let mut ker = hnf::integer_kernel(&[row], n);
            hnf::row_hnf(&mut ker, n);
            ker.into_iter().flatten().map(|x| x as i64).collect()
        } else {
            let row: Vec<BigInt> = k.iter().map(|&c| BigInt::from(c)).collect();
            let mut ker = hnf::integer_kernel(&[row], n);
            hnf::row_hnf(&mut ker, n);
            to_i64_flat(ker)?
        };
        Ok(RationalSubspace { dim: n, sub_dim: n - 1, basis })
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn sub_dim(&self) -> usize {
        self.sub_dim
    }

    pub fn basis(&self) -> &[i64] {
        &self.basis
    }

    pub fn rows(&self) -> impl Iterator<Item = &[i64]> {
        self.basis.chunks(self.dim)
    }

    /// Max absolute entry of the canonical basis.
    pub fn height(&self) -> i64 {
        self.basis.iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    /// `k ⊥ A`: `k · a = 0` for every basis row `a`.
    pub fn is_orthogonal_to(&self, k: &[i64]) -> bool {
        self.rows().all(|row| row.iter().zip(k).map(|(a, b)| a * b).sum::<i64>() == 0)
    }

    /// The direction of a line (`d = 1`).
    pub fn as_direction(&self) -> Option<PrimitiveDirection> {
        (self.sub_dim == 1).then(|| PrimitiveDirection(self.basis.clone()))
    }

    /// Filesystem-safe form of the serialization, e.g. `1_2__2,-1`.
    pub fn file_stem(&self) -> String {
        self.to_string().replace("; ", "__").replace(' ', "_")
    }

    pub fn from_file_stem(stem: &str) -> Result<Self> {
        stem.replace("__", "; ").replace('_', " ").parse()
    }
}

fn to_i64_flat(m: hnf::IntMatrix<BigInt>) -> Result<Vec<i64>> {
    m.into_iter()
        .flatten()
        .map(|x| x.to_i64().ok_or_else(|| Error::ParamViolation(format!("basis entry {x} exceeds i64"))))
        .collect()
}

/// `d n; row1; row2; ...` with comma-separated rows.
impl fmt::Display for RationalSubspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.sub_dim, self.dim)?;
        for row in self.rows() {
            write!(f, "; {}", join(row, ","))?;
        }
        Ok(())
    }
}

impl FromStr for RationalSubspace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(';');
        let header = parts.next().unwrap_or("");
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
            .collect::<Result<_>>()?;
        let [d, n] = dims[..] else {
            return Err(Error::Parse(format!("expected `d n` header, got {header:?}")));
        };
        let rows: Vec<Vec<i64>> = parts.map(parse_ints).collect::<Result<_>>()?;
        if rows.len() != d || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Parse(format!("expected {d} rows of length {n} in {s:?}")));
        }
        canonicalize_subspace(&rows, d)
    }
}

/// Canonical representative of `span_ℚ(rows)`: the HNF basis of the
/// saturated lattice. Depends only on the span of the input.
pub fn canonicalize_subspace(rows: &[Vec<i64>], d: usize) -> Result<RationalSubspace> {
    let n = rows.first().map(|r| r.len()).ok_or(Error::RankMismatch { expected: d, found: 0 })?;
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch("rows have different lengths".into()));
    }
    if d == 0 || d >= n {
        return Err(Error::InvalidDimension(format!("need 1 <= d <= n - 1, got d = {d}, n = {n}")));
    }
    let big: hnf::IntMatrix<BigInt> = rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let (rank, sat) = hnf::saturated_hnf(&big, n);
    if rank != d {
        return Err(Error::RankMismatch { expected: d, found: rank });
    }
    Ok(RationalSubspace { dim: n, sub_dim: d, basis: to_i64_flat(sat)? })
}

/// `Ω_k ∩ Gr_H(d, n)`: canonical `d`-subspaces of height at most `h`
/// orthogonal to `k`, sorted. `k = 0` yields the whole truncation.
///
/// For `d = n − 1` and `k ≠ 0` the untruncated set is `{k^⊥}`; it is returned
/// whenever its height is at most `h`.
pub fn omega_k(k: &FrequencyIndex, d: usize, n: usize, h: i64) -> Result<Vec<RationalSubspace>> {
    if k.dim() != n {
        return Err(Error::DimensionMismatch(format!("k has dimension {}, expected {n}", k.dim())));
    }
    if d + 1 == n && !k.is_zero() {
        let a = RationalSubspace::hyperplane(k.as_slice())?;
        return Ok(if a.height() <= h { vec![a] } else { Vec::new() });
    }
    let family = SubspaceFamily::truncated(d, n, h)?;
    Ok(family.members().iter().filter(|a| a.is_orthogonal_to(k.as_slice())).cloned().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dir(v: &[i64]) -> PrimitiveDirection {
        PrimitiveDirection(v.to_vec())
    }

    fn sub(rows: &[&[i64]]) -> RationalSubspace {
        canonicalize_subspace(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>(), rows.len()).unwrap()
    }

    #[test]
    fn primitive_reduce_examples() {
        assert_eq!(primitive_reduce(&[4, 6]).unwrap(), dir(&[2, 3]));
        assert_eq!(primitive_reduce(&[0, -5]).unwrap(), dir(&[0, 1]));
        assert_eq!(primitive_reduce(&[3, 5]).unwrap(), dir(&[3, 5]));
        assert_eq!(primitive_reduce(&[0, 0]), Err(Error::ZeroVector));
    }

    #[test]
    fn orthogonal_primitive_examples() {
        assert_eq!(orthogonal_primitive(&[1, 2].into()).unwrap(), dir(&[2, -1]));
        assert_eq!(orthogonal_primitive(&[2, 4].into()).unwrap(), dir(&[2, -1]));
        assert_eq!(orthogonal_primitive(&[0, 3].into()).unwrap(), dir(&[1, 0]));
        assert_eq!(orthogonal_primitive(&[0, 0].into()), Err(Error::ZeroVector));
        assert!(orthogonal_primitive(&[1, 0, 0].into()).is_err());
    }

    /// Independent count: every nonzero vector in the cube, quotiented by
    /// sign, kept when its gcd is one.
    fn brute_force_directions(n: usize, h: i64) -> Vec<Vec<i64>> {
        let mut seen = std::collections::BTreeSet::new();
        let side = 2 * h + 1;
        for idx in 0..side.pow(n as u32) {
            let mut rem = idx;
            let v: Vec<i64> = (0..n)
                .map(|_| {
                    let c = rem % side - h;
                    rem /= side;
                    c
                })
                .collect();
            let g = v.iter().fold(0i64, |g, &x| g.gcd(&x));
            if g != 1 {
                continue;
            }
            let neg: Vec<i64> = v.iter().map(|x| -x).collect();
            seen.insert(std::cmp::max(v, neg));
        }
        seen.into_iter().collect()
    }

    #[test]
    fn enumerate_directions_examples() {
        let h1: Vec<Vec<i64>> = enumerate_directions(2, 1).into_iter().map(Vec::from).collect();
        assert_eq!(h1, vec![vec![0, 1], vec![1, -1], vec![1, 0], vec![1, 1]]);
        assert_eq!(enumerate_directions(2, 2).len(), 8);
        assert_eq!(enumerate_directions(3, 1).len(), 13);
        for (n, h) in [(2, 1), (2, 2), (2, 5), (3, 1), (3, 2), (4, 1)] {
            let got: Vec<Vec<i64>> = enumerate_directions(n, h).into_iter().map(Vec::from).collect();
            assert_eq!(got, brute_force_directions(n, h), "n={n} h={h}");
        }
    }

    #[test]
    fn canonicalize_examples() {
        let a = sub(&[&[2, 0, 0], &[0, 1, 0]]);
        assert_eq!(a.basis(), &[1, 0, 0, 0, 1, 0]);
        assert_eq!(sub(&[&[0, 1, 0], &[1, 0, 0]]), a);
        assert_eq!(sub(&[&[1, 1]]).basis(), &[1, 1]);
        let err = canonicalize_subspace(&[vec![1, 2, 3], vec![2, 4, 6]], 2).unwrap_err();
        assert_eq!(err, Error::RankMismatch { expected: 2, found: 1 });
    }

    #[test]
    fn hyperplane_matches_canonicalized_kernel() {
        let a = RationalSubspace::hyperplane(&[1, 1, 1]).unwrap();
        assert_eq!(a, sub(&[&[1, 0, -1], &[0, 1, -1]]));
        let b = RationalSubspace::hyperplane(&[1, 2]).unwrap();
        assert_eq!(b.as_direction().unwrap(), dir(&[2, -1]));
        // the worst case of the K = 8 band in three dimensions
        let c = RationalSubspace::hyperplane(&[-8, -8, -7]).unwrap();
        assert_eq!(c.basis(), &[1, 6, -8, 0, 7, -8]);
        assert_eq!(c.height(), 8);
    }

    #[test]
    fn omega_k_examples() {
        let o = omega_k(&[1, 2].into(), 1, 2, 2).unwrap();
        assert_eq!(o, vec![RationalSubspace::from_direction(&dir(&[2, -1]))]);
        let o = omega_k(&[1, 1, 1].into(), 2, 3, 1).unwrap();
        assert_eq!(o.len(), 1);
        assert_eq!(o[0].basis(), &[1, 0, -1, 0, 1, -1]);
        let o = omega_k(&[0, 0, 1].into(), 1, 3, 1).unwrap();
        let lines: Vec<Vec<i64>> = o.iter().map(|a| a.basis().to_vec()).collect();
        assert_eq!(lines, vec![vec![0, 1, 0], vec![1, -1, 0], vec![1, 0, 0], vec![1, 1, 0]]);
    }

    #[test]
    fn omega_k_hyperplane_shortcut_agrees_with_enumeration() {
        let family = SubspaceFamily::truncated(2, 3, 2).unwrap();
        for k in band_frequencies(3, 2) {
            if k.is_zero() {
                continue;
            }
            let scan: Vec<RationalSubspace> =
                family.members().iter().filter(|a| a.is_orthogonal_to(k.as_slice())).cloned().collect();
            assert_eq!(omega_k(&k, 2, 3, 2).unwrap(), scan, "k = {k}");
        }
    }

    #[test]
    fn direction_cover_examples() {
        assert_eq!(direction_cover(0), vec![dir(&[1, 0])]);
        let c1 = direction_cover(1);
        assert_eq!(c1.len(), 4);
        let mut sorted = c1.clone();
        sorted.sort();
        assert_eq!(sorted, vec![dir(&[0, 1]), dir(&[1, -1]), dir(&[1, 0]), dir(&[1, 1])]);
        assert_eq!(direction_cover(2).len(), 8);
    }

    #[test]
    fn direction_cover_is_exhaustive() {
        for r in 0..=12 {
            let cover = direction_cover(r);
            for k in band_frequencies(2, r) {
                if k.is_zero() {
                    continue;
                }
                assert!(cover.iter().any(|v| v.dot(k.as_slice()) == 0), "R={r} k={k}");
            }
        }
    }

    #[test]
    fn serialization_round_trips() {
        let a = sub(&[&[1, 0, -1], &[0, 1, -1]]);
        assert_eq!(a.to_string(), "2 3; 1,0,-1; 0,1,-1");
        assert_eq!(a.to_string().parse::<RationalSubspace>().unwrap(), a);
        assert_eq!(RationalSubspace::from_file_stem(&a.file_stem()).unwrap(), a);
        let v: PrimitiveDirection = "2,-1".parse().unwrap();
        assert_eq!(v.to_string(), "2,-1");
        assert_eq!("-4,2".parse::<PrimitiveDirection>().unwrap(), v);
    }
}
