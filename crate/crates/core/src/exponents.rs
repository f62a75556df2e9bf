//! Exponent vectors of monomials in F_q[x_1..x_l]/(x_i^q - x_i) and the
//! combinatorics built on them: reduced Minkowski sums, footprint values,
//! hyperbolic sets and their size recurrences.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExponentError {
    #[error("exponent {value} is out of range for q = {q}")]
    OutOfRange { value: u64, q: u64 },
    #[error("parameter mismatch: (q, l) = ({0}, {1}) vs ({2}, {3})")]
    Mismatch(u64, usize, u64, usize),
    #[error("empty exponent set")]
    Empty,
    #[error("target {target} exceeds q^l = {max}")]
    Infeasible { target: u64, max: u64 },
    #[error("set of size {size} exceeds the capacity limit {limit}")]
    Capacity { size: u128, limit: u64 },
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("cannot parse exponent vector {0:?}")]
    Parse(String),
}

/// Default cap on the number of points any enumeration may visit.
pub const DEFAULT_LIMIT: u64 = 1 << 22;

/// `(a)_q`: the canonical exponent of `x^a` in the ring of functions, for
/// `a` a sum of two exponents below `q` (so `a ≤ 2q - 2`).
pub fn reduce_q(a: u64, q: u64) -> Result<u64, ExponentError> {
    if a < q {
        Ok(a)
    } else if a < 2 * q - 1 {
        Ok(a % q + 1)
    } else {
        Err(ExponentError::OutOfRange { value: a, q })
    }
}

#[inline]
fn reduce_unchecked(a: u32, q: u32) -> u32 {
    if a < q {
        a
    } else {
        a - q + 1
    }
}

/// Exponents of a monomial, one entry per variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExponentVector(pub Vec<u32>);

impl ExponentVector {
    pub fn zero(l: usize) -> Self {
        ExponentVector(vec![0; l])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Coordinatewise `(a + b)_q`.
    pub fn add_q(&self, other: &Self, q: u64) -> Self {
        ExponentVector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(&a, &b)| reduce_unchecked(a + b, q as u32))
                .collect(),
        )
    }

    /// `∏ (q - c_i)`.
    pub fn footprint(&self, q: u64) -> u64 {
        self.0.iter().map(|&c| q - c as u64).product()
    }

    /// Coordinatewise product (the star product `k ⋆ s`).
    pub fn star(&self, other: &Self) -> Self {
        ExponentVector(self.0.iter().zip(&other.0).map(|(a, b)| a * b).collect())
    }

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&c| c != 0).count()
    }
}

impl fmt::Display for ExponentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl FromStr for ExponentVector {
    type Err = ExponentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let inner = s
            .trim()
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| ExponentError::Parse(s.to_string()))?;
        inner
            .split(',')
            .map(|t| t.trim().parse::<u32>())
            .collect::<Result<Vec<_>, _>>()
            .map(ExponentVector)
            .map_err(|_| ExponentError::Parse(s.to_string()))
    }
}

/// A set of exponent vectors in N_{<q}^l, kept sorted lexicographically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExponentSet {
    q: u64,
    l: usize,
    members: Vec<ExponentVector>,
}

impl ExponentSet {
    pub fn new(
        q: u64,
        l: usize,
        members: impl IntoIterator<Item = ExponentVector>,
    ) -> Result<Self, ExponentError> {
        let mut members: Vec<ExponentVector> = members.into_iter().collect();
        for v in &members {
            if v.len() != l {
                return Err(ExponentError::Param(format!(
                    "vector {v} does not have {l} coordinates"
                )));
            }
            if let Some(&bad) = v.0.iter().find(|&&c| c as u64 >= q) {
                return Err(ExponentError::OutOfRange {
                    value: bad as u64,
                    q,
                });
            }
        }
        members.sort_unstable();
        members.dedup();
        Ok(ExponentSet { q, l, members })
    }

    /// Caller guarantees validity; sorts and deduplicates.
    pub(crate) fn from_raw(q: u64, l: usize, mut members: Vec<ExponentVector>) -> Self {
        members.sort_unstable();
        members.dedup();
        ExponentSet { q, l, members }
    }

    /// All vectors with `a_i < bounds_i`.
    pub fn boxed(q: u64, bounds: &[u32]) -> Result<Self, ExponentError> {
        if let Some(&b) = bounds.iter().find(|&&b| b as u64 > q || b == 0) {
            return Err(ExponentError::Param(format!(
                "box bound {b} must lie in 1..={q}"
            )));
        }
        let mut out = Vec::new();
        for_each_in_box(bounds, |v| out.push(ExponentVector(v.to_vec())));
        Ok(ExponentSet::from_raw(q, bounds.len(), out))
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ExponentVector> {
        self.members.iter()
    }

    pub fn members(&self) -> &[ExponentVector] {
        &self.members
    }

    pub fn contains(&self, v: &ExponentVector) -> bool {
        self.members.binary_search(v).is_ok()
    }

    /// Position of `v` in the lexicographic order.
    pub fn position(&self, v: &ExponentVector) -> Option<usize> {
        self.members.binary_search(v).ok()
    }

    fn check_same(&self, other: &Self) -> Result<(), ExponentError> {
        if self.q != other.q || self.l != other.l {
            return Err(ExponentError::Mismatch(self.q, self.l, other.q, other.l));
        }
        Ok(())
    }

    /// `{ (a + b)_q : a ∈ self, b ∈ other }`.
    pub fn minkowski_sum_q(&self, other: &Self) -> Result<Self, ExponentError> {
        self.check_same(other)?;
        let (q, l) = (self.q, self.l);
        let space = (q as u128).checked_pow(l as u32).filter(|&n| n <= u64::MAX as u128);
        if let Some(space) = space {
            // base-q keys sort like the vectors they encode
            let mut keys: Vec<u64> = Vec::new();
            let mut bitmap = if space <= 1 << 26 { vec![false; space as usize] } else { Vec::new() };
            for a in &self.members {
                for b in &other.members {
                    let key = a.0.iter().zip(&b.0).fold(0u64, |k, (&x, &y)| {
                        k * q + reduce_unchecked(x + y, q as u32) as u64
                    });
                    if bitmap.is_empty() {
                        keys.push(key);
                    } else {
                        bitmap[key as usize] = true;
                    }
                }
            }
            if bitmap.is_empty() {
                keys.sort_unstable();
                keys.dedup();
            } else {
                keys = (0..space as u64).filter(|&k| bitmap[k as usize]).collect();
            }
            let members = keys
                .into_iter()
                .map(|mut k| {
                    let mut v = vec![0u32; l];
                    for c in v.iter_mut().rev() {
                        *c = (k % q) as u32;
                        k /= q;
                    }
                    ExponentVector(v)
                })
                .collect();
            return Ok(ExponentSet { q, l, members });
        }
        let mut out = Vec::with_capacity(self.len() * other.len());
        for a in &self.members {
            for b in &other.members {
                out.push(a.add_q(b, self.q));
            }
        }
        Ok(ExponentSet::from_raw(self.q, self.l, out))
    }

    /// Minimum of `∏(q - c_i)` over the set, with the lexicographically
    /// smallest minimizer.
    pub fn fb(&self) -> Result<FootprintValue, ExponentError> {
        let mut best: Option<(u64, &ExponentVector)> = None;
        for v in &self.members {
            let value = v.footprint(self.q);
            // members are sorted, so a strict improvement keeps the lexicographic tie-break
            if best.is_none_or(|(b, _)| value < b) {
                best = Some((value, v));
            }
        }
        best.map(|(value, w)| FootprintValue {
            value,
            witness: w.clone(),
        })
        .ok_or(ExponentError::Empty)
    }

    /// `q^l - fb`: the largest footprint of a nonzero function in the
    /// monomial span of the set.
    pub fn delta(&self) -> Result<u64, ExponentError> {
        Ok(total(self.q, self.l) - self.fb()?.value)
    }

    /// Coordinates (0-based) where some member is nonzero.
    pub fn support(&self) -> Vec<usize> {
        (0..self.l)
            .filter(|&i| self.members.iter().any(|v| v.0[i] != 0))
            .collect()
    }

    /// Translate every coordinate so its minimum over the set is zero.
    /// Returns the translated set and the subtracted offsets.
    pub fn anchor_to_axes(&self) -> (Self, ExponentVector) {
        let mut offset = vec![0u32; self.l];
        if let Some(first) = self.members.first() {
            offset.clone_from(&first.0);
            for v in &self.members {
                for (o, &c) in offset.iter_mut().zip(&v.0) {
                    *o = (*o).min(c);
                }
            }
        }
        let moved = self
            .members
            .iter()
            .map(|v| ExponentVector(v.0.iter().zip(&offset).map(|(c, o)| c - o).collect()))
            .collect();
        (
            ExponentSet::from_raw(self.q, self.l, moved),
            ExponentVector(offset),
        )
    }

    /// Embed into `l_total` coordinates starting at `offset`, zeros elsewhere.
    pub fn pad(&self, offset: usize, l_total: usize) -> Self {
        let members = self
            .members
            .iter()
            .map(|v| {
                let mut w = vec![0; l_total];
                w[offset..offset + self.l].copy_from_slice(&v.0);
                ExponentVector(w)
            })
            .collect();
        ExponentSet::from_raw(self.q, l_total, members)
    }

    /// Keep only the listed coordinates.
    pub fn project(&self, keep: &[usize]) -> Self {
        let members = self
            .members
            .iter()
            .map(|v| ExponentVector(keep.iter().map(|&i| v.0[i]).collect()))
            .collect();
        ExponentSet::from_raw(self.q, keep.len(), members)
    }

    /// File form: one vector per line, lexicographic, newline-terminated.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for v in &self.members {
            s.push_str(&v.to_string());
            s.push('\n');
        }
        s
    }

    pub fn from_text(q: u64, l: usize, text: &str) -> Result<Self, ExponentError> {
        let members = text
            .lines()
            .filter(|line| !line.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<ExponentVector>, _>>()?;
        ExponentSet::new(q, l, members)
    }
}

impl<'a> IntoIterator for &'a ExponentSet {
    type Item = &'a ExponentVector;
    type IntoIter = std::slice::Iter<'a, ExponentVector>;
    fn into_iter(self) -> Self::IntoIter {
        self.members.iter()
    }
}

/// Minimum footprint product of a set together with the vector attaining it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FootprintValue {
    pub value: u64,
    pub witness: ExponentVector,
}

pub fn total(q: u64, l: usize) -> u64 {
    q.pow(l as u32)
}

fn checked_total(q: u64, l: usize, limit: u64) -> Result<u64, ExponentError> {
    let size = (q as u128).checked_pow(l as u32).unwrap_or(u128::MAX);
    if size > limit as u128 {
        return Err(ExponentError::Capacity { size, limit });
    }
    Ok(size as u64)
}

/// Calls `f` on every vector with `v_i < bounds_i`, lexicographically.
pub(crate) fn for_each_in_box(bounds: &[u32], mut f: impl FnMut(&[u32])) {
    if bounds.contains(&0) {
        return;
    }
    let mut v = vec![0u32; bounds.len()];
    loop {
        f(&v);
        let mut i = bounds.len();
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            v[i] += 1;
            if v[i] < bounds[i] {
                break;
            }
            v[i] = 0;
        }
    }
}

/// `Hyp_q(F, l) = { a ∈ N_{<q}^l : ∏(q - a_i) ≥ F }` by enumeration.
pub fn hyp_set(q: u64, l: usize, f: u64, limit: u64) -> Result<ExponentSet, ExponentError> {
    checked_total(q, l, limit)?;
    let mut out = Vec::new();
    for_each_in_box(&vec![q as u32; l], |v| {
        let prod: u64 = v.iter().map(|&c| q - c as u64).product();
        if prod >= f {
            out.push(ExponentVector(v.to_vec()));
        }
    });
    Ok(ExponentSet::from_raw(q, l, out))
}

fn ceil_div(a: u64, b: u64) -> u64 {
    a.div_ceil(b)
}

/// Memoized `|Hyp_q(F, l)|` for a fixed `q`.
#[derive(Debug, Default)]
pub struct HypSizer {
    q: u64,
    memo: HashMap<(u64, usize), u64>,
}

impl HypSizer {
    pub fn new(q: u64) -> Self {
        HypSizer {
            q,
            memo: HashMap::new(),
        }
    }

    pub fn size(&mut self, f: u64, l: usize) -> u64 {
        let q = self.q;
        if l == 0 {
            return u64::from(f <= 1);
        }
        if f <= 1 {
            return total(q, l);
        }
        if l == 1 {
            return (q + 1).saturating_sub(f);
        }
        if let Some(&v) = self.memo.get(&(f, l)) {
            return v;
        }
        let v = (1..=q).map(|i| self.size(ceil_div(f, i), l - 1)).sum();
        self.memo.insert((f, l), v);
        v
    }
}

/// `|Hyp_q(F, l)|` via the recurrence on the last coordinate.
pub fn hyp_size(q: u64, l: usize, f: u64) -> u64 {
    HypSizer::new(q).size(f, l)
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Closed form of `|Hyp_2(F, l)|`: vectors of weight at most `l - ⌈log2 F⌉`.
pub fn hyp2_size(l: usize, f: u64) -> u64 {
    if f <= 1 {
        return 1u64 << l;
    }
    let log = 64 - (f - 1).leading_zeros() as u64; // ⌈log2 f⌉
    let l = l as u64;
    if log > l {
        return 0;
    }
    (0..=l - log).map(|i| binomial(l, i)).sum()
}

/// Largest `F` with `|Hyp_q(F, l)| ≥ target`.
pub fn xi_bound(q: u64, l: usize, target: u64) -> Result<u64, ExponentError> {
    let max = total(q, l);
    if target == 0 {
        return Err(ExponentError::Param("target must be at least 1".into()));
    }
    if target > max {
        return Err(ExponentError::Infeasible { target, max });
    }
    let mut sizer = HypSizer::new(q);
    // size is nonincreasing in F and size(1) = q^l ≥ target
    let (mut lo, mut hi) = (1u64, max);
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        if sizer.size(mid, l) >= target {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    Ok(lo)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(q: u64, l: usize, vs: &[&[u32]]) -> ExponentSet {
        ExponentSet::new(q, l, vs.iter().map(|v| ExponentVector(v.to_vec()))).unwrap()
    }

    #[test]
    fn reduction() {
        assert_eq!(reduce_q(3, 5), Ok(3));
        assert_eq!(reduce_q(7, 5), Ok(3));
        assert_eq!(reduce_q(2, 2), Ok(1));
        assert!(reduce_q(10, 5).is_err());
        // x^(2q-1) cannot arise from two reduced exponents
        assert!(reduce_q(9, 5).is_err());
        for q in 2..20 {
            for a in 0..q {
                assert_eq!(reduce_q(reduce_q(a, q).unwrap(), q), Ok(a));
            }
            for a in q..2 * q - 1 {
                let r = reduce_q(a, q).unwrap();
                assert!((1..q).contains(&r));
            }
        }
    }

    #[test]
    fn minkowski_examples() {
        let b = set(5, 2, &[&[1, 2], &[3, 0]]);
        let zero = set(5, 2, &[&[0, 0]]);
        assert_eq!(zero.minkowski_sum_q(&b).unwrap(), b);

        let a = set(5, 1, &[&[0], &[1]]);
        let b = set(5, 1, &[&[0], &[2]]);
        let s = a.minkowski_sum_q(&b).unwrap();
        assert_eq!(s, set(5, 1, &[&[0], &[1], &[2], &[3]]));

        let a = set(2, 2, &[&[0, 1]]);
        assert_eq!(a.minkowski_sum_q(&a).unwrap(), a);

        let c = set(3, 2, &[&[0, 0]]);
        assert!(matches!(
            a.minkowski_sum_q(&c),
            Err(ExponentError::Mismatch(..))
        ));
    }

    #[test]
    fn footprint_and_delta() {
        let s = set(3, 2, &[&[0, 0]]);
        assert_eq!(s.fb().unwrap().value, 9);
        assert_eq!(s.delta().unwrap(), 0);
        let empty = ExponentSet::new(3, 2, vec![]).unwrap();
        assert_eq!(empty.fb(), Err(ExponentError::Empty));

        // box sum for m_i = 2, n_i = 6 at q = 19
        let da = ExponentSet::boxed(19, &[2, 2]).unwrap();
        let db = ExponentSet::new(
            19,
            2,
            ExponentSet::boxed(19, &[6, 6])
                .unwrap()
                .iter()
                .map(|v| v.star(&ExponentVector(vec![2, 2]))),
        )
        .unwrap();
        let sum = da.minkowski_sum_q(&db).unwrap();
        assert_eq!(sum.fb().unwrap().value, 64);
        assert_eq!(sum.delta().unwrap(), 297);

        // a weight-4 member at q = 2, l = 10 gives 2^6
        let s = set(2, 10, &[&[1, 1, 1, 1, 0, 0, 0, 0, 0, 0], &[0, 0, 1, 0, 0, 0, 0, 0, 0, 1]]);
        let fb = s.fb().unwrap();
        assert_eq!(fb.value, 64);
        assert_eq!(fb.witness.0, vec![1, 1, 1, 1, 0, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn fb_tie_break_is_lexicographic() {
        let s = set(5, 2, &[&[2, 0], &[0, 2], &[1, 1]]);
        // 3*5 = 15, 5*3 = 15, 4*4 = 16
        assert_eq!(s.fb().unwrap().witness.0, vec![0, 2]);
    }

    #[test]
    fn hyperbolic_examples() {
        assert_eq!(hyp_set(4, 2, 0, DEFAULT_LIMIT).unwrap().len(), 16);
        assert_eq!(hyp_set(4, 2, 1, DEFAULT_LIMIT).unwrap().len(), 16);
        let top = hyp_set(4, 2, 16, DEFAULT_LIMIT).unwrap();
        assert_eq!(top, set(4, 2, &[&[0, 0]]));

        let fig = hyp_set(11, 2, 53, DEFAULT_LIMIT).unwrap();
        for v in [[6, 0], [5, 2], [2, 5], [0, 6]] {
            assert!(fig.contains(&ExponentVector(v.to_vec())));
        }
        for v in [[7, 0], [6, 1], [3, 5], [0, 7]] {
            assert!(!fig.contains(&ExponentVector(v.to_vec())));
        }
        let brute: Vec<_> = (0..11u32)
            .flat_map(|a| (0..11u32).map(move |b| (a, b)))
            .filter(|&(a, b)| (11 - a) * (11 - b) >= 53)
            .collect();
        assert_eq!(fig.len(), brute.len());

        assert_eq!(hyp_size(7, 1, 3), 5);
        assert_eq!(hyp_size(2, 5, 8), 16);
        assert_eq!(hyp_size(2, 10, 16), 848);
        assert_eq!(hyp2_size(5, 4), 26);
        assert_eq!(hyp2_size(10, 512), 11);
        assert_eq!(hyp2_size(7, 1), 128);
        assert_eq!(hyp_size(5, 1, 6), 0);
    }

    #[test]
    fn xi_examples() {
        assert_eq!(xi_bound(19, 2, 144), Ok(102));
        assert_eq!(xi_bound(2, 20, 968 * 968), Ok(128));
        assert_eq!(xi_bound(7, 2, 1), Ok(49));
        assert!(matches!(
            xi_bound(2, 3, 9),
            Err(ExponentError::Infeasible { .. })
        ));
    }

    #[test]
    fn support_examples() {
        assert!(set(3, 2, &[&[0, 0]]).support().is_empty());
        assert_eq!(set(3, 2, &[&[0, 1], &[0, 0]]).support(), vec![1]);
        assert_eq!(
            hyp_set(2, 3, 2, DEFAULT_LIMIT).unwrap().support(),
            vec![0, 1, 2]
        );
    }

    #[test]
    fn hyperbolic_sets_are_nested_and_maximal() {
        for q in 2..=5u64 {
            for l in 1..=3usize {
                let max = total(q, l);
                let all = hyp_set(q, l, 0, DEFAULT_LIMIT).unwrap();
                let mut prev = all.clone();
                for f in 1..=max {
                    let h = hyp_set(q, l, f, DEFAULT_LIMIT).unwrap();
                    assert!(h.iter().all(|v| prev.contains(v)));
                    if !h.is_empty() {
                        assert!(h.fb().unwrap().value >= f);
                    }
                    for v in all.iter().filter(|v| !h.contains(v)) {
                        let mut grown = h.members().to_vec();
                        grown.push(v.clone());
                        let grown = ExponentSet::new(q, l, grown).unwrap();
                        assert!(grown.fb().unwrap().value < f);
                    }
                    prev = h;
                }
            }
        }
    }

    #[test]
    fn text_round_trip() {
        let s = hyp_set(5, 3, 20, DEFAULT_LIMIT).unwrap();
        let text = s.to_text();
        assert!(text.ends_with('\n'));
        assert_eq!(ExponentSet::from_text(5, 3, &text).unwrap(), s);
        assert_eq!("(0,3,1)".parse::<ExponentVector>().unwrap().0, vec![0, 3, 1]);
        assert!("0,3".parse::<ExponentVector>().is_err());
    }

    #[test]
    fn anchoring() {
        let s = set(7, 2, &[&[2, 3], &[4, 1]]);
        let (moved, off) = s.anchor_to_axes();
        assert_eq!(off.0, vec![2, 1]);
        assert_eq!(moved, set(7, 2, &[&[0, 2], &[2, 0]]));
    }

    proptest::proptest! {
        #[test]
        fn sum_is_commutative(q in 2u64..9, seed_a in proptest::collection::vec((0u32..9, 0u32..9), 1..6), seed_b in proptest::collection::vec((0u32..9, 0u32..9), 1..6)) {
            let mk = |s: &Vec<(u32, u32)>| ExponentSet::new(q, 2, s.iter().map(|&(a, b)| ExponentVector(vec![a % q as u32, b % q as u32]))).unwrap();
            let (a, b) = (mk(&seed_a), mk(&seed_b));
            proptest::prop_assert_eq!(a.minkowski_sum_q(&b).unwrap(), b.minkowski_sum_q(&a).unwrap());
        }
    }
}
