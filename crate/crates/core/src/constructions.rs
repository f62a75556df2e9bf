//! Degree-set constructions for the two splitting schemes.
//!
//! Polynomial splitting needs `D_A, D_B` whose reduced pairwise sums never
//! collide; matdot splitting needs `|D_A| = |D_B| = m` with exactly `m`
//! disjoint pairs summing to a target exponent `d`. In both cases the
//! recovery threshold is `q^l - FB(D_A +_q D_B) + 1`.
//!
//! Every constructor enumerates its sets explicitly. The size recurrences
//! ([`db_size`], [`d_size`]) are independent cross-checks and are what the
//! parameter tables use when enumeration would be wasteful.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::exponents::{
    for_each_in_box, hyp_set, total, xi_bound, ExponentError, ExponentSet, ExponentVector,
    FootprintValue, DEFAULT_LIMIT,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructionError {
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("search space of {size} candidates exceeds the limit {limit}")]
    Capacity { size: u128, limit: u64 },
    #[error(transparent)]
    Exponent(#[from] ExponentError),
    #[error("cannot parse solution: {0}")]
    Parse(String),
}

type Result<T> = std::result::Result<T, ConstructionError>;

/// A pair `D_A, D_B` for polynomial splitting.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolySolution {
    pub q: u64,
    pub l: usize,
    pub da: ExponentSet,
    pub db: ExponentSet,
    pub fb: FootprintValue,
    /// Upper bound on `fb` for any solution with the same `m·n`; `None` when
    /// `m·n > q^l` (no solution of that size exists).
    pub xi: Option<u64>,
    /// Offsets subtracted from `D_A` to anchor it on the axes.
    pub translation: Option<ExponentVector>,
}

impl PolySolution {
    /// Wraps two sets without checking the non-colliding condition; see
    /// [`validate_poly`].
    pub fn from_sets(da: ExponentSet, db: ExponentSet) -> Result<Self> {
        let sum = da.minkowski_sum_q(&db)?;
        let fb = sum.fb()?;
        Self::assemble(da, db, fb)
    }

    fn assemble(da: ExponentSet, db: ExponentSet, fb: FootprintValue) -> Result<Self> {
        let (q, l) = (da.q(), da.l());
        let mn = (da.len() as u64) * (db.len() as u64);
        let xi = xi_bound(q, l, mn).ok();
        Ok(PolySolution {
            q,
            l,
            da,
            db,
            fb,
            xi,
            translation: None,
        })
    }

    pub fn m(&self) -> usize {
        self.da.len()
    }

    pub fn n(&self) -> usize {
        self.db.len()
    }

    pub fn workers(&self) -> u64 {
        total(self.q, self.l)
    }

    /// `k + 1 = q^l - FB + 1`.
    pub fn recovery_threshold(&self) -> u64 {
        self.workers() - self.fb.value + 1
    }

    pub fn sum_set(&self) -> ExponentSet {
        self.da
            .minkowski_sum_q(&self.db)
            .expect("sets share (q, l) by construction")
    }
}

/// A matdot solution: equal-size sets with a perfect matching onto `d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatdotSolution {
    pub q: u64,
    pub l: usize,
    pub da: ExponentSet,
    pub db: ExponentSet,
    pub d: ExponentVector,
    /// The `m` pairs `(a, b)` with `(a + b)_q = d`, ordered by `a`.
    pub pairs: Vec<(ExponentVector, ExponentVector)>,
    /// Measured footprint of `D_A +_q D_B`.
    pub fb: FootprintValue,
    /// Footprint the construction was designed for, when it had one.
    pub design: Option<u64>,
}

impl MatdotSolution {
    /// Checks the matching condition and measures the footprint.
    pub fn from_sets(da: ExponentSet, db: ExponentSet, d: ExponentVector) -> Result<Self> {
        let (q, l) = (da.q(), da.l());
        if db.q() != q || db.l() != l || d.len() != l {
            return Err(ConstructionError::Param("mismatched (q, l)".into()));
        }
        if da.len() != db.len() {
            return Err(ConstructionError::Param(format!(
                "|D_A| = {} differs from |D_B| = {}",
                da.len(),
                db.len()
            )));
        }
        let pairs = matched_pairs(&da, &db, &d);
        let used_a: std::collections::BTreeSet<_> = pairs.iter().map(|p| &p.0).collect();
        let used_b: std::collections::BTreeSet<_> = pairs.iter().map(|p| &p.1).collect();
        if pairs.len() != da.len() || used_a.len() != da.len() || used_b.len() != db.len() {
            return Err(ConstructionError::Param(format!(
                "found {} pairs summing to {d}, need a perfect matching of {}",
                pairs.len(),
                da.len()
            )));
        }
        let fb = da.minkowski_sum_q(&db)?.fb()?;
        Ok(MatdotSolution {
            q,
            l,
            da,
            db,
            d,
            pairs,
            fb,
            design: None,
        })
    }

    pub fn m(&self) -> usize {
        self.da.len()
    }

    pub fn workers(&self) -> u64 {
        total(self.q, self.l)
    }

    /// Footprint value the threshold is derived from: the design value when
    /// the construction advertises one (it is a guaranteed lower bound on the
    /// measured value), otherwise the measured value.
    pub fn threshold_footprint(&self) -> u64 {
        self.design.unwrap_or(self.fb.value).max(1)
    }

    /// `k + 1 = q^l - F + 1`.
    pub fn recovery_threshold(&self) -> u64 {
        self.workers() - self.threshold_footprint() + 1
    }

    /// Threshold implied by the measured footprint, never above
    /// [`recovery_threshold`](Self::recovery_threshold).
    pub fn measured_threshold(&self) -> u64 {
        self.workers() - self.fb.value + 1
    }

    pub fn sum_set(&self) -> ExponentSet {
        self.da
            .minkowski_sum_q(&self.db)
            .expect("sets share (q, l) by construction")
    }

    /// Coordinates where `d` is zero. Every member vanishes there, so these
    /// variables can be dropped.
    pub fn removable_coordinates(&self) -> Vec<usize> {
        (0..self.l).filter(|&i| self.d.0[i] == 0).collect()
    }

    /// Drops the removable coordinates. Returns `None` if nothing would be
    /// removed or if no coordinate would remain.
    pub fn project(&self) -> Option<MatdotSolution> {
        let keep: Vec<usize> = (0..self.l).filter(|&i| self.d.0[i] != 0).collect();
        if keep.len() == self.l || keep.is_empty() {
            return None;
        }
        let pick = |v: &ExponentVector| ExponentVector(keep.iter().map(|&i| v.0[i]).collect());
        let da = self.da.project(&keep);
        let db = self.db.project(&keep);
        let fb = da.minkowski_sum_q(&db).ok()?.fb().ok()?;
        Some(MatdotSolution {
            q: self.q,
            l: keep.len(),
            da,
            db,
            d: pick(&self.d),
            pairs: self.pairs.iter().map(|(a, b)| (pick(a), pick(b))).collect(),
            fb,
            design: self
                .design
                .map(|f| f.div_ceil(self.q.pow((self.l - keep.len()) as u32))),
        })
    }
}

fn matched_pairs(
    da: &ExponentSet,
    db: &ExponentSet,
    d: &ExponentVector,
) -> Vec<(ExponentVector, ExponentVector)> {
    let q = da.q() as u32;
    let mut out = Vec::new();
    for a in da {
        // per coordinate, the b_i < q with (a_i + b_i)_q = d_i
        let options: Vec<Vec<u32>> = a
            .0
            .iter()
            .zip(&d.0)
            .map(|(&ai, &di)| {
                let mut o = Vec::new();
                if di >= ai {
                    o.push(di - ai);
                }
                if di >= 1 && di <= ai {
                    o.push(di + q - 1 - ai);
                }
                o
            })
            .collect();
        let bounds: Vec<u32> = options.iter().map(|o| o.len() as u32).collect();
        for_each_in_box(&bounds, |pick| {
            let b = ExponentVector(pick.iter().zip(&options).map(|(&i, o)| o[i as usize]).collect());
            if db.contains(&b) {
                out.push((a.clone(), b));
            }
        });
    }
    out
}

fn check_len(q: u64, v: &[u32], what: &str) -> Result<()> {
    if v.is_empty() {
        return Err(ConstructionError::Param(format!("{what} must be nonempty")));
    }
    if let Some(i) = v.iter().position(|&x| x == 0 || x as u64 > q) {
        return Err(ConstructionError::Param(format!(
            "{what}[{}] = {} must lie in 1..={q}",
            i + 1,
            v[i]
        )));
    }
    Ok(())
}

/// Box construction: `D_A` = box below `mvec`, `D_B = mvec ⋆ box(nvec)`.
pub fn box_poly(q: u64, mvec: &[u32], nvec: &[u32]) -> Result<PolySolution> {
    check_len(q, mvec, "m")?;
    check_len(q, nvec, "n")?;
    if mvec.len() != nvec.len() {
        return Err(ConstructionError::Param(
            "m and n must have the same length".into(),
        ));
    }
    if let Some(i) = (0..mvec.len()).find(|&i| (mvec[i] as u64) * (nvec[i] as u64) > q) {
        return Err(ConstructionError::Param(format!(
            "coordinate {}: m_i * n_i = {} exceeds q = {q}",
            i + 1,
            mvec[i] * nvec[i]
        )));
    }
    let da = ExponentSet::boxed(q, mvec)?;
    let step = ExponentVector(mvec.to_vec());
    let db = ExponentSet::new(
        q,
        mvec.len(),
        ExponentSet::boxed(q, nvec)?.iter().map(|v| v.star(&step)),
    )?;
    PolySolution::from_sets(da, db)
}

/// Expand `D_B'` by the extent of `D_A` so that no two sums collide.
/// `D_A` is first anchored on the axes; the translation is recorded.
pub fn expand_db(da: &ExponentSet, db_prime: &ExponentSet) -> Result<PolySolution> {
    if da.is_empty() || db_prime.is_empty() {
        return Err(ConstructionError::Param("empty degree set".into()));
    }
    if da.q() != db_prime.q() || da.l() != db_prime.l() {
        return Err(ConstructionError::Param("mismatched (q, l)".into()));
    }
    let (q, l) = (da.q(), da.l());
    let (anchored, offset) = da.anchor_to_axes();
    let mvec: Vec<u32> = (0..l)
        .map(|i| 1 + anchored.iter().map(|v| v.0[i]).max().unwrap_or(0))
        .collect();
    let step = ExponentVector(mvec.clone());
    let expanded: Vec<ExponentVector> = db_prime.iter().map(|v| v.star(&step)).collect();
    for i in 0..l {
        let max_a = anchored.iter().map(|v| v.0[i] as u64).max().unwrap_or(0);
        let max_b = expanded.iter().map(|v| v.0[i] as u64).max().unwrap_or(0);
        if max_a + max_b >= q {
            return Err(ConstructionError::Param(format!(
                "coordinate {}: max a_i + b_i = {} is not below q = {q}",
                i + 1,
                max_a + max_b
            )));
        }
    }
    let db = ExponentSet::new(q, l, expanded)?;
    let mut sol = PolySolution::from_sets(anchored, db)?;
    if offset.0.iter().any(|&o| o != 0) {
        sol.translation = Some(offset);
    }
    Ok(sol)
}

/// `{ b : m_i b_i < q, ∏ (q - m_i + 1 - m_i b_i) ≥ F }` with all factors
/// positive; the returned vectors are the `b`, not `m ⋆ b`.
pub fn better_box_db_prime(q: u64, mvec: &[u32], f: u64) -> Result<ExponentSet> {
    check_len(q, mvec, "m")?;
    let bounds: Vec<u32> = mvec
        .iter()
        .map(|&m| ((q - m as u64) / m as u64 + 1) as u32)
        .collect();
    let mut out = Vec::new();
    for_each_in_box(&bounds, |b| {
        let prod: u64 = b
            .iter()
            .zip(mvec)
            .map(|(&b, &m)| q + 1 - m as u64 - (m as u64) * (b as u64))
            .product();
        if prod >= f {
            out.push(ExponentVector(b.to_vec()));
        }
    });
    Ok(ExponentSet::new(q, mvec.len(), out)?)
}

/// Better box: `D_A` = box below `mvec`, `D_B` as large as the design `F` allows.
pub fn better_box(q: u64, mvec: &[u32], f: u64) -> Result<PolySolution> {
    if f == 0 {
        return Err(ConstructionError::Param("F must be at least 1".into()));
    }
    let l = mvec.len();
    if f > total(q, l) {
        return Err(ConstructionError::Infeasible(format!(
            "F = {f} exceeds q^l = {}",
            total(q, l)
        )));
    }
    let db_prime = better_box_db_prime(q, mvec, f)?;
    if db_prime.is_empty() {
        return Err(ConstructionError::Infeasible(format!(
            "no b satisfies the footprint {f} for m = {mvec:?}"
        )));
    }
    let da = ExponentSet::boxed(q, mvec)?;
    expand_db(&da, &db_prime)
}

/// `|D_B(F, l)|` by the recurrence on the last coordinate.
pub fn db_size(q: u64, mvec: &[u32], f: u64) -> u64 {
    fn go(q: u64, m: &[u32], f: u64, memo: &mut HashMap<(usize, u64), u64>) -> u64 {
        let l = m.len();
        let ml = m[l - 1] as u64;
        let ql = q + 1 - ml; // q_l = q - m_l + 1
        if l == 1 {
            let f = f.max(1);
            return if ql < f { 0 } else { (ql - f) / ml + 1 };
        }
        if let Some(&v) = memo.get(&(l, f)) {
            return v;
        }
        let v = (0..=(ql - 1) / ml)
            .map(|b| go(q, &m[..l - 1], f.div_ceil(ql - ml * b), memo))
            .sum();
        memo.insert((l, f), v);
        v
    }
    if mvec.is_empty() || mvec.iter().any(|&m| m == 0 || m as u64 > q) {
        return 0;
    }
    go(q, mvec, f, &mut HashMap::new())
}

/// Separation of variables: `D_A` from `Hyp_q(F_A, m')` on the first `m'`
/// variables, `D_B` from `Hyp_q(F_B, n')` on the last `n'`.
pub fn sep_vars(q: u64, m_prime: usize, n_prime: usize, fa: u64, fb: u64) -> Result<PolySolution> {
    sep_vars_limited(q, m_prime, n_prime, fa, fb, DEFAULT_LIMIT)
}

pub fn sep_vars_limited(
    q: u64,
    m_prime: usize,
    n_prime: usize,
    fa: u64,
    fb: u64,
    limit: u64,
) -> Result<PolySolution> {
    if m_prime == 0 || n_prime == 0 {
        return Err(ConstructionError::Param(
            "m' and n' must be at least 1".into(),
        ));
    }
    let ha = hyp_set(q, m_prime, fa, limit)?;
    let hb = hyp_set(q, n_prime, fb, limit)?;
    if ha.is_empty() || hb.is_empty() {
        return Err(ConstructionError::Infeasible(format!(
            "empty hyperbolic set for F_A = {fa}, F_B = {fb}"
        )));
    }
    // Disjoint supports: the sum set is the product set, so its footprint is
    // the product of the factor footprints.
    let (wa, wb) = (ha.fb()?, hb.fb()?);
    let mut witness = wa.witness.0.clone();
    witness.extend_from_slice(&wb.witness.0);
    let l = m_prime + n_prime;
    let da = ha.pad(0, l);
    let db = hb.pad(m_prime, l);
    PolySolution::assemble(
        da,
        db,
        FootprintValue {
            value: wa.value * wb.value,
            witness: ExponentVector(witness),
        },
    )
}

/// Box matdot: `D_A = D_B` = box below `mvec`, `d = mvec - 1`.
pub fn box_matdot(q: u64, mvec: &[u32]) -> Result<MatdotSolution> {
    check_len(q, mvec, "m")?;
    if let Some(i) = mvec.iter().position(|&m| 2 * (m as u64 - 1) >= q) {
        return Err(ConstructionError::Param(format!(
            "coordinate {}: 2(m_i - 1) = {} is not below q = {q}",
            i + 1,
            2 * (mvec[i] - 1)
        )));
    }
    let set = ExponentSet::boxed(q, mvec)?;
    let d = ExponentVector(mvec.iter().map(|m| m - 1).collect());
    MatdotSolution::from_sets(set.clone(), set, d)
}

/// Half hyperbolic set:
/// `{ a < q/2 : a ≤ d, ∏(q - 2a_i) ≥ F, ∏(q - 2(d_i - a_i)) ≥ F }`.
/// `F = 0` leaves only the box constraint.
pub fn half_hyperbolic_set(q: u64, f: u64, d: &ExponentVector) -> Result<ExponentSet> {
    if d.is_empty() {
        return Err(ConstructionError::Param("d must be nonempty".into()));
    }
    if let Some(i) = d.0.iter().position(|&x| 2 * x as u64 >= q) {
        return Err(ConstructionError::Param(format!(
            "coordinate {}: d_i = {} is not below q/2",
            i + 1,
            d.0[i]
        )));
    }
    let bounds: Vec<u32> = d.0.iter().map(|&x| x + 1).collect();
    let mut out = Vec::new();
    for_each_in_box(&bounds, |a| {
        let lo: u64 = a.iter().map(|&x| q - 2 * x as u64).product();
        let hi: u64 = a
            .iter()
            .zip(&d.0)
            .map(|(&x, &di)| q - 2 * (di - x) as u64)
            .product();
        if lo >= f && hi >= f {
            out.push(ExponentVector(a.to_vec()));
        }
    });
    Ok(ExponentSet::new(q, d.len(), out)?)
}

pub fn half_hyperbolic(q: u64, f: u64, d: &ExponentVector) -> Result<MatdotSolution> {
    let set = half_hyperbolic_set(q, f, d)?;
    if set.is_empty() {
        return Err(ConstructionError::Infeasible(format!(
            "half hyperbolic set is empty for F = {f}, d = {d}"
        )));
    }
    let mut sol = MatdotSolution::from_sets(set.clone(), set, d.clone())?;
    if f > 0 {
        sol.design = Some(f);
    }
    Ok(sol)
}

/// `|D(F, G, l)|`: vectors `a ≤ d` with `∏(q - 2a_i) ≥ F` and
/// `∏(q - 2d_i + 2a_i) ≥ G`, counted by recursing on the last coordinate.
pub fn d_size(q: u64, f: u64, g: u64, d: &[u32]) -> u64 {
    fn go(q: i64, f: i64, g: i64, d: &[u32], memo: &mut HashMap<(usize, i64, i64), u64>) -> u64 {
        let l = d.len();
        let dl = d[l - 1] as i64;
        if l == 1 {
            let upper = dl.min((q - f).div_euclid(2));
            let lower = 0i64.max(-((q - g - 2 * dl).div_euclid(2)));
            return (upper - lower + 1).max(0) as u64;
        }
        if let Some(&v) = memo.get(&(l, f, g)) {
            return v;
        }
        let mut v = 0;
        for a in 0..=dl {
            let lo = q - 2 * a;
            let hi = q - 2 * dl + 2 * a;
            v += go(
                q,
                (f.max(0) as u64).div_ceil(lo as u64) as i64,
                (g.max(0) as u64).div_ceil(hi as u64) as i64,
                &d[..l - 1],
                memo,
            );
        }
        memo.insert((l, f, g), v);
        v
    }
    if d.is_empty() || d.iter().any(|&x| 2 * x as u64 >= q) {
        return 0;
    }
    go(q as i64, f as i64, g as i64, d, &mut HashMap::new())
}

/// `d = (⌈q/2⌉ - 1, …)`: the corner of the half box.
pub fn corner_d(q: u64, l: usize) -> ExponentVector {
    ExponentVector(vec![(q.div_ceil(2) - 1) as u32; l])
}

/// Exhaustive search over `d ∈ N_{<⌈q/2⌉}^l` maximizing `|D(F, F, l)|`,
/// ties broken towards the lexicographically smallest `d`.
pub fn search_best_d(q: u64, l: usize, f: u64, limit: u64) -> Result<(ExponentVector, u64)> {
    let side = q.div_ceil(2);
    let size = (side as u128).checked_pow(l as u32).unwrap_or(u128::MAX);
    if size > limit as u128 {
        return Err(ConstructionError::Capacity { size, limit });
    }
    let mut best: Option<(ExponentVector, u64)> = None;
    for_each_in_box(&vec![side as u32; l], |d| {
        let m = d_size(q, f, f, d);
        if best.as_ref().is_none_or(|(_, bm)| m > *bm) {
            best = Some((ExponentVector(d.to_vec()), m));
        }
    });
    best.ok_or_else(|| ConstructionError::Param("l must be at least 1".into()))
}

/// Outcome of brute-force checks on a polynomial solution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyReport {
    pub valid: bool,
    /// Two distinct pairs with the same reduced sum, if any.
    pub collision: Option<[(ExponentVector, ExponentVector); 2]>,
    pub fb: u64,
    pub recovery_threshold: u64,
    pub xi: Option<u64>,
    pub within_bound: bool,
}

/// Pairwise check of the non-colliding condition plus recomputation of the
/// footprint and its bound. Never fails; problems are reported.
pub fn validate_poly(sol: &PolySolution) -> PolyReport {
    let q = sol.q;
    let mut sums: Vec<(ExponentVector, usize, usize)> = Vec::with_capacity(sol.m() * sol.n());
    for (i, a) in sol.da.iter().enumerate() {
        for (j, b) in sol.db.iter().enumerate() {
            sums.push((a.add_q(b, q), i, j));
        }
    }
    sums.sort_unstable();
    let collision = sums.windows(2).find(|w| w[0].0 == w[1].0).map(|w| {
        let pair = |(_, i, j): &(ExponentVector, usize, usize)| {
            (sol.da.members()[*i].clone(), sol.db.members()[*j].clone())
        };
        [pair(&w[0]), pair(&w[1])]
    });
    let fb = sums
        .iter()
        .map(|(c, _, _)| c.footprint(q))
        .min()
        .unwrap_or(0);
    let xi = xi_bound(q, sol.l, (sol.m() * sol.n()) as u64).ok();
    let within_bound = xi.is_some_and(|x| fb <= x);
    PolyReport {
        valid: collision.is_none() && fb == sol.fb.value && within_bound,
        collision,
        fb,
        recovery_threshold: total(q, sol.l) - fb + 1,
        xi,
        within_bound,
    }
}

/// `2^{l - |supp(D_A +_2 D_B)|}` for a matdot solution over GF(2).
pub fn matdot_q2_fb(sol: &MatdotSolution) -> Result<u64> {
    if sol.q != 2 {
        return Err(ConstructionError::Param(format!(
            "q = {} but the closed form needs q = 2",
            sol.q
        )));
    }
    let supp = sol.sum_set().support().len();
    Ok(1u64 << (sol.l - supp))
}

/// Either kind of solution, for serialization and planning.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Solution {
    Poly(PolySolution),
    Matdot(MatdotSolution),
}

impl Solution {
    pub fn q(&self) -> u64 {
        match self {
            Solution::Poly(s) => s.q,
            Solution::Matdot(s) => s.q,
        }
    }

    pub fn l(&self) -> usize {
        match self {
            Solution::Poly(s) => s.l,
            Solution::Matdot(s) => s.l,
        }
    }

    pub fn da(&self) -> &ExponentSet {
        match self {
            Solution::Poly(s) => &s.da,
            Solution::Matdot(s) => &s.da,
        }
    }

    pub fn db(&self) -> &ExponentSet {
        match self {
            Solution::Poly(s) => &s.db,
            Solution::Matdot(s) => &s.db,
        }
    }

    pub fn recovery_threshold(&self) -> u64 {
        match self {
            Solution::Poly(s) => s.recovery_threshold(),
            Solution::Matdot(s) => s.recovery_threshold(),
        }
    }

    pub fn fb(&self) -> &FootprintValue {
        match self {
            Solution::Poly(s) => &s.fb,
            Solution::Matdot(s) => &s.fb,
        }
    }

    /// Text form: `q=`, `l=`, `kind=`, optional `d=` and `F=` headers, then
    /// `DA:` and `DB:` sections in lexicographic order.
    pub fn to_text(&self) -> String {
        let mut s = format!("q={}\nl={}\n", self.q(), self.l());
        match self {
            Solution::Poly(_) => s.push_str("kind=poly\n"),
            Solution::Matdot(m) => {
                s.push_str(&format!("kind=matdot\nd={}\n", m.d));
                if let Some(f) = m.design {
                    s.push_str(&format!("F={f}\n"));
                }
            }
        }
        s.push_str("DA:\n");
        s.push_str(&self.da().to_text());
        s.push_str("DB:\n");
        s.push_str(&self.db().to_text());
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |m: &str| ConstructionError::Parse(m.to_string());
        let mut headers: HashMap<&str, &str> = HashMap::new();
        let (mut da, mut db) = (Vec::new(), Vec::new());
        let mut section = 0;
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            match line {
                "DA:" => section = 1,
                "DB:" => section = 2,
                _ if section == 0 => {
                    let (k, v) = line.split_once('=').ok_or_else(|| bad(line))?;
                    headers.insert(k.trim(), v.trim());
                }
                _ => {
                    let v: ExponentVector = line.parse()?;
                    if section == 1 { &mut da } else { &mut db }.push(v);
                }
            }
        }
        let num = |k: &str| -> Result<u64> {
            headers
                .get(k)
                .ok_or_else(|| bad(&format!("missing {k}=")))?
                .parse()
                .map_err(|_| bad(&format!("bad {k}=")))
        };
        let (q, l) = (num("q")?, num("l")? as usize);
        let da = ExponentSet::new(q, l, da)?;
        let db = ExponentSet::new(q, l, db)?;
        match headers.get("kind").copied() {
            Some("poly") => Ok(Solution::Poly(PolySolution::from_sets(da, db)?)),
            Some("matdot") => {
                let d: ExponentVector = headers
                    .get("d")
                    .ok_or_else(|| bad("missing d="))?
                    .parse()?;
                let mut sol = MatdotSolution::from_sets(da, db, d)?;
                sol.design = headers.get("F").and_then(|f| f.parse().ok());
                Ok(Solution::Matdot(sol))
            }
            _ => Err(bad("kind must be poly or matdot")),
        }
    }
}

impl fmt::Display for Solution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(v: &[u32]) -> ExponentVector {
        ExponentVector(v.to_vec())
    }

    fn set(q: u64, l: usize, vs: &[&[u32]]) -> ExponentSet {
        ExponentSet::new(q, l, vs.iter().map(|v| ev(v))).unwrap()
    }

    #[test]
    fn box_poly_examples() {
        let s = box_poly(19, &[2, 2], &[6, 6]).unwrap();
        assert_eq!((s.m(), s.n(), s.fb.value), (4, 36, 64));
        assert_eq!(s.recovery_threshold(), 298);
        assert_eq!(s.xi, Some(102));
        let s = box_poly(25, &[3, 3], &[5, 5]).unwrap();
        assert_eq!((s.m(), s.n(), s.fb.value), (9, 25, 121));
        assert_eq!(s.recovery_threshold(), 505);
        let s = box_poly(7, &[1, 1, 1], &[1, 1, 1]).unwrap();
        assert_eq!((s.m(), s.n(), s.fb.value), (1, 1, 343));
        assert_eq!(s.recovery_threshold(), 1);
        for s in [box_poly(19, &[2, 2], &[6, 6]).unwrap(), box_poly(8, &[2, 3], &[4, 2]).unwrap()] {
            assert!(validate_poly(&s).valid);
        }
        let err = box_poly(19, &[2, 5], &[6, 6]).unwrap_err();
        assert!(err.to_string().contains("coordinate 2"), "{err}");
    }

    #[test]
    fn box_poly_closed_form() {
        for (q, m, n) in [(19u64, [2u32, 3], [6u32, 4]), (25, [5, 1], [5, 20]), (11, [3, 2], [3, 5])] {
            let s = box_poly(q, &m, &n).unwrap();
            let closed: u64 = m.iter().zip(&n).map(|(&a, &b)| q - (a * b) as u64 + 1).product();
            assert_eq!(s.fb.value, closed);
        }
    }

    #[test]
    fn expand_db_examples() {
        let da = ExponentSet::boxed(19, &[2, 2]).unwrap();
        let dbp = ExponentSet::boxed(19, &[6, 6]).unwrap();
        let s = expand_db(&da, &dbp).unwrap();
        let b = box_poly(19, &[2, 2], &[6, 6]).unwrap();
        assert_eq!(s.da, b.da);
        assert_eq!(s.db, b.db);

        let zero = set(7, 2, &[&[0, 0]]);
        let dbp = set(7, 2, &[&[1, 2], &[3, 0]]);
        let s = expand_db(&zero, &dbp).unwrap();
        assert_eq!(s.db, dbp);

        let s = expand_db(&set(5, 2, &[&[0, 0], &[1, 1]]), &set(5, 2, &[&[0, 0], &[1, 0]])).unwrap();
        assert_eq!(s.db, set(5, 2, &[&[0, 0], &[2, 0]]));
        assert_eq!(s.sum_set().len(), 4);

        let err = expand_db(&set(5, 1, &[&[0], &[2]]), &set(5, 1, &[&[0], &[2]])).unwrap_err();
        assert!(matches!(err, ConstructionError::Param(_)));
    }

    #[test]
    fn expand_db_anchors_da() {
        let s = expand_db(&set(9, 2, &[&[2, 1], &[3, 1]]), &set(9, 2, &[&[0, 0], &[1, 1]])).unwrap();
        assert_eq!(s.translation, Some(ev(&[2, 1])));
        assert_eq!(s.da, set(9, 2, &[&[0, 0], &[1, 0]]));
    }

    #[test]
    fn better_box_examples() {
        let s = better_box(19, &[2, 2], 64).unwrap();
        assert_eq!(s.n(), 48);
        assert!(s.recovery_threshold() <= 298);
        assert!(s.fb.value >= 64);
        assert_eq!(better_box(25, &[2, 2], 100).unwrap().n(), 84);
        let s = better_box(13, &[1, 1], 30).unwrap();
        assert_eq!(s.db, hyp_set(13, 2, 30, DEFAULT_LIMIT).unwrap());
        assert!(matches!(
            better_box(5, &[1, 1], 26),
            Err(ConstructionError::Infeasible(_))
        ));
    }

    #[test]
    fn db_size_examples() {
        assert_eq!(db_size(19, &[2], 4), 8);
        assert_eq!(db_size(19, &[2, 2], 64), 48);
        assert_eq!(db_size(25, &[5, 5], 121), 11);
    }

    #[test]
    fn better_box_dominates_box() {
        for (q, m, n) in [(19u64, [2u32, 2], [6u32, 6]), (25, [3, 3], [5, 5]), (13, [2, 3], [6, 4])] {
            let b = box_poly(q, &m, &n).unwrap();
            let bb = better_box(q, &m, b.fb.value).unwrap();
            assert!(bb.n() >= b.n());
            assert!(bb.fb.value >= b.fb.value);
            assert!(validate_poly(&bb).valid);
        }
    }

    #[test]
    fn sep_vars_examples() {
        let s = sep_vars(2, 5, 5, 8, 8).unwrap();
        assert_eq!((s.m(), s.n()), (16, 16));
        assert_eq!(s.recovery_threshold(), 961);
        assert_eq!(s.fb.value, s.sum_set().fb().unwrap().value);
        assert_eq!(s.fb.witness, s.sum_set().fb().unwrap().witness);
        let s = sep_vars(2, 10, 10, 64, 64).unwrap();
        assert_eq!(s.m(), 386);
        assert_eq!(s.recovery_threshold(), 1044481);
        let s = sep_vars(64, 1, 1, 32, 32).unwrap();
        assert_eq!(s.m(), 33);
        assert_eq!(s.recovery_threshold(), 3073);
        assert!(validate_poly(&sep_vars(3, 2, 2, 3, 4).unwrap()).valid);
    }

    #[test]
    fn box_matdot_examples() {
        let s = box_matdot(8, &[4, 4, 4]).unwrap();
        assert_eq!(s.m(), 64);
        assert_eq!(s.fb.value, 8);
        assert_eq!(s.recovery_threshold(), 505);
        let s = box_matdot(5, &[3]).unwrap();
        assert_eq!((s.m(), s.fb.value, s.recovery_threshold()), (3, 1, 5));
        let s = box_matdot(9, &[1, 1]).unwrap();
        assert_eq!((s.m(), s.fb.value, s.recovery_threshold()), (1, 81, 1));
        assert!(box_matdot(2, &[2]).is_err());
        assert!(box_matdot(8, &[5, 1]).is_err());
        for (a, b) in &s.pairs {
            assert_eq!(a.add_q(b, 9), s.d);
        }
    }

    #[test]
    fn half_hyperbolic_examples() {
        let s = half_hyperbolic(8, 17, &ev(&[3, 3, 3])).unwrap();
        assert_eq!(s.m(), 56);
        assert_eq!(s.recovery_threshold(), 496);
        assert!(s.fb.value >= 17);
        let s = half_hyperbolic(8, 1, &ev(&[3, 3, 3])).unwrap();
        assert_eq!((s.m(), s.recovery_threshold()), (64, 512));
        let s = half_hyperbolic(32, 513, &ev(&[15, 15, 15])).unwrap();
        assert_eq!((s.m(), s.recovery_threshold()), (3044, 32256));
        // F = 0 reproduces the box
        let a = half_hyperbolic(9, 0, &ev(&[2, 3])).unwrap();
        let b = box_matdot(9, &[3, 4]).unwrap();
        assert_eq!(a.da, b.da);
        assert_eq!(a.fb, b.fb);
        assert!(half_hyperbolic(8, 1, &ev(&[4, 0])).is_err());
    }

    #[test]
    fn d_size_examples() {
        assert_eq!(d_size(8, 2, 2, &[3]), 4);
        assert_eq!(d_size(8, 17, 17, &[3, 3, 3]), 56);
        assert_eq!(d_size(8, 57, 57, &[3, 3, 3]), 26);
    }

    #[test]
    fn best_d_search() {
        // genuine maximization over d
        assert_eq!(search_best_d(8, 3, 9, 1_000_000).unwrap().1, 62);
        assert_eq!(search_best_d(8, 3, 57, 1_000_000).unwrap(), (ev(&[2, 2, 3]), 30));
        assert_eq!(search_best_d(32, 3, 3585, 1_000_000).unwrap(), (ev(&[11, 11, 11]), 1326));
        assert_eq!(search_best_d(8, 3, 1, 1_000_000).unwrap(), (ev(&[3, 3, 3]), 64));
        assert!(matches!(
            search_best_d(32, 5, 1, 1000),
            Err(ConstructionError::Capacity { .. })
        ));
        assert_eq!(corner_d(8, 3), ev(&[3, 3, 3]));
        assert_eq!(corner_d(7, 2), ev(&[3, 3]));
    }

    #[test]
    fn validation_reports_collisions() {
        let bad = PolySolution::from_sets(set(5, 1, &[&[0], &[1]]), set(5, 1, &[&[0], &[1]])).unwrap();
        let r = validate_poly(&bad);
        assert!(!r.valid);
        assert!(r.collision.is_some());
        let s = box_poly(19, &[5, 5], &[2, 2]).unwrap();
        let r = validate_poly(&s);
        assert!(r.valid);
        assert_eq!((r.fb, r.xi), (100, Some(143)));
        assert_eq!(r.recovery_threshold, 262);
    }

    #[test]
    fn q2_matdot_closed_form() {
        let trivial = MatdotSolution::from_sets(set(2, 3, &[&[0, 0, 0]]), set(2, 3, &[&[0, 0, 0]]), ev(&[0, 0, 0])).unwrap();
        assert_eq!(matdot_q2_fb(&trivial), Ok(8));
        assert_eq!(trivial.recovery_threshold(), 1);
        let s = MatdotSolution::from_sets(
            set(2, 3, &[&[1, 0, 0], &[0, 1, 0]]),
            set(2, 3, &[&[0, 1, 0], &[1, 0, 0]]),
            ev(&[1, 1, 0]),
        )
        .unwrap();
        assert_eq!(matdot_q2_fb(&s), Ok(2));
        assert_eq!(s.fb.value, 2);
        let full = MatdotSolution::from_sets(set(2, 2, &[&[1, 0], &[0, 1]]), set(2, 2, &[&[0, 1], &[1, 0]]), ev(&[1, 1])).unwrap();
        assert_eq!(matdot_q2_fb(&full), Ok(1));
        assert!(matdot_q2_fb(&box_matdot(5, &[2]).unwrap()).is_err());
    }

    #[test]
    fn projection_drops_zero_coordinates() {
        let s = box_matdot(7, &[3, 1, 2]).unwrap();
        assert_eq!(s.removable_coordinates(), vec![1]);
        let p = s.project().unwrap();
        assert_eq!(p.l, 2);
        assert_eq!(p.m(), s.m());
        assert_eq!(p.fb.value, (7 - 4) * (7 - 2));
        assert!(p.recovery_threshold() < s.recovery_threshold());
        assert!(box_matdot(7, &[3, 2]).unwrap().project().is_none());
    }

    #[test]
    fn matdot_rejects_non_matchings() {
        let err = MatdotSolution::from_sets(set(5, 1, &[&[0], &[1]]), set(5, 1, &[&[0], &[2]]), ev(&[2]));
        assert!(err.is_err());
    }

    #[test]
    fn serialization_round_trip() {
        let sols = [
            Solution::Poly(box_poly(19, &[2, 2], &[6, 6]).unwrap()),
            Solution::Matdot(half_hyperbolic(8, 17, &ev(&[3, 3, 3])).unwrap()),
        ];
        for s in sols {
            let text = s.to_text();
            assert!(text.starts_with(&format!("q={}\nl={}\n", s.q(), s.l())));
            let back = Solution::from_text(&text).unwrap();
            assert_eq!(back.da(), s.da());
            assert_eq!(back.db(), s.db());
            assert_eq!(back.recovery_threshold(), s.recovery_threshold());
            assert_eq!(back.to_text(), text);
        }
        assert!(Solution::from_text("q=5\nl=1\nkind=other\nDA:\n(0)\nDB:\n(0)\n").is_err());
    }
}
