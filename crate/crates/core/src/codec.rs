//! The coding pipeline: split the operands into blocks, attach the blocks to
//! monomials, evaluate at worker points, interpolate the product polynomial
//! from any `k + 1` responses and read `A·B` off its coefficients.
//!
//! Decoding factors the responding columns of the evaluation matrix once
//! (`G_S = B·U` with `B` echelon up to a row permutation and `U` upper
//! triangular) and then runs two triangular solves per matrix entry.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use thiserror::Error;

use crate::constructions::{MatdotSolution, PolySolution, Solution};
use crate::exponents::{ExponentError, ExponentSet, ExponentVector};
use crate::field::{Elem, Field, FieldError, Point};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("insufficient responses: have {have}, need {need} ({deficit} short)")]
    InsufficientResponses { have: usize, need: usize, deficit: usize },
    #[error("evaluation matrix has rank {rank} < dim V = {kappa}")]
    RankDeficient { rank: usize, kappa: usize },
    #[error("incomplete recovery: no coefficient at {0}")]
    Incomplete(ExponentVector),
    #[error("response references unknown point {0}")]
    UnknownPoint(usize),
    #[error("system of {size} entries exceeds the limit {limit}")]
    Capacity { size: u128, limit: u64 },
    #[error("cannot parse: {0}")]
    Parse(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Exponent(#[from] ExponentError),
}

type Result<T> = std::result::Result<T, CodecError>;

/// Largest `κ·N` an [`InterpolationSystem`] will materialize.
pub const SYSTEM_LIMIT: u64 = 1 << 26;

/// Dense row-major matrix over a finite field.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<Elem>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix({}x{} over {}, {:?})", self.rows, self.cols, self.field, self.data)
    }
}

impl Matrix {
    pub fn zeros(field: &Field, rows: usize, cols: usize) -> Self {
        Matrix {
            field: field.clone(),
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: &Field, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn from_vec(field: &Field, rows: usize, cols: usize, data: Vec<Elem>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(CodecError::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(&bad) = data.iter().find(|&&x| x as u64 >= field.order()) {
            return Err(FieldError::OutOfRange {
                index: bad as u64,
                q: field.order(),
            }
            .into());
        }
        Ok(Matrix {
            field: field.clone(),
            rows,
            cols,
            data,
        })
    }

    pub fn from_rows(field: &Field, rows: &[Vec<Elem>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(CodecError::Shape("ragged rows".into()));
        }
        Self::from_vec(field, rows.len(), cols, rows.concat())
    }

    /// Entries drawn uniformly from the field, row-major.
    pub fn random<R: Rng + ?Sized>(field: &Field, rows: usize, cols: usize, rng: &mut R) -> Self {
        let q = field.order() as Elem;
        let data = (0..rows * cols).map(|_| rng.gen_range(0..q)).collect();
        Matrix {
            field: field.clone(),
            rows,
            cols,
            data,
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn entries(&self) -> &[Elem] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> Elem {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Elem) {
        self.data[i * self.cols + j] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    /// `self += c · other`.
    pub fn add_scaled(&mut self, c: Elem, other: &Matrix) {
        debug_assert_eq!(self.dims(), other.dims());
        if c == 0 {
            return;
        }
        let f = &self.field;
        if c == 1 {
            for (x, &y) in self.data.iter_mut().zip(&other.data) {
                *x = f.add(*x, y);
            }
        } else {
            for (x, &y) in self.data.iter_mut().zip(&other.data) {
                *x = f.add(*x, f.mul(c, y));
            }
        }
    }

    pub fn scale(&mut self, c: Elem) {
        let f = self.field.clone();
        for x in &mut self.data {
            *x = f.mul(c, *x);
        }
    }

    /// Submatrix of rows `r0..r0+h` and columns `c0..c0+w`; cells outside
    /// `self` read as zero.
    pub fn window(&self, r0: usize, c0: usize, h: usize, w: usize) -> Matrix {
        let mut out = Matrix::zeros(&self.field, h, w);
        for i in 0..h.min(self.rows.saturating_sub(r0)) {
            for j in 0..w.min(self.cols.saturating_sub(c0)) {
                out.data[i * w + j] = self.get(r0 + i, c0 + j);
            }
        }
        out
    }

    /// Writes `block` at `(r0, c0)`, dropping cells that fall outside.
    pub fn paste(&mut self, r0: usize, c0: usize, block: &Matrix) {
        for i in 0..block.rows.min(self.rows.saturating_sub(r0)) {
            for j in 0..block.cols.min(self.cols.saturating_sub(c0)) {
                self.set(r0 + i, c0 + j, block.get(i, j));
            }
        }
    }

    /// Matrix file format: `rows cols fieldspec`, then one line per row of
    /// decimal element indices.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {} {}\n", self.rows, self.cols, self.field);
        for i in 0..self.rows {
            let row: Vec<String> = self.data[i * self.cols..(i + 1) * self.cols]
                .iter()
                .map(|x| x.to_string())
                .collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut tokens = text.split_whitespace();
        let mut next = |what: &str| {
            tokens
                .next()
                .ok_or_else(|| CodecError::Parse(format!("missing {what}")))
        };
        let rows: usize = next("rows")?
            .parse()
            .map_err(|_| CodecError::Parse("bad rows".into()))?;
        let cols: usize = next("cols")?
            .parse()
            .map_err(|_| CodecError::Parse("bad cols".into()))?;
        let field: Field = next("field")?.parse()?;
        let data = tokens
            .map(|t| t.parse::<Elem>().map_err(|_| CodecError::Parse(format!("bad entry {t:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::from_vec(&field, rows, cols, data)
    }
}

/// Schoolbook product.
pub fn matmul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols != b.rows {
        return Err(CodecError::Shape(format!(
            "cannot multiply {}x{} by {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    if a.field != b.field {
        return Err(CodecError::Shape(format!(
            "operands over {} and {}",
            a.field, b.field
        )));
    }
    let f = &a.field;
    let mut out = Matrix::zeros(f, a.rows, b.cols);
    for i in 0..a.rows {
        for k in 0..a.cols {
            let x = a.get(i, k);
            if x == 0 {
                continue;
            }
            let brow = &b.data[k * b.cols..(k + 1) * b.cols];
            let orow = &mut out.data[i * b.cols..(i + 1) * b.cols];
            for (o, &y) in orow.iter_mut().zip(brow) {
                *o = f.add(*o, f.mul(x, y));
            }
        }
    }
    Ok(out)
}

/// How an operand is cut into blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitMode {
    /// `A` split by rows.
    PolyA,
    /// `B` split by columns.
    PolyB,
    /// `A` split by columns.
    MatdotA,
    /// `B` split by rows.
    MatdotB,
}

/// Splitting scheme for a product `A·B`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    Poly { m: usize, n: usize },
    Matdot { m: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockSplit {
    pub mode: SplitMode,
    /// Dimensions `(r, s, t)` of the product being computed.
    pub dims: (usize, usize, usize),
    /// Zero rows or columns appended before cutting.
    pub padding: usize,
    pub blocks: Vec<Matrix>,
}

impl BlockSplit {
    fn cut(mode: SplitMode, m: &Matrix, count: usize, dims: (usize, usize, usize)) -> Self {
        let by_rows = matches!(mode, SplitMode::PolyA | SplitMode::MatdotB);
        let len = if by_rows { m.rows } else { m.cols };
        let size = len.div_ceil(count).max(1);
        let padding = size * count - len;
        let blocks = (0..count)
            .map(|i| {
                if by_rows {
                    m.window(i * size, 0, size, m.cols)
                } else {
                    m.window(0, i * size, m.rows, size)
                }
            })
            .collect();
        BlockSplit {
            mode,
            dims,
            padding,
            blocks,
        }
    }

    pub fn count(&self) -> usize {
        self.blocks.len()
    }

    /// Concatenates the blocks and trims the padding.
    pub fn reassemble(&self) -> Matrix {
        let by_rows = matches!(self.mode, SplitMode::PolyA | SplitMode::MatdotB);
        let b0 = &self.blocks[0];
        let (rows, cols) = if by_rows {
            (b0.rows * self.count() - self.padding, b0.cols)
        } else {
            (b0.rows, b0.cols * self.count() - self.padding)
        };
        let mut out = Matrix::zeros(b0.field(), rows, cols);
        for (i, b) in self.blocks.iter().enumerate() {
            if by_rows {
                out.paste(i * b.rows, 0, b);
            } else {
                out.paste(0, i * b.cols, b);
            }
        }
        out
    }
}

/// Cuts `A` and `B` according to `scheme`, zero-padding where the block
/// count does not divide the dimension.
pub fn split(a: &Matrix, b: &Matrix, scheme: Scheme) -> Result<(BlockSplit, BlockSplit)> {
    if a.cols != b.rows {
        return Err(CodecError::Shape(format!(
            "inner dimensions differ: {}x{} and {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    if a.field != b.field {
        return Err(CodecError::Shape("operands over different fields".into()));
    }
    let dims = (a.rows, a.cols, b.cols);
    match scheme {
        Scheme::Poly { m, n } if m >= 1 && n >= 1 => Ok((
            BlockSplit::cut(SplitMode::PolyA, a, m, dims),
            BlockSplit::cut(SplitMode::PolyB, b, n, dims),
        )),
        Scheme::Matdot { m } if m >= 1 => Ok((
            BlockSplit::cut(SplitMode::MatdotA, a, m, dims),
            BlockSplit::cut(SplitMode::MatdotB, b, m, dims),
        )),
        _ => Err(CodecError::Param("block counts must be at least 1".into())),
    }
}

/// `Σ M_i x^{a_i}`, terms sorted by exponent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedOperand {
    terms: Vec<(ExponentVector, Matrix)>,
    rows: usize,
    cols: usize,
}

impl EncodedOperand {
    pub fn terms(&self) -> &[(ExponentVector, Matrix)] {
        &self.terms
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn support(&self) -> impl Iterator<Item = &ExponentVector> {
        self.terms.iter().map(|t| &t.0)
    }

    pub fn coefficient(&self, a: &ExponentVector) -> Option<&Matrix> {
        self.terms
            .binary_search_by(|t| t.0.cmp(a))
            .ok()
            .map(|i| &self.terms[i].1)
    }
}

/// Attaches block `i` to the `i`-th member of `d` in lexicographic order.
pub fn encode(blocks: &[Matrix], d: &ExponentSet) -> Result<EncodedOperand> {
    encode_at(blocks, d.members())
}

/// Attaches block `i` to `exponents[i]`.
pub fn encode_at(blocks: &[Matrix], exponents: &[ExponentVector]) -> Result<EncodedOperand> {
    if blocks.len() != exponents.len() || blocks.is_empty() {
        return Err(CodecError::Param(format!(
            "{} blocks for {} exponents",
            blocks.len(),
            exponents.len()
        )));
    }
    let (rows, cols) = blocks[0].dims();
    if blocks.iter().any(|b| b.dims() != (rows, cols)) {
        return Err(CodecError::Shape("blocks differ in shape".into()));
    }
    let mut terms: Vec<_> = exponents.iter().cloned().zip(blocks.iter().cloned()).collect();
    terms.sort_by(|x, y| x.0.cmp(&y.0));
    if terms.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(CodecError::Param("repeated exponent".into()));
    }
    Ok(EncodedOperand { terms, rows, cols })
}

/// `∏ P_j^{a_j}` with `0^0 = 1`.
pub fn monomial(field: &Field, a: &ExponentVector, p: &Point) -> Elem {
    a.0.iter()
        .zip(&p.0)
        .fold(1, |acc, (&e, &x)| field.mul(acc, field.pow(x, e as u64)))
}

pub fn evaluate(op: &EncodedOperand, p: &Point) -> Result<Matrix> {
    let field = op.terms[0].1.field().clone();
    if let Some((a, _)) = op.terms.iter().find(|t| t.0.len() != p.dim()) {
        return Err(CodecError::Shape(format!(
            "point of dimension {} for exponent {a}",
            p.dim()
        )));
    }
    let mut out = Matrix::zeros(&field, op.rows, op.cols);
    for (a, block) in &op.terms {
        out.add_scaled(monomial(&field, a, p), block);
    }
    Ok(out)
}

/// What worker `index` receives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WorkerPayload {
    pub index: usize,
    pub point: Point,
    pub a: Matrix,
    pub b: Matrix,
}

impl WorkerPayload {
    pub fn compute(&self) -> WorkerResponse {
        WorkerResponse {
            index: self.index,
            product: matmul(&self.a, &self.b).expect("payload shapes agree"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WorkerResponse {
    pub index: usize,
    pub product: Matrix,
}

/// One transcript line: `index coords rowsxcols entries...`.
pub fn transcript_line(point: &Point, response: &WorkerResponse) -> String {
    let m = &response.product;
    let mut s = format!("{} {} {}x{}", response.index, point, m.rows, m.cols);
    for x in &m.data {
        s.push(' ');
        s.push_str(&x.to_string());
    }
    s
}

/// Inverse of [`transcript_line`].
pub fn parse_transcript_line(field: &Field, line: &str) -> Result<(Point, WorkerResponse)> {
    let bad = || CodecError::Parse(format!("transcript line {line:?}"));
    let mut it = line.split_whitespace();
    let index: usize = it.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
    let point = Point(
        it.next()
            .ok_or_else(bad)?
            .split(',')
            .map(|c| c.parse().map_err(|_| bad()))
            .collect::<Result<_>>()?,
    );
    let (r, c) = it.next().and_then(|t| t.split_once('x')).ok_or_else(bad)?;
    let (r, c): (usize, usize) = (r.parse().map_err(|_| bad())?, c.parse().map_err(|_| bad())?);
    let data = it.map(|t| t.parse().map_err(|_| bad())).collect::<Result<Vec<Elem>>>()?;
    let product = Matrix::from_vec(field, r, c, data)?;
    Ok((point, WorkerResponse { index, product }))
}

/// The evaluation matrix `G` of the span of `support` at `points`.
#[derive(Clone, Debug)]
pub struct InterpolationSystem {
    field: Field,
    support: ExponentSet,
    points: Vec<Point>,
    /// `columns[j][i] = f_i(P_j)`.
    columns: Vec<Vec<Elem>>,
    threshold: usize,
}

/// Operation counts of one decode.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DecodeStats {
    /// Scalar multiply-accumulates spent selecting and factoring columns.
    pub solver_ops: u64,
    /// Scalar multiply-accumulates applied to matrix entries.
    pub apply_ops: u64,
    /// Responses examined before `κ` independent ones were found.
    pub examined: usize,
}

pub fn build_system(field: &Field, support: &ExponentSet, points: Vec<Point>) -> Result<InterpolationSystem> {
    if support.q() != field.order() {
        return Err(CodecError::Param(format!(
            "support over q = {} used with {}",
            support.q(),
            field
        )));
    }
    let kappa = support.len();
    let threshold = support.delta()? as usize + 1;
    if points.len() < threshold {
        return Err(CodecError::InsufficientResponses {
            have: points.len(),
            need: threshold,
            deficit: threshold - points.len(),
        });
    }
    let size = kappa as u128 * points.len() as u128;
    if size > SYSTEM_LIMIT as u128 {
        return Err(CodecError::Capacity {
            size,
            limit: SYSTEM_LIMIT,
        });
    }
    let mut seen = std::collections::HashSet::new();
    for p in &points {
        if p.dim() != support.l() {
            return Err(CodecError::Shape(format!("point {p} not in F_q^{}", support.l())));
        }
        if !seen.insert(&p.0) {
            return Err(CodecError::Param(format!("repeated point {p}")));
        }
    }
    let columns = points
        .iter()
        .map(|p| support.iter().map(|a| monomial(field, a, p)).collect())
        .collect();
    let sys = InterpolationSystem {
        field: field.clone(),
        support: support.clone(),
        points,
        columns,
        threshold,
    };
    let rank = sys.rank(0..sys.points.len());
    if rank < kappa {
        return Err(CodecError::RankDeficient { rank, kappa });
    }
    Ok(sys)
}

/// `G_S = B·U` for a set `S` of independent columns.
struct Factors {
    chosen: Vec<usize>,
    pivots: Vec<usize>,
    /// Reduced columns, scaled to 1 at their pivot; zero at earlier pivots.
    basis: Vec<Vec<Elem>>,
    /// `u[j][i]`: coefficient of `basis[i]` in column `chosen[j]`.
    u: Vec<Vec<Elem>>,
    ops: u64,
    examined: usize,
}

impl InterpolationSystem {
    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn support(&self) -> &ExponentSet {
        &self.support
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn kappa(&self) -> usize {
        self.support.len()
    }

    /// `k + 1 = δ(support) + 1`.
    pub fn threshold(&self) -> usize {
        self.threshold
    }

    /// `f_i(P_j)`.
    pub fn entry(&self, i: usize, j: usize) -> Elem {
        self.columns[j][i]
    }

    /// Rank of the columns at the given point indices.
    pub fn rank(&self, indices: impl IntoIterator<Item = usize>) -> usize {
        self.factor(indices).chosen.len()
    }

    /// How many of the given columns, taken in order, are needed before the
    /// rank reaches `κ`; `None` if it never does.
    pub fn needed(&self, indices: impl IntoIterator<Item = usize>) -> Option<usize> {
        let fac = self.factor(indices);
        (fac.chosen.len() == self.kappa()).then_some(fac.examined)
    }

    fn factor(&self, indices: impl IntoIterator<Item = usize>) -> Factors {
        let f = &self.field;
        let kappa = self.kappa();
        let mut fac = Factors {
            chosen: Vec::new(),
            pivots: Vec::new(),
            basis: Vec::new(),
            u: Vec::new(),
            ops: 0,
            examined: 0,
        };
        for j in indices {
            if fac.chosen.len() == kappa {
                break;
            }
            fac.examined += 1;
            let mut v = self.columns[j].clone();
            let mut coeffs = Vec::with_capacity(fac.basis.len() + 1);
            for (b, &pi) in fac.basis.iter().zip(&fac.pivots) {
                let c = v[pi];
                coeffs.push(c);
                if c == 0 {
                    continue;
                }
                for (x, &y) in v.iter_mut().zip(b) {
                    if y != 0 {
                        *x = f.sub(*x, f.mul(c, y));
                    }
                }
                fac.ops += kappa as u64;
            }
            let Some(pi) = v.iter().position(|&x| x != 0) else {
                continue;
            };
            let s = v[pi];
            let inv = f.inv(s).expect("nonzero pivot");
            for x in &mut v {
                *x = f.mul(*x, inv);
            }
            fac.ops += kappa as u64;
            coeffs.push(s);
            fac.chosen.push(j);
            fac.pivots.push(pi);
            fac.basis.push(v);
            fac.u.push(coeffs);
        }
        fac
    }

    fn checked_factor(&self, responses: &[WorkerResponse]) -> Result<(Factors, Vec<usize>)> {
        let mut order = Vec::with_capacity(responses.len());
        let mut seen = vec![false; self.points.len()];
        for (pos, r) in responses.iter().enumerate() {
            if r.index >= self.points.len() {
                return Err(CodecError::UnknownPoint(r.index));
            }
            if !seen[r.index] {
                seen[r.index] = true;
                order.push(pos);
            }
        }
        if order.len() < self.threshold {
            return Err(CodecError::InsufficientResponses {
                have: order.len(),
                need: self.threshold,
                deficit: self.threshold - order.len(),
            });
        }
        let fac = self.factor(order.iter().map(|&pos| responses[pos].index));
        if fac.chosen.len() < self.kappa() {
            return Err(CodecError::RankDeficient {
                rank: fac.chosen.len(),
                kappa: self.kappa(),
            });
        }
        // map chosen point indices back to positions in `responses`
        let mut pos_of = vec![usize::MAX; self.points.len()];
        for &pos in &order {
            pos_of[responses[pos].index] = pos;
        }
        let positions = fac.chosen.iter().map(|&j| pos_of[j]).collect();
        Ok((fac, positions))
    }

    /// All coefficients of `h` from at least `k + 1` distinct responses.
    pub fn interpolate(&self, responses: &[WorkerResponse]) -> Result<(BTreeMap<ExponentVector, Matrix>, DecodeStats)> {
        let (fac, positions) = self.checked_factor(responses)?;
        let f = &self.field;
        let kappa = self.kappa();
        let proto = &responses[positions[0]].product;
        let entries = (proto.rows * proto.cols) as u64;
        let mut apply = 0u64;
        // Uᵀ y = Y_S
        let mut y: Vec<Matrix> = Vec::with_capacity(kappa);
        for j in 0..kappa {
            let mut acc = responses[positions[j]].product.clone();
            for (i, yi) in y.iter().enumerate() {
                let c = fac.u[j][i];
                if c != 0 {
                    acc.add_scaled(f.neg(c), yi);
                    apply += entries;
                }
            }
            acc.scale(f.inv(fac.u[j][j]).expect("nonzero diagonal"));
            apply += entries;
            y.push(acc);
        }
        // Bᵀ C = y, back substitution over pivots
        let mut coeffs: Vec<Option<Matrix>> = vec![None; kappa];
        for i in (0..kappa).rev() {
            let mut acc = y[i].clone();
            for k in i + 1..kappa {
                let c = fac.basis[i][fac.pivots[k]];
                if c != 0 {
                    acc.add_scaled(f.neg(c), coeffs[fac.pivots[k]].as_ref().expect("solved"));
                    apply += entries;
                }
            }
            coeffs[fac.pivots[i]] = Some(acc);
        }
        let map = self
            .support
            .iter()
            .cloned()
            .zip(coeffs.into_iter().map(|c| c.expect("every row is a pivot")))
            .collect();
        Ok((
            map,
            DecodeStats {
                solver_ops: fac.ops,
                apply_ops: apply,
                examined: fac.examined,
            },
        ))
    }

    /// Only the coefficient at `target`, from the single row of the inverse
    /// it needs.
    pub fn interpolate_at(&self, responses: &[WorkerResponse], target: &ExponentVector) -> Result<(Matrix, DecodeStats)> {
        let row = self
            .support
            .position(target)
            .ok_or_else(|| CodecError::Incomplete(target.clone()))?;
        let (fac, positions) = self.checked_factor(responses)?;
        let f = &self.field;
        let kappa = self.kappa();
        let mut ops = fac.ops;
        // B z = e_row
        let mut z = vec![0 as Elem; kappa];
        for i in 0..kappa {
            let mut acc = if fac.pivots[i] == row { 1 } else { 0 };
            for k in 0..i {
                let c = fac.basis[k][fac.pivots[i]];
                if c != 0 && z[k] != 0 {
                    acc = f.sub(acc, f.mul(z[k], c));
                }
            }
            ops += i as u64;
            z[i] = acc;
        }
        // U w = z
        let mut w = vec![0 as Elem; kappa];
        for i in (0..kappa).rev() {
            let mut acc = z[i];
            for j in i + 1..kappa {
                acc = f.sub(acc, f.mul(fac.u[j][i], w[j]));
            }
            ops += (kappa - i) as u64;
            w[i] = f.mul(acc, f.inv(fac.u[i][i]).expect("nonzero diagonal"));
        }
        let proto = &responses[positions[0]].product;
        let mut out = Matrix::zeros(f, proto.rows, proto.cols);
        let mut apply = 0;
        for (j, &pos) in positions.iter().enumerate() {
            if w[j] != 0 {
                out.add_scaled(w[j], &responses[pos].product);
                apply += (proto.rows * proto.cols) as u64;
            }
        }
        Ok((
            out,
            DecodeStats {
                solver_ops: ops,
                apply_ops: apply,
                examined: fac.examined,
            },
        ))
    }
}

/// `C_{ij}` is the coefficient at `(a_i + b_j)_q`; assembles the grid and
/// trims padding.
pub fn extract_poly(
    coeffs: &BTreeMap<ExponentVector, Matrix>,
    sol: &PolySolution,
    split_a: &BlockSplit,
    split_b: &BlockSplit,
) -> Result<Matrix> {
    let (r, _, t) = split_a.dims;
    let (bh, bw) = (split_a.blocks[0].rows, split_b.blocks[0].cols);
    let field = split_a.blocks[0].field();
    let mut out = Matrix::zeros(field, r, t);
    for (i, a) in sol.da.iter().enumerate() {
        for (j, b) in sol.db.iter().enumerate() {
            let key = a.add_q(b, sol.q);
            let c = coeffs.get(&key).ok_or(CodecError::Incomplete(key))?;
            out.paste(i * bh, j * bw, c);
        }
    }
    Ok(out)
}

/// The coefficient at `d`, trimmed to `r × t`.
pub fn extract_matdot(
    coeffs: &BTreeMap<ExponentVector, Matrix>,
    d: &ExponentVector,
    split_a: &BlockSplit,
) -> Result<Matrix> {
    let c = coeffs.get(d).ok_or_else(|| CodecError::Incomplete(d.clone()))?;
    let (r, _, t) = split_a.dims;
    Ok(c.window(0, 0, r, t))
}

/// A product `A·B` encoded under a solution, ready to hand out payloads.
#[derive(Clone, Debug)]
pub struct CodedProduct {
    pub solution: Solution,
    pub split_a: BlockSplit,
    pub split_b: BlockSplit,
    pub pa: EncodedOperand,
    pub pb: EncodedOperand,
}

impl CodedProduct {
    pub fn new(solution: &Solution, a: &Matrix, b: &Matrix) -> Result<Self> {
        if a.field.order() != solution.q() {
            return Err(CodecError::Param(format!(
                "matrices over {} for a solution with q = {}",
                a.field,
                solution.q()
            )));
        }
        let (split_a, split_b, pa, pb) = match solution {
            Solution::Poly(s) => {
                let (sa, sb) = split(a, b, Scheme::Poly { m: s.m(), n: s.n() })?;
                let pa = encode(&sa.blocks, &s.da)?;
                let pb = encode(&sb.blocks, &s.db)?;
                (sa, sb, pa, pb)
            }
            Solution::Matdot(s) => {
                let (sa, sb) = split(a, b, Scheme::Matdot { m: s.m() })?;
                let (xa, xb): (Vec<_>, Vec<_>) = s.pairs.iter().cloned().unzip();
                let pa = encode_at(&sa.blocks, &xa)?;
                let pb = encode_at(&sb.blocks, &xb)?;
                (sa, sb, pa, pb)
            }
        };
        Ok(CodedProduct {
            solution: solution.clone(),
            split_a,
            split_b,
            pa,
            pb,
        })
    }

    pub fn payload(&self, index: usize, point: &Point) -> Result<WorkerPayload> {
        Ok(WorkerPayload {
            index,
            point: point.clone(),
            a: evaluate(&self.pa, point)?,
            b: evaluate(&self.pb, point)?,
        })
    }

    /// Decodes `A·B` from the responses; the system must be built over the
    /// solution's sum set.
    pub fn decode(&self, sys: &InterpolationSystem, responses: &[WorkerResponse]) -> Result<(Matrix, DecodeStats)> {
        match &self.solution {
            Solution::Poly(s) => {
                let (coeffs, stats) = sys.interpolate(responses)?;
                Ok((extract_poly(&coeffs, s, &self.split_a, &self.split_b)?, stats))
            }
            Solution::Matdot(s) => decode_matdot(s, sys, responses, &self.split_a),
        }
    }
}

fn decode_matdot(
    s: &MatdotSolution,
    sys: &InterpolationSystem,
    responses: &[WorkerResponse],
    split_a: &BlockSplit,
) -> Result<(Matrix, DecodeStats)> {
    let (c, stats) = sys.interpolate_at(responses, &s.d)?;
    let mut coeffs = BTreeMap::new();
    coeffs.insert(s.d.clone(), c);
    Ok((extract_matdot(&coeffs, &s.d, split_a)?, stats))
}
