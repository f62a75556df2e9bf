//! Parameter tables T1..T8 for the box, better-box, separation-of-variables
//! and half-hyperbolic constructions, with bundled reference copies.

use std::fmt;
use std::str::FromStr;

use crate::constructions::{better_box, box_poly, corner_d, half_hyperbolic, sep_vars, ConstructionError};
use crate::exponents::xi_bound;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TableId {
    T1,
    T2,
    T3,
    T4,
    T5,
    T6,
    T7,
    T8,
}

pub const ALL_TABLES: [TableId; 8] = [
    TableId::T1,
    TableId::T2,
    TableId::T3,
    TableId::T4,
    TableId::T5,
    TableId::T6,
    TableId::T7,
    TableId::T8,
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// Box and better box, `n_i = ⌊2q/(3m_i)⌋`, `m_i = 1..=6`.
    Box,
    /// Separation of variables with `F_A = F_B = F`.
    SepVars { m_prime: usize, n_prime: usize },
    /// Half hyperbolic sets with `d` at the corner of the half box.
    HalfHyperbolic,
}

/// What a table is generated from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableSpec {
    pub id: TableId,
    pub q: u64,
    pub l: usize,
    pub family: Family,
    /// Values of the row parameter (`m_i` or `F`).
    pub rows: Vec<u64>,
}

impl TableId {
    pub fn spec(self) -> TableSpec {
        let pow2 = |k: u32| (1..=k).map(|i| 1u64 << i).collect::<Vec<_>>();
        let (q, l, family, rows) = match self {
            TableId::T1 => (19, 2, Family::Box, (1..=6).collect()),
            TableId::T2 => (25, 2, Family::Box, (1..=6).collect()),
            TableId::T3 => (2, 10, Family::SepVars { m_prime: 5, n_prime: 5 }, pow2(4)),
            TableId::T4 => (2, 20, Family::SepVars { m_prime: 10, n_prime: 10 }, pow2(9)),
            TableId::T5 => (64, 2, Family::SepVars { m_prime: 1, n_prime: 1 }, pow2(5)),
            TableId::T6 => (128, 2, Family::SepVars { m_prime: 1, n_prime: 1 }, pow2(6)),
            TableId::T7 => (8, 3, Family::HalfHyperbolic, (0..8).map(|k| 1 + 8 * k).collect()),
            TableId::T8 => (32, 3, Family::HalfHyperbolic, (0..8).map(|k| 1 + 512 * k).collect()),
        };
        TableSpec {
            id: self,
            q,
            l,
            family,
            rows,
        }
    }

    /// The reference copy bundled with the crate.
    pub fn golden(self) -> &'static str {
        match self {
            TableId::T1 => include_str!("../golden/T1.tsv"),
            TableId::T2 => include_str!("../golden/T2.tsv"),
            TableId::T3 => include_str!("../golden/T3.tsv"),
            TableId::T4 => include_str!("../golden/T4.tsv"),
            TableId::T5 => include_str!("../golden/T5.tsv"),
            TableId::T6 => include_str!("../golden/T6.tsv"),
            TableId::T7 => include_str!("../golden/T7.tsv"),
            TableId::T8 => include_str!("../golden/T8.tsv"),
        }
    }
}

impl fmt::Display for TableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for TableId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ALL_TABLES
            .iter()
            .copied()
            .find(|t| t.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown table {s:?}; expected T1..T8"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellDiff {
    /// 1-based data row; 0 is the header.
    pub row: usize,
    pub column: String,
    pub expected: String,
    pub actual: String,
}

impl fmt::Display for CellDiff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "row {} column {}: expected {:?}, got {:?}",
            self.row, self.column, self.expected, self.actual
        )
    }
}

impl Table {
    pub fn to_tsv(&self) -> String {
        let mut s = self.header.join("\t");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join("\t"));
            s.push('\n');
        }
        s
    }

    pub fn parse_tsv(text: &str) -> Table {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let split = |l: &str| l.split('\t').map(|c| c.trim().to_string()).collect::<Vec<_>>();
        let header = lines.next().map(split).unwrap_or_default();
        Table {
            header,
            rows: lines.map(split).collect(),
        }
    }

    /// Cell-by-cell comparison; missing cells compare as empty.
    pub fn diff(&self, expected: &Table) -> Vec<CellDiff> {
        let mut out = Vec::new();
        let all_rows = std::iter::once((&expected.header, &self.header)).chain(
            (0..expected.rows.len().max(self.rows.len())).map(|i| {
                static EMPTY: Vec<String> = Vec::new();
                (
                    expected.rows.get(i).unwrap_or(&EMPTY),
                    self.rows.get(i).unwrap_or(&EMPTY),
                )
            }),
        );
        for (row, (e, a)) in all_rows.enumerate() {
            for col in 0..e.len().max(a.len()) {
                let get = |v: &Vec<String>| v.get(col).cloned().unwrap_or_default();
                let (ev, av) = (get(e), get(a));
                if ev != av {
                    out.push(CellDiff {
                        row,
                        column: expected
                            .header
                            .get(col)
                            .cloned()
                            .unwrap_or_else(|| format!("#{}", col + 1)),
                        expected: ev,
                        actual: av,
                    });
                }
            }
        }
        out
    }
}

fn cells(v: &[u64]) -> Vec<String> {
    v.iter().map(|x| x.to_string()).collect()
}

fn header(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

pub fn generate(spec: &TableSpec) -> Result<Table, ConstructionError> {
    let (q, l) = (spec.q, spec.l);
    let xi = |target: u64| xi_bound(q, l, target).map_err(ConstructionError::from);
    let mut rows = Vec::with_capacity(spec.rows.len());
    let head = match spec.family {
        Family::Box => {
            for &mi in &spec.rows {
                let ni = 2 * q / (3 * mi);
                let mvec = vec![mi as u32; l];
                let boxed = box_poly(q, &mvec, &vec![ni as u32; l])?;
                let better = better_box(q, &mvec, boxed.fb.value)?;
                let (m, n, nt) = (boxed.m() as u64, boxed.n() as u64, better.n() as u64);
                rows.push(cells(&[
                    mi,
                    ni,
                    m,
                    n,
                    nt,
                    boxed.fb.value,
                    xi(m * n)?,
                    xi(m * nt)?,
                    boxed.recovery_threshold(),
                ]));
            }
            header(&["m_i", "n_i", "m", "n", "n~", "FB", "xi", "xi~", "k+1"])
        }
        Family::SepVars { m_prime, n_prime } => {
            for &f in &spec.rows {
                let s = sep_vars(q, m_prime, n_prime, f, f)?;
                let m = s.m() as u64;
                rows.push(cells(&[
                    f,
                    m,
                    s.fb.value,
                    xi(m * s.n() as u64)?,
                    s.recovery_threshold(),
                ]));
            }
            header(&["F", "m", "FB", "xi", "k+1"])
        }
        Family::HalfHyperbolic => {
            let d = corner_d(q, l);
            for &f in &spec.rows {
                let s = half_hyperbolic(q, f, &d)?;
                rows.push(cells(&[f, s.m() as u64, s.recovery_threshold()]));
            }
            header(&["F", "m", "k+1"])
        }
    };
    Ok(Table { header: head, rows })
}

/// Generates a table and compares it with the bundled copy.
pub fn check(id: TableId) -> Result<(Table, Vec<CellDiff>), ConstructionError> {
    let t = generate(&id.spec())?;
    let diffs = t.diff(&Table::parse_tsv(id.golden()));
    Ok((t, diffs))
}
