//! Exact arithmetic in GF(p^e) over dense integer indices.
//!
//! An element is stored as the integer whose base-`p` digits are the
//! coefficients of its polynomial-basis representative (least significant
//! digit = constant term). Index 0 is zero and index 1 is one.
//!
//! A [`Field`] owns log/antilog tables built once at construction, so `mul`
//! and `inv` are table lookups. Fields are cheap to clone and compare.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

/// Largest supported field order.
pub const MAX_ORDER: u64 = 1 << 16;

/// Raw element index. Only meaningful together with the [`Field`] it came from.
pub type Elem = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("field order {p}^{e} exceeds the supported maximum {MAX_ORDER}")]
    TooLarge { p: u32, e: u32 },
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("modulus {0} is not a monic polynomial of degree {1}")]
    BadModulus(u64, u32),
    #[error("modulus {0} is reducible")]
    Reducible(u64),
    #[error("elements belong to different fields ({0} vs {1})")]
    SpecMismatch(String, String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("index {index} is out of range for a field of order {q}")]
    OutOfRange { index: u64, q: u64 },
    #[error("q^l = {q}^{l} exceeds the capacity limit {limit}")]
    Capacity { q: u64, l: usize, limit: u64 },
    #[error("cannot parse field spec {0:?}")]
    Parse(String),
}

#[derive(Debug)]
struct Inner {
    p: u32,
    e: u32,
    q: u32,
    modulus: u64,
    // exp has length 2(q-1) so log a + log b never needs a reduction.
    exp: Vec<Elem>,
    log: Vec<u32>,
    neg: Vec<Elem>,
    // Full addition table for small odd-characteristic extension fields.
    add: Option<Vec<Elem>>,
}

/// A finite field GF(p^e) with a fixed irreducible modulus.
#[derive(Clone)]
pub struct Field(Arc<Inner>);

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.p == other.0.p && self.0.e == other.0.e && self.0.modulus == other.0.modulus)
    }
}
impl Eq for Field {}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Field({self})")
    }
}

/// `p^e/modulus` for extension fields, `p^1` for prime fields.
impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.e == 1 {
            write!(f, "{}^1", self.0.p)
        } else {
            write!(f, "{}^{}/{}", self.0.p, self.0.e, self.0.modulus)
        }
    }
}

impl FromStr for Field {
    type Err = FieldError;

    /// Accepts `q` (any prime power), `p^e` (default modulus) and
    /// `p^e/modulus`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || FieldError::Parse(s.to_string());
        let s = s.trim();
        let (head, modulus) = match s.split_once('/') {
            Some((h, m)) => (h, Some(m.trim().parse::<u64>().map_err(|_| bad())?)),
            None => (s, None),
        };
        let (p, e) = match head.split_once('^') {
            Some((p, e)) => (
                p.trim().parse::<u32>().map_err(|_| bad())?,
                e.trim().parse::<u32>().map_err(|_| bad())?,
            ),
            None if modulus.is_none() => {
                return Field::of_order(head.parse::<u64>().map_err(|_| bad())?);
            }
            None => (head.parse::<u32>().map_err(|_| bad())?, 1),
        };
        match modulus {
            Some(m) if e > 1 => Field::with_modulus(p, e, m),
            _ => Field::new(p, e),
        }
    }
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Base-`p` digits of `x`, least significant first, padded to `len`.
fn digits(mut x: u64, p: u64, len: usize) -> Vec<u64> {
    let mut out = vec![0; len];
    for d in out.iter_mut() {
        *d = x % p;
        x /= p;
    }
    out
}

fn undigits(ds: &[u64], p: u64) -> u64 {
    ds.iter().rev().fold(0, |acc, &d| acc * p + d)
}

fn poly_degree(ds: &[u64]) -> Option<usize> {
    ds.iter().rposition(|&c| c != 0)
}

/// Remainder of `a` divided by the monic-or-not polynomial `b` over Z_p.
fn poly_rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    let db = poly_degree(b).expect("division by zero polynomial");
    let lead_inv = mod_inv(b[db], p);
    while let Some(dr) = poly_degree(&r) {
        if dr < db {
            break;
        }
        let factor = r[dr] * lead_inv % p;
        let shift = dr - db;
        for (i, &c) in b.iter().enumerate().take(db + 1) {
            r[i + shift] = (r[i + shift] + p * p - factor * c % p) % p;
        }
    }
    r
}

fn mod_inv(a: u64, p: u64) -> u64 {
    // p is prime and small; Fermat.
    let mut result = 1;
    let mut base = a % p;
    let mut exp = p - 2;
    while exp > 0 {
        if exp & 1 == 1 {
            result = result * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    result
}

/// Trial division by every monic polynomial of degree 1..=e/2.
fn is_irreducible(modulus: u64, p: u64, e: u32) -> bool {
    let m = digits(modulus, p, e as usize + 1);
    for deg in 1..=(e / 2) {
        let lo = p.pow(deg);
        for low in 0..lo {
            // Monic divisor of degree `deg` with lower coefficients `low`.
            let mut d = digits(low, p, deg as usize + 1);
            d[deg as usize] = 1;
            let r = poly_rem(&m, &d, p);
            if poly_degree(&r).is_none() {
                return false;
            }
        }
    }
    true
}

/// Smallest integer encoding of a monic irreducible polynomial of degree `e`.
pub fn least_irreducible(p: u32, e: u32) -> u64 {
    let p64 = p as u64;
    let lead = p64.pow(e);
    (0..lead)
        .map(|low| lead + low)
        .find(|&m| is_irreducible(m, p64, e))
        .expect("irreducible polynomials exist in every degree")
}

impl Field {
    /// GF(p^e) with the lexicographically least irreducible modulus.
    pub fn new(p: u32, e: u32) -> Result<Self, FieldError> {
        Self::check_order(p, e)?;
        let modulus = if e == 1 { p as u64 } else { least_irreducible(p, e) };
        Self::build(p, e, modulus)
    }

    /// GF(p^e) with a caller-supplied modulus, given as the integer whose
    /// base-`p` digits are its coefficients (e.g. 11 = x^3 + x + 1 for p = 2).
    pub fn with_modulus(p: u32, e: u32, modulus: u64) -> Result<Self, FieldError> {
        Self::check_order(p, e)?;
        if e == 1 {
            return Self::build(p, 1, p as u64);
        }
        let p64 = p as u64;
        let lead = p64.pow(e);
        if modulus < lead || modulus >= 2 * lead {
            return Err(FieldError::BadModulus(modulus, e));
        }
        if !is_irreducible(modulus, p64, e) {
            return Err(FieldError::Reducible(modulus));
        }
        Self::build(p, e, modulus)
    }

    /// Field of order `q`, which must be a prime power.
    pub fn of_order(q: u64) -> Result<Self, FieldError> {
        let factors = prime_factors(q);
        if factors.len() != 1 {
            return Err(FieldError::Parse(q.to_string()));
        }
        let p = factors[0];
        let mut e = 0;
        let mut x = q;
        while x > 1 {
            x /= p;
            e += 1;
        }
        Self::new(p as u32, e)
    }

    fn check_order(p: u32, e: u32) -> Result<(), FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if e == 0 {
            return Err(FieldError::ZeroDegree);
        }
        match (p as u64).checked_pow(e) {
            Some(q) if q <= MAX_ORDER => Ok(()),
            _ => Err(FieldError::TooLarge { p, e }),
        }
    }

    fn build(p: u32, e: u32, modulus: u64) -> Result<Self, FieldError> {
        let p64 = p as u64;
        let q = p64.pow(e);
        let m = digits(modulus, p64, e as usize + 1);
        let slow_mul = |a: u64, b: u64| -> u64 {
            if e == 1 {
                return a * b % p64;
            }
            let da = digits(a, p64, e as usize);
            let db = digits(b, p64, e as usize);
            let mut prod = vec![0u64; 2 * e as usize];
            for (i, &x) in da.iter().enumerate() {
                for (j, &y) in db.iter().enumerate() {
                    prod[i + j] = (prod[i + j] + x * y) % p64;
                }
            }
            let r = poly_rem(&prod, &m, p64);
            undigits(&r[..e as usize], p64)
        };

        let order = q - 1;
        let factors = prime_factors(order);
        let pow = |mut base: u64, mut exp: u64| -> u64 {
            let mut acc = 1;
            while exp > 0 {
                if exp & 1 == 1 {
                    acc = slow_mul(acc, base);
                }
                base = slow_mul(base, base);
                exp >>= 1;
            }
            acc
        };
        let generator = (2..q.max(3))
            .chain(std::iter::once(1))
            .find(|&g| g < q && factors.iter().all(|&f| pow(g, order / f) != 1))
            .unwrap_or(1);

        let mut exp = vec![0 as Elem; 2 * order as usize];
        let mut log = vec![0u32; q as usize];
        let mut x = 1u64;
        for i in 0..order as usize {
            exp[i] = x as Elem;
            exp[i + order as usize] = x as Elem;
            log[x as usize] = i as u32;
            x = slow_mul(x, generator);
        }

        let neg = (0..q)
            .map(|a| {
                let d: Vec<u64> = digits(a, p64, e as usize)
                    .into_iter()
                    .map(|c| (p64 - c) % p64)
                    .collect();
                undigits(&d, p64) as Elem
            })
            .collect();

        let add = if p != 2 && e > 1 && q <= 256 {
            let mut t = vec![0 as Elem; (q * q) as usize];
            for a in 0..q {
                let da = digits(a, p64, e as usize);
                for b in 0..q {
                    let db = digits(b, p64, e as usize);
                    let s: Vec<u64> = da.iter().zip(&db).map(|(x, y)| (x + y) % p64).collect();
                    t[(a * q + b) as usize] = undigits(&s, p64) as Elem;
                }
            }
            Some(t)
        } else {
            None
        };

        Ok(Field(Arc::new(Inner {
            p,
            e,
            q: q as u32,
            modulus,
            exp,
            log,
            neg,
            add,
        })))
    }

    pub fn characteristic(&self) -> u32 {
        self.0.p
    }

    pub fn degree(&self) -> u32 {
        self.0.e
    }

    pub fn order(&self) -> u64 {
        self.0.q as u64
    }

    /// Integer encoding of the modulus (equal to `p` for prime fields).
    pub fn modulus(&self) -> u64 {
        self.0.modulus
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        let f = &*self.0;
        if f.p == 2 {
            a ^ b
        } else if f.e == 1 {
            let s = a + b;
            if s >= f.q {
                s - f.q
            } else {
                s
            }
        } else if let Some(t) = &f.add {
            t[(a * f.q + b) as usize]
        } else {
            let p = f.p;
            let (mut a, mut b) = (a, b);
            let (mut out, mut place) = (0, 1);
            while a > 0 || b > 0 {
                out += ((a % p + b % p) % p) * place;
                a /= p;
                b /= p;
                place *= p;
            }
            out
        }
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        self.0.neg[a as usize]
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if a == 0 || b == 0 {
            return 0;
        }
        let f = &*self.0;
        f.exp[(f.log[a as usize] + f.log[b as usize]) as usize]
    }

    pub fn inv(&self, a: Elem) -> Result<Elem, FieldError> {
        if a == 0 {
            return Err(FieldError::DivisionByZero);
        }
        let f = &*self.0;
        let order = f.q - 1;
        Ok(f.exp[((order - f.log[a as usize]) % order) as usize])
    }

    pub fn pow(&self, a: Elem, k: u64) -> Elem {
        if k == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let f = &*self.0;
        let order = (f.q - 1) as u64;
        f.exp[((f.log[a as usize] as u64 * (k % order)) % order) as usize]
    }

    pub fn element(&self, index: u64) -> Result<FieldElement, FieldError> {
        if index >= self.order() {
            return Err(FieldError::OutOfRange {
                index,
                q: self.order(),
            });
        }
        Ok(FieldElement {
            field: self.clone(),
            value: index as Elem,
        })
    }

    /// Polynomial-basis coefficients of an element, constant term first.
    pub fn coefficients(&self, a: Elem) -> Vec<u32> {
        digits(a as u64, self.0.p as u64, self.0.e as usize)
            .into_iter()
            .map(|c| c as u32)
            .collect()
    }

    /// All points of F_q^l in lexicographic order of coordinate indices,
    /// last coordinate varying fastest.
    pub fn enumerate_points(&self, l: usize, limit: u64) -> Result<Vec<Point>, FieldError> {
        let q = self.order();
        let count = (q as u128).checked_pow(l as u32).unwrap_or(u128::MAX);
        if l == 0 || count > limit as u128 {
            return Err(FieldError::Capacity { q, l, limit });
        }
        Ok((0..count as u64).map(|i| self.point(i, l)).collect())
    }

    /// The `i`-th point of the lexicographic enumeration of F_q^l.
    pub fn point(&self, mut i: u64, l: usize) -> Point {
        let q = self.order();
        let mut coords = vec![0 as Elem; l];
        for c in coords.iter_mut().rev() {
            *c = (i % q) as Elem;
            i /= q;
        }
        Point(coords)
    }
}

/// An element tied to its field, for checked arithmetic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldElement {
    field: Field,
    value: Elem,
}

impl FieldElement {
    pub fn index(&self) -> u64 {
        self.value as u64
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    fn same(&self, other: &Self) -> Result<(), FieldError> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(FieldError::SpecMismatch(
                self.field.to_string(),
                other.field.to_string(),
            ))
        }
    }

    fn wrap(&self, value: Elem) -> Self {
        FieldElement {
            field: self.field.clone(),
            value,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, FieldError> {
        self.same(other)?;
        Ok(self.wrap(self.field.add(self.value, other.value)))
    }

    pub fn mul(&self, other: &Self) -> Result<Self, FieldError> {
        self.same(other)?;
        Ok(self.wrap(self.field.mul(self.value, other.value)))
    }

    pub fn inv(&self) -> Result<Self, FieldError> {
        Ok(self.wrap(self.field.inv(self.value)?))
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// A point of F_q^l, as raw element indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point(pub Vec<Elem>);

impl Point {
    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(p: u32, e: u32) -> Field {
        Field::new(p, e).unwrap()
    }

    #[test]
    fn small_examples() {
        let f2 = gf(2, 1);
        assert_eq!(f2.add(1, 1), 0);
        let f19 = gf(19, 1);
        assert_eq!(f19.add(12, 9), 2);
        assert_eq!(f19.mul(7, 8), 18);
        assert_eq!(f19.inv(2).unwrap(), 10);
        assert_eq!(f2.inv(1).unwrap(), 1);
        let f8 = Field::with_modulus(2, 3, 0b1011).unwrap();
        assert_eq!(f8.add(0b011, 0b110), 0b101);
    }

    // Naive polynomial product followed by long division, kept separate from
    // the table-driven path.
    fn naive_gf8_mul(a: u32, b: u32) -> u32 {
        let mut prod = 0u32;
        for i in 0..3 {
            if (b >> i) & 1 == 1 {
                prod ^= a << i;
            }
        }
        for bit in (3..6).rev() {
            if (prod >> bit) & 1 == 1 {
                prod ^= 0b1011 << (bit - 3);
            }
        }
        prod
    }

    #[test]
    fn gf8_matches_naive_oracle() {
        let f8 = Field::with_modulus(2, 3, 0b1011).unwrap();
        assert_eq!(naive_gf8_mul(0b010, 0b100), 0b011);
        assert_eq!(f8.mul(0b010, 0b100), 0b011);
        for a in 0..8 {
            for b in 0..8 {
                assert_eq!(f8.mul(a, b), naive_gf8_mul(a, b));
            }
        }
        // inverse of x by exhaustive search is x^2 + 1
        let x_inv = (1..8).find(|&b| naive_gf8_mul(0b010, b) == 1).unwrap();
        assert_eq!(x_inv, 0b101);
        assert_eq!(f8.inv(0b010).unwrap(), 0b101);
    }

    #[test]
    fn default_moduli_are_least_irreducible() {
        assert_eq!(gf(2, 2).modulus(), 7);
        assert_eq!(gf(2, 3).modulus(), 11);
        assert_eq!(gf(2, 4).modulus(), 19);
        assert_eq!(gf(2, 8).modulus(), 283);
        // x^2 + 2 over Z_5 encodes as 25 + 2
        assert_eq!(gf(5, 2).modulus(), 27);
        for (p, e) in [(2, 5), (2, 6), (2, 7), (3, 3), (3, 4), (7, 2), (5, 3)] {
            let f = gf(p, e);
            assert!(is_irreducible(f.modulus(), p as u64, e));
        }
    }

    #[test]
    fn rejects_bad_specs() {
        assert_eq!(Field::new(4, 1), Err(FieldError::NotPrime(4)));
        assert!(matches!(Field::new(2, 17), Err(FieldError::TooLarge { .. })));
        assert_eq!(
            Field::with_modulus(2, 2, 0b101),
            Err(FieldError::Reducible(0b101))
        );
        assert!(matches!(
            Field::with_modulus(2, 3, 0b111),
            Err(FieldError::BadModulus(..))
        ));
        assert_eq!(gf(5, 1).inv(0), Err(FieldError::DivisionByZero));
    }

    #[test]
    fn checked_elements() {
        let f4 = gf(2, 2);
        let x = f4.element(2).unwrap();
        assert_eq!(f4.coefficients(2), vec![0, 1]);
        assert_eq!(gf(19, 1).element(5).unwrap().index(), 5);
        assert!(f4.element(4).is_err());
        let other = gf(3, 1).element(1).unwrap();
        assert!(matches!(x.add(&other), Err(FieldError::SpecMismatch(..))));
        assert!(matches!(x.mul(&other), Err(FieldError::SpecMismatch(..))));
        let one = f4.element(1).unwrap();
        assert_eq!(x.mul(&one).unwrap(), x);
        assert_eq!(x.mul(&x.inv().unwrap()).unwrap(), one);
    }

    #[test]
    fn field_axioms_exhaustive() {
        for q in [2u64, 3, 4, 5, 7, 8, 9, 11, 13, 16] {
            let f = Field::of_order(q).unwrap();
            let q = q as Elem;
            for a in 0..q {
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
                    assert_eq!(f.pow(a, q as u64 - 1), 1);
                }
                assert_eq!(f.add(a, f.neg(a)), 0);
                for b in 0..q {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for c in 0..q {
                        assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn fermat_for_larger_fields() {
        for q in [25u64, 27, 32, 49, 64, 81, 125, 128, 256, 1024, 6561] {
            let f = Field::of_order(q).unwrap();
            for a in 1..q as Elem {
                assert_eq!(f.pow(a, q - 1), 1, "q={q} a={a}");
            }
        }
    }

    #[test]
    fn point_enumeration() {
        let f2 = gf(2, 1);
        let pts = f2.enumerate_points(2, 1 << 20).unwrap();
        let raw: Vec<Vec<Elem>> = pts.into_iter().map(|p| p.0).collect();
        assert_eq!(raw, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert_eq!(f2.enumerate_points(10, 1 << 20).unwrap().len(), 1024);
        assert_eq!(gf(19, 1).enumerate_points(2, 1 << 20).unwrap().len(), 361);
        assert!(matches!(
            f2.enumerate_points(21, 1 << 20),
            Err(FieldError::Capacity { .. })
        ));
    }

    #[test]
    fn text_form() {
        let f8: Field = "2^3/11".parse().unwrap();
        assert_eq!(f8.to_string(), "2^3/11");
        let f19: Field = "19".parse().unwrap();
        assert_eq!(f19.to_string(), "19^1");
        assert_eq!("19^1".parse::<Field>().unwrap(), f19);
        assert_eq!("2^3".parse::<Field>().unwrap(), f8);
        assert!("2^3/15".parse::<Field>().is_err());
        assert!("x".parse::<Field>().is_err());
        assert_eq!("8".parse::<Field>().unwrap(), f8);
        assert!("12".parse::<Field>().is_err());
    }

    proptest::proptest! {
        #[test]
        fn index_round_trip(q in proptest::sample::select(vec![2u64, 4, 8, 9, 19, 25, 27, 32, 64, 81, 128, 256]), i in 0u64..256) {
            let f = Field::of_order(q).unwrap();
            let i = i % q;
            proptest::prop_assert_eq!(f.element(i).unwrap().index(), i);
        }

        #[test]
        fn sampled_axioms(q in proptest::sample::select(vec![25u64, 27, 32, 49, 64]), a in 0u32..64, b in 0u32..64, c in 0u32..64) {
            let f = Field::of_order(q).unwrap();
            let (a, b, c) = (a % q as u32, b % q as u32, c % q as u32);
            proptest::prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
            proptest::prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
            proptest::prop_assert_eq!(f.sub(f.add(a, b), b), a);
        }
    }
}
