//! Arithmetic in GF(p^m) and dense linear algebra over it.
//!
//! Elements are stored as packed integers `Σ c_i p^i` of their polynomial-basis
//! coefficient vector, so `0` is zero and `1` is one in every field. The
//! [`Gf`] handle owns exponent/logarithm and Zech-logarithm tables that are
//! derived from the polynomial arithmetic at construction; the raw `u32`
//! methods on [`Gf`] are the hot path used by the matrix code. [`FieldElement`]
//! is the checked, field-tagged variant.

mod matrix;
mod subspace;

pub use matrix::Matrix;
pub use subspace::{kernel, random_invertible_in, solve_combination, subspace_intersect, Subspace};

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::LabRng;

/// Largest field order supported.
pub const MAX_ORDER: u64 = 1 << 16;

/// Number of random trials `random_invertible_in` uses by default.
pub const DEFAULT_INVERTIBLE_BUDGET: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("characteristic {0} is not prime")]
    NotPrime(u32),
    #[error("field order {0} is out of range (2 <= q <= 65536)")]
    OrderOutOfRange(u64),
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("reduction polynomial must be monic of degree {degree} with coefficients below {p}")]
    BadReduction { p: u32, degree: u32 },
    #[error("reduction polynomial is reducible over GF({0})")]
    Reducible(u32),
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands belong to different fields")]
    FieldMismatch,
    #[error("value {value:#x} is not an element of a field of order {q}")]
    ElementOutOfRange { value: u64, q: u32 },
    #[error("invalid element encoding {0:?}")]
    BadEncoding(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is singular")]
    Singular,
    #[error("subspace is zero")]
    ZeroSubspace,
    #[error("no invertible element found in {0} trials")]
    BudgetExhausted(usize),
}

/// Description of GF(p^m): characteristic, degree and reduction polynomial.
///
/// `reduction` lists coefficients `c_0..c_m` (lowest degree first) and is
/// monic. It is carried in every serialized artifact so transcripts do not
/// depend on a conventional choice of polynomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u32,
    pub m: u32,
    pub reduction: Vec<u32>,
}

impl FieldSpec {
    /// Validates primality, monicity and irreducibility.
    pub fn new(p: u32, m: u32, reduction: Vec<u32>) -> Result<Self, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        let q = (p as u64).checked_pow(m).unwrap_or(u64::MAX);
        if m == 0 || !(2..=MAX_ORDER).contains(&q) {
            return Err(FieldError::OrderOutOfRange(q));
        }
        if reduction.len() != m as usize + 1 || reduction[m as usize] != 1 || reduction.iter().any(|&c| c >= p) {
            return Err(FieldError::BadReduction { p, degree: m });
        }
        if !is_irreducible(&reduction, p) {
            return Err(FieldError::Reducible(p));
        }
        Ok(FieldSpec { p, m, reduction })
    }

    /// The lab's default field of order `q`.
    ///
    /// GF(2^8) uses x^8+x^4+x^3+x+1, GF(2^5) uses x^5+x^2+1 and GF(2^3) uses
    /// x^3+x+1; every other order takes the lexicographically smallest monic
    /// irreducible polynomial.
    pub fn for_order(q: u64) -> Result<Self, FieldError> {
        if !(2..=MAX_ORDER).contains(&q) {
            return Err(FieldError::OrderOutOfRange(q));
        }
        let (p, m) = prime_power(q).ok_or(FieldError::NotPrimePower(q))?;
        let reduction = match (p, m) {
            (2, 8) => vec![1, 1, 0, 1, 1, 0, 0, 0, 1],
            (2, 5) => vec![1, 0, 1, 0, 0, 1],
            (2, 3) => vec![1, 1, 0, 1],
            (_, 1) => vec![0, 1],
            _ => smallest_irreducible(p, m),
        };
        FieldSpec::new(p, m, reduction)
    }

    pub fn order(&self) -> u32 {
        self.p.pow(self.m)
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.m == 1 {
            write!(f, "GF({})", self.p)
        } else {
            write!(f, "GF({}^{})", self.p, self.m)
        }
    }
}

const NO_LOG: u32 = u32::MAX;

struct GfInner {
    spec: FieldSpec,
    q: u32,
    /// `exp[k] = g^k` for `k < 2(q-1)`, doubled to skip a reduction in `mul`.
    exp: Vec<u32>,
    log: Vec<u32>,
    /// `zech[n] = log(1 + g^n)`, or `NO_LOG` when `1 + g^n = 0`.
    zech: Vec<u32>,
    hex_width: usize,
}

/// Shared handle to a constructed field and its tables.
#[derive(Clone)]
pub struct Gf(Arc<GfInner>);

impl fmt::Debug for Gf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gf({})", self.0.spec)
    }
}

impl PartialEq for Gf {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.spec == other.0.spec
    }
}

impl Eq for Gf {}

impl Gf {
    pub fn new(spec: FieldSpec) -> Self {
        let p = spec.p;
        let q = spec.order();
        let n = (q - 1) as usize;
        let mut exp = vec![0u32; 2 * n.max(1)];
        let mut log = vec![NO_LOG; q as usize];

        // search for a generator of the multiplicative group
        let generator = (1..q)
            .find(|&g| {
                let mut x = 1u32;
                for (k, slot) in exp.iter_mut().take(n).enumerate() {
                    if k > 0 && x == 1 {
                        return false;
                    }
                    *slot = x;
                    x = poly_mulmod(x, g, &spec);
                }
                x == 1
            })
            .expect("a finite field always has a primitive element");
        debug_assert!(generator < q);
        for k in 0..n {
            exp[n + k] = exp[k];
            log[exp[k] as usize] = k as u32;
        }

        let mut zech = vec![NO_LOG; n.max(1)];
        for (k, z) in zech.iter_mut().enumerate().take(n) {
            let s = add_digits(exp[k], 1, p, q);
            if s != 0 {
                *z = log[s as usize];
            }
        }

        let mut hex_width = 1;
        while (q as u64 - 1) >> (4 * hex_width) != 0 {
            hex_width += 1;
        }
        Gf(Arc::new(GfInner { spec, q, exp, log, zech, hex_width }))
    }

    pub fn for_order(q: u64) -> Result<Self, FieldError> {
        Ok(Gf::new(FieldSpec::for_order(q)?))
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.0.spec
    }

    pub fn order(&self) -> u32 {
        self.0.q
    }

    pub fn characteristic(&self) -> u32 {
        self.0.spec.p
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        let inner = &*self.0;
        if inner.spec.p == 2 {
            return a ^ b;
        }
        if a == 0 {
            return b;
        }
        if b == 0 {
            return a;
        }
        let n = inner.q - 1;
        let la = inner.log[a as usize];
        let lb = inner.log[b as usize];
        let d = if lb >= la { lb - la } else { lb + n - la };
        match inner.zech[d as usize] {
            NO_LOG => 0,
            z => inner.exp[(la + z) as usize],
        }
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        let inner = &*self.0;
        if inner.spec.p == 2 || a == 0 {
            return a;
        }
        // -1 = g^((q-1)/2) in odd characteristic
        inner.exp[(inner.log[a as usize] + (inner.q - 1) / 2) as usize]
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        let inner = &*self.0;
        inner.exp[(inner.log[a as usize] + inner.log[b as usize]) as usize]
    }

    /// Multiplicative inverse.
    ///
    /// # Panics
    /// If `a == 0`; use [`Gf::try_inv`] for a checked version.
    #[inline]
    pub fn inv(&self, a: u32) -> u32 {
        assert!(a != 0, "inverse of zero");
        let inner = &*self.0;
        let n = inner.q - 1;
        inner.exp[((n - inner.log[a as usize]) % n) as usize]
    }

    pub fn try_inv(&self, a: u32) -> Result<u32, FieldError> {
        if a == 0 {
            Err(FieldError::DivisionByZero)
        } else {
            Ok(self.inv(a))
        }
    }

    pub fn div(&self, a: u32, b: u32) -> Result<u32, FieldError> {
        Ok(self.mul(a, self.try_inv(b)?))
    }

    pub fn pow(&self, a: u32, e: u64) -> u32 {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let n = (self.0.q - 1) as u64;
        let l = (self.0.log[a as usize] as u64 * (e % n)) % n;
        self.0.exp[l as usize]
    }

    pub fn contains(&self, v: u32) -> bool {
        v < self.0.q
    }

    pub fn random(&self, rng: &mut LabRng) -> u32 {
        rng.below(self.0.q as u64) as u32
    }

    pub fn random_nonzero(&self, rng: &mut LabRng) -> u32 {
        1 + rng.below(self.0.q as u64 - 1) as u32
    }

    /// Coefficients `c_0..c_{m-1}` of the polynomial-basis representation.
    pub fn coefficients(&self, v: u32) -> Vec<u32> {
        unpack(v, self.0.spec.p, self.0.spec.m)
    }

    pub fn from_coefficients(&self, coeffs: &[u32]) -> Result<u32, FieldError> {
        let spec = &self.0.spec;
        if coeffs.len() != spec.m as usize || coeffs.iter().any(|&c| c >= spec.p) {
            return Err(FieldError::BadEncoding(format!("{coeffs:?}")));
        }
        Ok(pack(coeffs, spec.p))
    }

    /// Lowercase hex of the packed coefficient vector (`c_0` least significant),
    /// zero-padded to the width of `q - 1`.
    pub fn to_hex(&self, v: u32) -> String {
        format!("{:0width$x}", v, width = self.0.hex_width)
    }

    pub fn parse_hex(&self, s: &str) -> Result<u32, FieldError> {
        if s.is_empty() || s.len() > 8 || !s.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b)) {
            return Err(FieldError::BadEncoding(s.to_string()));
        }
        let v = u32::from_str_radix(s, 16).map_err(|_| FieldError::BadEncoding(s.to_string()))?;
        if v >= self.0.q {
            return Err(FieldError::ElementOutOfRange { value: v as u64, q: self.0.q });
        }
        Ok(v)
    }

    pub fn element(&self, value: u32) -> Result<FieldElement, FieldError> {
        if !self.contains(value) {
            return Err(FieldError::ElementOutOfRange { value: value as u64, q: self.0.q });
        }
        Ok(FieldElement { field: self.clone(), value })
    }
}

/// A field element tagged with its field; arithmetic checks that operands agree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldElement {
    field: Gf,
    value: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl FieldElement {
    pub fn field(&self) -> &Gf {
        &self.field
    }

    pub fn value(&self) -> u32 {
        self.value
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    pub fn apply(&self, op: ArithOp, rhs: &FieldElement) -> Result<FieldElement, FieldError> {
        if self.field != rhs.field {
            return Err(FieldError::FieldMismatch);
        }
        let f = &self.field;
        let (a, b) = (self.value, rhs.value);
        let value = match op {
            ArithOp::Add => f.add(a, b),
            ArithOp::Sub => f.sub(a, b),
            ArithOp::Mul => f.mul(a, b),
            ArithOp::Div => f.div(a, b)?,
        };
        Ok(FieldElement { field: self.field.clone(), value })
    }

    pub fn inverse(&self) -> Result<FieldElement, FieldError> {
        Ok(FieldElement { field: self.field.clone(), value: self.field.try_inv(self.value)? })
    }

    pub fn to_hex(&self) -> String {
        self.field.to_hex(self.value)
    }
}

/// `field_arith`: one checked binary operation.
pub fn field_arith(a: &FieldElement, b: &FieldElement, op: ArithOp) -> Result<FieldElement, FieldError> {
    a.apply(op, b)
}

// --- polynomial helpers over GF(p), used only while building tables ---

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_power(q: u64) -> Option<(u32, u32)> {
    let mut p = 2u64;
    while p * p <= q && !q.is_multiple_of(p) {
        p += 1;
    }
    if !q.is_multiple_of(p) {
        p = q;
    }
    let (mut r, mut m) = (q, 0u32);
    while r % p == 0 {
        r /= p;
        m += 1;
    }
    (r == 1).then_some((p as u32, m))
}

fn unpack(mut v: u32, p: u32, m: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(m as usize);
    for _ in 0..m {
        out.push(v % p);
        v /= p;
    }
    out
}

fn pack(coeffs: &[u32], p: u32) -> u32 {
    coeffs.iter().rev().fold(0, |acc, &c| acc * p + c)
}

fn add_digits(a: u32, b: u32, p: u32, q: u32) -> u32 {
    if p == 2 {
        return a ^ b;
    }
    let m = q.ilog(p);
    let (da, db) = (unpack(a, p, m), unpack(b, p, m));
    let sum: Vec<u32> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
    pack(&sum, p)
}

/// Product of two packed elements modulo the reduction polynomial.
fn poly_mulmod(a: u32, b: u32, spec: &FieldSpec) -> u32 {
    let (p, m) = (spec.p as u64, spec.m as usize);
    let da = unpack(a, spec.p, spec.m);
    let db = unpack(b, spec.p, spec.m);
    let mut prod = vec![0u64; 2 * m];
    for (i, &x) in da.iter().enumerate() {
        for (j, &y) in db.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p;
        }
    }
    let red: Vec<u64> = spec.reduction.iter().map(|&c| c as u64).collect();
    for deg in (m..2 * m).rev() {
        let lead = prod[deg];
        if lead == 0 {
            continue;
        }
        // subtract lead * x^(deg-m) * reduction; reduction is monic
        for (k, &c) in red.iter().enumerate() {
            let idx = deg - m + k;
            prod[idx] = (prod[idx] + (p - lead) * c) % p;
        }
    }
    let low: Vec<u32> = prod[..m].iter().map(|&c| c as u32).collect();
    pack(&low, spec.p)
}

/// Remainder of `a` modulo a monic `d` over GF(p); coefficients lowest first.
fn poly_rem(a: &[u32], d: &[u32], p: u32) -> Vec<u32> {
    let mut r: Vec<u64> = a.iter().map(|&c| c as u64).collect();
    let dd = d.len() - 1;
    let p64 = p as u64;
    while r.len() > dd {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - dd;
        if lead != 0 {
            for (k, &c) in d.iter().enumerate() {
                r[shift + k] = (r[shift + k] + (p64 - lead) * c as u64) % p64;
            }
        }
        r.pop();
    }
    r.into_iter().map(|c| c as u32).collect()
}

/// Trial division by every monic polynomial of degree `1..=m/2`.
fn is_irreducible(f: &[u32], p: u32) -> bool {
    let m = f.len() - 1;
    for d in 1..=m / 2 {
        let count = (p as u64).pow(d as u32);
        for low in 0..count {
            let mut divisor = unpack(low as u32, p, d as u32);
            divisor.push(1);
            if poly_rem(f, &divisor, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

fn smallest_irreducible(p: u32, m: u32) -> Vec<u32> {
    let count = (p as u64).pow(m);
    (0..count)
        .map(|low| {
            let mut f = unpack(low as u32, p, m);
            f.push(1);
            f
        })
        .find(|f| is_irreducible(f, p))
        .expect("irreducible polynomials exist in every degree")
}
