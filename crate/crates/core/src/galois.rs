//! Arithmetic in `GF(p^n)` and Singer difference sets.
//!
//! Elements use the polynomial basis over `GF(p)`, coefficients stored
//! lowest degree first. Polynomials and elements are ordered by their
//! integer encoding `sum_i c_i p^i`; the modulus and the primitive element
//! are the smallest admissible ones in that order, so every field and every
//! difference set built here is reproducible bit for bit.
//!
//! `GF(q^3)` for `q = p^m` is realized directly as `GF(p^{3m})`; the trace
//! down to `GF(q)` is `x + x^q + x^{q^2}`.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Largest field order accepted.
pub const FIELD_ORDER_CAP: u64 = 1 << 20;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Distinct prime factors, increasing.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
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

/// `q = p^m` with `p` prime, if it is a prime power.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    let factors = prime_factors(q);
    if factors.len() != 1 {
        return None;
    }
    let p = factors[0];
    let mut m = 0;
    let mut r = q;
    while r > 1 {
        r /= p;
        m += 1;
    }
    Some((p, m))
}

fn checked_pow(p: u64, n: usize) -> Option<u64> {
    let mut acc: u64 = 1;
    for _ in 0..n {
        acc = acc.checked_mul(p)?;
    }
    Some(acc)
}

/// Base-`p` digits of `idx`, lowest first, padded to `len`.
fn digits(mut idx: u64, p: u64, len: usize) -> Vec<u64> {
    let mut out = vec![0; len];
    for c in out.iter_mut() {
        *c = idx % p;
        idx /= p;
    }
    out
}

/// Remainder of `a` modulo the monic polynomial `b`.
fn poly_rem_monic(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    while r.len() > db {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - db;
        if lead != 0 {
            for (i, &bc) in b.iter().enumerate() {
                let idx = shift + i;
                r[idx] = (r[idx] + p - (lead * bc) % p) % p;
            }
        }
        r.pop();
    }
    r
}

fn is_irreducible(f: &[u64], p: u64) -> bool {
    let n = f.len() - 1;
    for d in 1..=n / 2 {
        let count = checked_pow(p, d).expect("degree bounded by field cap");
        for idx in 0..count {
            let mut g = digits(idx, p, d);
            g.push(1);
            if poly_rem_monic(f, &g, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GaloisField {
    p: u64,
    n: usize,
    /// Monic, `n + 1` coefficients lowest degree first.
    modulus: Vec<u64>,
    order: u64,
}

/// `GF(p^n)` with the smallest monic irreducible modulus of degree `n`.
pub fn field_new(p: u64, n: usize) -> Result<GaloisField> {
    GaloisField::new(p, n)
}

impl GaloisField {
    pub fn new(p: u64, n: usize) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if n == 0 {
            return Err(invalid("extension degree must be positive"));
        }
        let order = checked_pow(p, n)
            .filter(|&o| o <= FIELD_ORDER_CAP)
            .ok_or(Error::FieldTooLarge {
                order: checked_pow(p, n).unwrap_or(u64::MAX),
                cap: FIELD_ORDER_CAP,
            })?;
        let modulus = (0..order)
            .map(|idx| {
                let mut f = digits(idx, p, n);
                f.push(1);
                f
            })
            .find(|f| is_irreducible(f, p))
            .ok_or_else(|| Error::Internal(format!("no irreducible polynomial of degree {n} over GF({p})")))?;
        Ok(Self {
            p,
            n,
            modulus,
            order,
        })
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn element(&self, coeffs: &[u64]) -> FieldElement<'_> {
        let raw: Vec<u64> = coeffs.iter().map(|x| x % self.p).collect();
        let mut reduced = if raw.len() > self.n {
            poly_rem_monic(&raw, &self.modulus, self.p)
        } else {
            raw
        };
        reduced.resize(self.n, 0);
        FieldElement {
            field: self,
            coeffs: reduced,
        }
    }

    /// Element with integer encoding `idx < order`.
    pub fn from_index(&self, idx: u64) -> FieldElement<'_> {
        assert!(idx < self.order, "index {idx} outside GF({})", self.order);
        FieldElement {
            field: self,
            coeffs: digits(idx, self.p, self.n),
        }
    }

    pub fn zero(&self) -> FieldElement<'_> {
        self.from_index(0)
    }

    pub fn one(&self) -> FieldElement<'_> {
        self.from_index(1)
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElement<'_>> + '_ {
        (0..self.order).map(move |i| self.from_index(i))
    }

    /// Smallest element (by encoding) of multiplicative order `p^n - 1`.
    pub fn primitive_element(&self) -> FieldElement<'_> {
        let group = self.order - 1;
        let factors = prime_factors(group);
        (1..self.order)
            .map(|i| self.from_index(i))
            .find(|g| factors.iter().all(|&r| !g.pow(group / r).is_one()))
            .expect("the multiplicative group of a finite field is cyclic")
    }

    /// `x + x^q + x^{q^2}` for `q^3 = p^n`.
    pub fn trace_to_subfield<'f>(&'f self, x: &FieldElement<'f>, q: u64) -> Result<FieldElement<'f>> {
        if !self.n.is_multiple_of(3) {
            return Err(invalid(format!("degree {} is not divisible by 3", self.n)));
        }
        if checked_pow(self.p, self.n / 3) != Some(q) {
            return Err(invalid(format!("q = {q} is not p^(n/3) for GF({}^{})", self.p, self.n)));
        }
        let xq = x.pow(q);
        let xq2 = xq.pow(q);
        let tr = x + &xq + xq2;
        if tr.pow(q) != tr {
            return Err(Error::Internal("trace left the subfield".into()));
        }
        Ok(tr)
    }

    fn mul_coeffs(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let p = self.p;
        let mut prod = vec![0u64; 2 * self.n - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % p;
            }
        }
        let mut r = poly_rem_monic(&prod, &self.modulus, p);
        r.resize(self.n, 0);
        r
    }
}

pub fn primitive_element(field: &GaloisField) -> FieldElement<'_> {
    field.primitive_element()
}

pub fn trace_map<'f>(field: &'f GaloisField, x: &FieldElement<'f>, q: u64) -> Result<FieldElement<'f>> {
    field.trace_to_subfield(x, q)
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FieldElement<'f> {
    field: &'f GaloisField,
    coeffs: Vec<u64>,
}

impl fmt::Debug for FieldElement<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldElement({:?} in GF({}))", self.coeffs, self.field.order)
    }
}

impl<'f> FieldElement<'f> {
    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn index(&self) -> u64 {
        self.coeffs.iter().rev().fold(0, |acc, &c| acc * self.field.p + c)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0] == 1 && self.coeffs[1..].iter().all(|&c| c == 0)
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = self.field.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// `x -> x^p`.
    pub fn frobenius(&self) -> Self {
        self.pow(self.field.p)
    }

    pub fn inverse(&self) -> Option<Self> {
        (!self.is_zero()).then(|| self.pow(self.field.order - 2))
    }

    /// Multiplicative order of a nonzero element.
    pub fn multiplicative_order(&self) -> Option<u64> {
        if self.is_zero() {
            return None;
        }
        let mut order = self.field.order - 1;
        for r in prime_factors(order) {
            while order.is_multiple_of(r) && self.pow(order / r).is_one() {
                order /= r;
            }
        }
        Some(order)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(u64, u64) -> u64) -> Self {
        debug_assert!(std::ptr::eq(self.field, other.field) || self.field == other.field);
        Self {
            field: self.field,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| f(a, b)).collect(),
        }
    }
}

impl<'f> Add for &FieldElement<'f> {
    type Output = FieldElement<'f>;
    fn add(self, rhs: Self) -> FieldElement<'f> {
        let p = self.field.p;
        self.zip_with(rhs, |a, b| (a + b) % p)
    }
}

impl<'f> Sub for &FieldElement<'f> {
    type Output = FieldElement<'f>;
    fn sub(self, rhs: Self) -> FieldElement<'f> {
        let p = self.field.p;
        self.zip_with(rhs, |a, b| (a + p - b) % p)
    }
}

impl<'f> Mul for &FieldElement<'f> {
    type Output = FieldElement<'f>;
    fn mul(self, rhs: Self) -> FieldElement<'f> {
        FieldElement {
            field: self.field,
            coeffs: self.field.mul_coeffs(&self.coeffs, &rhs.coeffs),
        }
    }
}

impl<'f> Neg for &FieldElement<'f> {
    type Output = FieldElement<'f>;
    fn neg(self) -> FieldElement<'f> {
        let p = self.field.p;
        FieldElement {
            field: self.field,
            coeffs: self.coeffs.iter().map(|&a| (p - a) % p).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl<'f> $tr for FieldElement<'f> {
            type Output = FieldElement<'f>;
            fn $m(self, rhs: Self) -> FieldElement<'f> {
                (&self).$m(&rhs)
            }
        }
        impl<'a, 'f> $tr<&'a FieldElement<'f>> for FieldElement<'f> {
            type Output = FieldElement<'f>;
            fn $m(self, rhs: &'a FieldElement<'f>) -> FieldElement<'f> {
                (&self).$m(rhs)
            }
        }
        impl<'a, 'f> $tr<FieldElement<'f>> for &'a FieldElement<'f> {
            type Output = FieldElement<'f>;
            fn $m(self, rhs: FieldElement<'f>) -> FieldElement<'f> {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// A planar `(N, M, 1)` cyclic difference set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DifferenceSet {
    modulus: u64,
    elements: Vec<u64>,
}

impl DifferenceSet {
    /// Validates that every nonzero residue is exactly one ordered
    /// difference of elements.
    pub fn new(modulus: u64, elements: impl IntoIterator<Item = u64>) -> Result<Self> {
        let set: BTreeSet<u64> = elements.into_iter().map(|e| e % modulus).collect();
        let ds = Self {
            modulus,
            elements: set.into_iter().collect(),
        };
        if !ds.has_unique_differences() {
            return Err(invalid(format!("{:?} is not a ({}, {}, 1) difference set", ds.elements, modulus, ds.elements.len())));
        }
        Ok(ds)
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn size(&self) -> usize {
        self.elements.len()
    }

    pub fn lambda(&self) -> u64 {
        1
    }

    fn has_unique_differences(&self) -> bool {
        let n = self.modulus;
        let mut hits = vec![0u32; n as usize];
        for &a in &self.elements {
            for &b in &self.elements {
                if a != b {
                    hits[((a + n - b) % n) as usize] += 1;
                }
            }
        }
        hits[1..].iter().all(|&h| h == 1)
    }
}

/// The `(q^2 + q + 1, q + 1, 1)` Singer difference set
/// `{t in Z_N : Tr(alpha^t) = 0}`.
pub fn singer_difference_set(q: u64) -> Result<DifferenceSet> {
    let (p, m) = prime_power(q).ok_or(Error::NotPrimePower(q))?;
    let field = GaloisField::new(p, 3 * m as usize)?;
    let alpha = field.primitive_element();
    let n = q * q + q + 1;
    // Tr(alpha^{t+N}) = alpha^N Tr(alpha^t) with alpha^N in GF(q)^*, so the
    // zero set is N-periodic; the full exponent range collapses onto Z_N.
    let mut zeros = BTreeSet::new();
    let mut power = field.one();
    for t in 0..field.order() - 1 {
        if field.trace_to_subfield(&power, q)?.is_zero() {
            zeros.insert(t % n);
        }
        power = &power * &alpha;
    }
    if zeros.len() as u64 != q + 1 {
        return Err(Error::Internal(format!(
            "trace zero set has {} residues, expected {}",
            zeros.len(),
            q + 1
        )));
    }
    DifferenceSet::new(n, zeros).map_err(|e| Error::Internal(e.to_string()))
}
