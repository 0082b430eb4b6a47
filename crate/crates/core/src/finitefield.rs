//! Finite fields `F_{p^f}` for odd `p`, in the flat representation
//! `F_p[x]/(g)` where `g` is the first monic irreducible of degree `f` in
//! lexicographic coefficient order.
//!
//! Elements are indexed by the integer `sum c_j p^j` of their coefficient
//! vector; every "canonical" choice in the crate (non-squares, square roots,
//! roots used for embeddings) is the candidate with the smallest index.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use thiserror::Error;

/// Largest field order accepted by [`fq_make`].
pub const DEFAULT_FIELD_BOUND: u64 = 1_000_000;

/// Bound used internally for residue fields of extension towers. All
/// operations on those fields are polynomial in `f`, so only the modulus
/// search limits the size.
pub(crate) const TOWER_FIELD_BOUND: u64 = 1 << 40;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not an odd prime")]
    NotPrime(u64),
    #[error("field of order {p}^{f} exceeds the bound {bound}")]
    DegreeTooLarge { p: u64, f: u32, bound: u64 },
    #[error("field of order {p}^{f} is too large")]
    FieldTooLarge { p: u64, f: u32 },
    #[error("input must be nonzero")]
    ZeroInput,
    #[error("{p} divides {a}")]
    DividesInput { a: i64, p: u64 },
    #[error("operands live in different fields")]
    FieldMismatch,
    #[error("F_{{{p}^{from}}} does not embed into F_{{{p}^{to}}}")]
    NotSubfield { p: u64, from: u32, to: u32 },
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Distinct prime factors of `n`.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
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

pub(crate) fn mod_pow(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = ((r as u128 * b as u128) % m as u128) as u64;
        }
        b = ((b as u128 * b as u128) % m as u128) as u64;
        e >>= 1;
    }
    r
}

/// Dense polynomials over `F_p`, low degree first, no trailing zeros.
mod poly {
    use super::mod_pow;

    pub fn trim(a: &mut Vec<u64>) {
        while a.last() == Some(&0) {
            a.pop();
        }
    }

    pub fn sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let n = a.len().max(b.len());
        let mut out: Vec<u64> = (0..n)
            .map(|i| {
                let x = a.get(i).copied().unwrap_or(0);
                let y = b.get(i).copied().unwrap_or(0);
                (x + p - y) % p
            })
            .collect();
        trim(&mut out);
        out
    }

    pub fn mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x * y) % p;
            }
        }
        trim(&mut out);
        out
    }

    /// Remainder modulo a nonzero polynomial.
    pub fn rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
        let mut r = a.to_vec();
        trim(&mut r);
        let dm = m.len() - 1;
        let lead_inv = mod_pow(m[dm], p - 2, p);
        while r.len() > dm {
            let k = r.len() - 1 - dm;
            let c = r[r.len() - 1] * lead_inv % p;
            for (i, &mi) in m.iter().enumerate() {
                r[k + i] = (r[k + i] + p - c * mi % p) % p;
            }
            trim(&mut r);
        }
        r
    }

    pub fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let mut a = a.to_vec();
        let mut b = b.to_vec();
        trim(&mut a);
        trim(&mut b);
        while !b.is_empty() {
            let r = rem(&a, &b, p);
            a = b;
            b = r;
        }
        a
    }

    pub fn powmod(base: &[u64], mut e: u64, m: &[u64], p: u64) -> Vec<u64> {
        let mut result = vec![1u64];
        let mut b = rem(base, m, p);
        while e > 0 {
            if e & 1 == 1 {
                result = rem(&mul(&result, &b, p), m, p);
            }
            b = rem(&mul(&b, &b, p), m, p);
            e >>= 1;
        }
        result
    }

    /// `x^(p^k) mod m`, by repeated p-th powering.
    pub fn x_pow_p_k(k: u32, m: &[u64], p: u64) -> Vec<u64> {
        let mut r = rem(&[0, 1], m, p);
        for _ in 0..k {
            r = powmod(&r, p, m, p);
        }
        r
    }

    /// Rabin's irreducibility test for a monic polynomial of degree >= 1.
    pub fn is_irreducible(g: &[u64], p: u64) -> bool {
        let f = (g.len() - 1) as u32;
        if f == 1 {
            return true;
        }
        let x = vec![0u64, 1];
        if sub(&x_pow_p_k(f, g, p), &x, p) != Vec::<u64>::new() {
            return false;
        }
        for l in super::prime_factors(f as u64) {
            let h = sub(&x_pow_p_k(f / l as u32, g, p), &x, p);
            if gcd(&h, g, p).len() != 1 {
                return false;
            }
        }
        true
    }
}

struct FqInner {
    p: u64,
    f: u32,
    order: u64,
    modulus: Vec<u64>,
    primitive: Vec<u64>,
}

/// A finite field `F_{p^f}` together with its deterministic modulus.
///
/// Cloning is cheap; equality compares `(p, f)` only, which determines the
/// modulus.
#[derive(Clone)]
pub struct FqDescriptor(Arc<FqInner>);

impl PartialEq for FqDescriptor {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.p == other.0.p && self.0.f == other.0.f)
    }
}
impl Eq for FqDescriptor {}

impl fmt::Debug for FqDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{}", self.0.p, self.0.f)
    }
}

/// Builds `F_{p^f}` with the default order bound.
pub fn fq_make(p: u64, f: u32) -> Result<FqDescriptor, FieldError> {
    FqDescriptor::with_bound(p, f, DEFAULT_FIELD_BOUND)
}

impl FqDescriptor {
    pub fn with_bound(p: u64, f: u32, bound: u64) -> Result<Self, FieldError> {
        if p == 2 || !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if f == 0 {
            return Err(FieldError::DegreeTooLarge { p, f, bound });
        }
        let order = (p as u128)
            .checked_pow(f)
            .filter(|&q| q <= bound as u128)
            .ok_or(FieldError::DegreeTooLarge { p, f, bound })? as u64;
        let modulus = first_irreducible(p, f);
        let mut inner = FqInner {
            p,
            f,
            order,
            modulus,
            primitive: Vec::new(),
        };
        inner.primitive = find_primitive(&inner);
        Ok(FqDescriptor(Arc::new(inner)))
    }

    pub(crate) fn tower(p: u64, f: u32) -> Result<Self, FieldError> {
        Self::with_bound(p, f, TOWER_FIELD_BOUND).map_err(|e| match e {
            FieldError::DegreeTooLarge { p, f, .. } => FieldError::FieldTooLarge { p, f },
            other => other,
        })
    }

    pub fn p(&self) -> u64 {
        self.0.p
    }
    pub fn degree(&self) -> u32 {
        self.0.f
    }
    pub fn order(&self) -> u64 {
        self.0.order
    }
    /// Monic modulus, constant term first (length `f + 1`).
    pub fn modulus(&self) -> &[u64] {
        &self.0.modulus
    }

    pub fn zero(&self) -> FqElement {
        FqElement {
            field: self.clone(),
            coeffs: vec![0; self.0.f as usize],
        }
    }
    pub fn one(&self) -> FqElement {
        self.from_int(1)
    }
    pub fn from_int(&self, a: i64) -> FqElement {
        let p = self.0.p as i64;
        let mut coeffs = vec![0u64; self.0.f as usize];
        coeffs[0] = a.rem_euclid(p) as u64;
        FqElement {
            field: self.clone(),
            coeffs,
        }
    }
    /// Element from a coefficient vector (constant first); entries are
    /// reduced mod `p`, missing entries are zero.
    pub fn from_coeffs(&self, coeffs: &[i64]) -> Result<FqElement, FieldError> {
        if coeffs.len() > self.0.f as usize {
            return Err(FieldError::FieldMismatch);
        }
        let p = self.0.p as i64;
        let mut c = vec![0u64; self.0.f as usize];
        for (slot, &v) in c.iter_mut().zip(coeffs) {
            *slot = v.rem_euclid(p) as u64;
        }
        Ok(FqElement {
            field: self.clone(),
            coeffs: c,
        })
    }
    /// The element whose coefficient vector spells `index` in base `p`.
    pub fn element(&self, mut index: u64) -> FqElement {
        let p = self.0.p;
        let coeffs = (0..self.0.f)
            .map(|_| {
                let c = index % p;
                index /= p;
                c
            })
            .collect();
        FqElement {
            field: self.clone(),
            coeffs,
        }
    }
    /// The class of `x`; generates the field over `F_p`.
    pub fn generator(&self) -> FqElement {
        let mut e = self.zero();
        if self.0.f == 1 {
            // x = 0 modulo the degree-one modulus x
            return e;
        }
        e.coeffs[1] = 1;
        e
    }
    /// The smallest-index generator of the multiplicative group.
    pub fn primitive_element(&self) -> FqElement {
        FqElement {
            field: self.clone(),
            coeffs: self.0.primitive.clone(),
        }
    }
    pub fn elements(&self) -> impl Iterator<Item = FqElement> + '_ {
        (0..self.0.order).map(move |i| self.element(i))
    }
    /// The smallest-index non-square.
    pub fn canonical_nonsquare(&self) -> FqElement {
        (1..self.0.order)
            .map(|i| self.element(i))
            .find(|x| !x.is_square_unchecked())
            .expect("odd-order field has non-squares")
    }
}

fn first_irreducible(p: u64, f: u32) -> Vec<u64> {
    let mut i = 0u64;
    loop {
        let mut g: Vec<u64> = Vec::with_capacity(f as usize + 1);
        let mut idx = i;
        for _ in 0..f {
            g.push(idx % p);
            idx /= p;
        }
        g.push(1);
        if poly::is_irreducible(&g, p) {
            return g;
        }
        i += 1;
    }
}

fn find_primitive(inner: &FqInner) -> Vec<u64> {
    let order = inner.order;
    let factors = prime_factors(order - 1);
    let m = &inner.modulus;
    let p = inner.p;
    for i in 1..order {
        let mut idx = i;
        let cand: Vec<u64> = (0..inner.f)
            .map(|_| {
                let c = idx % p;
                idx /= p;
                c
            })
            .collect();
        let ok = factors.iter().all(|&l| {
            let r = poly::powmod(&cand, (order - 1) / l, m, p);
            r != vec![1]
        });
        if ok {
            return cand;
        }
    }
    unreachable!("multiplicative group of a finite field is cyclic")
}

/// An element of `F_{p^f}`: coefficient vector of length `f`, reduced mod `p`.
#[derive(Clone, PartialEq, Eq)]
pub struct FqElement {
    field: FqDescriptor,
    coeffs: Vec<u64>,
}

impl fmt::Debug for FqElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}{:?}", self.field, self.coeffs)
    }
}

impl FqElement {
    pub fn field(&self) -> &FqDescriptor {
        &self.field
    }
    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }
    pub fn index(&self) -> u64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0u64, |acc, &c| acc * self.field.0.p + c)
    }
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }
    pub fn is_one(&self) -> bool {
        self.coeffs[0] == 1 && self.coeffs[1..].iter().all(|&c| c == 0)
    }

    fn from_poly(field: &FqDescriptor, mut v: Vec<u64>) -> FqElement {
        v.resize(field.0.f as usize, 0);
        FqElement {
            field: field.clone(),
            coeffs: v,
        }
    }

    fn check(&self, other: &FqElement) {
        assert!(
            self.field == other.field,
            "finite field mismatch: {:?} vs {:?}",
            self.field,
            other.field
        );
    }

    pub fn pow(&self, e: u64) -> FqElement {
        let inner = &self.field.0;
        let r = poly::powmod(&self.coeffs, e, &inner.modulus, inner.p);
        Self::from_poly(&self.field, r)
    }

    /// Signed exponent; negative powers invert first.
    pub fn pow_signed(&self, e: i64) -> Result<FqElement, FieldError> {
        if e >= 0 {
            Ok(self.pow(e as u64))
        } else {
            Ok(self.inv()?.pow(e.unsigned_abs()))
        }
    }

    pub fn inv(&self) -> Result<FqElement, FieldError> {
        if self.is_zero() {
            return Err(FieldError::ZeroInput);
        }
        Ok(self.pow(self.field.0.order - 2))
    }

    /// `x^(p^k)`.
    pub fn frobenius(&self, k: u32) -> FqElement {
        let mut r = self.clone();
        for _ in 0..k {
            r = r.pow(self.field.0.p);
        }
        r
    }

    fn is_square_unchecked(&self) -> bool {
        self.is_zero() || self.pow((self.field.0.order - 1) / 2).is_one()
    }

    /// Euler's criterion.
    pub fn is_square(&self) -> Result<bool, FieldError> {
        if self.is_zero() {
            return Err(FieldError::ZeroInput);
        }
        Ok(self.is_square_unchecked())
    }

    /// Quadratic character: `+1` on nonzero squares, `-1` otherwise.
    pub fn legendre(&self) -> Result<i8, FieldError> {
        Ok(if self.is_square()? { 1 } else { -1 })
    }

    pub fn multiplicative_order(&self) -> Result<u64, FieldError> {
        if self.is_zero() {
            return Err(FieldError::ZeroInput);
        }
        let mut ord = self.field.0.order - 1;
        for l in prime_factors(ord) {
            while ord % l == 0 && self.pow(ord / l).is_one() {
                ord /= l;
            }
        }
        Ok(ord)
    }

    /// A square root, the smaller-index one of the pair `{y, -y}`.
    pub fn sqrt(&self) -> Option<FqElement> {
        if self.is_zero() {
            return Some(self.clone());
        }
        if !self.is_square_unchecked() {
            return None;
        }
        let q = self.field.0.order;
        // Tonelli-Shanks: q - 1 = 2^s * t, t odd.
        let mut s = 0u32;
        let mut t = q - 1;
        while t % 2 == 0 {
            t /= 2;
            s += 1;
        }
        let z = self.field.canonical_nonsquare();
        let mut m = s;
        let mut c = z.pow(t);
        let mut x = self.pow((t + 1) / 2);
        let mut b = self.pow(t);
        while !b.is_one() {
            let mut i = 0u32;
            let mut bb = b.clone();
            while !bb.is_one() {
                bb = &bb * &bb;
                i += 1;
            }
            let mut w = c.clone();
            for _ in 0..(m - i - 1) {
                w = &w * &w;
            }
            x = &x * &w;
            c = &w * &w;
            b = &b * &c;
            m = i;
        }
        let y = -&x;
        Some(if y.index() < x.index() { y } else { x })
    }

    /// `prod_{j < k} x^(r^j)` where `r = p^sub_degree` and `k = f / sub_degree`:
    /// the norm to the subfield of degree `sub_degree`, still expressed in
    /// this field.
    pub fn norm_to_subfield(&self, sub_degree: u32) -> FqElement {
        let f = self.field.0.f;
        assert!(sub_degree > 0 && f % sub_degree == 0);
        let mut acc = self.field.one();
        let mut conj = self.clone();
        for _ in 0..(f / sub_degree) {
            acc = &acc * &conj;
            conj = conj.frobenius(sub_degree);
        }
        acc
    }

    /// Smallest `k >= 0` with `base^k = self`, searching `k < bound`.
    pub fn discrete_log(&self, base: &FqElement, bound: u64) -> Option<u64> {
        self.check(base);
        let mut acc = self.field.one();
        for k in 0..bound {
            if acc == *self {
                return Some(k);
            }
            acc = &acc * base;
        }
        None
    }
}

impl<'a> Add<&'a FqElement> for &'a FqElement {
    type Output = FqElement;
    fn add(self, rhs: &'a FqElement) -> FqElement {
        self.check(rhs);
        let p = self.field.0.p;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&rhs.coeffs)
            .map(|(a, b)| (a + b) % p)
            .collect();
        FqElement {
            field: self.field.clone(),
            coeffs,
        }
    }
}

impl<'a> Sub<&'a FqElement> for &'a FqElement {
    type Output = FqElement;
    fn sub(self, rhs: &'a FqElement) -> FqElement {
        self.check(rhs);
        let p = self.field.0.p;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&rhs.coeffs)
            .map(|(a, b)| (a + p - b) % p)
            .collect();
        FqElement {
            field: self.field.clone(),
            coeffs,
        }
    }
}

impl<'a> Mul<&'a FqElement> for &'a FqElement {
    type Output = FqElement;
    fn mul(self, rhs: &'a FqElement) -> FqElement {
        self.check(rhs);
        let inner = &self.field.0;
        let prod = poly::mul(&self.coeffs, &rhs.coeffs, inner.p);
        FqElement::from_poly(&self.field, poly::rem(&prod, &inner.modulus, inner.p))
    }
}

impl Neg for &FqElement {
    type Output = FqElement;
    fn neg(self) -> FqElement {
        let p = self.field.0.p;
        let coeffs = self.coeffs.iter().map(|&a| (p - a) % p).collect();
        FqElement {
            field: self.field.clone(),
            coeffs,
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<FqElement> for FqElement {
            type Output = FqElement;
            fn $m(self, rhs: FqElement) -> FqElement {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a FqElement> for FqElement {
            type Output = FqElement;
            fn $m(self, rhs: &'a FqElement) -> FqElement {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for FqElement {
    type Output = FqElement;
    fn neg(self) -> FqElement {
        -&self
    }
}

/// Whether `x` is a nonzero square; `ZeroInput` on zero.
pub fn fq_is_square(x: &FqElement) -> Result<bool, FieldError> {
    x.is_square()
}

/// Generator of the kernel of the norm `F_{q^{2m}}^x -> F_{q^m}^x`, where
/// `q` is the order of `base`. The result lives in `F_{q^{2m}}` and has
/// multiplicative order `q^m + 1`.
pub fn fq_norm1_generator(base: &FqDescriptor, m: u32) -> Result<FqElement, FieldError> {
    let p = base.p();
    let f = base.degree() * 2 * m;
    let big = FqDescriptor::tower(p, f)?;
    let qm = (base.order() as u128).pow(m) as u64;
    Ok(big.primitive_element().pow(qm - 1))
}

/// Legendre symbol `(a / p)` for `p` not dividing `a`.
pub fn fq_legendre(a: i64, p: u64) -> Result<i8, FieldError> {
    if p == 2 || !is_prime(p) {
        return Err(FieldError::NotPrime(p));
    }
    let r = a.rem_euclid(p as i64) as u64;
    if r == 0 {
        return Err(FieldError::DividesInput { a, p });
    }
    Ok(if mod_pow(r, (p - 1) / 2, p) == 1 { 1 } else { -1 })
}

/// Ring embedding `F_{p^a} -> F_{p^b}` for `a | b`, determined by the image
/// of the generator `x` of the source: the smallest-index root of the
/// source modulus in the target.
#[derive(Clone, Debug)]
pub struct FqEmbedding {
    source: FqDescriptor,
    target: FqDescriptor,
    image_of_generator: FqElement,
    // images of the F_p basis 1, x, ..., x^(a-1)
    basis_images: Vec<FqElement>,
}

impl FqEmbedding {
    pub fn new(source: &FqDescriptor, target: &FqDescriptor) -> Result<Self, FieldError> {
        let (a, b) = (source.degree(), target.degree());
        if source.p() != target.p() || b % a != 0 {
            return Err(FieldError::NotSubfield {
                p: source.p(),
                from: a,
                to: b,
            });
        }
        let image = if a == b {
            target.generator()
        } else {
            // the subfield is {0} together with the powers of beta
            let beta = target
                .primitive_element()
                .pow((target.order() - 1) / (source.order() - 1));
            let modulus = source.modulus();
            let mut best: Option<FqElement> = None;
            let mut y = target.one();
            for _ in 0..(source.order() - 1) {
                if eval_poly(modulus, &y).is_zero()
                    && best.as_ref().map_or(true, |b| y.index() < b.index())
                {
                    best = Some(y.clone());
                }
                y = &y * &beta;
            }
            if a == 1 {
                // modulus x has the root 0, which beta-powers never reach
                best = Some(target.zero());
            }
            best.expect("irreducible modulus splits in the larger field")
        };
        let mut basis_images = Vec::with_capacity(a as usize);
        let mut acc = target.one();
        for _ in 0..a {
            basis_images.push(acc.clone());
            acc = &acc * &image;
        }
        Ok(FqEmbedding {
            source: source.clone(),
            target: target.clone(),
            image_of_generator: image,
            basis_images,
        })
    }

    pub fn source(&self) -> &FqDescriptor {
        &self.source
    }
    pub fn target(&self) -> &FqDescriptor {
        &self.target
    }
    pub fn image_of_generator(&self) -> &FqElement {
        &self.image_of_generator
    }

    pub fn apply(&self, x: &FqElement) -> FqElement {
        assert!(x.field == self.source, "embedding applied to foreign element");
        let p = self.target.p() as i64;
        let mut acc = self.target.zero();
        for (&c, img) in x.coeffs.iter().zip(&self.basis_images) {
            if c != 0 {
                acc = &acc + &(img * &self.target.from_int(c as i64 % p));
            }
        }
        acc
    }

    /// Inverse image, if `y` lies in the image.
    pub fn preimage(&self, y: &FqElement) -> Option<FqElement> {
        assert!(y.field == self.target, "preimage of foreign element");
        let p = self.target.p();
        let rows = self.target.degree() as usize;
        let cols = self.source.degree() as usize;
        // augmented matrix [B | y] over F_p, B's columns are basis images
        let mut mat: Vec<Vec<u64>> = (0..rows)
            .map(|r| {
                let mut row: Vec<u64> = self.basis_images.iter().map(|b| b.coeffs[r]).collect();
                row.push(y.coeffs[r]);
                row
            })
            .collect();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            let Some(pr) = (r..rows).find(|&i| mat[i][c] != 0) else {
                continue;
            };
            mat.swap(r, pr);
            let inv = mod_pow(mat[r][c], p - 2, p);
            for v in mat[r].iter_mut() {
                *v = *v * inv % p;
            }
            for i in 0..rows {
                if i != r && mat[i][c] != 0 {
                    let factor = mat[i][c];
                    for j in 0..=cols {
                        mat[i][j] = (mat[i][j] + p * p - factor * mat[r][j] % p) % p;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        if mat[r..].iter().any(|row| row[cols] != 0) {
            return None;
        }
        let mut coeffs = vec![0u64; cols];
        for (i, &c) in pivots.iter().enumerate() {
            coeffs[c] = mat[i][cols];
        }
        Some(FqElement {
            field: self.source.clone(),
            coeffs,
        })
    }
}

fn eval_poly(coeffs: &[u64], x: &FqElement) -> FqElement {
    let field = x.field();
    coeffs.iter().rev().fold(field.zero(), |acc, &c| {
        &(&acc * x) + &field.from_int(c as i64)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_modulus_is_x() {
        let f3 = fq_make(3, 1).unwrap();
        assert_eq!(f3.modulus(), &[0, 1]);
        assert_eq!(f3.order(), 3);
        assert_eq!(f3.from_int(5), f3.from_int(2));
    }

    #[test]
    fn f9_group_order_and_modulus() {
        let f9 = fq_make(3, 2).unwrap();
        // x^2 + 1 is the first monic irreducible quadratic over F_3
        assert_eq!(f9.modulus(), &[1, 0, 1]);
        assert_eq!(f9.primitive_element().multiplicative_order().unwrap(), 8);
    }

    #[test]
    fn f25_primitive_order_by_enumeration() {
        let f25 = fq_make(5, 2).unwrap();
        let g = f25.primitive_element();
        let mut seen = std::collections::BTreeSet::new();
        let mut acc = f25.one();
        for _ in 0..24 {
            seen.insert(acc.index());
            acc = &acc * &g;
        }
        assert!(acc.is_one());
        assert_eq!(seen.len(), 24);
    }

    #[test]
    fn make_rejects_bad_input() {
        assert_eq!(fq_make(9, 1).unwrap_err(), FieldError::NotPrime(9));
        assert_eq!(fq_make(2, 3).unwrap_err(), FieldError::NotPrime(2));
        assert!(matches!(
            fq_make(7, 8),
            Err(FieldError::DegreeTooLarge { .. })
        ));
    }

    #[test]
    fn squares_small_fields() {
        let f5 = fq_make(5, 1).unwrap();
        assert!(fq_is_square(&f5.one()).unwrap());
        assert!(!fq_is_square(&f5.from_int(2)).unwrap());
        assert!(fq_is_square(&f5.from_int(-1)).unwrap());
        assert_eq!(fq_is_square(&f5.zero()), Err(FieldError::ZeroInput));
        let f9 = fq_make(3, 2).unwrap();
        assert!(fq_is_square(&f9.one()).unwrap());
        // F_3 sits inside the squares of F_9
        assert!(fq_is_square(&f9.from_int(-1)).unwrap());
    }

    #[test]
    fn legendre_values() {
        assert_eq!(fq_legendre(1, 7).unwrap(), 1);
        assert_eq!(fq_legendre(2, 5).unwrap(), -1);
        assert_eq!(fq_legendre(-1, 5).unwrap(), 1);
        assert_eq!(fq_legendre(-1, 7).unwrap(), -1);
        assert!(matches!(
            fq_legendre(10, 5),
            Err(FieldError::DividesInput { .. })
        ));
    }

    #[test]
    fn norm_one_generators() {
        let f3 = fq_make(3, 1).unwrap();
        let g = fq_norm1_generator(&f3, 1).unwrap();
        assert_eq!(g.multiplicative_order().unwrap(), 4);
        let f5 = fq_make(5, 1).unwrap();
        assert_eq!(
            fq_norm1_generator(&f5, 1)
                .unwrap()
                .multiplicative_order()
                .unwrap(),
            6
        );
        let g = fq_norm1_generator(&f3, 2).unwrap();
        assert_eq!(g.multiplicative_order().unwrap(), 10);
        // norm to F_9 is g * g^9
        assert!((&g * &g.pow(9)).is_one());
        // and the kernel of the norm in F_81 has exactly 10 elements
        let f81 = g.field().clone();
        let kernel = f81
            .elements()
            .filter(|x| !x.is_zero() && x.norm_to_subfield(2).is_one())
            .count();
        assert_eq!(kernel, 10);
    }

    #[test]
    fn sqrt_roundtrip() {
        let f = fq_make(7, 3).unwrap();
        for x in f.elements().skip(1).step_by(7) {
            match x.sqrt() {
                Some(y) => assert_eq!(&y * &y, x),
                None => assert!(!x.is_square().unwrap()),
            }
        }
    }

    #[test]
    fn embedding_is_ring_map_and_commutes_with_frobenius() {
        let small = fq_make(3, 2).unwrap();
        let big = fq_make(3, 4).unwrap();
        let e = FqEmbedding::new(&small, &big).unwrap();
        for x in small.elements() {
            for y in small.elements().step_by(2) {
                assert_eq!(e.apply(&(&x + &y)), &e.apply(&x) + &e.apply(&y));
                assert_eq!(e.apply(&(&x * &y)), &e.apply(&x) * &e.apply(&y));
            }
            assert_eq!(e.apply(&x.frobenius(1)), e.apply(&x).frobenius(1));
            assert_eq!(e.preimage(&e.apply(&x)), Some(x.clone()));
        }
        // outside the image
        assert!(e.preimage(&big.generator()).is_none());
        assert!(FqEmbedding::new(&big, &small).is_err());
    }

    #[test]
    fn prime_field_embeds_everywhere() {
        let f5 = fq_make(5, 1).unwrap();
        let f125 = fq_make(5, 3).unwrap();
        let e = FqEmbedding::new(&f5, &f125).unwrap();
        assert_eq!(e.apply(&f5.from_int(3)), f125.from_int(3));
    }
}
