//! Truncated arithmetic in `L = L°[t]/(t² - d)` where `L°` is modelled by
//! the Galois ring `GR(p^N, f·m)`.
//!
//! The Galois ring uses the monic lift of the same irreducible polynomial
//! that defines the residue field of `L°`, so reduction mod `p` is literally
//! the coefficient vector of the residue. `d` is the lift of `ũ` for an
//! unramified step and `δ p` for a ramified one.
//!
//! An element is `p^shift · (a + b t)` with `a, b` known modulo `p^rel`.
//! Every operation propagates precision pessimistically, and a result whose
//! leading term is lost reports [`LocalError::PrecisionExhausted`].

use std::fmt;
use std::sync::Arc;

use super::{LeadingTerm, LocalError, QuadStep, Sym, TameField, TameFieldDescriptor};
use crate::finitefield::FqElement;

/// `L` at absolute precision `p^n`.
pub struct TruncField {
    desc: TameFieldDescriptor,
    lt: Arc<TameField>,
    p: u64,
    n: u32,
    pn: u64,
    deg: usize,
    modulus: Vec<u64>,
    /// `t² = d`
    d: Vec<u64>,
    /// images of `1, ξ, ..., ξ^{deg-1}` under the lifted `p`-Frobenius
    frob_basis: Vec<Vec<u64>>,
}

impl fmt::Debug for TruncField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TruncField({}, p^{})", self.desc, self.n)
    }
}

fn pow_u64(p: u64, k: u32) -> Option<u64> {
    p.checked_pow(k)
}

impl TruncField {
    /// Largest precision exponent representable for `p`.
    pub fn max_precision(p: u64) -> u32 {
        let mut n = 0;
        while pow_u64(p, n + 1).map_or(false, |v| v < (1u64 << 62)) {
            n += 1;
        }
        n
    }

    pub fn new(desc: TameFieldDescriptor, n: u32) -> Result<Arc<TruncField>, LocalError> {
        let lt = TameField::get(desc)?;
        let p = desc.base_p;
        if n == 0 || n > Self::max_precision(p) {
            return Err(LocalError::PrecisionExhausted);
        }
        let pn = p.pow(n);
        let residue = lt.residue_circ().clone();
        let deg = residue.degree() as usize;
        let modulus = residue.modulus().to_vec();
        let mut field = TruncField {
            desc,
            lt: lt.clone(),
            p,
            n,
            pn,
            deg,
            modulus,
            d: Vec::new(),
            frob_basis: Vec::new(),
        };
        let lift_res = |x: &FqElement| -> Vec<u64> { x.coeffs().to_vec() };
        field.d = match desc.step {
            None => field.zero_vec(),
            Some(QuadStep::Unramified) => lift_res(lt.u_circ()),
            Some(QuadStep::Ramified) => field.scalar(p),
            Some(QuadStep::RamifiedTwisted) => {
                let u = lift_res(lt.u_circ());
                field.mul_vec(&u, &field.scalar(p))
            }
        };
        // Frob(ξ): the root of the modulus congruent to ξ^p, by Newton
        let xi_p = residue.generator().pow(p);
        let mut y = lift_res(&xi_p);
        let dmod: Vec<u64> = (1..field.modulus.len())
            .map(|i| field.modulus[i] * i as u64 % pn)
            .collect();
        for _ in 0..(2 * n + 4) {
            let gy = field.eval_poly(&field.modulus, &y);
            if gy.iter().all(|&c| c == 0) {
                break;
            }
            let dgy = field.eval_poly(&dmod, &y);
            let step = field.mul_vec(&gy, &field.unit_inverse(&dgy)?);
            y = field.sub_vec(&y, &step);
        }
        let mut basis = Vec::with_capacity(deg);
        let mut acc = field.scalar(1);
        for _ in 0..deg {
            basis.push(acc.clone());
            acc = field.mul_vec(&acc, &y);
        }
        field.frob_basis = basis;
        Ok(Arc::new(field))
    }

    pub fn descriptor(&self) -> TameFieldDescriptor {
        self.desc
    }
    pub fn leading_field(&self) -> &Arc<TameField> {
        &self.lt
    }
    pub fn precision(&self) -> u32 {
        self.n
    }
    /// `[L° : Q_p]`
    pub fn circ_degree(&self) -> usize {
        self.deg
    }

    fn zero_vec(&self) -> Vec<u64> {
        vec![0; self.deg]
    }
    fn scalar(&self, c: u64) -> Vec<u64> {
        let mut v = self.zero_vec();
        v[0] = c % self.pn;
        v
    }
    fn add_vec(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter().zip(b).map(|(&x, &y)| (x + y) % self.pn).collect()
    }
    fn sub_vec(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| (x + self.pn - y) % self.pn)
            .collect()
    }
    fn scale_vec(&self, a: &[u64], c: u64) -> Vec<u64> {
        let c = (c % self.pn) as u128;
        a.iter()
            .map(|&x| ((x as u128 * c) % self.pn as u128) as u64)
            .collect()
    }
    fn mul_vec(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let pn = self.pn as u128;
        let deg = self.deg;
        let mut prod = vec![0u128; 2 * deg - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x as u128 * y as u128) % pn;
            }
        }
        for k in (deg..prod.len()).rev() {
            let c = prod[k];
            if c == 0 {
                continue;
            }
            prod[k] = 0;
            for i in 0..deg {
                let sub = c * self.modulus[i] as u128 % pn;
                prod[k - deg + i] = (prod[k - deg + i] + pn - sub) % pn;
            }
        }
        prod.truncate(deg);
        prod.into_iter().map(|v| v as u64).collect()
    }
    fn eval_poly(&self, coeffs: &[u64], y: &[u64]) -> Vec<u64> {
        let mut acc = self.zero_vec();
        for &c in coeffs.iter().rev() {
            acc = self.add_vec(&self.mul_vec(&acc, y), &self.scalar(c));
        }
        acc
    }
    fn residue_of(&self, a: &[u64]) -> FqElement {
        let c: Vec<i64> = a.iter().map(|&x| (x % self.p) as i64).collect();
        self.lt
            .residue_circ()
            .from_coeffs(&c)
            .expect("length matches degree")
    }
    fn unit_inverse(&self, a: &[u64]) -> Result<Vec<u64>, LocalError> {
        let r = self.residue_of(a);
        let r_inv = r.inv().map_err(|_| LocalError::PrecisionExhausted)?;
        let mut y: Vec<u64> = r_inv.coeffs().to_vec();
        let two = self.scalar(2);
        let mut prec = 1u32;
        while prec < self.n {
            let ay = self.mul_vec(a, &y);
            y = self.mul_vec(&y, &self.sub_vec(&two, &ay));
            prec *= 2;
        }
        Ok(y)
    }
    fn frobenius_p(&self, a: &[u64]) -> Vec<u64> {
        let mut acc = self.zero_vec();
        for (&c, img) in a.iter().zip(&self.frob_basis) {
            if c != 0 {
                acc = self.add_vec(&acc, &self.scale_vec(img, c));
            }
        }
        acc
    }
    fn vp(&self, a: &[u64], rel: u32) -> u32 {
        let mut k = 0;
        let mut div = 1u64;
        while k < rel {
            let next = div * self.p;
            if a.iter().all(|&x| x % next == 0) {
                k += 1;
                div = next;
            } else {
                break;
            }
        }
        k
    }
    fn reduce(&self, a: &[u64], rel: u32) -> Vec<u64> {
        let m = self.p.pow(rel);
        a.iter().map(|&x| x % m).collect()
    }
    fn div_p(&self, a: &[u64], k: u32) -> Vec<u64> {
        let m = self.p.pow(k);
        a.iter().map(|&x| x / m).collect()
    }
    fn times_p(&self, a: &[u64], k: u32) -> Vec<u64> {
        match pow_u64(self.p, k) {
            Some(m) if m < self.pn => self.scale_vec(a, m),
            _ => self.zero_vec(),
        }
    }
}

/// `p^shift (a + b t)` with `a, b` known modulo `p^rel`.
#[derive(Clone)]
pub struct TruncatedElement {
    field: Arc<TruncField>,
    shift: i64,
    a: Vec<u64>,
    b: Vec<u64>,
    rel: u32,
}

impl fmt::Debug for TruncatedElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "p^{}({:?} + {:?} t) mod p^{}",
            self.shift, self.a, self.b, self.rel
        )
    }
}

impl TruncatedElement {
    fn build(field: &Arc<TruncField>, shift: i64, a: Vec<u64>, b: Vec<u64>, rel: u32) -> Self {
        let mut x = TruncatedElement {
            field: field.clone(),
            shift,
            a: field.reduce(&a, rel),
            b: field.reduce(&b, rel),
            rel,
        };
        x.normalize();
        x
    }

    fn normalize(&mut self) {
        let f = &self.field;
        let k = f.vp(&self.a, self.rel).min(f.vp(&self.b, self.rel));
        if k >= self.rel {
            self.shift += self.rel as i64;
            self.rel = 0;
            self.a = f.zero_vec();
            self.b = f.zero_vec();
        } else if k > 0 {
            self.a = f.div_p(&self.a, k);
            self.b = f.div_p(&self.b, k);
            self.shift += k as i64;
            self.rel -= k;
        }
    }

    pub fn field(&self) -> &Arc<TruncField> {
        &self.field
    }

    /// Integer `c ∈ Z` embedded in `L`.
    pub fn from_int(field: &Arc<TruncField>, c: i64) -> Self {
        let pn = field.pn as i128;
        let v = (c as i128).rem_euclid(pn) as u64;
        Self::build(field, 0, field.scalar(v), field.zero_vec(), field.n)
    }

    /// `ξ^j` for the generator `ξ` of `L°` over `Q_p`.
    pub fn xi_power(field: &Arc<TruncField>, j: usize) -> Self {
        let mut v = field.scalar(1);
        let mut xi = field.zero_vec();
        if field.deg > 1 {
            xi[1] = 1;
        } else {
            // modulus x: ξ = 0
        }
        for _ in 0..j {
            v = field.mul_vec(&v, &xi);
        }
        Self::build(field, 0, v, field.zero_vec(), field.n)
    }

    /// The element `t` with `t² = d`.
    pub fn t(field: &Arc<TruncField>) -> Result<Self, LocalError> {
        if field.desc.step.is_none() {
            return Err(LocalError::NoQuadraticStep);
        }
        Ok(Self::build(
            field,
            0,
            field.zero_vec(),
            field.scalar(1),
            field.n,
        ))
    }

    /// Valuation of `p^shift` part plus precision.
    pub fn absolute_precision(&self) -> i64 {
        self.shift + self.rel as i64
    }
    pub fn is_zero_at_precision(&self) -> bool {
        self.rel == 0
    }
    pub fn is_in_circ(&self) -> bool {
        self.b.iter().all(|&x| x == 0)
    }

    /// Valuation normalized on `L` (so `val_L(Π) = 1` in the ramified case).
    pub fn valuation_l(&self) -> Result<i64, LocalError> {
        if self.rel == 0 {
            return Err(LocalError::PrecisionExhausted);
        }
        let f = &self.field;
        let va = f.vp(&self.a, self.rel);
        let vb = f.vp(&self.b, self.rel);
        let e = f.desc.e() as i64;
        let from_a = if va < self.rel { Some(e * (self.shift + va as i64)) } else { None };
        let from_b = if vb < self.rel {
            Some(e * (self.shift + vb as i64) + if e == 2 { 1 } else { 0 })
        } else {
            None
        };
        Ok(match (from_a, from_b) {
            (Some(x), Some(y)) => x.min(y),
            (Some(x), None) | (None, Some(x)) => x,
            _ => unreachable!(),
        })
    }

    /// `p`-adic valuation of an element of `L°`.
    pub fn circ_valuation(&self) -> Result<i64, LocalError> {
        if !self.is_in_circ() {
            return Err(LocalError::NotInSubfield);
        }
        if self.rel == 0 {
            return Err(LocalError::PrecisionExhausted);
        }
        Ok(self.shift + self.field.vp(&self.a, self.rel) as i64)
    }

    /// Square class in `F^×/F^{×2}` of an element lying in `F`.
    pub fn base_square_class(&self) -> Result<super::SquareClass, LocalError> {
        let v = self.circ_valuation()?;
        let f = &self.field;
        let r = f.residue_of(&f.div_p(&self.a, (v - self.shift) as u32));
        let q = f.desc.q();
        if !r.pow(q - 1).is_one() {
            return Err(LocalError::NotInSubfield);
        }
        Ok(super::SquareClass {
            uniformizer: v.rem_euclid(2) == 1,
            nonsquare_unit: !r.pow((q - 1) / 2).is_one(),
        })
    }

    pub fn add(&self, other: &Self) -> Self {
        let f = &self.field;
        let s = self.shift.min(other.shift);
        let abs = self.absolute_precision().min(other.absolute_precision());
        let rel = (abs - s).clamp(0, f.n as i64) as u32;
        let lift = |x: &Self, v: &[u64]| f.times_p(v, (x.shift - s) as u32);
        let a = f.add_vec(&lift(self, &self.a), &lift(other, &other.a));
        let b = f.add_vec(&lift(self, &self.b), &lift(other, &other.b));
        Self::build(f, s, a, b, rel)
    }

    pub fn neg(&self) -> Self {
        let f = &self.field;
        Self::build(
            f,
            self.shift,
            f.sub_vec(&f.zero_vec(), &self.a),
            f.sub_vec(&f.zero_vec(), &self.b),
            self.rel,
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let f = &self.field;
        let rel = self.rel.min(other.rel);
        let aa = f.mul_vec(&self.a, &other.a);
        let bb = f.mul_vec(&f.mul_vec(&self.b, &other.b), &f.d);
        let ab = f.add_vec(&f.mul_vec(&self.a, &other.b), &f.mul_vec(&self.b, &other.a));
        Self::build(f, self.shift + other.shift, f.add_vec(&aa, &bb), ab, rel)
    }

    /// Multiplication by `p^k`.
    pub fn mul_p_power(&self, k: i64) -> Self {
        Self {
            shift: self.shift + k,
            ..self.clone()
        }
    }

    /// `a + b t ↦ a - b t`.
    pub fn conj(&self) -> Self {
        let f = &self.field;
        Self::build(
            f,
            self.shift,
            self.a.clone(),
            f.sub_vec(&f.zero_vec(), &self.b),
            self.rel,
        )
    }

    /// `Nm_{L/L°}`.
    pub fn norm(&self) -> Self {
        self.mul(&self.conj())
    }

    /// `Tr_{L/L°}`.
    pub fn trace_rel(&self) -> Self {
        let f = &self.field;
        Self::build(f, self.shift, f.scale_vec(&self.a, 2), f.zero_vec(), self.rel)
    }

    /// `Tr_{L/F} = Σ_j φ^j ∘ Tr_{L/L°}` with `φ` the `q`-Frobenius.
    pub fn trace_to_base(&self) -> Self {
        let f = &self.field;
        let mut x = f.scale_vec(&self.a, 2);
        let mut acc = f.zero_vec();
        for _ in 0..f.desc.m {
            acc = f.add_vec(&acc, &x);
            for _ in 0..f.desc.base_f {
                x = f.frobenius_p(&x);
            }
        }
        Self::build(f, self.shift, acc, f.zero_vec(), self.rel)
    }

    /// `φ^j` applied to an element of `L°`.
    pub fn frobenius_q(&self, j: u32) -> Self {
        let f = &self.field;
        let mut x = self.a.clone();
        for _ in 0..(j * f.desc.base_f) {
            x = f.frobenius_p(&x);
        }
        Self::build(f, self.shift, x, self.b.clone(), self.rel)
    }

    pub fn inv(&self) -> Result<Self, LocalError> {
        if self.rel == 0 {
            return Err(LocalError::PrecisionExhausted);
        }
        let f = &self.field;
        if self.is_in_circ() {
            // normalized, so `a` is a unit
            let ai = f.unit_inverse(&self.a)?;
            return Ok(Self::build(f, -self.shift, ai, f.zero_vec(), self.rel));
        }
        let nm = self.norm();
        let ni = nm.inv()?;
        Ok(self.conj().mul(&ni))
    }

    /// Leading term in `L^×/(1 + 𝔪_L)`, with the flag supplied by the caller.
    pub fn leading_term(&self, sym: Sym) -> Result<LeadingTerm, LocalError> {
        let val = self.valuation_l()?;
        let f = &self.field;
        let lt = &f.lt;
        let e = f.desc.e() as i64;
        let residue = match f.desc.step {
            None => f.residue_of(&f.div_p(&self.a, (val - self.shift) as u32)),
            Some(QuadStep::Unramified) => {
                let k = (val - self.shift) as u32;
                let pick = |v: &[u64]| {
                    if f.vp(v, self.rel) == k {
                        lt.embed_circ(&f.residue_of(&f.div_p(v, k)))
                    } else {
                        lt.residue().zero()
                    }
                };
                let sqrt_u = lt.sqrt_u().expect("unramified step");
                &pick(&self.a) + &(&pick(&self.b) * sqrt_u)
            }
            Some(_) => {
                let k = val.div_euclid(e);
                let part = if val % 2 == 0 { &self.a } else { &self.b };
                let r = f.residue_of(&f.div_p(part, (k - self.shift) as u32));
                let delta = lt.delta().expect("ramified");
                // x = (δ p)^k · r' · (1 or Π)  =>  r = r' δ^{-k}
                &lt.embed_circ(&r) * &delta.pow_signed(-k)?
            }
        };
        LeadingTerm::new(lt, val, residue, sym)
    }

    /// A symmetric lift of a leading term: fixed terms lift into `L°`, anti
    /// terms into `L° · t`.
    pub fn from_leading(field: &Arc<TruncField>, x: &LeadingTerm) -> Result<Self, LocalError> {
        let lt = &field.lt;
        if x.descriptor() != field.desc {
            return Err(LocalError::FieldMismatch);
        }
        let lift = |r: &FqElement| r.coeffs().to_vec();
        let n = field.n;
        match field.desc.step {
            None => Ok(Self::build(
                field,
                x.val(),
                lift(x.residue()),
                field.zero_vec(),
                n,
            )),
            Some(QuadStep::Unramified) => {
                let r = x.residue();
                let rq = r.pow(lt.q_circ());
                let two_inv = lt.residue().from_int(2).inv()?;
                let alpha = &(r + &rq) * &two_inv;
                let sqrt_u = lt.sqrt_u().expect("unramified step");
                let beta = &(&(r - &rq) * &two_inv) * &sqrt_u.inv()?;
                let alpha = lt.circ_preimage(&alpha).ok_or(LocalError::NotInSubfield)?;
                let beta = lt.circ_preimage(&beta).ok_or(LocalError::NotInSubfield)?;
                Ok(Self::build(field, x.val(), lift(&alpha), lift(&beta), n))
            }
            Some(_) => {
                let k = x.val().div_euclid(2);
                let delta = lt.delta().expect("ramified");
                let r = x.residue() * &delta.pow_signed(k)?;
                let r = lt.circ_preimage(&r).ok_or(LocalError::NotInSubfield)?;
                // (δ p)^k = p^k δ^k exactly, up to a unit ≡ 1 modulo p
                let a_unit = lift(&r);
                if x.val().rem_euclid(2) == 0 {
                    Ok(Self::build(field, k, a_unit, field.zero_vec(), n))
                } else {
                    Ok(Self::build(field, k, field.zero_vec(), a_unit, n))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localfield::{is_norm, lt_mul};

    fn field(p: u64, f: u32, m: u32, step: QuadStep, n: u32) -> Arc<TruncField> {
        TruncField::new(TameFieldDescriptor::new(p, f, m, step), n).unwrap()
    }

    #[test]
    fn t_squares_to_d() {
        let l = field(5, 1, 1, QuadStep::Ramified, 6);
        let t = TruncatedElement::t(&l).unwrap();
        let t2 = t.mul(&t);
        assert_eq!(t2.valuation_l().unwrap(), 2);
        let five = TruncatedElement::from_int(&l, 5);
        assert!(t2.sub(&five).is_zero_at_precision());
    }

    #[test]
    fn inverse_roundtrip() {
        for l in [
            field(5, 1, 2, QuadStep::Unramified, 8),
            field(7, 1, 1, QuadStep::RamifiedTwisted, 8),
            field(3, 2, 2, QuadStep::Ramified, 10),
        ] {
            let t = TruncatedElement::t(&l).unwrap();
            let xi = TruncatedElement::xi_power(&l, 1);
            let x = TruncatedElement::from_int(&l, 3)
                .mul_p_power(1)
                .add(&t.mul(&xi.add(&TruncatedElement::from_int(&l, 2))));
            let y = x.inv().unwrap();
            let one = x.mul(&y).sub(&TruncatedElement::from_int(&l, 1));
            assert!(one.valuation_l().map_or(true, |v| v >= 4), "{:?}", one);
        }
    }

    #[test]
    fn frobenius_fixes_base_and_has_order_m() {
        let l = field(5, 1, 3, QuadStep::Unramified, 6);
        let xi = TruncatedElement::xi_power(&l, 1);
        let back = xi.frobenius_q(3);
        assert!(back.sub(&xi).is_zero_at_precision());
        assert!(!xi.frobenius_q(1).sub(&xi).is_zero_at_precision());
        let tr = xi.trace_to_base();
        assert!(tr.frobenius_q(1).sub(&tr).is_zero_at_precision());
    }

    #[test]
    fn leading_term_roundtrip() {
        for l in [
            field(5, 1, 1, QuadStep::Unramified, 5),
            field(5, 1, 2, QuadStep::Ramified, 5),
            field(3, 1, 1, QuadStep::RamifiedTwisted, 5),
        ] {
            let lf = l.leading_field().clone();
            for i in 1..lf.residue().order().min(40) {
                for val in -2..3 {
                    let r = lf.residue().element(i);
                    let x = LeadingTerm::new(&lf, val, r, Sym::None).unwrap();
                    let y = TruncatedElement::from_leading(&l, &x).unwrap();
                    assert_eq!(y.leading_term(Sym::None).unwrap(), x);
                }
            }
        }
    }

    #[test]
    fn leading_terms_are_multiplicative() {
        let l = field(7, 1, 2, QuadStep::Unramified, 5);
        let lf = l.leading_field().clone();
        let x = LeadingTerm::new(&lf, 1, lf.residue().element(100), Sym::None).unwrap();
        let y = LeadingTerm::new(&lf, -1, lf.residue().element(1234), Sym::None).unwrap();
        let xy = TruncatedElement::from_leading(&l, &x)
            .unwrap()
            .mul(&TruncatedElement::from_leading(&l, &y).unwrap());
        assert_eq!(xy.leading_term(Sym::None).unwrap(), lt_mul(&x, &y).unwrap());
    }

    #[test]
    fn is_norm_matches_enumeration() {
        for (p, step) in [
            (3, QuadStep::Unramified),
            (5, QuadStep::Ramified),
            (7, QuadStep::RamifiedTwisted),
            (5, QuadStep::Unramified),
        ] {
            let l = field(p, 1, 1, step, 2);
            let lf = l.leading_field().clone();
            let mut hit = std::collections::HashSet::new();
            let p2 = (p * p) as i64;
            let t = TruncatedElement::t(&l).unwrap();
            for a in 0..p2 {
                for b in 0..p2 {
                    let y = TruncatedElement::from_int(&l, a)
                        .add(&t.mul(&TruncatedElement::from_int(&l, b)));
                    if let Ok(lt) = y.norm().leading_term(Sym::Fixed) {
                        if lt.val() <= 2 {
                            hit.insert((lt.val(), lt.residue().index()));
                        }
                    }
                }
            }
            let vals: Vec<i64> = if step.is_ramified() { vec![0, 2] } else { vec![0, 1] };
            for v in vals {
                for r in lf.residue().elements().skip(1) {
                    let x = LeadingTerm::new(&lf, v, r.clone(), Sym::Fixed).unwrap();
                    if x.check_sym().is_err() {
                        continue;
                    }
                    assert_eq!(
                        is_norm(&x).unwrap(),
                        hit.contains(&(v, r.index())),
                        "p={p} {step:?} v={v} r={r:?}"
                    );
                }
            }
        }
    }
}
