//! Quadratic and symplectic spaces over `F`: Hilbert symbols, the
//! invariants `(dim, disc, hasse)` of trace forms `Tr_{L/F}(c x ȳ)`, and the
//! type of `SO(V)`.
//!
//! Conventions: `disc(V) = (-1)^{dim/2} det(V)` modulo squares, so that
//! hyperbolic spaces have trivial discriminant, and
//! `hasse(⟨a_1, …, a_n⟩) = Π_{i<j} (a_i, a_j)`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::localfield::truncated::{TruncField, TruncatedElement};
use crate::localfield::{
    to_circ, LeadingTerm, LocalError, QuadStep, SquareClass, Sym, TameFieldDescriptor,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuadError {
    #[error(transparent)]
    Local(#[from] LocalError),
    #[error("factor {0} has the wrong symmetry flag for this polarity")]
    SymmetryFlagViolation(usize),
    #[error("factors live over different base fields")]
    BaseMismatch,
    #[error("Gram oracle ran out of precision at p^{0}")]
    PrecisionExhausted(u32),
}

/// `(dim, disc, hasse)` of a nondegenerate quadratic space over `F`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadInvariants {
    pub dim: usize,
    pub disc: SquareClass,
    pub hasse: i8,
}

impl fmt::Display for QuadInvariants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(dim {}, disc {}, hasse {:+})", self.dim, self.disc, self.hasse)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SOType {
    Split,
    NonsplitInner,
    QuasiSplitUnramified,
    QuasiSplitRamified,
}

impl fmt::Display for SOType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SOType::Split => "split",
            SOType::NonsplitInner => "nonsplit_inner",
            SOType::QuasiSplitUnramified => "quasi_split_unramified",
            SOType::QuasiSplitRamified => "quasi_split_ramified",
        })
    }
}

/// Tame Hilbert symbol on square classes of a field with residue order `q`.
pub fn hilbert_classes(a: SquareClass, b: SquareClass, q: u64) -> i8 {
    let mut s = 1i8;
    if a.uniformizer && b.uniformizer && (q - 1) / 2 % 2 == 1 {
        s = -s;
    }
    if b.uniformizer && a.nonsquare_unit {
        s = -s;
    }
    if a.uniformizer && b.nonsquare_unit {
        s = -s;
    }
    s
}

/// `(a, b)` for `a, b` in the field of the leading terms.
pub fn hilbert_symbol(a: &LeadingTerm, b: &LeadingTerm) -> Result<i8, QuadError> {
    if a.descriptor() != b.descriptor() {
        return Err(LocalError::FieldMismatch.into());
    }
    let q = a.field().residue().order();
    Ok(hilbert_classes(
        crate::localfield::square_class(a),
        crate::localfield::square_class(b),
        q,
    ))
}

impl QuadInvariants {
    /// Invariants of `⟨a_1, …, a_n⟩` given by square classes.
    pub fn from_diagonal(diag: &[SquareClass], q: u64) -> QuadInvariants {
        let mut det = SquareClass::ONE;
        let mut hasse = 1i8;
        for (i, &a) in diag.iter().enumerate() {
            for &b in &diag[i + 1..] {
                hasse *= hilbert_classes(a, b, q);
            }
            det = det.mul(a);
        }
        let dim = diag.len();
        let sign = if (dim / 2) % 2 == 1 {
            SquareClass::minus_one(q)
        } else {
            SquareClass::ONE
        };
        QuadInvariants {
            dim,
            disc: det.mul(sign),
            hasse,
        }
    }

    /// `det(V)` modulo squares.
    pub fn det(&self, q: u64) -> SquareClass {
        if (self.dim / 2) % 2 == 1 {
            self.disc.mul(SquareClass::minus_one(q))
        } else {
            self.disc
        }
    }

    /// The hyperbolic space of dimension `dim`.
    pub fn hyperbolic(dim: usize) -> QuadInvariants {
        QuadInvariants {
            dim,
            disc: SquareClass::ONE,
            hasse: 1,
        }
    }

    /// `V ⊥ W`: dimensions add, determinants multiply and
    /// `hasse(V ⊥ W) = hasse(V) hasse(W) (det V, det W)`.
    pub fn orthogonal_sum(&self, other: &QuadInvariants, q: u64) -> QuadInvariants {
        let (d1, d2) = (self.det(q), other.det(q));
        let det = d1.mul(d2);
        let dim = self.dim + other.dim;
        let sign = if (dim / 2) % 2 == 1 {
            SquareClass::minus_one(q)
        } else {
            SquareClass::ONE
        };
        QuadInvariants {
            dim,
            disc: det.mul(sign),
            hasse: self.hasse * other.hasse * hilbert_classes(d1, d2, q),
        }
    }
}

pub fn so_type(inv: &QuadInvariants) -> SOType {
    match (inv.disc, inv.hasse) {
        (d, 1) if d.is_one() => SOType::Split,
        (d, _) if d.is_one() => SOType::NonsplitInner,
        (d, _) if !d.uniformizer => SOType::QuasiSplitUnramified,
        _ => SOType::QuasiSplitRamified,
    }
}

pub fn witt_equal(a: &QuadInvariants, b: &QuadInvariants) -> bool {
    a == b
}

/// Dimension of the symplectic space `(L, Tr_{L/F}(c x ȳ))` for anti `c`.
pub fn symplectic_sanity(cs: &[LeadingTerm]) -> Result<usize, QuadError> {
    let mut dim = 0;
    for (i, c) in cs.iter().enumerate() {
        if c.sym() != Sym::Anti || c.check_sym().is_err() {
            return Err(QuadError::SymmetryFlagViolation(i));
        }
        dim += 2 * c.descriptor().m as usize;
    }
    Ok(dim)
}

fn check_orthogonal(cs: &[LeadingTerm]) -> Result<(u64, u32), QuadError> {
    let mut base = None;
    for (i, c) in cs.iter().enumerate() {
        let d = c.descriptor();
        if d.step.is_none() || c.sym() != Sym::Fixed || c.check_sym().is_err() {
            return Err(QuadError::SymmetryFlagViolation(i));
        }
        let b = (d.base_p, d.base_f);
        if *base.get_or_insert(b) != b {
            return Err(QuadError::BaseMismatch);
        }
    }
    Ok(base.unwrap_or((3, 1)))
}

/// Diagonal square classes over `F` of the transfer `Tr_{L°/F}⟨a⟩` for
/// `a ∈ L°` given by its leading term on `L°`.
fn transfer_diagonal(a: &LeadingTerm, q: u64) -> Vec<SquareClass> {
    let d = a.descriptor();
    let m = d.m;
    let pk = SquareClass {
        uniformizer: a.val().rem_euclid(2) == 1,
        nonsquare_unit: false,
    };
    // unit part: det of Tr(w̄ x y) is N(w̄) times disc(F_Q / F_q)
    let norm = a.residue().norm_to_subfield(d.base_f);
    let norm_nonsquare = !norm.pow((q - 1) / 2).is_one();
    let det = SquareClass {
        uniformizer: false,
        nonsquare_unit: norm_nonsquare ^ (m % 2 == 0),
    };
    let mut out = vec![pk; m as usize];
    let last = out.len() - 1;
    out[last] = pk.mul(det);
    out
}

/// Diagonal of `Tr_{L/F}(c x ȳ)` via `⟨2c, -2cd⟩` over `L°` and transfer.
pub fn transfer_form(c: &LeadingTerm) -> Result<Vec<SquareClass>, QuadError> {
    let d = c.descriptor();
    let q = d.q();
    let cc = to_circ(c)?;
    let circ = cc.field().clone();
    let two = LeadingTerm::new(&circ, 0, circ.residue().from_int(2), Sym::Fixed)?;
    let minus = LeadingTerm::new(&circ, 0, circ.residue().from_int(-1), Sym::Fixed)?;
    let dd = match d.step {
        Some(QuadStep::Unramified) => {
            LeadingTerm::new(&circ, 0, circ.u_circ().clone(), Sym::Fixed)?
        }
        Some(QuadStep::Ramified) => LeadingTerm::new(&circ, 1, circ.residue().one(), Sym::Fixed)?,
        Some(QuadStep::RamifiedTwisted) => {
            LeadingTerm::new(&circ, 1, circ.u_circ().clone(), Sym::Fixed)?
        }
        None => return Err(LocalError::NoQuadraticStep.into()),
    };
    let a1 = crate::localfield::lt_mul(&two, &cc)?;
    let a2 = crate::localfield::lt_mul(&crate::localfield::lt_mul(&a1, &minus)?, &dd)?;
    let mut out = transfer_diagonal(&a1, q);
    out.extend(transfer_diagonal(&a2, q));
    Ok(out)
}

/// Invariants of `⊕_i (L_i, Tr(c_i x ȳ))` by the transfer formulas.
pub fn invariants_transfer(cs: &[LeadingTerm]) -> Result<QuadInvariants, QuadError> {
    let (p, f) = check_orthogonal(cs)?;
    let q = p.pow(f);
    let mut diag = Vec::new();
    for c in cs {
        diag.extend(transfer_form(c)?);
    }
    Ok(QuadInvariants::from_diagonal(&diag, q))
}

/// Symmetric elimination with minimal-valuation pivots. Returns the
/// diagonal of a diagonalization.
fn diagonalize(mut mat: Vec<Vec<TruncatedElement>>) -> Result<Vec<TruncatedElement>, LocalError> {
    let mut diag = Vec::with_capacity(mat.len());
    while !mat.is_empty() {
        let n = mat.len();
        let mut best: Option<(i64, usize, usize)> = None;
        for i in 0..n {
            for j in i..n {
                if let Ok(v) = mat[i][j].circ_valuation() {
                    let better = match best {
                        None => true,
                        // diagonal wins ties
                        Some((bv, bi, bj)) => v < bv || (v == bv && i == j && bi != bj),
                    };
                    if better {
                        best = Some((v, i, j));
                    }
                }
            }
        }
        let (_, i, j) = best.ok_or(LocalError::PrecisionExhausted)?;
        if i != j {
            // e_i <- e_i + e_j
            let mii = mat[i][i].add(&mat[i][j]).add(&mat[i][j]).add(&mat[j][j]);
            for k in 0..n {
                if k != i {
                    let v = mat[i][k].add(&mat[j][k]);
                    mat[i][k] = v.clone();
                    mat[k][i] = v;
                }
            }
            mat[i][i] = mii;
        }
        let pivot = mat[i][i].clone();
        let inv = pivot.inv()?;
        let rest: Vec<usize> = (0..n).filter(|&k| k != i).collect();
        let mut next = Vec::with_capacity(n - 1);
        for &k in &rest {
            let mut row = Vec::with_capacity(n - 1);
            let factor = mat[k][i].mul(&inv);
            for &l in &rest {
                row.push(mat[k][l].sub(&factor.mul(&mat[i][l])));
            }
            next.push(row);
        }
        diag.push(pivot);
        mat = next;
    }
    Ok(diag)
}

/// Diagonal square classes of `Tr_{L/F}(c x ȳ)` computed from an explicit
/// Gram matrix at precision `p^n`.
pub fn gram_form(c: &LeadingTerm, n: u32) -> Result<Vec<SquareClass>, LocalError> {
    let desc = c.descriptor();
    let tf = TruncField::new(desc, n)?;
    let ce = TruncatedElement::from_leading(&tf, c)?;
    let mut basis = Vec::new();
    for j in 0..desc.m as usize {
        basis.push(TruncatedElement::xi_power(&tf, j));
    }
    if desc.step.is_some() {
        let t = TruncatedElement::t(&tf)?;
        for j in 0..desc.m as usize {
            basis.push(TruncatedElement::xi_power(&tf, j).mul(&t));
        }
    }
    let mat: Vec<Vec<TruncatedElement>> = basis
        .iter()
        .map(|x| {
            basis
                .iter()
                .map(|y| ce.mul(x).mul(&y.conj()).trace_to_base())
                .collect()
        })
        .collect();
    diagonalize(mat)?
        .iter()
        .map(|d| d.base_square_class())
        .collect()
}

/// A starting precision from the valuations involved.
fn start_precision(c: &LeadingTerm) -> u32 {
    let d = c.descriptor();
    let k = c.val().unsigned_abs() as u32 / d.e();
    // the determinant has valuation about m (2k + 1)
    d.m * (2 * k + 1) + 3
}

/// Invariants of `⊕_i (L_i, Tr(c_i x ȳ))` from Gram matrices. Each factor
/// starts at the given precision (or an estimate) and doubles on
/// exhaustion.
pub fn invariants_gram(cs: &[LeadingTerm], start: Option<u32>) -> Result<QuadInvariants, QuadError> {
    let (p, f) = check_orthogonal(cs)?;
    let q = p.pow(f);
    let cap = TruncField::max_precision(p);
    let mut diag = Vec::new();
    for c in cs {
        let mut n = start.unwrap_or_else(|| start_precision(c)).clamp(2, cap);
        loop {
            match gram_form(c, n) {
                Ok(d) => {
                    diag.extend(d);
                    break;
                }
                Err(LocalError::PrecisionExhausted) if n < cap => n = (2 * n).min(cap),
                Err(LocalError::PrecisionExhausted) => return Err(QuadError::PrecisionExhausted(n)),
                Err(e) => return Err(e.into()),
            }
        }
    }
    Ok(QuadInvariants::from_diagonal(&diag, q))
}

/// Decides `(a, b) = 1` by searching for a primitive solution of
/// `a x² + b y² = z²` modulo `p^3` that lifts by Hensel's lemma. Only for
/// `F = Q_p`.
pub fn hilbert_brute_force(a: &LeadingTerm, b: &LeadingTerm) -> Result<i8, QuadError> {
    let d = a.descriptor();
    if d != b.descriptor() || d != TameFieldDescriptor::base(d.base_p, 1) {
        return Err(LocalError::FieldMismatch.into());
    }
    let p = d.base_p as i64;
    let rep = |x: &LeadingTerm| -> i64 {
        let unit = x.residue().coeffs()[0] as i64;
        if x.val().rem_euclid(2) == 1 {
            unit * p
        } else {
            unit
        }
    };
    let (ai, bi) = (rep(a), rep(b));
    let p2 = p * p;
    let p3 = p2 * p;
    let val = |x: i64| -> u32 {
        let x = x.rem_euclid(p2);
        if x == 0 {
            2
        } else if x % p == 0 {
            1
        } else {
            0
        }
    };
    for x in 0..p2 {
        for y in 0..p2 {
            for z in 0..p2 {
                if x % p == 0 && y % p == 0 && z % p == 0 {
                    continue;
                }
                let s = val(2 * z).min(val(2 * ai * x)).min(val(2 * bi * y));
                let fv = (ai * x * x + bi * y * y - z * z).rem_euclid(p3);
                let ok = match s {
                    0 => fv % p == 0,
                    1 => fv == 0,
                    _ => false,
                };
                if ok {
                    return Ok(1);
                }
            }
        }
    }
    Ok(-1)
}
