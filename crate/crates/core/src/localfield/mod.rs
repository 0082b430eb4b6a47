//! Tame extensions `L / L° / F` of an unramified base `F = Q_{p^f}`.
//!
//! `L°` is unramified of degree `m` over `F`; `L / L°` is an optional
//! quadratic step, either unramified (`L = L°(√ũ)`, `ũ` the canonical unit
//! non-square) or ramified (`L = L°(Π)`, `Π² = δ p` with `δ ∈ {1, ũ}`).
//!
//! The leading-term model records an element of `L^×/(1 + 𝔪_L)` as a
//! valuation in `L`-normalized units together with its angular residue with
//! respect to the canonical uniformizer (`p` when `e = 1`, `Π` when `e = 2`).
//! For odd `p` this determines square classes and relative norm classes.

pub mod truncated;

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_rational::Rational64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::finitefield::{FieldError, FqDescriptor, FqElement, FqEmbedding};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LocalError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("operands belong to different fields")]
    FieldMismatch,
    #[error("field has no relative quadratic step")]
    NoQuadraticStep,
    #[error("residue must be a nonzero element of the residue field of L")]
    BadResidue,
    #[error("element is not in the fixed field of the relative involution")]
    NotInSubfield,
    #[error("declared symmetry flag does not match the element")]
    SymmetryFlagViolation,
    #[error("truncated arithmetic ran out of precision")]
    PrecisionExhausted,
    #[error("odd prime required, got {0}")]
    EvenPrime(u64),
}

/// The relative quadratic step `L / L°`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadStep {
    Unramified,
    /// `L = L°(√p)`.
    Ramified,
    /// `L = L°(√(ũ p))` with `ũ` the canonical non-square unit of `L°`.
    RamifiedTwisted,
}

impl QuadStep {
    pub fn is_ramified(self) -> bool {
        !matches!(self, QuadStep::Unramified)
    }
}

/// Shape of a tower `L / L° / F`. `step = None` describes `L°` itself.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TameFieldDescriptor {
    pub base_p: u64,
    pub base_f: u32,
    /// `[L° : F]`
    pub m: u32,
    pub step: Option<QuadStep>,
}

impl TameFieldDescriptor {
    pub fn base(p: u64, f: u32) -> Self {
        TameFieldDescriptor {
            base_p: p,
            base_f: f,
            m: 1,
            step: None,
        }
    }
    pub fn new(p: u64, f: u32, m: u32, step: QuadStep) -> Self {
        TameFieldDescriptor {
            base_p: p,
            base_f: f,
            m,
            step: Some(step),
        }
    }
    /// Residue degree of `L` over `F`.
    pub fn f(&self) -> u32 {
        match self.step {
            Some(QuadStep::Unramified) => 2 * self.m,
            _ => self.m,
        }
    }
    /// Ramification index of `L` over `F`.
    pub fn e(&self) -> u32 {
        match self.step {
            Some(s) if s.is_ramified() => 2,
            _ => 1,
        }
    }
    /// The descriptor of `L°` (no quadratic step).
    pub fn circ(&self) -> Self {
        TameFieldDescriptor {
            step: None,
            ..*self
        }
    }
    /// Order `q` of the residue field of `F`.
    pub fn q(&self) -> u64 {
        self.base_p.pow(self.base_f)
    }
}

impl fmt::Display for TameFieldDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q_{}^{}", self.base_p, self.base_f)?;
        if self.m > 1 {
            write!(f, "[m={}]", self.m)?;
        }
        match self.step {
            None => Ok(()),
            Some(s) => write!(f, "({:?})", s),
        }
    }
}

/// Precomputed residue data for a tower.
pub struct TameField {
    desc: TameFieldDescriptor,
    residue: FqDescriptor,
    residue_circ: FqDescriptor,
    residue_base: FqDescriptor,
    emb_circ: FqEmbedding,
    emb_base: FqEmbedding,
    /// canonical non-square of the residue field of `L°`
    u_circ: FqElement,
    /// residue of the canonical `√ũ` (unramified step only)
    sqrt_u: Option<FqElement>,
    /// residue of `δ = Π² / p` (ramified step only)
    delta: Option<FqElement>,
}

impl fmt::Debug for TameField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TameField({})", self.desc)
    }
}

impl PartialEq for TameField {
    fn eq(&self, other: &Self) -> bool {
        self.desc == other.desc
    }
}
impl Eq for TameField {}

fn field_cache() -> &'static Mutex<HashMap<TameFieldDescriptor, Arc<TameField>>> {
    static CACHE: OnceLock<Mutex<HashMap<TameFieldDescriptor, Arc<TameField>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl TameField {
    /// Builds (or fetches from the process-wide memo) the residue data of a
    /// tower.
    pub fn get(desc: TameFieldDescriptor) -> Result<Arc<TameField>, LocalError> {
        if let Some(f) = field_cache().lock().unwrap().get(&desc) {
            return Ok(f.clone());
        }
        let built = Arc::new(Self::build(desc)?);
        field_cache()
            .lock()
            .unwrap()
            .entry(desc)
            .or_insert_with(|| built.clone());
        Ok(built)
    }

    fn build(desc: TameFieldDescriptor) -> Result<TameField, LocalError> {
        if desc.base_p == 2 {
            return Err(LocalError::EvenPrime(2));
        }
        if desc.m == 0 || desc.base_f == 0 {
            return Err(FieldError::DegreeTooLarge {
                p: desc.base_p,
                f: 0,
                bound: 0,
            }
            .into());
        }
        let p = desc.base_p;
        let residue = FqDescriptor::tower(p, desc.base_f * desc.f())?;
        let residue_circ = FqDescriptor::tower(p, desc.base_f * desc.m)?;
        let residue_base = FqDescriptor::tower(p, desc.base_f)?;
        let emb_circ = FqEmbedding::new(&residue_circ, &residue)?;
        let emb_base = FqEmbedding::new(&residue_base, &residue)?;
        let u_circ = residue_circ.canonical_nonsquare();
        let (sqrt_u, delta) = match desc.step {
            Some(QuadStep::Unramified) => {
                let s = emb_circ
                    .apply(&u_circ)
                    .sqrt()
                    .expect("non-square of L° becomes a square in L");
                (Some(s), None)
            }
            Some(QuadStep::Ramified) => (None, Some(residue.one())),
            Some(QuadStep::RamifiedTwisted) => (None, Some(u_circ.clone())),
            None => (None, None),
        };
        Ok(TameField {
            desc,
            residue,
            residue_circ,
            residue_base,
            emb_circ,
            emb_base,
            u_circ,
            sqrt_u,
            delta,
        })
    }

    pub fn descriptor(&self) -> TameFieldDescriptor {
        self.desc
    }
    /// Residue field of `L`.
    pub fn residue(&self) -> &FqDescriptor {
        &self.residue
    }
    /// Residue field of `L°`.
    pub fn residue_circ(&self) -> &FqDescriptor {
        &self.residue_circ
    }
    /// Residue field of `F`.
    pub fn residue_base(&self) -> &FqDescriptor {
        &self.residue_base
    }
    pub fn embed_circ(&self, x: &FqElement) -> FqElement {
        self.emb_circ.apply(x)
    }
    pub fn embed_base(&self, x: &FqElement) -> FqElement {
        self.emb_base.apply(x)
    }
    pub fn circ_preimage(&self, x: &FqElement) -> Option<FqElement> {
        self.emb_circ.preimage(x)
    }
    pub fn base_preimage(&self, x: &FqElement) -> Option<FqElement> {
        self.emb_base.preimage(x)
    }
    /// Canonical non-square of the residue field of `L°`.
    pub fn u_circ(&self) -> &FqElement {
        &self.u_circ
    }
    pub fn sqrt_u(&self) -> Option<&FqElement> {
        self.sqrt_u.as_ref()
    }
    pub fn delta(&self) -> Option<&FqElement> {
        self.delta.as_ref()
    }
    /// `q^m`, the order of the residue field of `L°`.
    pub fn q_circ(&self) -> u64 {
        self.residue_circ.order()
    }
}

/// Declared behaviour under the relative involution `x ↦ x̄` of `L / L°`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sym {
    /// `x̄ = x`
    Fixed,
    /// `x̄ = -x`
    Anti,
    None,
}

impl Sym {
    pub fn compose(self, other: Sym) -> Sym {
        match (self, other) {
            (Sym::None, _) | (_, Sym::None) => Sym::None,
            (a, b) if a == b => Sym::Fixed,
            _ => Sym::Anti,
        }
    }
}

/// An element of `L^×/(1 + 𝔪_L)` with a declared symmetry flag.
#[derive(Clone)]
pub struct LeadingTerm {
    field: Arc<TameField>,
    val: i64,
    residue: FqElement,
    sym: Sym,
}

impl PartialEq for LeadingTerm {
    fn eq(&self, other: &Self) -> bool {
        self.field.desc == other.field.desc
            && self.val == other.val
            && self.residue == other.residue
            && self.sym == other.sym
    }
}
impl Eq for LeadingTerm {}

impl fmt::Debug for LeadingTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "LT[{} val={} res={:?} {:?}]",
            self.field.desc,
            self.val,
            self.residue.coeffs(),
            self.sym
        )
    }
}

impl LeadingTerm {
    pub fn new(
        field: &Arc<TameField>,
        val: i64,
        residue: FqElement,
        sym: Sym,
    ) -> Result<Self, LocalError> {
        if residue.field() != field.residue() || residue.is_zero() {
            return Err(LocalError::BadResidue);
        }
        Ok(LeadingTerm {
            field: field.clone(),
            val,
            residue,
            sym,
        })
    }

    pub fn one(field: &Arc<TameField>) -> Self {
        LeadingTerm {
            field: field.clone(),
            val: 0,
            residue: field.residue().one(),
            sym: Sym::Fixed,
        }
    }

    pub fn field(&self) -> &Arc<TameField> {
        &self.field
    }
    pub fn descriptor(&self) -> TameFieldDescriptor {
        self.field.desc
    }
    /// Valuation normalized so that `val_L(L^×) = Z`.
    pub fn val(&self) -> i64 {
        self.val
    }
    /// Valuation normalized on `F`, i.e. `val_L / e`.
    pub fn val_f(&self) -> Rational64 {
        Rational64::new(self.val, self.field.desc.e() as i64)
    }
    pub fn residue(&self) -> &FqElement {
        &self.residue
    }
    pub fn sym(&self) -> Sym {
        self.sym
    }
    pub fn with_sym(mut self, sym: Sym) -> Self {
        self.sym = sym;
        self
    }

    /// Same element with the flag recomputed from the leading term, where
    /// the leading term decides it.
    pub fn check_sym(&self) -> Result<(), LocalError> {
        match self.sym {
            Sym::None => Ok(()),
            s => {
                let conj = relative_conjugate(self)?;
                let expected = match s {
                    Sym::Fixed => self.residue.clone(),
                    _ => -&self.residue,
                };
                if conj.residue == expected {
                    Ok(())
                } else {
                    Err(LocalError::SymmetryFlagViolation)
                }
            }
        }
    }
}

pub fn lt_mul(a: &LeadingTerm, b: &LeadingTerm) -> Result<LeadingTerm, LocalError> {
    if a.field.desc != b.field.desc {
        return Err(LocalError::FieldMismatch);
    }
    Ok(LeadingTerm {
        field: a.field.clone(),
        val: a.val + b.val,
        residue: &a.residue * &b.residue,
        sym: a.sym.compose(b.sym),
    })
}

pub fn lt_neg(a: &LeadingTerm) -> LeadingTerm {
    LeadingTerm {
        residue: -&a.residue,
        ..a.clone()
    }
}

pub fn lt_inv(a: &LeadingTerm) -> LeadingTerm {
    LeadingTerm {
        val: -a.val,
        residue: a.residue.inv().expect("residues are nonzero"),
        ..a.clone()
    }
}

/// `x ↦ x̄` for the quadratic step of `L / L°`: Frobenius `r ↦ r^{q^m}` on
/// the residue of an unramified step; sign `(-1)^val` on a ramified one.
pub fn relative_conjugate(a: &LeadingTerm) -> Result<LeadingTerm, LocalError> {
    let residue = match a.field.desc.step {
        None => return Err(LocalError::NoQuadraticStep),
        Some(QuadStep::Unramified) => a.residue.pow(a.field.q_circ()),
        Some(_) => {
            if a.val.rem_euclid(2) == 1 {
                -&a.residue
            } else {
                a.residue.clone()
            }
        }
    };
    Ok(LeadingTerm {
        residue,
        ..a.clone()
    })
}

/// Whether `x` lies in `Nm_{L/L°}(L^×)`.
///
/// Unramified step: the `L°`-valuation is even. Ramified step with
/// `Π² = δp`: the norm group is `L°^{×2} ∪ (-δp)·L°^{×2}`, so for
/// `x = Π^{2k} r` the test is whether `(-1)^k r` is a square residue.
pub fn is_norm(x: &LeadingTerm) -> Result<bool, LocalError> {
    let step = x.field.desc.step.ok_or(LocalError::NoQuadraticStep)?;
    if x.sym == Sym::Anti {
        return Ok(false);
    }
    if relative_conjugate(x)?.residue != x.residue {
        return Ok(false);
    }
    match step {
        QuadStep::Unramified => Ok(x.val.rem_euclid(2) == 0),
        _ => {
            // fixed elements of a ramified step have even L-valuation
            let k = x.val.div_euclid(2);
            let r = if k.rem_euclid(2) == 1 {
                -&x.residue
            } else {
                x.residue.clone()
            };
            Ok(r.is_square()?)
        }
    }
}

/// Class of an element in `K^×/K^{×2}` for the field `K = L` of the
/// leading term, relative to its canonical uniformizer and non-square.
/// Serialized as one of `"1"`, `"u"`, `"pi"`, `"u*pi"`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct SquareClass {
    /// odd valuation
    pub uniformizer: bool,
    /// unit part is a non-square
    pub nonsquare_unit: bool,
}

impl SquareClass {
    pub const ONE: SquareClass = SquareClass {
        uniformizer: false,
        nonsquare_unit: false,
    };
    pub const U: SquareClass = SquareClass {
        uniformizer: false,
        nonsquare_unit: true,
    };
    pub const PI: SquareClass = SquareClass {
        uniformizer: true,
        nonsquare_unit: false,
    };
    pub const U_PI: SquareClass = SquareClass {
        uniformizer: true,
        nonsquare_unit: true,
    };
    pub const ALL: [SquareClass; 4] = [Self::ONE, Self::U, Self::PI, Self::U_PI];

    pub fn mul(self, other: SquareClass) -> SquareClass {
        SquareClass {
            uniformizer: self.uniformizer ^ other.uniformizer,
            nonsquare_unit: self.nonsquare_unit ^ other.nonsquare_unit,
        }
    }
    pub fn is_one(self) -> bool {
        self == Self::ONE
    }
    /// Class of `-1` in a field whose residue field has order `q`.
    pub fn minus_one(q: u64) -> SquareClass {
        SquareClass {
            uniformizer: false,
            nonsquare_unit: q % 4 == 3,
        }
    }
    pub fn label(self) -> &'static str {
        match (self.uniformizer, self.nonsquare_unit) {
            (false, false) => "1",
            (false, true) => "u",
            (true, false) => "pi",
            (true, true) => "u*pi",
        }
    }
}

impl From<SquareClass> for String {
    fn from(c: SquareClass) -> String {
        c.label().to_string()
    }
}

impl TryFrom<String> for SquareClass {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        SquareClass::ALL
            .into_iter()
            .find(|c| c.label() == s)
            .ok_or_else(|| format!("unknown square class {s:?}"))
    }
}

impl fmt::Display for SquareClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

pub fn square_class(x: &LeadingTerm) -> SquareClass {
    SquareClass {
        uniformizer: x.val.rem_euclid(2) == 1,
        nonsquare_unit: !x.residue.is_square().expect("residues are nonzero"),
    }
}

/// `ϖ_F = p` as an element of `L`.
pub fn base_uniformizer(field: &Arc<TameField>) -> LeadingTerm {
    match field.delta() {
        // p = Π² δ^{-1}
        Some(delta) => LeadingTerm {
            field: field.clone(),
            val: 2,
            residue: delta.inv().expect("nonzero"),
            sym: Sym::Fixed,
        },
        None => LeadingTerm {
            field: field.clone(),
            val: 1,
            residue: field.residue().one(),
            sym: Sym::Fixed,
        },
    }
}

/// The canonical trace-zero unit `τ = √ũ` of an unramified step.
pub fn canonical_tau(field: &Arc<TameField>) -> Result<LeadingTerm, LocalError> {
    let s = field.sqrt_u().ok_or(LocalError::NoQuadraticStep)?;
    Ok(LeadingTerm {
        field: field.clone(),
        val: 0,
        residue: s.clone(),
        sym: Sym::Anti,
    })
}

/// Image of an element of `F` (given on the base field) inside `L`.
pub fn embed_from_base(field: &Arc<TameField>, x: &LeadingTerm) -> Result<LeadingTerm, LocalError> {
    if x.field.desc.m != 1 || x.field.desc.step.is_some() {
        return Err(LocalError::FieldMismatch);
    }
    if (x.field.desc.base_p, x.field.desc.base_f)
        != (field.desc.base_p, field.desc.base_f)
    {
        return Err(LocalError::FieldMismatch);
    }
    // x = p^k r  ->  (ϖ in L)^k r
    let pi = base_uniformizer(field);
    let mut out = LeadingTerm {
        field: field.clone(),
        val: 0,
        residue: field.embed_base(&x.residue),
        sym: Sym::Fixed,
    };
    let pik = LeadingTerm {
        field: field.clone(),
        val: pi.val * x.val,
        residue: pi.residue.pow_signed(x.val)?,
        sym: Sym::Fixed,
    };
    out = lt_mul(&out, &pik)?;
    Ok(out.with_sym(x.sym))
}

/// A fixed element of `L`, re-expressed on `L°` (descriptor without step).
pub fn to_circ(x: &LeadingTerm) -> Result<LeadingTerm, LocalError> {
    let field = &x.field;
    let circ = TameField::get(field.desc.circ())?;
    match field.desc.step {
        None => Ok(x.clone()),
        Some(QuadStep::Unramified) => {
            let r = field
                .circ_preimage(&x.residue)
                .ok_or(LocalError::NotInSubfield)?;
            Ok(LeadingTerm {
                field: circ,
                val: x.val,
                residue: r,
                sym: Sym::Fixed,
            })
        }
        Some(_) => {
            if x.val.rem_euclid(2) != 0 {
                return Err(LocalError::NotInSubfield);
            }
            // Π^{2k} r = p^k (δ^k r)
            let k = x.val.div_euclid(2);
            let delta = field.delta().expect("ramified");
            let r = &x.residue * &delta.pow_signed(k)?;
            let r = circ.residue().from_coeffs(
                &r.coeffs().iter().map(|&c| c as i64).collect::<Vec<_>>(),
            )?;
            Ok(LeadingTerm {
                field: circ,
                val: k,
                residue: r,
                sym: Sym::Fixed,
            })
        }
    }
}

/// Inverse of [`to_circ`]: an element of `L°` viewed in `L`.
pub fn from_circ(field: &Arc<TameField>, y: &LeadingTerm) -> Result<LeadingTerm, LocalError> {
    if y.field.desc != field.desc.circ() {
        return Err(LocalError::FieldMismatch);
    }
    match field.desc.step {
        None => Ok(y.clone()),
        Some(QuadStep::Unramified) => Ok(LeadingTerm {
            field: field.clone(),
            val: y.val,
            residue: field.embed_circ(&y.residue),
            sym: Sym::Fixed,
        }),
        Some(_) => {
            let delta = field.delta().expect("ramified");
            let r = field.embed_circ(&y.residue);
            Ok(LeadingTerm {
                field: field.clone(),
                val: 2 * y.val,
                residue: &r * &delta.pow_signed(-y.val)?,
                sym: Sym::Fixed,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unram(p: u64, m: u32) -> Arc<TameField> {
        TameField::get(TameFieldDescriptor::new(p, 1, m, QuadStep::Unramified)).unwrap()
    }
    fn ram(p: u64, m: u32) -> Arc<TameField> {
        TameField::get(TameFieldDescriptor::new(p, 1, m, QuadStep::Ramified)).unwrap()
    }

    #[test]
    fn descriptor_degrees() {
        let d = TameFieldDescriptor::new(5, 1, 2, QuadStep::Unramified);
        assert_eq!((d.f(), d.e()), (4, 1));
        let d = TameFieldDescriptor::new(5, 2, 3, QuadStep::RamifiedTwisted);
        assert_eq!((d.f(), d.e()), (3, 2));
    }

    #[test]
    fn flag_algebra() {
        let l = unram(5, 1);
        let tau = canonical_tau(&l).unwrap();
        let prod = lt_mul(&tau, &tau).unwrap();
        assert_eq!(prod.val(), 0);
        assert_eq!(prod.sym(), Sym::Fixed);
        // τ² = ũ, the canonical non-square 2 of F_5
        assert_eq!(prod.residue(), &l.embed_circ(&l.residue_circ().from_int(2)));
        assert_eq!(Sym::Fixed.compose(Sym::Anti), Sym::Anti);
        assert_eq!(Sym::Anti.compose(Sym::None), Sym::None);
    }

    #[test]
    fn depth_zero_product_lands_in_circ() {
        let l = unram(5, 1);
        let c = canonical_tau(&l).unwrap();
        let tau = canonical_tau(&l).unwrap();
        let w = base_uniformizer(&l);
        let ct = lt_mul(&lt_mul(&c, &tau).unwrap(), &w).unwrap();
        assert_eq!(ct.val(), 1);
        assert_eq!(ct.sym(), Sym::Fixed);
        ct.check_sym().unwrap();
    }

    #[test]
    fn positive_depth_product() {
        let l = ram(5, 1);
        let c = LeadingTerm::new(&l, 1, l.residue().one(), Sym::Anti).unwrap();
        let gamma = LeadingTerm::new(&l, -3, l.residue().from_int(2), Sym::Anti).unwrap();
        gamma.check_sym().unwrap();
        let ct = lt_neg(&lt_mul(&c, &gamma).unwrap());
        assert_eq!(ct.val(), -2);
        assert_eq!(ct.sym(), Sym::Fixed);
        ct.check_sym().unwrap();
    }

    #[test]
    fn neg_inv_identities() {
        let l = unram(7, 2);
        let a = LeadingTerm::new(&l, 2, l.residue().element(17), Sym::None).unwrap();
        assert_eq!(lt_neg(&lt_neg(&a)), a);
        let ai = lt_inv(&a);
        assert_eq!(ai.val(), -2);
        assert_eq!(&ai.residue().clone() * a.residue(), l.residue().one());
        let one = lt_mul(&a, &ai).unwrap();
        assert_eq!((one.val(), one.residue().is_one()), (0, true));
    }

    #[test]
    fn conjugation_cases() {
        let l = unram(3, 1);
        let g = l.residue().generator();
        let a = LeadingTerm::new(&l, 0, g.clone(), Sym::None).unwrap();
        assert_eq!(relative_conjugate(&a).unwrap().residue(), &g.pow(3));
        let fixed = LeadingTerm::new(&l, 3, l.residue().from_int(2), Sym::Fixed).unwrap();
        assert_eq!(relative_conjugate(&fixed).unwrap(), fixed);
        let r = ram(5, 1);
        let pi = LeadingTerm::new(&r, 1, r.residue().one(), Sym::Anti).unwrap();
        assert_eq!(relative_conjugate(&pi).unwrap(), lt_neg(&pi));
        let base = TameField::get(TameFieldDescriptor::base(5, 1)).unwrap();
        assert_eq!(
            relative_conjugate(&LeadingTerm::one(&base)),
            Err(LocalError::NoQuadraticStep)
        );
    }

    #[test]
    fn conjugation_is_involution() {
        for field in [unram(5, 2), ram(7, 1), unram(3, 3)] {
            for i in (1..field.residue().order()).step_by(5) {
                let a = LeadingTerm::new(&field, (i % 5) as i64 - 2, field.residue().element(i), Sym::None)
                    .unwrap();
                let cc = relative_conjugate(&relative_conjugate(&a).unwrap()).unwrap();
                assert_eq!(cc, a);
            }
        }
    }

    #[test]
    fn norm_criteria() {
        let l = unram(5, 1);
        let five = base_uniformizer(&l);
        assert!(!is_norm(&five).unwrap());
        assert!(is_norm(&lt_mul(&five, &five).unwrap()).unwrap());
        let r = ram(5, 1);
        let two = LeadingTerm::new(&r, 0, r.residue().from_int(2), Sym::Fixed).unwrap();
        assert!(!is_norm(&two).unwrap());
        let four = LeadingTerm::new(&r, 0, r.residue().from_int(4), Sym::Fixed).unwrap();
        assert!(is_norm(&four).unwrap());
        // Nm(Π) = -Π² has leading term (2, -1)
        let minus_pi_sq = LeadingTerm::new(&r, 2, r.residue().from_int(-1), Sym::Fixed).unwrap();
        assert!(is_norm(&minus_pi_sq).unwrap());
    }

    #[test]
    fn square_classes() {
        let f = TameField::get(TameFieldDescriptor::base(5, 1)).unwrap();
        let lt = |v: i64, r: i64| LeadingTerm::new(&f, v, f.residue().from_int(r), Sym::Fixed).unwrap();
        assert_eq!(square_class(&lt(0, 1)), SquareClass::ONE);
        assert_eq!(square_class(&lt(0, 2)), SquareClass::U);
        assert_eq!(square_class(&lt(1, 1)), SquareClass::PI);
        assert_eq!(square_class(&lt(3, 3)), SquareClass::U_PI);
        for a in [lt(0, 2), lt(1, 3), lt(-1, 4)] {
            for b in [lt(2, 2), lt(1, 1)] {
                let ab = lt_mul(&a, &b).unwrap();
                assert_eq!(square_class(&ab), square_class(&a).mul(square_class(&b)));
            }
        }
    }

    #[test]
    fn circ_roundtrip() {
        for field in [unram(5, 2), ram(5, 1), TameField::get(TameFieldDescriptor::new(7, 1, 1, QuadStep::RamifiedTwisted)).unwrap()] {
            let circ = TameField::get(field.descriptor().circ()).unwrap();
            for i in 1..circ.residue().order().min(30) {
                let y = LeadingTerm::new(&circ, (i as i64 % 3) - 1, circ.residue().element(i), Sym::Fixed).unwrap();
                let x = from_circ(&field, &y).unwrap();
                x.check_sym().unwrap();
                assert_eq!(to_circ(&x).unwrap(), y);
            }
        }
    }

    #[test]
    fn base_embedding_of_p() {
        let base = TameField::get(TameFieldDescriptor::base(5, 1)).unwrap();
        let p = LeadingTerm::new(&base, 1, base.residue().one(), Sym::Fixed).unwrap();
        for field in [unram(5, 1), ram(5, 1)] {
            assert_eq!(embed_from_base(&field, &p).unwrap(), base_uniformizer(&field));
        }
    }
}
