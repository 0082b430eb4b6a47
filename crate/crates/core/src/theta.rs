//! The parameter-level theta lift from `Sp(W)` to `O(V)` with `dim V = dim W`,
//! the parity prediction of the target space, and distinction transport for
//! an unramified quadratic `E/F`.

use std::sync::Arc;

use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::finitefield::{FqElement, FqEmbedding};
use crate::localfield::{
    base_uniformizer, canonical_tau, lt_mul, lt_neg, LeadingTerm, LocalError, QuadStep, SquareClass, Sym,
    TameField, TameFieldDescriptor,
};
use crate::quadform::{self, so_type, QuadError, QuadInvariants, SOType};
use crate::torusdata::{
    block_decompose, datum_equivalent, is_general_position, residue_reduction, validate,
    EquivalenceMode, Factor, GammaLevel, Polarity, TorusDatum, TorusError, ValidationReport,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ThetaError {
    #[error(transparent)]
    Local(#[from] LocalError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Torus(#[from] TorusError),
    #[error("expected a symplectic datum")]
    NotSymplectic,
    #[error("datum is not of depth zero")]
    NotDepthZero,
    #[error("depth-zero character is not in general position")]
    NotGeneralPosition,
    #[error("factors do not share a single positive depth")]
    NotSingleBlock,
    #[error("invalid datum: {0:?}")]
    Invalid(ValidationReport),
    #[error("invalid distinction witness: {0}")]
    InvalidWitness(String),
    #[error("witness is not distinguished")]
    NotDistinguished,
    #[error("sigma(c_theta) != -c_theta on factor {0}")]
    SymmetryAssertionFailed(usize),
}

/// How the trace-zero units `τ_i` and the uniformizer `ϖ` are chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "seed")]
pub enum TauChoice {
    /// `τ_i = √ũ_i`, `ϖ = p`
    #[default]
    Canonical,
    /// `τ_i = √ũ_i · a_i`, `ϖ = p · b` with random units `a_i ∈ L_i°`, `b ∈ F`
    Seeded(u64),
}

/// Record of the choices used by a lift, enough to replay it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChoiceRecord {
    pub tau: TauChoice,
    /// residue coefficients of each `τ_i`, absent for positive-depth factors
    pub tau_residues: Vec<Option<Vec<u64>>>,
    /// residue coefficients of the unit `ϖ / p`
    pub varpi_unit: Vec<u64>,
    /// residue coefficients of `ι`, in distinction mode
    pub iota: Option<Vec<u64>>,
}

#[derive(Clone, Debug)]
pub struct ThetaResult {
    pub lifted: TorusDatum,
    pub target_invariants: QuadInvariants,
    pub predicted_invariants: QuadInvariants,
    pub so_type: SOType,
    pub choices: ChoiceRecord,
}

impl ThetaResult {
    pub fn consistent(&self) -> bool {
        self.target_invariants == self.predicted_invariants
    }
}

fn require_symplectic(datum: &TorusDatum) -> Result<(), ThetaError> {
    if datum.polarity != Polarity::Symplectic {
        return Err(ThetaError::NotSymplectic);
    }
    let rep = validate(datum);
    if !rep.is_valid() {
        return Err(ThetaError::Invalid(rep));
    }
    Ok(())
}

fn invert_chars(f: &Factor) -> (i64, Vec<GammaLevel>) {
    let chi = (-f.chi0).rem_euclid(f.chi_modulus());
    let gammas = f
        .gamma_levels
        .iter()
        .map(|g| GammaLevel {
            r: g.r,
            gamma: lt_neg(&g.gamma),
        })
        .collect();
    (chi, gammas)
}

/// The Remark table, with the two disc-1 rows as they follow from the
/// anisotropic kernel `(r odd ? ϖN : 0) ⊥ (s odd ? N : 0)`.
pub fn parity_table(dim: usize, r: usize, s: usize) -> QuadInvariants {
    let disc = if (r + s) % 2 == 0 { SquareClass::ONE } else { SquareClass::U };
    let hasse = if r % 2 == 1 { -1 } else { 1 };
    QuadInvariants { dim, disc, hasse }
}

/// The table exactly as printed, whose first two rows are exchanged.
pub fn parity_table_as_printed(dim: usize, r: usize, s: usize) -> QuadInvariants {
    let (disc, hasse) = match (r % 2, s % 2) {
        (1, 1) => (SquareClass::ONE, 1),
        (0, 0) => (SquareClass::ONE, -1),
        (0, 1) => (SquareClass::U, 1),
        _ => (SquareClass::U, -1),
    };
    QuadInvariants { dim, disc, hasse }
}

fn parity_counts(datum: &TorusDatum) -> Result<(usize, usize), ThetaError> {
    let (i1, i2) = residue_reduction(datum).map_err(|_| ThetaError::NotDepthZero)?;
    Ok((i1.ms.len(), i2.ms.len()))
}

/// Predicted `(invariants, SO type)` of the lifted space of a depth-zero
/// symplectic datum from `r = |I₁|` and `s = |I₂|`.
pub fn parity_predict(datum: &TorusDatum) -> Result<(QuadInvariants, SOType), ThetaError> {
    let (r, s) = parity_counts(datum)?;
    let inv = parity_table(2 * datum.n() as usize, r, s);
    Ok((inv, so_type(&inv)))
}

pub fn parity_predict_as_printed(datum: &TorusDatum) -> Result<(QuadInvariants, SOType), ThetaError> {
    let (r, s) = parity_counts(datum)?;
    let inv = parity_table_as_printed(2 * datum.n() as usize, r, s);
    Ok((inv, so_type(&inv)))
}

/// Unit multipliers for `τ_i` (per factor) and `ϖ`.
struct Multipliers {
    tau: Vec<FqElement>,
    varpi: FqElement,
}

fn multipliers(datum: &TorusDatum, choice: TauChoice) -> Result<Multipliers, ThetaError> {
    let base = TameField::get(datum.base)?;
    let mut rng = match choice {
        TauChoice::Canonical => None,
        TauChoice::Seeded(s) => Some(ChaCha8Rng::seed_from_u64(s)),
    };
    let mut pick = |field: &crate::finitefield::FqDescriptor| match rng.as_mut() {
        None => field.one(),
        Some(r) => field.element(r.gen_range(1..field.order())),
    };
    let mut tau = Vec::new();
    for f in &datum.factors {
        let l = TameField::get(f.tower())?;
        tau.push(pick(l.residue_circ()));
    }
    let varpi = pick(base.residue());
    Ok(Multipliers { tau, varpi })
}

fn depth_zero_factor(
    f: &Factor,
    tau_unit: &FqElement,
    varpi_unit: &FqElement,
) -> Result<(Factor, Vec<u64>), ThetaError> {
    let l = TameField::get(f.tower())?;
    let a = LeadingTerm::new(&l, 0, l.embed_circ(tau_unit), Sym::Fixed)?;
    let tau = lt_mul(&canonical_tau(&l)?, &a)?;
    let b = LeadingTerm::new(&l, 0, l.embed_base(varpi_unit), Sym::Fixed)?;
    let varpi = lt_mul(&base_uniformizer(&l), &b)?;
    let c_theta = lt_mul(&lt_mul(&f.c, &tau)?, &varpi)?;
    let (chi, gammas) = invert_chars(f);
    Ok((Factor::new(c_theta, chi, gammas), tau.residue().coeffs().to_vec()))
}

fn finish(
    lifted: TorusDatum,
    predicted: QuadInvariants,
    choices: ChoiceRecord,
) -> Result<ThetaResult, ThetaError> {
    let target = quadform::invariants_transfer(&lifted.cs())?;
    Ok(ThetaResult {
        so_type: so_type(&target),
        lifted,
        target_invariants: target,
        predicted_invariants: predicted,
        choices,
    })
}

/// `(L, L°, c, χ) ↦ (L, L°, c τ ϖ, χ^{-1})`.
pub fn lift_depth_zero(datum: &TorusDatum, choice: TauChoice) -> Result<ThetaResult, ThetaError> {
    if !datum.is_depth_zero() {
        return Err(ThetaError::NotDepthZero);
    }
    if datum.polarity != Polarity::Symplectic {
        return Err(ThetaError::NotSymplectic);
    }
    let (fd1, fd2) = residue_reduction(datum).map_err(|_| ThetaError::NotDepthZero)?;
    if !is_general_position(&fd1, &fd1.exponents) || !is_general_position(&fd2, &fd2.exponents) {
        return Err(ThetaError::NotGeneralPosition);
    }
    require_symplectic(datum)?;
    let mult = multipliers(datum, choice)?;
    let mut factors = Vec::new();
    let mut taus = Vec::new();
    for (f, a) in datum.factors.iter().zip(&mult.tau) {
        let (g, t) = depth_zero_factor(f, a, &mult.varpi)?;
        factors.push(g);
        taus.push(Some(t));
    }
    let lifted = TorusDatum::new(datum.base, factors, Polarity::Orthogonal);
    let (predicted, _) = parity_predict(datum)?;
    finish(
        lifted,
        predicted,
        ChoiceRecord {
            tau: choice,
            tau_residues: taus,
            varpi_unit: mult.varpi.coeffs().to_vec(),
            iota: None,
        },
    )
}

fn positive_factor(f: &Factor) -> Result<Factor, ThetaError> {
    let top = f.top_gamma().ok_or(ThetaError::NotSingleBlock)?;
    let c_theta = lt_neg(&lt_mul(&f.c, &top.gamma)?);
    let (chi, gammas) = invert_chars(f);
    Ok(Factor::new(c_theta, chi, gammas))
}

/// `(L, L°, c, χ) ↦ (L, L°, -c γ, χ^{-1})` for a block of one depth `r > 0`.
pub fn lift_positive_block(datum: &TorusDatum) -> Result<ThetaResult, ThetaError> {
    let r = datum.factors.first().map(|f| f.top_depth());
    if r.map_or(true, |r| r <= Rational64::from_integer(0))
        || datum.factors.iter().any(|f| Some(f.top_depth()) != r)
    {
        return Err(ThetaError::NotSingleBlock);
    }
    require_symplectic(datum)?;
    let factors = datum
        .factors
        .iter()
        .map(positive_factor)
        .collect::<Result<Vec<_>, _>>()?;
    let lifted = TorusDatum::new(datum.base, factors, Polarity::Orthogonal);
    let predicted = quadform::invariants_transfer(&lifted.cs())?;
    let base = TameField::get(datum.base)?;
    finish(
        lifted,
        predicted,
        ChoiceRecord {
            tau: TauChoice::Canonical,
            tau_residues: vec![None; datum.factors.len()],
            varpi_unit: base.residue().one().coeffs().to_vec(),
            iota: None,
        },
    )
}

/// Blockwise lift: the zero block by [`lift_depth_zero`], every positive
/// level by [`lift_positive_block`], reassembled in the original order.
pub fn lift(datum: &TorusDatum, choice: TauChoice) -> Result<ThetaResult, ThetaError> {
    lift_with_varpi(datum, choice, None)
}

fn lift_with_varpi(
    datum: &TorusDatum,
    choice: TauChoice,
    varpi_override: Option<FqElement>,
) -> Result<ThetaResult, ThetaError> {
    require_symplectic(datum)?;
    let q = datum.q();
    let blocks = block_decompose(datum);
    let mut mult = multipliers(datum, choice)?;
    if let Some(v) = varpi_override {
        mult.varpi = v;
    }
    let mut lifted_blocks = Vec::new();
    let mut predicted: Option<QuadInvariants> = None;
    let mut taus = vec![None; datum.factors.len()];
    for (r, idx) in &blocks.levels {
        let block = datum.sub_datum(idx);
        let (lifted, pred) = if *r == Rational64::from_integer(0) {
            let (fd1, fd2) = residue_reduction(&block).map_err(|_| ThetaError::NotDepthZero)?;
            if !is_general_position(&fd1, &fd1.exponents)
                || !is_general_position(&fd2, &fd2.exponents)
            {
                return Err(ThetaError::NotGeneralPosition);
            }
            let mut fs = Vec::new();
            for &i in idx {
                let (g, t) = depth_zero_factor(&datum.factors[i], &mult.tau[i], &mult.varpi)?;
                fs.push(g);
                taus[i] = Some(t);
            }
            (
                TorusDatum::new(datum.base, fs, Polarity::Orthogonal),
                parity_predict(&block)?.0,
            )
        } else {
            let res = lift_positive_block(&block)?;
            (res.lifted, res.predicted_invariants)
        };
        predicted = Some(match predicted {
            None => pred,
            Some(acc) => acc.orthogonal_sum(&pred, q),
        });
        lifted_blocks.push(lifted);
    }
    let lifted = blocks
        .recombine(&lifted_blocks)
        .ok_or_else(|| ThetaError::Invalid(ValidationReport::default()))?;
    finish(
        lifted,
        predicted.expect("datum has at least one block"),
        ChoiceRecord {
            tau: choice,
            tau_residues: taus,
            varpi_unit: mult.varpi.coeffs().to_vec(),
            iota: None,
        },
    )
}

/// One factor of the `F`-structure: `K_i / K_i°` and `c_i ∈ K_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FStructureFactor {
    pub c: LeadingTerm,
}

impl FStructureFactor {
    pub fn tower(&self) -> TameFieldDescriptor {
        self.c.descriptor()
    }
}

/// A datum over `E` together with a declared `F`-structure `K_i ⊗ E = L_i`.
#[derive(Clone, Debug)]
pub struct DistinctionWitness {
    pub base_f: TameFieldDescriptor,
    pub datum_over_e: TorusDatum,
    pub f_structure: Vec<FStructureFactor>,
}

/// The embedding `K ↪ L = K ⊗ E` on leading terms. For `Π_K = √(ũ_K p)`
/// the image is `s Π_L` with `s` the canonical square root of `ũ_K`.
pub struct KLEmbedding {
    k: Arc<TameField>,
    l: Arc<TameField>,
    emb: FqEmbedding,
    s: FqElement,
    twisted: bool,
}

impl KLEmbedding {
    pub fn new(k: TameFieldDescriptor, l: TameFieldDescriptor) -> Result<Self, ThetaError> {
        let kf = TameField::get(k)?;
        let lf = TameField::get(l)?;
        let emb = FqEmbedding::new(kf.residue(), lf.residue()).map_err(LocalError::from)?;
        let twisted = k.step == Some(QuadStep::RamifiedTwisted);
        let s = if twisted {
            let u = emb.apply(&kf.residue().from_coeffs(
                &kf.u_circ().coeffs().iter().map(|&c| c as i64).collect::<Vec<_>>(),
            ).map_err(LocalError::from)?);
            u.sqrt().expect("non-square of K° is a square in L°")
        } else {
            lf.residue().one()
        };
        Ok(KLEmbedding { k: kf, l: lf, emb, s, twisted })
    }

    pub fn embed(&self, x: &LeadingTerm) -> Result<LeadingTerm, ThetaError> {
        let r = &self.emb.apply(x.residue()) * &self.s.pow_signed(x.val()).map_err(LocalError::from)?;
        Ok(LeadingTerm::new(&self.l, x.val(), r, x.sym())?)
    }

    pub fn descend(&self, x: &LeadingTerm) -> Result<LeadingTerm, ThetaError> {
        let r = x.residue() * &self.s.pow_signed(-x.val()).map_err(LocalError::from)?;
        let r = self
            .emb
            .preimage(&r)
            .ok_or(ThetaError::InvalidWitness("element is not defined over K".into()))?;
        Ok(LeadingTerm::new(&self.k, x.val(), r, x.sym())?)
    }

    /// The involution `σ` of `L / K` on leading terms.
    pub fn sigma(&self, x: &LeadingTerm) -> Result<LeadingTerm, ThetaError> {
        let qm = self.k.residue().order();
        let mut r = x.residue().pow(qm);
        if self.twisted && x.val().rem_euclid(2) == 1 {
            r = -&r;
        }
        Ok(LeadingTerm::new(&self.l, x.val(), r, x.sym())?)
    }
}

fn e_descriptor(base_f: TameFieldDescriptor) -> TameFieldDescriptor {
    TameFieldDescriptor::base(base_f.base_p, 2 * base_f.base_f)
}

/// `ι = √u ∈ E` for the canonical non-square `u` of `F`, as a residue.
pub fn canonical_iota(base_f: TameFieldDescriptor) -> Result<FqElement, ThetaError> {
    let f = TameField::get(base_f)?;
    let e = TameField::get(e_descriptor(base_f))?;
    let emb = FqEmbedding::new(f.residue(), e.residue()).map_err(LocalError::from)?;
    Ok(emb
        .apply(&f.residue().canonical_nonsquare())
        .sqrt()
        .expect("u is a square in the quadratic extension"))
}

impl DistinctionWitness {
    /// Checks the structural requirements and returns the per-factor
    /// embeddings `K_i ↪ L_i`.
    pub fn check(&self) -> Result<Vec<KLEmbedding>, ThetaError> {
        let bad = |s: String| ThetaError::InvalidWitness(s);
        let e = e_descriptor(self.base_f);
        if self.base_f.step.is_some() || self.base_f.m != 1 {
            return Err(bad("base must be an unramified field".into()));
        }
        if self.datum_over_e.base != e {
            return Err(bad(format!("datum must live over E = {e}")));
        }
        if self.datum_over_e.polarity != Polarity::Symplectic {
            return Err(bad("datum over E must be symplectic".into()));
        }
        let rep = validate(&self.datum_over_e);
        if !rep.is_valid() {
            return Err(bad(format!("datum over E is invalid: {:?}", rep.violations)));
        }
        if self.f_structure.len() != self.datum_over_e.factors.len() {
            return Err(bad("F-structure must declare every factor".into()));
        }
        let mut embs = Vec::new();
        for (i, (fs, f)) in self.f_structure.iter().zip(&self.datum_over_e.factors).enumerate() {
            let k = fs.tower();
            let l = f.tower();
            if (k.base_p, k.base_f) != (self.base_f.base_p, self.base_f.base_f) || k.m != l.m {
                return Err(bad(format!("factor {i}: K is not a form of L")));
            }
            match k.step {
                Some(QuadStep::Unramified) | None => {
                    return Err(bad(format!("factor {i}: E lies in K, so K ⊗ E is not a field")))
                }
                _ => {}
            }
            if k.m % 2 == 0 {
                return Err(bad(format!("factor {i}: E lies in K°, so K ⊗ E is not a field")));
            }
            if l.step != Some(QuadStep::Ramified) {
                return Err(bad(format!("factor {i}: L must be L°(√p) over E")));
            }
            let emb = KLEmbedding::new(k, l)?;
            if fs.c.sym() != Sym::Anti || fs.c.check_sym().is_err() {
                return Err(bad(format!("factor {i}: c over K must be a consistent anti element")));
            }
            if emb.embed(&fs.c)? != f.c {
                return Err(bad(format!("factor {i}: c over K does not map to c over E")));
            }
            if emb.sigma(&f.c)? != f.c {
                return Err(bad(format!("factor {i}: c is not sigma-fixed")));
            }
            embs.push(emb);
        }
        Ok(embs)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorVerdict {
    /// exponent of `χ_i|_{K_i¹}` on the depth-zero quotient `{±1}`
    pub restriction_exponent: i64,
    pub restriction_trivial: bool,
    pub gamma_sigma_anti: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistinctionVerdict {
    pub distinguished: bool,
    pub factors: Vec<FactorVerdict>,
}

/// Restriction of the depth-zero character to `K_i¹`. Both `K_i¹` and
/// `L_i¹` have depth-zero quotient `{±1}` and `-1 ↦ -1`.
fn restriction_exponent(f: &Factor) -> i64 {
    f.chi0.rem_euclid(2)
}

pub fn distinguished_check(w: &DistinctionWitness) -> Result<DistinctionVerdict, ThetaError> {
    let embs = w.check()?;
    let mut factors = Vec::new();
    for (f, emb) in w.datum_over_e.factors.iter().zip(&embs) {
        let k = restriction_exponent(f);
        let mut anti = true;
        for g in &f.gamma_levels {
            anti &= emb.sigma(&g.gamma)? == lt_neg(&g.gamma);
        }
        factors.push(FactorVerdict {
            restriction_exponent: k,
            restriction_trivial: k == 0,
            gamma_sigma_anti: anti,
        });
    }
    Ok(DistinctionVerdict {
        distinguished: factors.iter().all(|f| f.restriction_trivial && f.gamma_sigma_anti),
        factors,
    })
}

/// Bounded search over norm-class rescalings of `c` (by `Nm(Π) = -Π²`
/// powers) and tower twists of the character for a distinguished witness.
pub fn distinction_search(w: &DistinctionWitness, bound: i64) -> Result<Option<DistinctionWitness>, ThetaError> {
    let embs = w.check()?;
    if distinguished_check(w)?.distinguished {
        return Ok(Some(w.clone()));
    }
    let mut cand = w.clone();
    for (i, emb) in embs.iter().enumerate() {
        let f = &w.datum_over_e.factors[i];
        let autos = crate::torusdata::tower_automorphisms(f.tower());
        let mut found = None;
        'search: for k in -bound..=bound {
            // Nm(Π_K)^k is σ-fixed and a norm
            let kf = w.f_structure[i].c.field().clone();
            let nm = LeadingTerm::new(&kf, 2 * k, kf.residue().from_int(-1).pow(k.unsigned_abs()), Sym::Fixed)?;
            let ck = lt_mul(&w.f_structure[i].c, &nm)?;
            for phi in &autos {
                let chi = phi.transport_exponent(f, f.chi0);
                let gammas: Vec<GammaLevel> = f
                    .gamma_levels
                    .iter()
                    .map(|g| Ok(GammaLevel { r: g.r, gamma: phi.apply(&g.gamma)? }))
                    .collect::<Result<_, LocalError>>()?;
                let ok = chi % 2 == 0
                    && gammas
                        .iter()
                        .all(|g| emb.sigma(&g.gamma).map_or(false, |s| s == lt_neg(&g.gamma)));
                if ok {
                    found = Some((ck.clone(), Factor::new(emb.embed(&ck)?, chi, gammas)));
                    break 'search;
                }
            }
        }
        match found {
            Some((ck, factor)) => {
                cand.f_structure[i].c = ck;
                cand.datum_over_e.factors[i] = factor;
            }
            None => return Ok(None),
        }
    }
    if distinguished_check(&cand)?.distinguished {
        Ok(Some(cand))
    } else {
        Ok(None)
    }
}

#[derive(Clone, Debug)]
pub struct TransportResult {
    /// lift over `E` with `ϖ = p ι`
    pub e_lift: ThetaResult,
    /// `ι c_θ` per factor, σ-fixed
    pub twisted: Vec<LeadingTerm>,
    /// orthogonal datum `(K, K°, ι c_θ, χ^{-1}|_{K¹})` over `F`
    pub f_structure: TorusDatum,
    pub f_invariants: QuadInvariants,
    /// invariants over `E` of the ι-twisted lift
    pub e_invariants_twisted: QuadInvariants,
    /// invariants of `V_F ⊗ E`
    pub base_change_invariants: QuadInvariants,
    /// `F`-structure extended to `E` is equivalent to the ι-twisted `E`-lift
    pub reextension_equivalent: bool,
    /// `F`-structure extended to `E` is equivalent to the plain `E`-lift
    pub direct_equivalent: bool,
}

pub fn distinction_transport(w: &DistinctionWitness) -> Result<TransportResult, ThetaError> {
    let embs = w.check()?;
    if !distinguished_check(w)?.distinguished {
        return Err(ThetaError::NotDistinguished);
    }
    let iota_res = canonical_iota(w.base_f)?;
    let mut e_lift = lift_with_varpi(&w.datum_over_e, TauChoice::Canonical, Some(iota_res.clone()))?;
    e_lift.choices.iota = Some(iota_res.coeffs().to_vec());
    let mut twisted = Vec::new();
    let mut f_factors = Vec::new();
    let mut ext_factors = Vec::new();
    for (i, (g, emb)) in e_lift.lifted.factors.iter().zip(&embs).enumerate() {
        if emb.sigma(&g.c)? != lt_neg(&g.c) {
            return Err(ThetaError::SymmetryAssertionFailed(i));
        }
        let l = g.c.field().clone();
        let iota = LeadingTerm::new(&l, 0, l.embed_base(&iota_res), Sym::Fixed)?;
        let ic = lt_mul(&iota, &g.c)?;
        if emb.sigma(&ic)? != ic {
            return Err(ThetaError::SymmetryAssertionFailed(i));
        }
        let ck = emb.descend(&ic)?;
        ck.check_sym().map_err(|_| ThetaError::SymmetryAssertionFailed(i))?;
        f_factors.push(Factor::new(ck.clone(), restriction_exponent(g), vec![]));
        ext_factors.push(Factor::new(emb.embed(&ck)?, g.chi0, g.gamma_levels.clone()));
        twisted.push(ic);
    }
    let f_structure = TorusDatum::new(w.base_f, f_factors, Polarity::Orthogonal);
    let f_invariants = quadform::invariants_transfer(&f_structure.cs())?;
    let twisted_lift = TorusDatum::new(
        e_lift.lifted.base,
        e_lift
            .lifted
            .factors
            .iter()
            .zip(&twisted)
            .map(|(g, c)| Factor::new(c.clone(), g.chi0, g.gamma_levels.clone()))
            .collect(),
        Polarity::Orthogonal,
    );
    let reextended = TorusDatum::new(e_lift.lifted.base, ext_factors, Polarity::Orthogonal);
    let e_invariants_twisted = quadform::invariants_transfer(&twisted_lift.cs())?;
    let q = w.base_f.q();
    let mut diag = Vec::new();
    for c in f_structure.cs() {
        for d in quadform::transfer_form(&c)? {
            diag.push(SquareClass {
                uniformizer: d.uniformizer,
                nonsquare_unit: false,
            });
        }
    }
    let base_change_invariants = QuadInvariants::from_diagonal(&diag, q * q);
    Ok(TransportResult {
        reextension_equivalent: datum_equivalent(&reextended, &twisted_lift, EquivalenceMode::Strict)?,
        direct_equivalent: datum_equivalent(&reextended, &e_lift.lifted, EquivalenceMode::Strict)?,
        e_lift,
        twisted,
        f_structure,
        f_invariants,
        e_invariants_twisted,
        base_change_invariants,
    })
}
