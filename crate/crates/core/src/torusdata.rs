//! Torus data `(L, L°, c, χ) = Π_i (L_i, L_i°, c_i, χ_i)` together with
//! positive-depth levels `γ_i`.
//!
//! The depth-zero part of `χ_i` is an exponent against the canonical
//! generator of the residue norm-one group: `Z/(q^m + 1)` for an unramified
//! step and `Z/2` for a ramified one.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::localfield::{
    is_norm, lt_inv, lt_mul, LeadingTerm, LocalError, QuadStep, Sym, TameField,
    TameFieldDescriptor,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TorusError {
    #[error(transparent)]
    Local(#[from] LocalError),
    #[error("data have different polarities")]
    PolarityMismatch,
    #[error("datum is not of depth zero: {0}")]
    NotDepthZero(String),
    #[error("datum is invalid: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    Symplectic,
    Orthogonal,
}

impl Polarity {
    pub fn c_flag(self) -> Sym {
        match self {
            Polarity::Symplectic => Sym::Anti,
            Polarity::Orthogonal => Sym::Fixed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaLevel {
    /// depth, `val_F(γ) = -r`
    pub r: Rational64,
    pub gamma: LeadingTerm,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factor {
    pub c: LeadingTerm,
    pub chi0: i64,
    pub gamma_levels: Vec<GammaLevel>,
}

impl Factor {
    pub fn new(c: LeadingTerm, chi0: i64, gamma_levels: Vec<GammaLevel>) -> Self {
        Factor {
            c,
            chi0,
            gamma_levels,
        }
    }
    pub fn tower(&self) -> TameFieldDescriptor {
        self.c.descriptor()
    }
    pub fn m(&self) -> u32 {
        self.tower().m
    }
    pub fn step(&self) -> Option<QuadStep> {
        self.tower().step
    }
    /// Order of the depth-zero quotient of the norm-one group.
    pub fn chi_modulus(&self) -> i64 {
        match self.step() {
            Some(QuadStep::Unramified) => self.tower().q().pow(self.m()) as i64 + 1,
            _ => 2,
        }
    }
    pub fn chi0_reduced(&self) -> i64 {
        self.chi0.rem_euclid(self.chi_modulus())
    }
    /// Largest gamma depth, zero for a gamma-free factor.
    pub fn top_depth(&self) -> Rational64 {
        self.gamma_levels
            .iter()
            .map(|g| g.r)
            .max()
            .unwrap_or_else(|| Rational64::from_integer(0))
    }
    pub fn top_gamma(&self) -> Option<&GammaLevel> {
        self.gamma_levels.iter().max_by_key(|g| g.r)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorusDatum {
    pub base: TameFieldDescriptor,
    pub factors: Vec<Factor>,
    pub polarity: Polarity,
}

impl TorusDatum {
    pub fn new(base: TameFieldDescriptor, factors: Vec<Factor>, polarity: Polarity) -> Self {
        TorusDatum {
            base,
            factors,
            polarity,
        }
    }
    /// `n = Σ m_i`
    pub fn n(&self) -> u32 {
        self.factors.iter().map(|f| f.m()).sum()
    }
    pub fn q(&self) -> u64 {
        self.base.q()
    }
    pub fn cs(&self) -> Vec<LeadingTerm> {
        self.factors.iter().map(|f| f.c.clone()).collect()
    }
    pub fn is_depth_zero(&self) -> bool {
        self.factors.iter().all(|f| f.gamma_levels.is_empty())
    }
    pub fn sub_datum(&self, indices: &[usize]) -> TorusDatum {
        TorusDatum {
            base: self.base,
            factors: indices.iter().map(|&i| self.factors[i].clone()).collect(),
            polarity: self.polarity,
        }
    }
    pub fn concat(parts: &[TorusDatum]) -> Option<TorusDatum> {
        let first = parts.first()?;
        let mut factors = Vec::new();
        for p in parts {
            if p.base != first.base || p.polarity != first.polarity {
                return None;
            }
            factors.extend(p.factors.iter().cloned());
        }
        Some(TorusDatum {
            base: first.base,
            factors,
            polarity: first.polarity,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    EmptyDatum,
    BaseMismatch,
    BadTower,
    PolarityFlag,
    FlagInconsistent,
    DepthZeroRamified,
    GammaOrder,
    GammaFlag,
    GammaValuation,
    NotGeneralPosition,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub factor: Option<usize>,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
    fn push(&mut self, kind: ViolationKind, factor: Option<usize>, message: impl Into<String>) {
        self.violations.push(Violation {
            kind,
            factor,
            message: message.into(),
        });
    }
}

pub fn validate(datum: &TorusDatum) -> ValidationReport {
    let mut rep = ValidationReport::default();
    if datum.factors.is_empty() {
        rep.push(ViolationKind::EmptyDatum, None, "datum has no factors");
        return rep;
    }
    let base = datum.base;
    if base.step.is_some() || base.m != 1 {
        rep.push(ViolationKind::BaseMismatch, None, "base must be an unramified field F");
    }
    let flag = datum.polarity.c_flag();
    for (i, f) in datum.factors.iter().enumerate() {
        let t = f.tower();
        if (t.base_p, t.base_f) != (base.base_p, base.base_f) {
            rep.push(ViolationKind::BaseMismatch, Some(i), format!("tower {t} is not over {base}"));
            continue;
        }
        if t.step.is_none() {
            rep.push(ViolationKind::BadTower, Some(i), "L/L° must be a quadratic step");
            continue;
        }
        if f.c.sym() != flag {
            rep.push(
                ViolationKind::PolarityFlag,
                Some(i),
                format!("c is flagged {:?}, {:?} data need {:?}", f.c.sym(), datum.polarity, flag),
            );
        } else if f.c.check_sym().is_err() {
            rep.push(
                ViolationKind::FlagInconsistent,
                Some(i),
                "leading term of c contradicts its symmetry flag",
            );
        }
        if f.gamma_levels.is_empty() && t.step != Some(QuadStep::Unramified) {
            rep.push(
                ViolationKind::DepthZeroRamified,
                Some(i),
                "depth-zero factor needs an unramified tower (no trace-zero unit in a ramified step)",
            );
        }
        let mut last: Option<Rational64> = None;
        for g in &f.gamma_levels {
            if g.r <= Rational64::from_integer(0) || last.map_or(false, |l| g.r <= l) {
                rep.push(ViolationKind::GammaOrder, Some(i), "gamma depths must be positive and strictly increasing");
            }
            last = Some(g.r);
            if g.gamma.descriptor() != t {
                rep.push(ViolationKind::GammaValuation, Some(i), "gamma lives in a different field");
                continue;
            }
            if g.gamma.sym() != Sym::Anti || g.gamma.check_sym().is_err() {
                rep.push(ViolationKind::GammaFlag, Some(i), "gamma must be a consistent anti element");
            }
            let expected = -g.r * Rational64::from_integer(t.e() as i64);
            if !expected.is_integer() || g.gamma.val() != expected.to_integer() {
                rep.push(
                    ViolationKind::GammaValuation,
                    Some(i),
                    format!("gamma has val_L {} but depth {} needs {}", g.gamma.val(), g.r, expected),
                );
            }
        }
    }
    if rep.is_valid() {
        let zero: Vec<usize> = (0..datum.factors.len())
            .filter(|&i| datum.factors[i].gamma_levels.is_empty())
            .collect();
        if !zero.is_empty() {
            if let Ok((fd1, fd2)) = residue_reduction(&datum.sub_datum(&zero)) {
                for fd in [fd1, fd2] {
                    if !is_general_position(&fd, &fd.exponents) {
                        rep.push(
                            ViolationKind::NotGeneralPosition,
                            None,
                            format!("depth-zero character {:?} is not in general position", fd.exponents),
                        );
                    }
                }
            }
        }
    }
    rep
}

/// Torus data of a finite symplectic or orthogonal space: residue degrees
/// `m_i` of `𝖫_i°` over `F_q` with `𝖫_i¹` cyclic of order `q^{m_i} + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteTorusDatum {
    pub q: u64,
    pub ms: Vec<u32>,
    pub exponents: Vec<i64>,
    /// indices of the originating p-adic factors
    pub source: Vec<usize>,
}

impl FiniteTorusDatum {
    pub fn modulus(&self, i: usize) -> i64 {
        self.q.pow(self.ms[i]) as i64 + 1
    }
    pub fn dim(&self) -> u32 {
        self.ms.iter().map(|m| 2 * m).sum()
    }
    /// `Π (2 m_i) · Π mult!` over groups of equal `m`.
    pub fn weyl_order(&self) -> u64 {
        let mut order: u64 = self.ms.iter().map(|&m| 2 * m as u64).product();
        let mut mult: BTreeMap<u32, u64> = BTreeMap::new();
        for &m in &self.ms {
            *mult.entry(m).or_default() += 1;
        }
        for k in mult.values() {
            order *= (1..=*k).product::<u64>();
        }
        order
    }
}

/// Splits a depth-zero datum by the parity of `val_L(c_i)`.
pub fn residue_reduction(
    datum: &TorusDatum,
) -> Result<(FiniteTorusDatum, FiniteTorusDatum), TorusError> {
    let q = datum.q();
    let mut parts = [
        FiniteTorusDatum { q, ms: vec![], exponents: vec![], source: vec![] },
        FiniteTorusDatum { q, ms: vec![], exponents: vec![], source: vec![] },
    ];
    for (i, f) in datum.factors.iter().enumerate() {
        if !f.gamma_levels.is_empty() {
            return Err(TorusError::NotDepthZero(format!("factor {i} has gamma levels")));
        }
        if f.step() != Some(QuadStep::Unramified) {
            return Err(TorusError::NotDepthZero(format!("factor {i} is ramified")));
        }
        let part = &mut parts[f.c.val().rem_euclid(2) as usize];
        part.ms.push(f.m());
        part.exponents.push(f.chi0_reduced());
        part.source.push(i);
    }
    let [a, b] = parts;
    Ok((a, b))
}

/// Orbit of an exponent vector under per-factor Frobenius twists
/// `k ↦ q^j k mod (q^m + 1)` (which include `k ↦ -k`) and permutations of
/// factors with equal `m`.
pub fn weyl_orbit(fd: &FiniteTorusDatum, chi: &[i64]) -> BTreeSet<Vec<i64>> {
    let n = fd.ms.len();
    let start: Vec<i64> = (0..n).map(|i| chi[i].rem_euclid(fd.modulus(i))).collect();
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::new();
    seen.insert(start.clone());
    queue.push_back(start);
    while let Some(v) = queue.pop_front() {
        let mut next = Vec::new();
        for i in 0..n {
            let mut w = v.clone();
            w[i] = (w[i] * fd.q as i64).rem_euclid(fd.modulus(i));
            next.push(w);
            for j in i + 1..n {
                if fd.ms[i] == fd.ms[j] {
                    let mut w = v.clone();
                    w.swap(i, j);
                    next.push(w);
                }
            }
        }
        for w in next {
            if seen.insert(w.clone()) {
                queue.push_back(w);
            }
        }
    }
    seen
}

pub fn is_general_position(fd: &FiniteTorusDatum, chi: &[i64]) -> bool {
    weyl_orbit(fd, chi).len() as u64 == fd.weyl_order()
}

/// Factor indices grouped by top gamma depth, deepest first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockDecomposition {
    pub levels: Vec<(Rational64, Vec<usize>)>,
}

impl BlockDecomposition {
    pub fn blocks(&self, datum: &TorusDatum) -> Vec<TorusDatum> {
        self.levels.iter().map(|(_, idx)| datum.sub_datum(idx)).collect()
    }
    /// Reassembles the datum in its original factor order.
    pub fn recombine(&self, blocks: &[TorusDatum]) -> Option<TorusDatum> {
        let total: usize = self.levels.iter().map(|(_, i)| i.len()).sum();
        let mut slots: Vec<Option<Factor>> = vec![None; total];
        for ((_, idx), b) in self.levels.iter().zip(blocks) {
            for (&i, f) in idx.iter().zip(&b.factors) {
                *slots.get_mut(i)? = Some(f.clone());
            }
        }
        let first = blocks.first()?;
        Some(TorusDatum {
            base: first.base,
            factors: slots.into_iter().collect::<Option<Vec<_>>>()?,
            polarity: first.polarity,
        })
    }
}

pub fn block_decompose(datum: &TorusDatum) -> BlockDecomposition {
    let mut map: BTreeMap<Rational64, Vec<usize>> = BTreeMap::new();
    for (i, f) in datum.factors.iter().enumerate() {
        map.entry(f.top_depth()).or_default().push(i);
    }
    BlockDecomposition {
        levels: map.into_iter().rev().collect(),
    }
}

/// How characters are compared in [`datum_equivalent`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquivalenceMode {
    /// characters transported by the same isomorphism that matches `c`
    Strict,
    /// characters matched up to the finite Weyl group
    #[default]
    UpToWeyl,
}

/// A tower automorphism `φ` of `L` over `F` preserving `L°`: residues go to
/// their `q^j`-th power and, on a ramified step, `Π ↦ ε s_j Π`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TowerAutomorphism {
    pub frobenius: u32,
    pub negate_pi: bool,
}

pub fn tower_automorphisms(t: TameFieldDescriptor) -> Vec<TowerAutomorphism> {
    match t.step {
        Some(QuadStep::Unramified) => (0..2 * t.m)
            .map(|j| TowerAutomorphism { frobenius: j, negate_pi: false })
            .collect(),
        _ => (0..t.m)
            .flat_map(|j| {
                [false, true].map(|s| TowerAutomorphism { frobenius: j, negate_pi: s })
            })
            .collect(),
    }
}

impl TowerAutomorphism {
    pub fn apply(&self, x: &LeadingTerm) -> Result<LeadingTerm, LocalError> {
        let field = x.field();
        let t = field.descriptor();
        let qj = t.q().pow(self.frobenius);
        let mut r = x.residue().pow(qj);
        if t.step.map_or(false, |s| s.is_ramified()) {
            // φ(Π) = ± s Π with s² = φ(δ)/δ
            let delta = field.delta().expect("ramified");
            let s = delta.pow((qj - 1) / 2);
            let s = if self.negate_pi { -&s } else { s };
            r = &r * &s.pow_signed(x.val())?;
        }
        LeadingTerm::new(field, x.val(), r, x.sym())
    }

    /// Action on the depth-zero exponent, `k ↦ k q^{-j}`.
    pub fn transport_exponent(&self, f: &Factor, k: i64) -> i64 {
        let n = f.chi_modulus();
        match f.step() {
            Some(QuadStep::Unramified) => {
                let q = f.tower().q() as i64 % n;
                let period = 2 * f.m();
                let back = (period - self.frobenius % period) % period;
                let mut out = k.rem_euclid(n);
                for _ in 0..back {
                    out = out * q % n;
                }
                out
            }
            _ => k.rem_euclid(n),
        }
    }
}

fn c_matches(a: &Factor, b: &Factor, phi: &TowerAutomorphism) -> Result<bool, LocalError> {
    let ratio = lt_mul(&phi.apply(&a.c)?, &lt_inv(&b.c))?;
    is_norm(&ratio)
}

fn chars_match(a: &Factor, b: &Factor, phi: &TowerAutomorphism) -> Result<bool, LocalError> {
    if phi.transport_exponent(a, a.chi0) != b.chi0_reduced() {
        return Ok(false);
    }
    if a.gamma_levels.len() != b.gamma_levels.len() {
        return Ok(false);
    }
    for (ga, gb) in a.gamma_levels.iter().zip(&b.gamma_levels) {
        if ga.r != gb.r || phi.apply(&ga.gamma)? != gb.gamma {
            return Ok(false);
        }
    }
    Ok(true)
}

fn factor_equivalent(a: &Factor, b: &Factor, mode: EquivalenceMode) -> Result<bool, LocalError> {
    if a.tower() != b.tower() {
        return Ok(false);
    }
    let autos = tower_automorphisms(a.tower());
    match mode {
        EquivalenceMode::Strict => {
            for phi in &autos {
                if c_matches(a, b, phi)? && chars_match(a, b, phi)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        EquivalenceMode::UpToWeyl => {
            let mut c_ok = false;
            for phi in &autos {
                if c_matches(a, b, phi)? {
                    c_ok = true;
                    break;
                }
            }
            if !c_ok {
                return Ok(false);
            }
            for phi in &autos {
                if chars_match(a, b, phi)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
    }
}

/// Whether some factor bijection and tower isomorphisms `φ_i` satisfy
/// `φ_i(c_i) d_i^{-1} ∈ Nm(L_i^×)` with characters matching per `mode`.
pub fn datum_equivalent(
    a: &TorusDatum,
    b: &TorusDatum,
    mode: EquivalenceMode,
) -> Result<bool, TorusError> {
    if a.polarity != b.polarity {
        return Err(TorusError::PolarityMismatch);
    }
    if a.base != b.base || a.factors.len() != b.factors.len() {
        return Ok(false);
    }
    let n = a.factors.len();
    let mut ok = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            ok[i][j] = factor_equivalent(&a.factors[i], &b.factors[j], mode)?;
        }
    }
    // bipartite matching by augmenting paths
    fn augment(i: usize, ok: &[Vec<bool>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for j in 0..ok.len() {
            if ok[i][j] && !seen[j] {
                seen[j] = true;
                if owner[j].map_or(true, |k| augment(k, ok, seen, owner)) {
                    owner[j] = Some(i);
                    return true;
                }
            }
        }
        false
    }
    let mut owner = vec![None; n];
    for i in 0..n {
        let mut seen = vec![false; n];
        if !augment(i, &ok, &mut seen, &mut owner) {
            return Ok(false);
        }
    }
    Ok(true)
}

impl fmt::Display for TorusDatum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} datum over {} with {} factor(s)", self.polarity, self.base, self.factors.len())
    }
}

/// Convenience constructor for a leading term on a tower.
pub fn leading(
    tower: TameFieldDescriptor,
    val: i64,
    residue_index: u64,
    sym: Sym,
) -> Result<LeadingTerm, LocalError> {
    let field = TameField::get(tower)?;
    let r = field.residue().element(residue_index);
    LeadingTerm::new(&field, val, r, sym)
}
