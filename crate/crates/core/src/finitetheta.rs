//! Brute-force oracle for the finite theta correspondence of the dual pair
//! `(SL_2(q), O_2^±(q))` inside the Weil representation of `Sp_4(q)`, for
//! odd primes `q`.
//!
//! The Weil representation is realized on functions on `V` (dimension
//! `q²`). `O(V)` permutes points, `u(1)` multiplies by `ψ(Q(v))` and `w`
//! acts by a finite Fourier transform. The scalar in front of the Fourier
//! transform is fixed by multiplicativity along a breadth-first spanning
//! tree of the Cayley graph and then checked on every edge.
//!
//! Matrices and characters are generic over [`num_traits::Float`]; group
//! data is exact over `F_q`.

use std::collections::{BTreeSet, HashMap, VecDeque};

use num_complex::Complex;
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::finitefield::{fq_legendre, fq_make, is_prime, FieldError, FqDescriptor, FqElement};
use crate::torusdata::{weyl_orbit, FiniteTorusDatum};

/// A 2×2 matrix over `F_q`, row-major.
pub type Mat2 = [u64; 4];

/// Random products checked when exhaustive checking is too expensive.
pub const SAMPLED_PRODUCTS: u64 = 100_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FiniteThetaError {
    #[error("q = {0} is not an odd prime")]
    UnsupportedQ(u64),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("no scalar normalization makes the Weil representation multiplicative")]
    NormalizationFailure,
    #[error("exponent {exponent} is not in general position for a torus of order {order}")]
    NotGeneralPosition { exponent: i64, order: u64 },
    #[error("the {torus:?} torus is not the rotation group of O_2^{variant:?}")]
    TorusMismatch { torus: TorusKind, variant: Variant },
    #[error("class functions do not live on the groups of this pair")]
    Incompatible,
    #[error("multiplicity {re} + {im}i is not a nonnegative integer")]
    NonIntegralMultiplicity { re: f64, im: f64 },
    #[error("verification failed at {}: {}", .0.stage, .0.detail)]
    VerificationFailure(Box<Counterexample>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub stage: String,
    pub exponent: Option<i64>,
    pub detail: String,
}

fn failure(stage: &str, exponent: Option<i64>, detail: String) -> FiniteThetaError {
    FiniteThetaError::VerificationFailure(Box::new(Counterexample {
        stage: stage.to_string(),
        exponent,
        detail,
    }))
}

/// `V⁺ = ⟨1, −1⟩` or `V⁻ = ⟨1, −ε⟩` with `ε` a non-square.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Plus,
    Minus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TorusKind {
    Split,
    Nonsplit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupTag {
    SL2,
    O2(Variant),
}

/// Conjugacy data of an element of `SL_2(q)`. Logarithms are taken in the
/// split torus `F_q^×` or the nonsplit torus `μ_{q+1} ⊂ F_{q²}^×` and are
/// defined up to sign.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SlClass {
    Central { z: i8 },
    Unipotent { z: i8, square: bool },
    Split { log: u64 },
    Elliptic { log: u64 },
}

/// Conjugacy data of an element of `O_2^±(q)`; reflections are written as
/// `s₀ · r` with `s₀ = diag(1, −1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OClass {
    Rotation { log: u64 },
    Reflection { parity: u8 },
}

fn md(a: i64, q: u64) -> u64 {
    a.rem_euclid(q as i64) as u64
}

fn mat_mul(q: u64, a: &Mat2, b: &Mat2) -> Mat2 {
    [
        (a[0] * b[0] + a[1] * b[2]) % q,
        (a[0] * b[1] + a[1] * b[3]) % q,
        (a[2] * b[0] + a[3] * b[2]) % q,
        (a[2] * b[1] + a[3] * b[3]) % q,
    ]
}

fn mat_det(q: u64, a: &Mat2) -> u64 {
    (a[0] * a[3] % q + q * q - a[1] * a[2] % q) % q
}

fn inv_mod(a: u64, q: u64) -> u64 {
    let mut r = 1;
    let mut b = a % q;
    let mut e = q - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % q;
        }
        b = b * b % q;
        e >>= 1;
    }
    r
}

fn mat_inv(q: u64, a: &Mat2) -> Mat2 {
    let d = inv_mod(mat_det(q, a), q);
    [a[3] * d % q, (q - a[1]) % q * d % q, (q - a[2]) % q * d % q, a[0] * d % q]
}

fn code(q: u64, a: &Mat2) -> usize {
    (a[0] + q * (a[1] + q * (a[2] + q * a[3]))) as usize
}

const IDENTITY: Mat2 = [1, 0, 0, 1];

/// Reduced row echelon form mod `p`; returns the pivot columns.
fn rref(rows: &mut [Vec<u64>], p: u64) -> Vec<usize> {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(k) = (r..rows.len()).find(|&k| rows[k][c] != 0) else {
            continue;
        };
        rows.swap(r, k);
        let inv = inv_mod(rows[r][c], p);
        for v in rows[r].iter_mut() {
            *v = *v * inv % p;
        }
        for k in 0..rows.len() {
            if k != r && rows[k][c] != 0 {
                let f = rows[k][c];
                for j in 0..ncols {
                    rows[k][j] = (rows[k][j] + p * p - f * rows[r][j] % p) % p;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    pivots
}

fn nullspace(mut rows: Vec<Vec<u64>>, ncols: usize, p: u64) -> Vec<Vec<u64>> {
    let pivots = rref(&mut rows, p);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![0u64; ncols];
            v[f] = 1;
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = (p - rows[r][f]) % p;
            }
            v
        })
        .collect()
}

/// `dim ker(x − 1)` on `F_q^n` for a square matrix given row-major.
fn fixed_dim(x: &[u64], n: usize, q: u64) -> usize {
    let mut rows: Vec<Vec<u64>> = (0..n)
        .map(|i| (0..n).map(|j| (x[i * n + j] + q - u64::from(i == j)) % q).collect())
        .collect();
    n - rref(&mut rows, q).len()
}

struct EigenLogs {
    ext: FqDescriptor,
    split: HashMap<u64, u64>,
    nonsplit: HashMap<u64, u64>,
}

impl EigenLogs {
    fn new(q: u64) -> Result<Self, FieldError> {
        let ext = fq_make(q, 2)?;
        let prim = ext.primitive_element();
        let table = |g: FqElement, n: u64| {
            let mut map = HashMap::new();
            let mut x = ext.one();
            for k in 0..n {
                map.insert(x.index(), k);
                x = &x * &g;
            }
            map
        };
        let split = table(prim.pow(q + 1), q - 1);
        let nonsplit = table(prim.pow(q - 1), q + 1);
        Ok(EigenLogs { ext, split, nonsplit })
    }

    /// Smallest-index root of `x² − t x + 1` in `F_{q²}`.
    fn root(&self, t: u64) -> FqElement {
        let t = self.ext.from_int(t as i64);
        self.ext
            .elements()
            .find(|x| (&(x * x) - &(&t * x)) + self.ext.one() == self.ext.zero())
            .expect("quadratic splits over F_{q²}")
    }

    fn split_log(&self, t: u64) -> u64 {
        self.split[&self.root(t).index()]
    }

    fn nonsplit_log(&self, t: u64) -> u64 {
        self.nonsplit[&self.root(t).index()]
    }
}

/// The groups of the dual pair `(SL_2(q), O(V))` with `V = V^±`. The
/// identity is element 0 of both lists.
pub struct FiniteDualPair {
    q: u64,
    variant: Variant,
    form: [u64; 2],
    sp_elements: Vec<Mat2>,
    o_elements: Vec<Mat2>,
    sp_lookup: Vec<usize>,
    o_lookup: Vec<usize>,
    sp_classes: Vec<SlClass>,
    o_classes: Vec<OClass>,
}

impl std::fmt::Debug for FiniteDualPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FiniteDualPair")
            .field("q", &self.q)
            .field("variant", &self.variant)
            .field("form", &self.form)
            .finish()
    }
}

fn enumerate(q: u64, keep: impl Fn(&Mat2) -> bool) -> (Vec<Mat2>, Vec<usize>) {
    let mut out = vec![IDENTITY];
    for a in 0..q {
        for b in 0..q {
            for c in 0..q {
                for d in 0..q {
                    let m = [a, b, c, d];
                    if m != IDENTITY && keep(&m) {
                        out.push(m);
                    }
                }
            }
        }
    }
    let mut lookup = vec![usize::MAX; (q * q * q * q) as usize];
    for (i, m) in out.iter().enumerate() {
        lookup[code(q, m)] = i;
    }
    (out, lookup)
}

impl FiniteDualPair {
    pub fn new(q: u64, variant: Variant) -> Result<Self, FiniteThetaError> {
        if q % 2 == 0 || !is_prime(q) {
            return Err(FiniteThetaError::UnsupportedQ(q));
        }
        let eps = fq_make(q, 1)?.canonical_nonsquare().index();
        let form = match variant {
            Variant::Plus => [1, q - 1],
            Variant::Minus => [1, q - eps],
        };
        let (sp_elements, sp_lookup) = enumerate(q, |m| mat_det(q, m) == 1);
        let (o_elements, o_lookup) = enumerate(q, |h| {
            // hᵀ D h = D
            let [a, b, c, d] = *h;
            let f = form;
            (f[0] * a * a + f[1] * c * c) % q == f[0]
                && (f[0] * b * b + f[1] * d * d) % q == f[1]
                && (f[0] * a * b + f[1] * c * d) % q == 0
        });
        let logs = EigenLogs::new(q)?;
        let sp_classes = sp_elements.iter().map(|g| classify_sl(q, g, &logs)).collect::<Result<_, _>>()?;
        let o_classes = o_elements.iter().map(|h| classify_o(q, variant, h, &logs)).collect();
        Ok(FiniteDualPair {
            q,
            variant,
            form,
            sp_elements,
            o_elements,
            sp_lookup,
            o_lookup,
            sp_classes,
            o_classes,
        })
    }

    pub fn q(&self) -> u64 {
        self.q
    }
    pub fn variant(&self) -> Variant {
        self.variant
    }
    /// Diagonal coefficients of `Q(x, y) = a₀x² + a₁y²`.
    pub fn form(&self) -> [u64; 2] {
        self.form
    }
    pub fn sp_elements(&self) -> &[Mat2] {
        &self.sp_elements
    }
    pub fn o_elements(&self) -> &[Mat2] {
        &self.o_elements
    }
    pub fn sp_index(&self, g: &Mat2) -> Option<usize> {
        self.sp_lookup.get(code(self.q, g)).copied().filter(|&i| i != usize::MAX)
    }
    pub fn o_index(&self, h: &Mat2) -> Option<usize> {
        self.o_lookup.get(code(self.q, h)).copied().filter(|&i| i != usize::MAX)
    }
    pub fn sp_class(&self, i: usize) -> SlClass {
        self.sp_classes[i]
    }
    pub fn o_class(&self, i: usize) -> OClass {
        self.o_classes[i]
    }
    /// Order of `SO(V)`: `q − 1` for `V⁺`, `q + 1` for `V⁻`.
    pub fn rotation_order(&self) -> u64 {
        match self.variant {
            Variant::Plus => self.q - 1,
            Variant::Minus => self.q + 1,
        }
    }
    pub fn rotation_torus(&self) -> TorusKind {
        match self.variant {
            Variant::Plus => TorusKind::Split,
            Variant::Minus => TorusKind::Nonsplit,
        }
    }
    pub fn group_order(&self, group: GroupTag) -> usize {
        match group {
            GroupTag::SL2 => self.sp_elements.len(),
            GroupTag::O2(_) => self.o_elements.len(),
        }
    }
    fn elements(&self, group: GroupTag) -> &[Mat2] {
        match group {
            GroupTag::SL2 => &self.sp_elements,
            GroupTag::O2(_) => &self.o_elements,
        }
    }
    fn index(&self, group: GroupTag, m: &Mat2) -> Option<usize> {
        match group {
            GroupTag::SL2 => self.sp_index(m),
            GroupTag::O2(_) => self.o_index(m),
        }
    }
    fn owns(&self, group: GroupTag) -> bool {
        match group {
            GroupTag::SL2 => true,
            GroupTag::O2(v) => v == self.variant,
        }
    }

    /// Whether `chi` is constant on conjugacy classes.
    pub fn is_class_function<T: Float>(&self, chi: &ClassFunction<T>) -> bool {
        if !self.owns(chi.group) {
            return false;
        }
        let els = self.elements(chi.group);
        let tol = tolerance::<T>();
        els.iter().all(|x| {
            let xi = mat_inv(self.q, x);
            els.iter().enumerate().all(|(i, g)| {
                let c = mat_mul(self.q, &mat_mul(self.q, x, g), &xi);
                let j = self.index(chi.group, &c).expect("closed under conjugation");
                (chi.values[i] - chi.values[j]).norm() < tol
            })
        })
    }
}

fn classify_sl(q: u64, g: &Mat2, logs: &EigenLogs) -> Result<SlClass, FieldError> {
    let minus = [q - 1, 0, 0, q - 1];
    if *g == IDENTITY {
        return Ok(SlClass::Central { z: 1 });
    }
    if *g == minus {
        return Ok(SlClass::Central { z: -1 });
    }
    let t = (g[0] + g[3]) % q;
    if t == 2 || t == q - 2 {
        let z: i8 = if t == 2 { 1 } else { -1 };
        let u: Vec<u64> = g.iter().map(|&x| md(x as i64 * z as i64, q)).collect();
        let n = [(u[0] + q - 1) % q, u[1], u[2], (u[3] + q - 1) % q];
        let x = if n[1] != 0 || n[3] != 0 { [0, 1] } else { [1, 0] };
        let nx = [(n[0] * x[0] + n[1] * x[1]) % q, (n[2] * x[0] + n[3] * x[1]) % q];
        let d = md(nx[0] as i64 * x[1] as i64 - nx[1] as i64 * x[0] as i64, q);
        let square = fq_legendre(d as i64, q)? == 1;
        return Ok(SlClass::Unipotent { z, square });
    }
    let disc = md(t as i64 * t as i64 - 4, q);
    Ok(if fq_legendre(disc as i64, q)? == 1 {
        SlClass::Split { log: logs.split_log(t) }
    } else {
        SlClass::Elliptic { log: logs.nonsplit_log(t) }
    })
}

fn classify_o(q: u64, variant: Variant, h: &Mat2, logs: &EigenLogs) -> OClass {
    let log = |r: &Mat2| {
        let t = (r[0] + r[3]) % q;
        match variant {
            Variant::Plus => logs.split_log(t),
            Variant::Minus => logs.nonsplit_log(t),
        }
    };
    if mat_det(q, h) == 1 {
        OClass::Rotation { log: log(h) }
    } else {
        let r = mat_mul(q, &[1, 0, 0, q - 1], h);
        OClass::Reflection { parity: (log(&r) % 2) as u8 }
    }
}

/// Comparison tolerance: `10⁻⁶`, loosened for low-precision scalars.
pub fn tolerance<T: Float>() -> T {
    let floor = T::from(1e-6).expect("representable");
    let eps = T::epsilon() * T::from(1000.0).expect("representable");
    if eps > floor {
        eps
    } else {
        floor
    }
}

fn cst<T: Float>(x: f64) -> T {
    T::from(x).expect("representable")
}

fn root_of_unity<T: Float>(k: i64, n: u64) -> Complex<T> {
    let angle = cst::<T>(2.0 * std::f64::consts::PI) * cst::<T>(k.rem_euclid(n as i64) as f64)
        / cst::<T>(n as f64);
    Complex::from_polar(T::one(), angle)
}

fn sign<T: Float>(odd: bool) -> Complex<T> {
    if odd {
        -Complex::<T>::from(T::one())
    } else {
        Complex::from(T::one())
    }
}

/// A function on the elements of one of the groups of a pair.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassFunction<T> {
    pub group: GroupTag,
    pub label: String,
    pub values: Vec<Complex<T>>,
}

impl<T: Float> ClassFunction<T> {
    /// Value at the identity.
    pub fn degree(&self) -> T {
        self.values[0].re
    }

    /// `(1/|G|) Σ χ(g) · conj ψ(g)`.
    pub fn inner(&self, other: &ClassFunction<T>) -> Complex<T> {
        let sum = self
            .values
            .iter()
            .zip(&other.values)
            .fold(Complex::from(T::zero()), |acc, (a, b)| acc + a * b.conj());
        sum / cst::<T>(self.values.len() as f64)
    }

    pub fn approx_eq(&self, other: &ClassFunction<T>) -> bool {
        self.group == other.group
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| (a - b).norm() < tolerance::<T>())
    }
}

/// Irreducible characters of `SL_2(q)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SlIrrep {
    Trivial,
    Steinberg,
    /// induced from the split-torus character of exponent `α`, `2α ≢ 0`
    Principal(i64),
    /// halves of the principal series of the quadratic character
    HalfPrincipal(bool),
    /// discrete series of the nonsplit-torus exponent `k`, `2k ≢ 0`
    Discrete(i64),
    HalfDiscrete(bool),
}

impl SlIrrep {
    pub fn label(&self) -> String {
        match self {
            SlIrrep::Trivial => "1".into(),
            SlIrrep::Steinberg => "St".into(),
            SlIrrep::Principal(a) => format!("PS({a})"),
            SlIrrep::HalfPrincipal(s) => format!("W{}", if *s { "+" } else { "-" }),
            SlIrrep::Discrete(k) => format!("DS({k})"),
            SlIrrep::HalfDiscrete(s) => format!("X{}", if *s { "+" } else { "-" }),
        }
    }

    fn value<T: Float>(&self, q: u64, class: SlClass) -> Complex<T> {
        let qf = cst::<T>(q as f64);
        let one = Complex::from(T::one());
        let zero = Complex::from(T::zero());
        let half = cst::<T>(0.5);
        // √(τ(−1) q)
        let s = Complex::from(if q % 4 == 1 { qf } else { -qf }).sqrt();
        let tau_m1 = q % 4 == 3;
        let phi0_m1 = q % 4 == 1;
        match (*self, class) {
            (SlIrrep::Trivial, _) => one,
            (SlIrrep::Steinberg, c) => match c {
                SlClass::Central { .. } => Complex::from(qf),
                SlClass::Unipotent { .. } => zero,
                SlClass::Split { .. } => one,
                SlClass::Elliptic { .. } => -one,
            },
            (SlIrrep::Principal(a), c) => match c {
                SlClass::Central { z } => sign::<T>(z < 0 && a % 2 != 0) * (qf + T::one()),
                SlClass::Unipotent { z, .. } => sign(z < 0 && a % 2 != 0),
                SlClass::Split { log } => {
                    root_of_unity::<T>(a * log as i64, q - 1) + root_of_unity(-a * log as i64, q - 1)
                }
                SlClass::Elliptic { .. } => zero,
            },
            (SlIrrep::HalfPrincipal(plus), c) => match c {
                SlClass::Central { z } => sign::<T>(z < 0 && tau_m1) * ((qf + T::one()) * half),
                SlClass::Unipotent { z, square } => {
                    let sg = if plus == square { s } else { -s };
                    sign::<T>(z < 0 && tau_m1) * (one + sg) * half
                }
                SlClass::Split { log } => sign(log % 2 == 1),
                SlClass::Elliptic { .. } => zero,
            },
            (SlIrrep::Discrete(k), c) => match c {
                SlClass::Central { z } => sign::<T>(z < 0 && k % 2 != 0) * (qf - T::one()),
                SlClass::Unipotent { z, .. } => -sign::<T>(z < 0 && k % 2 != 0),
                SlClass::Split { .. } => zero,
                SlClass::Elliptic { log } => {
                    -(root_of_unity::<T>(k * log as i64, q + 1) + root_of_unity(-k * log as i64, q + 1))
                }
            },
            (SlIrrep::HalfDiscrete(plus), c) => match c {
                SlClass::Central { z } => sign::<T>(z < 0 && phi0_m1) * ((qf - T::one()) * half),
                SlClass::Unipotent { z, square } => {
                    let sg = if plus == square { s } else { -s };
                    sign::<T>(z < 0 && phi0_m1) * (sg - one) * half
                }
                SlClass::Split { .. } => zero,
                SlClass::Elliptic { log } => -sign::<T>(log % 2 == 1),
            },
        }
    }

    /// All `q + 4` irreducibles.
    pub fn all(q: u64) -> Vec<SlIrrep> {
        let q = q as i64;
        let mut out = vec![SlIrrep::Trivial, SlIrrep::Steinberg];
        out.extend((1..(q - 1) / 2).map(SlIrrep::Principal));
        out.extend([SlIrrep::HalfPrincipal(true), SlIrrep::HalfPrincipal(false)]);
        out.extend((1..(q + 1) / 2).map(SlIrrep::Discrete));
        out.extend([SlIrrep::HalfDiscrete(true), SlIrrep::HalfDiscrete(false)]);
        out
    }

    pub fn character<T: Float>(&self, pair: &FiniteDualPair) -> ClassFunction<T> {
        ClassFunction {
            group: GroupTag::SL2,
            label: self.label(),
            values: pair.sp_classes.iter().map(|&c| self.value(pair.q, c)).collect(),
        }
    }
}

/// Irreducible characters of the dihedral group `O_2^±(q)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OIrrep {
    Trivial,
    Det,
    /// rotations by `(−1)^log`, `s₀ ↦ ±1`
    Sign(bool),
    /// induced from the rotation character of exponent `k`
    Induced(i64),
}

impl OIrrep {
    pub fn label(&self) -> String {
        match self {
            OIrrep::Trivial => "1".into(),
            OIrrep::Det => "det".into(),
            OIrrep::Sign(s) => format!("sgn{}", if *s { "+" } else { "-" }),
            OIrrep::Induced(k) => format!("Ind({k})"),
        }
    }

    fn value<T: Float>(&self, n: u64, class: OClass) -> Complex<T> {
        let one = Complex::from(T::one());
        let zero = Complex::from(T::zero());
        match (*self, class) {
            (OIrrep::Trivial, _) => one,
            (OIrrep::Det, OClass::Rotation { .. }) => one,
            (OIrrep::Det, OClass::Reflection { .. }) => -one,
            (OIrrep::Sign(_), OClass::Rotation { log }) => sign(log % 2 == 1),
            (OIrrep::Sign(s), OClass::Reflection { parity }) => sign(s == (parity == 1)),
            (OIrrep::Induced(k), OClass::Rotation { log }) => {
                root_of_unity::<T>(k * log as i64, n) + root_of_unity(-k * log as i64, n)
            }
            (OIrrep::Induced(_), OClass::Reflection { .. }) => zero,
        }
    }

    /// All irreducibles of the dihedral group of order `2n`, `n` even.
    pub fn all(n: u64) -> Vec<OIrrep> {
        let mut out = vec![OIrrep::Trivial, OIrrep::Det, OIrrep::Sign(true), OIrrep::Sign(false)];
        out.extend((1..n as i64 / 2).map(OIrrep::Induced));
        out
    }

    pub fn character<T: Float>(&self, pair: &FiniteDualPair) -> ClassFunction<T> {
        let n = pair.rotation_order();
        ClassFunction {
            group: GroupTag::O2(pair.variant),
            label: self.label(),
            values: pair.o_classes.iter().map(|&c| self.value(n, c)).collect(),
        }
    }
}

/// The irreducible character `±R_S(μ)` attached to a regular exponent of a
/// torus, with the sign making its degree positive. On `SL_2` this is the
/// discrete series (nonsplit torus) or principal series (split torus); on
/// `O_2` it is the character induced from the rotation group.
pub fn dl_regular_character<T: Float>(
    pair: &FiniteDualPair,
    group: GroupTag,
    torus: TorusKind,
    exponent: i64,
) -> Result<ClassFunction<T>, FiniteThetaError> {
    let q = pair.q;
    let order = match (group, torus) {
        (GroupTag::SL2, TorusKind::Split) => q - 1,
        (GroupTag::SL2, TorusKind::Nonsplit) => q + 1,
        (GroupTag::O2(v), t) => {
            if v != pair.variant {
                return Err(FiniteThetaError::Incompatible);
            }
            if t != pair.rotation_torus() {
                return Err(FiniteThetaError::TorusMismatch { torus: t, variant: v });
            }
            pair.rotation_order()
        }
    };
    let k = exponent.rem_euclid(order as i64);
    if 2 * k % order as i64 == 0 {
        return Err(FiniteThetaError::NotGeneralPosition { exponent, order });
    }
    let mut chi = match (group, torus) {
        (GroupTag::SL2, TorusKind::Split) => SlIrrep::Principal(k).character(pair),
        (GroupTag::SL2, TorusKind::Nonsplit) => SlIrrep::Discrete(k).character(pair),
        (GroupTag::O2(_), _) => OIrrep::Induced(k).character(pair),
    };
    chi.label = match group {
        GroupTag::SL2 => format!("R_SL2({torus:?}, {k})"),
        GroupTag::O2(_) => format!("R_O2({torus:?}, {k})"),
    };
    Ok(chi)
}

/// The Weil representation restricted to `SL_2(q) × O(V)`: `ω(g, h) =
/// ω(g) P(h)` with `P(h)φ(v) = φ(h⁻¹v)`.
pub struct RepMatrixSet<T> {
    pair: FiniteDualPair,
    dimension: usize,
    sp: Vec<Vec<Complex<T>>>,
    /// `perm[h][v]` is the index of `h · v`
    perm: Vec<Vec<usize>>,
    fourier_sign: i8,
    fourier_scalar: Complex<T>,
    traces: Vec<Vec<Complex<T>>>,
}

fn mat_mul_c<T: Float>(n: usize, a: &[Complex<T>], b: &[Complex<T>]) -> Vec<Complex<T>> {
    let mut out = vec![Complex::from(T::zero()); n * n];
    for i in 0..n {
        for k in 0..n {
            let x = a[i * n + k];
            if x.re == T::zero() && x.im == T::zero() {
                continue;
            }
            for j in 0..n {
                out[i * n + j] = out[i * n + j] + x * b[k * n + j];
            }
        }
    }
    out
}

fn max_diff<T: Float>(a: &[Complex<T>], b: &[Complex<T>]) -> T {
    a.iter().zip(b).fold(T::zero(), |m, (x, y)| m.max((x - y).norm()))
}

/// Builds `ω` on `SL_2(q) × O(V^±)`, fixing the scalar of the Fourier
/// transform by search.
pub fn build_weil_rep<T: Float>(q: u64, variant: Variant) -> Result<RepMatrixSet<T>, FiniteThetaError> {
    let pair = FiniteDualPair::new(q, variant)?;
    let n = (q * q) as usize;
    let pt = |v: usize| ((v as u64) % q, (v as u64) / q);
    let [a0, a1] = pair.form;
    let quad = |v: usize| {
        let (x, y) = pt(v);
        (a0 * x * x + a1 * y * y) % q
    };
    let bil = |v: usize, w: usize| {
        let (x1, y1) = pt(v);
        let (x2, y2) = pt(w);
        2 * (a0 * x1 * x2 + a1 * y1 * y2) % q
    };
    let psi: Vec<Complex<T>> = (0..q).map(|x| root_of_unity(x as i64, q)).collect();
    let mut unip = vec![Complex::from(T::zero()); n * n];
    for v in 0..n {
        unip[v * n + v] = psi[quad(v) as usize];
    }
    let inv_q = cst::<T>(1.0 / q as f64);
    // kernel ψ(∓(v, w)): the two transforms differ by ω(−1)
    let fouriers: Vec<Vec<Complex<T>>> = [q - 1, 1]
        .iter()
        .map(|&e| {
            let mut f = vec![Complex::from(T::zero()); n * n];
            for v in 0..n {
                for w in 0..n {
                    f[v * n + w] = psi[(e * bil(v, w) % q) as usize] * inv_q;
                }
            }
            f
        })
        .collect();
    let gens: [Mat2; 2] = [[1, 1, 0, 1], [0, 1, q - 1, 0]];
    let one = T::one();
    let scalars = [
        Complex::new(one, T::zero()),
        Complex::new(-one, T::zero()),
        Complex::new(T::zero(), one),
        Complex::new(T::zero(), -one),
    ];
    let tol = tolerance::<T>();
    let mut found = None;
    'search: for (sign, fourier) in [-1i8, 1].into_iter().zip(&fouriers) {
        for c in scalars {
            let gen_mats = [unip.clone(), fourier.iter().map(|x| x * c).collect::<Vec<_>>()];
            let sp = spanning_tree(&pair, &gens, &gen_mats, n);
            let consistent = pair.sp_elements.iter().enumerate().all(|(i, g)| {
                gens.iter().zip(&gen_mats).all(|(s, ms)| {
                    let j = pair.sp_index(&mat_mul(q, g, s)).expect("closed");
                    max_diff(&sp[j], &mat_mul_c(n, &sp[i], ms)) < tol
                })
            });
            if consistent {
                found = Some(((sign, c), sp));
                break 'search;
            }
        }
    }
    let ((fourier_sign, fourier_scalar), sp) = found.ok_or(FiniteThetaError::NormalizationFailure)?;
    let perm: Vec<Vec<usize>> = pair
        .o_elements
        .iter()
        .map(|h| {
            (0..n)
                .map(|v| {
                    let (x, y) = pt(v);
                    let hx = (h[0] * x + h[1] * y) % q;
                    let hy = (h[2] * x + h[3] * y) % q;
                    (hx + q * hy) as usize
                })
                .collect()
        })
        .collect();
    let traces = sp
        .iter()
        .map(|m| {
            perm.iter()
                .map(|ph| (0..n).fold(Complex::from(T::zero()), |acc, v| acc + m[v * n + ph[v]]))
                .collect()
        })
        .collect();
    Ok(RepMatrixSet {
        pair,
        dimension: n,
        sp,
        perm,
        fourier_sign,
        fourier_scalar,
        traces,
    })
}

fn spanning_tree<T: Float>(
    pair: &FiniteDualPair,
    gens: &[Mat2],
    gen_mats: &[Vec<Complex<T>>],
    n: usize,
) -> Vec<Vec<Complex<T>>> {
    let mut id = vec![Complex::from(T::zero()); n * n];
    for v in 0..n {
        id[v * n + v] = Complex::from(T::one());
    }
    let mut out: Vec<Option<Vec<Complex<T>>>> = vec![None; pair.sp_elements.len()];
    out[0] = Some(id);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for (s, ms) in gens.iter().zip(gen_mats) {
            let j = pair.sp_index(&mat_mul(pair.q, &pair.sp_elements[i], s)).expect("closed");
            if out[j].is_none() {
                out[j] = Some(mat_mul_c(n, out[i].as_ref().expect("visited"), ms));
                queue.push_back(j);
            }
        }
    }
    out.into_iter().map(|m| m.expect("generators span SL_2")).collect()
}

impl<T: Float> RepMatrixSet<T> {
    pub fn pair(&self) -> &FiniteDualPair {
        &self.pair
    }
    pub fn dimension(&self) -> usize {
        self.dimension
    }
    /// `±1` in the Fourier kernel `ψ(±(v, w))` used for `ω(w)`.
    pub fn fourier_sign(&self) -> i8 {
        self.fourier_sign
    }
    /// Scalar multiplying the normalized Fourier transform in `ω(w)`.
    pub fn fourier_scalar(&self) -> Complex<T> {
        self.fourier_scalar
    }

    /// `ω(g, h)` for element indices `g ∈ SL_2`, `h ∈ O(V)`, row-major.
    pub fn matrix(&self, g: usize, h: usize) -> Vec<Complex<T>> {
        let n = self.dimension;
        let m = &self.sp[g];
        let ph = &self.perm[h];
        let mut out = Vec::with_capacity(n * n);
        for v in 0..n {
            for w in 0..n {
                out.push(m[v * n + ph[w]]);
            }
        }
        out
    }

    pub fn trace(&self, g: usize, h: usize) -> Complex<T> {
        self.traces[g][h]
    }

    /// `max ‖ω(g₁g₂, h₁h₂) − ω(g₁, h₁) ω(g₂, h₂)‖` over the given products.
    pub fn product_defect<I>(&self, products: I) -> T
    where
        I: IntoIterator<Item = ((usize, usize), (usize, usize))>,
    {
        let q = self.pair.q;
        let mut worst = T::zero();
        for ((g1, h1), (g2, h2)) in products {
            let g = mat_mul(q, &self.pair.sp_elements[g1], &self.pair.sp_elements[g2]);
            let h = mat_mul(q, &self.pair.o_elements[h1], &self.pair.o_elements[h2]);
            let lhs = self.matrix(self.pair.sp_index(&g).expect("closed"), self.pair.o_index(&h).expect("closed"));
            let rhs = mat_mul_c(self.dimension, &self.matrix(g1, h1), &self.matrix(g2, h2));
            worst = worst.max(max_diff(&lhs, &rhs));
        }
        worst
    }

    /// Multiplicativity over all pairs of pairs; returns (products, defect).
    pub fn check_exhaustive(&self) -> (u64, T) {
        let els: Vec<(usize, usize)> = (0..self.pair.sp_elements.len())
            .flat_map(|g| (0..self.pair.o_elements.len()).map(move |h| (g, h)))
            .collect();
        let count = (els.len() * els.len()) as u64;
        let defect = self.product_defect(els.iter().flat_map(|&a| els.iter().map(move |&b| (a, b))));
        (count, defect)
    }

    /// Multiplicativity on `count` seeded random products.
    pub fn check_sampled(&self, count: u64, seed: u64) -> (u64, T) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (ng, nh) = (self.pair.sp_elements.len(), self.pair.o_elements.len());
        let products: Vec<_> = (0..count)
            .map(|_| {
                (
                    (rng.gen_range(0..ng), rng.gen_range(0..nh)),
                    (rng.gen_range(0..ng), rng.gen_range(0..nh)),
                )
            })
            .collect();
        (count, self.product_defect(products))
    }

    /// `dim ker(g ⊗ h − 1)` on `W ⊗ V`.
    pub fn fixed_dimension(&self, g: usize, h: usize) -> usize {
        let a = self.pair.sp_elements[g];
        let b = self.pair.o_elements[h];
        let q = self.pair.q;
        let mut k = vec![0u64; 16];
        for i in 0..2 {
            for j in 0..2 {
                for r in 0..2 {
                    for s in 0..2 {
                        k[(2 * i + r) * 4 + 2 * j + s] = a[2 * i + j] * b[2 * r + s] % q;
                    }
                }
            }
        }
        fixed_dim(&k, 4, q)
    }

    /// Whether `|tr ω(g, h)|² = q^{dim ker(g ⊗ h − 1)}`.
    pub fn trace_law_holds(&self, g: usize, h: usize) -> bool {
        let lhs = self.trace(g, h).norm_sqr();
        let rhs = cst::<T>((self.pair.q as f64).powi(self.fixed_dimension(g, h) as i32));
        (lhs - rhs).abs() < tolerance::<T>() * rhs
    }

    /// `(1/|G||H|) Σ tr ω(g, h) · conj χ_π(g) · conj χ_ρ(h)` before rounding.
    pub fn multiplicity_raw(
        &self,
        pi: &ClassFunction<T>,
        rho: &ClassFunction<T>,
    ) -> Result<Complex<T>, FiniteThetaError> {
        if pi.group != GroupTag::SL2 || rho.group != GroupTag::O2(self.pair.variant) {
            return Err(FiniteThetaError::Incompatible);
        }
        let mut total = Complex::from(T::zero());
        for (g, row) in self.traces.iter().enumerate() {
            let inner = row
                .iter()
                .zip(&rho.values)
                .fold(Complex::from(T::zero()), |acc, (t, r)| acc + t * r.conj());
            total = total + inner * pi.values[g].conj();
        }
        let order = (self.pair.sp_elements.len() * self.pair.o_elements.len()) as f64;
        Ok(total / cst::<T>(order))
    }
}

/// Multiplicity of `π ⊠ ρ` in `ω`, with an integrality check.
pub fn theta_multiplicity<T: Float>(
    omega: &RepMatrixSet<T>,
    pi: &ClassFunction<T>,
    rho: &ClassFunction<T>,
) -> Result<u64, FiniteThetaError> {
    let m = omega.multiplicity_raw(pi, rho)?;
    let r = m.re.round();
    let tol = tolerance::<T>();
    if (m.re - r).abs() >= tol || m.im.abs() >= tol || r < T::zero() {
        return Err(FiniteThetaError::NonIntegralMultiplicity {
            re: m.re.to_f64().unwrap_or(f64::NAN),
            im: m.im.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(r.to_u64().expect("nonnegative integer"))
}

/// Exponent multipliers `j` with `x s x⁻¹ = s^j` for a torus generator `s`,
/// computed in some group, against the prediction from the Weyl group of
/// the finite torus datum.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeylCheck {
    pub group: String,
    pub q: u64,
    pub m: u32,
    pub computed: Vec<u64>,
    pub predicted: Vec<u64>,
}

impl WeylCheck {
    pub fn matches(&self) -> bool {
        self.computed == self.predicted
    }
}

fn predicted_multipliers(q: u64, m: u32) -> Vec<u64> {
    let fd = FiniteTorusDatum {
        q,
        ms: vec![m],
        exponents: vec![1],
        source: vec![0],
    };
    weyl_orbit(&fd, &[1]).into_iter().map(|v| v[0] as u64).collect()
}

fn multipliers_by_enumeration(q: u64, els: &[Mat2], s: &Mat2, order: u64) -> Vec<u64> {
    let mut powers = HashMap::new();
    let mut x = IDENTITY;
    for j in 0..order {
        powers.insert(x, j);
        x = mat_mul(q, &x, s);
    }
    let set: BTreeSet<u64> = els
        .iter()
        .filter_map(|x| {
            let c = mat_mul(q, &mat_mul(q, x, s), &mat_inv(q, x));
            powers.get(&c).copied()
        })
        .collect();
    set.into_iter().collect()
}

impl FiniteDualPair {
    /// Normalizer of the nonsplit torus inside the enumerated `SL_2(q)`.
    pub fn sl2_weyl_check(&self) -> WeylCheck {
        let s = self
            .sp_elements
            .iter()
            .zip(&self.sp_classes)
            .find(|(_, c)| matches!(c, SlClass::Elliptic { log } if gcd(*log, self.q + 1) == 1))
            .map(|(g, _)| *g)
            .expect("nonsplit torus has a generator");
        WeylCheck {
            group: "SL2".into(),
            q: self.q,
            m: 1,
            computed: multipliers_by_enumeration(self.q, &self.sp_elements, &s, self.q + 1),
            predicted: predicted_multipliers(self.q, 1),
        }
    }

    /// Normalizer of `SO(V)` inside `O(V)`; for `V⁻` the rotation group is
    /// the nonsplit torus.
    pub fn o2_weyl_check(&self) -> WeylCheck {
        let n = self.rotation_order();
        let r = self
            .o_elements
            .iter()
            .zip(&self.o_classes)
            .find(|(_, c)| matches!(c, OClass::Rotation { log } if gcd(*log, n) == 1))
            .map(|(h, _)| *h)
            .expect("rotation group is cyclic");
        WeylCheck {
            group: format!("O2{}", if self.variant == Variant::Plus { "+" } else { "-" }),
            q: self.q,
            m: 1,
            computed: multipliers_by_enumeration(self.q, &self.o_elements, &r, n),
            predicted: predicted_multipliers(self.q, 1),
        }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Multipliers realized by `Sp_{2m}(q)` on `L¹ ⊂ F_{q^{2m}}^×` acting on
/// `(F_{q^{2m}}, Tr(c x ȳ))`, found by solving `g M_s = M_{s^j} g` and
/// searching the solution space for a symplectic `g`.
pub fn symplectic_weyl_check(q: u64, m: u32) -> Result<WeylCheck, FiniteThetaError> {
    if q % 2 == 0 || !is_prime(q) {
        return Err(FiniteThetaError::UnsupportedQ(q));
    }
    let n = 2 * m as usize;
    let field = FqDescriptor::tower(q, 2 * m)?;
    let qm = q.pow(m);
    let prim = field.primitive_element();
    let xi = field.generator();
    let basis: Vec<FqElement> = (0..n as u64).map(|j| xi.pow(j)).collect();
    let c = prim.pow((qm + 1) / 2);
    let trace = |x: &FqElement| {
        (0..n as u32).fold(field.zero(), |acc, k| acc + x.frobenius(k)).coeffs()[0]
    };
    let form: Vec<u64> = (0..n * n)
        .map(|ij| trace(&(&(&c * &basis[ij / n]) * &basis[ij % n].frobenius(m))))
        .collect();
    let mult = |s: &FqElement| -> Vec<u64> {
        let mut out = vec![0u64; n * n];
        for (j, b) in basis.iter().enumerate() {
            for (i, &v) in (s * b).coeffs().iter().enumerate() {
                out[i * n + j] = v;
            }
        }
        out
    };
    let s = prim.pow(qm - 1);
    let ms = mult(&s);
    let mut computed = Vec::new();
    for j in 1..=qm {
        if gcd(j, qm + 1) != 1 {
            continue;
        }
        let msj = mult(&s.pow(j));
        let mut rows = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                let mut row = vec![0u64; n * n];
                for k in 0..n {
                    row[a * n + k] = (row[a * n + k] + ms[k * n + b]) % q;
                    row[k * n + b] = (row[k * n + b] + q - msj[a * n + k]) % q;
                }
                rows.push(row);
            }
        }
        let kernel = nullspace(rows, n * n, q);
        if realizes_symplectic(&kernel, &form, n, q) {
            computed.push(j);
        }
    }
    Ok(WeylCheck {
        group: format!("Sp{}", n),
        q,
        m,
        computed,
        predicted: predicted_multipliers(q, m),
    })
}

fn realizes_symplectic(kernel: &[Vec<u64>], form: &[u64], n: usize, q: u64) -> bool {
    let d = kernel.len();
    let total = q.pow(d as u32);
    (1..total).any(|mut idx| {
        let mut g = vec![0u64; n * n];
        for b in kernel {
            let lam = idx % q;
            idx /= q;
            for (x, &v) in g.iter_mut().zip(b) {
                *x = (*x + lam * v) % q;
            }
        }
        // gᵀ J g = J
        (0..n).all(|a| {
            (0..n).all(|b| {
                let mut acc = 0;
                for i in 0..n {
                    for k in 0..n {
                        acc = (acc + g[i * n + a] * form[i * n + k] % q * g[k * n + b]) % q;
                    }
                }
                acc == form[a * n + b]
            })
        })
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub variant: Variant,
    pub kernel_sign: i8,
    pub scalar: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomomorphismCheck {
    pub variant: Variant,
    pub exhaustive: bool,
    pub products: u64,
    pub max_defect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplicityEntry {
    pub exponent: i64,
    pub variant: Variant,
    pub rho: String,
    pub multiplicity: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftRecord {
    pub exponent: i64,
    pub variant: Variant,
    pub rho: String,
    pub matches_exponent: bool,
    pub matches_inverse: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionAccount {
    pub variant: Variant,
    pub total: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteThetaReport {
    pub q: u64,
    pub weil_dimension: usize,
    pub normalizations: Vec<Normalization>,
    pub homomorphism: Vec<HomomorphismCheck>,
    pub trace_law_pairs: u64,
    pub max_integrality_defect: f64,
    pub regular_exponents: Vec<i64>,
    pub entries: Vec<MultiplicityEntry>,
    pub lifts: Vec<LiftRecord>,
    pub dimension_accounting: Vec<DimensionAccount>,
    pub weyl: Vec<WeylCheck>,
}

fn check_orthonormal<T: Float>(
    pair: &FiniteDualPair,
    chars: &[ClassFunction<T>],
) -> Result<(), FiniteThetaError> {
    let tol = tolerance::<T>();
    for (i, a) in chars.iter().enumerate() {
        if !pair.is_class_function(a) {
            return Err(failure("class function", None, a.label.clone()));
        }
        for (j, b) in chars.iter().enumerate() {
            let want = if i == j { T::one() } else { T::zero() };
            let got = a.inner(b);
            if (got.re - want).abs() >= tol || got.im.abs() >= tol {
                return Err(failure("orthogonality", None, format!(
                    "<{}, {}> = {:?} + {:?}i",
                    a.label,
                    b.label,
                    got.re.to_f64(),
                    got.im.to_f64()
                )));
            }
        }
    }
    let order = chars.first().map_or(0, |c| pair.group_order(c.group));
    let sum = chars.iter().fold(T::zero(), |acc, c| acc + c.degree() * c.degree());
    if (sum - cst::<T>(order as f64)).abs() >= tol {
        return Err(failure("orthogonality", None, "degrees do not account for the group order".into()));
    }
    Ok(())
}

/// Verifies the finite theta correspondence for `(SL_2(q), O_2^±(q))`:
/// every regular nonsplit-torus character lifts to `V⁻` with multiplicity
/// one against exactly the induced character of exponent `±μ`, and to
/// nothing on `V⁺`.
pub fn verify_finite_theta<T: Float>(q: u64) -> Result<FiniteThetaReport, FiniteThetaError> {
    let reps = [build_weil_rep::<T>(q, Variant::Plus)?, build_weil_rep::<T>(q, Variant::Minus)?];
    let tol = tolerance::<T>();
    let f64_of = |x: T| x.to_f64().unwrap_or(f64::NAN);
    let mut homomorphism = Vec::new();
    let mut trace_law_pairs = 0;
    for rep in &reps {
        let exhaustive = q <= 3;
        let (products, defect) = if exhaustive {
            rep.check_exhaustive()
        } else {
            rep.check_sampled(SAMPLED_PRODUCTS, q)
        };
        if defect >= tol {
            return Err(failure("homomorphism", None, format!("{:?}: defect {}", rep.pair.variant, f64_of(defect))));
        }
        homomorphism.push(HomomorphismCheck {
            variant: rep.pair.variant,
            exhaustive,
            products,
            max_defect: f64_of(defect),
        });
        for g in 0..rep.pair.sp_elements.len() {
            for h in 0..rep.pair.o_elements.len() {
                if !rep.trace_law_holds(g, h) {
                    let detail = format!(
                        "{:?}: g = {:?}, h = {:?}",
                        rep.pair.variant, rep.pair.sp_elements[g], rep.pair.o_elements[h]
                    );
                    return Err(failure("trace law", None, detail));
                }
                trace_law_pairs += 1;
            }
        }
    }

    let sl: Vec<(SlIrrep, ClassFunction<T>)> =
        SlIrrep::all(q).into_iter().map(|r| (r, r.character(&reps[0].pair))).collect();
    let sl_chars: Vec<ClassFunction<T>> = sl.iter().map(|(_, c)| c.clone()).collect();
    check_orthonormal(&reps[0].pair, &sl_chars)?;
    let o: Vec<Vec<ClassFunction<T>>> = reps
        .iter()
        .map(|rep| {
            let chars: Vec<_> = OIrrep::all(rep.pair.rotation_order())
                .into_iter()
                .map(|r| r.character(&rep.pair))
                .collect();
            check_orthonormal(&rep.pair, &chars).map(|_| chars)
        })
        .collect::<Result<_, _>>()?;

    let mut max_defect = T::zero();
    let mut mult = |rep: &RepMatrixSet<T>, pi: &ClassFunction<T>, rho: &ClassFunction<T>| {
        let raw = rep.multiplicity_raw(pi, rho)?;
        max_defect = max_defect.max((raw.re - raw.re.round()).abs()).max(raw.im.abs());
        theta_multiplicity(rep, pi, rho)
    };

    let mut dimension_accounting = Vec::new();
    for (rep, chars) in reps.iter().zip(&o) {
        let mut total = 0;
        for pi in &sl_chars {
            for rho in chars {
                let k = mult(rep, pi, rho)?;
                total += k * pi.degree().round().to_u64().unwrap_or(0) * rho.degree().round().to_u64().unwrap_or(0);
            }
        }
        if total != q * q {
            return Err(failure("dimension accounting", None, format!("{:?}: {total} != {}", rep.pair.variant, q * q)));
        }
        dimension_accounting.push(DimensionAccount {
            variant: rep.pair.variant,
            total,
        });
    }

    let order = (q + 1) as i64;
    let regular_exponents: Vec<i64> = (1..order).filter(|k| 2 * k % order != 0).collect();
    let mut entries = Vec::new();
    let mut lifts = Vec::new();
    let minus = &reps[1];
    for &k in &regular_exponents {
        let pi = dl_regular_character::<T>(&minus.pair, GroupTag::SL2, TorusKind::Nonsplit, k)?;
        let pi_inv = dl_regular_character::<T>(&minus.pair, GroupTag::SL2, TorusKind::Nonsplit, -k)?;
        if !pi.approx_eq(&pi_inv) {
            return Err(failure("inverse exponent", Some(k), "R(μ) != R(μ⁻¹)".into()));
        }
        let mut hits = Vec::new();
        for (rep, chars) in reps.iter().zip(&o) {
            for rho in chars {
                let m = mult(rep, &pi, rho)?;
                entries.push(MultiplicityEntry {
                    exponent: k,
                    variant: rep.pair.variant,
                    rho: rho.label.clone(),
                    multiplicity: m,
                });
                if m != 0 {
                    hits.push((rep.pair.variant, rho, m));
                }
            }
        }
        let [(variant, rho, 1)] = hits[..] else {
            let detail = hits
                .iter()
                .map(|(v, r, m)| format!("{v:?}/{}: {m}", r.label))
                .collect::<Vec<_>>()
                .join(", ");
            return Err(failure("multiplicity pattern", Some(k), format!("nonzero: [{detail}]")));
        };
        if variant != Variant::Minus {
            return Err(failure("parity", Some(k), format!("lifted to {variant:?}")));
        }
        let induced = |e| dl_regular_character::<T>(&minus.pair, GroupTag::O2(Variant::Minus), TorusKind::Nonsplit, e);
        let record = LiftRecord {
            exponent: k,
            variant,
            rho: rho.label.clone(),
            matches_exponent: rho.approx_eq(&induced(k)?),
            matches_inverse: rho.approx_eq(&induced(-k)?),
        };
        if !(record.matches_exponent && record.matches_inverse) {
            return Err(failure("lifted character", Some(k), format!("{} is not Ind(±{k})", rho.label)));
        }
        lifts.push(record);
    }

    let mut weyl = vec![
        reps[1].pair.sl2_weyl_check(),
        reps[1].pair.o2_weyl_check(),
        symplectic_weyl_check(q, 1)?,
        symplectic_weyl_check(q, 2)?,
    ];
    weyl.dedup();
    if let Some(bad) = weyl.iter().find(|w| !w.matches()) {
        return Err(failure("weyl group", None, format!("{bad:?}")));
    }

    Ok(FiniteThetaReport {
        q,
        weil_dimension: reps[0].dimension,
        normalizations: reps
            .iter()
            .map(|r| Normalization {
                variant: r.pair.variant,
                kernel_sign: r.fourier_sign,
                scalar: [f64_of(r.fourier_scalar.re), f64_of(r.fourier_scalar.im)],
            })
            .collect(),
        homomorphism,
        trace_law_pairs,
        max_integrality_defect: f64_of(max_defect),
        regular_exponents,
        entries,
        lifts,
        dimension_accounting,
        weyl,
    })
}
