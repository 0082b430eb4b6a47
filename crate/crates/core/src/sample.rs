//! Random valid data for sweeps and property tests.

use num_rational::Rational64;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::localfield::{
    base_uniformizer, canonical_tau, from_circ, lt_mul, LeadingTerm, QuadStep, Sym, TameField,
    TameFieldDescriptor,
};
use crate::theta::{DistinctionWitness, FStructureFactor, KLEmbedding};
use crate::torusdata::{validate, Factor, GammaLevel, Polarity, TorusDatum};

/// A random composition of `n` into positive parts.
pub fn composition<R: Rng>(rng: &mut R, n: u32) -> Vec<u32> {
    let mut parts = Vec::new();
    let mut left = n;
    while left > 0 {
        let m = rng.gen_range(1..=left);
        parts.push(m);
        left -= m;
    }
    parts.shuffle(rng);
    parts
}

fn unit<R: Rng>(rng: &mut R, field: &std::sync::Arc<TameField>) -> LeadingTerm {
    let circ = field.residue_circ();
    let r = circ.element(rng.gen_range(1..circ.order()));
    LeadingTerm::new(field, 0, field.embed_circ(&r), Sym::Fixed).expect("nonzero residue")
}

fn base_power(field: &std::sync::Arc<TameField>, k: i64) -> LeadingTerm {
    let p = base_uniformizer(field);
    let mut acc = LeadingTerm::one(field);
    for _ in 0..k.unsigned_abs() {
        acc = lt_mul(&acc, &p).expect("same field");
    }
    if k < 0 {
        crate::localfield::lt_inv(&acc)
    } else {
        acc
    }
}

/// Random anti element of `L` of valuation `val` (odd `val` for a ramified
/// step).
pub fn random_anti<R: Rng>(rng: &mut R, t: TameFieldDescriptor, val: i64) -> LeadingTerm {
    let field = TameField::get(t).expect("valid tower");
    match t.step {
        Some(QuadStep::Unramified) => {
            let tau = canonical_tau(&field).expect("unramified");
            let x = lt_mul(&tau, &unit(rng, &field)).expect("same field");
            lt_mul(&x, &base_power(&field, val)).expect("same field")
        }
        _ => {
            debug_assert!(val.rem_euclid(2) == 1);
            let res = field.residue();
            LeadingTerm::new(&field, val, res.element(rng.gen_range(1..res.order())), Sym::Anti)
                .expect("nonzero residue")
        }
    }
}

/// Random fixed element of `L` with `L°`-valuation `k`.
pub fn random_fixed<R: Rng>(rng: &mut R, t: TameFieldDescriptor, k: i64) -> LeadingTerm {
    let field = TameField::get(t).expect("valid tower");
    let circ = TameField::get(t.circ()).expect("valid tower");
    let res = circ.residue();
    let y = LeadingTerm::new(&circ, k, res.element(rng.gen_range(1..res.order())), Sym::Fixed)
        .expect("nonzero residue");
    from_circ(&field, &y).expect("same tower")
}

fn random_step<R: Rng>(rng: &mut R) -> QuadStep {
    *[QuadStep::Unramified, QuadStep::Ramified, QuadStep::RamifiedTwisted]
        .choose(rng)
        .expect("nonempty")
}

/// Random depth-zero symplectic datum with `n ≤ max_n` and a character in
/// general position.
pub fn depth_zero_datum<R: Rng>(rng: &mut R, p: u64, max_n: u32) -> TorusDatum {
    let base = TameFieldDescriptor::base(p, 1);
    loop {
        let n = rng.gen_range(1..=max_n);
        let factors: Vec<Factor> = composition(rng, n)
            .into_iter()
            .map(|m| {
                let t = TameFieldDescriptor::new(p, 1, m, QuadStep::Unramified);
                let val = rng.gen_range(-2..=3);
                let c = random_anti(rng, t, val);
                let modulus = p.pow(m) as i64 + 1;
                Factor::new(c, rng.gen_range(0..modulus), vec![])
            })
            .collect();
        let d = TorusDatum::new(base, factors, Polarity::Symplectic);
        if validate(&d).is_valid() {
            return d;
        }
    }
}

/// Random positive-depth factor with top depth `r`.
pub fn positive_factor<R: Rng>(rng: &mut R, t: TameFieldDescriptor, r: Rational64) -> Factor {
    let e = t.e() as i64;
    let c_val = if t.e() == 2 { 2 * rng.gen_range(-1..=1) + 1 } else { rng.gen_range(-1..=2) };
    let c = random_anti(rng, t, c_val);
    let mut levels = Vec::new();
    // optionally a shallower level below the top one
    let step = Rational64::new(1, e);
    if r > step && rng.gen_bool(0.3) {
        let r0 = if e == 2 { Rational64::new(1, 2) } else { Rational64::from_integer(1) };
        if r0 < r {
            levels.push(r0);
        }
    }
    levels.push(r);
    let gamma_levels = levels
        .into_iter()
        .map(|r| GammaLevel {
            r,
            gamma: random_anti(rng, t, (-r * e).to_integer()),
        })
        .collect();
    Factor::new(c, rng.gen_range(0..8), gamma_levels)
}

fn random_depth<R: Rng>(rng: &mut R, ramified: bool) -> Rational64 {
    if ramified {
        Rational64::new(2 * rng.gen_range(0..3) + 1, 2)
    } else {
        Rational64::from_integer(rng.gen_range(1..=3))
    }
}

/// Random valid symplectic datum mixing depth-zero and positive-depth
/// factors.
pub fn mixed_datum<R: Rng>(rng: &mut R, p: u64, max_n: u32) -> TorusDatum {
    let base = TameFieldDescriptor::base(p, 1);
    loop {
        let n = rng.gen_range(1..=max_n);
        let mut shared: Vec<Rational64> = Vec::new();
        let factors: Vec<Factor> = composition(rng, n)
            .into_iter()
            .map(|m| {
                if rng.gen_bool(0.4) {
                    let t = TameFieldDescriptor::new(p, 1, m, QuadStep::Unramified);
                    let val = rng.gen_range(-1..=2);
                    let c = random_anti(rng, t, val);
                    Factor::new(c, rng.gen_range(0..p.pow(m) as i64 + 1), vec![])
                } else {
                    let step = random_step(rng);
                    let t = TameFieldDescriptor::new(p, 1, m, step);
                    // reuse a depth sometimes so that blocks have several factors
                    let r = match shared.choose(rng) {
                        Some(&r) if rng.gen_bool(0.5) && (r.is_integer() != step.is_ramified()) => r,
                        _ => random_depth(rng, step.is_ramified()),
                    };
                    shared.push(r);
                    positive_factor(rng, t, r)
                }
            })
            .collect();
        let d = TorusDatum::new(base, factors, Polarity::Symplectic);
        if validate(&d).is_valid() {
            return d;
        }
    }
}

/// Random `σ`-fixed values `c_i` of an orthogonal datum with `Σ m_i ≤ max_n`.
pub fn orthogonal_cs<R: Rng>(rng: &mut R, p: u64, max_n: u32) -> Vec<LeadingTerm> {
    let n = rng.gen_range(1..=max_n);
    composition(rng, n)
        .into_iter()
        .map(|m| {
            let t = TameFieldDescriptor::new(p, 1, m, random_step(rng));
            let k = rng.gen_range(-3..=3);
            random_fixed(rng, t, k)
        })
        .collect()
}

/// Random distinction witness over `E = F(√u)`, `F = Q_p`, with factors of
/// odd degree `m_i`, `Σ m_i ≤ max_n`, ramified `K_i/K_i°`, `σ`-anti gamma
/// data and depth-zero character `chi0 ≡ parity (mod 2)`.
pub fn witness<R: Rng>(rng: &mut R, p: u64, max_n: u32, parity: i64) -> DistinctionWitness {
    let base_f = TameFieldDescriptor::base(p, 1);
    let e = TameFieldDescriptor::base(p, 2);
    let n = rng.gen_range(1..=max_n);
    let mut ms = Vec::new();
    let mut left = n;
    while left > 0 {
        let odd: Vec<u32> = (1..=left).filter(|m| m % 2 == 1).collect();
        let m = *odd.choose(rng).expect("1 is odd");
        ms.push(m);
        left -= m;
    }
    let mut f_structure = Vec::new();
    let mut factors = Vec::new();
    for m in ms {
        let k_step = *[QuadStep::Ramified, QuadStep::RamifiedTwisted].choose(rng).expect("nonempty");
        let k = TameFieldDescriptor::new(p, 1, m, k_step);
        let l = TameFieldDescriptor::new(p, 2, m, QuadStep::Ramified);
        let emb = KLEmbedding::new(k, l).expect("valid towers");
        let ck_val = 2 * rng.gen_range(-1..=1) + 1;
        let ck = random_anti(rng, k, ck_val);
        let cl = emb.embed(&ck).expect("embedding");
        let lf = TameField::get(l).expect("valid tower");
        let r = random_depth(rng, true);
        let val = (-r * 2).to_integer();
        let res = lf.residue();
        let gamma = loop {
            let g = LeadingTerm::new(&lf, val, res.element(rng.gen_range(1..res.order())), Sym::Anti)
                .expect("nonzero residue");
            if emb.sigma(&g).expect("sigma") == crate::localfield::lt_neg(&g) {
                break g;
            }
        };
        let chi0 = 2 * rng.gen_range(0..4) + parity.rem_euclid(2);
        factors.push(Factor::new(cl, chi0, vec![GammaLevel { r, gamma }]));
        f_structure.push(FStructureFactor { c: ck });
    }
    DistinctionWitness {
        base_f,
        datum_over_e: TorusDatum::new(e, factors, Polarity::Symplectic),
        f_structure,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generators_produce_valid_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for p in [5, 7] {
            for _ in 0..20 {
                assert!(validate(&depth_zero_datum(&mut rng, p, 4)).is_valid());
                assert!(validate(&mixed_datum(&mut rng, p, 4)).is_valid());
                for c in orthogonal_cs(&mut rng, p, 4) {
                    c.check_sym().unwrap();
                }
            }
            for _ in 0..5 {
                witness(&mut rng, p, 3, 0).check().unwrap();
            }
        }
    }
}
