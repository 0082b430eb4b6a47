//! Acceptance criteria. Each criterion prints one PASS or FAIL line; the
//! process exits nonzero if any criterion fails.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use theta_core::finitetheta::verify_finite_theta;
use theta_core::localfield::{LeadingTerm, SquareClass, Sym, TameField, TameFieldDescriptor};
use theta_core::quadform::{
    hilbert_brute_force, hilbert_classes, hilbert_symbol, invariants_gram, invariants_transfer,
};
use theta_core::sample;
use theta_core::theta::{
    distinction_transport, distinguished_check, lift, lift_depth_zero, parity_predict,
    parity_predict_as_printed, TauChoice,
};
use theta_core::torusdata::{datum_equivalent, EquivalenceMode};

struct Outcome {
    ok: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Outcome {
    Outcome { ok: true, detail: detail.into() }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome { ok: false, detail: detail.into() }
}

fn run(n: u32, name: &str, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let ok = out.ok && elapsed < budget;
    let timing = format!("{:.2}s of {}s", elapsed.as_secs_f64(), budget.as_secs());
    println!(
        "{} criterion {n}: {name} ({}; {timing})",
        if ok { "PASS" } else { "FAIL" },
        out.detail
    );
    ok
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn criterion_1() -> Outcome {
    let mut r = rng(1);
    let mut printed_disagreements = 0;
    let mut disc_one = 0;
    let total = 500;
    for i in 0..total {
        let p = if i % 2 == 0 { 5 } else { 7 };
        let d = sample::depth_zero_datum(&mut r, p, 4);
        let res = match lift_depth_zero(&d, TauChoice::Canonical) {
            Ok(res) => res,
            Err(e) => return fail(format!("datum {i}: {e}")),
        };
        let (predicted, _) = parity_predict(&d).expect("depth zero");
        if res.target_invariants != predicted {
            return fail(format!("datum {i}: lifted {:?}, predicted {:?}", res.target_invariants, predicted));
        }
        if predicted.disc.is_one() {
            disc_one += 1;
        }
        let (printed, _) = parity_predict_as_printed(&d).expect("depth zero");
        if printed != predicted {
            printed_disagreements += 1;
        }
    }
    println!(
        "INFO criterion 1: the table as printed disagrees with the lifted invariants on {printed_disagreements} of {total} data; {disc_one} of them have disc 1"
    );
    pass(format!("{total} depth-zero data match the parity table"))
}

fn criterion_2() -> Outcome {
    let mut r = rng(2);
    let mut mixed = 0;
    for i in 0..500 {
        let p = if i % 2 == 0 { 5 } else { 7 };
        let d = sample::mixed_datum(&mut r, p, 4);
        if !d.is_depth_zero() {
            mixed += 1;
        }
        let res = match lift(&d, TauChoice::Canonical) {
            Ok(res) => res,
            Err(e) => return fail(format!("datum {i}: {e}")),
        };
        if res.target_invariants.dim as u32 != 2 * d.n() || res.lifted.n() != d.n() {
            return fail(format!("datum {i}: dim {} for n = {}", res.target_invariants.dim, d.n()));
        }
    }
    pass(format!("500 data, {mixed} with positive-depth blocks, all of dimension 2n"))
}

fn criterion_3() -> Outcome {
    let mut lines = Vec::new();
    for q in [3, 5] {
        match verify_finite_theta::<f64>(q) {
            Ok(rep) => {
                if rep.max_integrality_defect >= 1e-6 {
                    return fail(format!("q = {q}: integrality defect {:e}", rep.max_integrality_defect));
                }
                lines.push(format!(
                    "q = {q}: {} regular exponents lift to V⁻ with multiplicity 1, defect {:.1e}",
                    rep.lifts.len(),
                    rep.max_integrality_defect
                ));
            }
            Err(e) => return fail(format!("q = {q}: {e}")),
        }
    }
    pass(lines.join("; "))
}

fn criterion_4() -> Outcome {
    for q in [3u64, 5, 7] {
        let h = |a, b| hilbert_classes(a, b, q);
        for a in SquareClass::ALL {
            for b in SquareClass::ALL {
                if h(a, b) != h(b, a) {
                    return fail(format!("p = {q}: asymmetric at ({a}, {b})"));
                }
                for c in SquareClass::ALL {
                    if h(a, b.mul(c)) != h(a, b) * h(a, c) {
                        return fail(format!("p = {q}: not bimultiplicative at ({a}, {b}, {c})"));
                    }
                }
            }
            if h(a, a.mul(SquareClass::minus_one(q))) != 1 {
                return fail(format!("p = {q}: (a, -a) != 1 at {a}"));
            }
            if !a.is_one() && SquareClass::ALL.iter().all(|&b| h(a, b) == 1) {
                return fail(format!("p = {q}: {a} is in the radical"));
            }
        }
    }
    let mut r = rng(4);
    for i in 0..100 {
        let p = [3u64, 5, 7][i % 3];
        let field = TameField::get(TameFieldDescriptor::base(p, 1)).expect("Q_p");
        let draw = |r: &mut ChaCha8Rng| {
            let res = field.residue().element(r.gen_range(1..p));
            LeadingTerm::new(&field, r.gen_range(-3..4), res, Sym::None).expect("nonzero")
        };
        let a = draw(&mut r);
        let b = draw(&mut r);
        let (Ok(x), Ok(y)) = (hilbert_symbol(&a, &b), hilbert_brute_force(&a, &b)) else {
            return fail(format!("pair {i}: evaluation error"));
        };
        if x != y {
            return fail(format!("pair {i}: formula {x}, brute force {y}"));
        }
    }
    pass("4×4 tables for p ∈ {3, 5, 7} and 100 random pairs against brute-force solubility")
}

fn criterion_5() -> Outcome {
    let mut r = rng(5);
    for i in 0..100 {
        let p = if i % 2 == 0 { 5 } else { 7 };
        let d = sample::mixed_datum(&mut r, p, 4);
        let mut lifts = Vec::new();
        for s in 0..5u64 {
            match lift(&d, TauChoice::Seeded(1000 * i + s)) {
                Ok(res) => lifts.push(res),
                Err(e) => return fail(format!("datum {i}, seed {s}: {e}")),
            }
        }
        for a in &lifts {
            if a.target_invariants != lifts[0].target_invariants {
                return fail(format!("datum {i}: invariants depend on the seed"));
            }
            for b in &lifts {
                if !datum_equivalent(&a.lifted, &b.lifted, EquivalenceMode::UpToWeyl).unwrap_or(false) {
                    return fail(format!("datum {i}: inequivalent lifts"));
                }
            }
        }
    }
    pass("100 data × 5 seeds: lifts pairwise equivalent, invariants identical")
}

fn criterion_6() -> Outcome {
    let mut r = rng(6);
    let mut direct = 0;
    let mut three_mod_four = 0;
    let total = 100;
    for i in 0..total {
        let p = if i % 2 == 0 { 5 } else { 7 };
        let w = sample::witness(&mut r, p, 3, 0);
        if p % 4 == 3 {
            three_mod_four += 1;
        }
        match distinguished_check(&w) {
            Ok(v) if v.distinguished => {}
            Ok(_) => return fail(format!("witness {i}: not distinguished")),
            Err(e) => return fail(format!("witness {i}: {e}")),
        }
        let t = match distinction_transport(&w) {
            Ok(t) => t,
            Err(e) => return fail(format!("witness {i}: {e}")),
        };
        let embs = w.check().expect("checked above");
        for (k, (x, emb)) in t.twisted.iter().zip(&embs).enumerate() {
            if emb.sigma(x).ok().as_ref() != Some(x) {
                return fail(format!("witness {i}: twisted factor {k} is not σ-fixed"));
            }
        }
        if !t.reextension_equivalent {
            return fail(format!("witness {i}: re-extension is not equivalent to the ι-twisted lift"));
        }
        if t.direct_equivalent {
            direct += 1;
        }
    }
    println!(
        "INFO criterion 6: re-extension also equals the untwisted E-lift on {direct} of {total} witnesses; {three_mod_four} have q ≡ 3 mod 4"
    );
    pass(format!("{total} witnesses: distinguished, σ(c_θ) = −c_θ, σ-fixed F-structure, re-extension equivalent"))
}

fn criterion_7() -> Outcome {
    let mut r = rng(7);
    let mut ramified = 0;
    for i in 0..500 {
        let p = [3u64, 5, 7][i % 3];
        let cs = sample::orthogonal_cs(&mut r, p, 4);
        if cs.iter().any(|c| c.descriptor().step.is_some_and(|s| s.is_ramified())) {
            ramified += 1;
        }
        let (a, b) = match (invariants_transfer(&cs), invariants_gram(&cs, None)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => return fail(format!("datum {i}: {e}")),
        };
        if a != b {
            return fail(format!("datum {i}: transfer {a:?}, gram {b:?}"));
        }
    }
    pass(format!("500 orthogonal data ({ramified} with ramified steps)"))
}

fn main() {
    let secs = Duration::from_secs;
    let results = [
        run(1, "remark table reproduction", secs(60), criterion_1),
        run(2, "equal-rank dimension law", secs(60), criterion_2),
        run(3, "finite theta verification", secs(300), criterion_3),
        run(4, "Hilbert symbol suite", secs(30), criterion_4),
        run(5, "choice independence", secs(60), criterion_5),
        run(6, "distinction transport", secs(60), criterion_6),
        run(7, "oracle equivalence", secs(120), criterion_7),
    ];
    if results.iter().any(|ok| !ok) {
        std::process::exit(1);
    }
}
