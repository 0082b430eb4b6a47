use std::path::{Path, PathBuf};
use std::process::Command;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use theta_cli::DatumFile;
use theta_core::localfield::{canonical_tau, lt_mul, LeadingTerm, QuadStep, Sym, TameField, TameFieldDescriptor};
use theta_core::quadform::{invariants_transfer, QuadInvariants};
use theta_core::sample;
use theta_core::torusdata::{Factor, Polarity, TorusDatum};

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

fn fixture(name: &str) -> PathBuf {
    data_dir().join(format!("{name}.json"))
}

fn tau_factor(p: u64, val: i64, chi0: i64) -> Factor {
    let l = TameField::get(TameFieldDescriptor::new(p, 1, 1, QuadStep::Unramified)).unwrap();
    let scale = LeadingTerm::new(&l, val, l.residue().one(), Sym::Fixed).unwrap();
    Factor::new(lt_mul(&canonical_tau(&l).unwrap(), &scale).unwrap(), chi0, vec![])
}

fn symp(factors: Vec<Factor>) -> TorusDatum {
    TorusDatum::new(TameFieldDescriptor::base(5, 1), factors, Polarity::Symplectic)
}

fn fixtures() -> Vec<(&'static str, DatumFile)> {
    let l = TameField::get(TameFieldDescriptor::new(5, 1, 1, QuadStep::Unramified)).unwrap();
    let fixed = LeadingTerm::new(&l, 0, l.residue().one(), Sym::Fixed).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mixed = loop {
        let d = sample::mixed_datum(&mut rng, 5, 4);
        if !d.is_depth_zero() && d.factors.len() > 1 {
            break d;
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    vec![
        ("depth_zero_single", DatumFile::from_datum(&symp(vec![tau_factor(5, 0, 1)]))),
        ("both_odd", DatumFile::from_datum(&symp(vec![tau_factor(5, 0, 1), tau_factor(5, 1, 2)]))),
        ("mixed", DatumFile::from_datum(&mixed)),
        ("fixed_flag", DatumFile::from_datum(&symp(vec![Factor::new(fixed, 1, vec![])]))),
        ("witness", DatumFile::from_witness(&sample::witness(&mut rng, 5, 3, 0))),
        ("not_distinguished", DatumFile::from_witness(&sample::witness(&mut rng, 5, 3, 1))),
    ]
}

fn pretty(file: &DatumFile) -> String {
    let mut s = serde_json::to_string_pretty(file).unwrap();
    s.push('\n');
    s
}

struct Run {
    code: i32,
    stdout: Vec<u8>,
}

impl Run {
    fn json(&self) -> Value {
        serde_json::from_slice(&self.stdout).expect("report is JSON")
    }
}

fn cli(args: &[&str], env: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_theta-param"));
    cmd.args(args).env_remove("THETA_PARAM_PRECISION");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: out.stdout,
    }
}

fn on(cmd: &str, name: &str) -> Run {
    cli(&[cmd, fixture(name).to_str().unwrap()], &[])
}

fn invariants(v: &Value) -> QuadInvariants {
    serde_json::from_value(v.clone()).unwrap()
}

#[test]
fn fixtures_are_current() {
    let bless = std::env::var_os("BLESS_FIXTURES").is_some();
    for (name, file) in fixtures() {
        let text = pretty(&file);
        if bless {
            std::fs::create_dir_all(data_dir()).unwrap();
            std::fs::write(fixture(name), &text).unwrap();
        }
        let committed = std::fs::read_to_string(fixture(name)).unwrap();
        assert_eq!(committed, text, "{name}.json is stale");
        let parsed = DatumFile::parse(committed.as_bytes()).unwrap();
        if parsed.distinction.is_none() {
            assert_eq!(DatumFile::from_datum(&parsed.to_datum().unwrap()), parsed);
        }
    }
}

#[test]
fn lift_single_factor() {
    let run = on("lift", "depth_zero_single");
    assert_eq!(run.code, 0);
    let rep = run.json();
    assert_eq!(rep["operation"], "lift");
    let out = &rep["outputs"];
    assert_eq!(out["lifted"]["polarity"], "orthogonal");
    assert_eq!(out["lifted"]["factors"][0]["c"]["val"], 1);
    let inv = invariants(&out["target_invariants"]);
    assert_eq!(inv.dim, 2);
    assert!(!inv.disc.is_one());
    assert_eq!(inv.hasse, -1);
    assert_eq!(out["consistent"], true);
    assert_eq!(out["oracle_agrees"], true);
    assert_eq!(rep["choices"]["tau"]["kind"], "canonical");
}

#[test]
fn predict_both_odd() {
    let run = on("predict", "both_odd");
    assert_eq!(run.code, 0);
    let out = &run.json()["outputs"];
    assert_eq!((out["r"].as_u64(), out["s"].as_u64()), (Some(1), Some(1)));
    assert_eq!(out["so_type"], "nonsplit_inner");
    let inv = invariants(&out["invariants"]);
    assert!(inv.disc.is_one());
    assert_eq!(inv.hasse, -1);
}

#[test]
fn validate_fixed_flag() {
    let run = on("validate", "fixed_flag");
    assert_eq!(run.code, 1);
    let rep = run.json();
    assert_eq!(rep["outputs"]["valid"], false);
    assert!(!rep["outputs"]["violations"].as_array().unwrap().is_empty());
    assert_eq!(rep["error"]["kind"], "domain");

    let lifted = on("lift", "fixed_flag");
    assert_eq!(lifted.code, 1);
    assert!(lifted.json()["error"]["details"]["violations"].is_array());

    for name in ["depth_zero_single", "both_odd", "mixed"] {
        let run = on("validate", name);
        assert_eq!(run.code, 0, "{name}");
        assert_eq!(run.json()["outputs"]["valid"], true);
    }
}

#[test]
fn reports_are_deterministic() {
    for args in [vec!["lift", "mixed"], vec!["transport", "witness"], vec!["blocks", "mixed"]] {
        let a = on(args[0], args[1]);
        let b = on(args[0], args[1]);
        assert_eq!(a.code, 0);
        assert_eq!(a.stdout, b.stdout);
    }
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("finite.json");
    let a = cli(&["finite-verify", "--q", "3", "--out", out.to_str().unwrap()], &[]);
    assert_eq!(a.code, 0);
    assert!(a.stdout.is_empty());
    let b = cli(&["finite-verify", "--q", "3"], &[]);
    assert_eq!(std::fs::read(&out).unwrap(), b.stdout);
    let rep = b.json();
    assert_eq!(rep["outputs"]["weil_dimension"], 9);
    assert!(rep["outputs"]["lifts"].as_array().unwrap().iter().all(|l| l["matches_exponent"] == true || l["matches_inverse"] == true));
}

#[test]
fn input_hash_is_echoed() {
    let bytes = std::fs::read(fixture("both_odd")).unwrap();
    let rep = on("predict", "both_odd").json();
    assert_eq!(rep["input_sha256"][0], theta_cli::report::sha256_hex(&bytes));
    assert_eq!(rep["tool"], "theta-param");
}

#[test]
fn lifted_datum_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["depth_zero_single", "both_odd", "mixed"] {
        for tau in [vec!["canonical"], vec!["seed", "17"]] {
            let mut args = vec!["lift".to_string(), fixture(name).to_str().unwrap().to_string(), "--tau".into()];
            args.extend(tau.iter().map(|s| s.to_string()));
            let args: Vec<&str> = args.iter().map(String::as_str).collect();
            let run = cli(&args, &[]);
            assert_eq!(run.code, 0, "{name}");
            let out = &run.json()["outputs"];
            let lifted: DatumFile = serde_json::from_value(out["lifted"].clone()).unwrap();
            let d = lifted.to_datum().unwrap();
            let reported = invariants(&out["target_invariants"]);
            assert_eq!(invariants_transfer(&d.cs()).unwrap(), reported, "{name}");

            let path = dir.path().join(format!("{name}-{}.json", tau.len()));
            std::fs::write(&path, pretty(&lifted)).unwrap();
            assert_eq!(cli(&["validate", path.to_str().unwrap()], &[]).code, 0, "{name}");
        }
        let a = dir.path().join(format!("{name}-1.json"));
        let b = dir.path().join(format!("{name}-2.json"));
        let eq = cli(&["equiv", a.to_str().unwrap(), b.to_str().unwrap()], &[]);
        assert_eq!(eq.code, 0);
        assert_eq!(eq.json()["outputs"]["equivalent"], true, "{name}");
    }
}

#[test]
fn equivalence_verdicts() {
    let a = fixture("depth_zero_single");
    let b = fixture("both_odd");
    let run = cli(&["equiv", a.to_str().unwrap(), b.to_str().unwrap(), "--mode", "strict"], &[]);
    assert_eq!(run.code, 0);
    let rep = run.json();
    assert_eq!(rep["outputs"]["equivalent"], false);
    assert_eq!(rep["outputs"]["mode"], "strict");
    assert_eq!(rep["input_sha256"].as_array().unwrap().len(), 2);
}

#[test]
fn distinction_verdicts() {
    let yes = on("distinguish", "witness");
    assert_eq!(yes.code, 0);
    assert_eq!(yes.json()["outputs"]["distinguished"], true);

    let no = on("distinguish", "not_distinguished");
    assert_eq!(no.code, 0);
    assert_eq!(no.json()["outputs"]["distinguished"], false);

    let t = on("transport", "witness");
    assert_eq!(t.code, 0);
    let out = &t.json()["outputs"];
    assert_eq!(out["reextension_equivalent"], true);
    assert_eq!(out["f_structure"]["polarity"], "orthogonal");

    assert_eq!(on("transport", "not_distinguished").code, 1);
    assert_eq!(on("distinguish", "mixed").code, 2);
}

#[test]
fn blocks_cover_all_factors() {
    let run = on("blocks", "mixed");
    assert_eq!(run.code, 0);
    let rep = run.json();
    let mut seen: Vec<u64> = rep["outputs"]["levels"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|l| l["factors"].as_array().unwrap().iter().map(|i| i.as_u64().unwrap()))
        .collect();
    seen.sort_unstable();
    let n = DatumFile::parse(&std::fs::read(fixture("mixed")).unwrap()).unwrap().factors.len() as u64;
    assert_eq!(seen, (0..n).collect::<Vec<_>>());
}

#[test]
fn precision_variable() {
    let path = fixture("mixed");
    let path = path.to_str().unwrap();
    let ok = cli(&["lift", path], &[("THETA_PARAM_PRECISION", "3")]);
    assert_eq!(ok.code, 0);
    assert_eq!(ok.json()["outputs"]["oracle_agrees"], true);
    let bad = cli(&["lift", path], &[("THETA_PARAM_PRECISION", "many")]);
    assert_eq!(bad.code, 2);
    assert_eq!(bad.json()["error"]["kind"], "config");
}

#[test]
fn schema_and_io_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"base":{"p":5,"f":1},"polarity":"symplectic","factors":[],"colour":"red"}"#).unwrap();
    let run = cli(&["validate", bad.to_str().unwrap()], &[]);
    assert_eq!(run.code, 2);
    assert_eq!(run.json()["error"]["kind"], "schema");

    let depth = dir.path().join("depth.json");
    let mut file = DatumFile::parse(&std::fs::read(fixture("depth_zero_single")).unwrap()).unwrap();
    file.factors[0].gamma.push(theta_cli::schema::GammaFile {
        r: "1/3".into(),
        residue_coeffs: vec![1],
    });
    std::fs::write(&depth, pretty(&file)).unwrap();
    assert_eq!(cli(&["lift", depth.to_str().unwrap()], &[]).code, 2);

    let missing = dir.path().join("missing.json");
    let run = cli(&["predict", missing.to_str().unwrap()], &[]);
    assert_eq!(run.code, 2);
    assert_eq!(run.json()["error"]["kind"], "io");

    assert_eq!(cli(&["lift"], &[]).code, 2);
    assert_eq!(cli(&["finite-verify", "--q", "4"], &[]).code, 2);
}

#[test]
fn shipped_schema_matches_serde_names() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas/datum.schema.json");
    let schema: Value = serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap();
    let names = |v: &Value| v["enum"].as_array().unwrap().clone();
    let steps: Vec<Value> = [QuadStep::Unramified, QuadStep::Ramified, QuadStep::RamifiedTwisted]
        .iter()
        .map(|s| serde_json::to_value(s).unwrap())
        .collect();
    assert_eq!(names(&schema["$defs"]["step"]), steps);
    let syms: Vec<Value> = [Sym::Fixed, Sym::Anti, Sym::None].iter().map(|s| serde_json::to_value(s).unwrap()).collect();
    assert_eq!(names(&schema["$defs"]["element"]["properties"]["sym"]), syms);
    let pols: Vec<Value> =
        [Polarity::Symplectic, Polarity::Orthogonal].iter().map(|s| serde_json::to_value(s).unwrap()).collect();
    assert_eq!(names(&schema["properties"]["polarity"]), pols);
}
