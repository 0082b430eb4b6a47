//! The JSON datum file and its conversion to and from core types.

use num_rational::Rational64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use theta_core::localfield::{LeadingTerm, QuadStep, Sym, TameField, TameFieldDescriptor};
use theta_core::theta::{DistinctionWitness, FStructureFactor};
use theta_core::torusdata::{Factor, GammaLevel, Polarity, TorusDatum};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{0}")]
pub struct SchemaError(pub String);

fn schema<T>(msg: impl Into<String>) -> Result<T, SchemaError> {
    Err(SchemaError(msg.into()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatumFile {
    pub base: BaseFile,
    pub polarity: Polarity,
    pub factors: Vec<FactorFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distinction: Option<DistinctionFile>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseFile {
    pub p: u64,
    pub f: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorFile {
    pub m: u32,
    pub step: QuadStep,
    pub c: ElementFile,
    pub chi0: i64,
    #[serde(default)]
    pub gamma: Vec<GammaFile>,
}

/// A leading term: valuation in `L`, residue coefficients over `F_p` in the
/// flat basis of the residue field of `L`, and the symmetry flag.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementFile {
    pub val: i64,
    pub residue_coeffs: Vec<i64>,
    pub sym: Sym,
}

/// `γ` at depth `r` ("num/den"); its valuation is `−r·e(L/F)` and its flag
/// is anti.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaFile {
    pub r: String,
    pub residue_coeffs: Vec<i64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtensionKind {
    Unramified,
}

/// `F`-structure of a datum over `E`: for each factor, the step of
/// `K_i/K_i°` over `F` and `c_i ∈ K_i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistinctionFile {
    #[serde(rename = "E")]
    pub e: ExtensionKind,
    #[serde(rename = "F_structure")]
    pub f_structure: Vec<FStructureFile>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FStructureFile {
    pub step: QuadStep,
    pub c: ElementFile,
}

pub fn parse_rational(s: &str) -> Result<Rational64, SchemaError> {
    let parse = |t: &str| t.trim().parse::<i64>().map_err(|_| SchemaError(format!("bad rational {s:?}")));
    match s.split_once('/') {
        Some((n, d)) => {
            let d = parse(d)?;
            if d == 0 {
                return schema(format!("zero denominator in {s:?}"));
            }
            Ok(Rational64::new(parse(n)?, d))
        }
        None => Ok(Rational64::from_integer(parse(s)?)),
    }
}

pub fn format_rational(r: Rational64) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn field(t: TameFieldDescriptor) -> Result<std::sync::Arc<TameField>, SchemaError> {
    TameField::get(t).map_err(|e| SchemaError(format!("tower {t:?}: {e}")))
}

fn element(t: TameFieldDescriptor, val: i64, coeffs: &[i64], sym: Sym) -> Result<LeadingTerm, SchemaError> {
    let l = field(t)?;
    let res = l.residue();
    if coeffs.len() > res.degree() as usize {
        return schema(format!("{} residue coefficients for a residue field of degree {}", coeffs.len(), res.degree()));
    }
    let r = res.from_coeffs(coeffs).map_err(|e| SchemaError(e.to_string()))?;
    if r.is_zero() {
        return schema("residues must be nonzero");
    }
    LeadingTerm::new(&l, val, r, sym).map_err(|e| SchemaError(e.to_string()))
}

impl ElementFile {
    pub fn to_term(&self, t: TameFieldDescriptor) -> Result<LeadingTerm, SchemaError> {
        element(t, self.val, &self.residue_coeffs, self.sym)
    }

    pub fn from_term(x: &LeadingTerm) -> ElementFile {
        ElementFile {
            val: x.val(),
            residue_coeffs: x.residue().coeffs().iter().map(|&c| c as i64).collect(),
            sym: x.sym(),
        }
    }
}

impl DatumFile {
    pub fn parse(bytes: &[u8]) -> Result<DatumFile, SchemaError> {
        serde_json::from_slice(bytes).map_err(|e| SchemaError(e.to_string()))
    }

    pub fn base_descriptor(&self) -> Result<TameFieldDescriptor, SchemaError> {
        let b = TameFieldDescriptor::base(self.base.p, self.base.f);
        field(b)?;
        Ok(b)
    }

    pub fn to_datum(&self) -> Result<TorusDatum, SchemaError> {
        let base = self.base_descriptor()?;
        let factors = self
            .factors
            .iter()
            .enumerate()
            .map(|(i, f)| {
                let t = TameFieldDescriptor::new(base.base_p, base.base_f, f.m, f.step);
                let c = f.c.to_term(t).map_err(|e| SchemaError(format!("factor {i}: {e}")))?;
                let e = t.e() as i64;
                let gamma_levels = f
                    .gamma
                    .iter()
                    .map(|g| {
                        let r = parse_rational(&g.r)?;
                        let v = -r * e;
                        if !v.is_integer() {
                            return schema(format!("factor {i}: depth {} is not in (1/{e})Z", g.r));
                        }
                        let gamma = element(t, v.to_integer(), &g.residue_coeffs, Sym::Anti)
                            .map_err(|e| SchemaError(format!("factor {i}: {e}")))?;
                        Ok(GammaLevel { r, gamma })
                    })
                    .collect::<Result<_, SchemaError>>()?;
                Ok(Factor::new(c, f.chi0, gamma_levels))
            })
            .collect::<Result<_, SchemaError>>()?;
        Ok(TorusDatum::new(base, factors, self.polarity))
    }

    pub fn from_datum(d: &TorusDatum) -> DatumFile {
        DatumFile {
            base: BaseFile {
                p: d.base.base_p,
                f: d.base.base_f,
            },
            polarity: d.polarity,
            factors: d
                .factors
                .iter()
                .map(|f| FactorFile {
                    m: f.m(),
                    step: f.step().expect("factor towers have a quadratic step"),
                    c: ElementFile::from_term(&f.c),
                    chi0: f.chi0,
                    gamma: f
                        .gamma_levels
                        .iter()
                        .map(|g| GammaFile {
                            r: format_rational(g.r),
                            residue_coeffs: ElementFile::from_term(&g.gamma).residue_coeffs,
                        })
                        .collect(),
                })
                .collect(),
            distinction: None,
        }
    }

    /// The distinction witness; `base` is `E` and `F` has half its degree.
    pub fn to_witness(&self) -> Result<DistinctionWitness, SchemaError> {
        let Some(dist) = &self.distinction else {
            return schema("missing \"distinction\" section");
        };
        if self.base.f % 2 != 0 {
            return schema("E must be the unramified quadratic extension of F, so base.f must be even");
        }
        if dist.f_structure.len() != self.factors.len() {
            return schema("F_structure must list one entry per factor");
        }
        let datum_over_e = self.to_datum()?;
        let base_f = TameFieldDescriptor::base(self.base.p, self.base.f / 2);
        let f_structure = dist
            .f_structure
            .iter()
            .zip(&self.factors)
            .enumerate()
            .map(|(i, (s, f))| {
                let k = TameFieldDescriptor::new(self.base.p, self.base.f / 2, f.m, s.step);
                let c = s.c.to_term(k).map_err(|e| SchemaError(format!("F_structure {i}: {e}")))?;
                Ok(FStructureFactor { c })
            })
            .collect::<Result<_, SchemaError>>()?;
        Ok(DistinctionWitness {
            base_f,
            datum_over_e,
            f_structure,
        })
    }

    pub fn from_witness(w: &DistinctionWitness) -> DatumFile {
        let mut out = DatumFile::from_datum(&w.datum_over_e);
        out.distinction = Some(DistinctionFile {
            e: ExtensionKind::Unramified,
            f_structure: w
                .f_structure
                .iter()
                .map(|s| FStructureFile {
                    step: s.c.descriptor().step.expect("K has a quadratic step"),
                    c: ElementFile::from_term(&s.c),
                })
                .collect(),
        });
        out
    }
}
