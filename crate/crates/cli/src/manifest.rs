//! Manifest files: JSON description of one open-loop transfer function, its
//! known singularities and analysis options.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use bibo_core::analysis::{AnalysisOptions, Declaration, InversionCheckOptions};
use bibo_core::expr::parse_with;
use bibo_core::{AsymExpansion, Exponent, Term, TransferExpr, C64};
use serde::Deserialize;
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub expr: String,
    #[serde(default)]
    pub constants: BTreeMap<String, Number>,
    #[serde(default)]
    pub singularities: Vec<SingularityDecl>,
    pub delta: Option<f64>,
    /// Analytic function whose right half-plane zeros are the poles of
    /// `expr`, for when the plain denominator is not analytic there.
    pub witness: Option<String>,
    #[serde(default)]
    pub options: Options,
}

/// A real number or `[re, im]`.
#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Real(f64),
    Complex([f64; 2]),
}

impl Number {
    fn value(self) -> C64 {
        match self {
            Number::Real(x) => C64::new(x, 0.0),
            Number::Complex([re, im]) => C64::new(re, im),
        }
    }
}

/// A coefficient: a number, `[re, im]`, or a constant expression such as
/// `"-K/2"`.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Coeff {
    Number(Number),
    Expr(String),
}

/// An exponent: a number (snapped to a fraction with denominator up to 12)
/// or text such as `"-3/2"` or `"inf"`.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Kappa {
    Number(f64),
    Text(String),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingularityDecl {
    pub b: [f64; 2],
    pub expansion: Option<ExpansionDecl>,
    #[serde(default)]
    pub auto: bool,
    pub n_terms: Option<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpansionDecl {
    pub b: Option<[f64; 2]>,
    pub terms: Vec<TermDecl>,
    pub kappa_max: Kappa,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDecl {
    pub kappa: Kappa,
    pub c: Coeff,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    pub omega_max: Option<f64>,
    pub puncture_eps: Option<f64>,
    pub tol_rad: Option<f64>,
    pub rhp_margin: Option<f64>,
    pub rhp_radius: Option<f64>,
    pub semicircle_rho: Option<f64>,
    pub inversion: Option<InversionDecl>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InversionDecl {
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub per_decade: Option<usize>,
}

/// Command-line values that take precedence over the manifest.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub omega_max: Option<f64>,
    pub puncture_eps: Option<f64>,
    pub tol_rad: Option<f64>,
    pub delta: Option<f64>,
}

/// A manifest with its expressions parsed and declarations built.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub manifest: Manifest,
    pub sha256: String,
    pub constants: BTreeMap<String, C64>,
    pub f: TransferExpr,
    pub witness: Option<TransferExpr>,
    pub declarations: Vec<Declaration>,
}

const DEFAULT_AUTO_TERMS: usize = 3;

pub fn load(path: &Path) -> Result<Loaded> {
    let bytes = std::fs::read(path).with_context(|| format!("cannot read manifest {}", path.display()))?;
    from_bytes(&bytes).with_context(|| format!("in manifest {}", path.display()))
}

pub fn from_bytes(bytes: &[u8]) -> Result<Loaded> {
    let manifest: Manifest = serde_json::from_slice(bytes).context("manifest is not valid JSON for the schema")?;
    let sha256 = format!("{:x}", Sha256::digest(bytes));
    let constants: BTreeMap<String, C64> = manifest.constants.iter().map(|(k, v)| (k.clone(), v.value())).collect();
    for (k, v) in &constants {
        if !(v.re.is_finite() && v.im.is_finite()) {
            bail!("constant {} is not finite", k);
        }
    }
    let f = parse_with(&manifest.expr, &constants).map_err(|e| anyhow!("expr: {}", e))?;
    let witness = match &manifest.witness {
        Some(w) => Some(parse_with(w, &constants).map_err(|e| anyhow!("witness: {}", e))?),
        None => None,
    };
    let mut declarations = Vec::new();
    for (i, d) in manifest.singularities.iter().enumerate() {
        declarations.push(declaration(d, &constants).with_context(|| format!("singularities[{}]", i))?);
    }
    for (i, a) in declarations.iter().enumerate() {
        for (j, b) in declarations.iter().enumerate().skip(i + 1) {
            if (a.location() - b.location()).norm() < 1e-12 {
                bail!("singularities[{}] and singularities[{}] are at the same point", i, j);
            }
        }
    }
    Ok(Loaded { manifest, sha256, constants, f, witness, declarations })
}

fn declaration(d: &SingularityDecl, constants: &BTreeMap<String, C64>) -> Result<Declaration> {
    let b = C64::new(d.b[0], d.b[1]);
    match (&d.expansion, d.auto) {
        (Some(_), true) => bail!("give either an expansion or \"auto\": true, not both"),
        (None, false) => bail!("needs an expansion or \"auto\": true"),
        (None, true) => {
            Ok(Declaration::Auto { location: b, n_terms: d.n_terms.unwrap_or(DEFAULT_AUTO_TERMS) })
        }
        (Some(e), false) => {
            if d.n_terms.is_some() {
                bail!("\"n_terms\" only applies to \"auto\" declarations");
            }
            if let Some(inner) = e.b {
                if inner != d.b {
                    bail!("expansion point {:?} differs from b = {:?}", inner, d.b);
                }
            }
            let mut terms = Vec::with_capacity(e.terms.len());
            for (i, t) in e.terms.iter().enumerate() {
                let kappa = exponent(&t.kappa).with_context(|| format!("terms[{}].kappa", i))?;
                let c = coeff(&t.c, constants).with_context(|| format!("terms[{}].c", i))?;
                terms.push(Term::new(kappa, c));
            }
            let kappa_max = exponent(&e.kappa_max).context("kappa_max")?;
            let exp = AsymExpansion::new(b, terms, kappa_max).map_err(|e| anyhow!("{}", e))?;
            Ok(Declaration::Expansion(exp))
        }
    }
}

pub fn exponent(k: &Kappa) -> Result<Exponent> {
    match k {
        Kappa::Number(x) if x.is_finite() => Ok(Exponent::snapped(*x, 12, 1e-9)),
        Kappa::Number(x) => bail!("exponent {} is not finite", x),
        Kappa::Text(t) => parse_exponent(t),
    }
}

fn parse_exponent(t: &str) -> Result<Exponent> {
    let t = t.trim();
    if matches!(t, "inf" | "+inf" | "infinity") {
        return Ok(Exponent::infinity());
    }
    if let Some((n, d)) = t.split_once('/') {
        let n: i64 = n.trim().parse().with_context(|| format!("bad numerator in {:?}", t))?;
        let d: i64 = d.trim().parse().with_context(|| format!("bad denominator in {:?}", t))?;
        if d == 0 {
            bail!("zero denominator in {:?}", t);
        }
        return Ok(Exponent::ratio(n, d));
    }
    if let Ok(n) = t.parse::<i64>() {
        return Ok(Exponent::int(n));
    }
    let x: f64 = t.parse().with_context(|| format!("{:?} is not an exponent", t))?;
    exponent(&Kappa::Number(x))
}

fn coeff(c: &Coeff, constants: &BTreeMap<String, C64>) -> Result<C64> {
    let v = match c {
        Coeff::Number(n) => n.value(),
        Coeff::Expr(src) => {
            let e = parse_with(src, constants).map_err(|e| anyhow!("{}", e))?;
            e.as_const().ok_or_else(|| anyhow!("{:?} is not a constant expression", src))?
        }
    };
    if !(v.re.is_finite() && v.im.is_finite()) {
        bail!("coefficient is not finite");
    }
    Ok(v)
}

impl Loaded {
    pub fn analysis_options(&self, o: &Overrides) -> AnalysisOptions {
        let m = &self.manifest.options;
        let d = AnalysisOptions::default();
        AnalysisOptions {
            delta: o.delta.or(self.manifest.delta).unwrap_or(d.delta),
            omega_max: o.omega_max.or(m.omega_max),
            puncture_eps: o.puncture_eps.or(m.puncture_eps),
            tol_rad: o.tol_rad.or(m.tol_rad).unwrap_or(d.tol_rad),
            rhp_margin: m.rhp_margin.unwrap_or(d.rhp_margin),
            rhp_radius: m.rhp_radius,
            witness: self.witness.clone(),
            semicircle_rho: m.semicircle_rho.unwrap_or(d.semicircle_rho),
            inversion: m.inversion.as_ref().map(|i| {
                let d = InversionCheckOptions::default();
                InversionCheckOptions {
                    t_min: i.t_min.unwrap_or(d.t_min),
                    t_max: i.t_max.unwrap_or(d.t_max),
                    per_decade: i.per_decade.unwrap_or(d.per_decade),
                }
            }),
        }
    }
}
