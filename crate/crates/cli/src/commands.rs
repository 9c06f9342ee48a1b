use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use bibo_core::analysis::analyze;
use bibo_core::laplace::{invert, InversionConfig};
use bibo_core::nyquist::export_nyquist_data;
use bibo_core::singularities::estimate_expansion;
use bibo_core::stability::fit_tail_exponent;
use bibo_core::C64;
use serde::Serialize;

use crate::manifest::{load, Overrides};
use crate::report::{fmt_c, AnalysisReport, ExpansionView, TailFitView, Tool};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Txt,
    Csv,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{}", text);
            Ok(())
        }
    }
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// Runs the full analysis, writes `report.json` and `report.txt` into
/// `out_dir`, and returns the report in `format` for standard output.
pub fn cmd_analyze(manifest: &Path, o: &Overrides, out_dir: &Path, format: Format) -> Result<String> {
    let m = load(manifest)?;
    let opts = m.analysis_options(o);
    let a = analyze(&m.f, &m.declarations, &opts).context("analysis failed")?;
    let report = AnalysisReport::new(&a, &opts, m.f.to_string(), m.sha256.clone());
    let (js, txt) = (report.to_json(), report.to_text());
    fs::create_dir_all(out_dir).with_context(|| format!("cannot create {}", out_dir.display()))?;
    fs::write(out_dir.join("report.json"), &js).context("cannot write report.json")?;
    fs::write(out_dir.join("report.txt"), &txt).context("cannot write report.txt")?;
    match format {
        Format::Json => Ok(js),
        Format::Txt => Ok(txt),
        Format::Csv => bail!("analyze writes json or txt, not csv"),
    }
}

/// Frequency grid: `lin:a:b:n`, `log:a:b:n` (n points on each side of
/// zero, mirrored) or a comma-separated list.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let num = |s: &str| -> Result<f64> { s.trim().parse::<f64>().with_context(|| format!("bad number {:?}", s)) };
    let mut grid = match parts.as_slice() {
        ["lin", a, b, n] | ["log", a, b, n] => {
            let (a, b) = (num(a)?, num(b)?);
            let n: usize = n.trim().parse().with_context(|| format!("bad count {:?}", n))?;
            if n < 2 || !(a < b) {
                bail!("grid needs a < b and at least 2 points");
            }
            if parts[0] == "lin" {
                (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
            } else {
                if a <= 0.0 {
                    bail!("log grid needs 0 < a");
                }
                let r = (b / a).ln() / (n - 1) as f64;
                let side: Vec<f64> = (0..n).map(|i| a * (r * i as f64).exp()).collect();
                side.iter().rev().map(|w| -w).chain(side.iter().copied()).collect()
            }
        }
        [list] => list.split(',').map(num).collect::<Result<Vec<f64>>>()?,
        _ => bail!("grid must be lin:a:b:n, log:a:b:n or a comma-separated list"),
    };
    if grid.iter().any(|w| !w.is_finite()) {
        bail!("grid has non-finite frequencies");
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();
    Ok(grid)
}

#[derive(Serialize)]
struct NyquistData {
    tool: Tool,
    manifest_sha256: String,
    /// `[ω, Re F_o(jω), Im F_o(jω)]`.
    rows: Vec<[f64; 3]>,
    skipped: Vec<Skipped>,
}

#[derive(Serialize)]
struct Skipped {
    omega: f64,
    reason: String,
}

pub fn cmd_nyquist(manifest: &Path, grid: &str, format: Format, out: Option<&Path>) -> Result<Vec<String>> {
    let m = load(manifest)?;
    let t = export_nyquist_data(&m.f, &parse_grid(grid)?);
    let notes: Vec<String> = t.skipped.iter().map(|(w, why)| format!("skipped omega = {}: {}", w, why)).collect();
    let text = match format {
        Format::Csv => {
            let mut s = String::from("omega,re,im\n");
            for (w, re, im) in &t.rows {
                let _ = writeln!(s, "{},{},{}", w, re, im);
            }
            s
        }
        Format::Json => json(&NyquistData {
            tool: Tool::current(),
            manifest_sha256: m.sha256,
            rows: t.rows.iter().map(|&(w, re, im)| [w, re, im]).collect(),
            skipped: t.skipped.iter().map(|(w, r)| Skipped { omega: *w, reason: r.clone() }).collect(),
        }),
        Format::Txt => {
            let mut s = String::new();
            for (w, re, im) in &t.rows {
                let _ = writeln!(s, "{:>14.6e} {:>14.6e} {:>14.6e}", w, re, im);
            }
            s
        }
    };
    emit(out, &text)?;
    Ok(notes)
}

#[derive(Serialize)]
struct InversionData {
    tool: Tool,
    manifest_sha256: String,
    k: Option<[f64; 2]>,
    samples: Vec<SampleView>,
    tail_fit: Option<TailFitView>,
    notes: Vec<String>,
}

#[derive(Serialize)]
struct SampleView {
    t: f64,
    value: Option<[f64; 2]>,
    error: f64,
    flagged: bool,
    note: Option<String>,
}

/// `n` log-spaced times from `t_min` to `t_max`.
pub fn time_grid(t_min: f64, t_max: f64, n: usize) -> Result<Vec<f64>> {
    if !(t_min > 0.0 && t_max > t_min && n >= 2) {
        bail!("need 0 < tmin < tmax and at least 2 points");
    }
    let r = (t_max / t_min).ln() / (n - 1) as f64;
    Ok((0..n).map(|i| if i == n - 1 { t_max } else { t_min * (r * i as f64).exp() }).collect())
}

pub fn cmd_invert(
    manifest: &Path,
    t_min: f64,
    t_max: f64,
    points: usize,
    format: Format,
    out: Option<&Path>,
) -> Result<Vec<String>> {
    let m = load(manifest)?;
    let inv = invert(&m.f, &InversionConfig::new(time_grid(t_min, t_max, points)?))?;
    let mut notes = inv.notes.clone();
    let flagged = inv.flagged_count();
    if flagged > 0 {
        notes.push(format!("{} sample(s) flagged as unreliable", flagged));
    }
    let text = match format {
        Format::Csv => {
            let mut s = String::from("t,re,im,err_estimate,flagged\n");
            for x in &inv.samples {
                let v = x.value.unwrap_or(C64::new(f64::NAN, f64::NAN));
                let _ = writeln!(s, "{},{},{},{},{}", x.t, v.re, v.im, x.error, x.flagged);
            }
            s
        }
        Format::Json | Format::Txt => {
            let fit = inv.signal().ok().and_then(|g| fit_tail_exponent(&g).ok());
            let data = InversionData {
                tool: Tool::current(),
                manifest_sha256: m.sha256,
                k: inv.k.map(|k| [k.re, k.im]),
                samples: inv
                    .samples
                    .iter()
                    .map(|x| SampleView {
                        t: x.t,
                        value: x.value.map(|v| [v.re, v.im]),
                        error: x.error,
                        flagged: x.flagged,
                        note: x.note.clone(),
                    })
                    .collect(),
                tail_fit: fit.as_ref().map(Into::into),
                notes: notes.clone(),
            };
            if format == Format::Json {
                json(&data)
            } else {
                let mut s = String::new();
                for x in &data.samples {
                    let v = x.value.map_or("-".to_string(), fmt_c);
                    let _ = writeln!(s, "{:>12.5e}  {}  err {:.1e}{}", x.t, v, x.error, if x.flagged { "  flagged" } else { "" });
                }
                if let Some(f) = &data.tail_fit {
                    let _ = writeln!(s, "tail {} p = {:.4}", f.shape, f.p);
                }
                s
            }
        }
    };
    emit(out, &text)?;
    Ok(notes)
}

#[derive(Serialize)]
struct Classification {
    tool: Tool,
    manifest_sha256: String,
    point: [f64; 2],
    class: &'static str,
    expansion: ExpansionView,
    diagnostics: Vec<DiagnosticView>,
    notes: Vec<String>,
}

#[derive(Serialize)]
struct DiagnosticView {
    kappa_raw: f64,
    snapped: bool,
    kappa_spread: f64,
    coeff_spread: f64,
    eps_window: [f64; 2],
}

pub fn parse_point(s: &str) -> Result<C64> {
    let t = s.trim().trim_start_matches('[').trim_end_matches(']');
    let parts: Vec<&str> = t.split(',').collect();
    let num = |x: &str| x.trim().parse::<f64>().with_context(|| format!("bad number {:?}", x));
    match parts.as_slice() {
        [re] => Ok(C64::new(num(re)?, 0.0)),
        [re, im] => Ok(C64::new(num(re)?, num(im)?)),
        _ => Err(anyhow!("point must be \"re\" or \"re,im\"")),
    }
}

pub fn cmd_classify(manifest: &Path, point: C64, n_terms: usize, format: Format, out: Option<&Path>) -> Result<()> {
    let m = load(manifest)?;
    let est = estimate_expansion(&m.f, point, n_terms)
        .with_context(|| format!("cannot classify the point {}", fmt_c([point.re, point.im])))?;
    let class = est.expansion.classify()?;
    let data = Classification {
        tool: Tool::current(),
        manifest_sha256: m.sha256,
        point: [point.re, point.im],
        class: class.name(),
        expansion: (&est.expansion).into(),
        diagnostics: est
            .diagnostics
            .iter()
            .map(|d| DiagnosticView {
                kappa_raw: d.kappa_raw,
                snapped: d.snapped,
                kappa_spread: d.kappa_spread,
                coeff_spread: d.coeff_spread,
                eps_window: [d.eps_window.0, d.eps_window.1],
            })
            .collect(),
        notes: est.notes,
    };
    let text = match format {
        Format::Json => json(&data),
        Format::Txt => {
            let mut s = format!("{} at {}\n", data.class, fmt_c(data.point));
            for t in &data.expansion.terms {
                let _ = writeln!(s, "  {} (s-b)^{}", fmt_c(t.c), t.kappa);
            }
            let _ = writeln!(s, "  + O((s-b)^{})", data.expansion.kappa_max);
            s
        }
        Format::Csv => bail!("classify writes json or txt, not csv"),
    };
    emit(out, &text)
}
