//! Report rendering. JSON via serde_json, CSV by hand with `# key = value`
//! header lines carrying the resolved configuration.

use std::fmt::Write;

use bundlecurv::search::{ScanResult, SweepRow, ZeroPlaneCertificate};
use bundlecurv::{AlgebraElement, BundleTriple, CurvatureSample, CurvatureTerms, FatnessReport, GroupElement};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Format, RunConfig};

fn coords(a: &AlgebraElement) -> Vec<f64> {
    a.coords().iter().copied().collect()
}

fn rows(g: &GroupElement) -> Vec<Vec<f64>> {
    let m = g.matrix();
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn basis_labels(n: usize) -> Vec<String> {
    let mut out = Vec::new();
    for i in 1..=n {
        for j in i + 1..=n {
            out.push(format!("E{i}_{j}"));
        }
    }
    out
}

fn config_value(config: &RunConfig) -> Value {
    config.provenance_value()
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report is serializable");
    s.push('\n');
    s
}

/// Shortest round-trip form, switching to exponent notation for very small
/// or large magnitudes.
fn num(v: f64) -> String {
    format!("{v:?}")
}

fn join(values: &[f64]) -> String {
    values.iter().map(|&v| num(v)).collect::<Vec<_>>().join(" ")
}

fn header(out: &mut String, command: &str, config: &RunConfig) {
    writeln!(out, "# command = {command}").unwrap();
    writeln!(out, "# config = {}", config.provenance()).unwrap();
    writeln!(out, "# seed = {}", config.run.seed).unwrap();
}

#[derive(Serialize)]
struct SampleJson {
    g0: Vec<Vec<f64>>,
    x: Vec<f64>,
    y: Vec<f64>,
    terms: CurvatureTerms,
    area2: f64,
    normalized: f64,
}

impl From<&CurvatureSample> for SampleJson {
    fn from(s: &CurvatureSample) -> Self {
        Self {
            g0: rows(&s.g0),
            x: coords(&s.x),
            y: coords(&s.y),
            terms: s.terms(),
            area2: s.area2,
            normalized: s.normalized(),
        }
    }
}

pub fn fatness(config: &RunConfig, triple: &BundleTriple, r: &FatnessReport, format: Format) -> String {
    let bracket = triple.algebra().bracket(&r.x, &r.y).norm();
    match format {
        Format::Json => {
            let witness = if r.fat {
                Value::Null
            } else {
                json!({ "x": coords(&r.x), "y": coords(&r.y), "bracket_norm": bracket })
            };
            to_json(&json!({
                "command": "fatness",
                "config": config_value(config),
                "basis": basis_labels(triple.algebra().n()),
                "deficit": r.deficit,
                "threshold": bundlecurv::bundle::FAT_THRESHOLD,
                "fat": r.fat,
                "witness": witness,
            }))
        }
        Format::Csv => {
            let mut out = String::new();
            header(&mut out, "fatness", config);
            writeln!(out, "# basis = {}", basis_labels(triple.algebra().n()).join(" ")).unwrap();
            writeln!(out, "deficit,fat,bracket_norm,x,y").unwrap();
            writeln!(out, "{},{},{},{},{}", num(r.deficit), r.fat, num(bracket), join(&coords(&r.x)), join(&coords(&r.y))).unwrap();
            out
        }
    }
}

pub fn certify(config: &RunConfig, fatness: &FatnessReport, certs: &[ZeroPlaneCertificate], format: Format) -> String {
    let n = certs.first().map_or(0, |c| c.g0.n());
    match format {
        Format::Json => {
            let list: Vec<Value> = certs
                .iter()
                .map(|c| {
                    json!({
                        "eps": c.eps,
                        "mode": if c.eps == 0.0 { "exact" } else { "perturbed" },
                        "generic": c.generic,
                        "witness_x": coords(&c.witness_x),
                        "witness_y": coords(&c.witness_y),
                        "x0": coords(&c.x0),
                        "y0": coords(&c.y0),
                        "g0": rows(&c.g0),
                        "f_value": c.f_value,
                        "grad_residual": c.grad_residual,
                        "commute_residual": c.commute_residual,
                        "second_order_max": c.second_order_max,
                        "second_variation_bound": c.second_variation_bound,
                        "k_m_value": c.k_m_value,
                        "terms": c.sample.terms(),
                        "area2": c.sample.area2,
                        "iterations": c.iterations,
                    })
                })
                .collect();
            to_json(&json!({
                "command": "certify",
                "config": config_value(config),
                "basis": basis_labels(n),
                "fatness": { "deficit": fatness.deficit, "fat": fatness.fat },
                "certificates": list,
            }))
        }
        Format::Csv => {
            let mut out = String::new();
            header(&mut out, "certify", config);
            writeln!(out, "# deficit = {}", num(fatness.deficit)).unwrap();
            writeln!(
                out,
                "eps,mode,generic,k_m_value,k_h,k_f,a_tensor,area2,grad_residual,commute_residual,second_order_max,second_variation_bound,f_value,iterations"
            )
            .unwrap();
            for c in certs {
                let t = c.sample.terms();
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    num(c.eps),
                    if c.eps == 0.0 { "exact" } else { "perturbed" },
                    c.generic,
                    num(c.k_m_value),
                    num(t.k_h),
                    num(t.k_f),
                    num(t.a_tensor),
                    num(c.sample.area2),
                    num(c.grad_residual),
                    num(c.commute_residual),
                    num(c.second_order_max),
                    num(c.second_variation_bound),
                    num(c.f_value),
                    c.iterations
                )
                .unwrap();
            }
            out
        }
    }
}

pub fn scan(config: &RunConfig, s: &ScanResult, format: Format) -> String {
    let hist = s.histogram(config.run.histogram_bins);
    match format {
        Format::Json => to_json(&json!({
            "command": "scan",
            "config": config_value(config),
            "samples": s.values.len(),
            "floor": s.floor,
            "witness": SampleJson::from(&s.witness),
            "histogram": hist.iter().map(|(lo, hi, c)| json!({ "lo": lo, "hi": hi, "count": c })).collect::<Vec<_>>(),
        })),
        Format::Csv => {
            let mut out = String::new();
            header(&mut out, "scan", config);
            let w = &s.witness;
            let t = w.terms();
            writeln!(out, "# samples = {}", s.values.len()).unwrap();
            writeln!(out, "# floor = {}", num(s.floor)).unwrap();
            writeln!(out, "# witness_terms = k_h {} k_f {} a_tensor {}", num(t.k_h), num(t.k_f), num(t.a_tensor)).unwrap();
            writeln!(out, "# witness_area2 = {}", num(w.area2)).unwrap();
            writeln!(out, "# witness_g0 = {}", join(&rows(&w.g0).concat())).unwrap();
            writeln!(out, "# witness_x = {}", join(&coords(&w.x))).unwrap();
            writeln!(out, "# witness_y = {}", join(&coords(&w.y))).unwrap();
            writeln!(out, "bin_lo,bin_hi,count").unwrap();
            for (lo, hi, c) in hist {
                writeln!(out, "{},{},{c}", num(lo), num(hi)).unwrap();
            }
            out
        }
    }
}

pub fn sweep(config: &RunConfig, rows: &[SweepRow], format: Format) -> String {
    match format {
        Format::Json => to_json(&json!({
            "command": "sweep",
            "config": config_value(config),
            "rows": rows
                .iter()
                .map(|r| json!({
                    "t": r.t,
                    "floor": r.floor,
                    "positive_fraction": r.positive_fraction,
                    "certificate_k_m": r.certificate_k_m,
                }))
                .collect::<Vec<_>>(),
        })),
        Format::Csv => {
            let mut out = String::new();
            header(&mut out, "sweep", config);
            let inject = rows.iter().any(|r| r.certificate_k_m.is_some());
            writeln!(out, "t,floor,positive_fraction{}", if inject { ",certificate_k_m" } else { "" }).unwrap();
            for r in rows {
                write!(out, "{},{},{}", num(r.t), num(r.floor), num(r.positive_fraction)).unwrap();
                if let Some(k) = r.certificate_k_m {
                    write!(out, ",{}", num(k)).unwrap();
                }
                out.push('\n');
            }
            out
        }
    }
}
