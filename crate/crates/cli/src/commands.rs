//! Subcommand implementations. Each returns the lines to print on success.

use std::path::Path;

use rayon::prelude::*;
use roelab::dirac::{run_pairing_experiment, PairingExperiment};
use roelab::ktheory::{kitaev_table, Field};
use roelab::lattice::{Site, Window};
use roelab::models::{build_hamiltonian, DisorderSpec, ModelSpec};
use roelab::roe_ops::io::write_operator;
use roelab::roe_ops::{
    classify_decay, cocycle_check, magnetic_cocycle, reconstruction_error, untwist, Cocycle, DecayClass,
    GaugeFunction, COCYCLE_TOL,
};
use roelab::spectral::{edge_spectrum, eigendecompose, fermi_projection};
use roelab::{Error, Result};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{CocycleConfig, Config, PairingConfig, SweepConfig};
use crate::manifest::{num, Run};

pub const THREADS_VAR: &str = "ROELAB_THREADS";

fn to_json(v: &impl Serialize) -> Value {
    serde_json::to_value(v).expect("plain data serializes")
}

fn class_label(c: &DecayClass) -> String {
    match c {
        DecayClass::Banded { radius } => format!("banded (radius {radius})"),
        DecayClass::Exponential { rate } => format!("exponential (rate {rate:.4})"),
        DecayClass::Rapid { order } => format!("rapid (order > {order})"),
        DecayClass::None => "none".into(),
        DecayClass::Inconclusive { shells } => format!("inconclusive ({shells} usable shells)"),
    }
}

#[derive(Serialize)]
struct ModelParams {
    model: ModelSpec,
    disorder: DisorderSpec,
}

pub fn build(config: &Config) -> Result<Vec<String>> {
    let params = ModelParams { model: config.model()?, disorder: config.disorder()? };
    let mut run = Run::new("build", Some(&config.path), &params, vec![params.disorder.seed], config.output_dir()?)?;
    let h = build_hamiltonian(&params.model, &params.disorder)?;
    let mut bytes = Vec::new();
    write_operator(&h, &mut bytes)?;
    let path = run.write("operator.txt", &bytes)?;
    run.jsonl(
        "build.jsonl",
        vec![json!({
            "sites": h.sites(),
            "dim": h.dim(),
            "blocks": h.nnz_blocks(),
            "propagation": h.propagation(),
            "hermitian_deviation": h.hermitian_deviation(),
        })],
    )?;
    run.finish()?;
    Ok(vec![
        format!("sites = {}, dimension = {}, nonzero blocks = {}", h.sites(), h.dim(), h.nnz_blocks()),
        format!("operator written to {}", path.display()),
    ])
}

#[derive(Serialize)]
struct PairParams {
    model: ModelSpec,
    disorder: DisorderSpec,
    pairing: PairingConfig,
}

fn window_rows(exp: &PairingExperiment) -> Vec<Vec<String>> {
    exp.result
        .windows
        .iter()
        .zip(&exp.steps)
        .map(|(w, s)| {
            vec![
                w.half_width.to_string(),
                w.index.to_string(),
                num(w.raw_index),
                num(w.tau),
                num(w.smallest_retained),
                num(w.largest_discarded),
                w.rank.to_string(),
                num(s.gap.gap.below),
                num(s.gap.gap.above),
                w.warnings.join("; "),
            ]
        })
        .collect()
}

const WINDOW_HEADER: [&str; 10] = [
    "half_width",
    "index",
    "raw_index",
    "tau",
    "smallest_retained",
    "largest_discarded",
    "rank",
    "bulk_below",
    "bulk_above",
    "warnings",
];

pub fn pair(config: &Config) -> Result<Vec<String>> {
    let params = PairParams { model: config.model()?, disorder: config.disorder()?, pairing: config.pairing()? };
    let mut run = Run::new("pair", Some(&config.path), &params, vec![params.disorder.seed], config.output_dir()?)?;
    let exp = run_pairing_experiment(&params.model, &params.disorder, &params.pairing.experiment())?;

    run.csv("pair.csv", &WINDOW_HEADER, &window_rows(&exp))?;
    let sv_rows: Vec<Vec<String>> = exp
        .result
        .windows
        .iter()
        .flat_map(|w| w.singular_values.iter().enumerate().map(|(i, s)| vec![w.half_width.to_string(), i.to_string(), num(*s)]))
        .collect();
    run.csv("singular_values.csv", &["half_width", "position", "value"], &sv_rows)?;
    let mut records: Vec<Value> = exp
        .result
        .windows
        .iter()
        .zip(&exp.steps)
        .map(|(w, s)| {
            let mut v = to_json(w);
            v.as_object_mut().unwrap().remove("singular_values");
            v["bulk_gap"] = to_json(&s.gap);
            v
        })
        .collect();
    records.push(json!({
        "index": exp.result.index,
        "converged": exp.result.converged,
        "oracle": exp.oracle.as_ref().map(|o| o.value),
        "oracle_warnings": exp.oracle.as_ref().map(|o| o.warnings.clone()),
    }));
    run.jsonl("pair.jsonl", records)?;
    run.finish()?;

    let mut lines: Vec<String> = exp
        .result
        .windows
        .iter()
        .map(|w| {
            let mut l = format!(
                "L = {}: index {} (raw {:.4}, tau {:.3e}, retained {:.3e}, discarded {:.3e})",
                w.half_width, w.index, w.raw_index, w.tau, w.smallest_retained, w.largest_discarded
            );
            for warn in &w.warnings {
                l.push_str(&format!("\n  warning: {warn}"));
            }
            l
        })
        .collect();
    if let Some(o) = &exp.oracle {
        lines.push(format!("oracle (L = {}) = {:.4}", exp.steps.last().unwrap().half_width, o.value));
    }
    let status = if exp.result.converged { "converged" } else { "not converged" };
    lines.push(format!("index = {} ({status})", exp.result.index));
    if !exp.result.converged {
        for l in &lines {
            println!("{l}");
        }
        let idx: Vec<i64> = exp.result.windows.iter().map(|w| w.index).collect();
        return Err(Error::NonConvergence(format!("index ladder {idx:?} did not settle")));
    }
    Ok(lines)
}

#[derive(Serialize)]
struct DecayParams {
    model: ModelSpec,
    disorder: DisorderSpec,
    decay: crate::config::DecayConfig,
}

pub fn decay(config: &Config) -> Result<Vec<String>> {
    let params = DecayParams { model: config.model()?, disorder: config.disorder()?, decay: config.decay()? };
    let mut run = Run::new("decay", Some(&config.path), &params, vec![params.disorder.seed], config.output_dir()?)?;
    let h = build_hamiltonian(&params.model, &params.disorder)?;
    let p = fermi_projection(&eigendecompose(&h)?, params.decay.fermi_energy)?;
    let profile = p.decay_profile();
    let class = classify_decay(&profile, &params.decay.options)?;
    let rows: Vec<Vec<String>> = profile.shells().iter().map(|(r, v)| vec![num(*r), num(*v)]).collect();
    run.csv("decay_profile.csv", &["radius", "value"], &rows)?;
    let mut rec = to_json(&class);
    rec["rank"] = json!(p.rank());
    rec["reach"] = json!(profile.reach);
    run.jsonl("decay.jsonl", vec![rec])?;
    run.finish()?;
    Ok(vec![
        format!("Fermi projection rank {} at E_F = {}", p.rank(), params.decay.fermi_energy),
        format!("decay class: {}", class_label(&class.class)),
    ])
}

pub fn untwist_cmd(config: &Config) -> Result<Vec<String>> {
    let params = config.untwist()?;
    let mut run = Run::new("untwist", Some(&config.path), &params, vec![params.seed], config.output_dir()?)?;
    let window = Window::new(2, params.half_width)?;
    let w = match &params.cocycle {
        CocycleConfig::Magnetic { flux } => magnetic_cocycle(*flux, 2)?,
        CocycleConfig::Coboundary { gauge_seed } => Cocycle::coboundary(&GaugeFunction::random(*gauge_seed)),
    };
    let check = cocycle_check(&w, &window, params.samples, params.seed);
    let v = untwist(&w, &Site(params.base.clone()), &window)?;
    let recon = reconstruction_error(&w, &v, &window, params.samples, params.seed.wrapping_add(1));
    let header = ["cocycle", "samples", "max_violation", "max_modulus_defect", "reconstruction_error"];
    let row = vec![
        w.label().to_string(),
        params.samples.to_string(),
        num(check.max_violation),
        num(check.max_modulus_defect),
        num(recon),
    ];
    run.csv("untwist.csv", &header, &[row])?;
    run.finish()?;
    if recon >= COCYCLE_TOL {
        return Err(Error::Precondition {
            invariant: "untwist round trip",
            detail: format!("reconstruction error {recon:.3e} >= {COCYCLE_TOL:e}"),
        });
    }
    Ok(vec![
        format!("cocycle {}: max violation {:.3e}", w.label(), check.max_violation),
        format!("untwist round trip: max error {recon:.3e} over {} triples", params.samples),
    ])
}

#[derive(Serialize)]
struct EdgeParams {
    model: ModelSpec,
    disorder: DisorderSpec,
    edge: roelab::spectral::EdgeOptions,
}

pub fn edge(config: &Config) -> Result<Vec<String>> {
    let params = EdgeParams { model: config.model()?, disorder: config.disorder()?, edge: config.edge()? };
    let mut run = Run::new("edge", Some(&config.path), &params, vec![params.disorder.seed], config.output_dir()?)?;
    let e = edge_spectrum(&params.model, &params.disorder, &params.edge)?;
    let mut rows = Vec::new();
    for (k, bands) in e.bands.iter().enumerate() {
        for (b, energy) in bands.iter().enumerate() {
            rows.push(vec![
                k.to_string(),
                num(e.momenta[k]),
                b.to_string(),
                num(*energy),
                num(e.lower_weights[k][b]),
                num(e.upper_weights[k][b]),
            ]);
        }
    }
    run.csv("edge_bands.csv", &["k_index", "momentum", "band", "energy", "lower_weight", "upper_weight"], &rows)?;
    let crossings: Vec<Vec<String>> = e
        .crossings
        .iter()
        .map(|c| {
            vec![
                c.k_index.to_string(),
                c.band.to_string(),
                c.sign.to_string(),
                to_json(&c.side).as_str().unwrap_or_default().to_string(),
                num(c.lower_weight),
                num(c.upper_weight),
            ]
        })
        .collect();
    run.csv("edge_crossings.csv", &["k_index", "band", "sign", "side", "lower_weight", "upper_weight"], &crossings)?;
    run.jsonl(
        "edge.jsonl",
        vec![json!({
            "chirality": e.chirality,
            "upper_chirality": e.upper_chirality,
            "crossings": e.crossings.len(),
            "warnings": e.warnings,
        })],
    )?;
    run.finish()?;
    let mut lines: Vec<String> = e.warnings.iter().map(|w| format!("warning: {w}")).collect();
    lines.push(format!("{} Fermi-level crossings", e.crossings.len()));
    lines.push(format!("edge chirality = {} (upper edge {})", e.chirality, e.upper_chirality));
    Ok(lines)
}

#[derive(Serialize)]
struct SweepParams {
    model: ModelSpec,
    disorder: DisorderSpec,
    pairing: PairingConfig,
    sweep: SweepConfig,
}

#[derive(Clone, Debug, PartialEq)]
struct SweepRow {
    strength: f64,
    seed: u64,
    outcome: String,
    index: Option<i64>,
    converged: bool,
    raw_index: Option<f64>,
    oracle: Option<f64>,
}

/// Thread count from the environment, if set.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_VAR) {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!("{THREADS_VAR} must be a positive integer, got `{s}`"))),
        },
    }
}

fn sweep_job(p: &SweepParams, strength: f64, seed: u64) -> SweepRow {
    let dis = DisorderSpec { potential: strength, seed, ..p.disorder.clone() };
    let mut row = SweepRow { strength, seed, outcome: String::new(), index: None, converged: false, raw_index: None, oracle: None };
    match run_pairing_experiment(&p.model, &dis, &p.pairing.experiment()) {
        Ok(exp) => {
            row.index = Some(exp.result.index);
            row.converged = exp.result.converged;
            row.raw_index = exp.result.windows.last().map(|w| w.raw_index);
            row.oracle = exp.oracle.map(|o| o.value);
            row.outcome = if exp.result.converged { exp.result.index.to_string() } else { "unconverged".into() };
        }
        Err(Error::GapClosed { .. }) => row.outcome = "gap_closed".into(),
        Err(e) => row.outcome = format!("error: {e}"),
    }
    row
}

pub fn sweep(config: &Config) -> Result<Vec<String>> {
    let params = SweepParams {
        model: config.model()?,
        disorder: config.disorder()?,
        pairing: config.pairing()?,
        sweep: config.sweep()?,
    };
    let threads = threads_from_env()?;
    let mut run = Run::new("sweep", Some(&config.path), &params, params.sweep.seeds.clone(), config.output_dir()?)?;
    let jobs: Vec<(f64, u64)> =
        params.sweep.strengths.iter().flat_map(|&w| params.sweep.seeds.iter().map(move |&s| (w, s))).collect();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let mut rows: Vec<SweepRow> = pool.install(|| jobs.par_iter().map(|&(w, s)| sweep_job(&params, w, s)).collect());
    rows.sort_by(|a, b| a.strength.total_cmp(&b.strength).then(a.seed.cmp(&b.seed)));

    let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                num(r.strength),
                r.seed.to_string(),
                r.outcome.clone(),
                r.index.map(|i| i.to_string()).unwrap_or_default(),
                r.converged.to_string(),
                opt(r.raw_index),
                opt(r.oracle),
            ]
        })
        .collect();
    run.csv("sweep.csv", &["strength", "seed", "outcome", "index", "converged", "raw_index", "oracle"], &table)?;

    let mut hist: Vec<(f64, String, usize)> = Vec::new();
    for r in &rows {
        match hist.iter_mut().find(|(w, o, _)| *w == r.strength && *o == r.outcome) {
            Some(h) => h.2 += 1,
            None => hist.push((r.strength, r.outcome.clone(), 1)),
        }
    }
    hist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let hist_rows: Vec<Vec<String>> = hist.iter().map(|(w, o, c)| vec![num(*w), o.clone(), c.to_string()]).collect();
    run.csv("sweep_histogram.csv", &["strength", "outcome", "count"], &hist_rows)?;
    run.jsonl(
        "sweep.jsonl",
        rows.iter()
            .map(|r| {
                json!({
                    "strength": r.strength, "seed": r.seed, "outcome": r.outcome, "index": r.index,
                    "converged": r.converged, "raw_index": r.raw_index, "oracle": r.oracle,
                })
            })
            .collect(),
    )?;
    run.finish()?;
    Ok(hist.iter().map(|(w, o, c)| format!("W = {w}: {o} x {c}")).collect())
}

#[derive(Serialize)]
struct KtableParams {
    field: Option<Field>,
    dmin: i64,
    dmax: i64,
}

pub fn ktable(field: Option<Field>, dmin: i64, dmax: i64, out: &Path) -> Result<Vec<String>> {
    if dmin > dmax || dmin < 0 {
        return Err(Error::Config(format!("need 0 <= dmin <= dmax, got {dmin}..{dmax}")));
    }
    let params = KtableParams { field, dmin, dmax };
    let mut run = Run::new("ktable", None, &params, vec![], out.to_path_buf())?;
    let table = kitaev_table(dmin..=dmax, field);
    let text = table.to_text();
    run.write("ktable.txt", text.as_bytes())?;
    let mut header = vec!["class".to_string(), "field".into(), "s".into()];
    header.extend(table.dims.iter().map(|d| format!("d{d}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| {
            let mut v = vec![r.label.to_string(), r.field.to_string(), r.shift.to_string()];
            v.extend(r.entries.iter().map(|g| g.to_string()));
            v
        })
        .collect();
    run.csv("ktable.csv", &header, &rows)?;
    run.finish()?;
    Ok(text.lines().map(str::to_string).collect())
}
