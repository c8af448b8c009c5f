//! Subcommand implementations. Each returns the full text it prints so the
//! output can be checked byte for byte.

use std::fmt::Write as _;
use std::path::Path;

use qbi::compile;
use qbi::inference::{conditional, infer_joint, marginal, Assignment, Distribution, Outcome};
use qbi::metrics::{
    cdf_over_sorted_outcomes, entropy, fidelity, mutual_information, posterior_entropy, top_k,
};
use qbi::oracle::oracle_query;
use qbi::perturb::{run_perturbation, PerturbConfig, PerturbReport};
use serde_json::json;

use crate::error::CliError;
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Engine {
    Quantum,
    Classical,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

pub fn fmt_prob(p: f64) -> String {
    format!("{p:.12}")
}

pub fn fmt_metric(v: f64) -> String {
    // keep "-0.000000000" out of golden files
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.9}")
}

fn query_title(s: &Scenario, targets: &[usize], evidence: &Assignment) -> String {
    if evidence.is_empty() {
        format!("P({})", s.label(targets))
    } else {
        format!(
            "P({} | {})",
            s.label(targets),
            s.describe_evidence(evidence)
        )
    }
}

fn quantum_conditional(
    joint: &Distribution,
    targets: &[usize],
    evidence: &Assignment,
) -> Result<Distribution, CliError> {
    Ok(conditional(joint, targets, evidence)?)
}

pub fn cmd_query(
    s: &Scenario,
    target_specs: &[String],
    evidence_specs: &[String],
    engine: Engine,
) -> Result<String, CliError> {
    let requested = s.targets(target_specs)?;
    let evidence = s.evidence(evidence_specs)?;
    let vars = s.in_display_order(&requested.iter().map(|(v, _)| *v).collect::<Vec<_>>());
    let wanted: Vec<Option<bool>> = vars
        .iter()
        .map(|v| requested.iter().find(|(r, _)| r == v).and_then(|(_, b)| *b))
        .collect();
    s.check_disjoint(&vars, &evidence)?;
    let keep = |o: &Outcome| {
        o.0.iter()
            .zip(&wanted)
            .all(|(bit, w)| w.is_none_or(|w| w == *bit))
    };

    let mut results: Vec<(&str, Distribution)> = Vec::new();
    if matches!(engine, Engine::Quantum | Engine::Both) {
        let joint = infer_joint(&s.net)?;
        results.push(("quantum", quantum_conditional(&joint, &vars, &evidence)?));
    }
    if matches!(engine, Engine::Classical | Engine::Both) {
        results.push(("classical", oracle_query(&s.net, &vars, &evidence)?));
    }

    let title = query_title(s, &vars, &evidence);
    let mut out = String::new();
    for (name, dist) in &results {
        let _ = writeln!(out, "# {title} [{name}]");
        for (o, p) in dist.outcomes().iter().filter(|(o, _)| keep(o)) {
            let _ = writeln!(out, "{o} {}", fmt_prob(*p));
        }
    }
    if let [(_, a), (_, b)] = results.as_slice() {
        let diff = a
            .probabilities()
            .iter()
            .zip(b.probabilities())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        let _ = writeln!(out, "max_abs_diff={diff:.3e}");
    }
    Ok(out)
}

pub enum DistSelection {
    Joint,
    Marginal(String),
    Conditional(String),
    Heatmap(String),
}

pub fn cmd_dist(
    s: &Scenario,
    selection: &DistSelection,
    evidence_specs: &[String],
    format: Format,
) -> Result<String, CliError> {
    let evidence = s.evidence(evidence_specs)?;
    let joint = infer_joint(&s.net)?;
    if let DistSelection::Heatmap(names) = selection {
        // keep the user's row/column choice rather than display order
        let pair = s.names(names)?;
        if pair.len() != 2 {
            return Err(CliError::input("--heatmap needs exactly two variables"));
        }
        s.check_disjoint(&pair, &evidence)?;
        let d = quantum_conditional(&joint, &pair, &evidence)?;
        return Ok(render_heatmap(s, &pair, &d, format));
    }
    let (vars, dist) = match selection {
        DistSelection::Joint | DistSelection::Marginal(_) if !evidence.is_empty() => {
            return Err(CliError::input(
                "--joint and --marginal take no evidence; use --conditional",
            ));
        }
        DistSelection::Joint => (s.display.clone(), marginal(&joint, &s.display)?),
        DistSelection::Marginal(names) => {
            let vars = s.in_display_order(&s.names(names)?);
            let d = marginal(&joint, &vars)?;
            (vars, d)
        }
        DistSelection::Conditional(names) | DistSelection::Heatmap(names) => {
            let vars = s.in_display_order(&s.names(names)?);
            s.check_disjoint(&vars, &evidence)?;
            let d = quantum_conditional(&joint, &vars, &evidence)?;
            (vars, d)
        }
    };
    Ok(match format {
        Format::Csv => render_csv(&dist.outcomes(), None),
        Format::Json => {
            let outcomes: Vec<_> = dist
                .outcomes()
                .iter()
                .map(|(o, p)| json!({"outcome": o.to_string(), "probability": p}))
                .collect();
            let evidence: serde_json::Map<String, serde_json::Value> = evidence
                .iter()
                .map(|(v, b)| (s.net.name(v).to_string(), json!(b as u8)))
                .collect();
            let doc = json!({
                "variables": vars.iter().map(|&v| s.net.name(v)).collect::<Vec<_>>(),
                "evidence": evidence,
                "outcomes": outcomes,
            });
            let mut text = serde_json::to_string_pretty(&doc).expect("json value serializes");
            text.push('\n');
            text
        }
    })
}

fn render_heatmap(s: &Scenario, pair: &[usize], d: &Distribution, format: Format) -> String {
    let (row, col) = (s.net.name(pair[0]), s.net.name(pair[1]));
    let cell = |r: bool, c: bool| d.get(&Outcome(vec![r, c])).unwrap_or(0.0);
    match format {
        Format::Csv => {
            let mut out = format!("{row}\\{col},{col}=0,{col}=1\n");
            for r in [false, true] {
                let _ = writeln!(
                    out,
                    "{row}={},{},{}",
                    r as u8,
                    fmt_prob(cell(r, false)),
                    fmt_prob(cell(r, true))
                );
            }
            out
        }
        Format::Json => {
            let matrix: Vec<Vec<f64>> = [false, true]
                .iter()
                .map(|&r| vec![cell(r, false), cell(r, true)])
                .collect();
            let doc = json!({"rows": row, "columns": col, "matrix": matrix});
            let mut text = serde_json::to_string_pretty(&doc).expect("json value serializes");
            text.push('\n');
            text
        }
    }
}

/// `outcome,probability[,cumulative]` with a header row.
pub fn render_csv(rows: &[(Outcome, f64)], cumulative: Option<&[f64]>) -> String {
    let mut out = String::from("outcome,probability");
    if cumulative.is_some() {
        out.push_str(",cumulative");
    }
    out.push('\n');
    for (i, (o, p)) in rows.iter().enumerate() {
        let _ = write!(out, "{o},{}", fmt_prob(*p));
        if let Some(c) = cumulative {
            let _ = write!(out, ",{}", fmt_prob(c[i]));
        }
        out.push('\n');
    }
    out
}

/// Reads an `outcome,probability` CSV as produced by `dist`.
pub fn read_distribution_csv(path: &Path) -> Result<Distribution, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let bad =
        |line: usize, what: &str| CliError::input(format!("{}:{line}: {what}", path.display()));
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim().starts_with("outcome,probability") => {}
        _ => return Err(bad(1, "expected header `outcome,probability`")),
    }
    let mut entries = Vec::new();
    let mut width = None;
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut cols = line.split(',');
        let (Some(o), Some(p)) = (cols.next(), cols.next()) else {
            return Err(bad(i + 1, "expected two columns"));
        };
        let outcome: Outcome = o.trim().parse().map_err(|_| bad(i + 1, "bad outcome"))?;
        let p: f64 = p
            .trim()
            .parse()
            .map_err(|_| bad(i + 1, "bad probability"))?;
        if *width.get_or_insert(outcome.0.len()) != outcome.0.len() {
            return Err(bad(i + 1, "outcomes of different widths"));
        }
        entries.push((outcome, p));
    }
    let width = width.ok_or_else(|| bad(2, "no rows"))?;
    Distribution::from_outcomes((0..width).collect(), entries)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn outcome_support(path: &Path) -> Result<Vec<String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let mut v: Vec<String> = text
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .filter_map(|l| l.split(',').next().map(|o| o.trim().to_string()))
        .collect();
    v.sort();
    Ok(v)
}

#[derive(Default)]
pub struct MetricRequest {
    pub entropy: Option<String>,
    pub posterior_entropy: Option<String>,
    pub evidence: Vec<String>,
    pub mi: Option<String>,
    pub fidelity: Option<(std::path::PathBuf, std::path::PathBuf)>,
    pub cdf: bool,
    pub top: Option<usize>,
}

pub fn cmd_metrics(s: &Scenario, req: &MetricRequest) -> Result<String, CliError> {
    let nothing = req.entropy.is_none()
        && req.posterior_entropy.is_none()
        && req.mi.is_none()
        && req.fidelity.is_none()
        && !req.cdf
        && req.top.is_none();
    if nothing {
        return Err(CliError::input(
            "choose at least one of --entropy, --posterior-entropy, --mi, --fidelity, --cdf, --top",
        ));
    }
    if !req.evidence.is_empty() && req.posterior_entropy.is_none() {
        return Err(CliError::input(
            "--evidence only applies to --posterior-entropy",
        ));
    }
    let joint = infer_joint(&s.net)?;
    let mut out = String::new();
    if let Some(name) = &req.entropy {
        let v = s.index(name)?;
        let h = entropy(&marginal(&joint, &[v])?);
        let _ = writeln!(out, "entropy({name})={}", fmt_metric(h));
    }
    if let Some(name) = &req.posterior_entropy {
        let v = s.index(name)?;
        let evidence = s.evidence(&req.evidence)?;
        s.check_disjoint(&[v], &evidence)?;
        let h = posterior_entropy(&joint, v, &evidence)?;
        let label = if evidence.is_empty() {
            name.clone()
        } else {
            format!("{name}|{}", s.describe_evidence(&evidence))
        };
        let _ = writeln!(out, "posterior_entropy({label})={}", fmt_metric(h));
    }
    if let Some(pair) = &req.mi {
        let vars = s.names(pair)?;
        let [a, b] = vars[..] else {
            return Err(CliError::input(
                "--mi needs exactly two variables, e.g. --mi X,Y",
            ));
        };
        let mi = mutual_information(&joint, a, b)?;
        let _ = writeln!(
            out,
            "mutual_information({};{})={}",
            s.net.name(a),
            s.net.name(b),
            fmt_metric(mi)
        );
    }
    if let Some((pa, pb)) = &req.fidelity {
        let (da, db) = (read_distribution_csv(pa)?, read_distribution_csv(pb)?);
        if outcome_support(pa)? != outcome_support(pb)? || da.scope() != db.scope() {
            return Err(CliError::input(format!(
                "{} and {} do not share an outcome set",
                pa.display(),
                pb.display()
            )));
        }
        let _ = writeln!(out, "fidelity={}", fmt_metric(fidelity(&da, &db)?));
    }
    let display_joint = marginal(&joint, &s.display)?;
    if req.cdf {
        let cdf = cdf_over_sorted_outcomes(&display_joint);
        let rows: Vec<(Outcome, f64)> = cdf
            .iter()
            .map(|(o, _)| (o.clone(), display_joint.get(o).unwrap_or(0.0)))
            .collect();
        let cumulative: Vec<f64> = cdf.iter().map(|(_, c)| *c).collect();
        out.push_str(&render_csv(&rows, Some(&cumulative)));
    }
    if let Some(k) = req.top {
        if k == 0 {
            return Err(CliError::input("--top needs k >= 1"));
        }
        let rows = top_k(&display_joint, k);
        let cumulative: Vec<f64> = cdf_over_sorted_outcomes(&display_joint)
            .into_iter()
            .take(rows.len())
            .map(|(_, c)| c)
            .collect();
        out.push_str(&render_csv(&rows, Some(&cumulative)));
    }
    Ok(out)
}

pub fn cmd_perturb(s: &Scenario, noise: f64, trials: usize, seed: u64) -> Result<String, CliError> {
    let net = &s.net;
    let report = run_perturbation(
        net,
        PerturbConfig {
            noise,
            trials,
            seed,
        },
    )?;
    Ok(render_perturb(s, &report))
}

fn top_label(s: &Scenario, outcomes: &[(Outcome, f64)]) -> String {
    outcomes
        .iter()
        .map(|(o, _)| display_outcome(s, o))
        .collect::<Vec<_>>()
        .join(";")
}

/// Re-renders a declaration-order joint outcome in display order.
fn display_outcome(s: &Scenario, o: &Outcome) -> String {
    Outcome(s.display.iter().map(|&v| o.0[v]).collect()).to_string()
}

fn render_perturb(s: &Scenario, r: &PerturbReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "noise={}", fmt_metric(r.config.noise));
    let _ = writeln!(out, "trials={}", r.config.trials);
    let _ = writeln!(out, "seed={}", r.config.seed);
    let _ = writeln!(out, "baseline_top3={}", top_label(s, &r.baseline.outcomes));
    let _ = writeln!(out, "baseline_top3_mass={}", fmt_metric(r.baseline.mass));
    out.push_str("trial,top3,top3_mass,agrees\n");
    for (i, t) in r.trials.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            i + 1,
            top_label(s, &t.outcomes),
            fmt_metric(t.mass),
            r.agrees(i) as u8
        );
    }
    let _ = writeln!(out, "agreement={}", fmt_metric(r.agreement));
    let _ = writeln!(out, "min_top3_mass={}", fmt_metric(r.min_mass));
    let _ = writeln!(out, "mean_top3_mass={}", fmt_metric(r.mean_mass));
    out
}

pub fn cmd_circuit(s: &Scenario) -> Result<String, CliError> {
    compile(&s.net)
        .map(|c| c.to_string())
        .map_err(|e| CliError::input(e.to_string()))
}
