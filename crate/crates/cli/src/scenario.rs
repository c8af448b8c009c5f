//! Model loading and name resolution shared by the subcommands.

use std::path::Path;

use qbi::inference::Assignment;
use qbi::model_format::parse_model;
use qbi::BayesNet;

use crate::error::CliError;

/// Embedded copy of `models/ids.qbn`, loadable as `@ids`.
pub const BUNDLED_IDS: &str = include_str!("../models/ids.qbn");

pub struct Scenario {
    pub net: BayesNet,
    /// Variable indices, leftmost first when rendering outcomes.
    pub display: Vec<usize>,
}

impl Scenario {
    pub fn load(model: &Path, order: Option<&str>) -> Result<Self, CliError> {
        let text = if model.as_os_str() == "@ids" {
            BUNDLED_IDS.to_string()
        } else {
            std::fs::read_to_string(model)
                .map_err(|e| CliError::input(format!("{}: {e}", model.display())))?
        };
        let net =
            parse_model(&text).map_err(|e| CliError::input(format!("{}: {e}", model.display())))?;
        let mut scenario = Scenario {
            display: (0..net.len()).collect(),
            net,
        };
        if let Some(order) = order {
            let display = scenario.names(order)?;
            if display.len() != scenario.net.len() {
                return Err(CliError::input(
                    "--order must list every variable exactly once",
                ));
            }
            scenario.display = display;
        }
        Ok(scenario)
    }

    pub fn index(&self, name: &str) -> Result<usize, CliError> {
        self.net
            .index_of(name)
            .ok_or_else(|| CliError::input(format!("unknown variable {name:?}")))
    }

    /// Comma-separated variable names, each at most once.
    pub fn names(&self, list: &str) -> Result<Vec<usize>, CliError> {
        let mut out = Vec::new();
        for name in list.split(',').map(str::trim) {
            let i = self.index(name)?;
            if out.contains(&i) {
                return Err(CliError::input(format!("variable {name} listed twice")));
            }
            out.push(i);
        }
        Ok(out)
    }

    /// `NAME=0|1` bindings, from repeated flags and/or comma lists.
    pub fn evidence(&self, specs: &[String]) -> Result<Assignment, CliError> {
        let mut pairs = Vec::new();
        for spec in specs.iter().flat_map(|s| s.split(',')) {
            let (name, bit) = split_binding(spec)?.ok_or_else(|| {
                CliError::input(format!("evidence {spec:?} must be NAME=0 or NAME=1"))
            })?;
            pairs.push((self.index(name)?, bit));
        }
        Assignment::from_pairs(pairs).map_err(CliError::from)
    }

    /// Target specs `NAME` or `NAME=bit`. Returns the target variables and
    /// the optional bit each must take in printed rows.
    pub fn targets(&self, specs: &[String]) -> Result<Vec<(usize, Option<bool>)>, CliError> {
        let mut out: Vec<(usize, Option<bool>)> = Vec::new();
        for spec in specs.iter().flat_map(|s| s.split(',')) {
            let (var, bit) = match split_binding(spec)? {
                Some((name, bit)) => (self.index(name)?, Some(bit)),
                None => (self.index(spec.trim())?, None),
            };
            if out.iter().any(|(v, _)| *v == var) {
                return Err(CliError::input(format!(
                    "target {} listed twice",
                    self.net.name(var)
                )));
            }
            out.push((var, bit));
        }
        if out.is_empty() {
            return Err(CliError::input("at least one --target is required"));
        }
        Ok(out)
    }

    /// Rejects a variable used both as a query target and as evidence.
    pub fn check_disjoint(&self, targets: &[usize], evidence: &Assignment) -> Result<(), CliError> {
        match targets.iter().find(|&&t| evidence.contains(t)) {
            Some(&t) => Err(CliError::input(format!(
                "variable {} is both a target and evidence",
                self.net.name(t)
            ))),
            None => Ok(()),
        }
    }

    /// `vars` sorted into display order.
    pub fn in_display_order(&self, vars: &[usize]) -> Vec<usize> {
        self.display
            .iter()
            .copied()
            .filter(|v| vars.contains(v))
            .collect()
    }

    pub fn label(&self, vars: &[usize]) -> String {
        vars.iter()
            .map(|&v| self.net.name(v))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn describe_evidence(&self, evidence: &Assignment) -> String {
        let mut parts: Vec<(usize, bool)> = evidence.iter().collect();
        parts.sort_by_key(|(v, _)| self.display.iter().position(|d| d == v));
        parts
            .iter()
            .map(|&(v, b)| format!("{}={}", self.net.name(v), b as u8))
            .collect::<Vec<_>>()
            .join(",")
    }
}

fn split_binding(spec: &str) -> Result<Option<(&str, bool)>, CliError> {
    let Some((name, bit)) = spec.split_once('=') else {
        return Ok(None);
    };
    let bit = match bit.trim() {
        "0" => false,
        "1" => true,
        other => {
            return Err(CliError::input(format!(
                "{other:?} is not a bit in {spec:?}"
            )))
        }
    };
    Ok(Some((name.trim(), bit)))
}
