//! Binary Bayesian networks: variables, conditional probability tables and
//! structural validation.
//!
//! A variable's declaration index doubles as its qubit index. CPT rows are
//! stored densely: row `r` holds `P(var = 1 | parents)` for the assignment
//! whose bits, read with the first listed parent as the most significant
//! bit, spell `r`.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cpt {
    parents: Vec<usize>,
    rows: Vec<f64>,
}

impl Cpt {
    pub fn new(parents: Vec<usize>, rows: Vec<f64>) -> Self {
        Cpt { parents, rows }
    }

    /// A parentless table with a single prior row.
    pub fn prior(p: f64) -> Self {
        Cpt {
            parents: Vec::new(),
            rows: vec![p],
        }
    }

    pub fn parents(&self) -> &[usize] {
        &self.parents
    }

    pub fn rows(&self) -> &[f64] {
        &self.rows
    }

    pub fn rows_mut(&mut self) -> &mut [f64] {
        &mut self.rows
    }

    pub fn is_root(&self) -> bool {
        self.parents.is_empty()
    }

    /// Parent bits for `row`, in listed-parent order.
    pub fn row_bits(&self, row: usize) -> Vec<bool> {
        let k = self.parents.len();
        (0..k).map(|j| (row >> (k - 1 - j)) & 1 == 1).collect()
    }

    /// Row ordinal for the parent bits given in listed-parent order.
    pub fn row_index<I: IntoIterator<Item = bool>>(bits: I) -> usize {
        bits.into_iter().fold(0, |acc, b| (acc << 1) | b as usize)
    }

    /// `P(var = 1 | parents)` with the parent values read from a full
    /// assignment packed as basis-index bits.
    pub fn p_one_given(&self, assignment: usize) -> f64 {
        let row = Self::row_index(self.parents.iter().map(|&p| (assignment >> p) & 1 == 1));
        self.rows[row]
    }
}

/// One structural or numerical problem with a network.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Violation {
    #[error("invalid variable name {0:?}")]
    InvalidName(String),
    #[error("duplicate variable name {0:?}")]
    DuplicateName(String),
    #[error("{variables} variables but {cpts} CPTs")]
    CptCount { variables: usize, cpts: usize },
    #[error("{variable}: undeclared parent (index {parent})")]
    DanglingParent { variable: String, parent: usize },
    #[error("{variable}: parent {parent} listed twice")]
    DuplicateParent { variable: String, parent: String },
    #[error("{variable}: missing CPT row, expected {expected} rows, found {found}")]
    MissingRows {
        variable: String,
        expected: usize,
        found: usize,
    },
    #[error("{variable}: probability out of range ({value}) in row {row}")]
    ProbabilityOutOfRange {
        variable: String,
        row: String,
        value: f64,
    },
    #[error("{0}")]
    Cycle(Cycle),
}

/// Members of one directed cycle, in parent-to-child order.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct Cycle(pub Vec<String>);

impl fmt::Display for Cycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0.as_slice() {
            [a] => write!(f, "cycle: {a}→{a}"),
            [a, b] => write!(f, "cycle: {a}↔{b}"),
            members => {
                write!(f, "cycle: ")?;
                for m in members {
                    write!(f, "{m}→")?;
                }
                write!(f, "{}", members[0])
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid network: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
pub struct Violations(pub Vec<Violation>);

/// Declarative binary Bayesian network. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct BayesNet {
    variables: Vec<Variable>,
    cpts: Vec<Cpt>,
}

pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl BayesNet {
    /// Builds and validates a network.
    pub fn new<S: Into<String>>(names: Vec<S>, cpts: Vec<Cpt>) -> Result<Self, Violations> {
        let net = Self::from_parts(names, cpts);
        let violations = net.validate();
        if violations.is_empty() {
            Ok(net)
        } else {
            Err(Violations(violations))
        }
    }

    /// Assembles a network without checking it. Use [`BayesNet::validate`]
    /// before handing it to the compiler.
    pub fn from_parts<S: Into<String>>(names: Vec<S>, cpts: Vec<Cpt>) -> Self {
        let variables = names
            .into_iter()
            .enumerate()
            .map(|(index, name)| Variable {
                name: name.into(),
                index,
            })
            .collect();
        BayesNet { variables, cpts }
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn cpts(&self) -> &[Cpt] {
        &self.cpts
    }

    pub fn cpt(&self, index: usize) -> &Cpt {
        &self.cpts[index]
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn name(&self, index: usize) -> &str {
        &self.variables[index].name
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    /// Same structure, new CPT probabilities. `f` sees `(variable, row, p)`.
    pub fn map_probabilities<F: FnMut(usize, usize, f64) -> f64>(&self, mut f: F) -> Self {
        let mut net = self.clone();
        for (v, cpt) in net.cpts.iter_mut().enumerate() {
            for (r, p) in cpt.rows.iter_mut().enumerate() {
                *p = f(v, r, *p);
            }
        }
        net
    }

    /// Every problem with the network; empty means valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.variables.len();
        let mut seen = BTreeSet::new();
        for v in &self.variables {
            if !is_identifier(&v.name) {
                out.push(Violation::InvalidName(v.name.clone()));
            }
            if !seen.insert(v.name.as_str()) {
                out.push(Violation::DuplicateName(v.name.clone()));
            }
        }
        if self.cpts.len() != n {
            out.push(Violation::CptCount {
                variables: n,
                cpts: self.cpts.len(),
            });
        }
        let mut structural_ok = true;
        for (v, cpt) in self.cpts.iter().enumerate().take(n) {
            let name = &self.variables[v].name;
            let mut listed = BTreeSet::new();
            for &p in &cpt.parents {
                if p >= n {
                    structural_ok = false;
                    out.push(Violation::DanglingParent {
                        variable: name.clone(),
                        parent: p,
                    });
                } else if !listed.insert(p) {
                    out.push(Violation::DuplicateParent {
                        variable: name.clone(),
                        parent: self.variables[p].name.clone(),
                    });
                }
            }
            let expected = 1usize.checked_shl(cpt.parents.len() as u32).unwrap_or(0);
            if cpt.rows.len() != expected {
                out.push(Violation::MissingRows {
                    variable: name.clone(),
                    expected,
                    found: cpt.rows.len(),
                });
                continue;
            }
            for (r, &p) in cpt.rows.iter().enumerate() {
                if !(0.0..=1.0).contains(&p) {
                    out.push(Violation::ProbabilityOutOfRange {
                        variable: name.clone(),
                        row: self.describe_row(v, r),
                        value: p,
                    });
                }
            }
        }
        if structural_ok && self.cpts.len() == n {
            if let Err(cycle) = self.topological_order() {
                out.push(Violation::Cycle(cycle));
            }
        }
        out
    }

    /// `"X=1,Y=0"`-style description of a CPT row (`"prior"` for roots).
    pub fn describe_row(&self, variable: usize, row: usize) -> String {
        let cpt = &self.cpts[variable];
        if cpt.is_root() {
            return "prior".to_string();
        }
        cpt.parents
            .iter()
            .zip(cpt.row_bits(row))
            .map(|(&p, b)| {
                let name = self
                    .variables
                    .get(p)
                    .map_or_else(|| format!("#{p}"), |v| v.name.clone());
                format!("{name}={}", b as u8)
            })
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Kahn's algorithm with an index-ordered frontier: parents always come
    /// first and ties go to the lower declaration index.
    pub fn topological_order(&self) -> Result<Vec<usize>, Cycle> {
        let n = self.variables.len();
        let mut children = vec![Vec::new(); n];
        let mut pending = vec![0usize; n];
        for (v, cpt) in self.cpts.iter().enumerate().take(n) {
            for &p in cpt.parents.iter().filter(|&&p| p < n) {
                children[p].push(v);
                pending[v] += 1;
            }
        }
        let mut frontier: BTreeSet<usize> = (0..n).filter(|&v| pending[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = frontier.pop_first() {
            order.push(v);
            for &c in &children[v] {
                pending[c] -= 1;
                if pending[c] == 0 {
                    frontier.insert(c);
                }
            }
        }
        if order.len() == n {
            return Ok(order);
        }
        Err(self.find_cycle(&pending))
    }

    /// Walks parent links among the unresolved variables until one repeats.
    fn find_cycle(&self, pending: &[usize]) -> Cycle {
        let n = self.variables.len();
        let start = (0..n)
            .find(|&v| pending[v] > 0)
            .expect("unresolved variable");
        let mut path = vec![start];
        let mut pos = vec![usize::MAX; n];
        pos[start] = 0;
        let mut cur = start;
        loop {
            let next = self.cpts[cur]
                .parents
                .iter()
                .copied()
                .find(|&p| p < n && pending[p] > 0)
                .expect("unresolved variable keeps an unresolved parent");
            if pos[next] != usize::MAX {
                let mut members: Vec<_> = path[pos[next]..].to_vec();
                // path runs child -> parent; report parent -> child
                members.reverse();
                let lowest = (0..members.len()).min_by_key(|&i| members[i]).unwrap_or(0);
                members.rotate_left(lowest);
                return Cycle(members.iter().map(|&v| self.name(v).to_string()).collect());
            }
            pos[next] = path.len();
            path.push(next);
            cur = next;
        }
    }
}
