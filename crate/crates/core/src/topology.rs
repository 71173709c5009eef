//! Network topology analysis: radial line detection and credible
//! contingency sets.
//!
//! A line is radial when removing it disconnects the network, i.e. when it is
//! a bridge of the undirected multigraph formed by the buses and lines.
//! Radial lines are excluded from the line contingency list (their loss
//! isolates load and no corrective dispatch exists) but remain in every
//! network, including post-contingency ones.

use crate::case::SystemCase;
use std::collections::BTreeSet;
use std::fmt;

/// Kind of a single-element outage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CtgKind {
    Line,
    Generator,
}

impl CtgKind {
    /// One-letter code used in variable names and contingency keys.
    pub fn code(self) -> char {
        match self {
            CtgKind::Line => 'L',
            CtgKind::Generator => 'G',
        }
    }
}

/// A single credible contingency with its occurrence probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contingency {
    pub kind: CtgKind,
    /// Line id or generator id, depending on `kind`.
    pub element: u32,
    pub probability: f64,
}

impl Contingency {
    /// Compact key such as `L7` or `G12`, used in file formats.
    pub fn key(&self) -> String {
        format!("{}{}", self.kind.code(), self.element)
    }
}

/// An ordered list of credible contingencies.
///
/// Lines come first in ascending id order, then generators in ascending id
/// order. Probabilities are uniform within each kind: `1/|K_c|` over
/// non-radial lines and `1/|G|` over generators.
#[derive(Debug, Clone, PartialEq)]
pub struct ContingencySet {
    pub contingencies: Vec<Contingency>,
    pub includes_lines: bool,
    pub includes_generators: bool,
}

impl ContingencySet {
    pub fn len(&self) -> usize {
        self.contingencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contingencies.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Contingency> {
        self.contingencies.iter()
    }
}

/// Errors from topology analysis.
#[derive(Debug, Clone, PartialEq)]
pub enum TopologyError {
    /// The line graph does not reach this bus.
    Disconnected { bus: u32 },
    /// Line contingencies were requested but every line is radial.
    NoNonRadialLines,
    /// Generator contingencies were requested on a case without generators.
    NoGenerators,
}

impl fmt::Display for TopologyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TopologyError::Disconnected { bus } => {
                write!(f, "bus {bus} is not connected to the rest of the network")
            }
            TopologyError::NoNonRadialLines => {
                write!(f, "every line is radial, no line contingency is credible")
            }
            TopologyError::NoGenerators => {
                write!(f, "the case has no generators to build generator contingencies from")
            }
        }
    }
}

impl std::error::Error for TopologyError {}

/// Finds the radial (bridge) lines of the case network.
///
/// Runs an iterative depth-first lowpoint traversal in linear time. Parallel
/// lines between the same pair of buses are handled as a multigraph: only the
/// exact tree edge is skipped when computing lowpoints, so neither line of a
/// parallel pair is ever reported as a bridge.
pub fn find_bridges(case: &SystemCase) -> Result<BTreeSet<u32>, TopologyError> {
    let n = case.buses.len();
    let mut adjacency: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (ki, line) in case.lines.iter().enumerate() {
        let f = case.bus_pos(line.from).expect("validated bus reference");
        let t = case.bus_pos(line.to).expect("validated bus reference");
        adjacency[f].push((ki, t));
        adjacency[t].push((ki, f));
    }

    const UNSEEN: usize = usize::MAX;
    let mut discovery = vec![UNSEEN; n];
    let mut low = vec![UNSEEN; n];
    let mut bridges = BTreeSet::new();

    // Frames of (vertex, edge used to enter it, next adjacency index).
    let mut stack: Vec<(usize, usize, usize)> = vec![(0, usize::MAX, 0)];
    discovery[0] = 0;
    low[0] = 0;
    let mut time = 1usize;

    while let Some(frame) = stack.last_mut() {
        let (v, entry_edge, idx) = (frame.0, frame.1, frame.2);
        if idx < adjacency[v].len() {
            frame.2 += 1;
            let (edge, w) = adjacency[v][idx];
            if edge == entry_edge {
                continue;
            }
            if discovery[w] == UNSEEN {
                discovery[w] = time;
                low[w] = time;
                time += 1;
                stack.push((w, edge, 0));
            } else {
                low[v] = low[v].min(discovery[w]);
            }
        } else {
            stack.pop();
            if let Some(parent) = stack.last() {
                let p = parent.0;
                low[p] = low[p].min(low[v]);
                if low[v] > discovery[p] {
                    bridges.insert(case.lines[entry_edge].id);
                }
            }
        }
    }

    if let Some(pos) = discovery.iter().position(|d| *d == UNSEEN) {
        return Err(TopologyError::Disconnected {
            bus: case.buses[pos].id,
        });
    }
    Ok(bridges)
}

/// Builds the credible contingency set for the requested outage kinds.
///
/// Line contingencies cover every non-radial line with uniform probability
/// `1/|K_c|`; generator contingencies cover every unit with uniform
/// probability `1/|G|`.
pub fn build_contingency_set(
    case: &SystemCase,
    include_lines: bool,
    include_generators: bool,
) -> Result<ContingencySet, TopologyError> {
    let mut contingencies = Vec::new();
    if include_lines {
        let bridges = find_bridges(case)?;
        let credible: Vec<u32> = case
            .lines
            .iter()
            .map(|k| k.id)
            .filter(|id| !bridges.contains(id))
            .collect();
        if credible.is_empty() {
            return Err(TopologyError::NoNonRadialLines);
        }
        let probability = 1.0 / credible.len() as f64;
        contingencies.extend(credible.into_iter().map(|element| Contingency {
            kind: CtgKind::Line,
            element,
            probability,
        }));
    }
    if include_generators {
        if case.generators.is_empty() {
            return Err(TopologyError::NoGenerators);
        }
        let probability = 1.0 / case.generators.len() as f64;
        contingencies.extend(case.generators.iter().map(|g| Contingency {
            kind: CtgKind::Generator,
            element: g.id,
            probability,
        }));
    }
    Ok(ContingencySet {
        contingencies,
        includes_lines: include_lines,
        includes_generators: include_generators,
    })
}
