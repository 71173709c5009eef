//! Deterministic variable indexing.
//!
//! Variables are laid out family by family, each family ordered
//! lexicographically by its subscripts:
//!
//! 1. `P(g,t)` dispatch, `u(g,t)` commitment, `v(g,t)` startup, `r(g,t)`
//!    10-minute reserve,
//! 2. `F(k,t)` base flows, `th(n,t)` base angles,
//! 3. `Pc(g,c,t)`, `Fc(k,c,t)`, `thc(n,c,t)` post-contingency copies,
//! 4. `CDR(n,c,t)` for participating buses, CDR variants only.
//!
//! Subscripts `g`, `k`, `n`, `c` are positions into the case's sorted
//! generator, line, and bus vectors and the ordered contingency list.

use super::{ModelError, ModelVariant};
use crate::case::SystemCase;
use crate::topology::{Contingency, ContingencySet};

/// Identity of a variable, in positions (not ids).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKey {
    P { g: usize, t: usize },
    U { g: usize, t: usize },
    V { g: usize, t: usize },
    R { g: usize, t: usize },
    Flow { k: usize, t: usize },
    Theta { n: usize, t: usize },
    CtgP { g: usize, c: usize, t: usize },
    CtgFlow { k: usize, c: usize, t: usize },
    CtgTheta { n: usize, c: usize, t: usize },
    Cdr { n: usize, c: usize, t: usize },
}

/// Bijective map between variable keys and contiguous indices.
#[derive(Debug, Clone, PartialEq)]
pub struct VariableIndex {
    pub variant: ModelVariant,
    pub horizon: usize,
    /// Generator ids in position order.
    pub gen_ids: Vec<u32>,
    /// Line ids in position order.
    pub line_ids: Vec<u32>,
    /// Bus ids in position order.
    pub bus_ids: Vec<u32>,
    /// Ordered contingency list (with probabilities).
    pub contingencies: Vec<Contingency>,
    /// Bus positions that carry CDR variables, ascending.
    pub participating: Vec<usize>,
    cdr_rank: Vec<Option<usize>>,
    off_u: usize,
    off_v: usize,
    off_r: usize,
    off_flow: usize,
    off_theta: usize,
    off_ctg_p: usize,
    off_ctg_flow: usize,
    off_ctg_theta: usize,
    off_cdr: usize,
    total: usize,
}

/// Builds the variable index for a case, contingency set, and variant.
///
/// Fails when the contingency set covers different outage kinds than the
/// variant secures against.
pub fn index_variables(
    case: &SystemCase,
    contingencies: &ContingencySet,
    variant: ModelVariant,
) -> Result<VariableIndex, ModelError> {
    let want_generators = variant.includes_generator_contingencies();
    if !contingencies.includes_lines || contingencies.includes_generators != want_generators {
        return Err(ModelError::VariantContingencyMismatch {
            variant,
            includes_lines: contingencies.includes_lines,
            includes_generators: contingencies.includes_generators,
        });
    }
    for ctg in contingencies.iter() {
        let known = match ctg.kind {
            crate::topology::CtgKind::Line => case.line_pos(ctg.element).is_some(),
            crate::topology::CtgKind::Generator => case.gen_pos(ctg.element).is_some(),
        };
        if !known {
            return Err(ModelError::UnknownContingencyElement {
                key: ctg.key(),
            });
        }
    }

    let t = case.horizon;
    let ng = case.generators.len();
    let nk = case.lines.len();
    let nn = case.buses.len();
    let nc = contingencies.len();

    let participating: Vec<usize> = (0..nn).filter(|n| case.cdr.participating[*n]).collect();
    let mut cdr_rank = vec![None; nn];
    for (rank, n) in participating.iter().enumerate() {
        cdr_rank[*n] = Some(rank);
    }
    let np = if variant.uses_cdr() {
        participating.len()
    } else {
        0
    };

    let off_u = ng * t;
    let off_v = 2 * ng * t;
    let off_r = 3 * ng * t;
    let off_flow = 4 * ng * t;
    let off_theta = off_flow + nk * t;
    let off_ctg_p = off_theta + nn * t;
    let off_ctg_flow = off_ctg_p + ng * nc * t;
    let off_ctg_theta = off_ctg_flow + nk * nc * t;
    let off_cdr = off_ctg_theta + nn * nc * t;
    let total = off_cdr + np * nc * t;

    Ok(VariableIndex {
        variant,
        horizon: t,
        gen_ids: case.generators.iter().map(|g| g.id).collect(),
        line_ids: case.lines.iter().map(|k| k.id).collect(),
        bus_ids: case.buses.iter().map(|b| b.id).collect(),
        contingencies: contingencies.contingencies.clone(),
        participating,
        cdr_rank,
        off_u,
        off_v,
        off_r,
        off_flow,
        off_theta,
        off_ctg_p,
        off_ctg_flow,
        off_ctg_theta,
        off_cdr,
        total,
    })
}

impl VariableIndex {
    /// Total variable count.
    pub fn total_count(&self) -> usize {
        self.total
    }

    pub fn num_gens(&self) -> usize {
        self.gen_ids.len()
    }

    pub fn num_lines(&self) -> usize {
        self.line_ids.len()
    }

    pub fn num_buses(&self) -> usize {
        self.bus_ids.len()
    }

    pub fn num_contingencies(&self) -> usize {
        self.contingencies.len()
    }

    pub fn p(&self, g: usize, t: usize) -> usize {
        g * self.horizon + t
    }

    pub fn u(&self, g: usize, t: usize) -> usize {
        self.off_u + g * self.horizon + t
    }

    pub fn v(&self, g: usize, t: usize) -> usize {
        self.off_v + g * self.horizon + t
    }

    pub fn r(&self, g: usize, t: usize) -> usize {
        self.off_r + g * self.horizon + t
    }

    pub fn flow(&self, k: usize, t: usize) -> usize {
        self.off_flow + k * self.horizon + t
    }

    pub fn theta(&self, n: usize, t: usize) -> usize {
        self.off_theta + n * self.horizon + t
    }

    pub fn ctg_p(&self, g: usize, c: usize, t: usize) -> usize {
        self.off_ctg_p + (g * self.num_contingencies() + c) * self.horizon + t
    }

    pub fn ctg_flow(&self, k: usize, c: usize, t: usize) -> usize {
        self.off_ctg_flow + (k * self.num_contingencies() + c) * self.horizon + t
    }

    pub fn ctg_theta(&self, n: usize, c: usize, t: usize) -> usize {
        self.off_ctg_theta + (n * self.num_contingencies() + c) * self.horizon + t
    }

    /// CDR variable for a bus position, or `None` when the bus does not
    /// participate or the variant has no CDR.
    pub fn cdr(&self, n: usize, c: usize, t: usize) -> Option<usize> {
        if !self.variant.uses_cdr() {
            return None;
        }
        let rank = self.cdr_rank[n]?;
        Some(self.off_cdr + (rank * self.num_contingencies() + c) * self.horizon + t)
    }

    /// Inverse of the index arithmetic.
    pub fn key_of(&self, idx: usize) -> VarKey {
        assert!(idx < self.total, "variable index {idx} out of range");
        let t = self.horizon;
        let nc = self.num_contingencies();
        if idx < self.off_u {
            VarKey::P {
                g: idx / t,
                t: idx % t,
            }
        } else if idx < self.off_v {
            let i = idx - self.off_u;
            VarKey::U { g: i / t, t: i % t }
        } else if idx < self.off_r {
            let i = idx - self.off_v;
            VarKey::V { g: i / t, t: i % t }
        } else if idx < self.off_flow {
            let i = idx - self.off_r;
            VarKey::R { g: i / t, t: i % t }
        } else if idx < self.off_theta {
            let i = idx - self.off_flow;
            VarKey::Flow { k: i / t, t: i % t }
        } else if idx < self.off_ctg_p {
            let i = idx - self.off_theta;
            VarKey::Theta { n: i / t, t: i % t }
        } else if idx < self.off_ctg_flow {
            let i = idx - self.off_ctg_p;
            VarKey::CtgP {
                g: i / (nc * t),
                c: (i / t) % nc,
                t: i % t,
            }
        } else if idx < self.off_ctg_theta {
            let i = idx - self.off_ctg_flow;
            VarKey::CtgFlow {
                k: i / (nc * t),
                c: (i / t) % nc,
                t: i % t,
            }
        } else if idx < self.off_cdr {
            let i = idx - self.off_ctg_theta;
            VarKey::CtgTheta {
                n: i / (nc * t),
                c: (i / t) % nc,
                t: i % t,
            }
        } else {
            let i = idx - self.off_cdr;
            VarKey::Cdr {
                n: self.participating[i / (nc * t)],
                c: (i / t) % nc,
                t: i % t,
            }
        }
    }

    /// Name of a variable, such as `P_g2_t1`, `F_k3_t1_cL7`, or
    /// `CDR_n4_cG12_t2`. Periods are 1-based; contingency families append
    /// `_c{kind}{id}` except CDR, which puts the contingency before the
    /// period.
    pub fn name_of(&self, idx: usize) -> String {
        match self.key_of(idx) {
            VarKey::P { g, t } => format!("P_g{}_t{}", self.gen_ids[g], t + 1),
            VarKey::U { g, t } => format!("u_g{}_t{}", self.gen_ids[g], t + 1),
            VarKey::V { g, t } => format!("v_g{}_t{}", self.gen_ids[g], t + 1),
            VarKey::R { g, t } => format!("r_g{}_t{}", self.gen_ids[g], t + 1),
            VarKey::Flow { k, t } => format!("F_k{}_t{}", self.line_ids[k], t + 1),
            VarKey::Theta { n, t } => format!("th_n{}_t{}", self.bus_ids[n], t + 1),
            VarKey::CtgP { g, c, t } => format!(
                "P_g{}_t{}_c{}",
                self.gen_ids[g],
                t + 1,
                self.contingencies[c].key()
            ),
            VarKey::CtgFlow { k, c, t } => format!(
                "F_k{}_t{}_c{}",
                self.line_ids[k],
                t + 1,
                self.contingencies[c].key()
            ),
            VarKey::CtgTheta { n, c, t } => format!(
                "th_n{}_t{}_c{}",
                self.bus_ids[n],
                t + 1,
                self.contingencies[c].key()
            ),
            VarKey::Cdr { n, c, t } => format!(
                "CDR_n{}_c{}_t{}",
                self.bus_ids[n],
                self.contingencies[c].key(),
                t + 1
            ),
        }
    }
}
