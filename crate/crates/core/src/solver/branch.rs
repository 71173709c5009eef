//! Best-bound branch and bound over the binary variables of a model.

use super::simplex::solve_lp_bounded;
use super::{
    LpStatus, MilpSolution, MilpStatus, SolverError, SolverOptions, INTEGRALITY_TOL,
};
use crate::model::MilpModel;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

struct Node {
    bound: f64,
    seq: u64,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.bound == other.bound && self.seq == other.seq
    }
}
impl Eq for Node {}

impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap is a max-heap; reverse for best-bound (smallest first),
        // ties by insertion order.
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn fractional_binary(model: &MilpModel, primal: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (j, &is_int) in model.integer.iter().enumerate() {
        if !is_int {
            continue;
        }
        let x = primal[j];
        let frac = (x - x.round()).abs();
        if frac <= INTEGRALITY_TOL {
            continue;
        }
        let score = frac.min(1.0 - frac);
        match best {
            Some((_, s)) if s >= score => {}
            _ => best = Some((j, score)),
        }
    }
    best.map(|(j, _)| j)
}

fn gap(incumbent: f64, bound: f64) -> f64 {
    ((incumbent - bound) / incumbent.abs().max(1e-9)).max(0.0)
}

pub(crate) fn branch_and_bound(
    model: &MilpModel,
    options: &SolverOptions,
) -> Result<MilpSolution, SolverError> {
    let start = Instant::now();
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    let mut node_count = 0u64;
    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut limits_hit = false;

    heap.push(Node {
        bound: f64::NEG_INFINITY,
        seq,
        lower: model.lower.clone(),
        upper: model.upper.clone(),
    });

    let mut final_bound = f64::NEG_INFINITY;
    while let Some(node) = heap.pop() {
        final_bound = node.bound;
        if let Some((inc_obj, _)) = &incumbent {
            if gap(*inc_obj, node.bound) <= options.gap_target {
                // Best-bound order makes this bound global; the incumbent is
                // already within the requested gap.
                heap.clear();
                break;
            }
        }
        if let Some(limit) = options.time_limit {
            if start.elapsed().as_secs_f64() > limit {
                limits_hit = true;
                break;
            }
        }
        if let Some(limit) = options.node_limit {
            if node_count >= limit {
                limits_hit = true;
                break;
            }
        }

        let lp = solve_lp_bounded(model, &node.lower, &node.upper)?;
        node_count += 1;
        match lp.status {
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => {
                return Err(SolverError::NumericalFailure(
                    "unbounded LP relaxation".into(),
                ))
            }
            LpStatus::Optimal => {}
        }
        if let Some((inc_obj, _)) = &incumbent {
            if gap(*inc_obj, lp.objective) <= options.gap_target {
                continue;
            }
        }

        match fractional_binary(model, &lp.primal) {
            None => {
                let mut primal = lp.primal;
                for (j, &is_int) in model.integer.iter().enumerate() {
                    if is_int {
                        primal[j] = primal[j].round();
                    }
                }
                let better = match &incumbent {
                    None => true,
                    Some((inc_obj, _)) => {
                        lp.objective < inc_obj - 1e-9 * inc_obj.abs().max(1.0)
                    }
                };
                if better {
                    incumbent = Some((lp.objective, primal));
                }
            }
            Some(j) => {
                let mut down = Node {
                    bound: lp.objective,
                    seq: { seq += 1; seq },
                    lower: node.lower.clone(),
                    upper: node.upper.clone(),
                };
                down.upper[j] = 0.0;
                heap.push(down);
                let mut up = Node {
                    bound: lp.objective,
                    seq: { seq += 1; seq },
                    lower: node.lower,
                    upper: node.upper,
                };
                up.lower[j] = 1.0;
                heap.push(up);
            }
        }
    }

    // Best-bound pop order makes the last popped bound the global lower
    // bound; everything still on the heap is at least as large.
    let best_bound = final_bound;

    match incumbent {
        Some((objective, primal)) => {
            let exhausted = heap.is_empty() && !limits_hit;
            let bound = if exhausted { objective } else { best_bound };
            let achieved_gap = gap(objective, bound);
            let status = if exhausted || achieved_gap <= 1e-9 {
                MilpStatus::Optimal
            } else if achieved_gap <= options.gap_target {
                MilpStatus::GapLimit
            } else {
                MilpStatus::Feasible
            };
            Ok(MilpSolution {
                status,
                primal,
                objective,
                best_bound: bound,
                achieved_gap,
                node_count,
            })
        }
        None => Ok(MilpSolution {
            status: if limits_hit {
                MilpStatus::Unknown
            } else {
                MilpStatus::Infeasible
            },
            primal: Vec::new(),
            objective: f64::INFINITY,
            best_bound,
            achieved_gap: f64::INFINITY,
            node_count,
        }),
    }
}
