//! Howard's policy iteration for the minimum cycle mean.

use alloc::vec;
use alloc::vec::Vec;

use super::{best_over_components, MmwcResult, SolverError, MEAN_SLACK};
use crate::graph::WeightedDigraph;
use crate::sum::compensated_sum;

/// Sweep budget per component, as a multiple of its size.
pub const SWEEPS_PER_VERTEX: usize = 10;

/// Minimum mean-weight cycle by policy iteration.
///
/// Each vertex keeps one chosen out-arc. Value determination computes the
/// mean of the policy cycle every vertex drains into plus a potential;
/// improvement switches arcs towards lower means first, then lower
/// potentials. Runs in near-linear time per sweep and typically needs few
/// sweeps, so this is the solver for large instances.
pub fn howard_mmc(g: &WeightedDigraph) -> Result<MmwcResult, SolverError> {
    let mut state = State::new(g.n());
    best_over_components(g, |members, of, id| state.solve(g, members, of, id))
}

struct State {
    policy: Vec<u32>,
    policy_w: Vec<f64>,
    eta: Vec<f64>,
    pot: Vec<f64>,
    mark: Vec<u32>,
    done: Vec<bool>,
    pos: Vec<usize>,
    path: Vec<u32>,
}

impl State {
    fn new(n: usize) -> Self {
        Self {
            policy: vec![0; n],
            policy_w: vec![0.0; n],
            eta: vec![0.0; n],
            pot: vec![0.0; n],
            mark: vec![0; n],
            done: vec![false; n],
            pos: vec![0; n],
            path: Vec::new(),
        }
    }

    fn solve(&mut self, g: &WeightedDigraph, members: &[u32], of: &[u32], id: u32) -> Result<Vec<u32>, SolverError> {
        let whole = members.len() == g.n();
        let inside = |h: u32| whole || of[h as usize] == id;

        let mut wmax = 0.0f64;
        for &u in members {
            let mut best = (u32::MAX, f64::INFINITY);
            for (h, w) in g.out_arcs(u as usize) {
                if inside(h) {
                    wmax = wmax.max(w);
                    if w < best.1 {
                        best = (h, w);
                    }
                }
            }
            self.policy[u as usize] = best.0;
            self.policy_w[u as usize] = best.1;
        }
        let tol = MEAN_SLACK * (1.0 + wmax);

        let limit = SWEEPS_PER_VERTEX * members.len();
        for _ in 0..limit {
            let best_cycle = self.evaluate(members);
            let mut eta_moves: Vec<(u32, u32, f64)> = Vec::new();
            let mut pot_moves: Vec<(u32, u32, f64)> = Vec::new();
            for &u in members {
                let ui = u as usize;
                let (eu, pu) = (self.eta[ui], self.pot[ui]);
                let mut by_eta = (eu - tol, u32::MAX, 0.0);
                let mut by_pot = (pu - tol, u32::MAX, 0.0);
                for (h, w) in g.out_arcs(ui) {
                    if !inside(h) {
                        continue;
                    }
                    let ev = self.eta[h as usize];
                    if ev < by_eta.0 {
                        by_eta = (ev, h, w);
                    }
                    let val = w - eu + self.pot[h as usize];
                    if val < by_pot.0 {
                        by_pot = (val, h, w);
                    }
                }
                if by_eta.1 != u32::MAX {
                    eta_moves.push((u, by_eta.1, by_eta.2));
                } else if eta_moves.is_empty() && by_pot.1 != u32::MAX {
                    pot_moves.push((u, by_pot.1, by_pot.2));
                }
            }
            let moves = if eta_moves.is_empty() { pot_moves } else { eta_moves };
            if moves.is_empty() {
                return Ok(self.cycle_from(best_cycle));
            }
            for (u, h, w) in moves {
                self.policy[u as usize] = h;
                self.policy_w[u as usize] = w;
            }
        }
        Err(SolverError::IterationLimit { sweeps: limit })
    }

    /// Value determination. Returns a vertex on the lightest policy cycle.
    fn evaluate(&mut self, members: &[u32]) -> u32 {
        for &u in members {
            self.done[u as usize] = false;
            self.mark[u as usize] = 0;
        }
        let mut best: Option<(f64, u32)> = None;
        let mut walk_id = 0u32;
        for &start in members {
            if self.done[start as usize] {
                continue;
            }
            walk_id += 1;
            self.path.clear();
            let mut v = start as usize;
            while !self.done[v] && self.mark[v] != walk_id {
                self.mark[v] = walk_id;
                self.pos[v] = self.path.len();
                self.path.push(v as u32);
                v = self.policy[v] as usize;
            }
            if !self.done[v] {
                // Closed a new policy cycle at v.
                let from = self.pos[v];
                let cyc = &self.path[from..];
                let mean = compensated_sum(cyc.iter().map(|&c| self.policy_w[c as usize])) / cyc.len() as f64;
                if best.is_none_or(|(bm, _)| mean < bm) {
                    best = Some((mean, v as u32));
                }
                self.eta[v] = mean;
                self.pot[v] = 0.0;
                self.done[v] = true;
                for i in (from + 1..self.path.len()).rev() {
                    let c = self.path[i] as usize;
                    let next = self.policy[c] as usize;
                    self.eta[c] = mean;
                    self.pot[c] = self.policy_w[c] - mean + self.pot[next];
                    self.done[c] = true;
                }
                self.path.truncate(from);
            }
            for i in (0..self.path.len()).rev() {
                let c = self.path[i] as usize;
                let next = self.policy[c] as usize;
                self.eta[c] = self.eta[next];
                self.pot[c] = self.policy_w[c] - self.eta[c] + self.pot[next];
                self.done[c] = true;
            }
        }
        best.expect("component is nonempty").1
    }

    fn cycle_from(&self, start: u32) -> Vec<u32> {
        let mut out = vec![start];
        let mut v = self.policy[start as usize];
        while v != start {
            out.push(v);
            v = self.policy[v as usize];
        }
        out
    }
}
