//! Karp's dynamic program for the minimum cycle mean.

use alloc::vec;
use alloc::vec::Vec;

use super::{best_over_components, walk_mean, MmwcResult, SolverError, MEAN_SLACK};
use crate::graph::WeightedDigraph;
use crate::sum::compensated_sum;

const NO_PRED: u32 = u32::MAX;

/// Minimum mean-weight cycle by Karp's recurrence, one strong component at a time.
///
/// Memory is quadratic in the largest component, so this is the reference
/// solver for small and medium graphs.
pub fn karp_mmc(g: &WeightedDigraph) -> Result<MmwcResult, SolverError> {
    best_over_components(g, |members, of, id| Ok(karp_component(g, members, of, id)))
}

fn karp_component(g: &WeightedDigraph, members: &[u32], of: &[u32], id: u32) -> Vec<u32> {
    let m = members.len();
    let mut local = vec![u32::MAX; g.n()];
    for (i, &v) in members.iter().enumerate() {
        local[v as usize] = i as u32;
    }
    // dist[k * m + v]: lightest k-arc walk from members[0] to v.
    let mut dist = vec![f64::INFINITY; (m + 1) * m];
    let mut pred = vec![NO_PRED; (m + 1) * m];
    dist[0] = 0.0;
    for k in 1..=m {
        let (prev, cur) = dist.split_at_mut(k * m);
        let prev = &prev[(k - 1) * m..];
        let cur = &mut cur[..m];
        let pred_k = &mut pred[k * m..(k + 1) * m];
        for (u, &gu) in members.iter().enumerate() {
            let du = prev[u];
            if du == f64::INFINITY {
                continue;
            }
            for (h, w) in g.out_arcs(gu as usize) {
                if of[h as usize] != id {
                    continue;
                }
                let v = local[h as usize] as usize;
                let cand = du + w;
                if cand < cur[v] {
                    cur[v] = cand;
                    pred_k[v] = u as u32;
                }
            }
        }
    }

    // Karp's value per vertex; keep candidates in scan order.
    let dm = &dist[m * m..];
    let mut values: Vec<(f64, usize)> = Vec::new();
    for v in 0..m {
        if dm[v] == f64::INFINITY {
            continue;
        }
        let mut worst = f64::NEG_INFINITY;
        for k in 0..m {
            let dk = dist[k * m + v];
            if dk < f64::INFINITY {
                worst = worst.max((dm[v] - dk) / (m - k) as f64);
            }
        }
        values.push((worst, v));
    }
    let best = values.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let slack = MEAN_SLACK * (1.0 + best.abs());

    // Recover a cycle from the predecessor walk of the first attaining vertex;
    // fall back to other near-attaining vertices if floating ties fooled it.
    let mut chosen: Option<(f64, Vec<u32>)> = None;
    for &(_, v) in values.iter().filter(|p| p.0 <= best + slack) {
        let cyc = lightest_cycle_on_walk(g, members, &pred, m, v);
        let mean = walk_mean(g, &cyc);
        if chosen.as_ref().is_none_or(|(cm, _)| mean < *cm) {
            chosen = Some((mean, cyc));
        }
        if mean <= best + slack {
            break;
        }
    }
    chosen.expect("strong component with two or more vertices has a cycle").1
}

/// Walk predecessors from level `m` down to 0, split the walk into simple
/// cycles and return the lightest (first on ties), as global vertex ids.
fn lightest_cycle_on_walk(g: &WeightedDigraph, members: &[u32], pred: &[u32], m: usize, end: usize) -> Vec<u32> {
    let mut walk = vec![0u32; m + 1];
    let mut v = end as u32;
    for k in (0..=m).rev() {
        walk[k] = v;
        if k > 0 {
            v = pred[k * m + v as usize];
        }
    }
    let mut pos = vec![usize::MAX; m];
    let mut stack: Vec<u32> = Vec::with_capacity(m + 1);
    let mut best: Option<(f64, Vec<u32>)> = None;
    for &x in &walk {
        if pos[x as usize] != usize::MAX {
            let start = pos[x as usize];
            let cyc: Vec<u32> = stack[start..].iter().map(|&l| members[l as usize]).collect();
            let k = cyc.len();
            let total = compensated_sum(
                (0..k).map(|i| g.weight(cyc[i] as usize, cyc[(i + 1) % k] as usize).unwrap()),
            );
            let mean = total / k as f64;
            if best.as_ref().is_none_or(|(bm, _)| mean < *bm) {
                best = Some((mean, cyc));
            }
            for &l in &stack[start + 1..] {
                pos[l as usize] = usize::MAX;
            }
            stack.truncate(start + 1);
        } else {
            pos[x as usize] = stack.len();
            stack.push(x);
        }
    }
    best.expect("a walk of m arcs on m vertices repeats a vertex").1
}
