//! Strongly connected components (iterative Tarjan).

use alloc::vec;
use alloc::vec::Vec;

use crate::graph::WeightedDigraph;

/// Strong components of a graph.
#[derive(Debug, Clone)]
pub struct Components {
    /// Component index of every vertex.
    pub of: Vec<u32>,
    /// Vertices of each component in ascending order; components are ordered
    /// by their smallest vertex.
    pub members: Vec<Vec<u32>>,
}

impl Components {
    /// Components that can carry a cycle. Self-loops are excluded by the
    /// graph invariants, so that means two or more vertices.
    pub fn cyclic(&self) -> impl Iterator<Item = (usize, &[u32])> {
        self.members.iter().enumerate().filter(|(_, m)| m.len() >= 2).map(|(i, m)| (i, m.as_slice()))
    }
}

const UNVISITED: u32 = u32::MAX;

pub fn strong_components(g: &WeightedDigraph) -> Components {
    let n = g.n();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<u32> = Vec::new();
    let mut call: Vec<(u32, usize)> = Vec::new();
    let mut next_index = 0u32;
    let mut raw: Vec<Vec<u32>> = Vec::new();

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        call.push((root as u32, 0));
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root as u32);
        on_stack[root] = true;

        while let Some(frame) = call.last_mut() {
            let v = frame.0 as usize;
            let heads = g.out_heads(v);
            if frame.1 < heads.len() {
                let w = heads[frame.1] as usize;
                frame.1 += 1;
                if index[w] == UNVISITED {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w as u32);
                    on_stack[w] = true;
                    call.push((w as u32, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(parent) = call.last() {
                let p = parent.0 as usize;
                low[p] = low[p].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w as usize] = false;
                    comp.push(w);
                    if w as usize == v {
                        break;
                    }
                }
                comp.sort_unstable();
                raw.push(comp);
            }
        }
    }

    raw.sort_by_key(|c| c[0]);
    let mut of = vec![0u32; n];
    for (i, comp) in raw.iter().enumerate() {
        for &v in comp {
            of[v as usize] = i as u32;
        }
    }
    Components { of, members: raw }
}
