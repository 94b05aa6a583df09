//! Successive-shortest-path min-cost flow with Johnson potentials.
//!
//! Edge costs must be non-negative when the solver starts, so the zero
//! potential is feasible and Dijkstra can be used for every augmentation.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

#[derive(Clone, Debug)]
struct Edge {
    to: usize,
    cap: i64,
    cost: i64,
}

#[derive(Clone, Debug)]
pub(crate) struct MinCostFlow {
    // Edge 2i is the forward arc, 2i+1 its residual twin.
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct FlowResult {
    pub flow: i64,
    pub cost: i64,
}

impl MinCostFlow {
    pub fn new(nodes: usize) -> Self {
        MinCostFlow {
            edges: Vec::new(),
            adj: vec![Vec::new(); nodes],
        }
    }

    /// Returns an id usable with [`MinCostFlow::flow_on`].
    pub fn add_edge(&mut self, from: usize, to: usize, cap: i64, cost: i64) -> usize {
        debug_assert!(cost >= 0 && cap >= 0);
        let id = self.edges.len();
        self.edges.push(Edge { to, cap, cost });
        self.edges.push(Edge {
            to: from,
            cap: 0,
            cost: -cost,
        });
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        id
    }

    pub fn flow_on(&self, edge: usize) -> i64 {
        self.edges[edge + 1].cap
    }

    /// Pushes up to `limit` units from `source` to `sink` at minimum cost.
    pub fn run(&mut self, source: usize, sink: usize, limit: i64) -> FlowResult {
        let nodes = self.adj.len();
        let mut potential = vec![0i64; nodes];
        let mut dist = vec![i64::MAX; nodes];
        let mut prev_edge = vec![usize::MAX; nodes];
        let mut result = FlowResult { flow: 0, cost: 0 };
        let mut heap = BinaryHeap::new();

        while result.flow < limit {
            dist.fill(i64::MAX);
            prev_edge.fill(usize::MAX);
            dist[source] = 0;
            heap.push(Reverse((0i64, source)));
            while let Some(Reverse((d, u))) = heap.pop() {
                if d > dist[u] {
                    continue;
                }
                for &id in &self.adj[u] {
                    let e = &self.edges[id];
                    if e.cap == 0 {
                        continue;
                    }
                    let nd = d + e.cost + potential[u] - potential[e.to];
                    if nd < dist[e.to] {
                        dist[e.to] = nd;
                        prev_edge[e.to] = id;
                        heap.push(Reverse((nd, e.to)));
                    }
                }
            }
            if dist[sink] == i64::MAX {
                break;
            }
            for (p, &d) in potential.iter_mut().zip(&dist) {
                if d != i64::MAX {
                    *p += d;
                }
            }

            let mut push = limit - result.flow;
            let mut v = sink;
            while v != source {
                let id = prev_edge[v];
                push = push.min(self.edges[id].cap);
                v = self.edges[id ^ 1].to;
            }
            let mut v = sink;
            while v != source {
                let id = prev_edge[v];
                self.edges[id].cap -= push;
                self.edges[id ^ 1].cap += push;
                result.cost += push * self.edges[id].cost;
                v = self.edges[id ^ 1].to;
            }
            result.flow += push;
        }
        result
    }
}
