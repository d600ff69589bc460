use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};

/// Directed capacitated network with a designated source and sink.
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    names: Vec<String>,
    index: HashMap<String, usize>,
    cap: Vec<Vec<f64>>,
    source: usize,
    sink: usize,
}

/// A minimum s-t cut.
#[derive(Debug, Clone, PartialEq)]
pub struct MinCut {
    pub cost: f64,
    pub source_side: Vec<String>,
    pub sink_side: Vec<String>,
}

impl FlowNetwork {
    /// Network over `nodes` (which must include `source` and `sink`).
    pub fn new<S: AsRef<str>>(nodes: &[S], source: &str, sink: &str) -> Result<Self> {
        let names: Vec<String> = nodes.iter().map(|s| s.as_ref().to_string()).collect();
        let mut index = HashMap::new();
        for (i, n) in names.iter().enumerate() {
            if index.insert(n.clone(), i).is_some() {
                return Err(Error::Argument(format!("node `{n}` listed twice")));
            }
        }
        let s = *index.get(source).ok_or_else(|| Error::Lookup(source.to_string()))?;
        let t = *index.get(sink).ok_or_else(|| Error::Lookup(sink.to_string()))?;
        if s == t {
            return Err(Error::Argument("source and sink coincide".into()));
        }
        let n = names.len();
        Ok(FlowNetwork { names, index, cap: vec![vec![0.0; n]; n], source: s, sink: t })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn nodes(&self) -> &[String] {
        &self.names
    }

    pub fn source(&self) -> &str {
        &self.names[self.source]
    }

    pub fn sink(&self) -> &str {
        &self.names[self.sink]
    }

    fn idx(&self, name: &str) -> Result<usize> {
        self.index.get(name).copied().ok_or_else(|| Error::Lookup(name.to_string()))
    }

    /// Add capacity on the arc `from -> to` (parallel arcs accumulate).
    pub fn add_arc(&mut self, from: &str, to: &str, capacity: f64) -> Result<()> {
        let (u, v) = (self.idx(from)?, self.idx(to)?);
        self.add_arc_idx(u, v, capacity)
    }

    pub(crate) fn add_arc_idx(&mut self, u: usize, v: usize, capacity: f64) -> Result<()> {
        if !(capacity >= 0.0) {
            return Err(Error::Argument(format!("capacity {capacity} on {} -> {}", self.names[u], self.names[v])));
        }
        if u == v {
            return Ok(());
        }
        self.cap[u][v] += capacity;
        Ok(())
    }

    /// Undirected edge: the same capacity in both directions.
    pub fn add_edge(&mut self, a: &str, b: &str, capacity: f64) -> Result<()> {
        self.add_arc(a, b, capacity)?;
        self.add_arc(b, a, capacity)
    }

    pub fn capacity(&self, from: &str, to: &str) -> Result<f64> {
        Ok(self.cap[self.idx(from)?][self.idx(to)?])
    }

    /// Total capacity of arcs leaving `side` (a set containing the source, not the sink).
    pub fn cut_cost(&self, side: &[bool]) -> f64 {
        let n = self.len();
        let mut c = 0.0;
        for u in 0..n {
            for v in 0..n {
                if side[u] && !side[v] {
                    c += self.cap[u][v];
                }
            }
        }
        c
    }

    pub(crate) fn min_cut_idx(&self) -> Result<(f64, Vec<bool>)> {
        let n = self.len();
        let mut res = self.cap.clone();
        let mut flow = 0.0;
        loop {
            let mut prev = vec![usize::MAX; n];
            prev[self.source] = self.source;
            let mut queue = VecDeque::from([self.source]);
            while let Some(u) = queue.pop_front() {
                if u == self.sink {
                    break;
                }
                for v in 0..n {
                    if prev[v] == usize::MAX && res[u][v] > 0.0 {
                        prev[v] = u;
                        queue.push_back(v);
                    }
                }
            }
            if prev[self.sink] == usize::MAX {
                let side: Vec<bool> = prev.iter().map(|&p| p != usize::MAX).collect();
                return Ok((flow, side));
            }
            let mut bottleneck = f64::INFINITY;
            let mut v = self.sink;
            while v != self.source {
                let u = prev[v];
                bottleneck = bottleneck.min(res[u][v]);
                v = u;
            }
            if bottleneck.is_infinite() {
                return Err(Error::InfiniteWeight);
            }
            let mut v = self.sink;
            while v != self.source {
                let u = prev[v];
                res[u][v] -= bottleneck;
                res[v][u] += bottleneck;
                v = u;
            }
            flow += bottleneck;
        }
    }
}

/// Minimum s-t cut by shortest augmenting paths.
///
/// The source side is the set reachable from the source in the final residual
/// network. An augmenting path made only of infinite arcs is an error.
pub fn min_cut(g: &FlowNetwork) -> Result<MinCut> {
    let (flow, side) = g.min_cut_idx()?;
    let mut source_side = Vec::new();
    let mut sink_side = Vec::new();
    for (name, &s) in g.names.iter().zip(&side) {
        if s { source_side.push(name.clone()) } else { sink_side.push(name.clone()) }
    }
    debug_assert!((g.cut_cost(&side) - flow).abs() <= 1e-9 * flow.abs().max(1.0));
    Ok(MinCut { cost: flow, source_side, sink_side })
}
