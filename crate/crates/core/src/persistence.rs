//! Zero-dimensional persistence of the sublevel-set filtration of a signal.
//!
//! Samples are swept in increasing value order (ties broken by index) and
//! connected components of the sublevel set are tracked with a union-find
//! over the path graph. When two components meet, the one born later dies
//! (elder rule); equal births favour the component whose minimum has the
//! smaller index.

use serde::{Deserialize, Serialize};

use crate::signal::Signal;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PersistencePair {
    pub birth: f64,
    pub death: f64,
}

impl PersistencePair {
    pub fn new(birth: f64, death: f64) -> Self {
        Self { birth, death }
    }

    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }
}

/// Finite pairs of the sublevel diagram. The essential class (the
/// component of the global minimum) is kept only as its birth value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistenceDiagram {
    pub pairs: Vec<PersistencePair>,
    pub essential_birth: f64,
}

impl PersistenceDiagram {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Pairs sorted by `(birth, death)`, for multiset comparison.
    pub fn sorted_pairs(&self) -> Vec<PersistencePair> {
        let mut pairs = self.pairs.clone();
        pairs.sort_by(|a, b| {
            a.birth
                .total_cmp(&b.birth)
                .then(a.death.total_cmp(&b.death))
        });
        pairs
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}

struct Components {
    parent: Vec<usize>,
    // Only meaningful at roots: index of the minimum that founded the component.
    origin: Vec<usize>,
}

impl Components {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            origin: (0..n).collect(),
        }
    }

    fn find(&mut self, mut node: usize) -> usize {
        let mut root = node;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[node] != root {
            let next = self.parent[node];
            self.parent[node] = root;
            node = next;
        }
        root
    }
}

pub fn sublevel_diagram(signal: &Signal) -> PersistenceDiagram {
    sublevel_diagram_of(signal.values())
}

/// Same as [`sublevel_diagram`] on a raw value slice. An empty slice yields
/// an empty diagram with `essential_birth = +inf`.
pub fn sublevel_diagram_of(values: &[f64]) -> PersistenceDiagram {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));

    // `elder(a, b)` is true when the component founded at `a` outlives the one at `b`.
    let elder = |a: usize, b: usize| -> bool {
        match values[a].total_cmp(&values[b]) {
            std::cmp::Ordering::Less => true,
            std::cmp::Ordering::Greater => false,
            std::cmp::Ordering::Equal => a < b,
        }
    };

    let mut uf = Components::new(n);
    let mut active = vec![false; n];
    let mut pairs = Vec::new();

    for &i in &order {
        active[i] = true;
        let left = (i > 0 && active[i - 1]).then(|| uf.find(i - 1));
        let right = (i + 1 < n && active[i + 1]).then(|| uf.find(i + 1));
        match (left, right) {
            (None, None) => {}
            (Some(r), None) | (None, Some(r)) => {
                uf.parent[i] = r;
            }
            (Some(l), Some(r)) => {
                let (old, young) = if elder(uf.origin[l], uf.origin[r]) {
                    (l, r)
                } else {
                    (r, l)
                };
                let birth = values[uf.origin[young]];
                let death = values[i];
                if death > birth {
                    pairs.push(PersistencePair { birth, death });
                }
                uf.parent[young] = old;
                uf.parent[i] = old;
            }
        }
    }

    PersistenceDiagram {
        pairs,
        essential_birth: values.iter().copied().fold(f64::INFINITY, f64::min),
    }
}
