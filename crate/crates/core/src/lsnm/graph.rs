use std::collections::{BTreeSet, VecDeque};

use crate::error::{invalid, Error, Result};

/// Simple undirected graph on nodes `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<bool>,
}

impl Graph {
    /// Rejects self-loops, duplicate edges (in either orientation) and
    /// out-of-range indices.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut adjacency = vec![false; n * n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(invalid(format!("edge ({a}, {b}) references a node outside 0..{n}")));
            }
            if a == b {
                return Err(invalid(format!("self-loop at node {a}")));
            }
            let e = (a.min(b), a.max(b));
            if !seen.insert(e) {
                return Err(invalid(format!("duplicate edge ({a}, {b})")));
            }
            adjacency[a * n + b] = true;
            adjacency[b * n + a] = true;
        }
        Ok(Self { n, edges: seen.into_iter().collect(), adjacency })
    }

    /// Parses lines `i,j` (0-indexed); blank lines and lines starting with
    /// `#` are skipped. The node count is one more than the largest index.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = || Error::Parse(format!("line {}: expected \"i,j\", got {line:?}", lineno + 1));
            let (a, b) = line.split_once(',').ok_or_else(bad)?;
            let a: usize = a.trim().parse().map_err(|_| bad())?;
            let b: usize = b.trim().parse().map_err(|_| bad())?;
            edges.push((a, b));
        }
        let n = edges.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0);
        Self::new(n, &edges).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Edges as `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && self.adjacency[i * self.n + j]
    }

    pub fn neighbours(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&j| self.adjacency[i * self.n + j])
    }

    /// Hop counts from `source`; `None` for unreachable nodes.
    pub fn shortest_paths(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        let mut queue = VecDeque::new();
        dist[source] = Some(0);
        queue.push_back(source);
        while let Some(i) = queue.pop_front() {
            let d = dist[i].unwrap_or(0);
            for j in self.neighbours(i) {
                if dist[j].is_none() {
                    dist[j] = Some(d + 1);
                    queue.push_back(j);
                }
            }
        }
        dist
    }

    /// Nodes of the largest connected component (smallest index wins ties), sorted.
    pub fn largest_component(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.n];
        let mut best: Vec<usize> = Vec::new();
        for s in 0..self.n {
            if label[s] != usize::MAX {
                continue;
            }
            let comp: Vec<usize> =
                self.shortest_paths(s).iter().enumerate().filter_map(|(j, d)| d.map(|_| j)).collect();
            for &j in &comp {
                label[j] = s;
            }
            if comp.len() > best.len() {
                best = comp;
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(Graph::new(3, &[(0, 0)]).is_err());
        assert!(Graph::new(3, &[(0, 1), (1, 0)]).is_err());
        assert!(Graph::new(3, &[(0, 3)]).is_err());
        let g = Graph::new(3, &[(2, 0), (1, 2)]).unwrap();
        assert_eq!(g.edges(), &[(0, 2), (1, 2)]);
        assert!(g.has_edge(0, 2) && g.has_edge(2, 0) && !g.has_edge(0, 1));
    }

    #[test]
    fn parsing() {
        let g = Graph::parse_edge_list("# a comment\n0,1\n\n 1 , 2\n").unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.edges().len(), 2);
        assert!(matches!(Graph::parse_edge_list("0;1"), Err(Error::Parse(_))));
        assert!(matches!(Graph::parse_edge_list("0,1\n1,0"), Err(Error::Parse(_))));
    }

    #[test]
    fn paths_and_components() {
        let g = Graph::new(6, &[(0, 1), (1, 2), (3, 4)]).unwrap();
        assert_eq!(g.shortest_paths(0), vec![Some(0), Some(1), Some(2), None, None, None]);
        assert_eq!(g.largest_component(), vec![0, 1, 2]);
    }

    #[test]
    fn bundled_florentine_fixture() {
        let g = Graph::parse_edge_list(include_str!("../../data/florentine.csv")).unwrap();
        assert_eq!(g.n(), 15);
        assert_eq!(g.edges().len(), 20);
        assert_eq!(g.largest_component().len(), 15);
    }
}
