//! Immutable sparse undirected graphs with per-vertex roles.
//!
//! Adjacency is stored in compressed form (offsets + neighbor array). Vertex
//! ids are dense in `[0, n)`; every other module refers to vertices by these
//! ids.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type VertexId = usize;

/// Above this many vertices `diameter_exact` switches to a sampled bound.
pub const EXACT_DIAMETER_LIMIT: usize = 200_000;

const UNREACHED: u32 = u32::MAX;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(VertexId, VertexId),
    #[error("self-loop at vertex {0}")]
    SelfLoop(VertexId),
    #[error("vertex id {id} out of range for {n} vertices")]
    DanglingVertexId { id: VertexId, n: usize },
    #[error("source set is empty")]
    EmptySourceSet,
    #[error("graph is disconnected")]
    Disconnected,
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for GraphError {
    fn from(e: std::io::Error) -> Self {
        GraphError::Io(e.to_string())
    }
}

/// Structural role of a vertex in the emerging-giant construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    /// Vertex of degree at least three in the kernel.
    Kernel,
    /// Internal vertex of a subdivided kernel edge.
    Path,
    /// Non-root vertex of an attached tree.
    Tree,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Kernel => "kernel",
            Role::Path => "path",
            Role::Tree => "tree",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "kernel" => Ok(Role::Kernel),
            "path" => Ok(Role::Path),
            "tree" => Ok(Role::Tree),
            other => Err(format!("unknown role `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<VertexId>,
    roles: Vec<Role>,
    edge_count: usize,
}

impl Graph {
    /// Builds a graph from an edge list. Each unordered pair may appear once.
    pub fn build(edges: &[(VertexId, VertexId)], roles: Vec<Role>) -> Result<Self, GraphError> {
        let n = roles.len();
        let mut seen = HashSet::with_capacity(edges.len());
        let mut degree = vec![0usize; n];
        for &(u, v) in edges {
            for id in [u, v] {
                if id >= n {
                    return Err(GraphError::DanglingVertexId { id, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            let key = (u.min(v), u.max(v));
            if !seen.insert(key) {
                return Err(GraphError::DuplicateEdge(u, v));
            }
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut neighbors = vec![0; offsets[n]];
        for &(u, v) in edges {
            neighbors[fill[u]] = v;
            fill[u] += 1;
            neighbors[fill[v]] = u;
            fill[v] += 1;
        }
        for v in 0..n {
            neighbors[offsets[v]..offsets[v + 1]].sort_unstable();
        }
        Ok(Graph {
            offsets,
            neighbors,
            roles,
            edge_count: edges.len(),
        })
    }

    /// Graph with every vertex tagged `role`.
    pub fn with_uniform_role(
        n: usize,
        edges: &[(VertexId, VertexId)],
        role: Role,
    ) -> Result<Self, GraphError> {
        Self::build(edges, vec![role; n])
    }

    /// Random connected graph: a uniform recursive tree plus `extra` random
    /// chords (loops and repeats dropped).
    pub fn random_connected<R: rand::Rng + ?Sized>(n: usize, extra: usize, rng: &mut R) -> Self {
        let mut edges = std::collections::BTreeSet::new();
        for v in 1..n {
            edges.insert((rng.random_range(0..v), v));
        }
        for _ in 0..extra {
            let (u, v) = (rng.random_range(0..n), rng.random_range(0..n));
            if u != v {
                edges.insert((u.min(v), u.max(v)));
            }
        }
        let edges: Vec<_> = edges.into_iter().collect();
        Self::with_uniform_role(n.max(1), &edges, Role::Kernel).expect("tree plus chords is simple")
    }

    pub fn vertex_count(&self) -> usize {
        self.roles.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    #[inline]
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: VertexId) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn role(&self, v: VertexId) -> Role {
        self.roles[v]
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in increasing lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        (0..self.vertex_count()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    pub fn role_count(&self, role: Role) -> usize {
        self.roles.iter().filter(|&&r| r == role).count()
    }

    pub fn is_connected(&self) -> bool {
        if self.vertex_count() == 0 {
            return true;
        }
        let field = self.bfs_distances(&[0]).expect("vertex 0 exists");
        field.unreachable_count() == 0
    }

    /// Multi-source breadth-first hop distances.
    pub fn bfs_distances(&self, sources: &[VertexId]) -> Result<DistanceField, GraphError> {
        if sources.is_empty() {
            return Err(GraphError::EmptySourceSet);
        }
        let n = self.vertex_count();
        let mut dist = vec![UNREACHED; n];
        let mut queue = VecDeque::new();
        for &s in sources {
            if s >= n {
                return Err(GraphError::DanglingVertexId { id: s, n });
            }
            if dist[s] != 0 {
                dist[s] = 0;
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            let du = dist[u] + 1;
            for &w in self.neighbors(u) {
                if dist[w] == UNREACHED {
                    dist[w] = du;
                    queue.push_back(w);
                }
            }
        }
        let mut source_set = sources.to_vec();
        source_set.sort_unstable();
        source_set.dedup();
        Ok(DistanceField { source_set, dist })
    }

    fn eccentricity(&self, v: VertexId, dist: &mut [u32], queue: &mut VecDeque<VertexId>) -> (u32, VertexId, usize) {
        dist.fill(UNREACHED);
        queue.clear();
        dist[v] = 0;
        queue.push_back(v);
        let (mut far, mut far_v, mut seen) = (0, v, 1);
        while let Some(u) = queue.pop_front() {
            let du = dist[u] + 1;
            for &w in self.neighbors(u) {
                if dist[w] == UNREACHED {
                    dist[w] = du;
                    seen += 1;
                    if du > far {
                        far = du;
                        far_v = w;
                    }
                    queue.push_back(w);
                }
            }
        }
        (far, far_v, seen)
    }

    /// Diameter by all-sources BFS up to [`EXACT_DIAMETER_LIMIT`] vertices,
    /// otherwise a double-sweep lower bound refined by `samples` extra
    /// eccentricities taken at evenly spaced vertex ids.
    pub fn diameter(&self, samples: usize) -> Result<Diameter, GraphError> {
        let n = self.vertex_count();
        if n <= 1 {
            return Ok(Diameter { value: 0, mode: DiameterMode::Exact });
        }
        let mut dist = vec![UNREACHED; n];
        let mut queue = VecDeque::with_capacity(n);
        let (_, far, seen) = self.eccentricity(0, &mut dist, &mut queue);
        if seen != n {
            return Err(GraphError::Disconnected);
        }
        if n <= EXACT_DIAMETER_LIMIT {
            let mut best = 0;
            for v in 0..n {
                best = best.max(self.eccentricity(v, &mut dist, &mut queue).0);
            }
            return Ok(Diameter { value: best as usize, mode: DiameterMode::Exact });
        }
        let (e1, far2, _) = self.eccentricity(far, &mut dist, &mut queue);
        let (e2, _, _) = self.eccentricity(far2, &mut dist, &mut queue);
        let mut best = e1.max(e2);
        let stride = (n / samples.max(1)).max(1);
        for v in (0..n).step_by(stride).take(samples) {
            best = best.max(self.eccentricity(v, &mut dist, &mut queue).0);
        }
        Ok(Diameter { value: best as usize, mode: DiameterMode::Sampled })
    }

    /// Exact diameter regardless of size.
    pub fn diameter_exact(&self) -> Result<usize, GraphError> {
        let n = self.vertex_count();
        if n <= 1 {
            return Ok(0);
        }
        let mut dist = vec![UNREACHED; n];
        let mut queue = VecDeque::with_capacity(n);
        let mut best = 0;
        for v in 0..n {
            let (e, _, seen) = self.eccentricity(v, &mut dist, &mut queue);
            if seen != n {
                return Err(GraphError::Disconnected);
            }
            best = best.max(e);
        }
        Ok(best as usize)
    }

    /// Subgraph induced by `keep` (sorted or not); returns the graph and the
    /// map from new ids to old ids.
    pub fn induced(&self, keep: &[VertexId]) -> (Graph, Vec<VertexId>) {
        let mut new_id = vec![usize::MAX; self.vertex_count()];
        let mut old: Vec<VertexId> = keep.to_vec();
        old.sort_unstable();
        old.dedup();
        for (i, &v) in old.iter().enumerate() {
            new_id[v] = i;
        }
        let mut edges = Vec::new();
        for (i, &v) in old.iter().enumerate() {
            for &w in self.neighbors(v) {
                let j = new_id[w];
                if j != usize::MAX && j > i {
                    edges.push((i, j));
                }
            }
        }
        let roles = old.iter().map(|&v| self.roles[v]).collect();
        let g = Graph::build(&edges, roles).expect("induced subgraph of a valid graph");
        (g, old)
    }

    /// Writes the `#giantwalk-graph v1` text format.
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "#giantwalk-graph v1 n={} m={}", self.vertex_count(), self.edge_count)?;
        for (v, role) in self.roles.iter().enumerate() {
            writeln!(out, "V {v} {role}")?;
        }
        for (u, v) in self.edges() {
            writeln!(out, "E {u} {v}")?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_text(&mut buf).expect("writing to a Vec");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn read_text<R: BufRead>(input: R) -> Result<Self, GraphError> {
        let mut lines = input.lines().enumerate();
        let perr = |line: usize, msg: &str| GraphError::Parse { line: line + 1, msg: msg.to_string() };
        let (_, header) = lines.next().ok_or_else(|| perr(0, "empty input"))?;
        let header = header?;
        let mut parts = header.split_whitespace();
        if parts.next() != Some("#giantwalk-graph") || parts.next() != Some("v1") {
            return Err(perr(0, "bad header"));
        }
        let mut field = |key: &str| -> Result<usize, GraphError> {
            parts
                .next()
                .and_then(|t| t.strip_prefix(key))
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| perr(0, "bad header field"))
        };
        let n = field("n=")?;
        let m = field("m=")?;
        let mut roles = Vec::with_capacity(n);
        let mut edges = Vec::with_capacity(m);
        for (i, line) in lines {
            let line = line?;
            let mut t = line.split_whitespace();
            match t.next() {
                Some("V") => {
                    let id: usize = t.next().and_then(|x| x.parse().ok()).ok_or_else(|| perr(i, "bad vertex id"))?;
                    if id != roles.len() {
                        return Err(perr(i, "vertex ids must be dense and in order"));
                    }
                    let role = t.next().ok_or_else(|| perr(i, "missing role"))?;
                    roles.push(role.parse().map_err(|e: String| perr(i, &e))?);
                }
                Some("E") => {
                    let u: usize = t.next().and_then(|x| x.parse().ok()).ok_or_else(|| perr(i, "bad edge"))?;
                    let v: usize = t.next().and_then(|x| x.parse().ok()).ok_or_else(|| perr(i, "bad edge"))?;
                    if u >= v {
                        return Err(perr(i, "edges must be written with u < v"));
                    }
                    edges.push((u, v));
                }
                None => {}
                Some(t) if t.starts_with('#') => {}
                Some(_) => return Err(perr(i, "unknown record")),
            }
        }
        if roles.len() != n || edges.len() != m {
            return Err(perr(0, "counts do not match header"));
        }
        Graph::build(&edges, roles)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DiameterMode {
    Exact,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Diameter {
    pub value: usize,
    pub mode: DiameterMode,
}

/// Hop distances from a source set; `None` for unreachable vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceField {
    source_set: Vec<VertexId>,
    dist: Vec<u32>,
}

impl DistanceField {
    pub fn get(&self, v: VertexId) -> Option<usize> {
        match self.dist[v] {
            UNREACHED => None,
            d => Some(d as usize),
        }
    }

    pub fn sources(&self) -> &[VertexId] {
        &self.source_set
    }

    pub fn max_finite(&self) -> usize {
        self.dist.iter().filter(|&&d| d != UNREACHED).max().copied().unwrap_or(0) as usize
    }

    pub fn unreachable_count(&self) -> usize {
        self.dist.iter().filter(|&&d| d == UNREACHED).count()
    }

    /// Vertices at exactly distance `k`.
    pub fn level(&self, k: usize) -> Vec<VertexId> {
        (0..self.dist.len()).filter(|&v| self.dist[v] as usize == k).collect()
    }

    /// All level sets `L_0, L_1, ...` up to the largest finite distance.
    pub fn levels(&self) -> Vec<Vec<VertexId>> {
        let mut out = vec![Vec::new(); self.max_finite() + 1];
        for (v, &d) in self.dist.iter().enumerate() {
            if d != UNREACHED {
                out[d as usize].push(v);
            }
        }
        out
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.dist
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Graph {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Graph::with_uniform_role(n, &edges, Role::Path).unwrap()
    }

    fn cycle(n: usize) -> Graph {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::with_uniform_role(n, &edges, Role::Path).unwrap()
    }

    #[test]
    fn smallest_graph() {
        let g = Graph::build(&[(0, 1)], vec![Role::Kernel, Role::Kernel]).unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn build_errors() {
        let roles = vec![Role::Kernel; 2];
        assert_eq!(
            Graph::build(&[(0, 1), (1, 0)], roles.clone()),
            Err(GraphError::DuplicateEdge(1, 0))
        );
        assert_eq!(Graph::build(&[(1, 1)], roles.clone()), Err(GraphError::SelfLoop(1)));
        assert_eq!(
            Graph::build(&[(0, 2)], roles),
            Err(GraphError::DanglingVertexId { id: 2, n: 2 })
        );
    }

    #[test]
    fn triangle_handshake() {
        let g = cycle(3);
        assert_eq!(g.edge_count(), 3);
        assert!((0..3).all(|v| g.degree(v) == 2));
        let sum: usize = (0..3).map(|v| g.degree(v)).sum();
        assert_eq!(sum, 2 * g.edge_count());
    }

    #[test]
    fn bfs_examples() {
        let g = path(3);
        let d = g.bfs_distances(&[0]).unwrap();
        assert_eq!((0..3).map(|v| d.get(v).unwrap()).collect::<Vec<_>>(), vec![0, 1, 2]);
        let d = g.bfs_distances(&[0, 2]).unwrap();
        assert_eq!((0..3).map(|v| d.get(v).unwrap()).collect::<Vec<_>>(), vec![0, 1, 0]);
        assert_eq!(d.levels(), vec![vec![0, 2], vec![1]]);

        let star = Graph::with_uniform_role(4, &[(0, 1), (0, 2), (0, 3)], Role::Tree).unwrap();
        let d = star.bfs_distances(&[0]).unwrap();
        assert!((1..4).all(|v| d.get(v) == Some(1)));

        assert_eq!(g.bfs_distances(&[]), Err(GraphError::EmptySourceSet));
    }

    #[test]
    fn diameters() {
        assert_eq!(path(5).diameter_exact().unwrap(), 4);
        assert_eq!(cycle(6).diameter_exact().unwrap(), 3);
        let d = cycle(6).diameter(4).unwrap();
        assert_eq!(d, Diameter { value: 3, mode: DiameterMode::Exact });
        let two = Graph::with_uniform_role(4, &[(0, 1), (2, 3)], Role::Path).unwrap();
        assert_eq!(two.diameter_exact(), Err(GraphError::Disconnected));
        assert_eq!(two.diameter(1), Err(GraphError::Disconnected));
    }

    #[test]
    fn text_round_trip_is_bit_exact() {
        let g = Graph::build(
            &[(2, 0), (0, 1), (1, 2), (2, 3)],
            vec![Role::Kernel, Role::Path, Role::Kernel, Role::Tree],
        )
        .unwrap();
        let text = g.to_text();
        assert!(text.starts_with("#giantwalk-graph v1 n=4 m=4\nV 0 kernel\n"));
        assert!(text.contains("E 0 2\n"));
        let back = Graph::read_text(text.as_bytes()).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn rejects_malformed_text() {
        assert!(Graph::read_text("#giantwalk-graph v2 n=0 m=0\n".as_bytes()).is_err());
        assert!(Graph::read_text("#giantwalk-graph v1 n=2 m=1\nV 0 kernel\nV 1 kernel\nE 1 0\n".as_bytes()).is_err());
        assert!(Graph::read_text("#giantwalk-graph v1 n=2 m=0\nV 0 kernel\n".as_bytes()).is_err());
    }
}
