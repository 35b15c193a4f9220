//! The social network: a finite, simple, undirected, connected graph with
//! dense vertex ids `0..n`.

use std::collections::VecDeque;
use std::fmt::Write as _;

use rand::Rng;

use crate::error::{Error, Result};

/// Erdős–Rényi generation gives up after this many disconnected draws.
pub const MAX_CONNECTIVITY_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SocialGraph {
    adjacency: Vec<Vec<usize>>,
    /// Each undirected edge once, as `(lo, hi)` in lexicographic order.
    edges: Vec<(usize, usize)>,
    /// Per vertex: `(neighbor, edge id)` in neighbor order.
    incident: Vec<Vec<(usize, usize)>>,
}

impl SocialGraph {
    /// Builds and validates a graph. Duplicate edges (in either orientation)
    /// are merged; self-loops, out-of-range ids and disconnected inputs are
    /// rejected.
    pub fn from_edges<I>(vertex_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if vertex_count == 0 {
            return Err(Error::validation("graph must have at least one vertex"));
        }
        let mut list = Vec::new();
        for (u, v) in edges {
            if u >= vertex_count || v >= vertex_count {
                return Err(Error::validation(format!(
                    "edge ({u}, {v}) references a vertex outside 0..{vertex_count}"
                )));
            }
            if u == v {
                return Err(Error::validation(format!("self-loop at vertex {u}")));
            }
            list.push((u.min(v), u.max(v)));
        }
        list.sort_unstable();
        list.dedup();

        let mut adjacency = vec![Vec::new(); vertex_count];
        let mut incident = vec![Vec::new(); vertex_count];
        for (id, &(u, v)) in list.iter().enumerate() {
            adjacency[u].push(v);
            adjacency[v].push(u);
            incident[u].push((v, id));
            incident[v].push((u, id));
        }
        for (adj, inc) in adjacency.iter_mut().zip(incident.iter_mut()) {
            adj.sort_unstable();
            inc.sort_unstable();
        }
        let g = SocialGraph { adjacency, edges: list, incident };
        if !g.is_connected() {
            return Err(Error::validation("graph is not connected"));
        }
        Ok(g)
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self, x: usize) -> &[usize] {
        &self.adjacency[x]
    }

    pub fn degree(&self, x: usize) -> usize {
        self.adjacency[x].len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// `(neighbor, edge id)` pairs of `x`; edge ids index [`SocialGraph::edges`].
    pub fn incident(&self, x: usize) -> &[(usize, usize)] {
        &self.incident[x]
    }

    fn is_connected(&self) -> bool {
        self.bfs(0).iter().all(|d| d.is_some())
    }

    fn bfs(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.vertex_count()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(x) = queue.pop_front() {
            let d = dist[x].expect("queued vertices are labelled");
            for &y in &self.adjacency[x] {
                if dist[y].is_none() {
                    dist[y] = Some(d + 1);
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    /// Canonical edge-list text: one `u v` line per edge, `u < v`, sorted.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for (u, v) in &self.edges {
            writeln!(out, "{u} {v}").expect("writing to a String");
        }
        out
    }
}

/// Parses the `u v` per line edge-list format.
///
/// Blank lines and lines starting with `#` are skipped; CRLF endings are
/// accepted. Vertex ids must be dense: every id in `0..=max` has to appear.
pub fn parse_edge_list(text: &str) -> Result<SocialGraph> {
    let mut edges = Vec::new();
    let mut max_id = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| Error::Parse { line: line_no, message };
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(parse_err(format!("expected two vertex ids, found {} tokens", tokens.len())));
        }
        let mut ids = [0usize; 2];
        for (slot, tok) in ids.iter_mut().zip(&tokens) {
            *slot = tok.parse().map_err(|_| parse_err(format!("{tok:?} is not a nonnegative integer")))?;
        }
        let [u, v] = ids;
        if u == v {
            return Err(parse_err(format!("self-loop at vertex {u}")));
        }
        max_id = Some(max_id.unwrap_or(0).max(u).max(v));
        edges.push((u, v));
    }
    let Some(max_id) = max_id else {
        return Err(Error::validation("edge list contains no edges"));
    };
    let n = max_id + 1;
    let mut seen = vec![false; n];
    for &(u, v) in &edges {
        seen[u] = true;
        seen[v] = true;
    }
    if let Some(gap) = seen.iter().position(|s| !s) {
        return Err(Error::validation(format!("vertex id {gap} never appears (ids must be dense)")));
    }
    SocialGraph::from_edges(n, edges)
}

/// Standard graph families used as networks and test fixtures.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphKind {
    Path(usize),
    Cycle(usize),
    Complete(usize),
    Grid { width: usize, height: usize },
    ErdosRenyi { n: usize, p: f64 },
}

impl GraphKind {
    /// Builds the graph; `rng` is only consumed by `ErdosRenyi`, which is
    /// resampled until connected.
    pub fn generate<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<SocialGraph> {
        match *self {
            GraphKind::Path(n) => {
                require_vertices(n, 1, "path")?;
                SocialGraph::from_edges(n, (1..n).map(|i| (i - 1, i)))
            }
            GraphKind::Cycle(n) => {
                require_vertices(n, 3, "cycle")?;
                SocialGraph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n)))
            }
            GraphKind::Complete(n) => {
                require_vertices(n, 1, "complete")?;
                SocialGraph::from_edges(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))))
            }
            GraphKind::Grid { width, height } => {
                if width == 0 || height == 0 {
                    return Err(Error::usage("grid dimensions must be positive"));
                }
                let id = |x: usize, y: usize| y * width + x;
                let mut edges = Vec::new();
                for y in 0..height {
                    for x in 0..width {
                        if x + 1 < width {
                            edges.push((id(x, y), id(x + 1, y)));
                        }
                        if y + 1 < height {
                            edges.push((id(x, y), id(x, y + 1)));
                        }
                    }
                }
                SocialGraph::from_edges(width * height, edges)
            }
            GraphKind::ErdosRenyi { n, p } => {
                require_vertices(n, 1, "erdos_renyi")?;
                if !(p > 0.0 && p <= 1.0) {
                    return Err(Error::usage(format!("edge probability must lie in (0, 1], got {p}")));
                }
                for _ in 0..MAX_CONNECTIVITY_ATTEMPTS {
                    let mut edges = Vec::new();
                    for i in 0..n {
                        for j in i + 1..n {
                            if rng.random::<f64>() < p {
                                edges.push((i, j));
                            }
                        }
                    }
                    match SocialGraph::from_edges(n, edges) {
                        Ok(g) => return Ok(g),
                        Err(Error::Validation(_)) => continue,
                        Err(e) => return Err(e),
                    }
                }
                Err(Error::Validation(format!(
                    "no connected G({n}, {p}) after {MAX_CONNECTIVITY_ATTEMPTS} draws; use a larger p"
                )))
            }
        }
    }
}

fn require_vertices(n: usize, min: usize, what: &str) -> Result<()> {
    if n < min {
        return Err(Error::usage(format!("{what} graph needs at least {min} vertices, got {n}")));
    }
    Ok(())
}

/// Shortest-path length between `x` and `y`.
pub fn graph_distance(g: &SocialGraph, x: usize, y: usize) -> Result<usize> {
    let n = g.vertex_count();
    if x >= n || y >= n {
        return Err(Error::usage(format!("vertex ids ({x}, {y}) out of range 0..{n}")));
    }
    Ok(g.bfs(x)[y].expect("graph is connected"))
}

/// Connected components of the spanning subgraph on `vertex_count` vertices
/// keeping `edges`. Components are listed by smallest member, members sorted.
pub(crate) fn components(vertex_count: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..vertex_count).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (u, v) in edges {
        let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
        if ru != rv {
            parent[ru.max(rv)] = ru.min(rv);
        }
    }
    let mut label = vec![usize::MAX; vertex_count];
    let mut out: Vec<Vec<usize>> = Vec::new();
    for x in 0..vertex_count {
        let r = find(&mut parent, x);
        if label[r] == usize::MAX {
            label[r] = out.len();
            out.push(Vec::new());
        }
        out[label[r]].push(x);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomStream;
    use proptest::prelude::*;

    #[test]
    fn parses_path() {
        let g = parse_edge_list("0 1\n1 2").unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn parse_skips_comments_and_handles_crlf() {
        let g = parse_edge_list("# header\r\n\r\n1 0\r\n0 1\r\n  2 1  \r\n").unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn parse_errors() {
        assert_eq!(parse_edge_list("0 1\n0 0"), Err(Error::Parse { line: 2, message: "self-loop at vertex 0".into() }));
        assert!(matches!(parse_edge_list("0 1\n2 3"), Err(Error::Validation(_))));
        assert!(matches!(parse_edge_list("0 x"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_edge_list("0 -1"), Err(Error::Parse { .. })));
        assert!(matches!(parse_edge_list("0 1 2"), Err(Error::Parse { .. })));
        assert!(matches!(parse_edge_list("0 2"), Err(Error::Validation(_))));
        assert!(matches!(parse_edge_list("# nothing\n"), Err(Error::Validation(_))));
    }

    #[test]
    fn generators() {
        let mut rng = RandomStream::from_seed(0);
        let k4 = GraphKind::Complete(4).generate(&mut rng).unwrap();
        assert_eq!(k4.edge_count(), 6);
        assert!((0..4).all(|x| k4.degree(x) == 3));

        let p8 = GraphKind::Path(8).generate(&mut rng).unwrap();
        assert_eq!(p8.edge_count(), 7);
        let degrees: Vec<usize> = (0..8).map(|x| p8.degree(x)).collect();
        assert_eq!(degrees, vec![1, 2, 2, 2, 2, 2, 2, 1]);

        let c5 = GraphKind::Cycle(5).generate(&mut rng).unwrap();
        assert_eq!(c5.edge_count(), 5);
        assert!(GraphKind::Cycle(2).generate(&mut rng).is_err());

        let grid = GraphKind::Grid { width: 3, height: 2 }.generate(&mut rng).unwrap();
        assert_eq!(grid.edge_count(), 7);

        let single = GraphKind::Path(1).generate(&mut rng).unwrap();
        assert_eq!((single.vertex_count(), single.edge_count()), (1, 0));

        assert!(GraphKind::ErdosRenyi { n: 5, p: 0.0 }.generate(&mut rng).is_err());
        assert!(GraphKind::ErdosRenyi { n: 5, p: 1.5 }.generate(&mut rng).is_err());
    }

    #[test]
    fn erdos_renyi_is_seed_deterministic() {
        let a = GraphKind::ErdosRenyi { n: 10, p: 0.5 }.generate(&mut RandomStream::from_seed(7)).unwrap();
        let b = GraphKind::ErdosRenyi { n: 10, p: 0.5 }.generate(&mut RandomStream::from_seed(7)).unwrap();
        assert_eq!(a.edges(), b.edges());
    }

    #[test]
    fn erdos_renyi_gives_up_on_hopeless_p() {
        let err = GraphKind::ErdosRenyi { n: 60, p: 1e-6 }.generate(&mut RandomStream::from_seed(1)).unwrap_err();
        assert!(err.to_string().contains("larger p"));
    }

    #[test]
    fn distances() {
        let mut rng = RandomStream::from_seed(0);
        let p5 = GraphKind::Path(5).generate(&mut rng).unwrap();
        assert_eq!(graph_distance(&p5, 2, 2).unwrap(), 0);
        assert_eq!(graph_distance(&p5, 0, 4).unwrap(), 4);
        let k6 = GraphKind::Complete(6).generate(&mut rng).unwrap();
        assert_eq!(graph_distance(&k6, 1, 5).unwrap(), 1);
        assert!(graph_distance(&k6, 0, 6).is_err());
    }

    #[test]
    fn components_by_union_find() {
        let comps = components(5, [(0, 1), (3, 4)]);
        assert_eq!(comps, vec![vec![0, 1], vec![2], vec![3, 4]]);
    }

    fn any_kind() -> impl Strategy<Value = (GraphKind, u64)> {
        let kind = prop_oneof![
            (1usize..30).prop_map(GraphKind::Path),
            (3usize..30).prop_map(GraphKind::Cycle),
            (1usize..12).prop_map(GraphKind::Complete),
            (1usize..6, 1usize..6).prop_map(|(width, height)| GraphKind::Grid { width, height }),
            (2usize..25, 0.2f64..1.0).prop_map(|(n, p)| GraphKind::ErdosRenyi { n, p }),
        ];
        (kind, any::<u64>())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(150))]

        #[test]
        fn generated_graphs_round_trip_and_satisfy_invariants((kind, seed) in any_kind()) {
            let g = kind.generate(&mut RandomStream::from_seed(seed)).unwrap();
            for x in 0..g.vertex_count() {
                prop_assert!(!g.neighbors(x).contains(&x));
                prop_assert!(g.neighbors(x).windows(2).all(|w| w[0] < w[1]));
                for &y in g.neighbors(x) {
                    prop_assert!(g.neighbors(y).contains(&x));
                }
            }
            if g.edge_count() > 0 {
                let text = g.to_edge_list();
                let back = parse_edge_list(&text).unwrap();
                prop_assert_eq!(&back, &g);
                prop_assert_eq!(back.to_edge_list(), text);
            }
            let n = g.vertex_count();
            let dist: Vec<Vec<usize>> = (0..n).map(|x| (0..n).map(|y| graph_distance(&g, x, y).unwrap()).collect()).collect();
            for x in 0..n {
                for y in 0..n {
                    prop_assert!(dist[x][y] < n);
                    prop_assert_eq!(dist[x][y], dist[y][x]);
                    for z in 0..n {
                        prop_assert!(dist[x][z] <= dist[x][y] + dist[y][z]);
                    }
                }
            }
        }
    }
}
