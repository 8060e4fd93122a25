//! Weighted undirected graphs, cut evaluation, and small-instance exact MaxCut.
//!
//! Graphs are stored as a validated edge list with 0-based endpoints. The
//! on-disk interchange formats (Gset text and JSON) use 1-based node ids; the
//! conversion happens at the parse/serialize boundary and nowhere else.

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// One undirected edge. Invariant: `u < v`, both below the owning graph's `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub u: u32,
    pub v: u32,
    pub w: i64,
}

/// Undirected weighted graph with no self-loops and no duplicate edges.
///
/// Edges are kept sorted by `(u, v)` so that two graphs with the same edge set
/// compare equal and serialize identically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
}

impl Graph {
    /// Builds a graph from 0-based endpoints, validating and canonicalizing.
    pub fn new(n: usize, edges: Vec<(u32, u32, i64)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::arg("graph must have at least one node"));
        }
        let mut canon = Vec::with_capacity(edges.len());
        for (a, b, w) in edges {
            if a == b {
                return Err(Error::arg(format!("self-loop at node {}", a + 1)));
            }
            if a as usize >= n || b as usize >= n {
                return Err(Error::arg(format!(
                    "edge ({}, {}) out of range for {} nodes",
                    a + 1,
                    b + 1,
                    n
                )));
            }
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            canon.push(Edge { u, v, w });
        }
        canon.sort_unstable_by_key(|e| (e.u, e.v));
        for pair in canon.windows(2) {
            if pair[0].u == pair[1].u && pair[0].v == pair[1].v {
                return Err(Error::arg(format!(
                    "duplicate edge ({}, {})",
                    pair[0].u + 1,
                    pair[0].v + 1
                )));
            }
        }
        Ok(Graph { n, edges: canon })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// True when every edge weight is exactly 1.
    pub fn is_unit_weight(&self) -> bool {
        self.edges.iter().all(|e| e.w == 1)
    }

    /// Sum of positive edge weights: a trivial upper bound on any cut.
    pub fn positive_weight_total(&self) -> i64 {
        self.edges.iter().map(|e| e.w.max(0)).sum()
    }

    /// Canonical Gset-format text: `n m` header then one `i j w` line per
    /// edge, 1-based ids, edges sorted. Serves as both the Gset serializer and
    /// the preimage for content hashing.
    pub fn canonical_text(&self) -> String {
        let mut out = String::with_capacity(16 + self.edges.len() * 12);
        out.push_str(&format!("{} {}\n", self.n, self.edges.len()));
        for e in &self.edges {
            out.push_str(&format!("{} {} {}\n", e.u + 1, e.v + 1, e.w));
        }
        out
    }

    /// Parses Gset text: header `n m`, then exactly `m` lines `i j w` with
    /// 1-based node ids. Blank lines are skipped; errors carry the 1-based
    /// line number of the offending input line.
    pub fn parse_gset(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(idx, line)| (idx + 1, line.trim()))
            .filter(|(_, line)| !line.is_empty());

        let (header_no, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "empty input, expected 'n m' header"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::parse(
                header_no,
                format!("expected 'n m' header, got {} fields", fields.len()),
            ));
        }
        let n: usize = fields[0]
            .parse()
            .map_err(|_| Error::parse(header_no, format!("bad node count '{}'", fields[0])))?;
        let m: usize = fields[1]
            .parse()
            .map_err(|_| Error::parse(header_no, format!("bad edge count '{}'", fields[1])))?;
        if n == 0 {
            return Err(Error::parse(header_no, "node count must be positive"));
        }

        let mut edges = Vec::with_capacity(m);
        let mut edge_lines = 0usize;
        for (line_no, line) in lines {
            edge_lines += 1;
            if edge_lines > m {
                return Err(Error::parse(
                    line_no,
                    format!("more than {} edge lines", m),
                ));
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(Error::parse(
                    line_no,
                    format!("expected 'i j w', got {} fields", fields.len()),
                ));
            }
            let i: u64 = fields[0]
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad node id '{}'", fields[0])))?;
            let j: u64 = fields[1]
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad node id '{}'", fields[1])))?;
            let w: i64 = fields[2]
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad weight '{}'", fields[2])))?;
            if i == 0 || j == 0 {
                return Err(Error::parse(line_no, "node ids are 1-based"));
            }
            if i as usize > n || j as usize > n {
                return Err(Error::parse(
                    line_no,
                    format!("edge ({}, {}) out of range for {} nodes", i, j, n),
                ));
            }
            if i == j {
                return Err(Error::parse(line_no, format!("self-loop at node {}", i)));
            }
            edges.push(((i - 1) as u32, (j - 1) as u32, w));
        }
        if edge_lines < m {
            return Err(Error::parse(
                0,
                format!("header promised {} edges, found {}", m, edge_lines),
            ));
        }
        // Duplicate detection happens in the constructor, but there the line
        // numbers are gone, so report duplicates here while we still have them.
        let mut seen = std::collections::HashSet::with_capacity(edges.len());
        for &(a, b, _) in &edges {
            let key = if a < b { (a, b) } else { (b, a) };
            if !seen.insert(key) {
                return Err(Error::parse(
                    0,
                    format!("duplicate edge ({}, {})", key.0 + 1, key.1 + 1),
                ));
            }
        }
        Graph::new(n, edges)
    }

    /// JSON form: `{"n": ..., "edges": [[i, j, w], ...]}` with 1-based ids.
    /// An optional top-level `"manifest"` key is ignored on input.
    pub fn to_json_value(&self) -> serde_json::Value {
        let edges: Vec<serde_json::Value> = self
            .edges
            .iter()
            .map(|e| serde_json::json!([e.u + 1, e.v + 1, e.w]))
            .collect();
        serde_json::json!({ "n": self.n, "edges": edges })
    }

    pub fn from_json_value(value: &serde_json::Value) -> Result<Self> {
        let obj = value
            .as_object()
            .ok_or_else(|| Error::BadFormat("graph JSON must be an object".into()))?;
        let n = obj
            .get("n")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| Error::BadFormat("graph JSON missing integer 'n'".into()))?
            as usize;
        let raw = obj
            .get("edges")
            .and_then(|v| v.as_array())
            .ok_or_else(|| Error::BadFormat("graph JSON missing array 'edges'".into()))?;
        let mut edges = Vec::with_capacity(raw.len());
        for (idx, entry) in raw.iter().enumerate() {
            let triple = entry
                .as_array()
                .filter(|a| a.len() == 3)
                .ok_or_else(|| {
                    Error::BadFormat(format!("edge {} must be a [i, j, w] triple", idx))
                })?;
            let i = triple[0]
                .as_u64()
                .ok_or_else(|| Error::BadFormat(format!("edge {} has bad node id", idx)))?;
            let j = triple[1]
                .as_u64()
                .ok_or_else(|| Error::BadFormat(format!("edge {} has bad node id", idx)))?;
            let w = triple[2]
                .as_i64()
                .ok_or_else(|| Error::BadFormat(format!("edge {} has bad weight", idx)))?;
            if i == 0 || j == 0 {
                return Err(Error::BadFormat(format!("edge {} ids are 1-based", idx)));
            }
            edges.push(((i - 1) as u32, (j - 1) as u32, w));
        }
        Graph::new(n, edges)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("graph JSON serializes")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        Graph::from_json_value(&value)
    }
}

/// A node assignment to the two cut sides, entries in {-1, +1}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    values: Vec<i8>,
}

impl Assignment {
    pub fn new(values: Vec<i8>) -> Result<Self> {
        if values.iter().any(|&x| x != 1 && x != -1) {
            return Err(Error::arg("assignment entries must be +1 or -1"));
        }
        Ok(Assignment { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }

    /// Flips every entry. Cut values are invariant under this.
    pub fn complement(&self) -> Assignment {
        Assignment {
            values: self.values.iter().map(|&x| -x).collect(),
        }
    }
}

/// Total weight of edges whose endpoints land on opposite sides.
pub fn cut_value(g: &Graph, a: &Assignment) -> Result<i64> {
    if a.len() != g.n() {
        return Err(Error::arg(format!(
            "assignment has {} entries for {} nodes",
            a.len(),
            g.n()
        )));
    }
    let vals = a.values();
    Ok(g.edges()
        .iter()
        .map(|e| {
            if vals[e.u as usize] != vals[e.v as usize] {
                e.w
            } else {
                0
            }
        })
        .sum())
}

/// Erdos-Renyi G(n, p) with unit weights. Pairs are visited in order
/// `(0,1), (0,2), ..., (n-2, n-1)` drawing one uniform per pair, so the edge
/// set is a pure function of `(n, p, seed)`.
pub fn generate_er(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if n == 0 {
        return Err(Error::arg("graph must have at least one node"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::arg(format!("edge probability {} outside [0, 1]", p)));
    }
    let mut rng = SplitMix64::new(seed);
    let mut edges = Vec::new();
    for i in 0..n.saturating_sub(1) {
        for j in (i + 1)..n {
            if rng.next_f64() < p {
                edges.push((i as u32, j as u32, 1i64));
            }
        }
    }
    Graph::new(n, edges)
}

/// Exact MaxCut by exhaustive enumeration. Fixes node 0 on the +1 side
/// (cuts are complement-invariant) and scans the remaining `2^(n-1)` masks.
/// Guarded to `n <= 24` so the worst case stays around a hundred million
/// edge scans.
pub fn brute_force_maxcut(g: &Graph) -> Result<(i64, Assignment)> {
    if g.n() > 24 {
        return Err(Error::arg(format!(
            "brute force limited to 24 nodes, got {}",
            g.n()
        )));
    }
    let n = g.n();
    let mut best = i64::MIN;
    let mut best_mask = 0u32;
    for mask in 0..(1u32 << (n - 1)) {
        // Bit k of mask holds the side of node k+1; node 0 is fixed to +1.
        let mut cut = 0i64;
        for e in g.edges() {
            let su = if e.u == 0 { 0 } else { (mask >> (e.u - 1)) & 1 };
            let sv = if e.v == 0 { 0 } else { (mask >> (e.v - 1)) & 1 };
            if su != sv {
                cut += e.w;
            }
        }
        if cut > best {
            best = cut;
            best_mask = mask;
        }
    }
    let mut values = vec![1i8; n];
    for k in 1..n {
        if (best_mask >> (k - 1)) & 1 == 1 {
            values[k] = -1;
        }
    }
    let assignment = Assignment::new(values)?;
    debug_assert_eq!(cut_value(g, &assignment)?, best);
    Ok((best, assignment))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn triangle() -> Graph {
        Graph::new(3, vec![(0, 1, 1), (1, 2, 1), (0, 2, 1)]).unwrap()
    }

    #[test]
    fn new_canonicalizes_edge_order() {
        let g = Graph::new(4, vec![(3, 1, 5), (0, 2, -2)]).unwrap();
        assert_eq!(
            g.edges(),
            &[Edge { u: 0, v: 2, w: -2 }, Edge { u: 1, v: 3, w: 5 }]
        );
    }

    #[test]
    fn new_rejects_bad_edges() {
        assert!(Graph::new(0, vec![]).is_err());
        assert!(Graph::new(3, vec![(1, 1, 1)]).is_err());
        assert!(Graph::new(3, vec![(0, 3, 1)]).is_err());
        assert!(Graph::new(3, vec![(0, 1, 1), (1, 0, 2)]).is_err());
    }

    #[test]
    fn parse_gset_round_trips() {
        let g = Graph::parse_gset("3 3\n1 2 1\n2 3 1\n1 3 1\n").unwrap();
        assert_eq!(g, triangle());
        // Canonical text sorts edges by endpoints regardless of input order.
        assert_eq!(g.canonical_text(), "3 3\n1 2 1\n1 3 1\n2 3 1\n");
        assert_eq!(Graph::parse_gset(&g.canonical_text()).unwrap(), g);
    }

    #[test]
    fn parse_gset_reports_line_numbers() {
        let err = Graph::parse_gset("3 2\n1 2 1\n2 2 1\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{}", err);
        assert!(err.to_string().contains("self-loop"), "{}", err);

        let err = Graph::parse_gset("3 2\n1 2 1\n").unwrap_err();
        assert!(err.to_string().contains("promised 2"), "{}", err);

        let err = Graph::parse_gset("3 1\n1 2 1\n2 3 1\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{}", err);

        let err = Graph::parse_gset("2 1\n1 4 1\n").unwrap_err();
        assert!(err.to_string().contains("out of range"), "{}", err);
    }

    #[test]
    fn parse_gset_skips_blank_lines_and_allows_negative_weights() {
        let g = Graph::parse_gset("3 2\n\n1 2 -4\n\n2 3 7\n\n").unwrap();
        assert_eq!(g.m(), 2);
        assert_eq!(g.edges()[0].w, -4);
    }

    #[test]
    fn json_round_trips() {
        let g = Graph::new(5, vec![(0, 4, 3), (1, 2, -1)]).unwrap();
        let back = Graph::from_json_str(&g.to_json_string()).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn json_ignores_manifest_key() {
        let text = r#"{"manifest": {"tool": "x"}, "n": 2, "edges": [[1, 2, 1]]}"#;
        let g = Graph::from_json_str(text).unwrap();
        assert_eq!(g.n(), 2);
        assert_eq!(g.m(), 1);
    }

    #[test]
    fn cut_value_triangle() {
        let g = triangle();
        let a = Assignment::new(vec![1, 1, -1]).unwrap();
        assert_eq!(cut_value(&g, &a).unwrap(), 2);
        let all_same = Assignment::new(vec![1, 1, 1]).unwrap();
        assert_eq!(cut_value(&g, &all_same).unwrap(), 0);
    }

    #[test]
    fn cut_value_checks_length() {
        let g = triangle();
        let a = Assignment::new(vec![1, -1]).unwrap();
        assert!(cut_value(&g, &a).is_err());
    }

    #[test]
    fn assignment_rejects_non_signs() {
        assert!(Assignment::new(vec![1, 0, -1]).is_err());
    }

    #[test]
    fn generate_er_extremes() {
        let empty = generate_er(10, 0.0, 7).unwrap();
        assert_eq!(empty.m(), 0);
        let full = generate_er(10, 1.0, 7).unwrap();
        assert_eq!(full.m(), 45);
        assert!(full.is_unit_weight());
    }

    #[test]
    fn generate_er_deterministic_and_plausible() {
        let a = generate_er(200, 0.3, 42).unwrap();
        let b = generate_er(200, 0.3, 42).unwrap();
        assert_eq!(a, b);
        let c = generate_er(200, 0.3, 43).unwrap();
        assert_ne!(a, c);
        // 19900 pairs at p=0.3: mean 5970, sd ~64.6. Allow 5 sigma.
        let m = a.m() as f64;
        assert!((m - 5970.0).abs() < 5.0 * 64.7, "m = {}", m);
    }

    #[test]
    fn brute_force_known_optima() {
        let (best, _) = brute_force_maxcut(&triangle()).unwrap();
        assert_eq!(best, 2);

        let k4 = Graph::new(
            4,
            vec![(0, 1, 1), (0, 2, 1), (0, 3, 1), (1, 2, 1), (1, 3, 1), (2, 3, 1)],
        )
        .unwrap();
        assert_eq!(brute_force_maxcut(&k4).unwrap().0, 4);

        let c5 = Graph::new(5, vec![(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 4, 1), (0, 4, 1)])
            .unwrap();
        assert_eq!(brute_force_maxcut(&c5).unwrap().0, 4);
    }

    #[test]
    fn brute_force_respects_size_guard() {
        let g = generate_er(25, 0.1, 1).unwrap();
        assert!(brute_force_maxcut(&g).is_err());
    }

    /// Unreduced reference: enumerate all 2^n assignments.
    fn brute_force_unreduced(g: &Graph) -> i64 {
        let n = g.n();
        let mut best = i64::MIN;
        for mask in 0..(1u32 << n) {
            let values: Vec<i8> = (0..n)
                .map(|k| if (mask >> k) & 1 == 1 { -1 } else { 1 })
                .collect();
            let a = Assignment::new(values).unwrap();
            best = best.max(cut_value(g, &a).unwrap());
        }
        best
    }

    proptest! {
        #[test]
        fn cut_invariant_under_complement(seed in 0u64..500, n in 2usize..12, p in 0.1f64..0.9) {
            let g = generate_er(n, p, seed).unwrap();
            let mut rng = SplitMix64::new(seed ^ 0xABCD);
            let values: Vec<i8> = (0..n)
                .map(|_| if rng.next_f64() < 0.5 { 1 } else { -1 })
                .collect();
            let a = Assignment::new(values).unwrap();
            prop_assert_eq!(
                cut_value(&g, &a).unwrap(),
                cut_value(&g, &a.complement()).unwrap()
            );
        }

        #[test]
        fn reduced_brute_force_matches_unreduced(seed in 0u64..40, n in 2usize..10) {
            let g = generate_er(n, 0.5, seed).unwrap();
            let (best, a) = brute_force_maxcut(&g).unwrap();
            prop_assert_eq!(best, brute_force_unreduced(&g));
            prop_assert_eq!(cut_value(&g, &a).unwrap(), best);
        }

        #[test]
        fn parse_serialize_round_trip(seed in 0u64..200, n in 1usize..20, p in 0.0f64..1.0) {
            let g = generate_er(n, p, seed).unwrap();
            let back = Graph::parse_gset(&g.canonical_text()).unwrap();
            prop_assert_eq!(&g, &back);
            let json_back = Graph::from_json_str(&g.to_json_string()).unwrap();
            prop_assert_eq!(&g, &json_back);
        }
    }
}
