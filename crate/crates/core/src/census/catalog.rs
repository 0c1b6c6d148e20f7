//! The 29 connected graphlets on 3, 4 and 5 nodes and their node-deletion DAG.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::canon::{self, CanonicalForm};

pub const N_GRAPHLETS: usize = 29;
pub const SIZES: [usize; 3] = [3, 4, 5];

/// Reference drawings used to name catalog entries.
type Drawing = (&'static str, usize, &'static [(usize, usize)]);

const NAMED: &[Drawing] = &[
    ("P3", 3, &[(0, 1), (1, 2)]),
    ("K3", 3, &[(0, 1), (1, 2), (0, 2)]),
    ("P4", 4, &[(0, 1), (1, 2), (2, 3)]),
    ("star4", 4, &[(0, 1), (0, 2), (0, 3)]),
    ("paw", 4, &[(0, 1), (1, 2), (0, 2), (0, 3)]),
    ("C4", 4, &[(0, 1), (1, 2), (2, 3), (0, 3)]),
    ("diamond", 4, &[(0, 1), (0, 2), (0, 3), (1, 2), (2, 3)]),
    ("K4", 4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]),
    ("P5", 5, &[(0, 1), (1, 2), (2, 3), (3, 4)]),
    ("fork", 5, &[(0, 1), (0, 2), (0, 3), (3, 4)]),
    ("star5", 5, &[(0, 1), (0, 2), (0, 3), (0, 4)]),
    ("C5", 5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)]),
    ("banner", 5, &[(0, 1), (1, 2), (2, 3), (0, 3), (0, 4)]),
    ("bull", 5, &[(0, 1), (1, 2), (0, 2), (0, 3), (1, 4)]),
    ("cricket", 5, &[(0, 1), (1, 2), (0, 2), (0, 3), (0, 4)]),
    ("tadpole", 5, &[(0, 1), (1, 2), (0, 2), (0, 3), (3, 4)]),
    ("house", 5, &[(0, 1), (1, 2), (2, 3), (0, 3), (2, 4), (3, 4)]),
    ("K23", 5, &[(0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4)]),
    ("bowtie", 5, &[(0, 1), (0, 2), (1, 2), (0, 3), (0, 4), (3, 4)]),
    ("dart", 5, &[(0, 1), (0, 2), (0, 3), (1, 2), (2, 3), (0, 4)]),
    ("kite", 5, &[(0, 1), (0, 2), (0, 3), (1, 2), (2, 3), (1, 4)]),
    ("gem", 5, &[(0, 1), (0, 2), (0, 3), (0, 4), (1, 2), (2, 3), (3, 4)]),
    ("book", 5, &[(0, 3), (0, 4), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]),
    ("K4tail", 5, &[(1, 2), (1, 3), (2, 3), (4, 1), (4, 2), (4, 3), (0, 4)]),
    ("K23+e", 5, &[(0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4), (2, 4)]),
    ("wheel4", 5, &[(0, 1), (0, 2), (0, 3), (0, 4), (1, 2), (2, 3), (3, 4), (1, 4)]),
    (
        "K5-P3",
        5,
        &[(0, 2), (0, 3), (0, 4), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)],
    ),
    (
        "K5-e",
        5,
        &[(0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)],
    ),
    (
        "K5",
        5,
        &[(0, 1), (0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)],
    ),
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Graphlet {
    pub index: usize,
    pub name: String,
    pub nodes: usize,
    pub edges: Vec<(usize, usize)>,
    pub form: CanonicalForm,
}

impl Graphlet {
    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn is_acyclic(&self) -> bool {
        self.edges.len() + 1 == self.nodes
    }
}

/// Immutable catalog of graphlets ordered by (node count, edge count, canonical bytes).
#[derive(Clone, Debug)]
pub struct GraphletCatalog {
    graphlets: Vec<Graphlet>,
    size_offsets: [usize; 4],
    depends_on: Vec<Vec<usize>>,
    direct_containers: Vec<Vec<usize>>,
    /// For each size, raw mask -> graphlet index (`u8::MAX` when disconnected).
    lookup: [Vec<u8>; 3],
}

static SHARED: std::sync::LazyLock<GraphletCatalog> = std::sync::LazyLock::new(GraphletCatalog::build);

impl GraphletCatalog {
    /// Process-wide catalog, built on first use.
    pub fn shared() -> &'static GraphletCatalog {
        &SHARED
    }

    pub fn build() -> Self {
        let mut graphlets = Vec::with_capacity(N_GRAPHLETS);
        let mut size_offsets = [0; 4];
        let names: BTreeMap<CanonicalForm, &str> = NAMED
            .iter()
            .map(|&(name, k, edges)| (canon::canonical_form(k, canon::mask_from_edges(k, edges)), name))
            .collect();

        for (s, &k) in SIZES.iter().enumerate() {
            let forms: BTreeSet<CanonicalForm> = (0..1u32 << canon::n_pairs(k))
                .map(|m| m as u16)
                .filter(|&m| canon::is_connected(k, m))
                .map(|m| canon::canonical_form(k, m))
                .collect();
            let mut forms: Vec<CanonicalForm> = forms.into_iter().collect();
            forms.sort_by_key(|f| (f.mask.count_ones(), f.to_bytes()));
            for form in forms {
                let index = graphlets.len();
                graphlets.push(Graphlet {
                    index,
                    name: names
                        .get(&form)
                        .map_or_else(|| format!("unnamed{index}"), |n| n.to_string()),
                    nodes: k,
                    edges: canon::edges_of(k, form.mask),
                    form,
                });
            }
            size_offsets[s + 1] = graphlets.len();
        }

        let index_of: BTreeMap<CanonicalForm, usize> =
            graphlets.iter().map(|g| (g.form, g.index)).collect();

        let lookup = SIZES.map(|k| {
            (0..1u32 << canon::n_pairs(k))
                .map(|m| {
                    let m = m as u16;
                    if canon::is_connected(k, m) {
                        index_of[&canon::canonical_form(k, m)] as u8
                    } else {
                        u8::MAX
                    }
                })
                .collect::<Vec<u8>>()
        });

        let mut depends_on = vec![Vec::new(); graphlets.len()];
        let mut direct_containers = vec![Vec::new(); graphlets.len()];
        for g in graphlets.iter().filter(|g| g.nodes > SIZES[0]) {
            let k = g.nodes;
            let children: BTreeSet<usize> = (0..k)
                .map(|v| canon::delete_node(k, g.form.mask, v))
                .filter(|&m| canon::is_connected(k - 1, m))
                .map(|m| index_of[&canon::canonical_form(k - 1, m)])
                .collect();
            for &c in &children {
                direct_containers[c].push(g.index);
            }
            depends_on[g.index] = children.into_iter().collect();
        }

        GraphletCatalog {
            graphlets,
            size_offsets,
            depends_on,
            direct_containers,
            lookup,
        }
    }

    pub fn len(&self) -> usize {
        self.graphlets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphlets.is_empty()
    }

    pub fn graphlets(&self) -> &[Graphlet] {
        &self.graphlets
    }

    pub fn get(&self, idx: usize) -> &Graphlet {
        &self.graphlets[idx]
    }

    /// `[0, 2, 8, 29]`: graphlets of size `SIZES[s]` occupy `offsets[s]..offsets[s+1]`.
    pub fn size_offsets(&self) -> [usize; 4] {
        self.size_offsets
    }

    pub fn size_range(&self, k: usize) -> std::ops::Range<usize> {
        let s = size_slot(k);
        self.size_offsets[s]..self.size_offsets[s + 1]
    }

    pub fn index_by_name(&self, name: &str) -> Option<usize> {
        self.graphlets.iter().position(|g| g.name == name)
    }

    /// Graphlet index of the `k`-node graph with raw mask `mask`, or `None`
    /// when that graph is disconnected.
    pub fn classify(&self, k: usize, mask: u16) -> Option<usize> {
        match self.lookup[size_slot(k)][mask as usize] {
            u8::MAX => None,
            i => Some(i as usize),
        }
    }

    /// Graphlets one size smaller obtained by deleting a single node of `idx`.
    pub fn dependents(&self, idx: usize) -> &[usize] {
        &self.depends_on[idx]
    }

    /// Graphlets one size larger that have `idx` among their dependents.
    pub fn direct_containers(&self, idx: usize) -> &[usize] {
        &self.direct_containers[idx]
    }

    /// Every graphlet reachable upward from `idx` in the DAG, ascending.
    pub fn containers(&self, idx: usize) -> Vec<usize> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![idx];
        while let Some(g) = stack.pop() {
            for &c in &self.direct_containers[g] {
                if seen.insert(c) {
                    stack.push(c);
                }
            }
        }
        seen.into_iter().collect()
    }

    /// Plain-text table mapping indices to structures.
    pub fn table(&self) -> String {
        let mut out = String::from("idx  nodes  edges  name      edge list\n");
        for g in &self.graphlets {
            let edges: Vec<String> = g.edges.iter().map(|(u, v)| format!("{u}-{v}")).collect();
            out.push_str(&format!(
                "{:>3}  {:>5}  {:>5}  {:<8}  {}\n",
                g.index,
                g.nodes,
                g.n_edges(),
                g.name,
                edges.join(" ")
            ));
        }
        out
    }
}

impl Default for GraphletCatalog {
    fn default() -> Self {
        Self::build()
    }
}

pub(crate) fn size_slot(k: usize) -> usize {
    match k {
        3 => 0,
        4 => 1,
        5 => 2,
        _ => panic!("graphlet size {k} not in 3..=5"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cat() -> GraphletCatalog {
        GraphletCatalog::build()
    }

    #[test]
    fn cardinalities() {
        let c = cat();
        assert_eq!(c.len(), 29);
        assert_eq!(c.size_offsets(), [0, 2, 8, 29]);
    }

    #[test]
    fn every_entry_named_and_distinct() {
        let c = cat();
        let names: BTreeSet<&str> = c.graphlets().iter().map(|g| g.name.as_str()).collect();
        assert_eq!(names.len(), 29);
        assert!(c.graphlets().iter().all(|g| !g.name.starts_with("unnamed")));
        let forms: BTreeSet<CanonicalForm> = c.graphlets().iter().map(|g| g.form).collect();
        assert_eq!(forms.len(), 29);
    }

    #[test]
    fn three_node_slice() {
        let c = cat();
        let names: Vec<&str> = c.graphlets()[0..2].iter().map(|g| g.name.as_str()).collect();
        assert_eq!(names, ["P3", "K3"]);
    }

    #[test]
    fn four_node_edge_counts() {
        let c = cat();
        let counts: Vec<usize> = c.graphlets()[2..8].iter().map(|g| g.n_edges()).collect();
        assert_eq!(counts, [3, 3, 4, 4, 5, 6]);
        let names: BTreeSet<&str> = c.graphlets()[2..8].iter().map(|g| g.name.as_str()).collect();
        let expected: BTreeSet<&str> = ["P4", "star4", "paw", "C4", "diamond", "K4"].into();
        assert_eq!(names, expected);
    }

    #[test]
    fn five_node_edge_count_histogram() {
        let c = cat();
        let mut hist = BTreeMap::new();
        for g in &c.graphlets()[8..] {
            *hist.entry(g.n_edges()).or_insert(0) += 1;
        }
        let expected: BTreeMap<usize, usize> =
            [(4, 3), (5, 5), (6, 5), (7, 4), (8, 2), (9, 1), (10, 1)].into();
        assert_eq!(hist, expected);
    }

    #[test]
    fn dependents_examples() {
        let c = cat();
        let id = |n: &str| c.index_by_name(n).unwrap();
        assert_eq!(c.dependents(id("star5")), &[id("star4")]);
        assert_eq!(c.dependents(id("K5")), &[id("K4")]);
        assert_eq!(c.dependents(id("P5")), &[id("P4")]);
        let mut fork = vec![id("star4"), id("P4")];
        fork.sort();
        assert_eq!(c.dependents(id("fork")), fork.as_slice());
        assert!(c.dependents(id("P3")).is_empty());
        let mut house = vec![id("C4"), id("paw"), id("P4")];
        house.sort();
        assert_eq!(c.dependents(id("house")), house.as_slice());
    }

    #[test]
    fn containers_examples() {
        let c = cat();
        let id = |n: &str| c.index_by_name(n).unwrap();
        let p4 = c.containers(id("P4"));
        assert!(p4.contains(&id("P5")));
        assert!(p4.iter().all(|&h| c.get(h).nodes == 5));
        let k4 = c.containers(id("K4"));
        assert!(k4.contains(&id("K5")) && k4.contains(&id("K4tail")));
        // P3 reaches every 4-node graphlet except K4, and (transitively) most 5-node ones
        let p3 = c.containers(id("P3"));
        assert!(!p3.contains(&id("K4")));
        assert!(p3.contains(&id("P4")) && p3.contains(&id("K5-e")));
        assert!(c.containers(id("K5")).is_empty());
    }

    #[test]
    fn dag_levels_and_consistency() {
        let c = cat();
        for g in c.graphlets() {
            for &d in c.dependents(g.index) {
                assert_eq!(c.get(d).nodes + 1, g.nodes);
                assert!(c.direct_containers(d).contains(&g.index));
            }
            for &h in c.direct_containers(g.index) {
                assert!(c.dependents(h).contains(&g.index));
            }
            if g.nodes > 3 {
                assert!(!c.dependents(g.index).is_empty(), "{} has no dependent", g.name);
            }
        }
    }

    #[test]
    fn classify_matches_canonical_forms() {
        let c = cat();
        let house = canon::mask_from_edges(5, &[(0, 1), (0, 2), (1, 3), (2, 3), (2, 4), (3, 4)]);
        assert_eq!(c.classify(5, house), c.index_by_name("house"));
        assert_eq!(c.classify(4, canon::mask_from_edges(4, &[(0, 1), (2, 3)])), None);
    }
}
