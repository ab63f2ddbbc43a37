//! The graph invariant chi_Gamma: a quadratic refinement of the mod-2
//! intersection form attached to a basis of curve classes.
//!
//! A [`ChiGraph`] has one vertex per basis curve and an edge where two
//! curves meet oddly. For a class x with basis support S, chi(x) is the
//! mod-2 Euler number of the union of closed half-edge stars over S; it
//! equals |S| + e(S) where e(S) counts edges inside S. Twists about
//! chi = 1 curves preserve chi, so a graph whose chi is 1 on every letter
//! of a factorization certifies that twists about chi = 0 classes lie
//! outside the factorization's monodromy group.

use thiserror::Error;

use crate::expr;
use crate::factorization::{xi, Factorization};
use crate::gf2::{BitMatrix, BitVec};
use crate::surface::{
    apply_word, intersection, kanenobu_word, CurveRegistry, HomologyClass, SurfaceError,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QuadformError {
    #[error("expected {expected} vertex names, got {got}")]
    WrongCount { expected: usize, got: usize },
    #[error("vertex classes are not a basis (rank {rank} of {needed})")]
    NotABasis { rank: usize, needed: usize },
    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),
    #[error("graph does not dominate the factorization; the obstruction does not apply")]
    NotDominated,
    #[error("no excluded letter exists for this pair")]
    NoCertificate,
    #[error(transparent)]
    Surface(#[from] SurfaceError),
}

/// A basis of 2g named curve classes with mod-2 intersection adjacency.
#[derive(Debug, Clone)]
pub struct ChiGraph {
    genus: usize,
    vertex_names: Vec<String>,
    vertices: Vec<HomologyClass>,
    adjacency: BitMatrix,
    /// Inverse of the matrix whose columns are the vertex coordinates;
    /// maps a class to its coefficient vector in the vertex basis.
    expansion: BitMatrix,
}

impl ChiGraph {
    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.vertex_names
    }

    pub fn vertices(&self) -> &[HomologyClass] {
        &self.vertices
    }

    pub fn adjacency(&self) -> &BitMatrix {
        &self.adjacency
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency.get(i, j)
    }

    pub fn edge_count(&self) -> usize {
        let n = self.vertices.len();
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.adjacency.get(i, j))
            .count()
    }

    fn index_of(&self, name: &str) -> Option<usize> {
        self.vertex_names.iter().position(|n| n == name)
    }

    pub fn edge_between(&self, a: &str, b: &str) -> Option<bool> {
        Some(self.has_edge(self.index_of(a)?, self.index_of(b)?))
    }

    /// Support of x in the vertex basis (unique expansion).
    fn support(&self, x: &HomologyClass) -> Result<Vec<usize>, QuadformError> {
        if x.vec().len() != 2 * self.genus {
            return Err(QuadformError::Dimension(x.vec().len(), 2 * self.genus));
        }
        Ok(self.expansion.mul_vec(x.vec()).support())
    }

    /// chi via the definition: assemble the union of closed half-edge
    /// stars over the support as a cell complex and take its Euler number
    /// mod 2. Zero cells are the support vertices plus one midpoint per
    /// incident edge; one cells are the closed half-edges.
    pub fn chi(&self, x: &HomologyClass) -> Result<bool, QuadformError> {
        let support = self.support(x)?;
        let in_s = {
            let mut f = vec![false; self.vertices.len()];
            for &i in &support {
                f[i] = true;
            }
            f
        };
        #[derive(PartialEq)]
        enum ZeroCell {
            Vertex(usize),
            Midpoint(usize, usize),
        }
        let mut zero_cells: Vec<ZeroCell> = support.iter().map(|&i| ZeroCell::Vertex(i)).collect();
        let mut one_cells: Vec<(usize, usize, usize)> = Vec::new(); // (endpoint, i, j)
        let n = self.vertices.len();
        for i in 0..n {
            for j in i + 1..n {
                if !self.adjacency.get(i, j) {
                    continue;
                }
                if in_s[i] || in_s[j] {
                    zero_cells.push(ZeroCell::Midpoint(i, j));
                }
                if in_s[i] {
                    one_cells.push((i, i, j));
                }
                if in_s[j] {
                    one_cells.push((j, i, j));
                }
            }
        }
        // Euler number = #0-cells - #1-cells; only its parity is needed.
        Ok((zero_cells.len() + one_cells.len()) % 2 == 1)
    }

    /// Closed-form shortcut |S| + e(S) mod 2; independently implemented
    /// and cross-asserted against the cell-complex route.
    pub fn chi_closed_form(&self, x: &HomologyClass) -> Result<bool, QuadformError> {
        let support = self.support(x)?;
        let edges_inside = support
            .iter()
            .enumerate()
            .flat_map(|(k, &i)| support[k + 1..].iter().map(move |&j| (i, j)))
            .filter(|&(i, j)| self.adjacency.get(i, j))
            .count();
        Ok((support.len() + edges_inside) % 2 == 1)
    }

    /// chi over every class code (index = packed coordinates).
    pub fn chi_table(&self) -> Vec<bool> {
        let n = 2 * self.genus;
        assert!(n <= 20, "table domain too large");
        (0u64..1 << n)
            .map(|code| {
                self.chi(&HomologyClass::new(BitVec::from_code(n, code)))
                    .expect("dimensions match")
            })
            .collect()
    }

    /// True iff chi = 1 on every letter class of the factorization.
    pub fn dominates(&self, w: &Factorization) -> bool {
        w.letters()
            .iter()
            .all(|l| self.chi(l.class()).unwrap_or(false))
    }

    /// Membership obstruction: requires domination, then certifies that
    /// the twist about `target` lies outside the monodromy group exactly
    /// when chi(target) = 0.
    pub fn excludes(
        &self,
        w: &Factorization,
        target: &HomologyClass,
    ) -> Result<bool, QuadformError> {
        if !self.dominates(w) {
            return Err(QuadformError::NotDominated);
        }
        Ok(!self.chi(target)?)
    }

    /// Arf invariant of the quadratic form chi via symplectic
    /// Gram-Schmidt over GF(2): sum of chi(u_i) chi(v_i) over a
    /// symplectic basis (u_i, v_i).
    pub fn arf(&self) -> bool {
        let n = 2 * self.genus;
        let mut basis: Vec<HomologyClass> = (0..n)
            .map(|i| HomologyClass::new(BitVec::unit(n, i)))
            .collect();
        let mut acc = false;
        while let Some(u) = basis.iter().position(|v| !v.is_zero()).map(|i| basis.remove(i)) {
            let j = basis
                .iter()
                .position(|w| intersection(&u, w).unwrap())
                .expect("form is nondegenerate");
            let v = basis.remove(j);
            acc ^= self.chi(&u).unwrap() && self.chi(&v).unwrap();
            for w in &mut basis {
                let mut nw = w.clone();
                if intersection(w, &v).unwrap() {
                    nw = nw.xor(&u);
                }
                if intersection(w, &u).unwrap() {
                    nw = nw.xor(&v);
                }
                *w = nw;
            }
        }
        acc
    }
}

/// Builds the graph on 2g named curves; fails if they are not a basis.
pub fn graph_from(registry: &CurveRegistry, names: &[String]) -> Result<ChiGraph, QuadformError> {
    let genus = registry.genus();
    let n = 2 * genus;
    if names.len() != n {
        return Err(QuadformError::WrongCount {
            expected: n,
            got: names.len(),
        });
    }
    let vertices: Vec<HomologyClass> = names
        .iter()
        .map(|name| registry.get(name).cloned())
        .collect::<Result<_, _>>()?;

    // columns = vertex coordinates
    let mut columns = BitMatrix::zero(n, n);
    for (j, v) in vertices.iter().enumerate() {
        for i in 0..n {
            if v.vec().get(i) {
                columns.set(i, j, true);
            }
        }
    }
    let rank = columns.rank();
    if rank < n {
        return Err(QuadformError::NotABasis { rank, needed: n });
    }
    let expansion = columns.inverse().expect("full rank");

    let mut adjacency = BitMatrix::zero(n, n);
    for i in 0..n {
        for j in i + 1..n {
            if intersection(&vertices[i], &vertices[j])? {
                adjacency.set(i, j, true);
                adjacency.set(j, i, true);
            }
        }
    }
    Ok(ChiGraph {
        genus,
        vertex_names: names.to_vec(),
        vertices,
        adjacency,
        expansion,
    })
}

/// The four shipped graphs with the letter parities they host.
pub const SHIPPED_GRAPHS: [(&str, (u8, u8), [&str; 10]); 4] = [
    (
        "gamma1",
        (0, 0),
        ["c_1", "a_1", "a_2", "b_2", "a_3", "b_3", "a_4", "a_5", "B_2", "B_4"],
    ),
    (
        "gamma2",
        (1, 0),
        ["a_3", "b_3", "B_1", "B_2", "B_3", "B_4", "d_1", "d_2", "d_3", "d_4"],
    ),
    (
        "gamma3",
        (0, 1),
        ["B_1", "B_2", "B_3", "B_4", "b_1", "b_2", "b_3", "a_3", "d_1", "d_2"],
    ),
    (
        "gamma4",
        (1, 1),
        ["B_1", "B_2", "B_3", "B_4", "a_1", "a_2", "a_3", "b_3", "d_3", "d_4"],
    ),
];

pub fn shipped_graph(registry: &CurveRegistry, name: &str) -> Result<ChiGraph, QuadformError> {
    let entry = SHIPPED_GRAPHS
        .iter()
        .find(|(n, _, _)| *n == name)
        .ok_or_else(|| QuadformError::Surface(SurfaceError::UnknownCurve(name.to_string())))?;
    graph_from(
        registry,
        &entry.2.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
    )
}

pub fn parity_of(p: i64, q: i64) -> (u8, u8) {
    ((p.rem_euclid(2)) as u8, (q.rem_euclid(2)) as u8)
}

/// The pinned chi values for a shipped graph: expression strings whose
/// chi must be 1, and those whose chi must be 0.
pub fn pinned_chi_claims(name: &str) -> Option<(Vec<String>, Vec<String>)> {
    let bs = |w: &str| -> Vec<String> { (0..=5).map(|j| format!("{w}(B_{j})")).collect() };
    let plain_bs: Vec<String> = (0..=5).map(|j| format!("B_{j}")).collect();
    let mut ones: Vec<String>;
    let zeros: Vec<String>;
    match name {
        "gamma1" => {
            ones = (1..=5).map(|i| format!("a_{i}")).collect();
            ones.extend(plain_bs);
            ones.extend(bs("Phi(0,0)"));
            ones.extend(["c_1", "c_6", "b_3", "b_3'"].map(String::from));
            zeros = ["c_2", "c_3", "c_4", "c_5", "d"].map(String::from).to_vec();
        }
        "gamma2" => {
            ones = plain_bs;
            ones.extend(bs("Phi(1,0)"));
            ones.extend(["b_3", "b_3'", "a_3"].map(String::from));
            zeros = ["c_1", "c_2", "a_1", "a_2", "b_2", "d"]
                .map(String::from)
                .to_vec();
        }
        "gamma3" => {
            ones = plain_bs;
            ones.extend(bs("Phi(0,1)"));
            ones.extend(["b_3", "b_3'", "a_3"].map(String::from));
            zeros = ["c_2", "d"].map(String::from).to_vec();
        }
        "gamma4" => {
            ones = plain_bs;
            ones.extend(bs("Phi(1,1)"));
            ones.extend(["b_3", "b_3'", "a_3"].map(String::from));
            zeros = ["c_2", "d"].map(String::from).to_vec();
        }
        _ => return None,
    }
    Some((ones, zeros))
}

/// The pinned exclusion table: for each shipped graph and letter parity,
/// the indices j in 1..=4 whose image twists t[Phi(parity)(B_j)] the
/// graph's twist subgroup does not contain (chi = 0). Every other image
/// twist with j in 1..=4 has chi = 1.
pub fn pinned_exclusions(name: &str, parity: (u8, u8)) -> Option<&'static [usize]> {
    const E: &[usize] = &[];
    let table: [((u8, u8), &[usize]); 4] = match name {
        "gamma1" => [
            ((0, 0), E),
            ((1, 0), &[1, 2, 3, 4]),
            ((0, 1), &[1, 4]),
            ((1, 1), &[2, 3]),
        ],
        "gamma2" => [
            ((0, 0), &[1, 2, 3, 4]),
            ((1, 0), E),
            ((0, 1), &[2, 3]),
            ((1, 1), &[1, 4]),
        ],
        "gamma3" => [
            ((0, 0), &[1, 4]),
            ((1, 0), &[2, 3]),
            ((0, 1), E),
            ((1, 1), &[1, 2, 3, 4]),
        ],
        "gamma4" => [
            ((0, 0), &[2, 3]),
            ((1, 0), &[1, 4]),
            ((0, 1), &[1, 2, 3, 4]),
            ((1, 1), E),
        ],
        _ => return None,
    };
    table.iter().find(|(p, _)| *p == parity).map(|(_, js)| *js)
}

/// The shipped graph hosting letters of the given parity class.
pub fn graph_for_parity(
    registry: &CurveRegistry,
    parity: (u8, u8),
) -> Result<(String, ChiGraph), QuadformError> {
    let entry = SHIPPED_GRAPHS
        .iter()
        .find(|(_, par, _)| *par == parity)
        .expect("all four parities are shipped");
    Ok((entry.0.to_string(), shipped_graph(registry, entry.0)?))
}

/// Deterministic certificate search: scans 2g-subsets of the pool in
/// lexicographic pool order, keeping only independent partial sets, and
/// returns the first basis whose chi is 1 on every class in `ones` and 0
/// on every class in `zeros`.
pub fn find_certificate(
    registry: &CurveRegistry,
    pool: &[String],
    ones: &[HomologyClass],
    zeros: &[HomologyClass],
) -> Result<Option<ChiGraph>, QuadformError> {
    let n = 2 * registry.genus();
    let pool_classes: Vec<HomologyClass> = pool
        .iter()
        .map(|name| registry.get(name).cloned())
        .collect::<Result<_, _>>()?;

    struct Search<'a> {
        registry: &'a CurveRegistry,
        pool: &'a [String],
        pool_classes: Vec<HomologyClass>,
        ones: &'a [HomologyClass],
        zeros: &'a [HomologyClass],
        n: usize,
        chosen: Vec<usize>,
        echelon: Vec<BitVec>,
    }

    impl Search<'_> {
        fn reduce(&self, v: &BitVec) -> BitVec {
            let mut v = v.clone();
            for e in &self.echelon {
                let p = e.lowest_set_bit().unwrap();
                if v.get(p) {
                    v.xor_assign(e);
                }
            }
            v
        }

        fn dfs(&mut self, start: usize) -> Result<Option<ChiGraph>, QuadformError> {
            if self.chosen.len() == self.n {
                let names: Vec<String> =
                    self.chosen.iter().map(|&i| self.pool[i].clone()).collect();
                let graph = graph_from(self.registry, &names)?;
                let ok = self.ones.iter().all(|c| graph.chi(c).unwrap_or(false))
                    && self.zeros.iter().all(|c| !graph.chi(c).unwrap_or(true));
                return Ok(if ok { Some(graph) } else { None });
            }
            let need = self.n - self.chosen.len();
            if start + need > self.pool.len() {
                return Ok(None);
            }
            for i in start..=self.pool.len() - need {
                let reduced = self.reduce(self.pool_classes[i].vec());
                if reduced.is_zero() {
                    continue; // dependent on the chosen prefix
                }
                self.chosen.push(i);
                self.echelon.push(reduced);
                let hit = self.dfs(i + 1)?;
                self.echelon.pop();
                self.chosen.pop();
                if hit.is_some() {
                    return Ok(hit);
                }
            }
            Ok(None)
        }
    }

    Search {
        registry,
        pool,
        pool_classes,
        ones,
        zeros,
        n,
        chosen: Vec::new(),
        echelon: Vec::new(),
    }
    .dfs(0)
}

/// The one/zero constraint lists of the shipped graph searches: chi = 1
/// on the B_i and their parity images plus b_3, b_3', a_3; chi = 0 on
/// c_2 and d.
pub fn case_constraints(
    registry: &CurveRegistry,
    parity: (u8, u8),
) -> Result<(Vec<HomologyClass>, Vec<HomologyClass>), QuadformError> {
    let word = kanenobu_word(parity.0 as i64, parity.1 as i64);
    let mut ones = Vec::new();
    for j in 0..=5 {
        let b = registry.get(&format!("B_{j}"))?;
        ones.push(b.clone());
        ones.push(apply_word(registry, &word, b)?);
    }
    for name in ["b_3", "b_3'", "a_3"] {
        ones.push(registry.get(name)?.clone());
    }
    let zeros = vec![registry.get("c_2")?.clone(), registry.get("d")?.clone()];
    Ok((ones, zeros))
}

/// A verified exclusion certificate: the graph dominates the host word,
/// and the excluded class has chi = 0, so its twist is outside the
/// host's monodromy group while being a letter of the other word.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub graph_name: String,
    pub graph: ChiGraph,
    /// The dominated factorization (whose group misses the excluded twist).
    pub host_expr: String,
    /// Label of the excluded letter in the other factorization.
    pub excluded_label: String,
    pub excluded: HomologyClass,
}

impl Certificate {
    pub fn vertex_names(&self) -> &[String] {
        self.graph.vertex_names()
    }

    /// Edge list as vertex-name pairs.
    pub fn edges(&self) -> Vec<(String, String)> {
        let names = self.graph.vertex_names();
        let n = names.len();
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.graph.has_edge(i, j))
            .map(|(i, j)| (names[i].clone(), names[j].clone()))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub enum Verdict {
    /// Equal parities: this invariant level cannot separate the pair.
    SameParity { parity: (u8, u8) },
    Distinguished {
        forward: Box<Certificate>,
        reverse: Option<Box<Certificate>>,
    },
}

fn certificate_for(
    registry: &CurveRegistry,
    host: (i64, i64),
    source: (i64, i64),
) -> Result<Option<Certificate>, QuadformError> {
    let (graph_name, graph) = graph_for_parity(registry, parity_of(host.0, host.1))?;
    let host_fact = xi(registry, host.0, host.1).map_err(|e| {
        QuadformError::Surface(SurfaceError::Parse(e.to_string()))
    })?;
    if !graph.dominates(&host_fact) {
        return Ok(None);
    }
    let source_fact = xi(registry, source.0, source.1).map_err(|e| {
        QuadformError::Surface(SurfaceError::Parse(e.to_string()))
    })?;
    for letter in source_fact.letters() {
        if !graph.chi(letter.class())? {
            return Ok(Some(Certificate {
                graph_name,
                graph,
                host_expr: format!("xi({},{})", host.0, host.1),
                excluded_label: letter.label().to_string(),
                excluded: letter.class().clone(),
            }));
        }
    }
    Ok(None)
}

/// Separates xi(p,q) from xi(r,s) at the chi level when the parities
/// differ, returning a certificate (and the swapped one when it exists).
pub fn distinguish(
    registry: &CurveRegistry,
    pq: (i64, i64),
    rs: (i64, i64),
) -> Result<Verdict, QuadformError> {
    let parity_pq = parity_of(pq.0, pq.1);
    let parity_rs = parity_of(rs.0, rs.1);
    if parity_pq == parity_rs {
        return Ok(Verdict::SameParity { parity: parity_pq });
    }
    let forward =
        Box::new(certificate_for(registry, rs, pq)?.ok_or(QuadformError::NoCertificate)?);
    let reverse = certificate_for(registry, pq, rs)?.map(Box::new);
    Ok(Verdict::Distinguished { forward, reverse })
}

// ---------------------------------------------------------------------------
// Constraint solving for the twist-region class
// ---------------------------------------------------------------------------

/// Linear pairing constraints plus chi-vanishing constraints on a class.
pub struct ClassConstraints {
    pub pairings: Vec<(HomologyClass, bool)>,
    pub chi_zero: Vec<ChiGraph>,
}

/// Brute force over all 2^{2g} classes.
pub fn solve_class_constraints(genus: usize, constraints: &ClassConstraints) -> Vec<HomologyClass> {
    let n = 2 * genus;
    assert!(n <= 20, "domain too large to enumerate");
    (0u64..1 << n)
        .map(|code| HomologyClass::new(BitVec::from_code(n, code)))
        .filter(|x| {
            constraints
                .pairings
                .iter()
                .all(|(c, want)| intersection(x, c).unwrap() == *want)
                && constraints
                    .chi_zero
                    .iter()
                    .all(|g| !g.chi(x).unwrap())
        })
        .collect()
}

/// The constraint set pinning the twist-region class d: pairings with
/// B_3, B_4, B_5, c_2, the pairing deltas against the Phi(0,0) images of
/// the B_i, and chi-vanishing for the first two shipped graphs.
pub fn stallings_constraints(registry: &CurveRegistry) -> Result<ClassConstraints, QuadformError> {
    let mut pairings = vec![
        (registry.get("B_3")?.clone(), true),
        (registry.get("B_4")?.clone(), true),
        (registry.get("B_5")?.clone(), false),
        (registry.get("c_2")?.clone(), false),
    ];
    let deltas = [false, true, false, false, true, false];
    for (j, &delta) in deltas.iter().enumerate() {
        let img = expr::parse_class_expr(registry, &format!("Phi(0,0)(B_{j})"))
            .map_err(|e| QuadformError::Surface(SurfaceError::Expr(e.to_string())))?;
        pairings.push((img, delta));
    }
    let chi_zero = vec![
        shipped_graph(registry, "gamma1")?,
        shipped_graph(registry, "gamma2")?,
    ];
    Ok(ClassConstraints { pairings, chi_zero })
}

/// All classes satisfying the full constraint set (brute force).
pub fn solve_stallings_class(
    registry: &CurveRegistry,
) -> Result<Vec<HomologyClass>, QuadformError> {
    Ok(solve_class_constraints(
        registry.genus(),
        &stallings_constraints(registry)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factorization::Factorization;
    use crate::surface::transvect;

    fn reg() -> &'static CurveRegistry {
        CurveRegistry::builtin()
    }

    fn class(name: &str) -> HomologyClass {
        reg().get(name).unwrap().clone()
    }

    fn names(list: &[&str]) -> Vec<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    fn cls(src: &str) -> HomologyClass {
        expr::parse_class_expr(reg(), src).unwrap()
    }

    #[test]
    fn shipped_graphs_build() {
        for (name, _, _) in SHIPPED_GRAPHS {
            let g = shipped_graph(reg(), name).unwrap();
            assert_eq!(g.vertices().len(), 10);
        }
    }

    #[test]
    fn gamma1_has_ten_edges() {
        let g = shipped_graph(reg(), "gamma1").unwrap();
        assert_eq!(g.edge_count(), 10);
    }

    #[test]
    fn every_vertex_has_chi_one() {
        for (name, _, _) in SHIPPED_GRAPHS {
            let g = shipped_graph(reg(), name).unwrap();
            for v in g.vertices() {
                assert!(g.chi(v).unwrap(), "{name}: vertex {}", v.render());
            }
        }
    }

    #[test]
    fn gamma2_expected_edges() {
        let g = shipped_graph(reg(), "gamma2").unwrap();
        assert_eq!(g.edge_between("d_2", "B_3"), Some(true));
        assert_eq!(g.edge_between("d_2", "B_4"), Some(true));
        assert_eq!(g.edge_between("a_3", "b_3"), Some(true));
        assert_eq!(g.edge_between("B_1", "B_2"), Some(false));
    }

    #[test]
    fn non_basis_is_rejected() {
        let list = names(&[
            "a_1", "a_2", "a_3", "a_4", "a_5", "a_1", "a_2", "a_3", "a_4", "a_5",
        ]);
        assert_eq!(
            graph_from(reg(), &list).unwrap_err(),
            QuadformError::NotABasis { rank: 5, needed: 10 }
        );
    }

    #[test]
    fn wrong_vertex_count_rejected() {
        let list = names(&["a_1", "a_2"]);
        assert!(matches!(
            graph_from(reg(), &list),
            Err(QuadformError::WrongCount { expected: 10, got: 2 })
        ));
    }

    #[test]
    fn chi_case1_values() {
        let g = shipped_graph(reg(), "gamma1").unwrap();
        assert!(!g.chi(&class("d")).unwrap());
        for c in ["c_2", "c_3", "c_4", "c_5"] {
            assert!(!g.chi(&class(c)).unwrap(), "chi({c}) should vanish");
        }
        for c in ["c_1", "c_6", "b_3", "b_3'"] {
            assert!(g.chi(&class(c)).unwrap(), "chi({c}) should be 1");
        }
        for j in 0..=5 {
            assert!(g.chi(&cls(&format!("B_{j}"))).unwrap());
            assert!(g.chi(&cls(&format!("Phi(0,0)(B_{j})"))).unwrap());
        }
    }

    #[test]
    fn chi_case2_image_value() {
        let g = shipped_graph(reg(), "gamma2").unwrap();
        assert!(g.chi(&cls("Phi(1,0)(B_1)")).unwrap());
        assert_eq!(cls("Phi(1,0)(B_1)"), cls("B_1+B_3+B_4+a_3+d_2"));
    }

    #[test]
    fn closed_form_agrees_with_cell_complex() {
        for (name, _, _) in SHIPPED_GRAPHS {
            let g = shipped_graph(reg(), name).unwrap();
            for code in 0u64..1024 {
                let x = HomologyClass::new(BitVec::from_code(10, code));
                assert_eq!(
                    g.chi(&x).unwrap(),
                    g.chi_closed_form(&x).unwrap(),
                    "disagreement at {code} on {name}"
                );
            }
        }
    }

    #[test]
    fn chi_is_quadratic_refinement_sampled() {
        let g = shipped_graph(reg(), "gamma3").unwrap();
        let table = g.chi_table();
        for u in (1u64..1024).step_by(7) {
            for v in (1u64..1024).step_by(11) {
                let pairing = BitVec::from_code(10, u)
                    .dot(&BitVec::from_code(10, v).swap_halves());
                assert_eq!(
                    table[(u ^ v) as usize],
                    table[u as usize] ^ table[v as usize] ^ pairing
                );
            }
        }
    }

    #[test]
    fn dominates_and_excludes() {
        let g1 = shipped_graph(reg(), "gamma1").unwrap();
        let g2 = shipped_graph(reg(), "gamma2").unwrap();
        let x00 = xi(reg(), 0, 0).unwrap();
        assert!(g1.dominates(&x00));
        assert!(!g2.dominates(&x00));
        assert!(g1.dominates(&Factorization::empty(5)));

        assert!(g1.excludes(&x00, &class("c_2")).unwrap());
        assert!(g1.excludes(&x00, &class("d")).unwrap());
        assert!(!g1.excludes(&x00, &class("B_0")).unwrap());
        assert_eq!(
            g2.excludes(&x00, &class("d")).unwrap_err(),
            QuadformError::NotDominated
        );
    }

    #[test]
    fn chi_one_twists_preserve_chi() {
        let g = shipped_graph(reg(), "gamma1").unwrap();
        let table = g.chi_table();
        for c_code in 1u64..1024 {
            let c = HomologyClass::new(BitVec::from_code(10, c_code));
            if !table[c_code as usize] {
                continue;
            }
            for x_code in (0u64..1024).step_by(13) {
                let x = HomologyClass::new(BitVec::from_code(10, x_code));
                let tx = transvect(&c, &x).unwrap();
                assert_eq!(table[tx.vec().to_code() as usize], table[x_code as usize]);
            }
        }
    }

    #[test]
    fn arf_of_standard_basis_graph_is_one() {
        let std_names = names(&[
            "a_1", "a_2", "a_3", "a_4", "a_5", "b_1", "b_2", "b_3", "b_4", "b_5",
        ]);
        let g = graph_from(reg(), &std_names).unwrap();
        assert!(g.arf());
    }

    #[test]
    fn arf_of_shipped_graphs_is_one() {
        for (name, _, _) in SHIPPED_GRAPHS {
            assert!(shipped_graph(reg(), name).unwrap().arf(), "{name}");
        }
    }

    #[test]
    fn find_certificate_contradictory_is_none() {
        let pool: Vec<String> = reg().names().map(String::from).collect();
        let c2 = class("c_2");
        let got = find_certificate(
            reg(),
            &pool,
            std::slice::from_ref(&c2),
            std::slice::from_ref(&c2),
        )
        .unwrap();
        assert!(got.is_none());
    }

    #[test]
    fn shipped_gamma3_gamma4_satisfy_their_constraints() {
        for (name, parity) in [("gamma3", (0u8, 1u8)), ("gamma4", (1, 1))] {
            let g = shipped_graph(reg(), name).unwrap();
            let (ones, zeros) = case_constraints(reg(), parity).unwrap();
            for c in &ones {
                assert!(g.chi(c).unwrap(), "{name}: chi should be 1 on {}", c.render());
            }
            for c in &zeros {
                assert!(!g.chi(c).unwrap(), "{name}: chi should be 0 on {}", c.render());
            }
        }
    }

    #[test]
    fn distinguish_separates_opposite_parities() {
        match distinguish(reg(), (0, 0), (1, 0)).unwrap() {
            Verdict::Distinguished { forward, reverse } => {
                assert_eq!(forward.graph_name, "gamma2");
                assert_eq!(forward.excluded_label, "Phi(0,0)(B_1)");
                assert_eq!(forward.host_expr, "xi(1,0)");
                let rev = reverse.expect("reverse certificate exists");
                assert_eq!(rev.graph_name, "gamma1");
                assert_eq!(rev.excluded_label, "Phi(1,0)(B_1)");
            }
            other => panic!("unexpected verdict {other:?}"),
        }
    }

    #[test]
    fn distinguish_realizes_two_structures_on_one_manifold() {
        match distinguish(reg(), (1, 0), (0, 1)).unwrap() {
            Verdict::Distinguished { forward, .. } => {
                assert_eq!(forward.graph_name, "gamma3");
                assert_eq!(forward.excluded_label, "Phi(1,0)(B_2)");
            }
            other => panic!("unexpected verdict {other:?}"),
        }
    }

    #[test]
    fn distinguish_same_parity_gives_no_certificate() {
        match distinguish(reg(), (0, 0), (2, 2)).unwrap() {
            Verdict::SameParity { parity } => assert_eq!(parity, (0, 0)),
            other => panic!("unexpected verdict {other:?}"),
        }
    }

    #[test]
    fn stallings_solver_contains_d() {
        let sols = solve_stallings_class(reg()).unwrap();
        assert!(sols.contains(&class("d")));
    }

    #[test]
    fn stallings_contradictory_constraints_empty() {
        let c = ClassConstraints {
            pairings: vec![(class("B_5"), false), (class("B_5"), true)],
            chi_zero: vec![],
        };
        assert!(solve_class_constraints(5, &c).is_empty());
    }

    #[test]
    fn stallings_chi_constraints_strictly_filter() {
        let full = solve_stallings_class(reg()).unwrap();
        let mut weak = stallings_constraints(reg()).unwrap();
        weak.chi_zero.clear();
        let relaxed = solve_class_constraints(5, &weak);
        assert!(relaxed.len() > full.len());
        for s in &full {
            assert!(relaxed.contains(s));
        }
    }
}
