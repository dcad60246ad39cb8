//! Canonical labeling of diagrams with antisymmetry sign tracking.
//!
//! Vertices are ordered by individualization and refinement over the
//! underlying colored multigraph; the least adjacency code over all leaves
//! of the search tree fixes the canonical vertex order. Within a vertex,
//! half-edges are ordered by the canonical index of the far endpoint; ties
//! inside a bundle of parallel edges are broken at the lower endpoint by
//! slot and propagated to the upper endpoint, so permuting a bundle never
//! changes the orientation product.
//!
//! The sign of a diagram relative to its canonical form is the product of
//! the permutation parities at trivalent vertices. Two minimal leaves
//! disagreeing on that product witness an orientation-reversing
//! automorphism, and the diagram is zero modulo AS.

use super::{he, slot_of, vertex_of, Diagram, Vertex, NONE};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignedCanonical {
    pub canonical: Diagram,
    /// `+1` or `-1` such that `d = sign * canonical`, or `0` when `d = -d`.
    pub sign: i8,
}

/// Canonical representative modulo isomorphism and AS.
pub fn canonical_form(d: &Diagram) -> SignedCanonical {
    let (canonical, sign) = by_components(d, false);
    SignedCanonical { canonical, sign }
}

/// Canonical representative modulo isomorphism only: vertex orientations
/// are kept as data, so a diagram and its AS-flip stay distinct.
pub fn canonical_oriented(d: &Diagram) -> Diagram {
    by_components(d, true).0
}

fn by_components(d: &Diagram, oriented: bool) -> (Diagram, i8) {
    if !d.skeleton.is_empty() || d.vertices.is_empty() {
        return canon_connected(d, oriented);
    }
    let comps = d.components();
    if comps.len() == 1 {
        return canon_connected(d, oriented);
    }
    let mut sign = 1i8;
    let mut parts: Vec<Diagram> = comps
        .iter()
        .map(|c| {
            let (p, s) = canon_connected(&d.restrict(c), oriented);
            sign *= s;
            p
        })
        .collect();
    parts.sort();
    let mut out = Diagram::empty(0);
    for p in &parts {
        out = out.disjoint_union(p);
    }
    (out, sign)
}

struct Search<'a> {
    d: &'a Diagram,
    nbrs: Vec<Vec<u32>>,
    oriented: bool,
    best_code: Option<Vec<u32>>,
    /// Orientation bits of every leaf attaining the best code (oriented mode).
    best_bits: Vec<Vec<bool>>,
    best_leaf: Vec<u32>,
    best_sign: i8,
}

fn canon_connected(d: &Diagram, oriented: bool) -> (Diagram, i8) {
    let n = d.vertices.len();
    if n == 0 {
        return (d.clone(), 1);
    }
    let mut position = vec![0u32; n];
    for line in &d.skeleton {
        for (i, &a) in line.iter().enumerate() {
            position[a as usize] = i as u32;
        }
    }
    let keys: Vec<(u8, u8, u32)> = (0..n)
        .map(|v| match d.vertices[v] {
            Vertex::Attach(l) => (0, l, position[v]),
            Vertex::Leg(l) => (1, l, 0),
            Vertex::Trivalent => (2, 0, 0),
        })
        .collect();
    let mut sorted = keys.clone();
    sorted.sort_unstable();
    sorted.dedup();
    let mut colors: Vec<u32> = keys.iter().map(|k| sorted.binary_search(k).unwrap() as u32).collect();
    let nbrs: Vec<Vec<u32>> = (0..n)
        .map(|v| (0..d.vertices[v].valence()).map(|s| vertex_of(d.partner[3 * v + s]) as u32).collect())
        .collect();
    let mut search = Search {
        d,
        nbrs,
        oriented,
        best_code: None,
        best_bits: Vec::new(),
        best_leaf: Vec::new(),
        best_sign: 1,
    };
    refine(&mut colors, &search.nbrs);
    search.descend(colors);
    let mut canonical = apply_leaf(d, &search.best_leaf);
    if oriented {
        // equal-code leaves all produce the same unoriented diagram; the
        // orientation is the least bit vector over those leaves, taken modulo
        // the flips realized by edge-level symmetries
        let span = edge_symmetry_flips(&canonical);
        let bits = search.best_bits.iter().map(|b| reduce_flips(b, &span)).min().unwrap();
        for (i, &b) in bits.iter().enumerate() {
            if b {
                canonical = canonical.flip_vertex(i);
            }
        }
    }
    // swapping the two ends of a self-loop fixes every vertex, so the
    // vertex-level search never sees that orientation-reversing symmetry
    let sign = if oriented {
        1
    } else if d.has_tadpole() {
        0
    } else {
        search.best_sign
    };
    (canonical, sign)
}

/// Equitable refinement: split cells by the multiset of neighbour colours
/// until stable. New colours are ranks of `(old colour, signature)`, so the
/// result depends only on the isomorphism class of the coloured graph.
fn refine(colors: &mut [u32], nbrs: &[Vec<u32>]) {
    let n = colors.len();
    let mut cells = count_cells(colors);
    loop {
        let mut sigs: Vec<(u32, Vec<u32>, usize)> = (0..n)
            .map(|v| {
                let mut s: Vec<u32> = nbrs[v].iter().map(|&w| colors[w as usize]).collect();
                s.sort_unstable();
                (colors[v], s, v)
            })
            .collect();
        sigs.sort_unstable();
        let mut rank = 0u32;
        for i in 0..n {
            if i > 0 && (sigs[i].0 != sigs[i - 1].0 || sigs[i].1 != sigs[i - 1].1) {
                rank += 1;
            }
            colors[sigs[i].2] = rank;
        }
        let now = rank as usize + 1;
        if now == cells {
            break;
        }
        cells = now;
    }
}

fn count_cells(colors: &[u32]) -> usize {
    let mut c = colors.to_vec();
    c.sort_unstable();
    c.dedup();
    c.len()
}

impl Search<'_> {
    fn descend(&mut self, colors: Vec<u32>) {
        let n = colors.len();
        let mut size = vec![0usize; n];
        for &c in &colors {
            size[c as usize] += 1;
        }
        let target = match (0..n).find(|&c| size[c] > 1) {
            None => {
                self.leaf(&colors);
                return;
            }
            Some(c) => c as u32,
        };
        for v in 0..n {
            if colors[v] != target {
                continue;
            }
            let mut next = colors.clone();
            for (u, c) in next.iter_mut().enumerate() {
                if *c > target || (*c == target && u != v) {
                    *c += 1;
                }
            }
            refine(&mut next, &self.nbrs);
            self.descend(next);
        }
    }

    fn leaf(&mut self, newidx: &[u32]) {
        let n = newidx.len();
        let mut order = vec![0usize; n];
        for (v, &i) in newidx.iter().enumerate() {
            order[i as usize] = v;
        }
        let mut code = Vec::with_capacity(4 * n);
        for &v in &order {
            let mut s: Vec<u32> = self.nbrs[v].iter().map(|&w| newidx[w as usize]).collect();
            s.sort_unstable();
            code.extend_from_slice(&s);
            code.push(u32::MAX);
        }
        let ord = match &self.best_code {
            None => std::cmp::Ordering::Less,
            Some(b) => code.cmp(b),
        };
        if ord == std::cmp::Ordering::Greater {
            return;
        }
        let (bits, sign) = leaf_orientation(self.d, newidx);
        if ord == std::cmp::Ordering::Less {
            self.best_code = Some(code);
            self.best_leaf = newidx.to_vec();
            self.best_bits = vec![bits];
            self.best_sign = sign;
            return;
        }
        if self.oriented {
            self.best_bits.push(bits);
        } else if sign != self.best_sign {
            self.best_sign = 0;
        }
    }
}

/// Position of each old half-edge in the canonical diagram for the vertex
/// numbering `newidx`, plus the per-vertex parity (true = odd) of the
/// induced slot permutation, listed by new vertex index.
fn slot_assignment(d: &Diagram, newidx: &[u32]) -> (Vec<u32>, Vec<bool>) {
    let n = newidx.len();
    let mut order = vec![0usize; n];
    for (v, &i) in newidx.iter().enumerate() {
        order[i as usize] = v;
    }
    let mut new_he = vec![NONE; 3 * n];
    let mut odd = vec![false; n];
    for (i, &v) in order.iter().enumerate() {
        if d.vertices[v] != Vertex::Trivalent {
            new_he[3 * v] = he(i, 0);
            continue;
        }
        let mut keyed: Vec<((u32, u32), usize)> = (0..3)
            .map(|s| {
                let p = d.partner[3 * v + s];
                let w = newidx[vertex_of(p)];
                let tie = if (w as usize) < i { slot_of(new_he[p as usize]) as u32 } else { s as u32 };
                ((w, tie), s)
            })
            .collect();
        keyed.sort_unstable();
        let mut pos = [0usize; 3];
        for (rank, &(_, s)) in keyed.iter().enumerate() {
            pos[s] = rank;
            new_he[3 * v + s] = he(i, rank);
        }
        let inversions = (pos[0] > pos[1]) as u8 + (pos[0] > pos[2]) as u8 + (pos[1] > pos[2]) as u8;
        odd[i] = inversions % 2 == 1;
    }
    (new_he, odd)
}

fn leaf_orientation(d: &Diagram, newidx: &[u32]) -> (Vec<bool>, i8) {
    let (_, odd) = slot_assignment(d, newidx);
    let sign = if odd.iter().filter(|&&b| b).count() % 2 == 0 { 1 } else { -1 };
    (odd, sign)
}

/// Orientation flips that are isomorphisms: reversing a vertex with a
/// self-loop, and reversing both ends of a pair of parallel edges. Returned
/// as a reduced GF(2) echelon basis, each row led by its least set index.
fn edge_symmetry_flips(d: &Diagram) -> Vec<Vec<bool>> {
    let n = d.vertices.len();
    let mut gens: Vec<Vec<bool>> = Vec::new();
    let mut count: std::collections::BTreeMap<(usize, usize), usize> = Default::default();
    for (a, b) in d.edges() {
        let (u, v) = (vertex_of(a), vertex_of(b));
        if d.vertices[u] != Vertex::Trivalent || d.vertices[v] != Vertex::Trivalent {
            continue;
        }
        *count.entry((u.min(v), u.max(v))).or_default() += 1;
    }
    for (&(u, v), &c) in &count {
        let mut g = vec![false; n];
        if u == v {
            g[u] = true;
        } else if c >= 2 {
            g[u] = true;
            g[v] = true;
        } else {
            continue;
        }
        gens.push(g);
    }
    let mut basis: Vec<Vec<bool>> = Vec::new();
    for mut g in gens {
        for b in &basis {
            let p = b.iter().position(|&x| x).unwrap();
            if g[p] {
                xor(&mut g, b);
            }
        }
        let Some(p) = g.iter().position(|&x| x) else { continue };
        for b in basis.iter_mut() {
            if b[p] {
                xor(b, &g);
            }
        }
        basis.push(g);
    }
    basis
}

fn xor(a: &mut [bool], b: &[bool]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x ^= *y;
    }
}

/// Least element of the coset `bits + span(basis)`.
fn reduce_flips(bits: &[bool], basis: &[Vec<bool>]) -> Vec<bool> {
    let mut out = bits.to_vec();
    for b in basis {
        let p = b.iter().position(|&x| x).unwrap();
        if out[p] {
            xor(&mut out, b);
        }
    }
    out
}

fn apply_leaf(d: &Diagram, newidx: &[u32]) -> Diagram {
    let n = newidx.len();
    let (new_he, _) = slot_assignment(d, newidx);
    let mut vertices = vec![Vertex::Trivalent; n];
    let mut partner = vec![NONE; 3 * n];
    for v in 0..n {
        vertices[newidx[v] as usize] = d.vertices[v];
        for s in 0..d.vertices[v].valence() {
            let h = 3 * v + s;
            partner[new_he[h] as usize] = new_he[d.partner[h] as usize];
        }
    }
    let skeleton = d
        .skeleton
        .iter()
        .map(|line| line.iter().map(|&a| newidx[a as usize]).collect())
        .collect();
    Diagram { vertices, partner, skeleton }
}
