//! Line-oriented text codecs.
//!
//! Every file starts with a manifest:
//!
//! ```text
//! aarhus-format 1
//! kind sum
//! space Aup
//! labels x y
//! truncate 3
//! ```
//!
//! followed by the payload. A diagram block is
//!
//! ```text
//! vertices 4
//! leg 0 x
//! internal 2 cyclic (a b c)
//! edge 0._ 2.a
//! skeleton x : 5 6
//! ```
//!
//! Half-edges are named `a b c` at trivalent vertices and `_` at univalent
//! ones. Attachment vertices are the ids listed on skeleton lines. A sum is
//! a sequence of `coeff p/q` lines each followed by a diagram block.
//! Blank lines and `#` comments are ignored. Serialization lists ids in
//! increasing order, so canonical values give byte-stable text.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::diagram::{he, slot_of, vertex_of, Diagram, Space, Vertex, NONE};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::relations::QuotientBasis;
use crate::ogl::{Crossing, FramedPDLink};
use crate::sum::{format_q, parse_q, GradedSum, Q};
use crate::weights::{HbarSeries, LieData};
use num_traits::Zero;

pub const FORMAT_VERSION: &str = "1";

/// Payload kinds of the container format.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    Diagram,
    Sum,
    Basis,
    Matrix,
    Lie,
    Series,
    Links,
}

impl Kind {
    pub fn tag(self) -> &'static str {
        match self {
            Kind::Diagram => "diagram",
            Kind::Sum => "sum",
            Kind::Basis => "basis",
            Kind::Matrix => "matrix",
            Kind::Lie => "lie",
            Kind::Series => "series",
            Kind::Links => "links",
        }
    }

    fn from_tag(s: &str) -> Option<Kind> {
        [Kind::Diagram, Kind::Sum, Kind::Basis, Kind::Matrix, Kind::Lie, Kind::Series, Kind::Links]
            .into_iter()
            .find(|k| k.tag() == s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Manifest {
    pub version: String,
    pub kind: Kind,
    pub space: Option<Space>,
    pub labels: Vec<String>,
    pub truncate: Option<usize>,
}

impl Manifest {
    pub fn new(kind: Kind) -> Self {
        Manifest { version: FORMAT_VERSION.into(), kind, space: None, labels: Vec::new(), truncate: None }
    }

    pub fn write(&self, out: &mut String) {
        let _ = writeln!(out, "aarhus-format {}", self.version);
        let _ = writeln!(out, "kind {}", self.kind.tag());
        if let Some(s) = self.space {
            let _ = writeln!(out, "space {}", s.tag());
        }
        write_labels(out, &self.labels);
        if let Some(n) = self.truncate {
            let _ = writeln!(out, "truncate {n}");
        }
    }
}

fn write_labels(out: &mut String, labels: &[String]) {
    out.push_str("labels");
    for l in labels {
        out.push(' ');
        out.push_str(l);
    }
    out.push('\n');
}

/// Tokenized non-blank lines with their 1-based line numbers.
pub(crate) struct Lines {
    items: Vec<(usize, Vec<String>)>,
    pos: usize,
    last_line: usize,
}

impl Lines {
    pub(crate) fn new(text: &str) -> Self {
        let mut items = Vec::new();
        let mut last_line = 0;
        for (i, raw) in text.lines().enumerate() {
            last_line = i + 1;
            let line = raw.split('#').next().unwrap_or("");
            let line = line.replace(['(', ')'], " ");
            let toks: Vec<String> = line.split_whitespace().map(str::to_string).collect();
            if !toks.is_empty() {
                items.push((i + 1, toks));
            }
        }
        Lines { items, pos: 0, last_line }
    }

    pub(crate) fn peek(&self) -> Option<&(usize, Vec<String>)> {
        self.items.get(self.pos)
    }

    pub(crate) fn peek_key(&self) -> Option<&str> {
        self.peek().map(|(_, t)| t[0].as_str())
    }

    pub(crate) fn next(&mut self) -> Option<(usize, Vec<String>)> {
        let r = self.items.get(self.pos).cloned();
        if r.is_some() {
            self.pos += 1;
        }
        r
    }

    /// Line number for errors at the current position.
    pub(crate) fn here(&self) -> usize {
        self.peek().map(|(n, _)| *n).unwrap_or(self.last_line + 1)
    }

    /// Next line, which must start with `key`; returns its other tokens.
    pub(crate) fn expect(&mut self, key: &str) -> Result<(usize, Vec<String>)> {
        match self.peek() {
            Some((n, t)) if t[0] == key => {
                let n = *n;
                let rest = t[1..].to_vec();
                self.pos += 1;
                Ok((n, rest))
            }
            _ => Err(Error::parse(self.here(), format!("`{key}`"))),
        }
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos >= self.items.len()
    }

    pub(crate) fn expect_end(&self) -> Result<()> {
        if self.at_end() {
            Ok(())
        } else {
            Err(Error::parse(self.here(), "end of input"))
        }
    }
}

pub(crate) fn parse_usize(line: usize, tok: Option<&String>, what: &str) -> Result<usize> {
    tok.and_then(|t| t.parse().ok()).ok_or_else(|| Error::parse(line, what.to_string()))
}

pub(crate) fn parse_rational(line: usize, tok: Option<&String>) -> Result<Q> {
    tok.and_then(|t| parse_q(t)).ok_or_else(|| Error::parse(line, "a rational p/q"))
}

/// Reads the manifest header. With `optional`, a file that does not start
/// with `aarhus-format` is accepted and yields `None`.
pub(crate) fn read_manifest(lines: &mut Lines, kind: Kind, optional: bool) -> Result<Option<Manifest>> {
    if lines.peek_key() != Some("aarhus-format") {
        if optional {
            return Ok(None);
        }
        return Err(Error::parse(lines.here(), "`aarhus-format` header"));
    }
    let (n, rest) = lines.expect("aarhus-format")?;
    let version = rest.first().cloned().ok_or_else(|| Error::parse(n, "format version"))?;
    if version != FORMAT_VERSION {
        return Err(Error::VersionMismatch { found: version, supported: FORMAT_VERSION.into() });
    }
    let (n, rest) = lines.expect("kind")?;
    let found = rest.first().and_then(|t| Kind::from_tag(t)).ok_or_else(|| Error::parse(n, "a payload kind"))?;
    if found != kind {
        return Err(Error::parse(n, format!("kind {}", kind.tag())));
    }
    let mut m = Manifest::new(kind);
    m.version = version;
    if lines.peek_key() == Some("space") {
        m.space = Some(read_space(lines)?);
    }
    if lines.peek_key() == Some("labels") {
        m.labels = read_labels(lines)?;
    }
    if lines.peek_key() == Some("truncate") {
        let (n, rest) = lines.expect("truncate")?;
        m.truncate = Some(parse_usize(n, rest.first(), "truncation degree")?);
    }
    Ok(Some(m))
}

fn read_space(lines: &mut Lines) -> Result<Space> {
    let (n, rest) = lines.expect("space")?;
    match rest.first().and_then(|t| Space::from_tag(t)) {
        Some(s) if s != Space::BPlus => Ok(s),
        _ => Err(Error::parse(n, "space Aempty, Aup or B")),
    }
}

pub(crate) fn read_labels(lines: &mut Lines) -> Result<Vec<String>> {
    let (n, rest) = lines.expect("labels")?;
    let mut seen = std::collections::HashSet::new();
    for l in &rest {
        if !seen.insert(l) {
            return Err(Error::parse(n, "distinct labels"));
        }
    }
    if rest.len() > 250 {
        return Err(Error::parse(n, "at most 250 labels"));
    }
    Ok(rest)
}

fn half_name(d: &Diagram, h: u32) -> String {
    let v = vertex_of(h);
    if d.vertices()[v] == Vertex::Trivalent {
        format!("{}.{}", v, (b'a' + slot_of(h) as u8) as char)
    } else {
        format!("{v}._")
    }
}

/// Writes a diagram block.
pub fn write_diagram_block(out: &mut String, d: &Diagram, labels: &[String]) {
    let _ = writeln!(out, "vertices {}", d.num_vertices());
    for (v, kind) in d.vertices().iter().enumerate() {
        match kind {
            Vertex::Leg(l) => {
                let _ = writeln!(out, "leg {v} {}", labels[*l as usize]);
            }
            Vertex::Trivalent => {
                let _ = writeln!(out, "internal {v} cyclic (a b c)");
            }
            Vertex::Attach(_) => {}
        }
    }
    for (a, b) in d.edges() {
        let _ = writeln!(out, "edge {} {}", half_name(d, a), half_name(d, b));
    }
    for (i, line) in d.skeleton().iter().enumerate() {
        let _ = write!(out, "skeleton {} :", labels[i]);
        for a in line {
            let _ = write!(out, " {a}");
        }
        out.push('\n');
    }
}

const BLOCK_KEYS: [&str; 5] = ["vertices", "leg", "internal", "edge", "skeleton"];

/// Reads a diagram block. `lines_count` is the number of skeleton lines
/// (0 outside `Aup`).
pub(crate) fn read_diagram_block(lines: &mut Lines, labels: &[String], space: Space) -> Result<Diagram> {
    let (start, rest) = lines.expect("vertices")?;
    let n = parse_usize(start, rest.first(), "vertex count")?;
    if n > 1 << 20 {
        return Err(Error::parse(start, "a vertex count below 2^20"));
    }
    let label_of = |line: usize, name: &str| -> Result<u8> {
        labels.iter().position(|l| l == name).map(|i| i as u8).ok_or_else(|| Error::parse(line, "a declared label"))
    };
    let mut kinds: Vec<Option<Vertex>> = vec![None; n];
    let mut partner = vec![NONE; 3 * n];
    let mut skeleton: Vec<Option<Vec<u32>>> =
        vec![None; if space == Space::Aup { labels.len() } else { 0 }];
    let mut edges: Vec<(usize, String, String)> = Vec::new();
    let mut cyclic_flip = vec![false; n];
    while let Some(key) = lines.peek_key() {
        if key == "vertices" || !BLOCK_KEYS.contains(&key) {
            break;
        }
        let (ln, toks) = lines.next().unwrap();
        let vid = |i: usize| -> Result<usize> {
            let v = parse_usize(ln, toks.get(i), "a vertex id")?;
            if v >= n {
                return Err(Error::parse(ln, "a vertex id below the vertex count"));
            }
            Ok(v)
        };
        let mut declare = |v: usize, k: Vertex| -> Result<()> {
            if kinds[v].is_some() {
                return Err(Error::parse(ln, "each vertex declared once"));
            }
            kinds[v] = Some(k);
            Ok(())
        };
        match toks[0].as_str() {
            "leg" => {
                if space == Space::Aempty {
                    return Err(Error::parse(ln, "no legs in Aempty"));
                }
                let v = vid(1)?;
                let name = toks.get(2).ok_or_else(|| Error::parse(ln, "a leg label"))?;
                let l = label_of(ln, name)?;
                declare(v, Vertex::Leg(l))?;
            }
            "internal" => {
                let v = vid(1)?;
                declare(v, Vertex::Trivalent)?;
                if toks.len() > 2 {
                    if toks.get(2).map(String::as_str) != Some("cyclic") || toks.len() != 6 {
                        return Err(Error::parse(ln, "`cyclic (x y z)` with the names a b c"));
                    }
                    let mut order = Vec::new();
                    for t in &toks[3..6] {
                        match t.as_str() {
                            "a" => order.push(0),
                            "b" => order.push(1),
                            "c" => order.push(2),
                            _ => return Err(Error::parse(ln, "half-edge names a b c")),
                        }
                    }
                    let mut sorted = order.clone();
                    sorted.sort_unstable();
                    if sorted != [0, 1, 2] {
                        return Err(Error::parse(ln, "a permutation of a b c"));
                    }
                    // odd permutations of (a b c) reverse the orientation
                    let rot = (order[1] + 3 - order[0]) % 3;
                    cyclic_flip[v] = rot == 2;
                }
            }
            "edge" => {
                let a = toks.get(1).ok_or_else(|| Error::parse(ln, "two half-edges"))?.clone();
                let b = toks.get(2).ok_or_else(|| Error::parse(ln, "two half-edges"))?.clone();
                if toks.len() != 3 {
                    return Err(Error::parse(ln, "exactly two half-edges"));
                }
                edges.push((ln, a, b));
            }
            "skeleton" => {
                if space != Space::Aup {
                    return Err(Error::parse(ln, "skeleton lines only in Aup"));
                }
                let name = toks.get(1).ok_or_else(|| Error::parse(ln, "a skeleton label"))?;
                let line = label_of(ln, name)? as usize;
                if toks.get(2).map(String::as_str) != Some(":") {
                    return Err(Error::parse(ln, "`:` after the skeleton label"));
                }
                if skeleton[line].is_some() {
                    return Err(Error::parse(ln, "each skeleton line once"));
                }
                let mut ids = Vec::new();
                for i in 3..toks.len() {
                    let v = vid(i)?;
                    declare(v, Vertex::Attach(line as u8))?;
                    ids.push(v as u32);
                }
                skeleton[line] = Some(ids);
            }
            _ => unreachable!(),
        }
    }
    let kinds: Vec<Vertex> = kinds
        .into_iter()
        .enumerate()
        .map(|(v, k)| k.ok_or_else(|| Error::parse(start, format!("a declaration of vertex {v}"))))
        .collect::<Result<_>>()?;
    let half = |ln: usize, s: &str| -> Result<u32> {
        let (v, h) = s.split_once('.').ok_or_else(|| Error::parse(ln, "a half-edge `v.h`"))?;
        let v: usize = v.parse().map_err(|_| Error::parse(ln, "a vertex id"))?;
        if v >= n {
            return Err(Error::parse(ln, "a vertex id below the vertex count"));
        }
        let slot = match (kinds[v], h) {
            (Vertex::Trivalent, "a") => 0,
            (Vertex::Trivalent, "b") => 1,
            (Vertex::Trivalent, "c") => 2,
            (Vertex::Trivalent, _) => return Err(Error::parse(ln, "half-edge a, b or c")),
            (_, "_") => 0,
            _ => return Err(Error::parse(ln, "half-edge `_` at a univalent vertex")),
        };
        Ok(he(v, slot))
    };
    for (ln, a, b) in &edges {
        let (x, y) = (half(*ln, a)?, half(*ln, b)?);
        if x == y || partner[x as usize] != NONE || partner[y as usize] != NONE {
            return Err(Error::parse(*ln, "each half-edge used exactly once"));
        }
        partner[x as usize] = y;
        partner[y as usize] = x;
    }
    let skeleton: Vec<Vec<u32>> = skeleton.into_iter().map(|s| s.unwrap_or_default()).collect();
    let mut d = Diagram::from_parts(kinds, partner, skeleton)
        .map_err(|v| Error::parse(start, format!("a well-formed diagram ({v})")))?;
    for (v, &f) in cyclic_flip.iter().enumerate() {
        if f {
            d = d.flip_vertex(v);
        }
    }
    Ok(d)
}

/// A diagram file: manifest (kind `diagram`) or a bare `space`/`labels`
/// header, then one diagram block.
pub fn parse_diagram(text: &str) -> Result<(Space, Vec<String>, Diagram)> {
    let mut lines = Lines::new(text);
    let manifest = read_manifest(&mut lines, Kind::Diagram, true)?;
    let (space, labels) = match manifest {
        Some(m) => (m.space.ok_or_else(|| Error::parse(lines.here(), "`space` in the manifest"))?, m.labels),
        None => {
            let s = read_space(&mut lines)?;
            let l = if lines.peek_key() == Some("labels") { read_labels(&mut lines)? } else { Vec::new() };
            (s, l)
        }
    };
    let d = read_diagram_block(&mut lines, &labels, space)?;
    lines.expect_end()?;
    validate(&d, space, &labels, 1)?;
    Ok((space, labels, d))
}

fn validate(d: &Diagram, space: Space, labels: &[String], line: usize) -> Result<()> {
    let n = if space == Space::Aempty { 0 } else { labels.len() };
    d.validate(space, n).map_err(|v| Error::parse(line, format!("a diagram of {space} ({v})")))
}

pub fn serialize_diagram(space: Space, labels: &[String], d: &Diagram) -> String {
    let mut out = String::new();
    let mut m = Manifest::new(Kind::Diagram);
    m.space = Some(space);
    m.labels = labels.to_vec();
    m.write(&mut out);
    write_diagram_block(&mut out, d, labels);
    out
}

/// A graded sum together with the names of its labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledSum {
    pub names: Vec<String>,
    pub sum: GradedSum,
}

impl LabeledSum {
    pub fn new(names: Vec<String>, sum: GradedSum) -> Self {
        LabeledSum { names, sum }
    }

    /// Default names `x1 x2 ...` for `n` labels.
    pub fn default_names(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("x{i}")).collect()
    }
}

pub fn parse_sum(text: &str) -> Result<LabeledSum> {
    let mut lines = Lines::new(text);
    let m = read_manifest(&mut lines, Kind::Sum, false)?.unwrap();
    let space = m.space.ok_or_else(|| Error::parse(lines.here(), "`space` in the manifest"))?;
    let n = m.truncate.ok_or_else(|| Error::parse(lines.here(), "`truncate` in the manifest"))?;
    let labels = m.labels;
    let count = if space == Space::Aempty { 0 } else { labels.len() };
    let mut sum = GradedSum::zero(space, count, n);
    while !lines.at_end() {
        let (ln, rest) = lines.expect("coeff")?;
        let c = parse_rational(ln, rest.first())?;
        let d = read_diagram_block(&mut lines, &labels, space)?;
        validate(&d, space, &labels, ln)?;
        sum.add_term(&d, c);
    }
    Ok(LabeledSum { names: labels, sum })
}

pub fn serialize_sum(s: &LabeledSum) -> String {
    let mut out = String::new();
    let mut m = Manifest::new(Kind::Sum);
    m.space = Some(s.sum.space());
    m.labels = s.names.clone();
    m.truncate = Some(s.sum.max_degree());
    m.write(&mut out);
    for (d, c) in s.sum.iter() {
        let _ = writeln!(out, "coeff {}", format_q(c));
        write_diagram_block(&mut out, d, &s.names);
    }
    out
}

/// Quotient bases, used by the on-disk basis cache.
pub fn serialize_basis(b: &QuotientBasis) -> String {
    let names = LabeledSum::default_names(b.labels);
    let mut out = String::new();
    let mut m = Manifest::new(Kind::Basis);
    m.space = Some(b.space);
    m.labels = names.clone();
    m.truncate = Some(b.degree);
    m.write(&mut out);
    for d in &b.basis {
        out.push_str("element\n");
        write_diagram_block(&mut out, d, &names);
    }
    let mut spanning: Vec<(&Diagram, &[(usize, Q)])> = b.normal_forms().collect();
    spanning.sort();
    for (d, nf) in spanning {
        out.push_str("spanning\n");
        write_diagram_block(&mut out, d, &names);
        out.push_str("nf");
        for (k, x) in nf {
            let _ = write!(out, " {k}:{}", format_q(x));
        }
        out.push('\n');
    }
    out
}

pub fn parse_basis(text: &str) -> Result<QuotientBasis> {
    let mut lines = Lines::new(text);
    let m = read_manifest(&mut lines, Kind::Basis, false)?.unwrap();
    let space = m.space.ok_or_else(|| Error::parse(lines.here(), "`space` in the manifest"))?;
    let degree = m.truncate.ok_or_else(|| Error::parse(lines.here(), "`truncate` in the manifest"))?;
    let labels = m.labels;
    let mut basis = Vec::new();
    while lines.peek_key() == Some("element") {
        lines.next();
        basis.push(read_diagram_block(&mut lines, &labels, space)?);
    }
    let mut normal_forms = HashMap::new();
    while !lines.at_end() {
        lines.expect("spanning")?;
        let d = read_diagram_block(&mut lines, &labels, space)?;
        let (ln, rest) = lines.expect("nf")?;
        let mut nf = Vec::new();
        for t in &rest {
            let (k, x) = t.split_once(':').ok_or_else(|| Error::parse(ln, "`index:coefficient`"))?;
            let k: usize = k.parse().map_err(|_| Error::parse(ln, "a basis index"))?;
            if k >= basis.len() {
                return Err(Error::parse(ln, "a basis index in range"));
            }
            nf.push((k, parse_q(x).ok_or_else(|| Error::parse(ln, "a rational"))?));
        }
        normal_forms.insert(d, nf);
    }
    let labels = if space == Space::Aempty { 0 } else { labels.len() };
    Ok(QuotientBasis { space, labels, degree, basis, normal_forms })
}

/// Matrix file: `labels x y` and one row of rationals per label. A
/// manifest header (kind `matrix`) is optional.
pub fn parse_matrix(text: &str) -> Result<(Vec<String>, Matrix)> {
    let mut lines = Lines::new(text);
    let m = read_manifest(&mut lines, Kind::Matrix, true)?;
    let labels = match m {
        Some(m) if !m.labels.is_empty() => m.labels,
        _ => read_labels(&mut lines)?,
    };
    let mut rows = Vec::new();
    while let Some((ln, toks)) = lines.next() {
        if toks.len() != labels.len() {
            return Err(Error::parse(ln, format!("{} entries", labels.len())));
        }
        rows.push(toks.iter().map(|t| parse_rational(ln, Some(t))).collect::<Result<Vec<Q>>>()?);
    }
    if rows.len() != labels.len() {
        return Err(Error::parse(lines.here(), format!("{} rows", labels.len())));
    }
    let n = labels.len();
    let mat = if n == 0 { Matrix::zeros(0, 0) } else { Matrix::from_rows(rows) };
    Ok((labels, mat))
}

pub fn serialize_matrix(labels: &[String], m: &Matrix) -> String {
    let mut out = String::new();
    let mut man = Manifest::new(Kind::Matrix);
    man.labels = labels.to_vec();
    man.write(&mut out);
    for i in 0..m.rows {
        let row: Vec<String> = m.row(i).iter().map(format_q).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Lie data: `dim d`, then `metric a b p/q` and `f a b c p/q` lines with
/// 1-based indices. Entries not given are zero; each given entry also sets
/// its symmetric (metric) or antisymmetric (f) images, and images that
/// contradict an explicit entry are rejected.
pub fn parse_lie(text: &str) -> Result<LieData> {
    let mut lines = Lines::new(text);
    read_manifest(&mut lines, Kind::Lie, true)?;
    let (ln, toks) = lines.expect("dim")?;
    let dim = parse_usize(ln, toks.first(), "dimension")?;
    if dim == 0 || dim > 64 {
        return Err(Error::parse(ln, "dimension between 1 and 64"));
    }
    let mut metric: Vec<Option<Q>> = vec![None; dim * dim];
    let mut f: Vec<Option<Q>> = vec![None; dim * dim * dim];
    let set = |slot: &mut Option<Q>, x: Q, ln: usize| -> Result<()> {
        match slot {
            Some(old) if *old != x => Err(Error::parse(ln, "entry contradicts an earlier one")),
            _ => {
                *slot = Some(x);
                Ok(())
            }
        }
    };
    while let Some((ln, toks)) = lines.next() {
        let index = |k: usize| -> Result<usize> {
            let i = parse_usize(ln, toks.get(k), "index")?;
            if i == 0 || i > dim {
                return Err(Error::parse(ln, format!("index between 1 and {dim}")));
            }
            Ok(i - 1)
        };
        match toks[0].as_str() {
            "metric" if toks.len() == 4 => {
                let (a, b) = (index(1)?, index(2)?);
                let x = parse_rational(ln, toks.get(3))?;
                set(&mut metric[a * dim + b], x.clone(), ln)?;
                set(&mut metric[b * dim + a], x, ln)?;
            }
            "f" if toks.len() == 5 => {
                let (a, b, c) = (index(1)?, index(2)?, index(3)?);
                let x = parse_rational(ln, toks.get(4))?;
                for (p, even) in [([a, b, c], true), ([b, c, a], true), ([c, a, b], true), ([b, a, c], false), ([a, c, b], false), ([c, b, a], false)] {
                    let y = if even { x.clone() } else { -x.clone() };
                    set(&mut f[(p[0] * dim + p[1]) * dim + p[2]], y, ln)?;
                }
            }
            _ => return Err(Error::parse(ln, "`metric a b q` or `f a b c q`")),
        }
    }
    let mut m = Matrix::zeros(dim, dim);
    for (k, x) in metric.into_iter().enumerate() {
        m.data[k] = x.unwrap_or_else(Q::zero);
    }
    LieData::new(m, f.into_iter().map(|x| x.unwrap_or_else(Q::zero)).collect())
}

pub fn serialize_lie(g: &LieData) -> String {
    let mut out = String::new();
    Manifest::new(Kind::Lie).write(&mut out);
    let n = g.dim();
    let _ = writeln!(out, "dim {n}");
    for a in 0..n {
        for b in a..n {
            let x = &g.metric()[(a, b)];
            if !x.is_zero() {
                let _ = writeln!(out, "metric {} {} {}", a + 1, b + 1, format_q(x));
            }
        }
    }
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                let x = g.f(a, b, c);
                if !x.is_zero() {
                    let _ = writeln!(out, "f {} {} {} {}", a + 1, b + 1, c + 1, format_q(x));
                }
            }
        }
    }
    out
}

/// `hbar k p/q` lines, one per power.
pub fn serialize_series(s: &HbarSeries) -> String {
    let mut out = String::new();
    let mut man = Manifest::new(Kind::Series);
    man.truncate = Some(s.max_degree());
    man.write(&mut out);
    out.push_str(&s.to_text());
    out
}

pub fn parse_series(text: &str) -> Result<HbarSeries> {
    let mut lines = Lines::new(text);
    read_manifest(&mut lines, Kind::Series, true)?;
    let mut coeffs = Vec::new();
    while let Some((ln, toks)) = lines.next() {
        if toks[0] != "hbar" || toks.len() != 3 || parse_usize(ln, toks.get(1), "power")? != coeffs.len() {
            return Err(Error::parse(ln, format!("`hbar {} q`", coeffs.len())));
        }
        coeffs.push(parse_rational(ln, toks.get(2))?);
    }
    Ok(HbarSeries { coeffs })
}

/// One block per term: `term`, `sign s`, `component k framing f arcs ...`
/// (components numbered from 1), then `X a b c d o` crossing lines.
pub fn serialize_links(terms: &[FramedPDLink]) -> String {
    let mut out = String::new();
    Manifest::new(Kind::Links).write(&mut out);
    for t in terms {
        let _ = writeln!(out, "term");
        let _ = writeln!(out, "sign {}", t.sign);
        for (k, arcs) in t.component_arcs.iter().enumerate() {
            let arcs: Vec<String> = arcs.iter().map(|a| a.to_string()).collect();
            let _ = writeln!(out, "component {} framing {} arcs {}", k + 1, t.framings[k], arcs.join(" "));
        }
        for x in &t.pd_crossings {
            let [a, b, c, d] = x.arcs;
            let _ = writeln!(out, "X {a} {b} {c} {d} {}", x.over);
        }
    }
    out
}

pub fn parse_links(text: &str) -> Result<Vec<FramedPDLink>> {
    let mut lines = Lines::new(text);
    read_manifest(&mut lines, Kind::Links, true)?;
    let mut terms = Vec::new();
    while !lines.at_end() {
        lines.expect("term")?;
        let (ln, toks) = lines.expect("sign")?;
        let sign = match toks.first().map(String::as_str) {
            Some("1") | Some("+1") => 1,
            Some("-1") => -1,
            _ => return Err(Error::parse(ln, "sign 1 or -1")),
        };
        let mut t = FramedPDLink { components: 0, component_arcs: Vec::new(), pd_crossings: Vec::new(), framings: Vec::new(), sign };
        while lines.peek_key() == Some("component") {
            let (ln, toks) = lines.next().unwrap();
            if parse_usize(ln, toks.get(1), "component number")? != t.components + 1
                || toks.get(2).map(String::as_str) != Some("framing")
                || toks.get(4).map(String::as_str) != Some("arcs")
            {
                return Err(Error::parse(ln, format!("`component {} framing f arcs ...`", t.components + 1)));
            }
            let framing = toks[3].parse::<i64>().map_err(|_| Error::parse(ln, "integer framing"))?;
            let arcs = toks[5..].iter().map(|a| parse_usize(ln, Some(a), "arc").map(|a| a as u32)).collect::<Result<Vec<u32>>>()?;
            t.components += 1;
            t.framings.push(framing);
            t.component_arcs.push(arcs);
        }
        while lines.peek_key() == Some("X") {
            let (ln, toks) = lines.next().unwrap();
            if toks.len() != 6 {
                return Err(Error::parse(ln, "`X a b c d o`"));
            }
            let v = toks[1..].iter().map(|a| parse_usize(ln, Some(a), "arc").map(|a| a as u32)).collect::<Result<Vec<u32>>>()?;
            t.pd_crossings.push(Crossing { arcs: [v[0], v[1], v[2], v[3]], over: v[4] });
        }
        t.validate().map_err(|e| Error::parse(lines.here(), e))?;
        terms.push(t);
    }
    Ok(terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::named::*;
    use crate::sum::q;

    fn names(n: &[&str]) -> Vec<String> {
        n.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn theta_round_trip() {
        let t = theta();
        let text = serialize_diagram(Space::Aempty, &[], &t);
        let (s, l, d) = parse_diagram(&text).unwrap();
        assert_eq!((s, l.len()), (Space::Aempty, 0));
        assert_eq!(d, t);
        assert_eq!(serialize_diagram(s, &l, &d), text);
    }

    #[test]
    fn bare_module_format() {
        let text = "space B\nlabels x y\nvertices 4\nleg 0 x\nleg 1 x\ninternal 2 cyclic (a b c)\n\
                    internal 3 cyclic (a b c)\nedge 0._ 2.a\nedge 1._ 3.a\nedge 2.b 3.c\nedge 2.c 3.b\n";
        let (s, l, d) = parse_diagram(text).unwrap();
        assert_eq!(s, Space::B);
        assert_eq!(l, names(&["x", "y"]));
        assert_eq!(d.num_legs(), 2);
        assert_eq!(crate::diagram::canonical_form(&d).canonical, crate::diagram::canonical_form(&wheel(&[0, 0])).canonical);
    }

    #[test]
    fn cyclic_order_sets_orientation() {
        let base = "space Aempty\nvertices 2\ninternal 0 cyclic (a b c)\ninternal 1 cyclic (X)\n\
                    edge 0.a 1.a\nedge 0.b 1.b\nedge 0.c 1.c\n";
        let d1 = parse_diagram(&base.replace("(X)", "(a b c)")).unwrap().2;
        let d2 = parse_diagram(&base.replace("(X)", "(b a c)")).unwrap().2;
        let d3 = parse_diagram(&base.replace("(X)", "(c a b)")).unwrap().2;
        let s = |d: &Diagram| crate::diagram::canonical_form(d).sign;
        assert_eq!(s(&d1), -s(&d2));
        assert_eq!(s(&d1), s(&d3));
    }

    #[test]
    fn errors_carry_lines() {
        let e = parse_diagram("space Q\nvertices 0\n").unwrap_err();
        assert_eq!(e, Error::parse(1, "space Aempty, Aup or B"));
        let e = parse_diagram("space Aempty\nvertices 2\ninternal 0\ninternal 1\nedge 0.a 1.a\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e:?}");
        let e = parse_sum("aarhus-format 2\nkind sum\n").unwrap_err();
        assert!(matches!(e, Error::VersionMismatch { .. }));
    }

    #[test]
    fn sum_round_trip_exact() {
        let n = names(&["x"]);
        let mut s = GradedSum::zero(Space::Aup, 1, 3);
        s.add_term(&chord(0, 0, 1), q(-3, 7));
        s.add_term(&Diagram::empty(1), q(1, 1));
        let ls = LabeledSum::new(n, s);
        let text = serialize_sum(&ls);
        let back = parse_sum(&text).unwrap();
        assert_eq!(back, ls);
        assert_eq!(serialize_sum(&back), text);
    }

    #[test]
    fn matrix_round_trip() {
        let m = Matrix::from_rows(vec![vec![q(1, 2), q(-1, 1)], vec![q(-1, 1), q(0, 1)]]);
        let l = names(&["x", "y"]);
        let text = serialize_matrix(&l, &m);
        assert_eq!(parse_matrix(&text).unwrap(), (l.clone(), m.clone()));
        assert_eq!(parse_matrix("labels x y\n1/2 -1\n-1 0\n").unwrap(), (l, m));
    }

    #[test]
    fn lie_round_trip_and_bare_form() {
        for g in [LieData::so3(), LieData::sl2()] {
            assert_eq!(parse_lie(&serialize_lie(&g)).unwrap(), g);
        }
        let bare = "dim 3\nmetric 1 1 1\nmetric 2 2 1\nmetric 3 3 1\nf 1 2 3 1\n";
        assert_eq!(parse_lie(bare).unwrap(), LieData::so3());
        assert!(matches!(parse_lie("dim 3\nf 1 2 3 1\n"), Err(Error::BadLieData(_))));
        assert!(parse_lie("dim 3\nf 1 2 3 1\nf 2 1 3 1\n").unwrap_err().is_parse_error());
    }

    #[test]
    fn links_round_trip() {
        let e = crate::ogl::ogl_expand(&crate::diagram::named::theta()).unwrap();
        assert_eq!(parse_links(&serialize_links(&e.terms)).unwrap(), e.terms);
        let s = HbarSeries { coeffs: vec![Q::from_integer(1.into()), crate::sum::q(-3, 7)] };
        assert_eq!(parse_series(&serialize_series(&s)).unwrap(), s);
    }
}
