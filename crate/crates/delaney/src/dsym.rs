//! Delaney-Dress symbols: finite chamber systems with three involutions and
//! branching weights, encoding equivariant tilings on a 2-orbifold.
//!
//! A symbol is a connected set of chambers (barycentric triangles) with
//! adjacency involutions `s0, s1, s2` and weights `m01` (tile degree) and
//! `m12` (vertex degree) constant on their orbits. The module also provides
//! the partial chamber complex used to compute Euler characteristics,
//! orientability and boundary circuits of sub-complexes, the extraction of
//! the host orbifold symbol, canonical forms, and the `.cds` text codec.

use crate::orbifold::{Order, OrbifoldSymbol};
use num_rational::Rational64;
use thiserror::Error;

/// Errors arising from symbol construction, complex assembly or `.cds` parsing.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DsymError {
    #[error("symbol has no chambers")]
    Empty,
    #[error("adjacency and weight vectors must all have length {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("sigma_{gen} sends chamber {chamber} out of range")]
    ChamberOutOfRange { gen: usize, chamber: usize },
    #[error("sigma_{gen} is not an involution at chamber {chamber}")]
    NotInvolution { gen: usize, chamber: usize },
    #[error("chamber graph is not connected")]
    NotConnected,
    #[error("(sigma0 sigma2)^2 is not the identity at chamber {chamber}")]
    EdgeOrbitBroken { chamber: usize },
    #[error("branching weight m{a}{b} must be at least 1 at chamber {chamber}")]
    WeightTooSmall { a: usize, b: usize, chamber: usize },
    #[error("m{a}{b} is not constant on the orbit of chamber {chamber}")]
    WeightNotConstant { a: usize, b: usize, chamber: usize },
    #[error("rotation order {r} does not divide m{a}{b} = {m} on the orbit of chamber {chamber}")]
    WeightNotDivisible { a: usize, b: usize, r: u32, m: u32, chamber: usize },
    #[error("colour vector has length {got}, expected {expected}")]
    ColourLengthMismatch { expected: usize, got: usize },
    #[error("colour is not constant on the (0,2)-orbit of chamber {chamber}")]
    ColourNotConstant { chamber: usize },
    #[error("coloured symbol needs at least one black edge orbit")]
    NoBlackOrbit,
    #[error("complex chamber set is empty, duplicated or out of range")]
    BadChamberSet,
    #[error("glued side {side} of chamber {chamber} has no matching partner in the complex")]
    GluedPartnerMissing { chamber: usize, side: usize },
    #[error("complex is not connected through glued sides")]
    ComplexNotConnected,
    #[error("cds parse error at line {line}: {msg}")]
    Cds { line: usize, msg: String },
}

fn cds_err(line: usize, msg: impl Into<String>) -> DsymError {
    DsymError::Cds { line, msg: msg.into() }
}

/// Colour of a tile-edge class: black edges are real tiling edges, green
/// edges are auxiliary cuts slicing unbounded tiles into disks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Colour {
    Black,
    Green,
}

/// A Delaney-Dress symbol.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DSymbol {
    n: usize,
    s: [Vec<usize>; 3],
    m01: Vec<u32>,
    m12: Vec<u32>,
}

/// One orbit of a generator pair, listed end-to-end (chains) or in cyclic
/// order (cycles), starting from its least chamber.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Orbit {
    pub i: usize,
    pub j: usize,
    pub chambers: Vec<usize>,
    pub is_chain: bool,
    pub m: u32,
}

impl Orbit {
    pub fn size(&self) -> usize {
        self.chambers.len()
    }

    /// Order of the rotation `s_i s_j` on this orbit.
    pub fn r(&self) -> u32 {
        if self.is_chain {
            self.size() as u32
        } else {
            (self.size() / 2) as u32
        }
    }

    /// Branching number `m / r`: cone or corner order when at least 2.
    pub fn v(&self) -> u32 {
        self.m / self.r()
    }
}

impl DSymbol {
    /// Builds and fully validates a symbol. Chambers are 0-indexed; fixed
    /// points of an involution are entries mapping to their own index.
    pub fn new(
        s0: Vec<usize>,
        s1: Vec<usize>,
        s2: Vec<usize>,
        m01: Vec<u32>,
        m12: Vec<u32>,
    ) -> Result<Self, DsymError> {
        let all = Self::violations(&s0, &s1, &s2, &m01, &m12);
        if let Some(e) = all.into_iter().next() {
            return Err(e);
        }
        Ok(DSymbol { n: s0.len(), s: [s0, s1, s2], m01, m12 })
    }

    /// Collects every violated invariant. Deeper checks are skipped while the
    /// basic shape (lengths, ranges, involutions) is broken.
    pub fn violations(
        s0: &[usize],
        s1: &[usize],
        s2: &[usize],
        m01: &[u32],
        m12: &[u32],
    ) -> Vec<DsymError> {
        let n = s0.len();
        let mut out = Vec::new();
        if n == 0 {
            return vec![DsymError::Empty];
        }
        for len in [s1.len(), s2.len(), m01.len(), m12.len()] {
            if len != n {
                out.push(DsymError::LengthMismatch { expected: n, got: len });
            }
        }
        if !out.is_empty() {
            return out;
        }
        let s = [s0, s1, s2];
        for (gen, si) in s.iter().enumerate() {
            for c in 0..n {
                if si[c] >= n {
                    out.push(DsymError::ChamberOutOfRange { gen, chamber: c });
                } else if si[si[c]] != c {
                    out.push(DsymError::NotInvolution { gen, chamber: c });
                }
            }
        }
        if !out.is_empty() {
            return out;
        }
        // Connectivity under all three involutions.
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(c) = stack.pop() {
            for si in &s {
                let d = si[c];
                if !seen[d] {
                    seen[d] = true;
                    stack.push(d);
                }
            }
        }
        if seen.iter().any(|&b| !b) {
            out.push(DsymError::NotConnected);
        }
        for c in 0..n {
            if s0[s2[s0[s2[c]]]] != c {
                out.push(DsymError::EdgeOrbitBroken { chamber: c });
            }
        }
        for (pair, m) in [((0usize, 1usize), m01), ((1, 2), m12)] {
            for c in 0..n {
                if m[c] == 0 {
                    out.push(DsymError::WeightTooSmall { a: pair.0, b: pair.1, chamber: c });
                }
            }
            if out.iter().any(|e| matches!(e, DsymError::WeightTooSmall { .. })) {
                continue;
            }
            for orb in orbits_of(&s, n, pair.0, pair.1) {
                let least = orb.chambers.iter().copied().min().unwrap();
                let mv = m[least];
                for &c in &orb.chambers {
                    if m[c] != mv {
                        out.push(DsymError::WeightNotConstant { a: pair.0, b: pair.1, chamber: c });
                    }
                }
                let r = orb.r();
                if mv % r != 0 {
                    out.push(DsymError::WeightNotDivisible {
                        a: pair.0,
                        b: pair.1,
                        r,
                        m: mv,
                        chamber: least,
                    });
                }
            }
        }
        out
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Image of a chamber under the involution `s_gen`.
    pub fn s(&self, gen: usize, c: usize) -> usize {
        self.s[gen][c]
    }

    /// Branching weight of the (i,j)-orbit through chamber `c`; the edge pair
    /// (0,2) always carries weight 2.
    pub fn m(&self, i: usize, j: usize, c: usize) -> u32 {
        match (i.min(j), i.max(j)) {
            (0, 1) => self.m01[c],
            (1, 2) => self.m12[c],
            (0, 2) => 2,
            _ => panic!("invalid generator pair ({i},{j})"),
        }
    }

    /// All (i,j)-orbits in order of least chamber.
    pub fn orbits(&self, i: usize, j: usize) -> Vec<Orbit> {
        let s = [&self.s[0][..], &self.s[1][..], &self.s[2][..]];
        let mut orbs = orbits_of(&s, self.n, i, j);
        for o in &mut orbs {
            let least = o.chambers.iter().copied().min().unwrap();
            o.m = self.m(i, j, least);
        }
        orbs
    }

    /// Per-chamber index of its (i,j)-orbit within `orbits(i, j)`.
    pub fn orbit_map(&self, i: usize, j: usize) -> Vec<usize> {
        let mut map = vec![usize::MAX; self.n];
        for (k, orb) in self.orbits(i, j).iter().enumerate() {
            for &c in &orb.chambers {
                map[c] = k;
            }
        }
        map
    }

    /// Applies the chamber relabeling `perm` (old index -> new index).
    pub fn relabel(&self, perm: &[usize]) -> DSymbol {
        let n = self.n;
        let mut s = [vec![0; n], vec![0; n], vec![0; n]];
        let mut m01 = vec![0; n];
        let mut m12 = vec![0; n];
        for c in 0..n {
            for gen in 0..3 {
                s[gen][perm[c]] = perm[self.s[gen][c]];
            }
            m01[perm[c]] = self.m01[c];
            m12[perm[c]] = self.m12[c];
        }
        DSymbol { n, s, m01, m12 }
    }

    /// Breadth-first trace from `start` in fixed generator order, optionally
    /// weaving in edge colours. Returns the trace and old -> new relabeling.
    fn bfs_trace(&self, start: usize, colour: Option<&[Colour]>) -> (Vec<u64>, Vec<usize>) {
        let n = self.n;
        let mut id = vec![usize::MAX; n];
        let mut order = Vec::with_capacity(n);
        let mut trace = Vec::with_capacity(4 * n + 3);
        id[start] = 0;
        order.push(start);
        trace.push(1);
        trace.push(self.m01[start] as u64);
        trace.push(self.m12[start] as u64);
        let mut pos = 0;
        while pos < order.len() {
            let c = order[pos];
            pos += 1;
            for gen in 0..3 {
                let t = self.s[gen][c];
                if id[t] == usize::MAX {
                    id[t] = order.len();
                    order.push(t);
                    trace.push(id[t] as u64 + 1);
                    trace.push(self.m01[t] as u64);
                    trace.push(self.m12[t] as u64);
                } else {
                    trace.push(id[t] as u64 + 1);
                }
                if gen == 2 {
                    if let Some(col) = colour {
                        trace.push(match col[c] {
                            Colour::Black => 0,
                            Colour::Green => 1,
                        });
                    }
                }
            }
        }
        (trace, id)
    }

    fn canonical_trace(&self, colour: Option<&[Colour]>) -> (Vec<u64>, Vec<usize>) {
        let mut best: Option<(Vec<u64>, Vec<usize>)> = None;
        for start in 0..self.n {
            let cand = self.bfs_trace(start, colour);
            match &best {
                Some((t, _)) if *t <= cand.0 => {}
                _ => best = Some(cand),
            }
        }
        best.expect("non-empty symbol")
    }

    /// Canonical relabeling of the symbol together with the certificate
    /// permutation (old index -> new index). Equal outputs characterize
    /// isomorphic symbols.
    pub fn canonical_form(&self) -> (DSymbol, Vec<usize>) {
        let (_, perm) = self.canonical_trace(None);
        (self.relabel(&perm), perm)
    }

    pub fn is_isomorphic(&self, other: &DSymbol) -> bool {
        self.n == other.n && self.canonical_trace(None).0 == other.canonical_trace(None).0
    }

    /// Extracts the orbifold symbol of the symmetry group encoded by the
    /// symbol, from the full chamber complex: cones from interior orbit
    /// cycles with branching at least 2, corners and boundary circuits from
    /// fixed sides, genus from the Euler count and adjacency orientability.
    pub fn to_orbifold(&self) -> OrbifoldSymbol {
        let pc = PartialComplex::full(self);
        let mut cones: Vec<Order> = Vec::new();
        let mut comp_maps: Vec<Vec<usize>> = Vec::new();
        let mut comps_by_vtype: Vec<Vec<VertexComponent>> = Vec::new();
        for vtype in 0..3 {
            let comps = pc.vertex_components(vtype);
            let mut map = vec![usize::MAX; self.n];
            for (k, comp) in comps.iter().enumerate() {
                for &c in &comp.chambers {
                    map[c] = k;
                }
                if comp.closed {
                    let v = comp.cone_order().expect("closed component has integer branching");
                    if v >= 2 {
                        cones.push(Order::Fin(v));
                    }
                }
            }
            comp_maps.push(map);
            comps_by_vtype.push(comps);
        }
        let circles = pc.boundary_circles();
        let mut boundaries: Vec<Vec<Order>> = Vec::new();
        for circle in &circles {
            let mut corners = Vec::new();
            for step in &circle.steps {
                let vtype = step.to_vertex;
                let comp = &comps_by_vtype[vtype][comp_maps[vtype][step.chamber]];
                let v = comp.corner_order().expect("mirror junction has integer corner order");
                if v >= 2 {
                    corners.push(Order::Fin(v));
                }
            }
            boundaries.push(corners);
        }
        let chi = pc.euler_top();
        let b = circles.len() as i64;
        let (handles, crosscaps) = if pc.orientable() {
            let h2 = 2 - b - chi;
            assert!(h2 >= 0 && h2 % 2 == 0, "orientable genus defect must be even");
            ((h2 / 2) as u32, 0)
        } else {
            let k = 2 - b - chi;
            assert!(k >= 1, "non-orientable complex needs a crosscap");
            (0, k as u32)
        };
        OrbifoldSymbol::new(handles, crosscaps, cones, boundaries)
            .expect("valid symbol extracts a well-formed orbifold")
    }

    /// Serializes to the `.cds` text format; `with_orb` appends the host
    /// orbifold line as a comment-check.
    pub fn to_cds(&self, with_orb: bool) -> String {
        let mut out = String::new();
        self.write_cds_core(&mut out);
        if with_orb {
            out.push_str(&format!("orb {}\n", self.to_orbifold()));
        }
        out
    }

    fn write_cds_core(&self, out: &mut String) {
        out.push_str("CDS 1\n");
        out.push_str(&format!("n {}\n", self.n));
        for gen in 0..3 {
            out.push_str(&format!("s{gen}:"));
            for c in 0..self.n {
                out.push_str(&format!(" {}", self.s[gen][c] + 1));
            }
            out.push('\n');
        }
        for (label, i, j) in [("m01", 0, 1), ("m12", 1, 2)] {
            out.push_str(&format!("{label}:"));
            for orb in self.orbits(i, j) {
                out.push_str(&format!(" {}", orb.m));
            }
            out.push('\n');
        }
    }
}

/// Orbit decomposition shared by validation (which cannot assume a finished
/// symbol) and the public accessors.
pub(crate) fn orbits_of(s: &[&[usize]; 3], n: usize, i: usize, j: usize) -> Vec<Orbit> {
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for c0 in 0..n {
        if seen[c0] {
            continue;
        }
        let mut members = vec![c0];
        seen[c0] = true;
        let mut stack = vec![c0];
        while let Some(c) = stack.pop() {
            for gen in [i, j] {
                let d = s[gen][c];
                if !seen[d] {
                    seen[d] = true;
                    members.push(d);
                    stack.push(d);
                }
            }
        }
        let is_chain = members.iter().any(|&c| s[i][c] == c || s[j][c] == c);
        let chambers = if is_chain {
            // Walk from the least end, starting with whichever generator moves it.
            let mut ends: Vec<usize> =
                members.iter().copied().filter(|&c| s[i][c] == c || s[j][c] == c).collect();
            ends.sort_unstable();
            let start = ends[0];
            let first = if s[i][start] == start { j } else { i };
            walk_orbit(s, start, first, i, j, members.len())
        } else {
            let least = members.iter().copied().min().unwrap();
            walk_orbit(s, least, i, j, i, members.len())
        };
        out.push(Orbit { i, j, chambers, is_chain, m: 0 });
    }
    out
}

/// Alternating walk along an orbit: apply `first`, then the other generator,
/// until `len` chambers are listed.
fn walk_orbit(s: &[&[usize]; 3], start: usize, first: usize, i: usize, j: usize, len: usize) -> Vec<usize> {
    let mut chambers = vec![start];
    let mut gen = first;
    let mut cur = start;
    while chambers.len() < len {
        let nxt = s[gen][cur];
        if nxt != cur && !chambers.contains(&nxt) {
            chambers.push(nxt);
            cur = nxt;
        }
        gen = i + j - gen;
    }
    chambers
}

/// A D-symbol with a Black/Green colouring of its tile-edge classes.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ColouredDSymbol {
    sym: DSymbol,
    colour: Vec<Colour>,
}

impl ColouredDSymbol {
    /// Validates constancy on (0,2)-orbits and the presence of a black orbit.
    pub fn new(sym: DSymbol, colour: Vec<Colour>) -> Result<Self, DsymError> {
        if colour.len() != sym.size() {
            return Err(DsymError::ColourLengthMismatch {
                expected: sym.size(),
                got: colour.len(),
            });
        }
        for orb in sym.orbits(0, 2) {
            let c0 = orb.chambers[0];
            for &c in &orb.chambers {
                if colour[c] != colour[c0] {
                    return Err(DsymError::ColourNotConstant { chamber: c });
                }
            }
        }
        if colour.iter().all(|&c| c == Colour::Green) {
            return Err(DsymError::NoBlackOrbit);
        }
        Ok(ColouredDSymbol { sym, colour })
    }

    pub fn all_black(sym: DSymbol) -> ColouredDSymbol {
        let n = sym.size();
        ColouredDSymbol { sym, colour: vec![Colour::Black; n] }
    }

    pub fn symbol(&self) -> &DSymbol {
        &self.sym
    }

    pub fn colours(&self) -> &[Colour] {
        &self.colour
    }

    pub fn colour(&self, c: usize) -> Colour {
        self.colour[c]
    }

    pub fn relabel(&self, perm: &[usize]) -> ColouredDSymbol {
        let sym = self.sym.relabel(perm);
        let mut colour = vec![Colour::Black; self.colour.len()];
        for (c, &col) in self.colour.iter().enumerate() {
            colour[perm[c]] = col;
        }
        ColouredDSymbol { sym, colour }
    }

    /// Canonical relabeling with certificate; colours enter the trace, so
    /// equal outputs characterize colour-preserving isomorphism.
    pub fn canonical_form(&self) -> (ColouredDSymbol, Vec<usize>) {
        let (_, perm) = self.sym.canonical_trace(Some(&self.colour));
        (self.relabel(&perm), perm)
    }

    pub fn is_isomorphic(&self, other: &ColouredDSymbol) -> bool {
        self.sym.size() == other.sym.size()
            && self.sym.canonical_trace(Some(&self.colour)).0
                == other.sym.canonical_trace(Some(&other.colour)).0
    }

    pub fn to_cds(&self, with_orb: bool) -> String {
        let mut out = String::new();
        self.sym.write_cds_core(&mut out);
        out.push_str("col:");
        for orb in self.sym.orbits(0, 2) {
            let c = orb.chambers.iter().copied().min().unwrap();
            out.push_str(match self.colour[c] {
                Colour::Black => " B",
                Colour::Green => " G",
            });
        }
        out.push('\n');
        if with_orb {
            out.push_str(&format!("orb {}\n", self.sym.to_orbifold()));
        }
        out
    }
}

/// A parsed `.cds` document: coloured when a `col:` line was present.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CdsDocument {
    Plain(DSymbol),
    Coloured(ColouredDSymbol),
}

impl CdsDocument {
    pub fn symbol(&self) -> &DSymbol {
        match self {
            CdsDocument::Plain(d) => d,
            CdsDocument::Coloured(c) => c.symbol(),
        }
    }

    /// View as a coloured symbol, reading a plain document as all-black.
    pub fn into_coloured(self) -> ColouredDSymbol {
        match self {
            CdsDocument::Plain(d) => ColouredDSymbol::all_black(d),
            CdsDocument::Coloured(c) => c,
        }
    }
}

/// Parses the `.cds` text format, verifying the optional trailing `orb` line
/// against the symbol's own orbifold extraction.
pub fn read_cds(input: &str) -> Result<CdsDocument, DsymError> {
    let mut lines = input.lines().enumerate();
    let mut next_line = |expect: &str| -> Result<(usize, String), DsymError> {
        match lines.next() {
            Some((k, l)) => Ok((k + 1, l.to_string())),
            None => Err(cds_err(0, format!("missing {expect} line"))),
        }
    };
    let (k, header) = next_line("header")?;
    if header != "CDS 1" {
        return Err(cds_err(k, "expected header `CDS 1`"));
    }
    let (k, nline) = next_line("n")?;
    let n: usize = nline
        .strip_prefix("n ")
        .ok_or_else(|| cds_err(k, "expected `n <count>`"))?
        .parse()
        .map_err(|_| cds_err(k, "bad chamber count"))?;
    if n == 0 {
        return Err(cds_err(k, "chamber count must be positive"));
    }
    let mut s: Vec<Vec<usize>> = Vec::new();
    for gen in 0..3 {
        let (k, line) = next_line("adjacency")?;
        let body = line
            .strip_prefix(&format!("s{gen}:"))
            .ok_or_else(|| cds_err(k, format!("expected `s{gen}:` line")))?;
        let vals = parse_numbers::<usize>(body, k)?;
        if vals.len() != n {
            return Err(cds_err(k, format!("expected {n} images, got {}", vals.len())));
        }
        if vals.iter().any(|&v| v < 1 || v > n) {
            return Err(cds_err(k, "chamber image out of range"));
        }
        s.push(vals.into_iter().map(|v| v - 1).collect());
    }
    let mut weights: Vec<Vec<u32>> = Vec::new();
    for (label, i, j) in [("m01", 0usize, 1usize), ("m12", 1, 2)] {
        let (k, line) = next_line(label)?;
        let body = line
            .strip_prefix(&format!("{label}:"))
            .ok_or_else(|| cds_err(k, format!("expected `{label}:` line")))?;
        let vals = parse_numbers::<u32>(body, k)?;
        let sv = [&s[0][..], &s[1][..], &s[2][..]];
        let orbs = orbits_of(&sv, n, i, j);
        if vals.len() != orbs.len() {
            return Err(cds_err(k, format!("expected {} weights, got {}", orbs.len(), vals.len())));
        }
        let mut per_chamber = vec![0u32; n];
        for (orb, m) in orbs.iter().zip(&vals) {
            for &c in &orb.chambers {
                per_chamber[c] = *m;
            }
        }
        weights.push(per_chamber);
    }
    let sym = DSymbol::new(
        s[0].clone(),
        s[1].clone(),
        s[2].clone(),
        weights[0].clone(),
        weights[1].clone(),
    )?;
    let mut colours: Option<Vec<Colour>> = None;
    let mut orb_check: Option<(usize, String)> = None;
    for (k0, line) in lines {
        let k = k0 + 1;
        if line.is_empty() {
            continue;
        }
        if let Some(body) = line.strip_prefix("col:") {
            if colours.is_some() {
                return Err(cds_err(k, "duplicate col line"));
            }
            let orbs = sym.orbits(0, 2);
            let entries: Vec<&str> = body.split(' ').filter(|t| !t.is_empty()).collect();
            if entries.len() != orbs.len() {
                return Err(cds_err(
                    k,
                    format!("expected {} colours, got {}", orbs.len(), entries.len()),
                ));
            }
            let mut per_chamber = vec![Colour::Black; n];
            for (orb, tok) in orbs.iter().zip(&entries) {
                let col = match *tok {
                    "B" => Colour::Black,
                    "G" => Colour::Green,
                    other => return Err(cds_err(k, format!("bad colour `{other}`"))),
                };
                for &c in &orb.chambers {
                    per_chamber[c] = col;
                }
            }
            colours = Some(per_chamber);
        } else if let Some(body) = line.strip_prefix("orb ") {
            if orb_check.is_some() {
                return Err(cds_err(k, "duplicate orb line"));
            }
            orb_check = Some((k, body.to_string()));
        } else {
            return Err(cds_err(k, format!("unexpected line `{line}`")));
        }
    }
    if let Some((k, text)) = orb_check {
        let claimed: OrbifoldSymbol =
            text.parse().map_err(|e| cds_err(k, format!("bad orbifold symbol: {e}")))?;
        let actual = sym.to_orbifold();
        if claimed != actual {
            return Err(cds_err(k, format!("orb line says {claimed}, symbol encodes {actual}")));
        }
    }
    match colours {
        Some(col) => Ok(CdsDocument::Coloured(ColouredDSymbol::new(sym, col)?)),
        None => Ok(CdsDocument::Plain(sym)),
    }
}

fn parse_numbers<T: std::str::FromStr>(body: &str, line: usize) -> Result<Vec<T>, DsymError> {
    body.split(' ')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<T>().map_err(|_| cds_err(line, format!("bad number `{t}`"))))
        .collect()
}

/// Status of one chamber side within a partial complex.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SideStatus {
    /// Identified with the matching side of the partner chamber.
    Glued,
    /// Lies on a mirror of the acting group.
    Mirror,
    /// Raw boundary: a tile-edge arc not identified with anything.
    Free,
}

/// A sub-complex of chamber triangles with a status on every side, supporting
/// Euler characteristics (topological and orbifold-weighted), orientability
/// and boundary circuit extraction.
pub struct PartialComplex<'a> {
    sym: &'a DSymbol,
    chambers: Vec<usize>,
    pos: Vec<usize>,
    status: Vec<[SideStatus; 3]>,
}

/// A connected piece of one vertex class of a partial complex: the chambers
/// around one surface vertex, glued side to side.
#[derive(Clone, Debug)]
pub struct VertexComponent {
    /// Vertex kind: the chamber corner opposite side `vtype`.
    pub vtype: usize,
    pub chambers: Vec<usize>,
    /// True when the fan closes up into a cycle (an interior point).
    pub closed: bool,
    /// End side statuses for open fans, in walk order.
    pub ends: Option<(SideStatus, SideStatus)>,
    /// Branching weight of the ambient orbit.
    pub m: u32,
}

impl VertexComponent {
    pub fn size(&self) -> usize {
        self.chambers.len()
    }

    /// Contribution to the orbifold-weighted Euler characteristic.
    pub fn weight(&self) -> Rational64 {
        let size = self.size() as i64;
        let m = self.m as i64;
        if self.closed {
            return Rational64::new(size, 2 * m);
        }
        match self.ends.expect("open component has ends") {
            (SideStatus::Mirror, SideStatus::Mirror) => Rational64::new(size, 2 * m),
            (SideStatus::Free, SideStatus::Free) => Rational64::from_integer(1),
            _ => Rational64::new(1, 2),
        }
    }

    /// Cone order of a closed component, when integral.
    pub fn cone_order(&self) -> Option<u32> {
        if !self.closed {
            return None;
        }
        let half = (self.size() / 2) as u32;
        (self.m % half == 0).then(|| self.m / half)
    }

    /// Corner order of a mirror-mirror fan, when integral.
    pub fn corner_order(&self) -> Option<u32> {
        if self.closed || self.ends != Some((SideStatus::Mirror, SideStatus::Mirror)) {
            return None;
        }
        let size = self.size() as u32;
        (self.m % size == 0).then(|| self.m / size)
    }
}

/// One directed edge of a boundary circuit: side `side` of `chamber`,
/// traversed towards its corner opposite side `to_vertex`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CircleStep {
    pub chamber: usize,
    pub side: usize,
    pub to_vertex: usize,
}

/// A boundary circuit of a partial complex, as a cyclic list of steps.
#[derive(Clone, Debug)]
pub struct BoundaryCircle {
    pub steps: Vec<CircleStep>,
}

impl BoundaryCircle {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

impl<'a> PartialComplex<'a> {
    /// The full complex of a symbol: every chamber, fixed sides as mirrors.
    pub fn full(sym: &'a DSymbol) -> PartialComplex<'a> {
        let chambers: Vec<usize> = (0..sym.size()).collect();
        PartialComplex::new(sym, &chambers, |c, side| {
            if sym.s(side, c) == c {
                SideStatus::Mirror
            } else {
                SideStatus::Glued
            }
        })
        .expect("full complex of a valid symbol")
    }

    /// Builds a complex over `chambers` with per-side statuses. Glued sides
    /// must pair distinct included chambers symmetrically, and the complex
    /// must be connected through glued sides.
    pub fn new(
        sym: &'a DSymbol,
        chambers: &[usize],
        status_fn: impl Fn(usize, usize) -> SideStatus,
    ) -> Result<PartialComplex<'a>, DsymError> {
        let n = sym.size();
        if chambers.is_empty() || chambers.iter().any(|&c| c >= n) {
            return Err(DsymError::BadChamberSet);
        }
        let mut sorted: Vec<usize> = chambers.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != chambers.len() {
            return Err(DsymError::BadChamberSet);
        }
        let mut pos = vec![usize::MAX; n];
        for (k, &c) in sorted.iter().enumerate() {
            pos[c] = k;
        }
        let mut status = vec![[SideStatus::Free; 3]; sorted.len()];
        for (k, &c) in sorted.iter().enumerate() {
            for side in 0..3 {
                status[k][side] = status_fn(c, side);
            }
        }
        let pc = PartialComplex { sym, chambers: sorted, pos, status };
        for &c in &pc.chambers {
            for side in 0..3 {
                if pc.status(c, side) == SideStatus::Glued {
                    let d = sym.s(side, c);
                    if d == c || !pc.contains(d) || pc.status(d, side) != SideStatus::Glued {
                        return Err(DsymError::GluedPartnerMissing { chamber: c, side });
                    }
                }
            }
        }
        // Connected through glued sides, so orientation and circuit walks are
        // globally coherent.
        let mut seen = vec![false; pc.chambers.len()];
        let mut stack = vec![pc.chambers[0]];
        seen[0] = true;
        while let Some(c) = stack.pop() {
            for side in 0..3 {
                if pc.status(c, side) == SideStatus::Glued {
                    let d = sym.s(side, c);
                    if !seen[pc.pos[d]] {
                        seen[pc.pos[d]] = true;
                        stack.push(d);
                    }
                }
            }
        }
        if seen.iter().any(|&b| !b) {
            return Err(DsymError::ComplexNotConnected);
        }
        Ok(pc)
    }

    pub fn sym(&self) -> &DSymbol {
        self.sym
    }

    pub fn chambers(&self) -> &[usize] {
        &self.chambers
    }

    pub fn contains(&self, c: usize) -> bool {
        c < self.pos.len() && self.pos[c] != usize::MAX
    }

    pub fn status(&self, c: usize, side: usize) -> SideStatus {
        self.status[self.pos[c]][side]
    }

    fn edge_counts(&self) -> (i64, i64, i64) {
        let (mut glued2, mut mirror, mut free) = (0i64, 0i64, 0i64);
        for &c in &self.chambers {
            for side in 0..3 {
                match self.status(c, side) {
                    SideStatus::Glued => glued2 += 1,
                    SideStatus::Mirror => mirror += 1,
                    SideStatus::Free => free += 1,
                }
            }
        }
        (glued2 / 2, mirror, free)
    }

    /// Vertex components of one vertex kind, ordered by least chamber.
    pub fn vertex_components(&self, vtype: usize) -> Vec<VertexComponent> {
        let (gi, gj) = match vtype {
            0 => (1, 2),
            1 => (0, 2),
            2 => (0, 1),
            _ => panic!("invalid vertex kind {vtype}"),
        };
        let mut seen = vec![false; self.chambers.len()];
        let mut out = Vec::new();
        for &c0 in &self.chambers {
            if seen[self.pos[c0]] {
                continue;
            }
            let mut members = vec![c0];
            seen[self.pos[c0]] = true;
            let mut stack = vec![c0];
            while let Some(c) = stack.pop() {
                for gen in [gi, gj] {
                    if self.status(c, gen) == SideStatus::Glued {
                        let d = self.sym.s(gen, c);
                        if !seen[self.pos[d]] {
                            seen[self.pos[d]] = true;
                            members.push(d);
                            stack.push(d);
                        }
                    }
                }
            }
            // An end of the fan is a chamber whose fan-side is not glued.
            let end_of = |c: usize| -> Vec<usize> {
                [gi, gj]
                    .into_iter()
                    .filter(|&g| self.status(c, g) != SideStatus::Glued)
                    .collect()
            };
            let mut ends: Vec<(usize, usize)> = Vec::new();
            for &c in &members {
                for g in end_of(c) {
                    ends.push((c, g));
                }
            }
            let m = self.sym.m(gi, gj, c0);
            if ends.is_empty() {
                // Closed fan: walk the cycle in alternating order.
                let s = [&self.sym.s[0][..], &self.sym.s[1][..], &self.sym.s[2][..]];
                let least = members.iter().copied().min().unwrap();
                let chambers = walk_orbit(&s, least, gi, gi, gj, members.len());
                out.push(VertexComponent { vtype, chambers, closed: true, ends: None, m });
            } else {
                ends.sort_unstable();
                let (start, open_gen) = ends[0];
                let first = gi + gj - open_gen;
                let mut chambers = vec![start];
                let mut cur = start;
                let mut gen = first;
                while chambers.len() < members.len() {
                    let nxt = self.sym.s(gen, cur);
                    if self.status(cur, gen) == SideStatus::Glued && nxt != cur {
                        chambers.push(nxt);
                        cur = nxt;
                    }
                    gen = gi + gj - gen;
                }
                // `gen` now names the side closing the far end of the walk.
                let last = *chambers.last().unwrap();
                let far = if self.status(last, gen) != SideStatus::Glued { gen } else { gi + gj - gen };
                let ends = Some((self.status(start, open_gen), self.status(last, far)));
                out.push(VertexComponent { vtype, chambers, closed: false, ends, m });
            }
        }
        out
    }

    /// Euler characteristic of the underlying surface (every cell weight 1).
    pub fn euler_top(&self) -> i64 {
        let (glued, mirror, free) = self.edge_counts();
        let f = self.chambers.len() as i64;
        let v: i64 = (0..3).map(|k| self.vertex_components(k).len() as i64).sum();
        v - (glued + mirror + free) + f
    }

    /// Orbifold-weighted Euler characteristic: mirrors count half, interior
    /// points divide by their branching.
    pub fn euler_orb(&self) -> Rational64 {
        let (glued, mirror, free) = self.edge_counts();
        let f = Rational64::from_integer(self.chambers.len() as i64);
        let e = Rational64::from_integer(glued + free) + Rational64::new(mirror, 2);
        let mut v = Rational64::from_integer(0);
        for k in 0..3 {
            for comp in self.vertex_components(k) {
                v += comp.weight();
            }
        }
        v - e + f
    }

    /// Chamber orientation signs across glued sides, when consistent.
    pub fn epsilon(&self) -> Option<Vec<i8>> {
        let mut eps = vec![0i8; self.chambers.len()];
        eps[0] = 1;
        let mut stack = vec![self.chambers[0]];
        while let Some(c) = stack.pop() {
            for side in 0..3 {
                if self.status(c, side) != SideStatus::Glued {
                    continue;
                }
                let d = self.sym.s(side, c);
                let want = -eps[self.pos[c]];
                let slot = &mut eps[self.pos[d]];
                if *slot == 0 {
                    *slot = want;
                    stack.push(d);
                } else if *slot != want {
                    return None;
                }
            }
        }
        Some(eps)
    }

    pub fn orientable(&self) -> bool {
        self.epsilon().is_some()
    }

    /// Decomposes the boundary into circuits. On orientable complexes the
    /// circuits are coherently oriented by the chamber signs; otherwise each
    /// circuit is reported once in an arbitrary direction.
    pub fn boundary_circles(&self) -> Vec<BoundaryCircle> {
        let eps = self.epsilon();
        let positive = |c: usize, side: usize, vtx: usize| -> bool {
            match &eps {
                Some(e) => {
                    let want = if e[self.pos[c]] == 1 { (side + 2) % 3 } else { (side + 1) % 3 };
                    vtx == want
                }
                None => true,
            }
        };
        let mut states: Vec<CircleStep> = Vec::new();
        for &c in &self.chambers {
            for side in 0..3 {
                if self.status(c, side) == SideStatus::Glued {
                    continue;
                }
                for vtx in 0..3 {
                    if vtx != side && positive(c, side, vtx) {
                        states.push(CircleStep { chamber: c, side, to_vertex: vtx });
                    }
                }
            }
        }
        let mut visited: Vec<CircleStep> = Vec::new();
        let mut out = Vec::new();
        for &s0 in &states {
            if visited.contains(&s0) {
                continue;
            }
            let mut steps = vec![s0];
            visited.push(s0);
            loop {
                let cur = *steps.last().unwrap();
                let nxt = self.next_boundary(cur);
                if nxt == s0 {
                    break;
                }
                steps.push(nxt);
                visited.push(nxt);
            }
            if eps.is_none() {
                // Retire the reversed circuit so each circle is reported once.
                for st in &steps {
                    visited.push(CircleStep {
                        chamber: st.chamber,
                        side: st.side,
                        to_vertex: 3 - st.side - st.to_vertex,
                    });
                }
            }
            out.push(BoundaryCircle { steps });
        }
        out
    }

    /// Follows a boundary step through the glued fan around its exit corner
    /// to the next boundary side.
    fn next_boundary(&self, step: CircleStep) -> CircleStep {
        let vtx = step.to_vertex;
        let mut cur = step.chamber;
        let mut inside = step.side;
        for _ in 0..2 * self.sym.size() + 2 {
            let s = 3 - inside - vtx;
            if self.status(cur, s) != SideStatus::Glued {
                return CircleStep { chamber: cur, side: s, to_vertex: 3 - s - vtx };
            }
            cur = self.sym.s(s, cur);
            inside = s;
        }
        unreachable!("boundary fan walk failed to terminate");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbifold::Geometry;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sym(
        s0: Vec<usize>,
        s1: Vec<usize>,
        s2: Vec<usize>,
        m01: Vec<u32>,
        m12: Vec<u32>,
    ) -> DSymbol {
        DSymbol::new(s0, s1, s2, m01, m12).expect("valid test symbol")
    }

    fn one_chamber(m01: u32, m12: u32) -> DSymbol {
        sym(vec![0], vec![0], vec![0], vec![m01], vec![m12])
    }

    /// Square fundamental domain of the plane translation group: chambers
    /// 0..8 around the tile centre, opposite edges identified.
    fn torus_symbol() -> DSymbol {
        sym(
            vec![1, 0, 3, 2, 5, 4, 7, 6],
            vec![7, 2, 1, 4, 3, 6, 5, 0],
            vec![5, 4, 7, 6, 1, 0, 3, 2],
            vec![4; 8],
            vec![4; 8],
        )
    }

    /// Same square with every edge folded onto itself by a half turn.
    fn pillow_symbol() -> DSymbol {
        sym(
            vec![1, 0, 3, 2, 5, 4, 7, 6],
            vec![7, 2, 1, 4, 3, 6, 5, 0],
            vec![1, 0, 3, 2, 5, 4, 7, 6],
            vec![4; 8],
            vec![4; 8],
        )
    }

    /// Square domain with one straight and one glide identification.
    fn glide_symbol() -> DSymbol {
        sym(
            vec![1, 0, 3, 2, 5, 4, 7, 6],
            vec![7, 2, 1, 4, 3, 6, 5, 0],
            vec![4, 5, 7, 6, 0, 1, 3, 2],
            vec![4; 8],
            vec![4; 8],
        )
    }

    /// Square domain of the group *2222: tile edges on mirrors.
    fn quad_mirror_symbol() -> DSymbol {
        sym(
            vec![1, 0, 3, 2, 5, 4, 7, 6],
            vec![7, 2, 1, 4, 3, 6, 5, 0],
            vec![0, 1, 2, 3, 4, 5, 6, 7],
            vec![4; 8],
            vec![4; 8],
        )
    }

    #[test]
    fn minimal_mirror_symbols() {
        assert_eq!(one_chamber(4, 4).to_orbifold().ascii(), "*244");
        assert_eq!(one_chamber(6, 3).to_orbifold().ascii(), "*236");
        let d = one_chamber(4, 5);
        assert_eq!(d.to_orbifold().ascii(), "*245");
        assert_eq!(d.to_orbifold().geometry().unwrap(), Geometry::Hyperbolic);
    }

    #[test]
    fn kite_symbol_gives_star244() {
        let d = sym(vec![1, 0], vec![0, 1], vec![0, 1], vec![8, 8], vec![4, 2]);
        assert_eq!(d.to_orbifold().ascii(), "*244");
    }

    #[test]
    fn square_domain_symbols() {
        assert_eq!(torus_symbol().to_orbifold().ascii(), "o");
        assert_eq!(pillow_symbol().to_orbifold().ascii(), "2222");
        assert_eq!(glide_symbol().to_orbifold().ascii(), "xx");
        assert_eq!(quad_mirror_symbol().to_orbifold().ascii(), "*2222");
    }

    #[test]
    fn orbit_shapes() {
        let d = torus_symbol();
        let tiles = d.orbits(0, 1);
        assert_eq!(tiles.len(), 1);
        assert!(!tiles[0].is_chain);
        assert_eq!(tiles[0].r(), 4);
        assert_eq!(tiles[0].v(), 1);
        let edges = d.orbits(0, 2);
        assert_eq!(edges.len(), 2);
        assert_eq!(edges[0].chambers.len(), 4);

        let p = pillow_symbol();
        let folds = p.orbits(0, 2);
        assert_eq!(folds.len(), 4);
        assert!(folds.iter().all(|o| !o.is_chain && o.size() == 2 && o.v() == 2));
    }

    #[test]
    fn construction_errors() {
        // Not an involution.
        assert!(matches!(
            DSymbol::new(vec![1, 2, 0], vec![0, 1, 2], vec![0, 1, 2], vec![1; 3], vec![1; 3]),
            Err(DsymError::NotInvolution { gen: 0, .. })
        ));
        // Length mismatch.
        assert!(matches!(
            DSymbol::new(vec![0, 1], vec![0], vec![0, 1], vec![1, 1], vec![1, 1]),
            Err(DsymError::LengthMismatch { .. })
        ));
        // Disconnected.
        assert!(matches!(
            DSymbol::new(vec![0, 1], vec![0, 1], vec![0, 1], vec![1, 1], vec![1, 1]),
            Err(DsymError::NotConnected)
        ));
        // (s0 s2)^2 != id.
        assert!(matches!(
            DSymbol::new(
                vec![1, 0, 2, 3],
                vec![3, 1, 2, 0],
                vec![0, 2, 1, 3],
                vec![4; 4],
                vec![4; 4]
            ),
            Err(DsymError::EdgeOrbitBroken { .. })
        ));
        // Weight not constant on an orbit.
        let mut m01 = vec![4; 8];
        m01[7] = 5;
        assert!(matches!(
            DSymbol::new(
                vec![1, 0, 3, 2, 5, 4, 7, 6],
                vec![7, 2, 1, 4, 3, 6, 5, 0],
                vec![5, 4, 7, 6, 1, 0, 3, 2],
                m01,
                vec![4; 8]
            ),
            Err(DsymError::WeightNotConstant { a: 0, b: 1, .. })
        ));
        // Rotation order fails to divide the weight.
        assert!(matches!(
            DSymbol::new(
                vec![1, 0, 3, 2, 5, 4, 7, 6],
                vec![7, 2, 1, 4, 3, 6, 5, 0],
                vec![1, 0, 3, 2, 5, 4, 7, 6],
                vec![6; 8],
                vec![4; 8]
            ),
            Err(DsymError::WeightNotDivisible { a: 0, b: 1, r: 4, m: 6, .. })
        ));
    }

    #[test]
    fn full_complex_counts() {
        let d = one_chamber(4, 4);
        let pc = PartialComplex::full(&d);
        assert_eq!(pc.euler_top(), 1);
        assert!(pc.orientable());
        let circles = pc.boundary_circles();
        assert_eq!(circles.len(), 1);
        assert_eq!(circles[0].len(), 3);

        let t = torus_symbol();
        let pc = PartialComplex::full(&t);
        assert_eq!(pc.euler_top(), 0);
        assert!(pc.orientable());
        assert!(pc.boundary_circles().is_empty());
        assert_eq!(pc.euler_orb(), Rational64::from_integer(0));

        let g = glide_symbol();
        let pc = PartialComplex::full(&g);
        assert!(!pc.orientable());
        assert_eq!(pc.euler_top(), 0);
    }

    #[test]
    fn weighted_chi_of_tile_complexes() {
        // One tile of the *2222 domain tiling, tile edges left free: a disk,
        // so the trivial stabiliser sees weighted chi 1.
        let q = quad_mirror_symbol();
        let tile = PartialComplex::new(&q, &(0..8).collect::<Vec<_>>(), |_, side| {
            if side == 2 {
                SideStatus::Free
            } else {
                SideStatus::Glued
            }
        })
        .unwrap();
        assert_eq!(tile.euler_orb(), Rational64::from_integer(1));
        assert_eq!(tile.euler_top(), 1);

        // Torus tile with one edge orbit glued shut and the other left free:
        // the infinite strip, weighted chi 0.
        let t = torus_symbol();
        let erased = [0usize, 1, 4, 5];
        let strip = PartialComplex::new(&t, &(0..8).collect::<Vec<_>>(), |c, side| {
            if side == 2 {
                if erased.contains(&c) {
                    SideStatus::Glued
                } else {
                    SideStatus::Free
                }
            } else {
                SideStatus::Glued
            }
        })
        .unwrap();
        assert_eq!(strip.euler_orb(), Rational64::from_integer(0));
    }

    #[test]
    fn vertex_component_taxonomy() {
        let t = torus_symbol();
        let pc = PartialComplex::full(&t);
        let centres = pc.vertex_components(2);
        assert_eq!(centres.len(), 1);
        assert!(centres[0].closed);
        assert_eq!(centres[0].cone_order(), Some(1));
        let verts = pc.vertex_components(0);
        assert_eq!(verts.len(), 1);
        assert_eq!(verts[0].size(), 8);

        let q = quad_mirror_symbol();
        let pc = PartialComplex::full(&q);
        let corners = pc.vertex_components(0);
        assert_eq!(corners.len(), 4);
        for comp in &corners {
            assert_eq!(comp.ends, Some((SideStatus::Mirror, SideStatus::Mirror)));
            assert_eq!(comp.corner_order(), Some(2));
            assert_eq!(comp.weight(), Rational64::new(1, 4));
        }
    }

    #[test]
    fn cds_golden_roundtrip() {
        let d = one_chamber(4, 4);
        let text = d.to_cds(true);
        assert_eq!(text, "CDS 1\nn 1\ns0: 1\ns1: 1\ns2: 1\nm01: 4\nm12: 4\norb *244\n");
        let doc = read_cds(&text).unwrap();
        assert_eq!(doc.symbol(), &d);
        match &doc {
            CdsDocument::Plain(p) => assert_eq!(p.to_cds(true), text),
            _ => panic!("expected plain document"),
        }

        let t = torus_symbol();
        let col = ColouredDSymbol::new(
            t.clone(),
            vec![
                Colour::Black,
                Colour::Black,
                Colour::Green,
                Colour::Green,
                Colour::Black,
                Colour::Black,
                Colour::Green,
                Colour::Green,
            ],
        )
        .unwrap();
        let text = col.to_cds(false);
        assert_eq!(
            text,
            "CDS 1\nn 8\n\
             s0: 2 1 4 3 6 5 8 7\n\
             s1: 8 3 2 5 4 7 6 1\n\
             s2: 6 5 8 7 2 1 4 3\n\
             m01: 4\nm12: 4\ncol: B G\n"
        );
        let doc = read_cds(&text).unwrap();
        match doc {
            CdsDocument::Coloured(c) => {
                assert_eq!(c, col);
                assert_eq!(c.to_cds(false), text);
            }
            _ => panic!("expected coloured document"),
        }
    }

    #[test]
    fn cds_rejects_corrupt_input() {
        assert!(matches!(read_cds(""), Err(DsymError::Cds { .. })));
        assert!(read_cds("CDS 1\nn 1\ns0: 1\ns1: 1\ns2: 1\nm01: 4\n").is_err());
        // Orbifold comment-check mismatch.
        let bad = "CDS 1\nn 1\ns0: 1\ns1: 1\ns2: 1\nm01: 4\nm12: 4\norb *236\n";
        assert!(matches!(read_cds(bad), Err(DsymError::Cds { .. })));
        // Image out of range.
        assert!(read_cds("CDS 1\nn 1\ns0: 2\ns1: 1\ns2: 1\nm01: 4\nm12: 4\n").is_err());
    }

    #[test]
    fn colour_validation() {
        let t = torus_symbol();
        // Colour varies inside the edge orbit {0,1,4,5}.
        let mixed = vec![
            Colour::Black,
            Colour::Green,
            Colour::Black,
            Colour::Black,
            Colour::Black,
            Colour::Black,
            Colour::Black,
            Colour::Black,
        ];
        assert!(matches!(
            ColouredDSymbol::new(t.clone(), mixed),
            Err(DsymError::ColourNotConstant { .. })
        ));
        assert!(matches!(
            ColouredDSymbol::new(t.clone(), vec![Colour::Green; 8]),
            Err(DsymError::NoBlackOrbit)
        ));
        assert!(ColouredDSymbol::new(t, vec![Colour::Black; 8]).is_ok());
    }

    /// Path-shaped symbol whose two edge orbits sit in asymmetric
    /// surroundings, so swapping their colours changes the isomorphism type.
    fn asymmetric_two_edge_symbol() -> DSymbol {
        sym(vec![1, 0, 3, 2], vec![0, 2, 1, 3], vec![0, 1, 2, 3], vec![4; 4], vec![3, 2, 2, 5])
    }

    #[test]
    fn colours_enter_canonical_form() {
        let d = asymmetric_two_edge_symbol();
        let bg = ColouredDSymbol::new(
            d.clone(),
            vec![Colour::Black, Colour::Black, Colour::Green, Colour::Green],
        )
        .unwrap();
        let gb = ColouredDSymbol::new(
            d.clone(),
            vec![Colour::Green, Colour::Green, Colour::Black, Colour::Black],
        )
        .unwrap();
        assert!(!bg.is_isomorphic(&gb));
        assert!(bg.is_isomorphic(&bg.clone()));
        let (canon, perm) = bg.canonical_form();
        assert_eq!(bg.relabel(&perm), canon);
        // Idempotence.
        assert_eq!(canon.canonical_form().0, canon);
    }

    // Random valid symbols: edge orbits are assembled from legal (0,2)
    // patterns, then a random sigma1 is thrown on top until connected.
    fn rand_symbol(rng: &mut ChaCha8Rng, max_n: usize) -> DSymbol {
        loop {
            let n = rng.gen_range(1..=max_n);
            let mut s0: Vec<usize> = (0..n).collect();
            let mut s2: Vec<usize> = (0..n).collect();
            let mut pool: Vec<usize> = (0..n).collect();
            pool.shuffle(rng);
            while !pool.is_empty() {
                if pool.len() >= 4 && rng.gen_bool(0.4) {
                    let (a, b, c, d) =
                        (pool.pop().unwrap(), pool.pop().unwrap(), pool.pop().unwrap(), pool.pop().unwrap());
                    s0[a] = b;
                    s0[b] = a;
                    s0[c] = d;
                    s0[d] = c;
                    s2[a] = c;
                    s2[c] = a;
                    s2[b] = d;
                    s2[d] = b;
                } else if pool.len() >= 2 && rng.gen_bool(0.7) {
                    let (a, b) = (pool.pop().unwrap(), pool.pop().unwrap());
                    match rng.gen_range(0..3) {
                        0 => {
                            // Fold: both involutions swap the pair.
                            s0[a] = b;
                            s0[b] = a;
                            s2[a] = b;
                            s2[b] = a;
                        }
                        1 => {
                            s0[a] = b;
                            s0[b] = a;
                        }
                        _ => {
                            s2[a] = b;
                            s2[b] = a;
                        }
                    }
                } else {
                    pool.pop();
                }
            }
            let mut s1: Vec<usize> = (0..n).collect();
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(rng);
            let mut it = order.into_iter();
            while let Some(a) = it.next() {
                if s1[a] == a && rng.gen_bool(0.8) {
                    if let Some(b) = it.next() {
                        s1[a] = b;
                        s1[b] = a;
                    }
                }
            }
            // Weights: a random multiple of each orbit's rotation order.
            let sv = [&s0[..], &s1[..], &s2[..]];
            let mut m01 = vec![0u32; n];
            for orb in orbits_of(&sv, n, 0, 1) {
                let m = orb.r() * rng.gen_range(1..=4);
                for &c in &orb.chambers {
                    m01[c] = m;
                }
            }
            let mut m12 = vec![0u32; n];
            for orb in orbits_of(&sv, n, 1, 2) {
                let m = orb.r() * rng.gen_range(1..=4);
                for &c in &orb.chambers {
                    m12[c] = m;
                }
            }
            match DSymbol::new(s0, s1, s2, m01, m12) {
                Ok(d) => return d,
                Err(DsymError::NotConnected) => continue,
                Err(e) => panic!("random symbol generator produced invalid symbol: {e}"),
            }
        }
    }

    fn rand_colours(rng: &mut ChaCha8Rng, d: &DSymbol) -> Vec<Colour> {
        loop {
            let mut col = vec![Colour::Black; d.size()];
            let mut any_black = false;
            for orb in d.orbits(0, 2) {
                let c = if rng.gen_bool(0.5) { Colour::Black } else { Colour::Green };
                any_black |= c == Colour::Black;
                for &ch in &orb.chambers {
                    col[ch] = c;
                }
            }
            if any_black {
                return col;
            }
        }
    }

    fn rand_perm(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
        let mut p: Vec<usize> = (0..n).collect();
        p.shuffle(rng);
        p
    }

    #[test]
    fn canonical_form_relabeling_fuzz() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xCA11AB1E);
        for _ in 0..1000 {
            let d = rand_symbol(&mut rng, 24);
            let perm = rand_perm(&mut rng, d.size());
            let shuffled = d.relabel(&perm);
            let (canon_a, cert_a) = d.canonical_form();
            let (canon_b, _) = shuffled.canonical_form();
            assert_eq!(canon_a, canon_b);
            assert_eq!(d.relabel(&cert_a), canon_a);
            assert_eq!(canon_a.canonical_form().0, canon_a);

            let col = rand_colours(&mut rng, &d);
            let cd = ColouredDSymbol::new(d, col).unwrap();
            let (ccanon, _) = cd.canonical_form();
            assert_eq!(cd.relabel(&perm).canonical_form().0, ccanon);
        }
    }

    #[test]
    fn orbifold_extraction_is_relabeling_invariant_and_chi_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x06B1F01D);
        for _ in 0..1000 {
            let d = rand_symbol(&mut rng, 20);
            let orb = d.to_orbifold();
            let perm = rand_perm(&mut rng, d.size());
            assert_eq!(d.relabel(&perm).to_orbifold(), orb);
            let chi = PartialComplex::full(&d).euler_orb();
            assert_eq!(orb.euler_char().expect("finite orders"), chi);
        }
    }

    /// Exhaustive oracle: a colour-respecting bijection exists.
    fn brute_force_isomorphic(a: &ColouredDSymbol, b: &ColouredDSymbol) -> bool {
        let n = a.symbol().size();
        if n != b.symbol().size() {
            return false;
        }
        let mut perm: Vec<usize> = (0..n).collect();
        // Heap's algorithm, checking every permutation.
        let check = |perm: &[usize]| -> bool {
            for c in 0..n {
                for gen in 0..3 {
                    if perm[a.symbol().s(gen, c)] != b.symbol().s(gen, perm[c]) {
                        return false;
                    }
                }
                if a.symbol().m01[c] != b.symbol().m01[perm[c]]
                    || a.symbol().m12[c] != b.symbol().m12[perm[c]]
                    || a.colour(c) != b.colour(perm[c])
                {
                    return false;
                }
            }
            true
        };
        let mut stack = vec![0usize; n];
        if check(&perm) {
            return true;
        }
        let mut i = 0;
        while i < n {
            if stack[i] < i {
                if i % 2 == 0 {
                    perm.swap(0, i);
                } else {
                    perm.swap(stack[i], i);
                }
                if check(&perm) {
                    return true;
                }
                stack[i] += 1;
                i = 0;
            } else {
                stack[i] = 0;
                i += 1;
            }
        }
        false
    }

    #[test]
    fn isomorphism_agrees_with_brute_force_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x15011357);
        for trial in 0..220 {
            let a = rand_symbol(&mut rng, 8);
            let ca = ColouredDSymbol::new(a.clone(), rand_colours(&mut rng, &a)).unwrap();
            let cb = if trial % 2 == 0 {
                ca.relabel(&rand_perm(&mut rng, a.size()))
            } else {
                let b = rand_symbol(&mut rng, 8);
                let col = rand_colours(&mut rng, &b);
                ColouredDSymbol::new(b, col).unwrap()
            };
            assert_eq!(ca.is_isomorphic(&cb), brute_force_isomorphic(&ca, &cb));
        }
    }

    #[test]
    fn cds_roundtrip_fuzz() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xCD5CD5);
        for _ in 0..300 {
            let d = rand_symbol(&mut rng, 16);
            let text = d.to_cds(rng.gen_bool(0.5));
            let doc = read_cds(&text).unwrap();
            assert_eq!(doc.symbol(), &d);
            let col = rand_colours(&mut rng, &d);
            let cd = ColouredDSymbol::new(d, col).unwrap();
            let text = cd.to_cds(false);
            match read_cds(&text).unwrap() {
                CdsDocument::Coloured(back) => assert_eq!(back, cd),
                _ => panic!("expected coloured document"),
            }
        }
    }
}
