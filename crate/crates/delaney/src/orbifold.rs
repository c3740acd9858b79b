//! Conway orbifold symbols.
//!
//! A symbol such as `2224`, `22*`, `*244`, `o`, or `22x` records the
//! quotient orbifold of a plane symmetry group: handles (`o`), cone
//! points (digits, multi-digit orders in parentheses), mirror boundary
//! components (`*` followed by that boundary's corner orders in cyclic
//! order), and crosscaps (`x`). The Unicode spellings `∘`, `★`, `×`
//! are accepted on input. `∞` is a valid order only in stabiliser
//! signatures, never in a crystallographic host group, so
//! [`OrbifoldSymbol::euler_char`] rejects it; the frieze and branched
//! signature strings reuse this type through
//! [`OrbifoldSymbol::euler_char_extended`].

use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::Zero;

/// A cone or corner order: a finite integer at least 2, or infinity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Order {
    Fin(u32),
    Inf,
}

impl Order {
    pub fn as_finite(self) -> Option<u32> {
        match self {
            Order::Fin(n) => Some(n),
            Order::Inf => None,
        }
    }

    /// Cone cost 1 - 1/N, with 1/∞ = 0.
    fn cost(self) -> Rational64 {
        match self {
            Order::Fin(n) => Rational64::new(i64::from(n) - 1, i64::from(n)),
            Order::Inf => Rational64::from_integer(1),
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Fin(n) if *n < 10 => write!(f, "{n}"),
            Order::Fin(n) => write!(f, "({n})"),
            Order::Inf => f.write_str("∞"),
        }
    }
}

/// Constant-curvature geometry of a good orbifold, decided by the sign
/// of its Euler characteristic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Geometry {
    Spherical,
    Euclidean,
    Hyperbolic,
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Geometry::Spherical => "spherical",
            Geometry::Euclidean => "euclidean",
            Geometry::Hyperbolic => "hyperbolic",
        })
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum OrbifoldError {
    #[error("empty orbifold symbol")]
    Empty,
    #[error("unexpected character {ch:?} at byte {pos}")]
    UnexpectedChar { ch: char, pos: usize },
    #[error("handle marker at byte {pos} must precede cones, boundaries, and crosscaps")]
    MisplacedHandle { pos: usize },
    #[error("order at byte {pos} follows a crosscap marker")]
    OrderAfterCrosscap { pos: usize },
    #[error("boundary marker at byte {pos} follows a crosscap marker")]
    BoundaryAfterCrosscap { pos: usize },
    #[error("cone or corner order {order} is less than 2")]
    OrderTooSmall { order: u64 },
    #[error("unclosed parenthesis opened at byte {pos}")]
    UnclosedParen { pos: usize },
    #[error("empty parentheses at byte {pos}")]
    EmptyParens { pos: usize },
    #[error("parenthesized order at byte {pos} is too large")]
    Overflow { pos: usize },
    #[error("symbol mixes handles and crosscaps")]
    MixedGenus,
    #[error("Euler characteristic undefined: infinite order present")]
    InfiniteOrder,
    #[error("bad orbifold has no geometry")]
    BadOrbifold,
}

/// A parsed, normalized Conway orbifold symbol.
///
/// Normalization on construction makes structural equality coincide
/// with symbol equality: cone orders are sorted ascending (∞ last),
/// each corner cycle is rotated to its lexicographic minimum, cycle
/// reversal is applied per boundary when the symbol is non-orientable
/// and only globally (all boundaries at once, the mirror image) when
/// it is orientable, and the boundary list is sorted.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OrbifoldSymbol {
    handles: u32,
    crosscaps: u32,
    cones: Vec<Order>,
    boundaries: Vec<Vec<Order>>,
}

impl OrbifoldSymbol {
    pub fn new(
        handles: u32,
        crosscaps: u32,
        cones: Vec<Order>,
        boundaries: Vec<Vec<Order>>,
    ) -> Result<Self, OrbifoldError> {
        if handles > 0 && crosscaps > 0 {
            return Err(OrbifoldError::MixedGenus);
        }
        for &o in cones.iter().chain(boundaries.iter().flatten()) {
            if let Order::Fin(n) = o {
                if n < 2 {
                    return Err(OrbifoldError::OrderTooSmall { order: u64::from(n) });
                }
            }
        }
        let mut sym = OrbifoldSymbol {
            handles,
            crosscaps,
            cones,
            boundaries,
        };
        sym.normalize();
        Ok(sym)
    }

    /// The sphere with no features: the trivial symmetry group, written `1`.
    pub fn sphere() -> Self {
        OrbifoldSymbol {
            handles: 0,
            crosscaps: 0,
            cones: Vec::new(),
            boundaries: Vec::new(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, OrbifoldError> {
        let s = text.trim();
        if s.is_empty() {
            return Err(OrbifoldError::Empty);
        }
        if s == "1" {
            return Ok(Self::sphere());
        }

        #[derive(PartialEq, PartialOrd)]
        enum State {
            Handles,
            Cones,
            Boundary,
            Crosscaps,
        }

        let mut state = State::Handles;
        let mut handles = 0u32;
        let mut crosscaps = 0u32;
        let mut cones: Vec<Order> = Vec::new();
        let mut boundaries: Vec<Vec<Order>> = Vec::new();

        let push_order = |state: &mut State,
                              cones: &mut Vec<Order>,
                              boundaries: &mut Vec<Vec<Order>>,
                              order: Order,
                              pos: usize|
         -> Result<(), OrbifoldError> {
            match state {
                State::Handles | State::Cones => {
                    *state = State::Cones;
                    cones.push(order);
                    Ok(())
                }
                State::Boundary => {
                    boundaries.last_mut().expect("boundary open").push(order);
                    Ok(())
                }
                State::Crosscaps => Err(OrbifoldError::OrderAfterCrosscap { pos }),
            }
        };

        let mut chars = s.char_indices().peekable();
        while let Some((pos, ch)) = chars.next() {
            match ch {
                'o' | '∘' => {
                    if state > State::Handles {
                        return Err(OrbifoldError::MisplacedHandle { pos });
                    }
                    handles += 1;
                }
                'x' | '×' => {
                    state = State::Crosscaps;
                    crosscaps += 1;
                }
                '*' | '★' => {
                    if state == State::Crosscaps {
                        return Err(OrbifoldError::BoundaryAfterCrosscap { pos });
                    }
                    boundaries.push(Vec::new());
                    state = State::Boundary;
                }
                '∞' => {
                    push_order(&mut state, &mut cones, &mut boundaries, Order::Inf, pos)?;
                }
                '0'..='9' => {
                    let n = ch as u32 - '0' as u32;
                    if n < 2 {
                        return Err(OrbifoldError::OrderTooSmall { order: u64::from(n) });
                    }
                    push_order(&mut state, &mut cones, &mut boundaries, Order::Fin(n), pos)?;
                }
                '(' => {
                    let mut val: u64 = 0;
                    let mut digits = 0usize;
                    loop {
                        match chars.next() {
                            Some((_, d @ '0'..='9')) => {
                                val = val * 10 + u64::from(d as u32 - '0' as u32);
                                digits += 1;
                                if val > 1_000_000 {
                                    return Err(OrbifoldError::Overflow { pos });
                                }
                            }
                            Some((_, ')')) => break,
                            Some((p, c)) => {
                                return Err(OrbifoldError::UnexpectedChar { ch: c, pos: p })
                            }
                            None => return Err(OrbifoldError::UnclosedParen { pos }),
                        }
                    }
                    if digits == 0 {
                        return Err(OrbifoldError::EmptyParens { pos });
                    }
                    if val < 2 {
                        return Err(OrbifoldError::OrderTooSmall { order: val });
                    }
                    push_order(
                        &mut state,
                        &mut cones,
                        &mut boundaries,
                        Order::Fin(val as u32),
                        pos,
                    )?;
                }
                _ => return Err(OrbifoldError::UnexpectedChar { ch, pos }),
            }
        }

        Self::new(handles, crosscaps, cones, boundaries)
    }

    pub fn handles(&self) -> u32 {
        self.handles
    }

    pub fn crosscaps(&self) -> u32 {
        self.crosscaps
    }

    pub fn orientable(&self) -> bool {
        self.crosscaps == 0
    }

    pub fn cones(&self) -> &[Order] {
        &self.cones
    }

    pub fn boundaries(&self) -> &[Vec<Order>] {
        &self.boundaries
    }

    pub fn has_infinite_order(&self) -> bool {
        self.cones
            .iter()
            .chain(self.boundaries.iter().flatten())
            .any(|&o| o == Order::Inf)
    }

    /// Orbifold Euler characteristic
    /// χ = 2 - 2h - k - b - Σ_cones (1 - 1/N) - ½ Σ_corners (1 - 1/M),
    /// exact. Infinite orders are rejected: a symbol containing ∞ is a
    /// stabiliser signature, not a crystallographic group.
    pub fn euler_char(&self) -> Result<Rational64, OrbifoldError> {
        if self.has_infinite_order() {
            return Err(OrbifoldError::InfiniteOrder);
        }
        Ok(self.euler_char_extended())
    }

    /// Same cost accounting with 1/∞ = 0, defined for every symbol.
    pub fn euler_char_extended(&self) -> Rational64 {
        let mut chi = Rational64::from_integer(
            2 - 2 * i64::from(self.handles) - i64::from(self.crosscaps),
        );
        chi -= Rational64::from_integer(self.boundaries.len() as i64);
        for &c in &self.cones {
            chi -= c.cost();
        }
        for &c in self.boundaries.iter().flatten() {
            chi -= c.cost() / 2;
        }
        chi
    }

    /// The bad orbifolds admit no geometric structure: a sphere with
    /// one cone or with two cones of unequal order, and a disk with one
    /// corner or with two corners of unequal order.
    pub fn is_bad(&self) -> bool {
        if self.handles != 0 || self.crosscaps != 0 {
            return false;
        }
        match (&self.cones[..], &self.boundaries[..]) {
            ([_], []) => true,
            ([a, b], []) => a != b,
            ([], [corners]) => match &corners[..] {
                [_] => true,
                [a, b] => a != b,
                _ => false,
            },
            _ => false,
        }
    }

    pub fn geometry(&self) -> Result<Geometry, OrbifoldError> {
        if self.is_bad() {
            return Err(OrbifoldError::BadOrbifold);
        }
        let chi = self.euler_char()?;
        Ok(if chi > Rational64::zero() {
            Geometry::Spherical
        } else if chi == Rational64::zero() {
            Geometry::Euclidean
        } else {
            Geometry::Hyperbolic
        })
    }

    /// ASCII spelling: `o`, digits, `*`, `x` (∞ has no ASCII form and
    /// stays as is). The featureless sphere prints as `1`.
    pub fn ascii(&self) -> String {
        let mut out = String::new();
        for _ in 0..self.handles {
            out.push('o');
        }
        for c in &self.cones {
            out.push_str(&c.to_string());
        }
        for b in &self.boundaries {
            out.push('*');
            for c in b {
                out.push_str(&c.to_string());
            }
        }
        for _ in 0..self.crosscaps {
            out.push('x');
        }
        if out.is_empty() {
            out.push('1');
        }
        out
    }

    /// Unicode spelling with ∘, ★, ×.
    pub fn unicode(&self) -> String {
        self.ascii()
            .replace('o', "∘")
            .replace('*', "★")
            .replace('x', "×")
    }

    fn normalize(&mut self) {
        self.cones.sort();
        if self.crosscaps > 0 {
            for b in &mut self.boundaries {
                let fwd = min_rotation(b);
                let mut rev = b.clone();
                rev.reverse();
                let rev = min_rotation(&rev);
                *b = fwd.min(rev);
            }
            self.boundaries.sort();
        } else {
            let mut fwd: Vec<Vec<Order>> = self.boundaries.iter().map(|b| min_rotation(b)).collect();
            fwd.sort();
            let mut rev: Vec<Vec<Order>> = self
                .boundaries
                .iter()
                .map(|b| {
                    let mut r = b.clone();
                    r.reverse();
                    min_rotation(&r)
                })
                .collect();
            rev.sort();
            self.boundaries = fwd.min(rev);
        }
    }
}

fn min_rotation(cycle: &[Order]) -> Vec<Order> {
    let n = cycle.len();
    if n == 0 {
        return Vec::new();
    }
    (0..n)
        .map(|s| {
            let mut rot = Vec::with_capacity(n);
            rot.extend_from_slice(&cycle[s..]);
            rot.extend_from_slice(&cycle[..s]);
            rot
        })
        .min()
        .expect("nonempty")
}

impl fmt::Display for OrbifoldSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.ascii())
    }
}

impl FromStr for OrbifoldSymbol {
    type Err = OrbifoldError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

/// The 17 Euclidean plane groups in normalized spelling.
pub fn wallpaper_groups() -> Vec<OrbifoldSymbol> {
    [
        "o", "2222", "333", "244", "236", "*2222", "*333", "*244", "*236", "2*22", "3*3", "4*2",
        "22*", "**", "xx", "22x", "*x",
    ]
    .iter()
    .map(|s| OrbifoldSymbol::parse(s).expect("wallpaper symbol"))
    .collect()
}
