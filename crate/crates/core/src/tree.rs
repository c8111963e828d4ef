//! Addressing and metric structure of the edge-rooted 3-regular tree.
//!
//! The tree is rooted at a distinguished edge `e` whose endpoints span two
//! half-trees. A vertex is addressed by the half-tree it lies in (its side)
//! and the binary path from that side's endpoint leading away from `e`.
//! Level-`n` vertices form the sphere `S(e,n)` of size `2^(n+1)`; the ball
//! `B(e,D)` is the union of levels `0..=D` and has `2^(D+2) - 2` vertices.
//!
//! All iteration is in canonical order: level by level, side `L` before `R`,
//! bit strings lexicographic. Vertices of `B(e,D)` are also exposed as dense
//! indices in that order, which the search modules use as permutation slots.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// The two half-trees obtained by removing the root edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Side {
    L,
    R,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::L => Side::R,
            Side::R => Side::L,
        }
    }

    fn as_bit(self) -> usize {
        match self {
            Side::L => 0,
            Side::R => 1,
        }
    }
}

/// A vertex of the edge-rooted tree: a side plus the binary path from that
/// side's endpoint. The endpoints themselves are `L:` and `R:` (empty path).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Address {
    pub side: Side,
    pub bits: Vec<u8>,
}

impl Address {
    pub fn root(side: Side) -> Address {
        Address { side, bits: Vec::new() }
    }

    pub fn new(side: Side, bits: impl Into<Vec<u8>>) -> Address {
        let bits = bits.into();
        debug_assert!(bits.iter().all(|&b| b <= 1));
        Address { side, bits }
    }

    /// Distance from the root edge; 0 for the two endpoints.
    pub fn level(&self) -> usize {
        self.bits.len()
    }

    /// The address with the last bit removed; `None` at level 0.
    pub fn parent(&self) -> Option<Address> {
        if self.bits.is_empty() {
            return None;
        }
        let mut bits = self.bits.clone();
        bits.pop();
        Some(Address { side: self.side, bits })
    }

    pub fn child(&self, bit: u8) -> Address {
        debug_assert!(bit <= 1);
        let mut bits = self.bits.clone();
        bits.push(bit);
        Address { side: self.side, bits }
    }

    pub fn children(&self) -> [Address; 2] {
        [self.child(0), self.child(1)]
    }

    /// Length of the common prefix of two same-side addresses.
    fn common_prefix(&self, other: &Address) -> usize {
        self.bits
            .iter()
            .zip(&other.bits)
            .take_while(|(a, b)| a == b)
            .count()
    }

    /// Dense index of this vertex within `B(e,D)` in canonical order.
    pub fn index(&self) -> usize {
        let n = self.level();
        level_offset(n) + (self.side.as_bit() << n) + self.lex_value()
    }

    /// The bit string read as an MSB-first integer (its lexicographic rank).
    fn lex_value(&self) -> usize {
        self.bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize)
    }
}

impl PartialOrd for Address {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Address {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.index().cmp(&other.index())
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = match self.side {
            Side::L => 'L',
            Side::R => 'R',
        };
        write!(f, "{side}:")?;
        for b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

// Debug mirrors Display; addresses read better as `L:0110` than as a
// struct dump in test failures.
impl fmt::Debug for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Address {
    type Err = Error;

    fn from_str(s: &str) -> Result<Address> {
        let bad = || Error::InvalidAddress(s.to_string());
        let (side, bits) = s.split_once(':').ok_or_else(bad)?;
        let side = match side {
            "L" => Side::L,
            "R" => Side::R,
            _ => return Err(bad()),
        };
        let bits = bits
            .chars()
            .map(|c| match c {
                '0' => Ok(0u8),
                '1' => Ok(1u8),
                _ => Err(bad()),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Address { side, bits })
    }
}

impl Serialize for Address {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Address {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Address, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `|S(e,n)| = 2^(n+1)`.
pub fn sphere_size(n: usize) -> usize {
    1 << (n + 1)
}

/// `|B(e,D)| = 2^(D+2) - 2`.
pub fn ball_size(depth: usize) -> usize {
    (1 << (depth + 2)) - 2
}

/// Index of the first level-`n` vertex in canonical order.
pub fn level_offset(n: usize) -> usize {
    (1 << (n + 1)) - 2
}

/// Level of the vertex with canonical index `i`.
pub fn level_of_index(i: usize) -> usize {
    // level_offset(n) + 2 = 2^(n+1)
    usize::BITS as usize - 1 - ((i + 2).leading_zeros() as usize) - 1
}

/// Canonical index of the parent of vertex `i` (level >= 1).
pub fn parent_index(i: usize) -> usize {
    let n = level_of_index(i);
    debug_assert!(n >= 1);
    let w = i - level_offset(n);
    let side = w >> n;
    let lex = w & ((1 << n) - 1);
    level_offset(n - 1) + (side << (n - 1)) + (lex >> 1)
}

/// Canonical index of the `bit`-child of vertex `i`.
pub fn child_index(i: usize, bit: usize) -> usize {
    let n = level_of_index(i);
    let w = i - level_offset(n);
    let side = w >> n;
    let lex = w & ((1 << n) - 1);
    level_offset(n + 1) + (side << (n + 1)) + ((lex << 1) | bit)
}

/// Address of the vertex with canonical index `i`.
pub fn address_at(i: usize) -> Address {
    let n = level_of_index(i);
    let w = i - level_offset(n);
    let side = if w >> n == 0 { Side::L } else { Side::R };
    let lex = w & ((1 << n) - 1);
    let bits = (0..n).map(|j| ((lex >> (n - 1 - j)) & 1) as u8).collect();
    Address { side, bits }
}

/// All level-`n` addresses in canonical order (`L` before `R`, bits
/// lexicographic).
pub fn sphere(n: usize) -> Vec<Address> {
    (level_offset(n)..level_offset(n + 1)).map(address_at).collect()
}

/// All addresses of `B(e,D)` in canonical order.
pub fn ball(depth: usize) -> Vec<Address> {
    (0..ball_size(depth)).map(address_at).collect()
}

/// Graph distance in the tree; crossing the root edge contributes 1.
pub fn distance(a: &Address, b: &Address) -> usize {
    if a.side == b.side {
        let p = a.common_prefix(b);
        a.level() + b.level() - 2 * p
    } else {
        a.level() + b.level() + 1
    }
}

/// A ball specification: either the edge ball `B(e,D)` or a vertex ball
/// `B(u,k)` inside some truncation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BallSpec {
    Edge { depth: usize },
    Vertex { center: Address, radius: usize },
}

impl BallSpec {
    /// The vertices of the ball within the depth-`depth` truncation, in
    /// canonical order.
    pub fn vertices(&self, depth: usize) -> Result<Vec<Address>> {
        match self {
            BallSpec::Edge { depth: d } => {
                if *d > depth {
                    return Err(Error::BadParams(format!(
                        "edge ball depth {d} exceeds truncation depth {depth}"
                    )));
                }
                Ok(ball(*d))
            }
            BallSpec::Vertex { center, radius } => ball_of_vertex(center, *radius, depth),
        }
    }
}

/// The exact metric ball `B(u,k)`, in canonical order. Fails with
/// `TruncationExceeded` if the ball would contain vertices deeper than `D`.
pub fn ball_of_vertex(u: &Address, k: usize, depth: usize) -> Result<Vec<Address>> {
    if u.level() + k > depth {
        return Err(Error::TruncationExceeded {
            center: u.clone(),
            radius: k,
            depth,
        });
    }
    let mut out: Vec<Address> = ball_of_vertex_indices(u.index(), k, depth)
        .into_iter()
        .map(address_at)
        .collect();
    out.sort();
    Ok(out)
}

/// Index-level variant of [`ball_of_vertex`]; sorted ascending. The caller
/// must ensure `level(u) + k <= depth`.
pub(crate) fn ball_of_vertex_indices(u: usize, k: usize, depth: usize) -> Vec<usize> {
    let mut members = vec![u];
    let mut frontier = vec![u];
    let mut seen = std::collections::HashSet::from([u]);
    for _ in 0..k {
        let mut next = Vec::new();
        for &v in &frontier {
            let n = level_of_index(v);
            let mut push = |w: usize| {
                if seen.insert(w) {
                    members.push(w);
                    next.push(w);
                }
            };
            if n >= 1 {
                push(parent_index(v));
            } else {
                // the root edge joins the two endpoints
                push(if v == 0 { 1 } else { 0 });
            }
            if n < depth {
                push(child_index(v, 0));
                push(child_index(v, 1));
            }
        }
        frontier = next;
    }
    members.sort_unstable();
    members
}
