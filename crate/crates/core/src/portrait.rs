//! Finite portraits: level-preserving, parent-compatible bijections of the
//! ball `B(e,D)`, the finite shadows of tree automorphisms that stabilize
//! the root edge setwise.
//!
//! A portrait stores the explicit vertex map over canonical indices. That is
//! the simplest correct form for restriction comparison and backtracking
//! search; at the depths this crate targets (`D <= 14`) the ball has at most
//! 65534 vertices and all orders fit comfortably in `u64`.

use rand::Rng;

use crate::tree::{self, Address};
use crate::{Error, Result};

/// What a portrait does to the root edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeAction {
    Fix,
    Swap,
}

impl EdgeAction {
    pub fn xor(self, other: EdgeAction) -> EdgeAction {
        if self == other {
            EdgeAction::Fix
        } else {
            EdgeAction::Swap
        }
    }
}

/// A level-preserving, parent-compatible bijection of `B(e,D)`.
#[derive(Clone, PartialEq, Eq)]
pub struct Portrait {
    depth: usize,
    map: Vec<u32>,
}

impl Portrait {
    pub fn identity(depth: usize) -> Portrait {
        Portrait {
            depth,
            map: (0..tree::ball_size(depth) as u32).collect(),
        }
    }

    /// Build from an explicit image table (canonical indices), validating all
    /// portrait invariants.
    pub fn from_images(depth: usize, map: Vec<u32>) -> Result<Portrait> {
        let p = Portrait { depth, map };
        p.validate()?;
        Ok(p)
    }

    /// Build from per-level address maps produced by `f`.
    pub fn from_fn(depth: usize, f: impl Fn(&Address) -> Address) -> Result<Portrait> {
        let map = (0..tree::ball_size(depth))
            .map(|i| f(&tree::address_at(i)).index() as u32)
            .collect();
        Portrait::from_images(depth, map)
    }

    /// Build from the decision bits that determine a portrait: the edge
    /// action plus, for every vertex of `B(e,D-1)`, whether its two children
    /// map straight or crossed below the image of that vertex.
    pub fn from_decisions(depth: usize, swap_edge: bool, crossings: &[bool]) -> Result<Portrait> {
        let interior = if depth == 0 { 0 } else { tree::ball_size(depth - 1) };
        if crossings.len() != interior {
            return Err(Error::BadParams(format!(
                "expected {interior} crossing bits, got {}",
                crossings.len()
            )));
        }
        let mut map = vec![0u32; tree::ball_size(depth)];
        map[0] = swap_edge as u32;
        map[1] = 1 - swap_edge as u32;
        for i in 0..interior {
            let img = map[i] as usize;
            let c = crossings[i] as usize;
            map[tree::child_index(i, 0)] = tree::child_index(img, c) as u32;
            map[tree::child_index(i, 1)] = tree::child_index(img, 1 - c) as u32;
        }
        Ok(Portrait { depth, map })
    }

    /// A uniformly random portrait (all decision bits independent).
    pub fn random(depth: usize, rng: &mut impl Rng) -> Portrait {
        let interior = if depth == 0 { 0 } else { tree::ball_size(depth - 1) };
        let crossings: Vec<bool> = (0..interior).map(|_| rng.random()).collect();
        Portrait::from_decisions(depth, rng.random(), &crossings).unwrap()
    }

    /// A uniformly random portrait with `EdgeAction::Swap`.
    pub fn random_inversion(depth: usize, rng: &mut impl Rng) -> Portrait {
        let interior = if depth == 0 { 0 } else { tree::ball_size(depth - 1) };
        let crossings: Vec<bool> = (0..interior).map(|_| rng.random()).collect();
        Portrait::from_decisions(depth, true, &crossings).unwrap()
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn image_table(&self) -> &[u32] {
        &self.map
    }

    pub fn apply_index(&self, i: usize) -> usize {
        self.map[i] as usize
    }

    pub fn apply(&self, a: &Address) -> Address {
        tree::address_at(self.apply_index(a.index()))
    }

    pub fn edge_action(&self) -> EdgeAction {
        if self.map[0] == 0 {
            EdgeAction::Fix
        } else {
            EdgeAction::Swap
        }
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &v)| i == v as usize)
    }

    /// Check level preservation, per-sphere bijectivity, and parent
    /// compatibility.
    pub fn validate(&self) -> Result<()> {
        let size = tree::ball_size(self.depth);
        if self.map.len() != size {
            return Err(Error::InvalidPortrait(format!(
                "map has {} entries, ball has {size}",
                self.map.len()
            )));
        }
        let mut seen = vec![false; size];
        for (i, &v) in self.map.iter().enumerate() {
            let v = v as usize;
            if v >= size {
                return Err(Error::InvalidPortrait(format!("image {v} out of range")));
            }
            if tree::level_of_index(i) != tree::level_of_index(v) {
                return Err(Error::InvalidPortrait(format!(
                    "level not preserved at {}",
                    tree::address_at(i)
                )));
            }
            if seen[v] {
                return Err(Error::InvalidPortrait(format!(
                    "image {} hit twice",
                    tree::address_at(v)
                )));
            }
            seen[v] = true;
            if tree::level_of_index(i) >= 1
                && self.map[tree::parent_index(i)] as usize != tree::parent_index(v)
            {
                return Err(Error::InvalidPortrait(format!(
                    "parent compatibility broken at {}",
                    tree::address_at(i)
                )));
            }
        }
        Ok(())
    }

    /// `(f o g)(a) = f(g(a))`. Depths must agree.
    pub fn compose(f: &Portrait, g: &Portrait) -> Result<Portrait> {
        if f.depth != g.depth {
            return Err(Error::DepthMismatch(f.depth, g.depth));
        }
        let map = g.map.iter().map(|&v| f.map[v as usize]).collect();
        Ok(Portrait { depth: f.depth, map })
    }

    pub fn inverse(&self) -> Portrait {
        let mut map = vec![0u32; self.map.len()];
        for (i, &v) in self.map.iter().enumerate() {
            map[v as usize] = i as u32;
        }
        Portrait { depth: self.depth, map }
    }

    /// `h^p`, with `h^0 = id` and `h^{-p} = inverse(h)^p`.
    pub fn power(&self, p: i64) -> Portrait {
        let mut base = if p < 0 { self.inverse() } else { self.clone() };
        let mut exp = p.unsigned_abs();
        let mut acc = Portrait::identity(self.depth);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = Portrait::compose(&acc, &base).unwrap();
            }
            base = Portrait::compose(&base, &base).unwrap();
            exp >>= 1;
        }
        acc
    }

    /// The restriction of this portrait to the smaller ball `B(e,d)`.
    pub fn truncate(&self, d: usize) -> Result<Portrait> {
        if d > self.depth {
            return Err(Error::BadParams(format!(
                "cannot truncate depth {} to {d}",
                self.depth
            )));
        }
        Ok(Portrait {
            depth: d,
            map: self.map[..tree::ball_size(d)].to_vec(),
        })
    }

    /// The restriction to the vertex ball `B(u,k)` as an explicit local map.
    pub fn restrict(&self, u: &Address, k: usize) -> Result<LocalMap> {
        let domain = tree::ball_of_vertex(u, k, self.depth)?;
        let pairs = domain
            .into_iter()
            .map(|a| {
                let img = self.apply(&a);
                (a, img)
            })
            .collect();
        Ok(LocalMap {
            center: u.clone(),
            radius: k,
            pairs,
        })
    }

    /// Cycle type of the permutation induced on `S(e,n)`, as cycle lengths in
    /// descending order.
    pub fn sphere_cycle_type(&self, n: usize) -> Vec<u64> {
        let lo = tree::level_offset(n);
        let hi = tree::level_offset(n + 1);
        let mut seen = vec![false; hi - lo];
        let mut cycles = Vec::new();
        for start in lo..hi {
            if seen[start - lo] {
                continue;
            }
            let mut len = 0u64;
            let mut v = start;
            while !seen[v - lo] {
                seen[v - lo] = true;
                len += 1;
                v = self.map[v] as usize;
            }
            cycles.push(len);
        }
        cycles.sort_unstable_by(|a, b| b.cmp(a));
        cycles
    }

    /// Order of the permutation induced on `S(e,n)` (lcm of cycle lengths).
    pub fn sphere_order(&self, n: usize) -> u64 {
        self.sphere_cycle_type(n).into_iter().fold(1, lcm)
    }

    /// Order of the permutation induced on `B(e,n)`: lcm of the sphere orders
    /// over levels `0..=n`.
    pub fn order_on_ball(&self, n: usize) -> u64 {
        (0..=n).map(|m| self.sphere_order(m)).fold(1, lcm)
    }
}

impl std::fmt::Debug for Portrait {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Portrait(depth={}, edge={:?})", self.depth, self.edge_action())
    }
}

pub(crate) fn lcm(a: u64, b: u64) -> u64 {
    fn gcd(mut a: u64, mut b: u64) -> u64 {
        while b != 0 {
            let t = a % b;
            a = b;
            b = t;
        }
        a
    }
    a / gcd(a, b) * b
}

/// The restriction of a portrait to a vertex ball, kept as explicit
/// address pairs in canonical domain order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalMap {
    pub center: Address,
    pub radius: usize,
    pub pairs: Vec<(Address, Address)>,
}

impl LocalMap {
    /// Injectivity plus distance preservation over the domain.
    pub fn validate(&self) -> Result<()> {
        for (i, (a, fa)) in self.pairs.iter().enumerate() {
            for (b, fb) in &self.pairs[i + 1..] {
                if fa == fb {
                    return Err(Error::InvalidPortrait(format!(
                        "local map not injective at {a} and {b}"
                    )));
                }
                if tree::distance(a, b) != tree::distance(fa, fb) {
                    return Err(Error::InvalidPortrait(format!(
                        "local map distorts distance between {a} and {b}"
                    )));
                }
            }
        }
        Ok(())
    }
}
