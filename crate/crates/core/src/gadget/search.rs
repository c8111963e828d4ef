//! Enumeration of color-preserving maps between gadget complexes.
//!
//! Soundness of the candidate space rests on two mechanized facts (see the
//! module tests): connected components of the internal-arc subgraph are
//! exactly the gadgets, so any color-preserving map sends gadgets to
//! gadgets; and the color-preserving bijections between the internal
//! structures of two gadgets are a small brute-forced set of slot
//! permutations. A map is therefore a gadget assignment plus one local slot
//! permutation per gadget, and since arcs only join tree-adjacent gadgets,
//! the image of a gadget must be adjacent to the image of any assigned
//! neighbor. The search walks the gadget tree outward from a seed, trying
//! every (adjacent target, local permutation) candidate and checking the
//! actual arcs between the new gadget and the gadget it was discovered
//! from; completed assignments are re-verified arc by arc.

use super::{gadget_of, node_id, slot_of, ArcColor, GadgetComplex, SLOTS_PER_GADGET};
use crate::{Error, Result};

/// A color-preserving map between complexes, defined on a gadget domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColorAutomorphism {
    assignment: Vec<Option<(usize, [u8; 6])>>,
}

impl ColorAutomorphism {
    pub fn identity(cx: &GadgetComplex, domain: &[bool]) -> ColorAutomorphism {
        let id: [u8; 6] = [0, 1, 2, 3, 4, 5];
        ColorAutomorphism {
            assignment: (0..cx.gadget_count())
                .map(|g| domain[g].then_some((g, id)))
                .collect(),
        }
    }

    pub fn gadget_image(&self, g: usize) -> Option<usize> {
        self.assignment.get(g).copied().flatten().map(|(t, _)| t)
    }

    pub fn node_image(&self, node: u32) -> Option<u32> {
        let (t, m) = self.assignment[gadget_of(node)]?;
        Some(node_id(t, m[slot_of(node)] as usize))
    }

    pub fn domain(&self) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&g| self.assignment[g].is_some())
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        self.assignment
            .iter()
            .enumerate()
            .all(|(g, a)| match a {
                None => true,
                Some((t, m)) => *t == g && m.iter().enumerate().all(|(s, &v)| v as usize == s),
            })
    }

    /// Cycle type of the black 4-cycle of `g` under a map fixing `g` setwise.
    pub fn black_cycle_type(&self, g: usize) -> Option<Vec<u64>> {
        let (t, m) = self.assignment[g]?;
        if t != g {
            return None;
        }
        let mut seen = [false; 4];
        let mut cycles = Vec::new();
        for start in 0..4 {
            if seen[start] {
                continue;
            }
            let mut len = 0u64;
            let mut s = start;
            while !seen[s] {
                seen[s] = true;
                len += 1;
                s = m[s] as usize;
            }
            cycles.push(len);
        }
        cycles.sort_unstable_by(|a, b| b.cmp(a));
        Some(cycles)
    }

    /// Whether the blues of `g` are swapped (the map must fix `g` setwise).
    pub fn swaps_blues(&self, g: usize) -> Option<bool> {
        let (t, m) = self.assignment[g]?;
        if t != g {
            return None;
        }
        Some(m[4] == 5)
    }

    /// Order of the induced permutation on a set of gadgets. `None` if the
    /// set is not closed under the map.
    pub fn induced_order_on(&self, gadgets: &[usize]) -> Option<u64> {
        let pos = |g: usize| gadgets.iter().position(|&x| x == g);
        let mut perm = Vec::with_capacity(gadgets.len());
        for &g in gadgets {
            perm.push(pos(self.gadget_image(g)?)?);
        }
        let mut seen = vec![false; perm.len()];
        let mut order = 1u64;
        for start in 0..perm.len() {
            if seen[start] {
                continue;
            }
            let mut len = 0u64;
            let mut s = start;
            while !seen[s] {
                seen[s] = true;
                len += 1;
                s = perm[s];
            }
            order = crate::portrait::lcm(order, len);
        }
        Some(order)
    }

    /// Full arc-by-arc verification over the assigned domain, plus node
    /// injectivity and color preservation.
    pub fn verify(&self, src: &GadgetComplex, dst: &GadgetComplex) -> Result<()> {
        let mut images = std::collections::HashSet::new();
        for g in 0..src.gadget_count() {
            if self.assignment[g].is_none() {
                continue;
            }
            for s in 0..SLOTS_PER_GADGET {
                let n = node_id(g, s);
                let img = self.node_image(n).unwrap();
                if super::node_color(n) != super::node_color(img) {
                    return Err(Error::InvalidPortrait(format!(
                        "node color changed at {}",
                        src.node_name(n)
                    )));
                }
                if !images.insert(img) {
                    return Err(Error::InvalidPortrait(format!(
                        "node image {} hit twice",
                        dst.node_name(img)
                    )));
                }
            }
        }
        for &(from, to, color) in src.arcs() {
            if let (Some(f), Some(t)) = (self.node_image(from), self.node_image(to)) {
                if !dst.has_arc(f, t, color) {
                    return Err(Error::InvalidPortrait(format!(
                        "arc {} -> {} ({color:?}) has no image arc",
                        src.node_name(from),
                        src.node_name(to)
                    )));
                }
            }
        }
        Ok(())
    }
}

/// All color-preserving bijections between the internal structures of a
/// `src` gadget and a `dst` gadget, as slot permutations, by brute force
/// over black and blue arrangements.
pub(crate) fn internal_slot_isos(src: &GadgetComplex, dst: &GadgetComplex) -> Vec<[u8; 6]> {
    let internal = |c: &GadgetComplex| -> Vec<(usize, usize)> {
        c.arcs()
            .iter()
            .filter(|&&(f, t, col)| {
                col == ArcColor::Internal && gadget_of(f) == 0 && gadget_of(t) == 0
            })
            .map(|&(f, t, _)| (slot_of(f), slot_of(t)))
            .collect()
    };
    let src_arcs = internal(src);
    let dst_arcs: std::collections::HashSet<(usize, usize)> = internal(dst).into_iter().collect();
    assert_eq!(src_arcs.len(), dst_arcs.len());

    let mut out = Vec::new();
    let blacks = [0usize, 1, 2, 3];
    let mut black_perms = Vec::new();
    permutations(&blacks, &mut Vec::new(), &mut black_perms);
    for bp in &black_perms {
        for swap_blues in [false, true] {
            let mut m = [0u8; 6];
            for (i, &v) in bp.iter().enumerate() {
                m[i] = v as u8;
            }
            m[4] = if swap_blues { 5 } else { 4 };
            m[5] = if swap_blues { 4 } else { 5 };
            if src_arcs
                .iter()
                .all(|&(f, t)| dst_arcs.contains(&(m[f] as usize, m[t] as usize)))
            {
                out.push(m);
            }
        }
    }
    out
}

fn permutations(rest: &[usize], acc: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if rest.is_empty() {
        out.push(acc.clone());
        return;
    }
    for (i, &x) in rest.iter().enumerate() {
        let mut r = rest.to_vec();
        r.remove(i);
        acc.push(x);
        permutations(&r, acc, out);
        acc.pop();
    }
}

/// One enumeration problem over a fixed gadget domain.
pub(crate) struct AutoSearch<'a> {
    pub src: &'a GadgetComplex,
    pub dst: &'a GadgetComplex,
    pub local_maps: Vec<[u8; 6]>,
    pub domain: Vec<bool>,
    pub seed: usize,
    /// Require the map to square to the identity on the domain.
    pub involution: bool,
    /// Required gadget targets (checked on assignment).
    pub pinned: Vec<Option<usize>>,
    pub find_first: bool,
    pub budget: u64,
}

pub(crate) struct SearchOutcome {
    pub found: Vec<ColorAutomorphism>,
    pub expanded: u64,
    pub exhaustive: bool,
}

struct SearchState {
    asg: Vec<Option<(usize, [u8; 6])>>,
    pre: Vec<Option<usize>>,
    used: Vec<bool>,
    expanded: u64,
    aborted: bool,
    done: bool,
    found: Vec<ColorAutomorphism>,
}

impl<'a> AutoSearch<'a> {
    pub fn new(src: &'a GadgetComplex, dst: &'a GadgetComplex, domain: Vec<bool>, seed: usize) -> Self {
        AutoSearch {
            local_maps: internal_slot_isos(src, dst),
            src,
            dst,
            domain,
            seed,
            involution: false,
            pinned: Vec::new(),
            find_first: false,
            budget: u64::MAX,
        }
    }

    /// Breadth-first processing order over the domain: each non-seed gadget
    /// paired with the already-processed neighbor it was discovered from.
    fn steps(&self) -> Vec<(usize, usize)> {
        let mut steps = Vec::new();
        let mut seen = vec![false; self.src.gadget_count()];
        seen[self.seed] = true;
        let mut queue = std::collections::VecDeque::from([self.seed]);
        while let Some(g) = queue.pop_front() {
            for n in self.src.neighbors(g) {
                if self.domain[n] && !seen[n] {
                    seen[n] = true;
                    steps.push((n, g));
                    queue.push_back(n);
                }
            }
        }
        steps
    }

    /// Run the enumeration over the given seed assignments, in order.
    pub fn run(&self, seeds: &[(usize, [u8; 6])]) -> SearchOutcome {
        let steps = self.steps();
        let mut st = SearchState {
            asg: vec![None; self.src.gadget_count()],
            pre: vec![None; self.dst.gadget_count()],
            used: vec![false; self.dst.gadget_count()],
            expanded: 0,
            aborted: false,
            done: false,
            found: Vec::new(),
        };
        for &(target, m) in seeds {
            if st.aborted || st.done {
                break;
            }
            st.expanded += 1;
            if st.expanded > self.budget {
                st.aborted = true;
                break;
            }
            if self.admissible(&st, self.seed, target, &m) {
                self.place(&mut st, self.seed, target, m);
                if steps.is_empty() {
                    self.finalize(&mut st);
                } else {
                    self.dfs(&steps, 0, &mut st);
                }
                self.remove(&mut st, self.seed, target);
            }
        }
        SearchOutcome {
            exhaustive: !st.aborted,
            expanded: st.expanded,
            found: if st.aborted { Vec::new() } else { st.found },
        }
    }

    fn dfs(&self, steps: &[(usize, usize)], idx: usize, st: &mut SearchState) {
        if st.aborted || st.done {
            return;
        }
        let (x, from) = steps[idx];
        let (tw, _) = st.asg[from].expect("discovery neighbor is assigned");
        for t in self.dst.neighbors(tw) {
            for mi in 0..self.local_maps.len() {
                let m = self.local_maps[mi];
                if st.aborted || st.done {
                    return;
                }
                st.expanded += 1;
                if st.expanded > self.budget {
                    st.aborted = true;
                    return;
                }
                if !self.admissible(st, x, t, &m) {
                    continue;
                }
                if !self.arcs_between_ok(st, x, t, &m, from) {
                    continue;
                }
                self.place(st, x, t, m);
                if idx + 1 == steps.len() {
                    self.finalize(st);
                } else {
                    self.dfs(steps, idx + 1, st);
                }
                self.remove(st, x, t);
            }
        }
    }

    fn finalize(&self, st: &mut SearchState) {
        let auto = ColorAutomorphism {
            assignment: st.asg.clone(),
        };
        auto.verify(self.src, self.dst)
            .expect("completed assignments pass the full arc check");
        st.found.push(auto);
        if self.find_first {
            st.done = true;
        }
    }

    fn admissible(&self, st: &SearchState, x: usize, t: usize, m: &[u8; 6]) -> bool {
        if st.used[t] {
            return false;
        }
        if let Some(p) = self.pinned.get(x).copied().flatten() {
            if p != t {
                return false;
            }
        }
        if self.involution {
            if !self.domain[t] {
                return false;
            }
            if t == x {
                // a fixed gadget must carry a self-inverse local map
                if !compose_is_identity(m, m) {
                    return false;
                }
            } else {
                // if the image's image is already known, the pair must cancel
                if let Some((t2, m2)) = st.asg[t] {
                    if t2 != x || !compose_is_identity(m, &m2) {
                        return false;
                    }
                }
                // if x is already an image, the pair must cancel the other way
                if let Some(w) = st.pre[x] {
                    let (_, mw) = st.asg[w].expect("preimage is assigned");
                    if t != w || !compose_is_identity(&mw, m) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Check every red/green arc between `x` and its discovery neighbor.
    fn arcs_between_ok(&self, st: &SearchState, x: usize, t: usize, m: &[u8; 6], from: usize) -> bool {
        let (tf, mf) = st.asg[from].expect("discovery neighbor is assigned");
        let img_x = |s: usize| node_id(t, m[s] as usize);
        let img_f = |s: usize| node_id(tf, mf[s] as usize);
        for s in 0..SLOTS_PER_GADGET {
            let n = node_id(x, s);
            for (to, color) in [
                (self.src.red_out(n), ArcColor::Red),
                (self.src.green_out(n), ArcColor::Green),
            ] {
                if let Some(to) = to {
                    if gadget_of(to) == from
                        && !self.dst.has_arc(img_x(s), img_f(slot_of(to)), color)
                    {
                        return false;
                    }
                }
            }
            let nf = node_id(from, s);
            for (to, color) in [
                (self.src.red_out(nf), ArcColor::Red),
                (self.src.green_out(nf), ArcColor::Green),
            ] {
                if let Some(to) = to {
                    if gadget_of(to) == x && !self.dst.has_arc(img_f(s), img_x(slot_of(to)), color) {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn place(&self, st: &mut SearchState, x: usize, t: usize, m: [u8; 6]) {
        st.asg[x] = Some((t, m));
        st.used[t] = true;
        st.pre[t] = Some(x);
    }

    fn remove(&self, st: &mut SearchState, x: usize, t: usize) {
        st.asg[x] = None;
        st.used[t] = false;
        st.pre[t] = None;
    }
}

fn compose_is_identity(first: &[u8; 6], second: &[u8; 6]) -> bool {
    (0..6).all(|s| second[first[s] as usize] as usize == s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gadget::build_sigma;

    #[test]
    fn internal_isomorphisms_are_the_four_rotations() {
        let c = build_sigma(1);
        let isos = internal_slot_isos(&c, &c);
        assert_eq!(isos.len(), 4);
        for r in 0..4u8 {
            let m: [u8; 6] = [
                (r % 4),
                (1 + r) % 4,
                (2 + r) % 4,
                (3 + r) % 4,
                4 + (r % 2),
                4 + ((1 + r) % 2),
            ];
            assert!(isos.contains(&m), "rotation {r} missing: {m:?}");
        }
    }

    #[test]
    fn every_gadget_has_identical_internal_structure() {
        let c = build_sigma(2);
        let internal_of = |g: usize| -> Vec<(usize, usize)> {
            c.arcs()
                .iter()
                .filter(|&&(f, t, col)| {
                    col == ArcColor::Internal && gadget_of(f) == g && gadget_of(t) == g
                })
                .map(|&(f, t, _)| (slot_of(f), slot_of(t)))
                .collect()
        };
        let base = internal_of(0);
        for g in 1..c.gadget_count() {
            assert_eq!(internal_of(g), base, "gadget {g}");
        }
    }
}
