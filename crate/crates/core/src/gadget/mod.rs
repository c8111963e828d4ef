//! The colored directed gadget complex over the 4-regular tree.
//!
//! Each tree vertex is replaced by a six-node gadget: four black nodes
//! `b0..b3` in a directed cycle `b0 -> b1 -> b2 -> b3 -> b0`, and two blue
//! nodes with internal arcs `u0 -> b0`, `u0 -> b2`, `u1 -> b1`, `u1 -> b3`.
//! Gadgets attach to their tree neighbors with colored arcs:
//!
//! - red, black-to-blue, parent to child: `b0 -> child0.u0`,
//!   `b2 -> child0.u1`, `b1 -> child1.u0`, `b3 -> child1.u1`
//!   (so black `b_i` feeds child `i mod 2` at blue `i div 2`);
//! - green, blue-to-blue, one directed 4-cycle per matched pair `(A, B)`:
//!   `A.u0 -> B.u0 -> A.u1 -> B.u1 -> A.u0`, anchored at the pair member
//!   that entered the complex first.
//!
//! Every vertex thus has one green neighbor, one red parent and two red
//! children; contracting each gadget to a point recovers a ball of the
//! 4-regular tree. The complex is built to a fixed gadget radius around a
//! base gadget; a gadget is interior when all four neighbors are present.

mod analysis;
mod search;

pub use analysis::{
    anchoring_isomorphism_check, green_swap_analysis, local_blue_swap_analysis, torsion_search,
    transitivity_witness, BlueSwapReport, GreenSwapReport, TorsionReport,
};
pub use search::ColorAutomorphism;

use serde::Serialize;

use crate::{Error, Result};

pub const SLOTS_PER_GADGET: usize = 6;

/// Node slots within a gadget: blacks `0..4` (the directed cycle), blues
/// `4` (`u0`) and `5` (`u1`).
pub const SLOT_NAMES: [&str; 6] = ["b0", "b1", "b2", "b3", "u0", "u1"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeColor {
    Black,
    Blue,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ArcColor {
    Internal,
    Red,
    Green,
}

/// One gadget and its tree-neighbor slots (absent at the truncation edge).
#[derive(Clone, Debug)]
pub struct Gadget {
    /// Moves from the base gadget: `p` parent, `g` green partner, `0`/`1`
    /// red children. Empty for the base.
    pub path: String,
    /// Gadget-tree distance from the base.
    pub dist: usize,
    pub parent: Option<usize>,
    /// Which child of its parent this gadget is (0 when the parent is
    /// outside the complex or was discovered through this gadget).
    pub child_index: u8,
    pub children: [Option<usize>; 2],
    pub green: Option<usize>,
    /// Whether this gadget anchors its green 4-cycle (the pair member that
    /// entered the complex first does).
    pub green_anchor: bool,
}

/// A finite truncation of the complex: gadgets within a fixed tree radius
/// of the base, with all arcs between present gadgets.
pub struct GadgetComplex {
    radius: usize,
    gadgets: Vec<Gadget>,
    arcs: Vec<(u32, u32, ArcColor)>,
    arc_set: std::collections::HashSet<(u32, u32, ArcColor)>,
    red_out: Vec<Option<u32>>,
    red_in: Vec<Option<u32>>,
    green_out: Vec<Option<u32>>,
    green_in: Vec<Option<u32>>,
}

pub fn node_id(gadget: usize, slot: usize) -> u32 {
    (gadget * SLOTS_PER_GADGET + slot) as u32
}

pub fn gadget_of(node: u32) -> usize {
    node as usize / SLOTS_PER_GADGET
}

pub fn slot_of(node: u32) -> usize {
    node as usize % SLOTS_PER_GADGET
}

pub fn node_color(node: u32) -> NodeColor {
    if slot_of(node) < 4 {
        NodeColor::Black
    } else {
        NodeColor::Blue
    }
}

/// Build the complex out to the given gadget radius.
pub fn build_sigma(radius: usize) -> GadgetComplex {
    build_sigma_with_anchor(radius, 0)
}

/// Build with the blue attachment anchored `anchor_shift` steps along the
/// black cycle: blue `u_j` attaches to `b_(j+shift)` and `b_(j+2+shift)`.
/// Shift 0 is the standard complex; shift 1 is the other reading of the
/// attachment description. The two are isomorphic, which
/// [`anchoring_isomorphism_check`] exhibits rather than assumes.
pub(crate) fn build_sigma_with_anchor(radius: usize, anchor_shift: usize) -> GadgetComplex {
    let mut gadgets = vec![Gadget {
        path: String::new(),
        dist: 0,
        parent: None,
        child_index: 0,
        children: [None, None],
        green: None,
        green_anchor: false,
    }];

    // Breadth-first over the gadget tree: fill every missing neighbor slot
    // of gadgets strictly inside the radius.
    let mut head = 0;
    while head < gadgets.len() {
        let g = head;
        head += 1;
        if gadgets[g].dist >= radius {
            continue;
        }
        if gadgets[g].parent.is_none() {
            let p = gadgets.len();
            gadgets.push(Gadget {
                path: format!("{}p", gadgets[g].path),
                dist: gadgets[g].dist + 1,
                parent: None,
                child_index: 0,
                children: [Some(g), None],
                green: None,
                green_anchor: false,
            });
            gadgets[g].parent = Some(p);
            gadgets[g].child_index = 0;
        }
        if gadgets[g].green.is_none() {
            let w = gadgets.len();
            gadgets.push(Gadget {
                path: format!("{}g", gadgets[g].path),
                dist: gadgets[g].dist + 1,
                parent: None,
                child_index: 0,
                children: [None, None],
                green: Some(g),
                green_anchor: false,
            });
            gadgets[g].green = Some(w);
            gadgets[g].green_anchor = true;
        }
        for c in 0..2 {
            if gadgets[g].children[c].is_none() {
                let ch = gadgets.len();
                gadgets.push(Gadget {
                    path: format!("{}{c}", gadgets[g].path),
                    dist: gadgets[g].dist + 1,
                    parent: Some(g),
                    child_index: c as u8,
                    children: [None, None],
                    green: None,
                    green_anchor: false,
                });
                gadgets[g].children[c] = Some(ch);
            }
        }
    }

    let n_nodes = gadgets.len() * SLOTS_PER_GADGET;
    let mut arcs = Vec::new();
    let mut red_out = vec![None; n_nodes];
    let mut red_in = vec![None; n_nodes];
    let mut green_out = vec![None; n_nodes];
    let mut green_in = vec![None; n_nodes];

    for (g, gd) in gadgets.iter().enumerate() {
        // internal: the black cycle and the blue attachments
        for i in 0..4 {
            arcs.push((node_id(g, i), node_id(g, (i + 1) % 4), ArcColor::Internal));
        }
        for j in 0..2 {
            arcs.push((node_id(g, 4 + j), node_id(g, j), ArcColor::Internal));
            arcs.push((node_id(g, 4 + j), node_id(g, j + 2), ArcColor::Internal));
        }
        // red: black b_i feeds child (i mod 2) at blue (i div 2)
        for i in 0..4 {
            if let Some(ch) = gd.children[i % 2] {
                let from = node_id(g, i);
                let to = node_id(ch, 4 + i / 2);
                arcs.push((from, to, ArcColor::Red));
                red_out[from as usize] = Some(to);
                red_in[to as usize] = Some(from);
            }
        }
        // green: the anchored directed 4-cycle through both blue pairs
        if gd.green_anchor {
            if let Some(w) = gd.green {
                let cycle = [
                    node_id(g, 4),
                    node_id(w, 4),
                    node_id(g, 5),
                    node_id(w, 5),
                ];
                for t in 0..4 {
                    let (from, to) = (cycle[t], cycle[(t + 1) % 4]);
                    arcs.push((from, to, ArcColor::Green));
                    green_out[from as usize] = Some(to);
                    green_in[to as usize] = Some(from);
                }
            }
        }
    }

    arcs.sort_unstable();
    let arc_set = arcs.iter().copied().collect();
    GadgetComplex {
        radius,
        gadgets,
        arcs,
        arc_set,
        red_out,
        red_in,
        green_out,
        green_in,
    }
}

impl GadgetComplex {
    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn gadget_count(&self) -> usize {
        self.gadgets.len()
    }

    pub fn node_count(&self) -> usize {
        self.gadgets.len() * SLOTS_PER_GADGET
    }

    pub fn gadget(&self, g: usize) -> &Gadget {
        &self.gadgets[g]
    }

    pub fn gadgets(&self) -> &[Gadget] {
        &self.gadgets
    }

    pub fn arcs(&self) -> &[(u32, u32, ArcColor)] {
        &self.arcs
    }

    pub fn has_arc(&self, from: u32, to: u32, color: ArcColor) -> bool {
        self.arc_set.contains(&(from, to, color))
    }

    pub(crate) fn red_out(&self, node: u32) -> Option<u32> {
        self.red_out[node as usize]
    }

    pub(crate) fn red_in(&self, node: u32) -> Option<u32> {
        self.red_in[node as usize]
    }

    pub(crate) fn green_out(&self, node: u32) -> Option<u32> {
        self.green_out[node as usize]
    }

    pub(crate) fn green_in(&self, node: u32) -> Option<u32> {
        self.green_in[node as usize]
    }

    /// All four tree neighbors present in the complex, ascending.
    pub fn neighbors(&self, g: usize) -> Vec<usize> {
        let gd = &self.gadgets[g];
        let mut out: Vec<usize> = gd
            .parent
            .into_iter()
            .chain(gd.green)
            .chain(gd.children[0])
            .chain(gd.children[1])
            .collect();
        out.sort_unstable();
        out
    }

    /// A gadget is interior when all four neighbors are present.
    pub fn is_interior(&self, g: usize) -> bool {
        let gd = &self.gadgets[g];
        gd.parent.is_some() && gd.green.is_some() && gd.children.iter().all(|c| c.is_some())
    }

    /// The two gadgets reached by forward red arcs.
    pub fn children(&self, g: usize) -> Result<[usize; 2]> {
        let gd = &self.gadgets[g];
        match (gd.children[0], gd.children[1]) {
            (Some(a), Some(b)) => Ok([a, b]),
            _ => Err(Error::BadParams(format!(
                "gadget {g} has children outside the radius-{} complex",
                self.radius
            ))),
        }
    }

    /// Children of children, in child order.
    pub fn grandchildren(&self, g: usize) -> Result<[usize; 4]> {
        let [c0, c1] = self.children(g)?;
        let [a, b] = self.children(c0)?;
        let [c, d] = self.children(c1)?;
        Ok([a, b, c, d])
    }

    /// Gadget-tree distances from a set of sources.
    pub fn gadget_distances(&self, sources: &[usize]) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.gadgets.len()];
        let mut queue = std::collections::VecDeque::new();
        for &s in sources {
            dist[s] = 0;
            queue.push_back(s);
        }
        while let Some(g) = queue.pop_front() {
            for n in self.neighbors(g) {
                if dist[n] == usize::MAX {
                    dist[n] = dist[g] + 1;
                    queue.push_back(n);
                }
            }
        }
        dist
    }

    /// Human-readable node name, e.g. `base/b0` or `0g/u1`.
    pub fn node_name(&self, node: u32) -> String {
        let g = gadget_of(node);
        let path = if self.gadgets[g].path.is_empty() {
            "base"
        } else {
            &self.gadgets[g].path
        };
        format!("{path}/{}", SLOT_NAMES[slot_of(node)])
    }

    /// DOT export for visual inspection.
    pub fn to_dot(&self) -> String {
        use std::fmt::Write;
        let mut out = String::from("digraph sigma {\n");
        for node in 0..self.node_count() as u32 {
            let color = match node_color(node) {
                NodeColor::Black => "black",
                NodeColor::Blue => "blue",
            };
            let g = gadget_of(node);
            writeln!(
                out,
                "  \"{}\" [color={color} fontcolor={color} group=\"g{g}\"];",
                self.node_name(node)
            )
            .unwrap();
        }
        for &(from, to, color) in &self.arcs {
            let c = match color {
                ArcColor::Internal => "black",
                ArcColor::Red => "red",
                ArcColor::Green => "green",
            };
            writeln!(
                out,
                "  \"{}\" -> \"{}\" [color={c}];",
                self.node_name(from),
                self.node_name(to)
            )
            .unwrap();
        }
        out.push_str("}\n");
        out
    }
}

/// Serializable view of the complex: gadget membership, node colors, arcs.
#[derive(Serialize)]
pub struct ComplexJson {
    pub radius: usize,
    pub gadgets: Vec<GadgetJson>,
    pub nodes: Vec<NodeJson>,
    pub arcs: Vec<ArcJson>,
}

#[derive(Serialize)]
pub struct GadgetJson {
    pub id: usize,
    pub path: String,
    pub dist: usize,
    pub parent: Option<usize>,
    pub children: [Option<usize>; 2],
    pub green: Option<usize>,
}

#[derive(Serialize)]
pub struct NodeJson {
    pub id: u32,
    pub gadget: usize,
    pub slot: &'static str,
    pub color: NodeColor,
}

#[derive(Serialize)]
pub struct ArcJson {
    pub from: u32,
    pub to: u32,
    pub color: ArcColor,
}

impl GadgetComplex {
    pub fn to_json_view(&self) -> ComplexJson {
        ComplexJson {
            radius: self.radius,
            gadgets: self
                .gadgets
                .iter()
                .enumerate()
                .map(|(id, g)| GadgetJson {
                    id,
                    path: if g.path.is_empty() { "base".into() } else { g.path.clone() },
                    dist: g.dist,
                    parent: g.parent,
                    children: g.children,
                    green: g.green,
                })
                .collect(),
            nodes: (0..self.node_count() as u32)
                .map(|id| NodeJson {
                    id,
                    gadget: gadget_of(id),
                    slot: SLOT_NAMES[slot_of(id)],
                    color: node_color(id),
                })
                .collect(),
            arcs: self
                .arcs
                .iter()
                .map(|&(from, to, color)| ArcJson { from, to, color })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn expected_gadget_count(radius: usize) -> usize {
        // ball sizes in the 4-regular tree: 1 + 4 * (3^R - 1) / 2
        if radius == 0 {
            1
        } else {
            1 + 4 * (3usize.pow(radius as u32) - 1) / 2
        }
    }

    #[test]
    fn counts_for_small_radii() {
        let c0 = build_sigma(0);
        assert_eq!(c0.gadget_count(), 1);
        assert_eq!(c0.node_count(), 6);
        assert_eq!(c0.arcs().len(), 8);

        let c1 = build_sigma(1);
        assert_eq!(c1.gadget_count(), 5);
        assert_eq!(c1.node_count(), 30);
        // 5 * 8 internal + 4 red to children + 2 red from parent + 4 green
        assert_eq!(c1.arcs().len(), 50);

        for r in 0..=3 {
            assert_eq!(build_sigma(r).gadget_count(), expected_gadget_count(r));
        }
    }

    #[test]
    fn attachment_arc_counts() {
        let c = build_sigma(1);
        let cross = |a: usize, b: usize| -> Vec<ArcColor> {
            c.arcs()
                .iter()
                .filter(|&&(from, to, _)| {
                    (gadget_of(from) == a && gadget_of(to) == b)
                        || (gadget_of(from) == b && gadget_of(to) == a)
                })
                .map(|&(_, _, color)| color)
                .collect()
        };
        let base = &c.gadgets[0];
        for ch in base.children.iter().flatten() {
            assert_eq!(cross(0, *ch), vec![ArcColor::Red; 2]);
        }
        assert_eq!(cross(0, base.parent.unwrap()), vec![ArcColor::Red; 2]);
        assert_eq!(cross(0, base.green.unwrap()), vec![ArcColor::Green; 4]);
    }

    #[test]
    fn red_and_green_degrees() {
        let c = build_sigma(2);
        for g in 0..c.gadget_count() {
            let gd = c.gadget(g);
            for i in 0..4 {
                let n = node_id(g, i);
                // each black sends exactly one red arc when its child exists
                assert_eq!(c.red_out(n).is_some(), gd.children[i % 2].is_some());
                assert!(c.red_in(n).is_none());
            }
            for j in 4..6 {
                let n = node_id(g, j);
                assert_eq!(c.red_in(n).is_some(), gd.parent.is_some());
                assert_eq!(c.green_out(n).is_some(), gd.green.is_some());
                assert_eq!(c.green_in(n).is_some(), gd.green.is_some());
            }
        }
    }

    #[test]
    fn interior_iff_within_radius_minus_one() {
        let c = build_sigma(3);
        for g in 0..c.gadget_count() {
            assert_eq!(c.is_interior(g), c.gadget(g).dist <= 2, "gadget {g}");
        }
    }

    #[test]
    fn children_and_grandchildren() {
        let c = build_sigma(3);
        let kids = c.children(0).unwrap();
        assert_eq!(kids.len(), 2);
        let grand = c.grandchildren(0).unwrap();
        assert_eq!(grand.len(), 4);
        let mut uniq = grand.to_vec();
        uniq.sort_unstable();
        uniq.dedup();
        assert_eq!(uniq.len(), 4);
        // antisymmetry: no gadget is its own descendant
        for g in 0..c.gadget_count() {
            if let Ok(kids) = c.children(g) {
                assert!(!kids.contains(&g));
                if let Ok(grand) = c.grandchildren(g) {
                    assert!(!grand.contains(&g));
                }
            }
        }
    }

    #[test]
    fn quotient_is_a_tree_ball() {
        for radius in 1..=3 {
            let c = build_sigma(radius);
            // contract gadgets: unique unordered pairs joined by any arc
            let mut edges = std::collections::HashSet::new();
            for &(from, to, _) in c.arcs() {
                let (a, b) = (gadget_of(from), gadget_of(to));
                if a != b {
                    edges.insert((a.min(b), a.max(b)));
                }
            }
            // tree on the gadget set
            assert_eq!(edges.len(), c.gadget_count() - 1);
            let dist = c.gadget_distances(&[0]);
            assert!(dist.iter().all(|&d| d != usize::MAX));
            // 4-regular ball: interior degree 4, every leaf at the radius
            for g in 0..c.gadget_count() {
                let deg = c.neighbors(g).len();
                assert_eq!(c.gadget(g).dist, dist[g]);
                if dist[g] < radius {
                    assert_eq!(deg, 4);
                } else {
                    assert_eq!(deg, 1);
                }
            }
        }
    }

    #[test]
    fn internal_components_are_gadgets() {
        // connected components of the internal-arc subgraph are exactly the
        // 6-node gadget blocks, so any color automorphism maps gadgets to
        // gadgets
        let c = build_sigma(2);
        let n = c.node_count();
        let mut comp = (0..n).collect::<Vec<_>>();
        fn find(comp: &mut Vec<usize>, x: usize) -> usize {
            if comp[x] != x {
                let r = find(comp, comp[x]);
                comp[x] = r;
            }
            comp[x]
        }
        for &(from, to, color) in c.arcs() {
            if color == ArcColor::Internal {
                let (a, b) = (find(&mut comp, from as usize), find(&mut comp, to as usize));
                comp[a] = b;
            }
        }
        for node in 0..n {
            let root = find(&mut comp, node);
            let same: Vec<usize> = (0..n).filter(|&m| find(&mut comp, m) == root).collect();
            let g = gadget_of(node as u32);
            let want: Vec<usize> = (0..SLOTS_PER_GADGET).map(|s| node_id(g, s) as usize).collect();
            assert_eq!(same, want);
        }
    }

    #[test]
    fn dot_export_lists_every_node_and_arc() {
        let c = build_sigma(1);
        let dot = c.to_dot();
        assert_eq!(dot.matches(" -> ").count(), c.arcs().len());
        assert!(dot.contains("\"base/b0\""));
        assert!(dot.contains("color=green"));
        assert!(dot.contains("color=red"));
    }
}
