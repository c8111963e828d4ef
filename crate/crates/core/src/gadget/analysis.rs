//! Local structure analyses of the gadget complex: what maps fixing a
//! gadget or swapping a matched pair can do near it, searched exhaustively
//! over the candidate space described in [`super::search`].

use serde::Serialize;

use super::search::{AutoSearch, ColorAutomorphism};
use super::{build_sigma_with_anchor, GadgetComplex};
use crate::exec::run_indexed;
use crate::pk::SearchOptions;
use crate::{Error, Result};

/// Outcome of enumerating all maps that fix one gadget setwise, split by
/// whether they swap or fix its blue pair.
#[derive(Clone, Debug, Serialize)]
pub struct BlueSwapReport {
    pub gadget: usize,
    /// Maps swapping the blue pair.
    pub swap_maps: u64,
    /// Every swap map cycles the gadget's blacks in a single 4-cycle.
    pub swap_black_four_cycle: bool,
    /// Every swap map exchanges the two child gadgets.
    pub swap_exchanges_children: bool,
    /// Every swap map induces a permutation of order 4 on the grandchildren.
    pub swap_grandchildren_order_four: bool,
    /// Maps fixing the blue pair pointwise.
    pub fix_maps: u64,
    /// Black images of `b0` observed among blue-fixing maps (rotation
    /// amounts; 0 fixes the cycle pointwise, 2 is the half turn).
    pub fix_black_rotations: Vec<u8>,
    /// The identity shows up in the blue-fixing branch.
    pub identity_found: bool,
}

/// All gadgets whose children and grandchildren are present, i.e. where the
/// downward 2-neighborhood needed by [`local_blue_swap_analysis`] exists.
pub fn analyzable_gadgets(cx: &GadgetComplex) -> Vec<usize> {
    (0..cx.gadget_count())
        .filter(|&g| cx.grandchildren(g).is_ok())
        .collect()
}

/// Enumerate every color-preserving map of the downward 2-neighborhood of
/// `g` (the gadget, its children and its grandchildren) that fixes `g`
/// setwise, and report the structure forced on the two branches.
pub fn local_blue_swap_analysis(cx: &GadgetComplex, g: usize) -> Result<BlueSwapReport> {
    let children = cx.children(g)?;
    let grandchildren = cx.grandchildren(g)?;
    let mut domain = vec![false; cx.gadget_count()];
    domain[g] = true;
    for c in children {
        domain[c] = true;
    }
    for gc in grandchildren {
        domain[gc] = true;
    }

    let search = AutoSearch::new(cx, cx, domain, g);
    let swap_seeds: Vec<(usize, [u8; 6])> = search
        .local_maps
        .iter()
        .filter(|m| m[4] == 5)
        .map(|&m| (g, m))
        .collect();
    let fix_seeds: Vec<(usize, [u8; 6])> = search
        .local_maps
        .iter()
        .filter(|m| m[4] == 4)
        .map(|&m| (g, m))
        .collect();

    let swaps = search.run(&swap_seeds);
    let fixes = search.run(&fix_seeds);
    debug_assert!(swaps.exhaustive && fixes.exhaustive);

    let mut report = BlueSwapReport {
        gadget: g,
        swap_maps: swaps.found.len() as u64,
        swap_black_four_cycle: true,
        swap_exchanges_children: true,
        swap_grandchildren_order_four: true,
        fix_maps: fixes.found.len() as u64,
        fix_black_rotations: Vec::new(),
        identity_found: false,
    };
    for auto in &swaps.found {
        if auto.black_cycle_type(g).as_deref() != Some(&[4]) {
            report.swap_black_four_cycle = false;
        }
        if auto.gadget_image(children[0]) != Some(children[1])
            || auto.gadget_image(children[1]) != Some(children[0])
        {
            report.swap_exchanges_children = false;
        }
        if auto.induced_order_on(&grandchildren) != Some(4) {
            report.swap_grandchildren_order_four = false;
        }
    }
    for auto in &fixes.found {
        let (_, m) = (auto.gadget_image(g).unwrap(), ());
        let rot = auto
            .black_cycle_type(g)
            .map(|_| auto.node_image(super::node_id(g, 0)).unwrap())
            .map(|img| super::slot_of(img) as u8)
            .unwrap();
        if !report.fix_black_rotations.contains(&rot) {
            report.fix_black_rotations.push(rot);
        }
        if auto.is_identity() {
            report.identity_found = true;
        }
        let _ = m;
    }
    report.fix_black_rotations.sort_unstable();
    Ok(report)
}

/// Outcome of enumerating all maps swapping a green-matched pair.
#[derive(Clone, Debug, Serialize)]
pub struct GreenSwapReport {
    pub pair: (usize, usize),
    pub swap_maps: u64,
    /// Every swap map sends the pair to itself with the endpoints exchanged.
    pub swap_is_clean: bool,
    /// Every swap map induces a permutation of order 4 on the six gadgets
    /// at distance 1 from the pair.
    pub distance_one_order_four: bool,
}

/// Enumerate every color-preserving map of the 1-neighborhood of a green
/// pair that swaps its endpoints.
pub fn green_swap_analysis(cx: &GadgetComplex, a: usize) -> Result<GreenSwapReport> {
    let b = cx
        .gadget(a)
        .green
        .ok_or_else(|| Error::BadParams(format!("gadget {a} has no green partner in range")))?;
    if cx.neighbors(a).len() != 4 || cx.neighbors(b).len() != 4 {
        return Err(Error::BadParams(
            "green pair must be interior for the swap analysis".into(),
        ));
    }
    let mut distance_one: Vec<usize> = cx
        .neighbors(a)
        .into_iter()
        .chain(cx.neighbors(b))
        .filter(|&x| x != a && x != b)
        .collect();
    distance_one.sort_unstable();
    let mut domain = vec![false; cx.gadget_count()];
    domain[a] = true;
    domain[b] = true;
    for &x in &distance_one {
        domain[x] = true;
    }

    let search = AutoSearch::new(cx, cx, domain, a);
    let seeds: Vec<(usize, [u8; 6])> = search.local_maps.iter().map(|&m| (b, m)).collect();
    let outcome = search.run(&seeds);
    debug_assert!(outcome.exhaustive);

    let mut report = GreenSwapReport {
        pair: (a, b),
        swap_maps: outcome.found.len() as u64,
        swap_is_clean: true,
        distance_one_order_four: true,
    };
    for auto in &outcome.found {
        if auto.gadget_image(a) != Some(b) || auto.gadget_image(b) != Some(a) {
            report.swap_is_clean = false;
        }
        if auto.induced_order_on(&distance_one) != Some(4) {
            report.distance_one_order_four = false;
        }
    }
    Ok(report)
}

/// Count color-preserving maps of the 1-neighborhood of a red arc pair that
/// exchange parent and child. Red arcs are directed, so none exist.
pub fn red_pair_swap_count(cx: &GadgetComplex, parent: usize, child: usize) -> Result<u64> {
    if cx.gadget(child).parent != Some(parent) {
        return Err(Error::BadParams(format!(
            "gadget {child} is not a red child of {parent}"
        )));
    }
    let mut domain = vec![false; cx.gadget_count()];
    domain[parent] = true;
    domain[child] = true;
    for x in cx.neighbors(parent).into_iter().chain(cx.neighbors(child)) {
        domain[x] = true;
    }
    let mut search = AutoSearch::new(cx, cx, domain, child);
    let mut pinned = vec![None; cx.gadget_count()];
    pinned[parent] = Some(child);
    search.pinned = pinned;
    let seeds: Vec<(usize, [u8; 6])> = search.local_maps.iter().map(|&m| (parent, m)).collect();
    let outcome = search.run(&seeds);
    debug_assert!(outcome.exhaustive);
    Ok(outcome.found.len() as u64)
}

/// One torsion case: how many involution candidates a seeded search finds.
#[derive(Clone, Debug, Serialize)]
pub struct TorsionCase {
    pub seeds: u64,
    pub expanded: u64,
    pub involutions: u64,
}

/// Search for order-2 shadows among interior-defined color maps: maps that
/// fix the base gadget and swap its blue pair (the vertex case), and maps
/// that swap the base green pair (the edge case).
#[derive(Clone, Debug, Serialize)]
pub struct TorsionReport {
    pub radius: usize,
    pub vertex_case: TorsionCase,
    pub edge_case: TorsionCase,
    pub exhaustive: bool,
}

pub fn torsion_search(cx: &GadgetComplex, opts: &SearchOptions) -> Result<TorsionReport> {
    if cx.radius() < 3 {
        return Err(Error::BadParams(
            "torsion search needs gadget radius >= 3".into(),
        ));
    }

    // vertex case: involutions fixing the base gadget and swapping its blues
    let full_domain = vec![true; cx.gadget_count()];
    let probe = AutoSearch::new(cx, cx, full_domain.clone(), 0);
    let vertex_seeds: Vec<(usize, [u8; 6])> = probe
        .local_maps
        .iter()
        .filter(|m| m[4] == 5)
        .map(|&m| (0, m))
        .collect();

    // edge case: involutions swapping the base green pair, on the pair ball
    let partner = cx.gadget(0).green.expect("radius >= 3 has a green partner");
    let pair_dist = cx.gadget_distances(&[0, partner]);
    let pair_domain: Vec<bool> = (0..cx.gadget_count())
        .map(|g| pair_dist[g] + 1 <= cx.radius())
        .collect();
    let edge_seeds: Vec<(usize, [u8; 6])> = probe.local_maps.iter().map(|&m| (partner, m)).collect();

    let run_case = |domain: &[bool], seeds: &[(usize, [u8; 6])]| -> TorsionCase {
        let outcomes = run_indexed(opts.threads, seeds.len(), |i| {
            let mut search = AutoSearch::new(cx, cx, domain.to_vec(), 0);
            search.involution = true;
            search.budget = opts.budget;
            search.run(&seeds[i..=i])
        });
        let mut case = TorsionCase {
            seeds: seeds.len() as u64,
            expanded: 0,
            involutions: 0,
        };
        let mut aborted = false;
        for o in &outcomes {
            case.expanded += o.expanded;
            aborted |= !o.exhaustive;
            case.involutions += o.found.iter().filter(|a| !a.is_identity()).count() as u64;
        }
        if aborted {
            case.expanded = opts.budget;
            case.involutions = 0;
        }
        case
    };

    let vertex_case = run_case(&full_domain, &vertex_seeds);
    let vertex_ok = vertex_case.expanded < opts.budget;
    let edge_case = run_case(&pair_domain, &edge_seeds);
    let edge_ok = edge_case.expanded < opts.budget;

    Ok(TorsionReport {
        radius: cx.radius(),
        vertex_case,
        edge_case,
        exhaustive: vertex_ok && edge_ok,
    })
}

/// Build an explicit color-preserving map of the complex sending `g1` to
/// `g2`, defined on the gadget ball around `g1` that keeps its image inside
/// the complex. Both gadgets must be interior.
pub fn transitivity_witness(
    cx: &GadgetComplex,
    g1: usize,
    g2: usize,
) -> Result<ColorAutomorphism> {
    let r = cx.radius();
    if cx.gadget(g1).dist + 1 > r || cx.gadget(g2).dist + 1 > r {
        return Err(Error::BadParams(
            "transitivity witness needs interior gadgets".into(),
        ));
    }
    let reach = r - cx.gadget(g2).dist;
    let dist = cx.gadget_distances(&[g1]);
    let domain: Vec<bool> = (0..cx.gadget_count()).map(|g| dist[g] <= reach).collect();
    if g1 == g2 {
        let auto = ColorAutomorphism::identity(cx, &domain);
        auto.verify(cx, cx)?;
        return Ok(auto);
    }
    let mut search = AutoSearch::new(cx, cx, domain, g1);
    search.find_first = true;
    let seeds: Vec<(usize, [u8; 6])> = search.local_maps.iter().map(|&m| (g2, m)).collect();
    let outcome = search.run(&seeds);
    outcome.found.into_iter().next().ok_or(Error::NoWitness)
}

/// The internal blue attachment can be anchored at either black pair of the
/// directed cycle; the two readings give isomorphic complexes. This builds
/// both and exhibits an explicit isomorphism.
pub fn anchoring_isomorphism_check(radius: usize) -> Result<ColorAutomorphism> {
    let standard = build_sigma_with_anchor(radius, 0);
    let variant = build_sigma_with_anchor(radius, 1);
    let domain = vec![true; variant.gadget_count()];
    let mut search = AutoSearch::new(&variant, &standard, domain, 0);
    search.find_first = true;
    if search.local_maps.is_empty() {
        return Err(Error::NoWitness);
    }
    let seeds: Vec<(usize, [u8; 6])> = search.local_maps.iter().map(|&m| (0, m)).collect();
    let outcome = search.run(&seeds);
    outcome.found.into_iter().next().ok_or(Error::NoWitness)
}
