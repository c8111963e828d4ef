//! Constructors for the explicit inversions the verification experiments
//! need: the odometer inversion (a single cycle on every sphere), the
//! truncated family `g_N` (full cycles below level `N`, two parallel cycles
//! from level `N` on), and the two surgery constructions that produce
//! finite-order inversions from them.

use crate::portrait::Portrait;
use crate::tree::{self, Address, Side};
use crate::{Error, Result};

/// The per-level labeling that realizes the odometer inversion as
/// `label -> label + 1 (mod 2^(n+1))` on every sphere.
///
/// Conventions: the endpoints get labels 0 (`L:`) and 1 (`R:`); the bit-0
/// child of a vertex labeled `j` at level `n-1` gets label `j`, the bit-1
/// child gets `j + 2^n`. Labels are then parent-compatible: reducing a
/// level-`n` label mod `2^n` gives the parent's label.
#[derive(Clone, Copy, Debug, Default)]
pub struct OdometerLabeling;

impl OdometerLabeling {
    pub fn label(a: &Address) -> u64 {
        let side = match a.side {
            Side::L => 0u64,
            Side::R => 1u64,
        };
        a.bits
            .iter()
            .enumerate()
            .fold(side, |acc, (i, &b)| acc | ((b as u64) << (i + 1)))
    }

    pub fn address_with_label(level: usize, label: u64) -> Address {
        debug_assert!(label < (1 << (level + 1)));
        let side = if label & 1 == 0 { Side::L } else { Side::R };
        let bits: Vec<u8> = (1..=level).map(|i| ((label >> i) & 1) as u8).collect();
        Address::new(side, bits)
    }
}

/// The odometer inversion on `B(e,D)`: a single cycle of length `2^(n+1)`
/// on every sphere `S(e,n)`, realized as `+1` on the odometer labels.
pub fn good_inversion(depth: usize) -> Portrait {
    Portrait::from_fn(depth, |a| {
        let n = a.level();
        let m = 1u64 << (n + 1);
        OdometerLabeling::address_with_label(n, (OdometerLabeling::label(a) + 1) % m)
    })
    .expect("odometer construction is parent-compatible")
}

/// The inversion `g_N`: full `2^(n+1)`-cycles on spheres below level `N`;
/// from level `N` on, each sphere splits into two classes (by the level-`N`
/// ancestor's high label bit) and each class is a single `2^n`-cycle. The
/// sphere orders are therefore `2, 4, ..., 2^N` up to level `N-1`, then
/// `2^N, 2^(N+1), ...` — exactly `2^N` at level `N` and still unbounded in
/// the depth, so the truncation is consistent with an infinite-order
/// automorphism.
pub fn truncated_good_inversion(n_param: usize, depth: usize) -> Result<Portrait> {
    if n_param < 1 {
        return Err(Error::BadParams("truncation parameter must be >= 1".into()));
    }
    if depth < n_param {
        return Err(Error::BadParams(format!(
            "depth {depth} is smaller than truncation parameter {n_param}"
        )));
    }
    let big_n = n_param;
    Portrait::from_fn(depth, |a| {
        let n = a.level();
        let x = OdometerLabeling::label(a);
        let y = if n < big_n {
            (x + 1) % (1 << (n + 1))
        } else {
            // Split off the class bit (bit N); run the odometer on the
            // remaining n bits (low N bits plus the bits above N).
            let low_mask = (1u64 << big_n) - 1;
            let class = (x >> big_n) & 1;
            let packed = (x & low_mask) | ((x >> (big_n + 1)) << big_n);
            let stepped = (packed + 1) % (1 << n);
            (stepped & low_mask) | (class << big_n) | ((stepped >> big_n) << (big_n + 1))
        };
        OdometerLabeling::address_with_label(n, y)
    })
}

/// Half-tree surgery: from an inversion `g`, build `x` equal to `g` on the
/// left half-tree and `g^{-1}` on the right half-tree. The result is an
/// involution inverting the root edge.
pub fn half_tree_surgery(g: &Portrait) -> Result<Portrait> {
    if g.edge_action() != crate::portrait::EdgeAction::Swap {
        return Err(Error::NotAnInversion);
    }
    let ginv = g.inverse();
    Portrait::from_fn(g.depth(), |a| match a.side {
        Side::L => g.apply(a),
        Side::R => ginv.apply(a),
    })
}

/// Partition of the deep part of the truncation into the connected
/// components of `B(e,D)` minus `B(e,N-2)`: one component per level-`(N-1)`
/// vertex, indexed by that vertex's odometer label.
#[derive(Clone, Debug)]
pub struct ComponentDecomposition {
    n_param: usize,
    depth: usize,
    component: Vec<Option<u32>>,
}

impl ComponentDecomposition {
    pub fn n_param(&self) -> usize {
        self.n_param
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn component_count(&self) -> usize {
        1 << self.n_param
    }

    /// Component index of an address, or `None` for addresses of level
    /// `< N-1` (the removed ball).
    pub fn component_of(&self, a: &Address) -> Option<u32> {
        self.component.get(a.index()).copied().flatten()
    }

    pub fn component_of_index(&self, i: usize) -> Option<u32> {
        self.component[i]
    }

    /// All addresses of component `i`, in canonical order.
    pub fn members(&self, i: u32) -> Vec<Address> {
        self.component
            .iter()
            .enumerate()
            .filter(|(_, c)| **c == Some(i))
            .map(|(v, _)| tree::address_at(v))
            .collect()
    }
}

/// Decompose `B(e,D)` minus `B(e,N-2)` into its `2^N` connected components.
/// The component of an address of level `>= N-1` is determined by its
/// level-`(N-1)` ancestor.
pub fn decompose_components(n_param: usize, depth: usize) -> Result<ComponentDecomposition> {
    if n_param < 2 {
        return Err(Error::BadParams(
            "component decomposition needs N >= 2 (N = 1 is half-tree surgery)".into(),
        ));
    }
    if depth < n_param {
        return Err(Error::BadParams(format!(
            "depth {depth} is smaller than N = {n_param}"
        )));
    }
    let mut component = vec![None; tree::ball_size(depth)];
    for i in tree::level_offset(n_param - 1)..tree::ball_size(depth) {
        let mut anc = i;
        while tree::level_of_index(anc) > n_param - 1 {
            anc = tree::parent_index(anc);
        }
        component[i] = Some(OdometerLabeling::label(&tree::address_at(anc)) as u32);
    }
    Ok(ComponentDecomposition {
        n_param,
        depth,
        component,
    })
}

/// Component surgery: given `g_N` with full sphere orders below level `N`
/// and order exactly `2^N` at level `N`, build the inversion `x` equal to
/// `g^(1 - 2^N)` on the component containing the first vertex of the
/// `g`-orbit on `S(e,N-1)` and `g` elsewhere. `x` has order exactly `2^N`
/// on the whole truncation and agrees with `g` on `B(e,N)`.
///
/// `N = 1` degenerates to half-tree surgery (the removed ball would be
/// empty; the components are the two half-trees).
pub fn component_surgery(g: &Portrait, n_param: usize) -> Result<Portrait> {
    if n_param < 1 {
        return Err(Error::BadParams("surgery parameter must be >= 1".into()));
    }
    if g.edge_action() != crate::portrait::EdgeAction::Swap {
        return Err(Error::NotAnInversion);
    }
    if g.depth() < n_param {
        return Err(Error::BadParams(format!(
            "depth {} is smaller than N = {n_param}",
            g.depth()
        )));
    }
    for n in 0..n_param {
        let want = 1u64 << (n + 1);
        let got = g.sphere_order(n);
        if got != want {
            return Err(Error::HypothesisViolated {
                level: n,
                got,
                expected: want,
            });
        }
    }
    let want = 1u64 << n_param;
    let got = g.sphere_order(n_param);
    if got != want {
        return Err(Error::HypothesisViolated {
            level: n_param,
            got,
            expected: want,
        });
    }
    if n_param == 1 {
        return half_tree_surgery(g);
    }

    // Orbit-based component indexing: v_0 is the canonical first vertex of
    // S(e,N-1) and v_{i+1} = g(v_i). For level >= N-1 the component is the
    // orbit position of the level-(N-1) ancestor.
    let lo = tree::level_offset(n_param - 1);
    let hi = tree::level_offset(n_param);
    let mut orbit_pos = vec![u32::MAX; hi - lo];
    let mut v = lo;
    for i in 0..(hi - lo) as u32 {
        debug_assert_eq!(orbit_pos[v - lo], u32::MAX);
        orbit_pos[v - lo] = i;
        v = g.apply_index(v);
    }

    let patch = g.power(1 - (1i64 << n_param));
    Portrait::from_fn(g.depth(), |a| {
        let mut anc = a.index();
        if a.level() >= n_param - 1 {
            while tree::level_of_index(anc) > n_param - 1 {
                anc = tree::parent_index(anc);
            }
            if orbit_pos[anc - lo] == 0 {
                return patch.apply(a);
            }
        }
        g.apply(a)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::portrait::EdgeAction;
    use crate::tree::{address_at, ball_size, sphere};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Independent cycle-decomposition oracle: orbit lengths by direct
    /// iteration over addresses.
    fn cycle_lengths_on_sphere(h: &Portrait, n: usize) -> Vec<u64> {
        let verts = sphere(n);
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        for v in &verts {
            if seen.contains(v) {
                continue;
            }
            let mut len = 0u64;
            let mut w = v.clone();
            while seen.insert(w.clone()) {
                len += 1;
                w = h.apply(&w);
            }
            out.push(len);
        }
        out.sort_unstable_by(|a, b| b.cmp(a));
        out
    }

    #[test]
    fn labeling_conventions() {
        assert_eq!(OdometerLabeling::label(&"L:".parse().unwrap()), 0);
        assert_eq!(OdometerLabeling::label(&"R:".parse().unwrap()), 1);
        assert_eq!(OdometerLabeling::label(&"L:0".parse().unwrap()), 0);
        assert_eq!(OdometerLabeling::label(&"R:0".parse().unwrap()), 1);
        assert_eq!(OdometerLabeling::label(&"L:1".parse().unwrap()), 2);
        assert_eq!(OdometerLabeling::label(&"R:1".parse().unwrap()), 3);
        for i in 0..ball_size(6) {
            let a = address_at(i);
            let n = a.level();
            let x = OdometerLabeling::label(&a);
            assert_eq!(OdometerLabeling::address_with_label(n, x), a);
            if let Some(p) = a.parent() {
                // parent compatibility of the labeling
                assert_eq!(OdometerLabeling::label(&p), x % (1 << n));
                // child convention: bit-0 child keeps the label, bit-1 adds 2^(n)
                let c0 = OdometerLabeling::label(&a.child(0));
                let c1 = OdometerLabeling::label(&a.child(1));
                assert_eq!(c0, x);
                assert_eq!(c1, x + (1 << (n + 1)));
            }
        }
    }

    #[test]
    fn good_inversion_depth_zero_swaps() {
        let g = good_inversion(0);
        assert_eq!(g.edge_action(), EdgeAction::Swap);
        assert_eq!(g.apply(&"L:".parse().unwrap()), "R:".parse().unwrap());
        assert_eq!(g.apply(&"R:".parse().unwrap()), "L:".parse().unwrap());
    }

    #[test]
    fn good_inversion_level_one_cycle() {
        let g = good_inversion(1);
        let hop = |s: &str| g.apply(&s.parse().unwrap()).to_string();
        assert_eq!(hop("L:0"), "R:0");
        assert_eq!(hop("R:0"), "L:1");
        assert_eq!(hop("L:1"), "R:1");
        assert_eq!(hop("R:1"), "L:0");
        assert_eq!(cycle_lengths_on_sphere(&g, 1), vec![4]);
    }

    #[test]
    fn good_inversion_single_cycles() {
        let g = good_inversion(6);
        for n in 0..=6 {
            assert_eq!(g.sphere_cycle_type(n), vec![1 << (n + 1)]);
            assert_eq!(g.sphere_cycle_type(n), cycle_lengths_on_sphere(&g, n));
        }
        assert_eq!(g.sphere_order(6), 128);
        assert_eq!(g.order_on_ball(4), 32);
    }

    #[test]
    fn good_inversion_depth_coherent() {
        let g = good_inversion(8);
        for d in 0..8 {
            assert_eq!(g.truncate(d).unwrap(), good_inversion(d));
        }
    }

    #[test]
    fn good_inversion_square_on_level_one() {
        // g^2 on S(e,1) is +2 mod 4: the pair of 2-cycles (L:0 L:1)(R:0 R:1).
        let g = good_inversion(3);
        let g2 = Portrait::compose(&g, &g).unwrap();
        let hop = |s: &str| g2.apply(&s.parse().unwrap()).to_string();
        assert_eq!(hop("L:0"), "L:1");
        assert_eq!(hop("L:1"), "L:0");
        assert_eq!(hop("R:0"), "R:1");
        assert_eq!(hop("R:1"), "R:0");
        assert_eq!(g2.sphere_cycle_type(1), vec![2, 2]);
    }

    #[test]
    fn odometer_fixing_law() {
        // g^q fixes S(e,n) pointwise iff 2^(n+1) divides q.
        let g = good_inversion(5);
        for q in [-16i64, -8, -3, 0, 1, 2, 4, 7, 8, 12, 16, 31, 32, 64] {
            let gq = g.power(q);
            for n in 0..=5usize {
                let fixes = sphere(n).iter().all(|a| gq.apply(a) == *a);
                let divides = q.rem_euclid(1 << (n + 1)) == 0;
                assert_eq!(fixes, divides, "q={q} n={n}");
            }
        }
    }

    #[test]
    fn good_inversion_local_restriction() {
        let g = good_inversion(3);
        let lm = g.restrict(&"L:".parse().unwrap(), 1).unwrap();
        lm.validate().unwrap();
        let get = |s: &str| {
            let a: Address = s.parse().unwrap();
            lm.pairs.iter().find(|(x, _)| *x == a).unwrap().1.to_string()
        };
        assert_eq!(get("L:"), "R:");
        assert_eq!(get("R:"), "L:");
        assert_eq!(get("L:0"), "R:0");
        assert_eq!(get("L:1"), "R:1");
    }

    #[test]
    fn truncated_bad_params() {
        assert!(truncated_good_inversion(0, 3).is_err());
        assert!(truncated_good_inversion(4, 3).is_err());
    }

    #[test]
    fn truncated_level_zero_swap() {
        let g1 = truncated_good_inversion(1, 3).unwrap();
        assert_eq!(g1.edge_action(), EdgeAction::Swap);
        assert_eq!(g1.sphere_cycle_type(0), vec![2]);
    }

    #[test]
    fn truncated_sphere_orders() {
        let g3 = truncated_good_inversion(3, 5).unwrap();
        let orders: Vec<u64> = (0..=5).map(|n| g3.sphere_order(n)).collect();
        assert_eq!(orders, vec![2, 4, 8, 8, 16, 32]);
        assert_eq!(g3.sphere_cycle_type(2), vec![8]);
        assert_eq!(g3.sphere_cycle_type(3), vec![8, 8]);
        assert_eq!(g3.sphere_cycle_type(3), cycle_lengths_on_sphere(&g3, 3));
        assert_eq!(g3.sphere_cycle_type(5), vec![32, 32]);
    }

    #[test]
    fn truncated_matches_hypotheses_for_all_n() {
        for n_param in 1..=4 {
            let g = truncated_good_inversion(n_param, n_param + 3).unwrap();
            for n in 0..n_param {
                assert_eq!(g.sphere_order(n), 1 << (n + 1));
            }
            assert_eq!(g.sphere_order(n_param), 1 << n_param);
        }
    }

    #[test]
    fn half_tree_surgery_squares_to_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let g = Portrait::random_inversion(6, &mut rng);
            let x = half_tree_surgery(&g).unwrap();
            assert_eq!(x.edge_action(), EdgeAction::Swap);
            assert!(Portrait::compose(&x, &x).unwrap().is_identity());
            assert_eq!(x.order_on_ball(6), 2);
        }
    }

    #[test]
    fn half_tree_surgery_fixed_point_and_error() {
        // an involution inverting e is its own surgery output
        let mirror = Portrait::from_fn(4, |a| Address::new(a.side.other(), a.bits.clone())).unwrap();
        assert_eq!(half_tree_surgery(&mirror).unwrap(), mirror);

        let id = Portrait::identity(4);
        assert!(matches!(half_tree_surgery(&id), Err(Error::NotAnInversion)));
    }

    #[test]
    fn half_tree_surgery_is_locally_a_power() {
        let g = good_inversion(4);
        let x = half_tree_surgery(&g).unwrap();
        let ginv = g.inverse();
        for u in (0..ball_size(3)).map(address_at) {
            let lx = x.restrict(&u, 1).unwrap();
            let a = g.restrict(&u, 1).unwrap();
            let b = ginv.restrict(&u, 1).unwrap();
            assert!(lx == a || lx == b, "no power matches at {u}");
        }
    }

    #[test]
    fn component_decomposition_basics() {
        assert!(decompose_components(1, 3).is_err());
        let dec = decompose_components(2, 3).unwrap();
        assert_eq!(dec.component_count(), 4);
        // every address of level >= 1 belongs to exactly one component
        for i in 0..ball_size(3) {
            let a = address_at(i);
            if a.level() >= 1 {
                assert!(dec.component_of(&a).is_some());
            } else {
                assert!(dec.component_of(&a).is_none());
            }
        }
        // components are rooted at the 4 vertices of S(e,1)
        for x in 0..4u32 {
            let members = dec.members(x);
            let root = OdometerLabeling::address_with_label(1, x as u64);
            assert!(members.contains(&root));
            for m in &members {
                let mut anc = m.clone();
                while anc.level() > 1 {
                    anc = anc.parent().unwrap();
                }
                assert_eq!(anc, root);
            }
        }
    }

    #[test]
    fn components_shift_cyclically_under_g() {
        let n_param = 3;
        let g = truncated_good_inversion(n_param, 5).unwrap();
        let dec = decompose_components(n_param, 5).unwrap();
        let m = dec.component_count() as u32;
        for i in 0..ball_size(5) {
            let a = address_at(i);
            if let Some(c) = dec.component_of(&a) {
                let c2 = dec.component_of(&g.apply(&a)).unwrap();
                assert_eq!(c2, (c + 1) % m, "component not shifted at {a}");
            }
        }
    }

    #[test]
    fn component_surgery_order_and_agreement() {
        for (n_param, depth) in [(2usize, 6usize), (3, 8), (4, 8)] {
            let g = truncated_good_inversion(n_param, depth).unwrap();
            let x = component_surgery(&g, n_param).unwrap();
            assert_eq!(x.order_on_ball(depth), 1 << n_param);
            // agrees with g on B(e,N) exactly
            assert_eq!(
                x.truncate(n_param).unwrap(),
                g.truncate(n_param).unwrap()
            );
            // and genuinely differs somewhere at level N+1
            assert_ne!(
                x.truncate(n_param + 1).unwrap(),
                g.truncate(n_param + 1).unwrap()
            );
            assert_eq!(
                x.order_on_ball(n_param),
                g.order_on_ball(n_param)
            );
        }
    }

    #[test]
    fn component_surgery_n1_delegates_to_half_tree() {
        let g1 = truncated_good_inversion(1, 4).unwrap();
        assert_eq!(component_surgery(&g1, 1).unwrap(), half_tree_surgery(&g1).unwrap());
    }

    #[test]
    fn component_surgery_local_restrictions() {
        let n_param = 2;
        let g = truncated_good_inversion(n_param, 6).unwrap();
        let x = component_surgery(&g, n_param).unwrap();
        let patch = g.power(1 - (1 << n_param));
        for u in (0..ball_size(4)).map(address_at) {
            let lx = x.restrict(&u, 2).unwrap();
            let a = g.restrict(&u, 2).unwrap();
            let b = patch.restrict(&u, 2).unwrap();
            assert!(lx == a || lx == b, "restriction at {u} is not g or g^(1-2^N)");
        }
    }

    #[test]
    fn component_surgery_rejects_bad_hypotheses() {
        // the odometer inversion has order 2^(N+1) at level N, not 2^N
        let g = good_inversion(5);
        let err = component_surgery(&g, 3).unwrap_err();
        match err {
            Error::HypothesisViolated { level, got, expected } => {
                assert_eq!(level, 3);
                assert_eq!(got, 16);
                assert_eq!(expected, 8);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }
}
