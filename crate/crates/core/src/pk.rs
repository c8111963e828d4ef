//! Local compatibility with powers of a generator, and exhaustive
//! bounded-depth searches over all locally-compatible portraits.
//!
//! A portrait `h` is locally compatible with `g` at radius `k` if on every
//! vertex ball `B(u,k)` inside the truncation it agrees with some power of
//! `g`. The set of such portraits is a superset of the depth-`D` restrictions
//! of the elements of the closure generated by `g`, so emptiness and
//! lower-bound results established here transfer to the closure.
//!
//! The searches run over the decision tree of parent-compatible portraits
//! (one edge-action bit plus one child-crossing bit per interior vertex, in
//! canonical order). A ball constraint is checked as soon as the last
//! decision determining it is placed, so failing branches die early. Reports
//! are byte-stable: the tree, its pruning, and the order of found portraits
//! are all canonical, and parallel runs merge subtree results in canonical
//! order.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use crate::exec::{run_indexed, Threads};
use crate::portrait::Portrait;
use crate::tree::{self, Address};
use crate::{Error, Result};

/// Default cap on search-tree node expansions.
pub const DEFAULT_NODE_BUDGET: u64 = 100_000_000;

/// Outcome of comparing `h` with the powers of `g` on one vertex ball.
#[derive(Clone, Debug)]
pub struct LocalTestResult {
    pub center: Address,
    pub radius: usize,
    /// Period of `g` on the smallest edge ball containing `B(center,radius)`;
    /// witnesses are residues modulo this period.
    pub period: u64,
    /// All powers `p` in `[0, period)` with `h = g^p` on the ball.
    pub witnesses: Vec<u64>,
    pub passed: bool,
}

/// Exact witness set for `h = g^p` on `B(u,k)`.
///
/// The candidate powers range over `[0, P)` where `P` is the period of `g`
/// on `B(e, level(u)+k)`, the smallest edge ball containing `B(u,k)`;
/// restrictions of `g^p` to the ball depend only on `p mod P`.
pub fn is_locally_power(
    h: &Portrait,
    g: &Portrait,
    u: &Address,
    k: usize,
) -> Result<LocalTestResult> {
    if h.depth() != g.depth() {
        return Err(Error::DepthMismatch(h.depth(), g.depth()));
    }
    let depth = h.depth();
    if u.level() + k > depth {
        return Err(Error::TruncationExceeded {
            center: u.clone(),
            radius: k,
            depth,
        });
    }
    let members = tree::ball_of_vertex_indices(u.index(), k, depth);
    let period = g.order_on_ball(u.level() + k);
    let mut witnesses = Vec::new();
    // img[j] = g^p(members[j]), advanced in lockstep with p
    let mut img: Vec<usize> = members.clone();
    for p in 0..period {
        if members
            .iter()
            .zip(&img)
            .all(|(&m, &i)| h.apply_index(m) == i)
        {
            witnesses.push(p);
        }
        for i in img.iter_mut() {
            *i = g.apply_index(*i);
        }
    }
    Ok(LocalTestResult {
        center: u.clone(),
        radius: k,
        period,
        passed: !witnesses.is_empty(),
        witnesses,
    })
}

/// Run [`is_locally_power`] at every vertex `u` with `B(u,k)` inside the
/// truncation, in canonical order. `h` passes at depth `D` iff every result
/// passes.
pub fn pk_local_check(h: &Portrait, g: &Portrait, k: usize) -> Result<Vec<LocalTestResult>> {
    if h.depth() != g.depth() {
        return Err(Error::DepthMismatch(h.depth(), g.depth()));
    }
    let depth = h.depth();
    if k > depth {
        return Err(Error::BadParams(format!("radius {k} exceeds depth {depth}")));
    }
    (0..tree::ball_size(depth - k))
        .map(|i| is_locally_power(h, g, &tree::address_at(i), k))
        .collect()
}

/// Convenience: does `h` pass the radius-`k` local test everywhere?
pub fn passes_local_check(h: &Portrait, g: &Portrait, k: usize) -> Result<bool> {
    Ok(pk_local_check(h, g, k)?.iter().all(|r| r.passed))
}

/// Predicate selecting which completed portraits a search reports. Each
/// predicate comes with a monotone partial filter, so branches that cannot
/// satisfy it are pruned without losing completeness.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Predicate {
    /// Report every locally-compatible portrait.
    All,
    /// Portraits of order exactly 2 on the full truncation.
    IsInvolution,
    /// Portraits swapping the root-edge endpoints.
    InvertsEdge,
    /// Portraits fixing both root-edge endpoints.
    IdentityOnSphereZero,
}

/// Knobs for a search run.
#[derive(Clone, Copy, Debug)]
pub struct SearchOptions {
    pub budget: u64,
    pub threads: Threads,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            budget: DEFAULT_NODE_BUDGET,
            threads: Threads::default(),
        }
    }
}

/// Deterministic record of a backtracking enumeration.
///
/// `exhaustive` is true only if the search covered the entire (soundly
/// pruned) constraint tree. If the node budget runs out the report is
/// returned with `exhaustive = false`, `expanded` clamped to the budget and
/// `found` emptied, so budget-limited runs are still byte-stable across
/// thread counts.
#[derive(Clone, Debug)]
pub struct SearchReport {
    pub depth: usize,
    pub k: usize,
    pub expanded: u64,
    pub exhaustive: bool,
    pub found: Vec<Portrait>,
}

/// Result of minimizing the truncation order over compatible inverting
/// portraits. `found_min` is `None` only if the budget ran out.
#[derive(Clone, Debug)]
pub struct MinOrderReport {
    pub depth: usize,
    pub k: usize,
    pub expanded: u64,
    pub exhaustive: bool,
    /// Number of compatible inverting portraits enumerated.
    pub candidates: u64,
    /// Minimal order and the canonically first witness attaining it.
    pub found_min: Option<(u64, Portrait)>,
}

/// Enumerate every depth-`D` portrait locally compatible with `g` at radius
/// `k` that satisfies `predicate`, by canonical backtracking over
/// sphere-by-sphere extensions.
pub fn enumerate_compatible(
    g: &Portrait,
    k: usize,
    depth: usize,
    predicate: Predicate,
    opts: &SearchOptions,
) -> Result<SearchReport> {
    let engine = Engine::new(g, k, depth, predicate)?;
    let (expanded, exhaustive, sinks) = engine.run::<CollectSink>(opts);
    let mut found = Vec::new();
    if exhaustive {
        for s in sinks {
            found.extend(s.found);
        }
    }
    Ok(SearchReport {
        depth,
        k,
        expanded,
        exhaustive,
        found,
    })
}

/// Specialization of [`enumerate_compatible`] to portraits of order 2.
pub fn search_involutions(
    g: &Portrait,
    k: usize,
    depth: usize,
    opts: &SearchOptions,
) -> Result<SearchReport> {
    enumerate_compatible(g, k, depth, Predicate::IsInvolution, opts)
}

/// Minimum of `order_on_ball(h, D)` over all compatible inverting portraits
/// `h`, with a witness. Every inversion in the closure generated by `g`
/// restricts to such a portrait, so this is a lower bound for the order of
/// any finite-order inversion in the closure.
pub fn min_inversion_order(
    g: &Portrait,
    k: usize,
    depth: usize,
    opts: &SearchOptions,
) -> Result<MinOrderReport> {
    if g.edge_action() != crate::portrait::EdgeAction::Swap {
        return Err(Error::NotAnInversion);
    }
    let engine = Engine::new(g, k, depth, Predicate::InvertsEdge)?;
    let (expanded, exhaustive, sinks) = engine.run::<MinOrderSink>(opts);
    let mut candidates = 0u64;
    let mut found_min: Option<(u64, Portrait)> = None;
    if exhaustive {
        for s in sinks {
            candidates += s.candidates;
            if let Some((ord, h)) = s.best {
                let better = match &found_min {
                    None => true,
                    Some((cur, _)) => ord < *cur,
                };
                if better {
                    found_min = Some((ord, h));
                }
            }
        }
    }
    Ok(MinOrderReport {
        depth,
        k,
        expanded,
        exhaustive,
        candidates,
        found_min,
    })
}

// ---------------------------------------------------------------------------
// engine
// ---------------------------------------------------------------------------

const UNSET: u32 = u32::MAX;

/// Precomputed constraint tables for one search.
struct Engine {
    depth: usize,
    k: usize,
    n_vertices: usize,
    n_decisions: usize,
    predicate: Predicate,
    /// g^p image tables, row-major: pows[p * n_vertices + v].
    pows: Vec<u32>,
    n_pows: u64,
    /// Ball member lists, concatenated; ball b owns members[m_off[b]..m_off[b+1]].
    members: Vec<u32>,
    m_off: Vec<u32>,
    /// Witness period per ball.
    period: Vec<u64>,
    /// Ball ids triggered after each decision.
    triggers: Vec<Vec<u32>>,
    /// Level completed by each decision, if any.
    completes_level: Vec<Option<usize>>,
}

impl Engine {
    fn new(g: &Portrait, k: usize, depth: usize, predicate: Predicate) -> Result<Engine> {
        if g.depth() != depth {
            return Err(Error::DepthMismatch(g.depth(), depth));
        }
        if k == 0 || depth < k + 1 {
            return Err(Error::BadParams(format!(
                "search needs 1 <= k and depth >= k+1, got k={k} depth={depth}"
            )));
        }
        let n_vertices = tree::ball_size(depth);
        let n_decisions = 1 + tree::ball_size(depth - 1);

        let n_pows = g.order_on_ball(depth);
        if n_pows.saturating_mul(n_vertices as u64) > (1 << 26) {
            return Err(Error::BadParams(format!(
                "power table too large: period {n_pows} at depth {depth}"
            )));
        }
        let mut pows = Vec::with_capacity(n_pows as usize * n_vertices);
        pows.extend((0..n_vertices as u32).map(|v| v));
        for p in 1..n_pows as usize {
            for v in 0..n_vertices {
                let prev = pows[(p - 1) * n_vertices + v] as usize;
                pows.push(g.apply_index(prev) as u32);
            }
        }

        let ball_orders: Vec<u64> = (0..=depth).map(|m| g.order_on_ball(m)).collect();

        let mut members = Vec::new();
        let mut m_off = vec![0u32];
        let mut period = Vec::new();
        let mut triggers = vec![Vec::new(); n_decisions];
        let centers = tree::ball_size(depth - k);
        for (ball_id, u) in (0..centers).enumerate() {
            let ms = tree::ball_of_vertex_indices(u, k, depth);
            let trigger = ms
                .iter()
                .map(|&w| {
                    if tree::level_of_index(w) == 0 {
                        0
                    } else {
                        1 + tree::parent_index(w)
                    }
                })
                .max()
                .expect("balls are nonempty");
            triggers[trigger].push(ball_id as u32);
            members.extend(ms.iter().map(|&w| w as u32));
            m_off.push(members.len() as u32);
            period.push(ball_orders[tree::level_of_index(u) + k]);
        }

        let mut completes_level = vec![None; n_decisions];
        completes_level[0] = Some(0);
        for m in 1..=depth {
            completes_level[tree::level_offset(m)] = Some(m);
        }

        Ok(Engine {
            depth,
            k,
            n_vertices,
            n_decisions,
            predicate,
            pows,
            n_pows,
            members,
            m_off,
            period,
            triggers,
            completes_level,
        })
    }

    /// Place decision `d` with value `val` into `images`.
    fn assign(&self, images: &mut [u32], d: usize, val: usize) {
        if d == 0 {
            images[0] = val as u32;
            images[1] = 1 - val as u32;
        } else {
            let v = d - 1;
            let img = images[v] as usize;
            let c = val;
            images[tree::child_index(v, 0)] = tree::child_index(img, c) as u32;
            images[tree::child_index(v, 1)] = tree::child_index(img, 1 - c) as u32;
        }
    }

    fn unassign(&self, images: &mut [u32], d: usize) {
        if d == 0 {
            images[0] = UNSET;
            images[1] = UNSET;
        } else {
            let v = d - 1;
            images[tree::child_index(v, 0)] = UNSET;
            images[tree::child_index(v, 1)] = UNSET;
        }
    }

    /// Check every constraint that decision `d` just completed. Sound and
    /// monotone: a failure here fails every completion of the assignment.
    fn check_after(&self, images: &[u32], d: usize, val: usize) -> bool {
        match self.predicate {
            Predicate::InvertsEdge if d == 0 && val == 0 => return false,
            Predicate::IdentityOnSphereZero if d == 0 && val == 1 => return false,
            Predicate::IsInvolution => {
                if let Some(m) = self.completes_level[d] {
                    if !self.level_cycles_at_most_two(images, m) {
                        return false;
                    }
                }
            }
            _ => {}
        }
        self.triggers[d]
            .iter()
            .all(|&b| self.ball_has_witness(images, b as usize))
    }

    fn ball_has_witness(&self, images: &[u32], ball: usize) -> bool {
        let ms = &self.members[self.m_off[ball] as usize..self.m_off[ball + 1] as usize];
        let period = self.period[ball].min(self.n_pows);
        for p in 0..period as usize {
            let row = &self.pows[p * self.n_vertices..(p + 1) * self.n_vertices];
            if ms.iter().all(|&m| row[m as usize] == images[m as usize]) {
                return true;
            }
        }
        false
    }

    fn level_cycles_at_most_two(&self, images: &[u32], m: usize) -> bool {
        let lo = tree::level_offset(m);
        let hi = tree::level_offset(m + 1);
        (lo..hi).all(|v| {
            let w = images[v] as usize;
            w == v || images[w] as usize == v
        })
    }

    /// Does a complete assignment satisfy the search predicate?
    fn final_predicate(&self, portrait: &Portrait) -> bool {
        match self.predicate {
            Predicate::All => true,
            // the monotone filter already enforced order <= 2 per sphere
            Predicate::IsInvolution => !portrait.is_identity(),
            Predicate::InvertsEdge => true,
            Predicate::IdentityOnSphereZero => true,
        }
    }

    /// Run the search: canonical frontier split, then per-subtree DFS,
    /// merged in frontier order.
    fn run<S: Sink>(&self, opts: &SearchOptions) -> (u64, bool, Vec<S>) {
        let expanded = AtomicU64::new(0);
        let aborted = AtomicBool::new(false);
        let budget = opts.budget;

        // Frontier of surviving partial assignments at a fixed decision depth.
        let prefix_len = match opts.threads {
            Threads::Sequential => 0,
            _ => self.n_decisions.min(12),
        };
        let mut frontier: Vec<Vec<u8>> = vec![Vec::new()];
        for d in 0..prefix_len {
            let mut next = Vec::new();
            for prefix in &frontier {
                let mut images = vec![UNSET; self.n_vertices];
                for (i, &v) in prefix.iter().enumerate() {
                    self.assign(&mut images, i, v as usize);
                }
                for val in 0..2usize {
                    if !self.charge(&expanded, &aborted, budget) {
                        break;
                    }
                    self.assign(&mut images, d, val);
                    if self.check_after(&images, d, val) {
                        let mut ext = prefix.clone();
                        ext.push(val as u8);
                        next.push(ext);
                    }
                    self.unassign(&mut images, d);
                }
            }
            frontier = next;
            if aborted.load(Ordering::Relaxed) {
                break;
            }
        }

        let sinks: Vec<S> = if aborted.load(Ordering::Relaxed) {
            Vec::new()
        } else {
            run_indexed(opts.threads, frontier.len(), |i| {
                let prefix = &frontier[i];
                let mut sink = S::default();
                if aborted.load(Ordering::Relaxed) {
                    return sink;
                }
                let mut images = vec![UNSET; self.n_vertices];
                for (d, &v) in prefix.iter().enumerate() {
                    self.assign(&mut images, d, v as usize);
                }
                if prefix.len() == self.n_decisions {
                    self.finalize(&images, &mut sink);
                } else {
                    self.dfs(&mut images, prefix.len(), &expanded, &aborted, budget, &mut sink);
                }
                sink
            })
        };

        if aborted.load(Ordering::Relaxed) {
            (budget, false, Vec::new())
        } else {
            (expanded.load(Ordering::Relaxed), true, sinks)
        }
    }

    /// Count one node expansion against the budget.
    fn charge(&self, expanded: &AtomicU64, aborted: &AtomicBool, budget: u64) -> bool {
        if aborted.load(Ordering::Relaxed) {
            return false;
        }
        if expanded.fetch_add(1, Ordering::Relaxed) >= budget {
            aborted.store(true, Ordering::Relaxed);
            return false;
        }
        true
    }

    fn dfs<S: Sink>(
        &self,
        images: &mut [u32],
        d: usize,
        expanded: &AtomicU64,
        aborted: &AtomicBool,
        budget: u64,
        sink: &mut S,
    ) {
        for val in 0..2usize {
            if !self.charge(expanded, aborted, budget) {
                return;
            }
            self.assign(images, d, val);
            if self.check_after(images, d, val) {
                if d + 1 == self.n_decisions {
                    self.finalize(images, sink);
                } else {
                    self.dfs(images, d + 1, expanded, aborted, budget, sink);
                }
            }
            self.unassign(images, d);
        }
    }

    fn finalize<S: Sink>(&self, images: &[u32], sink: &mut S) {
        let portrait = Portrait::from_images(self.depth, images.to_vec())
            .expect("search assignments are portraits by construction");
        if self.final_predicate(&portrait) {
            sink.found(portrait, self);
        }
    }
}

/// Accumulator for completed portraits of one subtree.
trait Sink: Default + Send {
    fn found(&mut self, portrait: Portrait, engine: &Engine);
}

#[derive(Default)]
struct CollectSink {
    found: Vec<Portrait>,
}

impl Sink for CollectSink {
    fn found(&mut self, portrait: Portrait, _engine: &Engine) {
        self.found.push(portrait);
    }
}

#[derive(Default)]
struct MinOrderSink {
    candidates: u64,
    best: Option<(u64, Portrait)>,
}

impl Sink for MinOrderSink {
    fn found(&mut self, portrait: Portrait, engine: &Engine) {
        self.candidates += 1;
        let ord = portrait.order_on_ball(engine.depth);
        let better = match &self.best {
            None => true,
            Some((cur, _)) => ord < *cur,
        };
        if better {
            self.best = Some((ord, portrait));
        }
    }
}
