//! The directed brick graph and its reachability sets.
//!
//! The infinite strip graph is stored as a quotient: nodes are base
//! bricks, edges carry the integer deck shift between source and target
//! translates.  Edges come in two strengths: *certified* (a sampled
//! witness point maps into the target) and *possible* (the Lipschitz
//! inflated hull of the sampled image meets the target).  Positive
//! claims (membership) use certified edges only; negative claims
//! (non-membership, boundedness, missing the upper boundary) use the
//! possible supergraph.

use crate::brickwork::BrickDecomposition;
use crate::cover::{LiftedMap, StripPoint};
use crate::error::{Error, Result};
use std::collections::{BTreeMap, BTreeSet, VecDeque};

/// An edge of the quotient graph: base brick `from` at shift 0 to base
/// brick `to` at shift `shift`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct QuotientEdge {
    pub from: usize,
    pub to: usize,
    pub shift: i64,
}

/// Directed brick graph induced by the map on a decomposition.
#[derive(Debug, Clone)]
pub struct BrickGraph {
    pub certified: Vec<QuotientEdge>,
    /// Superset of `certified`.
    pub possible: Vec<QuotientEdge>,
    /// One sampled witness per certified edge.
    pub witnesses: BTreeMap<(usize, usize, i64), StripPoint>,
    pub node_count: usize,
    pub label: String,
}

impl BrickGraph {
    fn adjacency(&self, certified: bool) -> BTreeMap<usize, Vec<(usize, i64)>> {
        let edges = if certified { &self.certified } else { &self.possible };
        let mut adj: BTreeMap<usize, Vec<(usize, i64)>> = BTreeMap::new();
        for e in edges {
            adj.entry(e.from).or_default().push((e.to, e.shift));
        }
        adj
    }

    fn reverse_adjacency(&self, certified: bool) -> BTreeMap<usize, Vec<(usize, i64)>> {
        let edges = if certified { &self.certified } else { &self.possible };
        let mut adj: BTreeMap<usize, Vec<(usize, i64)>> = BTreeMap::new();
        for e in edges {
            // Reversed edge: to@0 -> from@-shift.
            adj.entry(e.to).or_default().push((e.from, -e.shift));
        }
        adj
    }

    /// Edge list dump, one line per edge with its strength tag.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# graph label={} nodes={}\n", self.label, self.node_count));
        let cert: BTreeSet<QuotientEdge> = self.certified.iter().copied().collect();
        for e in &self.possible {
            let tag = if cert.contains(e) { "certified" } else { "possible" };
            out.push_str(&format!("edge {} -> {} shift={} {}\n", e.from, e.to, e.shift, tag));
        }
        out
    }
}

/// Build the graph by locating sampled brick images in the decomposition.
///
/// Sampling uses the decomposition's certification spacing; the hull of
/// the sampled image inflated by `L·δ·√2` yields the possible edges.
pub fn build_brick_graph(h: &LiftedMap, deco: &BrickDecomposition) -> BrickGraph {
    use rayon::prelude::*;
    let results: Vec<(Vec<(QuotientEdge, StripPoint)>, Vec<QuotientEdge>)> = deco
        .bricks
        .par_iter()
        .map(|brick| {
            let rect = brick.rect;
            let delta = deco.sample_spacing.min(rect.width().min(rect.height()) / 3.0);
            let nx = ((rect.width() / delta).ceil() as usize).clamp(3, 64);
            let ny = ((rect.height() / delta).ceil() as usize).clamp(3, 64);
            let mut certified: Vec<(QuotientEdge, StripPoint)> = Vec::new();
            let mut hull_min = (f64::INFINITY, f64::INFINITY);
            let mut hull_max = (f64::NEG_INFINITY, f64::NEG_INFINITY);
            let mut seen: BTreeSet<(usize, i64)> = BTreeSet::new();
            for i in 0..=nx {
                for j in 0..=ny {
                    let p = StripPoint::new(
                        rect.x0 + rect.width() * i as f64 / nx as f64,
                        rect.y0 + rect.height() * j as f64 / ny as f64,
                    );
                    let q = h.forward(p);
                    hull_min.0 = hull_min.0.min(q.theta);
                    hull_min.1 = hull_min.1.min(q.r);
                    hull_max.0 = hull_max.0.max(q.theta);
                    hull_max.1 = hull_max.1.max(q.r);
                    for (id, shift) in deco.locate(q) {
                        if seen.insert((id, shift)) {
                            certified.push((
                                QuotientEdge {
                                    from: brick.id,
                                    to: id,
                                    shift,
                                },
                                p,
                            ));
                        }
                    }
                }
            }
            let spacing = (rect.width() / nx as f64).max(rect.height() / ny as f64);
            let slack = h.lipschitz_bound * spacing * std::f64::consts::SQRT_2;
            let hull = crate::geom::Rect::new(
                hull_min.0 - slack,
                hull_max.0 + slack,
                (hull_min.1 - slack).max(-1.0),
                (hull_max.1 + slack).min(1.0),
            );
            let mut possible: Vec<QuotientEdge> = Vec::new();
            let lo = hull.x0.floor() as i64 - 1;
            let hi = hull.x1.ceil() as i64 + 1;
            for other in &deco.bricks {
                for s in lo..=hi {
                    if other.rect.translated(s as f64).intersects(&hull) {
                        possible.push(QuotientEdge {
                            from: brick.id,
                            to: other.id,
                            shift: s,
                        });
                    }
                }
            }
            (certified, possible)
        })
        .collect();

    let mut certified = Vec::new();
    let mut possible = Vec::new();
    let mut witnesses = BTreeMap::new();
    for (cert, poss) in results {
        for (e, w) in cert {
            witnesses.insert((e.from, e.to, e.shift), w);
            certified.push(e);
        }
        possible.extend(poss);
    }
    certified.sort();
    possible.sort();
    possible.dedup();
    // Certified edges are possible by construction; keep the containment
    // explicit even under sampling asymmetries.
    let poss_set: BTreeSet<QuotientEdge> = possible.iter().copied().collect();
    for e in &certified {
        if !poss_set.contains(e) {
            possible.push(*e);
        }
    }
    possible.sort();
    BrickGraph {
        certified,
        possible,
        witnesses,
        node_count: deco.bricks.len(),
        label: deco.label.clone(),
    }
}

/// A reachability set with the flags the branch selection reads.
#[derive(Debug, Clone)]
pub struct BrickSet {
    /// Certified members (positive claims).
    pub members: BTreeSet<(usize, i64)>,
    /// Possible members (the superset used for negative claims).
    pub possible_members: BTreeSet<(usize, i64)>,
    pub role: SetRole,
    pub window: i64,
    pub bounded_left: bool,
    pub bounded_right: bool,
    /// Certified positive claim.
    pub meets_upper_boundary: bool,
    /// Negative claim from the possible supergraph.
    pub misses_upper_boundary: bool,
    pub connected: bool,
    /// Set when certified and possible graphs disagree on a reported flag.
    pub strength_disagreement: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetRole {
    Attractor,
    Repeller,
}

fn reach(
    adj: &BTreeMap<usize, Vec<(usize, i64)>>,
    start: (usize, i64),
    window: i64,
) -> BTreeSet<(usize, i64)> {
    let mut seen: BTreeSet<(usize, i64)> = BTreeSet::new();
    let mut queue: VecDeque<(usize, i64)> = VecDeque::new();
    // Reachability by at least one edge: seed the frontier, not the set.
    if let Some(next) = adj.get(&start.0) {
        for (to, ds) in next {
            let s = start.1 + ds;
            if s.abs() <= window && seen.insert((*to, s)) {
                queue.push_back((*to, s));
            }
        }
    }
    while let Some((node, shift)) = queue.pop_front() {
        if let Some(next) = adj.get(&node) {
            for (to, ds) in next {
                let s = shift + ds;
                if s.abs() <= window && seen.insert((*to, s)) {
                    queue.push_back((*to, s));
                }
            }
        }
    }
    seen
}

fn set_flags(
    deco: &BrickDecomposition,
    members: &BTreeSet<(usize, i64)>,
    possible: &BTreeSet<(usize, i64)>,
    role: SetRole,
    window: i64,
) -> BrickSet {
    let edge = window - 1;
    let touches = |set: &BTreeSet<(usize, i64)>, pred: &dyn Fn(usize, i64) -> bool| {
        set.iter().any(|(id, s)| pred(*id, *s))
    };
    let bounded_left = !touches(possible, &|_, s| s <= -edge);
    let bounded_right = !touches(possible, &|_, s| s >= edge);
    let meets_upper = touches(members, &|id, _| deco.bricks[id].touches_top());
    let possible_meets_upper = touches(possible, &|id, _| deco.bricks[id].touches_top());
    let connected = check_connected(deco, members);
    BrickSet {
        members: members.clone(),
        possible_members: possible.clone(),
        role,
        window,
        bounded_left,
        bounded_right,
        meets_upper_boundary: meets_upper,
        misses_upper_boundary: !possible_meets_upper,
        connected,
        strength_disagreement: meets_upper != possible_meets_upper,
    }
}

fn check_connected(deco: &BrickDecomposition, members: &BTreeSet<(usize, i64)>) -> bool {
    if members.is_empty() {
        return true;
    }
    // Edge-adjacency union-find over materialized rectangles.
    let items: Vec<(usize, i64)> = members.iter().copied().collect();
    let mut parent: Vec<usize> = (0..items.len()).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let root = find(parent, parent[i]);
            parent[i] = root;
        }
        parent[i]
    }
    for i in 0..items.len() {
        let ri = deco.bricks[items[i].0].materialize(items[i].1);
        for j in i + 1..items.len() {
            let rj = deco.bricks[items[j].0].materialize(items[j].1);
            if ri.intersects(&rj) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let root = find(&mut parent, 0);
    (1..items.len()).all(|i| find(&mut parent, i) == root)
}

/// Bricks reachable from `b0` by at least one certified edge, with the
/// possible-edge superset alongside.
pub fn attractor(
    g: &BrickGraph,
    deco: &BrickDecomposition,
    b0: (usize, i64),
    window: i64,
) -> BrickSet {
    let members = reach(&g.adjacency(true), b0, window);
    let possible = reach(&g.adjacency(false), b0, window);
    set_flags(deco, &members, &possible, SetRole::Attractor, window)
}

/// Same on the reversed graph.
pub fn repeller(
    g: &BrickGraph,
    deco: &BrickDecomposition,
    b0: (usize, i64),
    window: i64,
) -> BrickSet {
    let members = reach(&g.reverse_adjacency(true), b0, window);
    let possible = reach(&g.reverse_adjacency(false), b0, window);
    set_flags(deco, &members, &possible, SetRole::Repeller, window)
}

/// Stability check: recompute at half the window and compare flags.
pub fn window_stable(
    g: &BrickGraph,
    deco: &BrickDecomposition,
    b0: (usize, i64),
    window: i64,
) -> Result<(BrickSet, BrickSet)> {
    let a_full = attractor(g, deco, b0, window);
    let a_half = attractor(g, deco, b0, window / 2);
    let r_full = repeller(g, deco, b0, window);
    let r_half = repeller(g, deco, b0, window / 2);
    let stable = |x: &BrickSet, y: &BrickSet| {
        x.bounded_left == y.bounded_left
            && x.bounded_right == y.bounded_right
            && x.meets_upper_boundary == y.meets_upper_boundary
            && x.misses_upper_boundary == y.misses_upper_boundary
    };
    if !stable(&a_full, &a_half) || !stable(&r_full, &r_half) {
        return Err(Error::WindowTooSmall {
            small: window / 2,
            large: window,
        });
    }
    Ok((a_full, r_full))
}

/// Exclusion report: the seed must stay out of its attractor and
/// repeller, and no brick translate may lie in both sets.
#[derive(Debug, Clone)]
pub struct ExclusionReport {
    pub seed: (usize, i64),
    pub seed_in_attractor: bool,
    pub seed_in_repeller: bool,
    /// Brick translates in the certified intersection, with one offending
    /// cycle through the seed if any exist.
    pub in_both: Vec<(usize, i64)>,
    pub counterexample_cycle: Option<Vec<(usize, i64)>>,
    pub pass: bool,
}

/// Verify the exclusion properties on certified edges; violations are
/// reported content, not errors.
pub fn check_exclusion(
    g: &BrickGraph,
    deco: &BrickDecomposition,
    b0: (usize, i64),
    window: i64,
) -> ExclusionReport {
    let att = reach(&g.adjacency(true), b0, window);
    let rep = reach(&g.reverse_adjacency(true), b0, window);
    let seed_in_attractor = att.contains(&b0);
    let seed_in_repeller = rep.contains(&b0);
    let in_both: Vec<(usize, i64)> = att.intersection(&rep).copied().collect();
    let counterexample_cycle = in_both.first().map(|mid| {
        let fwd = path_to(&g.adjacency(true), b0, *mid, window).unwrap_or_default();
        // A path from mid back to the seed exists because mid ∈ repeller.
        let back = path_to(&g.adjacency(true), *mid, b0, window).unwrap_or_default();
        let mut cycle = vec![b0];
        cycle.extend(fwd);
        cycle.extend(back);
        cycle
    });
    let pass = !seed_in_attractor && !seed_in_repeller && in_both.is_empty();
    let _ = deco;
    ExclusionReport {
        seed: b0,
        seed_in_attractor,
        seed_in_repeller,
        in_both,
        counterexample_cycle,
        pass,
    }
}

fn path_to(
    adj: &BTreeMap<usize, Vec<(usize, i64)>>,
    from: (usize, i64),
    to: (usize, i64),
    window: i64,
) -> Option<Vec<(usize, i64)>> {
    let mut prev: BTreeMap<(usize, i64), (usize, i64)> = BTreeMap::new();
    let mut queue = VecDeque::new();
    queue.push_back(from);
    let mut seen = BTreeSet::new();
    while let Some((node, shift)) = queue.pop_front() {
        if let Some(next) = adj.get(&node) {
            for (n, ds) in next {
                let s = shift + ds;
                let state = (*n, s);
                if s.abs() <= window && seen.insert(state) {
                    prev.insert(state, (node, shift));
                    if state == to {
                        let mut path = vec![state];
                        let mut cur = state;
                        while let Some(p) = prev.get(&cur) {
                            path.push(*p);
                            if *p == from {
                                break;
                            }
                            cur = *p;
                        }
                        path.reverse();
                        return Some(path);
                    }
                    queue.push_back(state);
                }
            }
        }
    }
    None
}

/// Which construction the reachability flags call for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeCase {
    /// The repeller misses the upper boundary: extract the essential
    /// curve from the filled repeller (subannulus shrinks under h⁻¹).
    CurveFromRepeller,
    /// The attractor misses the upper boundary: extract from the filled
    /// attractor (subannulus shrinks under h).
    CurveFromAttractor,
    /// Attractor bounded on the left and meeting the upper boundary:
    /// run the crossing-arc construction.
    CrossingArc,
    Inconclusive,
}

/// Classify the branch for a reachability set of a boundary brick.
pub fn boundedness_probe(s: &BrickSet) -> ProbeCase {
    match s.role {
        SetRole::Attractor => {
            if !s.bounded_left {
                ProbeCase::CurveFromRepeller
            } else if s.misses_upper_boundary && !s.bounded_right {
                ProbeCase::CurveFromAttractor
            } else if s.meets_upper_boundary && !s.bounded_right {
                ProbeCase::CrossingArc
            } else {
                ProbeCase::Inconclusive
            }
        }
        SetRole::Repeller => {
            if !s.bounded_right {
                ProbeCase::CurveFromAttractor
            } else if s.misses_upper_boundary && !s.bounded_left {
                ProbeCase::CurveFromRepeller
            } else if s.meets_upper_boundary && !s.bounded_left {
                ProbeCase::CrossingArc
            } else {
                ProbeCase::Inconclusive
            }
        }
    }
}

/// BrickSet dump: member list plus flags.
pub fn brickset_dump(s: &BrickSet) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "# set role={:?} window={} bounded_left={} bounded_right={} meets_upper={} misses_upper={} connected={} disagreement={}\n",
        s.role,
        s.window,
        s.bounded_left,
        s.bounded_right,
        s.meets_upper_boundary,
        s.misses_upper_boundary,
        s.connected,
        s.strength_disagreement
    ));
    for (id, shift) in &s.members {
        out.push_str(&format!("member {id} shift={shift}\n"));
    }
    out
}
