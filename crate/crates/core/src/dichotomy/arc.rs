//! Crossing-arc extraction.
//!
//! From the filled attractor the frontier contributes a half-line from
//! the lower boundary; its prefix up to the first upper-boundary hit is
//! the seed arc.  The partner map's forward iterates of the seed bound
//! the right domains whose union's left edge is the candidate arc.  If a
//! deck translate still meets it, the overlap loop bounds a subannulus
//! instead; otherwise the arc is pushed off the partner-iterate
//! intersections by local detours through the left domain until the
//! whole iterate chain misses it.

use super::frontier::{fill_and_frontier, EndKind};
use crate::brickwork::BrickDecomposition;
use crate::cover::{fract, LiftedMap, StripPoint};
use crate::error::{Error, Result};
use crate::fixed_index::FixedPointRecord;
use crate::flowgraph::BrickSet;
use crate::geom::{left_ray_crossings, polyline_intersections, CurveKind, PolyCurve};

pub enum CrossingOutcome {
    Arc {
        arc: PolyCurve,
        reduction_passes: usize,
    },
    /// `τ(arc)` met the arc: the loop between a point and its translate
    /// projects to an essential curve (one period, line representation).
    DeckOverlap { essential: PolyCurve },
}

/// Sampled-image polyline of an arc under a lift.
fn map_arc(g: &LiftedMap, arc: &PolyCurve) -> PolyCurve {
    PolyCurve {
        vertices: arc.vertices.iter().map(|v| g.forward(*v)).collect(),
        kind: arc.kind,
    }
}

fn is_left_of(p: StripPoint, arc: &PolyCurve, tol: f64) -> bool {
    left_ray_crossings(p, arc) % 2 == 0 && arc.min_dist_to_point(p) > tol
}

/// Left envelope of two strip-crossing arcs (both oriented upward): the
/// boundary of the unbounded-left component of the complement of the
/// union of their right domains.
fn splice_left_envelope(a: &PolyCurve, b: &PolyCurve) -> Result<PolyCurve> {
    let crossings = polyline_intersections(a, b);
    if crossings.is_empty() {
        let b_left = b.vertices.iter().any(|v| is_left_of(*v, a, 1e-12));
        return Ok(if b_left { b.clone() } else { a.clone() });
    }

    // Split both arcs at the crossing points.
    let chain_a = split_at(a, &crossings);
    let chain_b = split_at(b, &crossings);
    let key = |p: StripPoint| ((p.theta * 1e9).round() as i64, (p.r * 1e9).round() as i64);
    let mut cross_index: std::collections::BTreeMap<(i64, i64), (usize, usize)> =
        std::collections::BTreeMap::new();
    for x in &crossings {
        let ia = chain_a.iter().position(|v| v.dist(*x) < 1e-9);
        let ib = chain_b.iter().position(|v| v.dist(*x) < 1e-9);
        if let (Some(ia), Some(ib)) = (ia, ib) {
            cross_index.insert(key(*x), (ia, ib));
        }
    }

    // Walk from the leftmost bottom endpoint, taking the most
    // counterclockwise continuation at each crossing.
    let (mut on_a, mut idx) = if chain_a[0].theta <= chain_b[0].theta {
        (true, 0usize)
    } else {
        (false, 0usize)
    };
    let mut out: Vec<StripPoint> = Vec::new();
    let mut guard = 0;
    loop {
        guard += 1;
        if guard > chain_a.len() + chain_b.len() + 16 {
            return Err(Error::CertificateFailure(
                "left envelope walk did not terminate".into(),
            ));
        }
        let chain = if on_a { &chain_a } else { &chain_b };
        let here = chain[idx];
        if out.last().map_or(true, |l| l.dist(here) > 1e-12) {
            out.push(here);
        }
        if (here.r - 1.0).abs() < 1e-9 && idx + 1 == chain.len() {
            break;
        }
        if idx + 1 >= chain.len() {
            return Err(Error::CertificateFailure("envelope ran off an arc".into()));
        }
        // Switch decision at crossing vertices.
        if let Some(&(ia, ib)) = cross_index.get(&key(here)) {
            let prev = if out.len() >= 2 {
                out[out.len() - 2]
            } else {
                StripPoint::new(here.theta, here.r - 1.0)
            };
            let dir = (here.theta - prev.theta, here.r - prev.r);
            let cand_same = chain[idx + 1];
            let other_chain = if on_a { &chain_b } else { &chain_a };
            let other_idx = if on_a { ib } else { ia };
            if other_idx + 1 < other_chain.len() {
                let cand_other = other_chain[other_idx + 1];
                let angle = |c: StripPoint| {
                    let cd = (c.theta - here.theta, c.r - here.r);
                    let cross = dir.0 * cd.1 - dir.1 * cd.0;
                    let dot = dir.0 * cd.0 + dir.1 * cd.1;
                    cross.atan2(dot)
                };
                if angle(cand_other) > angle(cand_same) {
                    on_a = !on_a;
                    idx = other_idx;
                }
            }
        }
        idx += 1;
    }
    let curve = PolyCurve {
        vertices: out,
        kind: CurveKind::CrossingArc,
    };
    curve.validate()?;
    Ok(curve)
}

fn split_at(arc: &PolyCurve, points: &[StripPoint]) -> Vec<StripPoint> {
    let mut out: Vec<StripPoint> = Vec::new();
    for (a, b) in arc.vertices.windows(2).map(|w| (w[0], w[1])) {
        out.push(a);
        // Points on this segment, ordered along it.
        let mut on_seg: Vec<(f64, StripPoint)> = points
            .iter()
            .filter_map(|p| {
                let d = crate::geom::point_seg_dist(*p, a, b);
                if d < 1e-9 {
                    let vx = b.theta - a.theta;
                    let vy = b.r - a.r;
                    let len2 = (vx * vx + vy * vy).max(1e-300);
                    let t = ((p.theta - a.theta) * vx + (p.r - a.r) * vy) / len2;
                    if t > 1e-9 && t < 1.0 - 1e-9 {
                        return Some((t, *p));
                    }
                }
                None
            })
            .collect();
        on_seg.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        for (_, p) in on_seg {
            out.push(p);
        }
    }
    out.push(*arc.vertices.last().unwrap());
    out.dedup_by(|a, b| a.dist(*b) < 1e-12);
    out
}

/// `X_n = ∩_{i≤n} Gⁱ(arc)` probe: returns the least `n ≥ 1` with empty
/// intersection and the point set `X_{n-1}` driving the reduction.
pub(crate) fn chain_depth(
    arc: &PolyCurve,
    iterates: &[PolyCurve],
    tol: f64,
) -> (usize, Vec<StripPoint>) {
    let mut current = polyline_intersections(arc, &iterates[0]);
    if current.is_empty() {
        return (1, vec![]);
    }
    for (n, g_arc) in iterates.iter().enumerate().skip(1) {
        let next: Vec<StripPoint> = current
            .iter()
            .filter(|p| g_arc.min_dist_to_point(**p) < tol)
            .copied()
            .collect();
        if next.is_empty() {
            return (n + 1, current);
        }
        current = next;
    }
    (iterates.len() + 1, current)
}

/// Push the arc off the deepest surviving intersection set by rectilinear
/// detours through the left domain until the iterate chain dies at depth
/// one.  Returns the final arc and the number of passes.
pub fn reduce_tau_free_arc(
    arc: &PolyCurve,
    g: &LiftedMap,
    max_depth: usize,
) -> Result<(PolyCurve, usize)> {
    let mut current = arc.clone();
    let mut passes = 0usize;
    loop {
        let iterates = g_iterates(g, &current, max_depth);
        let tol = 2e-6;
        let (n, survivors) = chain_depth(&current, &iterates, tol);
        if n == 1 {
            return Ok((current, passes));
        }
        if passes > 24 {
            return Err(Error::CertificateFailure(format!(
                "arc reduction stalled at chain depth {n}"
            )));
        }
        current = detour_around(&current, &survivors, g, &iterates, n)?;
        passes += 1;
    }
}

fn g_iterates(g: &LiftedMap, arc: &PolyCurve, depth: usize) -> Vec<PolyCurve> {
    let mut out = Vec::with_capacity(depth);
    let mut cur = arc.densified(0.02 / g.lipschitz_bound.max(1.0));
    for _ in 0..depth {
        cur = map_arc(g, &cur);
        out.push(cur.clone());
    }
    out
}

fn arc_params(arc: &PolyCurve) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = vec![0.0];
    for w in arc.vertices.windows(2) {
        acc += w[0].dist(w[1]);
        out.push(acc);
    }
    out
}

fn param_of(arc: &PolyCurve, params: &[f64], p: StripPoint) -> Option<f64> {
    let mut best: Option<(f64, f64)> = None;
    for (i, w) in arc.vertices.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        let d = crate::geom::point_seg_dist(p, a, b);
        if best.map_or(true, |(bd, _)| d < bd) {
            let vx = b.theta - a.theta;
            let vy = b.r - a.r;
            let len2 = (vx * vx + vy * vy).max(1e-300);
            let t = (((p.theta - a.theta) * vx + (p.r - a.r) * vy) / len2).clamp(0.0, 1.0);
            best = Some((d, params[i] + t * len2.sqrt()));
        }
    }
    best.and_then(|(d, s)| if d < 1e-6 { Some(s) } else { None })
}

fn point_at(arc: &PolyCurve, params: &[f64], s: f64) -> StripPoint {
    let s = s.clamp(0.0, *params.last().unwrap());
    for (i, w) in arc.vertices.windows(2).enumerate() {
        if s <= params[i + 1] {
            let span = (params[i + 1] - params[i]).max(1e-300);
            let t = (s - params[i]) / span;
            let (a, b) = (w[0], w[1]);
            return StripPoint::new(a.theta + t * (b.theta - a.theta), a.r + t * (b.r - a.r));
        }
    }
    *arc.vertices.last().unwrap()
}

fn detour_around(
    arc: &PolyCurve,
    survivors: &[StripPoint],
    g: &LiftedMap,
    iterates: &[PolyCurve],
    depth_before: usize,
) -> Result<PolyCurve> {
    let params = arc_params(arc);
    let total = *params.last().unwrap();
    let mut ss: Vec<f64> = survivors
        .iter()
        .filter_map(|p| param_of(arc, &params, *p))
        .collect();
    if ss.is_empty() {
        return Err(Error::CertificateFailure(
            "reduction targets do not lie on the arc".into(),
        ));
    }
    ss.sort_by(f64::total_cmp);

    for attempt in 0..10 {
        // Pad grows with each attempt: a wider single detour clears image
        // strands that slice close past the targets.
        let pad = 0.02 * 2f64.powi(attempt) / g.lipschitz_bound.max(1.0);
        let offset = pad * 0.4;
        // Merge overlapping clusters.
        let mut clusters: Vec<(f64, f64)> = Vec::new();
        for &s in &ss {
            match clusters.last_mut() {
                Some(last) if s - last.1 <= 2.0 * pad => last.1 = s,
                _ => clusters.push((s, s)),
            }
        }
        let mut vertices: Vec<StripPoint> = Vec::new();
        let mut cursor = 0.0f64;
        let mut ok = true;
        for (lo, hi) in &clusters {
            let s0 = (lo - pad).max(1e-6);
            let s1 = (hi + pad).min(total - 1e-6);
            if s1 <= s0 || s0 < cursor {
                ok = false;
                break;
            }
            // Copy the untouched stretch.
            append_range(arc, &params, cursor, s0, &mut vertices);
            let a = point_at(arc, &params, s0);
            let b = point_at(arc, &params, s1);
            let chord = (b.theta - a.theta, b.r - a.r);
            let norm = (chord.0 * chord.0 + chord.1 * chord.1).sqrt().max(1e-12);
            // Left normal of the direction of travel.
            let n_hat = (-chord.1 / norm, chord.0 / norm);
            let d0 = StripPoint::new(a.theta + n_hat.0 * offset, (a.r + n_hat.1 * offset).clamp(-1.0, 1.0));
            let d1 = StripPoint::new(b.theta + n_hat.0 * offset, (b.r + n_hat.1 * offset).clamp(-1.0, 1.0));
            vertices.push(a);
            vertices.push(d0);
            vertices.push(d1);
            vertices.push(b);
            cursor = s1;
        }
        if !ok {
            continue;
        }
        append_range(arc, &params, cursor, total, &mut vertices);
        vertices.dedup_by(|a, b| a.dist(*b) < 1e-12);
        let candidate = PolyCurve {
            vertices,
            kind: CurveKind::CrossingArc,
        };
        if candidate.validate().is_err() {
            continue;
        }
        let new_iterates = g_iterates(g, &candidate, iterates.len());
        let (n_new, _) = chain_depth(&candidate, &new_iterates, 2e-6);
        if n_new < depth_before {
            return Ok(candidate);
        }
    }
    Err(Error::CertificateFailure(
        "no admissible detour reduced the iterate chain".into(),
    ))
}

fn append_range(
    arc: &PolyCurve,
    params: &[f64],
    s0: f64,
    s1: f64,
    out: &mut Vec<StripPoint>,
) {
    if s1 <= s0 {
        return;
    }
    let start = point_at(arc, params, s0);
    if out.last().map_or(true, |l| l.dist(start) > 1e-12) {
        out.push(start);
    }
    for (i, v) in arc.vertices.iter().enumerate() {
        if params[i] > s0 + 1e-12 && params[i] < s1 - 1e-12 {
            out.push(*v);
        }
    }
    out.push(point_at(arc, params, s1));
}

/// Per-arc certificate data for the crossing-arc alternative.
#[derive(Debug, Clone)]
pub struct ArcCertificates {
    /// Minimum distance between the arc and its image, both punctured at
    /// the fixed-point balls, measured on the annulus.
    pub gap_outside_balls: f64,
    /// The image keeps to one local side of the arc.
    pub one_sided: bool,
    /// +1 when the image stays on the right of the upward arc.
    pub image_side: i8,
    pub ball_radius: f64,
    /// Sampling band: vertex spacing times the Lipschitz modulus.
    pub sampling_band: f64,
}

/// Certify `α ∩ h(α) ⊂` fixed-point balls and the one-sidedness of the
/// image, with every claim sampled on the deck extension.
pub fn certify_crossing_arc(
    h: &LiftedMap,
    arc: &PolyCurve,
    fixed_points: &[FixedPointRecord],
    ball_radius: f64,
) -> Result<ArcCertificates> {
    if arc.kind != CurveKind::CrossingArc {
        return Err(Error::CertificateFailure("witness is not a crossing arc".into()));
    }
    arc.validate()?;
    let (lo, hi) = arc.theta_range();
    let width = hi - lo;
    // Simplicity on the annulus: nothing may meet its own deck translate.
    for k in 1..=(width.ceil() as i64 + 1) {
        if !polyline_intersections(arc, &arc.translated(k as f64)).is_empty() {
            return Err(Error::CertificateFailure(format!(
                "arc meets its deck translate by {k}: not simple on the annulus"
            )));
        }
    }

    let spacing = 5e-3;
    let fine = arc.densified(spacing);
    let image = map_arc(h, &fine);
    let outside = |p: StripPoint| {
        !fixed_points.iter().any(|fp| {
            let d = (fract(p.theta) - fp.location.theta_mod1).rem_euclid(1.0);
            let d = d.min(1.0 - d);
            (d * d + (p.r - fp.location.r).powi(2)).sqrt() < ball_radius
        })
    };

    let k_lo = (image.theta_range().0 - hi).floor() as i64 - 1;
    let k_hi = (image.theta_range().1 - lo).ceil() as i64 + 1;
    let mut gap = f64::INFINITY;
    let mut side: Option<i8> = None;
    let mut one_sided = true;
    for q in image.vertices.iter().filter(|q| outside(**q)) {
        let mut best = (f64::INFINITY, 0i8);
        for k in k_lo..=k_hi {
            let shifted = arc.translated(k as f64);
            for (a, b) in shifted.vertices.windows(2).map(|w| (w[0], w[1])) {
                let d = crate::geom::point_seg_dist(*q, a, b);
                if d < best.0 {
                    let cross = (b.theta - a.theta) * (q.r - a.r) - (b.r - a.r) * (q.theta - a.theta);
                    best = (d, if cross >= 0.0 { 1 } else { -1 });
                }
            }
        }
        if outside(*q) {
            gap = gap.min(best.0);
        }
        match side {
            None => side = Some(best.1),
            Some(s) if s != best.1 => one_sided = false,
            _ => {}
        }
    }
    // The arc-side of the gap: punctured arc samples against the image.
    for v in fine.vertices.iter().filter(|v| outside(**v)) {
        for k in k_lo..=k_hi {
            let d = image.translated(-(k as f64)).min_dist_to_point(*v);
            gap = gap.min(d);
        }
    }

    if gap <= 0.0 {
        return Err(Error::CertificateFailure(format!(
            "arc meets its image outside the fixed-point balls (gap {gap:.3e})"
        )));
    }
    Ok(ArcCertificates {
        gap_outside_balls: gap,
        one_sided,
        image_side: side.map(|s| -s).unwrap_or(0),
        ball_radius,
        sampling_band: spacing * h.lipschitz_bound,
    })
}

/// Run the crossing-arc construction for an attractor in the
/// bounded-left, meets-upper-boundary regime.
pub fn extract_crossing_arc(
    h: &LiftedMap,
    g: &LiftedMap,
    att: &BrickSet,
    deco: &BrickDecomposition,
    geo_window: i64,
) -> Result<CrossingOutcome> {
    // Frontier of the filled attractor.
    let members = att.members.clone();
    let comps = fill_and_frontier(deco, geo_window, |id, s| members.contains(&(id, s)))?;
    let mut half_line: Option<&super::frontier::FrontierComponent> = None;
    for c in &comps {
        if c.closed {
            continue;
        }
        if let Some((e0, e1)) = c.ends {
            if e0 == EndKind::Bottom || e1 == EndKind::Bottom {
                let bottom_theta = if e0 == EndKind::Bottom {
                    c.curve.vertices.first().unwrap().theta
                } else {
                    c.curve.vertices.last().unwrap().theta
                };
                let better = match half_line {
                    None => true,
                    Some(old) => {
                        let old_theta = if old.ends.unwrap().0 == EndKind::Bottom {
                            old.curve.vertices.first().unwrap().theta
                        } else {
                            old.curve.vertices.last().unwrap().theta
                        };
                        bottom_theta < old_theta
                    }
                };
                if better {
                    half_line = Some(c);
                }
            }
        }
    }
    let half_line = half_line.ok_or(Error::NoSeparatingComponent)?;

    // Orient from the lower boundary and truncate at the first upper hit.
    let mut verts = half_line.curve.vertices.clone();
    if half_line.ends.unwrap().1 == EndKind::Bottom {
        verts.reverse();
    }
    let top_idx = verts
        .iter()
        .position(|v| (v.r - 1.0).abs() < 1e-12)
        .ok_or(Error::WindowTooSmall {
            small: geo_window,
            large: geo_window,
        })?;
    let seed = PolyCurve {
        vertices: verts[..=top_idx].to_vec(),
        kind: CurveKind::CrossingArc,
    };
    seed.validate()?;

    // Forward iterates of the right domain: the union's left edge.
    let delta0 = partner_min_boundary_displacement(g);
    if delta0 <= 0.0 {
        return Err(Error::CertificateFailure(
            "partner map does not move the boundary circles forward".into(),
        ));
    }
    let m_cap = ((10.0 * g.displacement_bound / delta0).ceil() as usize).max(8);
    let mut envelope = seed.densified(0.02 / g.lipschitz_bound.max(1.0));
    let mut iterate = envelope.clone();
    let mut m = 0usize;
    loop {
        iterate = map_arc(g, &iterate);
        m += 1;
        if m > m_cap {
            return Err(Error::HorizonOverflow {
                needed: m,
                cap: m_cap,
            });
        }
        let (env_lo, env_hi) = envelope.theta_range();
        let (it_lo, _) = iterate.theta_range();
        let _ = env_lo;
        if it_lo > env_hi {
            break;
        }
        envelope = splice_left_envelope(&envelope, &iterate)?;
    }

    // Deck overlap: a translate meeting the arc yields the subannulus.
    let overlaps = polyline_intersections(&envelope, &envelope.translated(-1.0));
    if !overlaps.is_empty() {
        let essential = overlap_loop(&envelope, &overlaps)?;
        return Ok(CrossingOutcome::DeckOverlap { essential });
    }

    let (arc, reduction_passes) = reduce_tau_free_arc(&envelope, g, 24)?;
    Ok(CrossingOutcome::Arc {
        arc,
        reduction_passes,
    })
}

fn partner_min_boundary_displacement(g: &LiftedMap) -> f64 {
    let mut lo = f64::INFINITY;
    for r in [-1.0, 1.0] {
        for i in 0..512 {
            lo = lo.min(g.displacement_at(StripPoint::new(i as f64 / 512.0, r)));
        }
    }
    lo
}

/// Loop between the first arc point whose forward translate lies on the
/// arc and that translate, in the one-period essential representation.
fn overlap_loop(arc: &PolyCurve, overlaps: &[StripPoint]) -> Result<PolyCurve> {
    let params = arc_params(arc);
    // Points z with τ(z) on the arc sit at crossings of arc and arc-1.
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    for x in overlaps {
        let z = *x;
        let tz = StripPoint::new(z.theta + 1.0, z.r);
        if let (Some(s0), Some(s1)) = (param_of(arc, &params, z), param_of(arc, &params, tz)) {
            pairs.push((s0, s1));
        }
    }
    let (s0, s1) = pairs
        .iter()
        .copied()
        .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
        .ok_or(Error::NoSeparatingComponent)?;
    let (lo, hi, forward) = if s0 < s1 { (s0, s1, true) } else { (s1, s0, false) };
    let mut vertices = Vec::new();
    append_range(arc, &params, lo, hi, &mut vertices);
    if !forward {
        // The loop runs from τ(z) to z: reverse and shift to restore the
        // +1 closing convention.
        vertices.reverse();
        for v in &mut vertices {
            *v = StripPoint::new(v.theta + 1.0, v.r);
        }
    }
    let essential = PolyCurve {
        vertices,
        kind: CurveKind::Line,
    };
    super::validate_essential(&essential)?;
    Ok(essential)
}
