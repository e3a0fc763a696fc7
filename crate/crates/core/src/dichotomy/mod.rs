//! Witness extraction for the annulus dichotomy: either an essential
//! curve bounding a strictly shrinking subannulus, or a crossing arc
//! meeting its image only at fixed points with the image confined to one
//! local side.
//!
//! The driver checks the hypotheses (a fixed-point-free boundary circle,
//! no consecutive Nielsen classes, finitely many fixed points all of
//! index zero), normalizes the lift, builds the certified brick
//! decomposition and graph, probes the attractor/repeller flags and runs
//! the branch the flags call for.  Maps with enough fixed points to
//! settle the matter short-circuit into a fixed-point report.

mod arc;
mod frontier;

pub use arc::{reduce_tau_free_arc, ArcCertificates};
pub use frontier::{fill_and_frontier, EndKind, FrontierComponent};

use crate::brickwork::{build_brick_decomposition, normalize_lower, BrickDecomposition};
use crate::cover::{fract, LiftedMap, StripPoint};
use crate::error::{Error, Result};
use crate::fixed_index::{
    consecutive_classes, find_fixed_points, nielsen_partition, FixedPointRecord,
};
use crate::flowgraph::{
    attractor, boundedness_probe, build_brick_graph, check_exclusion, repeller, window_stable,
    BrickSet, ExclusionReport, ProbeCase,
};
use crate::geom::{polyline_intersections, CurveKind, PolyCurve};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Lower,
    Upper,
}

/// Direction of the strict inclusion, relative to the input map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapDirection {
    Forward,
    Inverse,
}

#[derive(Debug, Clone)]
pub struct SubannulusWitness {
    /// One period of the essential curve; the last vertex is the first
    /// translated by one deck step.
    pub curve: PolyCurve,
    pub side: Side,
    pub direction: MapDirection,
    /// Minimum distance from image samples (outside fixed-point balls) to
    /// the curve, with every sample strictly inside the subannulus.
    pub interior_margin: f64,
    /// Minimum distance between curve and image outside fixed-point balls.
    pub curve_image_gap: f64,
    /// Monte Carlo estimate of `λ(𝔹 ∖ h(𝔹))` with its error bar, for
    /// non-area-preserving maps.
    pub area_deficit: Option<(f64, f64)>,
    pub ball_radius: f64,
}

#[derive(Debug, Clone)]
pub struct CrossingArcWitness {
    pub arc: PolyCurve,
    pub certificates: ArcCertificates,
    /// Number of reduction passes that were needed to free the arc from
    /// its partner-map iterates.
    pub reduction_passes: usize,
}

#[derive(Debug, Clone)]
pub struct FixedPointsSummary {
    pub reason: String,
    pub records: Vec<FixedPointRecord>,
    pub class_counts: std::collections::BTreeMap<i64, usize>,
}

#[derive(Debug, Clone)]
pub enum Verdict {
    Subannulus(SubannulusWitness),
    CrossingArc(CrossingArcWitness),
    FixedPointsReport(FixedPointsSummary),
    Inconclusive(String),
}

impl Verdict {
    pub fn short_name(&self) -> &'static str {
        match self {
            Verdict::Subannulus(_) => "subannulus",
            Verdict::CrossingArc(_) => "crossing-arc",
            Verdict::FixedPointsReport(_) => "fixed-points",
            Verdict::Inconclusive(_) => "inconclusive",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ClassifyOutcome {
    pub verdict: Verdict,
    pub fixed_points: Vec<FixedPointRecord>,
    pub mirrored: bool,
    /// The internal machinery ran on a lift of the inverse map.
    pub machinery_on_inverse: bool,
    pub exclusion_reports: Vec<ExclusionReport>,
    pub window_used: i64,
    pub branch_log: Vec<String>,
}

#[derive(Debug, Clone, Copy)]
pub struct ClassifySettings {
    pub grid_n: usize,
    pub window: i64,
    pub fixed_grid_n: usize,
    pub fixed_tol: f64,
    pub seed: u64,
    pub mc_samples: usize,
    pub ball_radius: f64,
}

impl Default for ClassifySettings {
    fn default() -> Self {
        Self {
            grid_n: 8,
            window: 16,
            fixed_grid_n: 256,
            fixed_tol: 1e-10,
            seed: 0,
            mc_samples: 100_000,
            ball_radius: 1e-3,
        }
    }
}

/// Extended segments of the essential curve over deck translates.
fn extended_curve(curve: &PolyCurve, shifts: std::ops::RangeInclusive<i64>) -> Vec<PolyCurve> {
    shifts.map(|k| curve.translated(k as f64)).collect()
}

fn min_dist_to_extended(p: StripPoint, pieces: &[PolyCurve]) -> f64 {
    pieces
        .iter()
        .map(|c| c.min_dist_to_point(p))
        .fold(f64::INFINITY, f64::min)
}

/// Is `p` below the essential curve (in the component containing the
/// lower boundary circle)?  Counted by upward ray crossing parity over the
/// deck extension of the one-period curve.
fn below_essential(p: StripPoint, curve: &PolyCurve) -> bool {
    let mut theta = p.theta;
    // Nudge off vertex abscissas.
    'outer: loop {
        for v in &curve.vertices {
            if (fract(v.theta) - fract(theta)).abs() < 1e-12 {
                theta += 2.7e-12;
                continue 'outer;
            }
        }
        break;
    }
    let (lo, hi) = curve.theta_range();
    let k_min = (theta - hi).floor() as i64 - 1;
    let k_max = (theta - lo).ceil() as i64 + 1;
    let mut crossings = 0;
    for k in k_min..=k_max {
        let dx = k as f64;
        for (a, b) in curve.vertices.windows(2).map(|w| (w[0], w[1])) {
            let (xa, xb) = (a.theta + dx, b.theta + dx);
            if (xa - xb).abs() < 1e-15 {
                continue;
            }
            let (xlo, xhi) = if xa < xb { (xa, xb) } else { (xb, xa) };
            if theta < xlo || theta >= xhi {
                continue;
            }
            let t = (theta - xa) / (xb - xa);
            let y = a.r + t * (b.r - a.r);
            if y > p.r {
                crossings += 1;
            }
        }
    }
    crossings % 2 == 1
}

fn in_region(p: StripPoint, curve: &PolyCurve, side: Side) -> bool {
    match side {
        Side::Lower => below_essential(p, curve),
        Side::Upper => !below_essential(p, curve),
    }
}

/// Validate a one-period representation of an essential curve.
pub fn validate_essential(curve: &PolyCurve) -> Result<()> {
    let first = curve
        .vertices
        .first()
        .ok_or_else(|| Error::CertificateFailure("empty essential curve".into()))?;
    let last = curve.vertices.last().unwrap();
    if (last.theta - first.theta - 1.0).abs() > 1e-9 || (last.r - first.r).abs() > 1e-9 {
        return Err(Error::CertificateFailure(
            "essential curve must close up across one period".into(),
        ));
    }
    if (curve.theta_winding() - 1.0).abs() > 1e-9 {
        return Err(Error::CertificateFailure("essential curve must wind once".into()));
    }
    // Simple on the annulus: no self crossings, none against the next
    // translate beyond the shared junction vertex.
    if curve.has_self_intersection() {
        return Err(Error::CertificateFailure("essential curve is not simple".into()));
    }
    let next = curve.translated(1.0);
    for x in polyline_intersections(curve, &next) {
        if x.dist(*last) > 1e-9 {
            return Err(Error::CertificateFailure(
                "essential curve crosses its deck translate".into(),
            ));
        }
    }
    Ok(())
}

/// Select the separating component from quotient-mode frontier output,
/// verify deck invariance, and cut one period.
pub fn extract_essential_curve(comps: &[FrontierComponent], window: i64) -> Result<PolyCurve> {
    let span_needed = 2.0 * (window as f64 - 2.0) - 2.0;
    let mut line: Option<&FrontierComponent> = None;
    for c in comps {
        if c.closed {
            continue;
        }
        if c.ends != Some((EndKind::WindowEdge, EndKind::WindowEdge)) {
            continue;
        }
        let (lo, hi) = c.curve.theta_range();
        if hi - lo < span_needed {
            continue;
        }
        if c.curve.vertices.iter().any(|v| v.r.abs() > 1.0 - 1e-12) {
            continue;
        }
        line = Some(c);
        break;
    }
    let line = line.ok_or(Error::NoSeparatingComponent)?;

    // Deck invariance on the middle of the window.
    let curve = &line.curve;
    for v in curve.vertices.iter().filter(|v| v.theta.abs() < 2.0) {
        let shifted = StripPoint::new(v.theta + 1.0, v.r);
        if curve.min_dist_to_point(shifted) > 1e-9 {
            return Err(Error::CertificateFailure(format!(
                "frontier line is not deck invariant near θ={}",
                v.theta
            )));
        }
    }

    // Cut one period: walk from a crossing of θ = 0 to its translate.
    let period = cut_one_period(curve).ok_or(Error::NoSeparatingComponent)?;
    let curve = PolyCurve {
        vertices: period,
        kind: CurveKind::Line,
    };
    validate_essential(&curve)?;
    Ok(curve)
}

fn cut_one_period(curve: &PolyCurve) -> Option<Vec<StripPoint>> {
    for dir in [false, true] {
        let verts: Vec<StripPoint> = if dir {
            curve.vertices.iter().rev().copied().collect()
        } else {
            curve.vertices.clone()
        };
        // First crossing of θ = 0 (choosing the line keeps coordinates small).
        let mut start: Option<(usize, StripPoint)> = None;
        for (i, w) in verts.windows(2).enumerate() {
            let (a, b) = (w[0], w[1]);
            if (a.theta <= 0.0 && b.theta > 0.0) || (a.theta == 0.0) {
                let t = if (b.theta - a.theta).abs() < 1e-15 {
                    0.0
                } else {
                    (0.0 - a.theta) / (b.theta - a.theta)
                };
                if (0.0..=1.0).contains(&t) {
                    start = Some((i, StripPoint::new(0.0, a.r + t * (b.r - a.r))));
                    break;
                }
            }
        }
        let (i0, p0) = match start {
            Some(x) => x,
            None => continue,
        };
        let target = StripPoint::new(p0.theta + 1.0, p0.r);
        let mut out = vec![p0];
        for w in verts.windows(2).skip(i0) {
            let (a, b) = (w[0], w[1]);
            // Does this segment pass the target?
            let d = crate::geom::point_seg_dist(target, a, b);
            if d < 1e-9 {
                out.push(target);
                if out.len() >= 2 {
                    return Some(out);
                }
            }
            if b.dist(*out.last().unwrap()) > 1e-12 {
                out.push(b);
            }
            if out.len() > curve.vertices.len() + 4 {
                break;
            }
        }
    }
    None
}

/// Check the strict-inclusion certificate for the subannulus bounded by
/// the essential curve and the chosen boundary circle.
pub fn test_subannulus(
    h: &LiftedMap,
    curve: &PolyCurve,
    side: Side,
    fixed_points: &[FixedPointRecord],
    mc_samples: usize,
    seed: u64,
    ball_radius: f64,
) -> Result<SubannulusWitness> {
    validate_essential(curve)?;
    let pieces = extended_curve(curve, -3..=4);
    let fine = curve.densified(5e-3);
    let outside_balls = |p: StripPoint| {
        !fixed_points.iter().any(|fp| {
            let d = (fract(p.theta) - fp.location.theta_mod1).rem_euclid(1.0);
            let d = d.min(1.0 - d);
            (d * d + (p.r - fp.location.r).powi(2)).sqrt() < ball_radius
        })
    };

    let gap = {
        let mut best = f64::INFINITY;
        for v in fine.vertices.iter().filter(|v| outside_balls(**v)) {
            let q = h.forward(*v);
            if !outside_balls(q) {
                continue;
            }
            best = best.min(min_dist_to_extended(q, &pieces));
        }
        best
    };

    let mut chosen: Option<(MapDirection, f64)> = None;
    'dir: for direction in [MapDirection::Forward, MapDirection::Inverse] {
        let mut margin = f64::INFINITY;
        for v in &fine.vertices {
            let q = match direction {
                MapDirection::Forward => h.forward(*v),
                MapDirection::Inverse => h.inverse(*v),
            };
            if !outside_balls(q) {
                continue;
            }
            let dist = min_dist_to_extended(q, &pieces);
            if !in_region(q, curve, side) || dist <= 0.0 {
                continue 'dir;
            }
            margin = margin.min(dist);
        }
        chosen = Some((direction, margin));
        break;
    }
    let (direction, interior_margin) = chosen.ok_or(Error::NotProper)?;

    let area_deficit = if h.preserves_area {
        None
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut hits = 0usize;
        for _ in 0..mc_samples {
            let p = StripPoint::new(rng.gen_range(0.0..1.0), rng.gen_range(-1.0..1.0));
            if !in_region(p, curve, side) {
                continue;
            }
            let q = match direction {
                MapDirection::Forward => h.inverse(p),
                MapDirection::Inverse => h.forward(p),
            };
            if !in_region(q, curve, side) {
                hits += 1;
            }
        }
        let frac = hits as f64 / mc_samples as f64;
        let value = 2.0 * frac;
        let bar = 2.0 * 1.96 * (frac * (1.0 - frac) / mc_samples as f64).sqrt();
        Some((value, bar))
    };

    Ok(SubannulusWitness {
        curve: curve.clone(),
        side,
        direction,
        interior_margin,
        curve_image_gap: gap,
        area_deficit,
        ball_radius,
    })
}

/// Search for a horizontal circle disjoint from its image (the fallback
/// when the partner map does not visibly translate both boundaries).
pub fn free_circle_search(h: &LiftedMap, levels: usize) -> Option<PolyCurve> {
    for j in 1..levels {
        let r = -1.0 + 2.0 * j as f64 / levels as f64;
        let mut clear = f64::INFINITY;
        for i in 0..256 {
            let p = StripPoint::new(i as f64 / 256.0, r);
            let q = h.forward(p);
            clear = clear.min((q.r - r).abs());
        }
        let slack = h.lipschitz_bound * (1.0 / 256.0);
        if clear - slack > 0.0 {
            return Some(PolyCurve {
                vertices: vec![StripPoint::new(0.0, r), StripPoint::new(1.0, r)],
                kind: CurveKind::Line,
            });
        }
    }
    None
}

struct Machinery {
    h: LiftedMap,
    g: LiftedMap,
    n0: Vec<FixedPointRecord>,
    on_inverse: bool,
}

fn choose_machinery(h0: &LiftedMap, fps: &[FixedPointRecord]) -> Machinery {
    let shift_of = |rec: &FixedPointRecord| -> i64 {
        h0.displacement(rec.location).round() as i64
    };
    let class0: Vec<FixedPointRecord> = fps.iter().filter(|r| shift_of(r) == 0).cloned().collect();
    let class1: Vec<FixedPointRecord> = fps.iter().filter(|r| shift_of(r) == 1).cloned().collect();
    if !class0.is_empty() || class1.is_empty() {
        Machinery {
            h: h0.clone(),
            g: h0.tau_inverse_partner(),
            n0: class0,
            on_inverse: false,
        }
    } else {
        // The partner carries the fixed points; swap roles.
        Machinery {
            h: h0.tau_inverse_partner(),
            g: h0.clone(),
            n0: class1,
            on_inverse: true,
        }
    }
}

/// Run the full pipeline for one lift.
pub fn classify(h: &LiftedMap, settings: &ClassifySettings) -> Result<ClassifyOutcome> {
    let mut log: Vec<String> = Vec::new();

    // Fixed points; an invariant continuum is reported, not an error.
    let fps = match find_fixed_points(h, settings.fixed_grid_n, settings.fixed_tol) {
        Ok(fps) => fps,
        Err(Error::NonIsolatedFixedSet { candidates }) => {
            return Ok(ClassifyOutcome {
                verdict: Verdict::FixedPointsReport(FixedPointsSummary {
                    reason: format!(
                        "fixed point set is not finite ({candidates} refined candidates); the map has fixed points in abundance"
                    ),
                    records: vec![],
                    class_counts: Default::default(),
                }),
                fixed_points: vec![],
                mirrored: false,
                machinery_on_inverse: false,
                exclusion_reports: vec![],
                window_used: 0,
                branch_log: vec!["non-isolated fixed set".into()],
            });
        }
        Err(e) => return Err(e),
    };
    let table = nielsen_partition(h, &fps);
    let class_counts: std::collections::BTreeMap<i64, usize> =
        table.classes.iter().map(|(k, v)| (*k, v.len())).collect();
    let summary = |reason: String| FixedPointsSummary {
        reason,
        records: fps.clone(),
        class_counts: class_counts.clone(),
    };

    // Hypothesis: one boundary circle must be fixed point free.
    let lower_blocked = fps.iter().any(|f| f.on_boundary && f.location.r < 0.0);
    let upper_blocked = fps.iter().any(|f| f.on_boundary && f.location.r > 0.0);
    if lower_blocked && upper_blocked {
        return finish(
            Verdict::FixedPointsReport(summary(
                "both boundary circles carry fixed points".into(),
            )),
            fps,
            false,
            false,
            vec![],
            0,
            log,
        );
    }
    let mirrored = lower_blocked;
    let work_map = if mirrored { h.mirrored() } else { h.clone() };
    let work_fps: Vec<FixedPointRecord> = if mirrored {
        fps.iter()
            .map(|f| {
                let mut g = f.clone();
                g.location = crate::cover::AnnulusPoint::new(f.location.theta_mod1, -f.location.r);
                g
            })
            .collect()
    } else {
        fps.clone()
    };
    if mirrored {
        log.push("mirrored: lower boundary carries a fixed point".into());
    }

    // Hypothesis: no consecutive Nielsen classes.
    let pairs = consecutive_classes(&table);
    if !pairs.is_empty() {
        return finish(
            Verdict::FixedPointsReport(summary(format!(
                "consecutive Nielsen classes at shifts {:?}; the map already has fixed points of two adjacent lifts",
                pairs
            ))),
            fps,
            mirrored,
            false,
            vec![],
            0,
            log,
        );
    }

    // Hypothesis: all indices vanish.
    if fps.iter().any(|f| f.index != 0) {
        let total: usize = fps.len();
        return finish(
            Verdict::FixedPointsReport(summary(format!(
                "{total} fixed points present with nonzero winding indices; no witness construction is needed"
            ))),
            fps,
            mirrored,
            false,
            vec![],
            0,
            log,
        );
    }

    // Normalize the lower boundary displacement into (0, 1).
    let h0 = match normalize_lower(&work_map) {
        Ok(h0) => h0,
        Err(Error::BoundaryFixedPoint { min_displacement }) => {
            return finish(
                Verdict::Inconclusive(format!(
                    "lower boundary displacement degenerate ({min_displacement:.2e}) after mirroring"
                )),
                fps,
                mirrored,
                false,
                vec![],
                0,
                log,
            );
        }
        Err(Error::NormalizationError { min, max }) => {
            return finish(
                Verdict::Inconclusive(format!(
                    "boundary displacement range [{min:.4}, {max:.4}] spans an integer"
                )),
                fps,
                mirrored,
                false,
                vec![],
                0,
                log,
            );
        }
        Err(e) => return Err(e),
    };

    let machinery = choose_machinery(&h0, &work_fps);
    if machinery.on_inverse {
        log.push("machinery runs on the inverse lift".into());
    }

    // Bricks and graph.
    let deco = match build_brick_decomposition(&machinery.h, settings.grid_n, &machinery.n0) {
        Ok(d) => d,
        Err(Error::RefinementOverflow { depth, theta, r }) => {
            return finish(
                Verdict::Inconclusive(format!(
                    "brick refinement overflow at depth {depth} near ({theta:.4}, {r:.4})"
                )),
                fps,
                mirrored,
                machinery.on_inverse,
                vec![],
                0,
                log,
            );
        }
        Err(e) => return Err(e),
    };
    log.push(format!(
        "bricks: {} per period, epsilon {}",
        deco.brick_count(),
        deco.epsilon
    ));
    let graph = build_brick_graph(&machinery.h, &deco);
    let b0 = deco.boundary_brick(0);

    let mut window = settings.window;
    let (att, rep) = loop {
        match window_stable(&graph, &deco, b0, window) {
            Ok(pair) => break pair,
            Err(Error::WindowTooSmall { .. }) if window < 128 => {
                log.push(format!("window {window} unstable; doubling"));
                window *= 2;
            }
            Err(e) => {
                return finish(
                    Verdict::Inconclusive(format!("window instability persists: {e}")),
                    fps,
                    mirrored,
                    machinery.on_inverse,
                    vec![],
                    window,
                    log,
                );
            }
        }
    };

    let mut exclusions = Vec::new();
    for n in 0..5 {
        exclusions.push(check_exclusion(&graph, &deco, deco.boundary_brick(n), window));
    }

    let case_a = boundedness_probe(&att);
    let case_r = boundedness_probe(&rep);
    log.push(format!("probe: attractor {:?}, repeller {:?}", case_a, case_r));

    let verdict = run_branch(
        h,
        &machinery,
        &deco,
        &att,
        &rep,
        case_a,
        case_r,
        window,
        mirrored,
        &fps,
        settings,
        &mut log,
    )?;
    finish(
        verdict,
        fps,
        mirrored,
        machinery.on_inverse,
        exclusions,
        window,
        log,
    )
}

#[allow(clippy::too_many_arguments)]
fn finish(
    verdict: Verdict,
    fixed_points: Vec<FixedPointRecord>,
    mirrored: bool,
    machinery_on_inverse: bool,
    exclusion_reports: Vec<ExclusionReport>,
    window_used: i64,
    branch_log: Vec<String>,
) -> Result<ClassifyOutcome> {
    Ok(ClassifyOutcome {
        verdict,
        fixed_points,
        mirrored,
        machinery_on_inverse,
        exclusion_reports,
        window_used,
        branch_log,
    })
}

fn unmirror_curve(curve: &PolyCurve, mirrored: bool) -> PolyCurve {
    if !mirrored {
        return curve.clone();
    }
    let mut vertices: Vec<StripPoint> = curve
        .vertices
        .iter()
        .map(|v| StripPoint::new(v.theta, -v.r))
        .collect();
    match curve.kind {
        CurveKind::CrossingArc => {
            vertices.reverse();
        }
        CurveKind::Line => {
            // Keep the one-period orientation: reversing would flip the
            // winding, so re-anchor instead.
            if (vertices.last().unwrap().theta - vertices.first().unwrap().theta - 1.0).abs() > 1e-9
            {
                vertices.reverse();
            }
        }
        CurveKind::Jordan => {}
    }
    PolyCurve {
        vertices,
        kind: curve.kind,
    }
}

#[allow(clippy::too_many_arguments)]
fn run_branch(
    user_h: &LiftedMap,
    machinery: &Machinery,
    deco: &BrickDecomposition,
    att: &BrickSet,
    rep: &BrickSet,
    case_a: ProbeCase,
    case_r: ProbeCase,
    window: i64,
    mirrored: bool,
    user_fps: &[FixedPointRecord],
    settings: &ClassifySettings,
    log: &mut Vec<String>,
) -> Result<Verdict> {
    let geo_window = window.min(24);
    // Subannulus extraction from whichever set misses the upper boundary.
    let from_set = |set: &BrickSet| -> Result<PolyCurve> {
        // Deck-saturate the member classes: X₀ = ∪ τⁿ(set).
        let classes: std::collections::BTreeSet<usize> =
            set.members.iter().map(|(id, _)| *id).collect();
        let comps = fill_and_frontier(deco, geo_window, |id, _| classes.contains(&id))?;
        extract_essential_curve(&comps, geo_window)
    };

    if case_a == ProbeCase::CurveFromAttractor || case_r == ProbeCase::CurveFromAttractor {
        log.push("branch: essential curve from the filled attractor".into());
        let curve = from_set(att)?;
        let witness = test_subannulus(
            user_h,
            &unmirror_curve(&curve, mirrored),
            if mirrored { Side::Upper } else { Side::Lower },
            user_fps,
            settings.mc_samples,
            settings.seed,
            settings.ball_radius,
        )?;
        return Ok(Verdict::Subannulus(witness));
    }
    if case_a == ProbeCase::CurveFromRepeller || case_r == ProbeCase::CurveFromRepeller {
        log.push("branch: essential curve from the filled repeller".into());
        let curve = from_set(rep)?;
        let witness = test_subannulus(
            user_h,
            &unmirror_curve(&curve, mirrored),
            if mirrored { Side::Upper } else { Side::Lower },
            user_fps,
            settings.mc_samples,
            settings.seed,
            settings.ball_radius,
        )?;
        return Ok(Verdict::Subannulus(witness));
    }
    if case_a == ProbeCase::CrossingArc || case_r == ProbeCase::CrossingArc {
        // The construction needs the partner map to translate both
        // boundary circles forward; otherwise fall back to a search for a
        // free essential circle.
        let g_ok = [-1.0, 1.0].iter().all(|r| {
            (0..512).all(|i| {
                machinery
                    .g
                    .displacement_at(StripPoint::new(i as f64 / 512.0, *r))
                    > 1e-6
            })
        });
        if !g_ok {
            log.push("branch: partner map not forward on both circles; free-circle fallback".into());
            if let Some(circle) = free_circle_search(user_h, 64) {
                for side in [Side::Lower, Side::Upper] {
                    if let Ok(w) = test_subannulus(
                        user_h,
                        &circle,
                        side,
                        user_fps,
                        settings.mc_samples,
                        settings.seed,
                        settings.ball_radius,
                    ) {
                        return Ok(Verdict::Subannulus(w));
                    }
                }
            }
            return Ok(Verdict::Inconclusive(
                "no free essential circle found for the fallback branch".into(),
            ));
        }
        log.push("branch: crossing arc".into());
        match arc::extract_crossing_arc(&machinery.h, &machinery.g, att, deco, geo_window)? {
            arc::CrossingOutcome::Arc { arc, reduction_passes } => {
                let user_arc = unmirror_curve(&arc, mirrored);
                let certificates = arc::certify_crossing_arc(
                    user_h,
                    &user_arc,
                    user_fps,
                    settings.ball_radius,
                )?;
                return Ok(Verdict::CrossingArc(CrossingArcWitness {
                    arc: user_arc,
                    certificates,
                    reduction_passes,
                }));
            }
            arc::CrossingOutcome::DeckOverlap { essential } => {
                log.push("deck translate met the arc; subannulus from the overlap loop".into());
                let witness = test_subannulus(
                    user_h,
                    &unmirror_curve(&essential, mirrored),
                    if mirrored { Side::Upper } else { Side::Lower },
                    user_fps,
                    settings.mc_samples,
                    settings.seed,
                    settings.ball_radius,
                )?;
                return Ok(Verdict::Subannulus(witness));
            }
        }
    }
    Ok(Verdict::Inconclusive(format!(
        "probes inconclusive: attractor {:?}, repeller {:?}",
        case_a, case_r
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::FamilySpec;

    #[test]
    fn drift_classifies_as_a_shrinking_subannulus() {
        let h = FamilySpec::Drift { c: 0.4, beta: 0.3 }.build().unwrap();
        let out = classify(&h, &ClassifySettings::default()).unwrap();
        let Verdict::Subannulus(w) = &out.verdict else {
            panic!("expected subannulus, got {:?}", out.verdict.short_name());
        };
        assert_eq!(w.side, Side::Lower);
        assert_eq!(w.direction, MapDirection::Forward);
        // The curve is the top of the boundary collar: the circle r = -1/2.
        for v in &w.curve.vertices {
            assert!((v.r + 0.5).abs() < 1e-9, "{:?}", v);
        }
        // Oracle: direct geometry of the drift family. h(J) is the circle
        // r = g(-1/2) = -0.725, so the gap is 0.225 and the deficit is the
        // band between them (θ-mass 1).
        assert!((w.curve_image_gap - 0.225).abs() < 1e-6, "gap {}", w.curve_image_gap);
        let (deficit, bar) = w.area_deficit.unwrap();
        assert!((deficit - 0.225).abs() < 3.0 * bar + 5e-3, "deficit {deficit}");
        assert!(deficit > 0.1);
    }

    #[test]
    fn rotation_classifies_as_a_crossing_arc() {
        let h = FamilySpec::Rigid { c: 0.3 }.build().unwrap();
        let settings = ClassifySettings {
            grid_n: 6,
            ..ClassifySettings::default()
        };
        let out = classify(&h, &settings).unwrap();
        let Verdict::CrossingArc(w) = &out.verdict else {
            panic!("expected crossing arc, got {:?}", out.verdict.short_name());
        };
        assert!(w.certificates.gap_outside_balls > 0.05, "gap {}", w.certificates.gap_outside_balls);
        assert!(w.certificates.one_sided);
        assert_eq!(w.reduction_passes, 0);
        // Analytic witness comparison: a vertical segment is another valid
        // arc with gap 0.3; the machinery's staircase keeps a comfortable
        // fraction of it.
        assert!(w.certificates.gap_outside_balls > 0.1);
        let first = w.arc.vertices.first().unwrap();
        let last = w.arc.vertices.last().unwrap();
        assert!((first.r + 1.0).abs() < 1e-12 && (last.r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bump_reports_its_two_fixed_points() {
        let h = FamilySpec::Bump { b: 0.25, substeps: 8 }.build().unwrap();
        let out = classify(&h, &ClassifySettings::default()).unwrap();
        let Verdict::FixedPointsReport(s) = &out.verdict else {
            panic!("expected fixed point report, got {:?}", out.verdict.short_name());
        };
        assert_eq!(s.records.len(), 2);
        assert_eq!(s.class_counts.get(&0), Some(&2));
    }

    #[test]
    fn twist_reports_the_invariant_circle() {
        let h = FamilySpec::Twist { k: 0.5 }.build().unwrap();
        let out = classify(&h, &ClassifySettings::default()).unwrap();
        assert!(matches!(out.verdict, Verdict::FixedPointsReport(_)));
    }

    #[test]
    fn pinch_classifies_as_a_crossing_arc_near_its_fixed_point() {
        let h = FamilySpec::Pinch { c: 0.5, theta0: 0.5, r0: 0.0 }.build().unwrap();
        let out = classify(&h, &ClassifySettings::default()).unwrap();
        let Verdict::CrossingArc(w) = &out.verdict else {
            panic!("expected crossing arc, got {:?}", out.verdict.short_name());
        };
        assert!(w.certificates.gap_outside_balls > 0.0);
        assert!(w.certificates.one_sided);
    }

    #[test]
    fn boundary_pinch_goes_through_the_mirror_path() {
        let h = FamilySpec::Pinch { c: 0.5, theta0: 0.25, r0: -1.0 }.build().unwrap();
        let out = classify(&h, &ClassifySettings::default()).unwrap();
        assert!(out.mirrored);
        let Verdict::CrossingArc(w) = &out.verdict else {
            panic!("expected crossing arc, got {:?}", out.verdict.short_name());
        };
        // The witness is expressed in the original coordinates.
        let first = w.arc.vertices.first().unwrap();
        assert!((first.r + 1.0).abs() < 1e-12);
        assert!(w.certificates.one_sided);
    }

    #[test]
    fn inverse_lift_machinery_still_produces_a_witness() {
        // Displacement 1 - c·ρ: the fixed point sits in the shift-one
        // class, so the partner map carries the construction.
        let h = FamilySpec::Pinch { c: 0.5, theta0: 0.5, r0: 0.0 }
            .build()
            .unwrap()
            .tau_inverse_partner();
        let out = classify(&h, &ClassifySettings::default()).unwrap();
        assert!(out.machinery_on_inverse);
        assert!(
            matches!(out.verdict, Verdict::CrossingArc(_)),
            "got {:?}",
            out.verdict.short_name()
        );
    }

    #[test]
    fn exclusion_reports_pass_for_witness_families() {
        for spec in [
            FamilySpec::Rigid { c: 0.3 },
            FamilySpec::Drift { c: 0.4, beta: 0.3 },
            FamilySpec::Pinch { c: 0.5, theta0: 0.5, r0: 0.0 },
        ] {
            let h = spec.build().unwrap();
            let out = classify(&h, &ClassifySettings::default()).unwrap();
            assert!(!out.exclusion_reports.is_empty());
            for rep in &out.exclusion_reports {
                assert!(rep.pass, "{}: {:?}", h.label, rep);
            }
        }
    }

    #[test]
    fn free_circle_search_finds_drift_circles() {
        let h = FamilySpec::Drift { c: 0.4, beta: 0.3 }.build().unwrap();
        let circle = free_circle_search(&h, 32).unwrap();
        validate_essential(&circle).unwrap();
    }

    #[test]
    fn subannulus_rejects_an_invariant_circle() {
        // Rotation preserves every horizontal circle: the certificate
        // J ∩ h(J) = ∅ must fail.
        let h = FamilySpec::Rigid { c: 0.3 }.build().unwrap();
        let circle = PolyCurve {
            vertices: vec![StripPoint::new(0.0, 0.25), StripPoint::new(1.0, 0.25)],
            kind: CurveKind::Line,
        };
        let res = test_subannulus(&h, &circle, Side::Lower, &[], 1000, 0, 1e-3);
        assert!(matches!(res, Err(Error::NotProper)), "{res:?}");
    }

    #[test]
    fn subannulus_region_parity() {
        let curve = PolyCurve {
            vertices: vec![
                StripPoint::new(0.0, -0.5),
                StripPoint::new(0.3, -0.3),
                StripPoint::new(0.7, -0.6),
                StripPoint::new(1.0, -0.5),
            ],
            kind: CurveKind::Line,
        };
        validate_essential(&curve).unwrap();
        assert!(below_essential(StripPoint::new(0.5, -0.9), &curve));
        assert!(below_essential(StripPoint::new(7.2, -0.9), &curve));
        assert!(!below_essential(StripPoint::new(0.5, 0.0), &curve));
        assert!(!in_region(StripPoint::new(0.5, -0.9), &curve, Side::Upper));
    }
}
