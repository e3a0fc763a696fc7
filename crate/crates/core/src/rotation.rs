//! Rotation numbers, rotation-set estimates, mean horizontal
//! displacement and the swept-area identity.
//!
//! The reference measure is unnormalized Lebesgue on `S¹ × [-1, 1]`,
//! total mass 2.  Mean displacement integrates `z ↦ p₁(H(z̃)) - p₁(z̃)`
//! against it; for an area preserving map this equals the algebraic area
//! swept between any crossing arc of zero measure and its image.

use crate::cover::{LiftedMap, StripPoint};
use crate::geom::{CurveKind, PolyCurve};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Finite-horizon Birkhoff average with a tail-spread indicator.
#[derive(Debug, Clone, Copy)]
pub struct RotationEstimate {
    pub start: StripPoint,
    pub horizon: usize,
    pub average: f64,
    /// Spread of the running averages over the second half of the orbit.
    pub tail_spread: f64,
}

/// `(p₁(Hⁿ(z̃)) - p₁(z̃)) / n` plus the Cesàro tail spread over `[n/2, n]`.
pub fn birkhoff_rotation_number(h: &LiftedMap, z: StripPoint, n: usize) -> RotationEstimate {
    assert!(n >= 1);
    let mut p = z;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in 1..=n {
        p = h.forward(p);
        if 2 * k >= n {
            let avg = (p.theta - z.theta) / k as f64;
            lo = lo.min(avg);
            hi = hi.max(avg);
        }
    }
    RotationEstimate {
        start: z,
        horizon: n,
        average: (p.theta - z.theta) / n as f64,
        tail_spread: hi - lo,
    }
}

/// Sample-based estimate of the rotation interval.
#[derive(Debug, Clone)]
pub struct RotationReport {
    pub per_orbit: Vec<RotationEstimate>,
    /// `[a, b]` widened by the worst tail spread; sample-based, carries no
    /// certainty claim.
    pub interval: (f64, f64),
    pub spread: f64,
    pub samples: usize,
    pub horizon: usize,
    pub seed: u64,
}

/// Seeded orbit cloud plus boundary circles; the interval is the range of
/// per-orbit averages widened by the spread indicator.
pub fn rotation_set_estimate(
    h: &LiftedMap,
    samples: usize,
    horizon: usize,
    seed: u64,
) -> RotationReport {
    assert!(samples >= 100, "need at least 100 samples");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts: Vec<StripPoint> = Vec::with_capacity(samples);
    // Boundary circles carry the extreme averages for twist-like maps.
    let boundary_share = (samples / 10).max(8);
    for i in 0..boundary_share {
        let theta = i as f64 / boundary_share as f64;
        starts.push(StripPoint::new(theta, -1.0));
        starts.push(StripPoint::new(theta, 1.0));
    }
    while starts.len() < samples {
        starts.push(StripPoint::new(rng.gen_range(0.0..1.0), rng.gen_range(-1.0..1.0)));
    }
    let per_orbit: Vec<RotationEstimate> = starts
        .par_iter()
        .map(|z| birkhoff_rotation_number(h, *z, horizon))
        .collect();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut spread = 0.0f64;
    for e in &per_orbit {
        lo = lo.min(e.average);
        hi = hi.max(e.average);
        spread = spread.max(e.tail_spread);
    }
    RotationReport {
        per_orbit,
        interval: (lo - spread, hi + spread),
        spread,
        samples,
        horizon,
        seed,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureMethod {
    GridMidpoint,
    MonteCarlo,
}

/// Mean displacement with an error indicator.
#[derive(Debug, Clone, Copy)]
pub struct MeanDisplacement {
    pub value: f64,
    /// Richardson estimate for the grid rule, CLT bar for Monte Carlo.
    pub error_estimate: f64,
}

/// `∫ D_H dλ` over the annulus, mass-2 convention.
///
/// The grid rule is the midpoint rule, spectrally accurate in the
/// periodic θ direction; its error indicator is the Richardson difference
/// against the half-resolution rule.
pub fn mean_displacement(
    h: &LiftedMap,
    method: QuadratureMethod,
    resolution: usize,
    seed: u64,
) -> MeanDisplacement {
    match method {
        QuadratureMethod::GridMidpoint => {
            let full = midpoint_rule(h, resolution);
            let half = midpoint_rule(h, (resolution / 2).max(2));
            MeanDisplacement {
                value: full,
                error_estimate: (full - half).abs() / 3.0,
            }
        }
        QuadratureMethod::MonteCarlo => {
            let n = resolution * resolution;
            let chunk = 4096;
            let chunks = n.div_ceil(chunk);
            // Fixed per-chunk seed streams keep the sum independent of the
            // worker count.
            let partial: Vec<(f64, f64, usize)> = (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (c as u64).wrapping_mul(0x9e37_79b9));
                    let m = chunk.min(n - c * chunk);
                    let mut s = 0.0;
                    let mut s2 = 0.0;
                    for _ in 0..m {
                        let p = StripPoint::new(rng.gen_range(0.0..1.0), rng.gen_range(-1.0..1.0));
                        let d = h.displacement_at(p);
                        s += d;
                        s2 += d * d;
                    }
                    (s, s2, m)
                })
                .collect();
            let (sum, sum2, count) = partial
                .iter()
                .fold((0.0, 0.0, 0usize), |acc, x| (acc.0 + x.0, acc.1 + x.1, acc.2 + x.2));
            let mean = sum / count as f64;
            let var = (sum2 / count as f64 - mean * mean).max(0.0);
            MeanDisplacement {
                value: 2.0 * mean,
                error_estimate: 2.0 * (var / count as f64).sqrt() * 1.96,
            }
        }
    }
}

fn midpoint_rule(h: &LiftedMap, n: usize) -> f64 {
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|j| {
            let r = -1.0 + 2.0 * (j as f64 + 0.5) / n as f64;
            let mut acc = 0.0;
            for i in 0..n {
                let theta = (i as f64 + 0.5) / n as f64;
                acc += h.displacement_at(StripPoint::new(theta, r));
            }
            acc
        })
        .collect();
    let total: f64 = rows.iter().sum();
    2.0 * total / (n * n) as f64
}

/// Signed area swept from a crossing arc to its image.
///
/// The cycle runs up the arc, along the upper boundary to the image's top
/// endpoint, down the image, and back along the lower boundary; the
/// shoelace integral is signed positive when the image lies to the right.
/// The arc is refined until the area increment drops below 1e-8.
pub fn signed_area_between(h: &LiftedMap, arc: &PolyCurve) -> f64 {
    assert_eq!(arc.kind, CurveKind::CrossingArc, "arc must cross the strip");
    // Start below the finest existing segment so every halving genuinely
    // refines the image sampling.
    let min_seg = arc
        .segments()
        .iter()
        .map(|(a, b)| a.dist(*b))
        .fold(f64::INFINITY, f64::min);
    let mut len = (arc.length().max(0.5) / 8.0).min(min_seg);
    let mut prev = signed_area_at(h, arc, len);
    loop {
        len *= 0.5;
        let next = signed_area_at(h, arc, len);
        if (next - prev).abs() < 1e-8 || len < 1e-5 {
            return next;
        }
        prev = next;
    }
}

fn signed_area_at(h: &LiftedMap, arc: &PolyCurve, max_len: f64) -> f64 {
    let fine = arc.densified(max_len);
    let mut cycle: Vec<StripPoint> = fine.vertices.clone();
    let image: Vec<StripPoint> = fine.vertices.iter().map(|v| h.forward(*v)).collect();
    // Top edge to the image's top endpoint, down the image, bottom edge back.
    cycle.extend(image.iter().rev());
    // shoelace over the closed cycle: the two horizontal boundary edges
    // contribute nothing to ∮ x dy.
    -crate::geom::shoelace(&cycle)
}

/// Forward-orbit excursion probe.
#[derive(Debug, Clone, Copy)]
pub struct OrbitProbe {
    pub start: StripPoint,
    pub horizon: usize,
    pub max_right_excursion: f64,
    pub max_left_excursion: f64,
    pub unbounded_right_suspected: bool,
    pub unbounded_left_suspected: bool,
}

/// Track forward excursions `p₁(Hⁿ(z̃)) - p₁(z̃)` and flag crossings of
/// `±threshold`.
pub fn unbounded_orbit_probe(
    h: &LiftedMap,
    starts: &[StripPoint],
    horizon: usize,
    threshold: f64,
) -> Vec<OrbitProbe> {
    starts
        .par_iter()
        .map(|z| {
            let mut p = *z;
            let mut right = 0.0f64;
            let mut left = 0.0f64;
            for _ in 0..horizon {
                p = h.forward(p);
                let d = p.theta - z.theta;
                right = right.max(d);
                left = left.max(-d);
            }
            OrbitProbe {
                start: *z,
                horizon,
                max_right_excursion: right,
                max_left_excursion: left,
                unbounded_right_suspected: right > threshold,
                unbounded_left_suspected: left > threshold,
            }
        })
        .collect()
}

/// Evidence summary for the twist hypothesis: some probe ran off to the
/// right and some other to the left.
pub fn opposite_flags(probes: &[OrbitProbe]) -> bool {
    probes.iter().any(|p| p.unbounded_right_suspected)
        && probes.iter().any(|p| p.unbounded_left_suspected)
}

/// The vertical segment at `theta`, as a crossing arc.
pub fn vertical_arc(theta: f64) -> PolyCurve {
    PolyCurve {
        vertices: vec![StripPoint::new(theta, -1.0), StripPoint::new(theta, 1.0)],
        kind: CurveKind::CrossingArc,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::FamilySpec;

    #[test]
    fn rigid_rotation_number_is_exact() {
        let h = FamilySpec::Rigid { c: 0.3 }.build().unwrap();
        let est = birkhoff_rotation_number(&h, StripPoint::new(0.2, 0.4), 10_000);
        assert!((est.average - 0.3).abs() < 1e-12);
        assert!(est.tail_spread < 1e-12);
    }

    #[test]
    fn twist_rotation_number_reads_off_the_radius() {
        let h = FamilySpec::Twist { k: 0.5 }.build().unwrap();
        let est = birkhoff_rotation_number(&h, StripPoint::new(0.0, 0.8), 1000);
        assert!((est.average - 0.4).abs() < 1e-12);
    }

    #[test]
    fn rotation_set_estimates() {
        let rigid = FamilySpec::Rigid { c: 0.3 }.build().unwrap();
        let rep = rotation_set_estimate(&rigid, 128, 400, 7);
        assert!((rep.interval.0 - 0.3).abs() < 1e-9 && (rep.interval.1 - 0.3).abs() < 1e-9);

        let twist = FamilySpec::Twist { k: 0.5 }.build().unwrap();
        let rep = rotation_set_estimate(&twist, 128, 400, 7);
        assert!((rep.interval.0 + 0.5).abs() < 1e-6, "{:?}", rep.interval);
        assert!((rep.interval.1 - 0.5).abs() < 1e-6, "{:?}", rep.interval);

        let drift = FamilySpec::Drift { c: 0.4, beta: 0.3 }.build().unwrap();
        let rep = rotation_set_estimate(&drift, 128, 400, 7);
        assert!((rep.interval.0 - 0.4).abs() < 1e-9 && (rep.interval.1 - 0.4).abs() < 1e-9);
    }

    #[test]
    fn bump_orbit_averages_lie_in_the_estimated_interval() {
        let h = FamilySpec::Bump { b: 0.25, substeps: 8 }.build().unwrap();
        let rep = rotation_set_estimate(&h, 100, 300, 11);
        let probe = birkhoff_rotation_number(&h, StripPoint::new(0.37, 0.52), 300);
        assert!(
            probe.average >= rep.interval.0 - 1e-9 && probe.average <= rep.interval.1 + 1e-9,
            "{} not in {:?}",
            probe.average,
            rep.interval
        );
    }

    #[test]
    fn mean_displacement_examples() {
        let rigid = FamilySpec::Rigid { c: 0.3 }.build().unwrap();
        let m = mean_displacement(&rigid, QuadratureMethod::GridMidpoint, 64, 0);
        assert!((m.value - 0.6).abs() < 1e-12);

        let twist = FamilySpec::Twist { k: 0.5 }.build().unwrap();
        let m = mean_displacement(&twist, QuadratureMethod::GridMidpoint, 64, 0);
        assert!(m.value.abs() < 1e-12);

        let bump = FamilySpec::Bump { b: 0.25, substeps: 8 }.build().unwrap();
        let m = mean_displacement(&bump, QuadratureMethod::GridMidpoint, 128, 0);
        assert!(m.value.abs() < 1e-6, "bump mean {}", m.value);

        let mc = mean_displacement(&rigid, QuadratureMethod::MonteCarlo, 128, 5);
        assert!((mc.value - 0.6).abs() < 3.0 * mc.error_estimate.max(1e-3));
    }

    #[test]
    fn monte_carlo_is_deterministic_per_seed() {
        let h = FamilySpec::Drift { c: 0.4, beta: 0.3 }.build().unwrap();
        let a = mean_displacement(&h, QuadratureMethod::MonteCarlo, 64, 42);
        let b = mean_displacement(&h, QuadratureMethod::MonteCarlo, 64, 42);
        assert_eq!(a.value, b.value);
    }

    #[test]
    fn swept_area_examples() {
        // Rectangle of width 0.3 and height 2.
        let rigid = FamilySpec::Rigid { c: 0.3 }.build().unwrap();
        let a = signed_area_between(&rigid, &vertical_arc(0.0));
        assert!((a - 0.6).abs() < 1e-9, "area {a}");

        // Antisymmetric lens.
        let twist = FamilySpec::Twist { k: 0.5 }.build().unwrap();
        let a = signed_area_between(&twist, &vertical_arc(0.0));
        assert!(a.abs() < 1e-9, "area {a}");
    }

    #[test]
    fn swept_area_is_invariant_under_refinement_and_deck_translation() {
        let h = FamilySpec::Bump { b: 0.25, substeps: 8 }.build().unwrap();
        let arc = PolyCurve {
            vertices: vec![
                StripPoint::new(0.25, -1.0),
                StripPoint::new(0.4, -0.2),
                StripPoint::new(0.2, 0.5),
                StripPoint::new(0.25, 1.0),
            ],
            kind: CurveKind::CrossingArc,
        };
        let base = signed_area_between(&h, &arc);
        let refined = signed_area_between(&h, &arc.densified(0.01));
        assert!((base - refined).abs() < 1e-7, "{base} vs {refined}");
        let shifted = signed_area_between(&h, &arc.translated(3.0));
        assert!((base - shifted).abs() < 1e-9);
    }

    #[test]
    fn swept_area_identity_for_area_preserving_families() {
        // The mean displacement equals the swept area for any crossing arc.
        let cases: Vec<(LiftedMap, f64)> = vec![
            (FamilySpec::Rigid { c: 0.3 }.build().unwrap(), 0.6),
            (FamilySpec::Twist { k: 0.5 }.build().unwrap(), 0.0),
            (FamilySpec::Bump { b: 0.25, substeps: 8 }.build().unwrap(), 0.0),
        ];
        for (h, expect) in &cases {
            let mean = mean_displacement(h, QuadratureMethod::GridMidpoint, 256, 0);
            assert!((mean.value - expect).abs() < 1e-6, "{}: mean {}", h.label, mean.value);
            for theta in [0.0, 0.25] {
                let area = signed_area_between(h, &vertical_arc(theta));
                assert!(
                    (mean.value - area).abs() < 1e-6,
                    "{}: mean {} area {}",
                    h.label,
                    mean.value,
                    area
                );
            }
        }
    }

    #[test]
    fn deck_shift_moves_means_and_intervals() {
        let h = FamilySpec::Rigid { c: 0.3 }.build().unwrap();
        let shifted = h.deck_shift(2);
        let m0 = mean_displacement(&h, QuadratureMethod::GridMidpoint, 64, 0);
        let m2 = mean_displacement(&shifted, QuadratureMethod::GridMidpoint, 64, 0);
        assert!((m2.value - m0.value - 4.0).abs() < 1e-12, "mass-2 shift");
        let r0 = rotation_set_estimate(&h, 100, 200, 3);
        let r2 = rotation_set_estimate(&shifted, 100, 200, 3);
        assert!((r2.interval.0 - r0.interval.0 - 2.0).abs() < 1e-9);
        assert!((r2.interval.1 - r0.interval.1 - 2.0).abs() < 1e-9);
    }

    #[test]
    fn orbit_probe_flags() {
        let rigid = FamilySpec::Rigid { c: 0.3 }.build().unwrap();
        let probes = unbounded_orbit_probe(&rigid, &[StripPoint::new(0.0, 0.0)], 100, 5.0);
        assert!(probes[0].unbounded_right_suspected);
        assert!(!probes[0].unbounded_left_suspected);

        let twist = FamilySpec::Twist { k: 0.5 }.build().unwrap();
        let starts = [StripPoint::new(0.0, 0.8), StripPoint::new(0.0, -0.8)];
        let probes = unbounded_orbit_probe(&twist, &starts, 100, 5.0);
        assert!(opposite_flags(&probes));
    }

    #[test]
    fn excursions_are_monotone_in_the_horizon() {
        let h = FamilySpec::Bump { b: 0.25, substeps: 8 }.build().unwrap();
        let start = [StripPoint::new(0.3, 0.7)];
        let short = unbounded_orbit_probe(&h, &start, 200, 5.0);
        let long = unbounded_orbit_probe(&h, &start, 400, 5.0);
        assert!(long[0].max_right_excursion >= short[0].max_right_excursion);
        assert!(long[0].max_left_excursion >= short[0].max_left_excursion);
    }
}
