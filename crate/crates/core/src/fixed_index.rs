//! Fixed points, winding-number indices and Nielsen classes.
//!
//! Fixed points of the annulus map are zeros of the displacement vector
//! field `z ↦ H(z̃) - z̃`, which is well defined on the annulus by
//! equivariance.  Each zero carries the integer shift of the lift fixing
//! its preimages, an integer winding index, and the residual left by the
//! local refinement.

use crate::cover::{fract, AnnulusPoint, LiftedMap, PlaneMap, StripPoint};
use crate::error::{Error, Result};
use crate::geom::PolyCurve;
use rayon::prelude::*;
use std::collections::BTreeMap;

/// A refined fixed point of the annulus map.
#[derive(Debug, Clone)]
pub struct FixedPointRecord {
    pub location: AnnulusPoint,
    /// `n` such that `τ^{-n} ∘ H` fixes the preimages.
    pub nielsen_shift: i64,
    pub index: i64,
    pub on_boundary: bool,
    pub refinement_residual: f64,
}

/// Fixed points grouped by the lift that fixes them.
#[derive(Debug, Clone)]
pub struct NielsenClassTable {
    pub classes: BTreeMap<i64, Vec<FixedPointRecord>>,
    /// Per-class index sums; zero for area-preserving maps with finite
    /// fixed sets.
    pub index_sums: BTreeMap<i64, i64>,
    pub reference_label: String,
    pub preserves_area: bool,
}

/// Maximum number of isolated fixed points tolerated before the refined
/// candidates are declared a non-isolated set (e.g. an invariant circle).
const MAX_ISOLATED: usize = 64;

fn displacement_vec(h: &LiftedMap, p: StripPoint) -> (f64, f64) {
    let q = h.forward(p);
    (q.theta - p.theta, q.r - p.r)
}

fn disp_norm(h: &LiftedMap, p: StripPoint) -> f64 {
    let (dt, dr) = displacement_vec(h, p);
    // Shift the θ-component to the nearest integer: a fixed point of some
    // lift has integer horizontal displacement.
    let frac = dt - dt.round();
    (frac * frac + dr * dr).sqrt()
}

/// Newton refinement of a candidate zero of the displacement field, with a
/// damped norm-descent fallback for degenerate zeros.
fn refine_candidate(h: &LiftedMap, start: StripPoint, steps: usize) -> (StripPoint, f64) {
    let mut z = start;
    let mut best = z;
    let mut best_norm = disp_norm(h, z);
    let fd = 1e-7;
    for _ in 0..steps {
        let (dt, dr) = displacement_vec(h, z);
        let f0 = (dt - dt.round(), dr);
        let norm0 = (f0.0 * f0.0 + f0.1 * f0.1).sqrt();
        if norm0 < best_norm {
            best_norm = norm0;
            best = z;
        }
        if norm0 < 1e-14 {
            break;
        }
        // Finite-difference Jacobian of the displacement field.
        let zt = StripPoint::new(z.theta + fd, z.r);
        let zr = StripPoint::new(z.theta, (z.r + fd).clamp(-1.0, 1.0));
        let (at, ar) = displacement_vec(h, zt);
        let (bt, br) = displacement_vec(h, zr);
        let hr = zr.r - z.r;
        if hr == 0.0 {
            break;
        }
        let j00 = (at - dt) / fd;
        let j01 = (bt - dt) / hr;
        let j10 = (ar - dr) / fd;
        let j11 = (br - dr) / hr;
        let det = j00 * j11 - j01 * j10;
        let (mut st, mut sr) = if det.abs() > 1e-12 {
            (
                -(j11 * f0.0 - j01 * f0.1) / det,
                -(-j10 * f0.0 + j00 * f0.1) / det,
            )
        } else {
            // Degenerate: descend the squared norm along its gradient.
            let gt = 2.0 * (f0.0 * j00 + f0.1 * j10);
            let gr = 2.0 * (f0.0 * j01 + f0.1 * j11);
            let g2 = (gt * gt + gr * gr).max(1e-30);
            (-norm0 * norm0 * gt / g2, -norm0 * norm0 * gr / g2)
        };
        // Damp long steps.
        let len = (st * st + sr * sr).sqrt();
        if len > 0.1 {
            st *= 0.1 / len;
            sr *= 0.1 / len;
        }
        let mut moved = false;
        let mut scale = 1.0;
        for _ in 0..20 {
            let cand = StripPoint::new(z.theta + scale * st, (z.r + scale * sr).clamp(-1.0, 1.0));
            if disp_norm(h, cand) < norm0 {
                z = cand;
                moved = true;
                break;
            }
            scale *= 0.5;
        }
        if !moved {
            break;
        }
    }
    let n = disp_norm(h, best);
    (best, n)
}

/// Locate the fixed points of the annulus map underlying `h`.
///
/// Interior candidates come from coarse-grid minima of the displacement
/// norm; boundary circles are scanned separately through their 1-D
/// restrictions.  Candidates are refined by damped Newton/bisection and
/// deduplicated keeping the smaller residual.
pub fn find_fixed_points(h: &LiftedMap, grid_n: usize, tol: f64) -> Result<Vec<FixedPointRecord>> {
    assert!(grid_n >= 16, "grid_n must be at least 16");
    let nt = grid_n;
    let nr = grid_n;
    let cell_t = 1.0 / nt as f64;
    let cell_r = 2.0 / nr as f64;
    let reach = (h.lipschitz_bound + 1.0) * (cell_t.powi(2) + cell_r.powi(2)).sqrt();

    let norms: Vec<Vec<f64>> = (0..=nr)
        .into_par_iter()
        .map(|j| {
            let r = -1.0 + j as f64 * cell_r;
            (0..nt)
                .map(|i| disp_norm(h, StripPoint::new(i as f64 * cell_t, r)))
                .collect()
        })
        .collect();

    // Local minima of the sampled norm that could hide a zero.
    let mut candidates: Vec<StripPoint> = Vec::new();
    for j in 0..=nr {
        for i in 0..nt {
            let v = norms[j][i];
            if v > reach {
                continue;
            }
            let mut is_min = true;
            for (dj, di) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)] {
                let jj = j as i64 + dj;
                if !(0..=nr as i64).contains(&jj) {
                    continue;
                }
                let ii = (i as i64 + di).rem_euclid(nt as i64) as usize;
                if norms[jj as usize][ii] < v {
                    is_min = false;
                    break;
                }
            }
            if is_min {
                candidates.push(StripPoint::new(i as f64 * cell_t, -1.0 + j as f64 * cell_r));
            }
        }
    }

    let refined: Vec<(StripPoint, f64)> = candidates
        .par_iter()
        .map(|c| refine_candidate(h, *c, 60))
        .collect();

    let mut records: Vec<FixedPointRecord> = Vec::new();
    for (z, residual) in refined {
        if residual >= tol {
            continue;
        }
        let a = AnnulusPoint::new(fract(z.theta), z.r.clamp(-1.0, 1.0));
        let shift = h.displacement_at(z).round() as i64;
        let on_boundary = z.r.abs() > 1.0 - 1e-9;
        push_dedup(
            &mut records,
            FixedPointRecord {
                location: a,
                nielsen_shift: shift,
                index: 0,
                on_boundary,
                refinement_residual: residual,
            },
            (2.0 * tol).max(1e-7),
        );
    }

    // 1-D boundary restrictions: roots of θ ↦ p₁(H(θ,±1)) - θ - n.
    for r in [-1.0, 1.0] {
        for z in boundary_roots(h, r, 4 * grid_n, tol) {
            let shift = h.displacement_at(z).round() as i64;
            push_dedup(
                &mut records,
                FixedPointRecord {
                    location: AnnulusPoint::new(fract(z.theta), r),
                    nielsen_shift: shift,
                    index: 0,
                    on_boundary: true,
                    refinement_residual: disp_norm(h, z),
                },
                (2.0 * tol).max(1e-7),
            );
        }
    }

    if records.len() > MAX_ISOLATED {
        return Err(Error::NonIsolatedFixedSet {
            candidates: records.len(),
        });
    }

    records.sort_by(|a, b| {
        (a.location.theta_mod1, a.location.r)
            .partial_cmp(&(b.location.theta_mod1, b.location.r))
            .unwrap()
    });

    // Attach winding indices now that the set is known to be isolated.
    let f = h.plane_extension();
    let sep = min_pairwise_separation(&records).min(0.05);
    for k in 0..records.len() {
        let rec = records[k].clone();
        let idx = if rec.on_boundary {
            boundary_fixed_index(h, &rec)?
        } else {
            let radius = (sep * 0.25).clamp(1e-4, 0.02);
            let centre = StripPoint::new(rec.location.theta_mod1, rec.location.r);
            curve_index(&f, &circle_around(centre, radius))?
        };
        records[k].index = idx;
    }

    Ok(records)
}

fn min_pairwise_separation(records: &[FixedPointRecord]) -> f64 {
    let mut best: f64 = f64::INFINITY;
    for i in 0..records.len() {
        for j in i + 1..records.len() {
            best = best.min(records[i].location.dist(records[j].location));
        }
    }
    best
}

fn push_dedup(records: &mut Vec<FixedPointRecord>, rec: FixedPointRecord, radius: f64) {
    for existing in records.iter_mut() {
        if existing.location.dist(rec.location) < radius
            && existing.nielsen_shift == rec.nielsen_shift
        {
            if rec.refinement_residual < existing.refinement_residual {
                *existing = rec;
            }
            return;
        }
    }
    records.push(rec);
}

/// Roots of the boundary circle displacement (values within `tol` of an
/// integer), located by sampling plus bisection or ternary refinement.
fn boundary_roots(h: &LiftedMap, r: f64, samples: usize, tol: f64) -> Vec<StripPoint> {
    let g = |theta: f64| {
        let d = h.displacement_at(StripPoint::new(theta, r));
        d - d.round()
    };
    let mut out: Vec<StripPoint> = Vec::new();
    let step = 1.0 / samples as f64;
    for i in 0..samples {
        let a = i as f64 * step;
        let b = a + step;
        let (ga, gb) = (g(a), g(b));
        let mut root: Option<f64> = None;
        if ga == 0.0 {
            root = Some(a);
        } else if ga * gb < 0.0 && ga.abs() < 0.25 {
            let (mut lo, mut hi, mut glo) = (a, b, ga);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                let gm = g(mid);
                if gm == 0.0 {
                    break;
                }
                if glo * gm < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    glo = gm;
                }
            }
            root = Some(0.5 * (lo + hi));
        } else if ga.abs() < (h.lipschitz_bound + 1.0) * step {
            // Possible tangential zero: ternary search for the local |g| min.
            let (mut lo, mut hi) = (a - step, b + step);
            for _ in 0..100 {
                let m1 = lo + (hi - lo) / 3.0;
                let m2 = hi - (hi - lo) / 3.0;
                if g(m1).abs() < g(m2).abs() {
                    hi = m2;
                } else {
                    lo = m1;
                }
            }
            let m = 0.5 * (lo + hi);
            if g(m).abs() < tol {
                root = Some(m);
            }
        }
        if let Some(t) = root {
            if g(t).abs() < tol {
                let p = StripPoint::new(fract(t), r);
                if !out.iter().any(|q| {
                    let d = (q.theta - p.theta).rem_euclid(1.0);
                    d.min(1.0 - d) < (2.0 * tol).max(1e-7)
                }) {
                    out.push(p);
                }
            }
        }
    }
    out
}

/// Winding number of `p ↦ f(p) - p` along a closed curve, computed by
/// accumulated angles with adaptive refinement until every step turns by
/// less than π/2.
pub fn curve_index(f: &PlaneMap, curve: &PolyCurve) -> Result<i64> {
    let mut pts: Vec<(f64, f64)> = curve.vertices.iter().map(|v| (v.theta, v.r)).collect();
    if pts.first() != pts.last() {
        let first = pts[0];
        pts.push(first);
    }
    let vector = |p: (f64, f64)| -> Result<(f64, f64)> {
        let q = f.forward(p);
        let v = (q.0 - p.0, q.1 - p.1);
        let norm = (v.0 * v.0 + v.1 * v.1).sqrt();
        if norm < 1e-9 {
            return Err(Error::CurveHitsFixedPoint {
                theta: p.0,
                r: p.1,
                magnitude: norm,
            });
        }
        Ok(v)
    };

    let mut total = 0.0;
    let mut i = 0;
    let mut guard = 0usize;
    let mut v_here = vector(pts[0])?;
    while i + 1 < pts.len() {
        guard += 1;
        if guard > 4_000_000 {
            return Err(Error::CertificateFailure(
                "winding refinement did not converge".into(),
            ));
        }
        let v_next = vector(pts[i + 1])?;
        let cross = v_here.0 * v_next.1 - v_here.1 * v_next.0;
        let dot = v_here.0 * v_next.0 + v_here.1 * v_next.1;
        let dangle = cross.atan2(dot);
        let far_apart = {
            let (a, b) = (pts[i], pts[i + 1]);
            ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt() > 1e-12
        };
        if dangle.abs() >= std::f64::consts::FRAC_PI_2 && far_apart {
            let mid = (
                0.5 * (pts[i].0 + pts[i + 1].0),
                0.5 * (pts[i].1 + pts[i + 1].1),
            );
            pts.insert(i + 1, mid);
            continue;
        }
        total += dangle;
        v_here = v_next;
        i += 1;
    }

    let winding = total / (2.0 * std::f64::consts::PI);
    let rounded = winding.round();
    if (winding - rounded).abs() > 0.01 {
        return Err(Error::CertificateFailure(format!(
            "winding {winding} is not close to an integer"
        )));
    }
    Ok(rounded as i64)
}

fn circle_around(centre: StripPoint, radius: f64) -> PolyCurve {
    let n = 64;
    let vertices = (0..n)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            StripPoint::new(centre.theta + radius * t.cos(), centre.r + radius * t.sin())
        })
        .collect();
    PolyCurve {
        vertices,
        kind: crate::geom::CurveKind::Jordan,
    }
}

/// Index at a boundary fixed point via the doubled-strip trick: reflect the
/// map across the fixed boundary circle, compute the plane index of the
/// doubled map and halve it; halving must be exact.
fn boundary_fixed_index(h: &LiftedMap, rec: &FixedPointRecord) -> Result<i64> {
    let upper = rec.location.r > 0.0;
    let h2 = h.clone();
    let shift = rec.nielsen_shift as f64;
    let doubled = move |(x, y): (f64, f64)| -> (f64, f64) {
        let (lo, hi) = if upper { (-1.0, 3.0) } else { (-3.0, 1.0) };
        let mirror = if upper { 2.0 } else { -2.0 };
        let eval = |(x, y): (f64, f64)| -> (f64, f64) {
            if (-1.0..=1.0).contains(&y) {
                let q = h2.forward(StripPoint::new(x, y));
                (q.theta - shift, q.r)
            } else {
                let q = h2.forward(StripPoint::new(x, mirror - y));
                (q.theta - shift, mirror - q.r)
            }
        };
        if y < lo {
            let q = eval((x, lo));
            (q.0, q.1 + (y - lo))
        } else if y > hi {
            let q = eval((x, hi));
            (q.0, q.1 + (y - hi))
        } else {
            eval((x, y))
        }
    };
    let plane = PlaneMap::new(std::sync::Arc::new(doubled), format!("double({})", h.label));
    let centre = StripPoint::new(rec.location.theta_mod1, rec.location.r);
    let doubled_index = curve_index(&plane, &circle_around(centre, 5e-3))?;
    if doubled_index % 2 != 0 {
        return Err(Error::OddDoubledIndex {
            doubled: doubled_index,
        });
    }
    Ok(doubled_index / 2)
}

/// Group records by Nielsen shift and sum the indices per class.
pub fn nielsen_partition(h: &LiftedMap, fps: &[FixedPointRecord]) -> NielsenClassTable {
    let mut classes: BTreeMap<i64, Vec<FixedPointRecord>> = BTreeMap::new();
    for rec in fps {
        classes.entry(rec.nielsen_shift).or_default().push(rec.clone());
    }
    let index_sums = classes
        .iter()
        .map(|(shift, recs)| (*shift, recs.iter().map(|r| r.index).sum()))
        .collect();
    NielsenClassTable {
        classes,
        index_sums,
        reference_label: h.label.clone(),
        preserves_area: h.preserves_area,
    }
}

/// All pairs of shifts `(n, n+1)` whose classes are both nonempty.  A
/// nonempty answer means consecutive Nielsen classes exist.
pub fn consecutive_classes(table: &NielsenClassTable) -> Vec<(i64, i64)> {
    let shifts: Vec<i64> = table
        .classes
        .iter()
        .filter(|(_, v)| !v.is_empty())
        .map(|(k, _)| *k)
        .collect();
    let mut pairs = Vec::new();
    for &n in &shifts {
        if shifts.contains(&(n + 1)) {
            pairs.push((n, n + 1));
        }
    }
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::{registered_suite, FamilySpec};
    use crate::geom::CurveKind;
    use std::sync::Arc;

    #[test]
    fn rotation_has_no_fixed_points() {
        let h = FamilySpec::Rigid { c: 0.3 }.build().unwrap();
        let fps = find_fixed_points(&h, 64, 1e-10).unwrap();
        assert!(fps.is_empty());
    }

    #[test]
    fn twist_reports_a_non_isolated_fixed_set() {
        let h = FamilySpec::Twist { k: 0.5 }.build().unwrap();
        match find_fixed_points(&h, 128, 1e-10) {
            Err(Error::NonIsolatedFixedSet { candidates }) => assert!(candidates > 64),
            other => panic!("expected NonIsolatedFixedSet, got {:?}", other.map(|v| v.len())),
        }
    }

    #[test]
    fn bump_has_exactly_two_interior_fixed_points() {
        let h = FamilySpec::Bump { b: 0.25, substeps: 8 }.build().unwrap();
        let fps = find_fixed_points(&h, 64, 1e-10).unwrap();
        assert_eq!(fps.len(), 2, "{:?}", fps);
        // Brute-force oracle: strict local minima of the displacement norm
        // below threshold on a 512 grid.
        let mut oracle = 0;
        let n = 512usize;
        for i in 0..n {
            for j in 1..n {
                let p = StripPoint::new(i as f64 / n as f64, -1.0 + 2.0 * j as f64 / n as f64);
                if disp_norm(&h, p) < 1e-3 {
                    let better_near = [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)].iter().any(|(di, dj)| {
                        let q = StripPoint::new(
                            (i as i64 + di) as f64 / n as f64,
                            -1.0 + 2.0 * ((j as i64 + dj) as f64) / n as f64,
                        );
                        disp_norm(&h, q) < disp_norm(&h, p)
                    });
                    if !better_near {
                        oracle += 1;
                    }
                }
            }
        }
        assert_eq!(oracle, 2, "oracle disagrees");
        let locs: Vec<(f64, f64)> = fps.iter().map(|f| (f.location.theta_mod1, f.location.r)).collect();
        assert!(locs.iter().any(|(t, r)| t.min(1.0 - t) < 1e-6 && r.abs() < 1e-6), "{locs:?}");
        assert!(locs.iter().any(|(t, r)| (t - 0.5).abs() < 1e-6 && r.abs() < 1e-6), "{locs:?}");
        for f in &fps {
            assert_eq!(f.nielsen_shift, 0);
            assert!(f.refinement_residual < 1e-10);
        }
    }

    #[test]
    fn curve_index_examples() {
        // Constant displacement field winds zero times.
        let rigid = FamilySpec::Rigid { c: 0.3 }.build().unwrap();
        let f = rigid.plane_extension();
        let square = PolyCurve {
            vertices: vec![
                StripPoint::new(-0.5, -0.5),
                StripPoint::new(0.5, -0.5),
                StripPoint::new(0.5, 0.5),
                StripPoint::new(-0.5, 0.5),
            ],
            kind: CurveKind::Jordan,
        };
        assert_eq!(curve_index(&f, &square).unwrap(), 0);

        // Doubling map in the plane: field p ↦ p, winding 1.  Oracle:
        // accumulated discrete winding of the radial field over 10⁴ samples.
        let double = PlaneMap::new(Arc::new(|(x, y): (f64, f64)| (2.0 * x, 2.0 * y)), "x2");
        let circle = circle_around(StripPoint::new(0.0, 0.0), 1.0);
        assert_eq!(curve_index(&double, &circle).unwrap(), 1);
        let mut acc = 0.0f64;
        let n = 10_000;
        let mut prev = 0.0f64.atan2(1.0);
        for k in 1..=n {
            let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            let ang = t.sin().atan2(t.cos());
            let mut d = ang - prev;
            while d > std::f64::consts::PI {
                d -= 2.0 * std::f64::consts::PI;
            }
            while d < -std::f64::consts::PI {
                d += 2.0 * std::f64::consts::PI;
            }
            acc += d;
            prev = ang;
        }
        assert!((acc / (2.0 * std::f64::consts::PI) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn period_wide_rectangles_have_index_zero() {
        for map in registered_suite().unwrap() {
            let f = map.plane_extension();
            if map.label.starts_with("twist") {
                // Every period-wide rectangle's boundary crosses the fixed
                // circle r = 0; the index is undefined there.
                assert!(matches!(
                    curve_index(&f, &rectangle_curve(0.0)),
                    Err(Error::CurveHitsFixedPoint { .. })
                ));
                continue;
            }
            for a in [0.21, 0.37, -1.13] {
                let rect = rectangle_curve(a);
                assert_eq!(curve_index(&f, &rect).unwrap(), 0, "{} at a={a}", map.label);
            }
        }
    }

    fn rectangle_curve(a: f64) -> PolyCurve {
        PolyCurve {
            vertices: vec![
                StripPoint::new(a, -2.0),
                StripPoint::new(a + 1.0, -2.0),
                StripPoint::new(a + 1.0, 2.0),
                StripPoint::new(a, 2.0),
            ],
            kind: CurveKind::Jordan,
        }
    }

    #[test]
    fn bump_indices_are_opposite_and_sum_to_zero() {
        let h = FamilySpec::Bump { b: 0.25, substeps: 8 }.build().unwrap();
        let fps = find_fixed_points(&h, 64, 1e-10).unwrap();
        let table = nielsen_partition(&h, &fps);
        assert_eq!(table.classes.len(), 1);
        assert_eq!(*table.index_sums.get(&0).unwrap(), 0);
        let mut indices: Vec<i64> = fps.iter().map(|f| f.index).collect();
        indices.sort();
        assert_eq!(indices, vec![-1, 1]);
    }

    #[test]
    fn pinch_fixed_point_has_index_zero() {
        let h = FamilySpec::Pinch { c: 0.5, theta0: 0.5, r0: 0.0 }.build().unwrap();
        let fps = find_fixed_points(&h, 64, 1e-10).unwrap();
        assert_eq!(fps.len(), 1, "{fps:?}");
        assert_eq!(fps[0].index, 0);
        assert_eq!(fps[0].nielsen_shift, 0);
        assert!(!fps[0].on_boundary);
    }

    #[test]
    fn curve_index_is_invariant_under_refinement_and_negates_on_reversal() {
        let h = FamilySpec::Bump { b: 0.25, substeps: 8 }.build().unwrap();
        let f = h.plane_extension();
        let circle = circle_around(StripPoint::new(0.0, 0.0), 0.05);
        let base = curve_index(&f, &circle).unwrap();
        let fine = circle.densified(0.001);
        assert_eq!(curve_index(&f, &fine).unwrap(), base);
        assert_eq!(curve_index(&f, &circle.reversed()).unwrap(), -base);
    }

    #[test]
    fn disjoint_curves_bounding_a_fixed_point_free_annulus_agree() {
        let h = FamilySpec::Bump { b: 0.25, substeps: 8 }.build().unwrap();
        let f = h.plane_extension();
        let inner = circle_around(StripPoint::new(0.5, 0.0), 0.04);
        let outer = circle_around(StripPoint::new(0.5, 0.0), 0.09);
        assert_eq!(curve_index(&f, &inner).unwrap(), curve_index(&f, &outer).unwrap());
    }

    #[test]
    fn shift_relabels_under_deck_composition() {
        let h = FamilySpec::Pinch { c: 0.5, theta0: 0.5, r0: 0.0 }.build().unwrap();
        let fps = find_fixed_points(&h, 64, 1e-10).unwrap();
        let shifted = h.deck_shift(-1);
        let fps2 = find_fixed_points(&shifted, 64, 1e-10).unwrap();
        assert_eq!(fps.len(), fps2.len());
        assert_eq!(fps2[0].nielsen_shift, fps[0].nielsen_shift - 1);
    }

    #[test]
    fn consecutive_class_detection() {
        let h = FamilySpec::Rigid { c: 0.3 }.build().unwrap();
        let mk = |shift: i64| FixedPointRecord {
            location: AnnulusPoint::new(0.1 * (shift + 3) as f64, 0.0),
            nielsen_shift: shift,
            index: 0,
            on_boundary: false,
            refinement_residual: 0.0,
        };
        let empty = nielsen_partition(&h, &[]);
        assert!(consecutive_classes(&empty).is_empty());
        let gap = nielsen_partition(&h, &[mk(0), mk(2)]);
        assert!(consecutive_classes(&gap).is_empty());
        let adjacent = nielsen_partition(&h, &[mk(0), mk(1)]);
        assert_eq!(consecutive_classes(&adjacent), vec![(0, 1)]);
    }

    #[test]
    fn boundary_pinch_is_found_on_the_circle_with_index_zero() {
        let h = FamilySpec::Pinch { c: 0.5, theta0: 0.25, r0: -1.0 }.build().unwrap();
        let fps = find_fixed_points(&h, 64, 1e-10).unwrap();
        assert_eq!(fps.len(), 1, "{fps:?}");
        assert!(fps[0].on_boundary);
        assert!((fps[0].location.theta_mod1 - 0.25).abs() < 1e-6);
        assert_eq!(fps[0].index, 0);
    }
}
