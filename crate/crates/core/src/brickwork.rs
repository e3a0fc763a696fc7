//! Deck-equivariant free brick decompositions of the strip minus the
//! fixed point set.
//!
//! The lower boundary circle is cut into a free interval decomposition,
//! greedily merged until no further merge keeps it free; the rectangles
//! `[aₙ, aₙ₊₁] × [-1, -1+ε]` over the merged cuts form the boundary row.
//! The rest of the strip is tiled by near-square cells refined by
//! quadrisection until every cell carries a positive soundness margin
//! `min_samples dist(H(x), B) - L·δ·√2`.  Cells that cannot certify next
//! to a located fixed point are excluded as that point's neighbourhood.
//! Bricks are stored per period class; translates materialize exactly.

use crate::cover::{fract, LiftedMap, StripPoint};
use crate::error::{Error, Result};
use crate::fixed_index::FixedPointRecord;
use crate::geom::Rect;
use rayon::prelude::*;

/// Strictly increasing cut points of one period of the lower boundary
/// circle, extended by deck translation.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalDecomposition {
    /// `period_count + 1` cuts; the last equals the first plus one.
    pub cut_points: Vec<f64>,
}

impl IntervalDecomposition {
    pub fn period_count(&self) -> usize {
        self.cut_points.len() - 1
    }

    pub fn intervals(&self) -> Vec<(f64, f64)> {
        self.cut_points.windows(2).map(|w| (w[0], w[1])).collect()
    }

    fn validate(&self) -> Result<()> {
        if self.cut_points.len() < 2 {
            return Err(Error::CertificateFailure("empty interval decomposition".into()));
        }
        for w in self.cut_points.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::CertificateFailure("cuts not strictly increasing".into()));
            }
        }
        let first = self.cut_points.first().unwrap();
        let last = self.cut_points.last().unwrap();
        if (last - first - 1.0).abs() > 1e-12 {
            return Err(Error::CertificateFailure(format!(
                "cuts span {} instead of one period",
                last - first
            )));
        }
        Ok(())
    }
}

/// Is the boundary interval `[a, b] × {-1}` free for the annulus map?
///
/// With the lift normalized to displacement in (0, 1) this reduces to
/// `H(a) > b` (the image clears the interval on the right) and
/// `H(b) < a + 1` (it stays clear of the next translate).
pub fn boundary_interval_free(h: &LiftedMap, a: f64, b: f64) -> bool {
    let ha = h.forward(StripPoint::new(a, -1.0)).theta;
    let hb = h.forward(StripPoint::new(b, -1.0)).theta;
    ha > b && hb < a + 1.0
}

fn boundary_displacement_extremes(h: &LiftedMap, samples: usize) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..=samples {
        let d = h.displacement_at(StripPoint::new(i as f64 / samples as f64, -1.0));
        lo = lo.min(d);
        hi = hi.max(d);
    }
    (lo, hi)
}

/// A free interval decomposition of the lower boundary circle with at
/// least three intervals per period.
///
/// Uniform cuts of width `1/k` for the smallest `k ≥ 3` with
/// `1/k ≤ 0.75 · min displacement`; every interval is certified free.
pub fn boundary_interval_decomposition(h: &LiftedMap) -> Result<IntervalDecomposition> {
    let (min_d, max_d) = boundary_displacement_extremes(h, 4096);
    if min_d < 1e-9 {
        return Err(Error::BoundaryFixedPoint {
            min_displacement: min_d,
        });
    }
    if max_d >= 1.0 {
        return Err(Error::NormalizationError { min: min_d, max: max_d });
    }
    let mut k = 3usize.max((1.0 / (0.75 * min_d)).ceil() as usize);
    loop {
        if k > 100_000 {
            return Err(Error::BoundaryFixedPoint {
                min_displacement: min_d,
            });
        }
        let cuts: Vec<f64> = (0..=k).map(|i| i as f64 / k as f64).collect();
        let all_free = cuts
            .windows(2)
            .all(|w| boundary_interval_free(h, w[0], w[1]));
        if all_free {
            let d = IntervalDecomposition { cut_points: cuts };
            d.validate()?;
            return Ok(d);
        }
        k += 1;
    }
}

/// Greedy left-to-right merging of adjacent intervals (and all deck
/// translates at once) while the decomposition stays free.  On exit no
/// adjacent pair can merge, so for consecutive intervals `α, α'` the
/// image `H(α)` meets `α'`: the chain consequence is certified.
pub fn maximal_merge(d: &IntervalDecomposition, h: &LiftedMap) -> Result<IntervalDecomposition> {
    d.validate()?;
    let mut cuts = d.cut_points.clone();
    loop {
        let mut merged_any = false;
        let mut i = 0;
        while i + 2 < cuts.len() && cuts.len() > 3 {
            // Merging the pair at i removes the cut i+1 (plus translates).
            if boundary_interval_free(h, cuts[i], cuts[i + 2]) {
                cuts.remove(i + 1);
                merged_any = true;
                // The period endpoints are distinct cuts of the same orbit:
                // removing the first cut's partner keeps the span exact.
            }
            i += 1;
        }
        if !merged_any {
            break;
        }
    }
    let out = IntervalDecomposition { cut_points: cuts };
    out.validate()?;
    // Chain consequence: every consecutive pair overlaps under H.
    for w in out.cut_points.windows(3) {
        let ha = h.forward(StripPoint::new(w[0], -1.0)).theta;
        if ha > w[2] {
            return Err(Error::CertificateFailure(format!(
                "consecutive intervals [{},{}] and [{},{}] do not overlap under the map",
                w[0], w[1], w[1], w[2]
            )));
        }
    }
    Ok(out)
}

/// One brick: a closed rectangle stored for the base period.
#[derive(Debug, Clone)]
pub struct Brick {
    pub id: usize,
    pub rect: Rect,
    /// Rectangles `[aₙ, aₙ₊₁] × [-1, -1+ε]` along the lower boundary.
    pub boundary: bool,
    /// Certified freeness margin.
    pub margin: f64,
}

impl Brick {
    pub fn touches_top(&self) -> bool {
        (self.rect.y1 - 1.0).abs() < 1e-12
    }

    pub fn touches_bottom(&self) -> bool {
        (self.rect.y0 + 1.0).abs() < 1e-12
    }

    pub fn materialize(&self, shift: i64) -> Rect {
        self.rect.translated(shift as f64)
    }
}

/// A deck-equivariant certified free brick decomposition.
#[derive(Debug, Clone)]
pub struct BrickDecomposition {
    /// Base-period bricks ordered boundary row first, then by position.
    pub bricks: Vec<Brick>,
    pub epsilon: f64,
    /// Ids of the boundary rectangles in increasing θ order; translates by
    /// `n` periods continue the chain.
    pub boundary_chain: Vec<usize>,
    /// Square holes excised around fixed points (base period).
    pub excluded: Vec<Rect>,
    /// Fixed points the holes cover.
    pub fixed_points: Vec<FixedPointRecord>,
    pub grid_n: usize,
    pub label: String,
    /// Sample spacing used for certification and edge sampling.
    pub sample_spacing: f64,
}

impl BrickDecomposition {
    pub fn brick_count(&self) -> usize {
        self.bricks.len()
    }

    /// All base bricks containing the (wrapped) point, as (id, shift).
    ///
    /// The shift says which translate of the base brick contains `p`.
    pub fn locate(&self, p: StripPoint) -> Vec<(usize, i64)> {
        let mut out = Vec::new();
        let base_shift = p.theta.floor() as i64;
        // A base brick lives in [0,1]×…; check the two candidate sheets.
        for s in [base_shift - 1, base_shift, base_shift + 1] {
            let local = StripPoint::new(p.theta - s as f64, p.r);
            if local.theta < -1e-12 || local.theta > 1.0 + 1e-12 {
                continue;
            }
            for b in &self.bricks {
                if b.rect.contains(local) {
                    out.push((b.id, s));
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    pub fn boundary_brick(&self, n: i64) -> (usize, i64) {
        let k = self.boundary_chain.len() as i64;
        let class = n.rem_euclid(k) as usize;
        let shift = n.div_euclid(k);
        (self.boundary_chain[class], shift)
    }

    /// Index of a boundary brick in the chain: inverse of [`Self::boundary_brick`].
    pub fn chain_position(&self, id: usize, shift: i64) -> Option<i64> {
        let pos = self.boundary_chain.iter().position(|&b| b == id)?;
        Some(shift * self.boundary_chain.len() as i64 + pos as i64)
    }
}

/// Sound freeness margin for one rectangle: sample the image on a subgrid
/// of spacing `δ` and subtract the Lipschitz slack `L·δ·√2`.
pub fn certify_free(h: &LiftedMap, rect: &Rect) -> Result<f64> {
    let delta = suggest_spacing(h, rect);
    certify_free_spaced(h, rect, delta)
}

fn suggest_spacing(h: &LiftedMap, rect: &Rect) -> f64 {
    // Aim the slack at a fraction of the brick size.
    (rect.width().min(rect.height()) / 4.0).min(0.05 / h.lipschitz_bound)
}

pub fn certify_free_spaced(h: &LiftedMap, rect: &Rect, delta: f64) -> Result<f64> {
    let nx = (rect.width() / delta).ceil() as usize + 1;
    let ny = (rect.height() / delta).ceil() as usize + 1;
    let mut min_dist = f64::INFINITY;
    for i in 0..=nx {
        for j in 0..=ny {
            let p = StripPoint::new(
                rect.x0 + rect.width() * i as f64 / nx as f64,
                rect.y0 + rect.height() * j as f64 / ny as f64,
            );
            let q = h.forward(p);
            min_dist = min_dist.min(rect.dist_to_point(q));
            if min_dist == 0.0 {
                break;
            }
        }
    }
    let spacing = (rect.width() / nx as f64).max(rect.height() / ny as f64);
    let margin = min_dist - h.lipschitz_bound * spacing * std::f64::consts::SQRT_2;
    if margin > 0.0 {
        Ok(margin)
    } else {
        Err(Error::NotCertifiablyFree { margin })
    }
}

const MAX_DEPTH: usize = 12;
/// A cell at max depth failing certification within this many cell sizes
/// of a located fixed point is treated as part of its excised hole.
const EXCLUSION_CELLS: f64 = 16.0;
const EPSILON_LADDER: usize = 10;

/// Build the certified decomposition for a lift normalized to lower
/// boundary displacement in (0, 1).
pub fn build_brick_decomposition(
    h: &LiftedMap,
    grid_n: usize,
    fixed_points: &[FixedPointRecord],
) -> Result<BrickDecomposition> {
    let merged = maximal_merge(&boundary_interval_decomposition(h)?, h)?;

    // Largest dyadic ε whose boundary rectangles all certify free.
    let mut epsilon = None;
    'eps: for k in 1..=EPSILON_LADDER {
        let eps = 0.5f64.powi(k as i32);
        // Fixed points must stay clear of the boundary band.
        if fixed_points
            .iter()
            .any(|fp| fp.location.r < -1.0 + eps + 1e-9)
        {
            continue;
        }
        for (a, b) in merged.intervals() {
            let rect = Rect::new(a, b, -1.0, -1.0 + eps);
            if certify_free(h, &rect).is_err() {
                continue 'eps;
            }
        }
        epsilon = Some(eps);
        break;
    }
    let epsilon = epsilon.ok_or(Error::NotCertifiablyFree { margin: 0.0 })?;

    let mut bricks: Vec<Brick> = Vec::new();
    let mut boundary_chain = Vec::new();
    for (a, b) in merged.intervals() {
        let rect = Rect::new(a, b, -1.0, -1.0 + epsilon);
        let margin = certify_free(h, &rect)?;
        boundary_chain.push(bricks.len());
        bricks.push(Brick {
            id: bricks.len(),
            rect,
            boundary: true,
            margin,
        });
    }

    // Interior rows: uniform, height at most 1/grid_n, landing exactly on 1.
    let interior_height = 2.0 - epsilon;
    let n_rows = (interior_height * grid_n as f64).ceil() as usize;
    let row_h = interior_height / n_rows as f64;
    let col_w = 1.0 / grid_n as f64;

    let mut worklist: Vec<(Rect, usize)> = Vec::new();
    for j in 0..n_rows {
        let y0 = -1.0 + epsilon + j as f64 * row_h;
        let y1 = if j + 1 == n_rows { 1.0 } else { y0 + row_h };
        for i in 0..grid_n {
            worklist.push((Rect::new(i as f64 * col_w, (i + 1) as f64 * col_w, y0, y1), 0));
        }
    }

    let mut excluded: Vec<Rect> = Vec::new();
    let mut kept: Vec<(Rect, f64)> = Vec::new();
    while !worklist.is_empty() {
        let batch = std::mem::take(&mut worklist);
        let results: Vec<(Rect, usize, Option<f64>, bool)> = batch
            .par_iter()
            .map(|(rect, depth)| {
                let holds_fp = fixed_points.iter().any(|fp| contains_fp(rect, fp));
                if holds_fp {
                    return (*rect, *depth, None, true);
                }
                match certify_free(h, rect) {
                    Ok(m) => (*rect, *depth, Some(m), false),
                    Err(_) => (*rect, *depth, None, false),
                }
            })
            .collect();
        for (rect, depth, margin, holds_fp) in results {
            match margin {
                Some(m) => kept.push((rect, m)),
                None => {
                    if depth >= MAX_DEPTH {
                        let near_fp = fixed_points.iter().any(|fp| {
                            dist_to_fp(&rect, fp)
                                <= EXCLUSION_CELLS * rect.width().max(rect.height())
                        });
                        if holds_fp || near_fp {
                            excluded.push(rect);
                        } else {
                            let c = rect.center();
                            return Err(Error::RefinementOverflow {
                                depth,
                                theta: c.theta,
                                r: c.r,
                            });
                        }
                    } else {
                        for child in rect.quadrisect() {
                            worklist.push((child, depth + 1));
                        }
                    }
                }
            }
        }
    }

    kept.sort_by(|a, b| {
        (a.0.y0, a.0.x0, a.0.y1, a.0.x1)
            .partial_cmp(&(b.0.y0, b.0.x0, b.0.y1, b.0.x1))
            .unwrap()
    });
    for (rect, margin) in kept {
        bricks.push(Brick {
            id: bricks.len(),
            rect,
            boundary: false,
            margin,
        });
    }
    excluded.sort_by(|a, b| (a.y0, a.x0).partial_cmp(&(b.y0, b.x0)).unwrap());

    let sample_spacing = bricks
        .iter()
        .map(|b| suggest_spacing(h, &b.rect))
        .fold(f64::INFINITY, f64::min)
        .max(1e-6);

    let deco = BrickDecomposition {
        bricks,
        epsilon,
        boundary_chain,
        excluded,
        fixed_points: fixed_points.to_vec(),
        grid_n,
        label: h.label.clone(),
        sample_spacing,
    };
    certify_chain_property(h, &deco)?;
    Ok(deco)
}

fn contains_fp(rect: &Rect, fp: &FixedPointRecord) -> bool {
    let pad = fp.refinement_residual.max(1e-12);
    for s in [-1.0, 0.0, 1.0] {
        let p = StripPoint::new(fp.location.theta_mod1 + s, fp.location.r);
        if rect.inflate(pad).contains(p) {
            return true;
        }
    }
    false
}

fn dist_to_fp(rect: &Rect, fp: &FixedPointRecord) -> f64 {
    let mut best = f64::INFINITY;
    for s in [-1.0, 0.0, 1.0] {
        let p = StripPoint::new(fp.location.theta_mod1 + s, fp.location.r);
        best = best.min(rect.dist_to_point(p));
    }
    best
}

/// Witness that `H(B⁻ₙ)` meets `B⁻ₙ₊₁` for every boundary rectangle.
fn certify_chain_property(h: &LiftedMap, deco: &BrickDecomposition) -> Result<()> {
    for pos in 0..deco.boundary_chain.len() as i64 {
        chain_witness(h, deco, pos)?;
    }
    Ok(())
}

/// A sampled point of `B⁻ₙ` whose image lies in `B⁻ₙ₊₁`.
pub fn chain_witness(h: &LiftedMap, deco: &BrickDecomposition, n: i64) -> Result<StripPoint> {
    let (id, shift) = deco.boundary_brick(n);
    let (id_next, shift_next) = deco.boundary_brick(n + 1);
    let rect = deco.bricks[id].materialize(shift);
    let target = deco.bricks[id_next].materialize(shift_next);
    let samples = 64;
    for i in 0..=samples {
        for j in 0..=4 {
            let p = StripPoint::new(
                rect.x0 + rect.width() * i as f64 / samples as f64,
                rect.y0 + rect.height() * j as f64 / 4.0,
            );
            if target.contains(h.forward(p)) {
                return Ok(p);
            }
        }
    }
    Err(Error::CertificateFailure(format!(
        "no witness for the boundary chain step {n} -> {}",
        n + 1
    )))
}

/// One line per brick; loadable with [`parse_decomposition_dump`].
pub fn decomposition_dump(deco: &BrickDecomposition) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "# bricks label={} grid_n={} epsilon={:.6} excluded={}\n",
        deco.label,
        deco.grid_n,
        deco.epsilon,
        deco.excluded.len()
    ));
    for b in &deco.bricks {
        out.push_str(&format!(
            "brick id={} rect={:.12},{:.12},{:.12},{:.12} margin={:.6e} boundary={}\n",
            b.id, b.rect.x0, b.rect.x1, b.rect.y0, b.rect.y1, b.margin, b.boundary
        ));
    }
    for r in &deco.excluded {
        out.push_str(&format!(
            "hole rect={:.12},{:.12},{:.12},{:.12}\n",
            r.x0, r.x1, r.y0, r.y1
        ));
    }
    out
}

/// Rebuild the geometric content of a dump (for replay tooling).
pub fn parse_decomposition_dump(text: &str) -> Result<(Vec<Brick>, Vec<Rect>)> {
    let mut bricks = Vec::new();
    let mut holes = Vec::new();
    let field = |line: &str, key: &str| -> Option<String> {
        line.split_whitespace()
            .find_map(|tok| tok.strip_prefix(&format!("{key}=")).map(str::to_string))
    };
    let parse_rect = |s: &str| -> Result<Rect> {
        let v: Vec<f64> = s
            .split(',')
            .map(|x| x.parse::<f64>().map_err(|e| Error::Config(e.to_string())))
            .collect::<Result<_>>()?;
        if v.len() != 4 {
            return Err(Error::Config("rect needs 4 coordinates".into()));
        }
        Ok(Rect::new(v[0], v[1], v[2], v[3]))
    };
    for line in text.lines() {
        if line.starts_with("brick ") {
            let id = field(line, "id")
                .ok_or_else(|| Error::Config("brick line without id".into()))?
                .parse::<usize>()
                .map_err(|e| Error::Config(e.to_string()))?;
            let rect = parse_rect(&field(line, "rect").ok_or_else(|| Error::Config("brick line without rect".into()))?)?;
            let margin = field(line, "margin")
                .ok_or_else(|| Error::Config("brick line without margin".into()))?
                .parse::<f64>()
                .map_err(|e| Error::Config(e.to_string()))?;
            let boundary = field(line, "boundary").as_deref() == Some("true");
            bricks.push(Brick {
                id,
                rect,
                boundary,
                margin,
            });
        } else if line.starts_with("hole ") {
            holes.push(parse_rect(&field(line, "rect").ok_or_else(|| Error::Config("hole line without rect".into()))?)?);
        }
    }
    Ok((bricks, holes))
}

/// Normalize a lift so its lower boundary displacement lies in (0, 1).
pub fn normalize_lower(h: &LiftedMap) -> Result<LiftedMap> {
    let (lo, hi) = boundary_displacement_extremes(h, 4096);
    if lo.rem_euclid(1.0) < 1e-9 || lo.rem_euclid(1.0) > 1.0 - 1e-9 {
        if (hi - lo).abs() < 1e-9 {
            // Constant integer displacement: every boundary point is fixed.
            return Err(Error::BoundaryFixedPoint {
                min_displacement: lo - lo.round(),
            });
        }
    }
    let n = lo.floor() as i64;
    let shifted_lo = lo - n as f64;
    let shifted_hi = hi - n as f64;
    if shifted_lo <= 1e-9 || shifted_hi >= 1.0 - 1e-9 {
        if shifted_lo <= 1e-9 {
            return Err(Error::BoundaryFixedPoint {
                min_displacement: shifted_lo,
            });
        }
        return Err(Error::NormalizationError {
            min: shifted_lo,
            max: shifted_hi,
        });
    }
    Ok(h.deck_shift(-n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::FamilySpec;
    use crate::fixed_index::find_fixed_points;

    #[test]
    fn rotation_interval_decomposition_is_free_with_at_least_three_intervals() {
        let h = FamilySpec::Rigid { c: 0.3 }.build().unwrap();
        let d = boundary_interval_decomposition(&h).unwrap();
        assert!(d.period_count() >= 3);
        // Endpoint-arithmetic oracle: image [a+0.3, b+0.3] avoids [a, b]
        // and the next translate.
        for (a, b) in d.intervals() {
            assert!(a + 0.3 > b && b + 0.3 < a + 1.0, "interval [{a},{b}]");
        }
        // The spec's natural uniform choice: five cuts of width 0.2.
        assert_eq!(d.period_count(), 5);
    }

    #[test]
    fn constant_half_displacement_admits_three_intervals() {
        let h = FamilySpec::Rigid { c: 0.5 }.build().unwrap();
        let d = boundary_interval_decomposition(&h).unwrap();
        assert_eq!(d.period_count(), 3);
        for (a, b) in d.intervals() {
            assert!(boundary_interval_free(&h, a, b));
        }
    }

    #[test]
    fn boundary_fixed_point_is_rejected() {
        let h = FamilySpec::Pinch { c: 0.5, theta0: 0.25, r0: -1.0 }.build().unwrap();
        assert!(matches!(
            boundary_interval_decomposition(&h),
            Err(Error::BoundaryFixedPoint { .. })
        ));
    }

    #[test]
    fn merge_coarsens_a_fine_decomposition_and_certifies_the_chain() {
        let h = FamilySpec::Rigid { c: 0.3 }.build().unwrap();
        let fine = IntervalDecomposition {
            cut_points: (0..=8).map(|i| i as f64 / 8.0).collect(),
        };
        for (a, b) in fine.intervals() {
            assert!(boundary_interval_free(&h, a, b));
        }
        let merged = maximal_merge(&fine, &h).unwrap();
        assert!(merged.period_count() < 8, "{:?}", merged);
        // Oracle on the merged cuts: freeness and consecutive overlap.
        for (a, b) in merged.intervals() {
            assert!(a + 0.3 > b && b + 0.3 < a + 1.0);
        }
        for w in merged.cut_points.windows(3) {
            assert!(w[0] + 0.3 <= w[2], "no overlap for {:?}", w);
        }
    }

    #[test]
    fn already_maximal_input_is_unchanged() {
        let h = FamilySpec::Rigid { c: 0.3 }.build().unwrap();
        let d = boundary_interval_decomposition(&h).unwrap();
        let merged = maximal_merge(&d, &h).unwrap();
        assert_eq!(d, merged);
    }

    #[test]
    fn two_intervals_cannot_merge_into_a_full_period() {
        // A full-period interval always meets its image, so the merge scan
        // never considers collapsing a 2-interval decomposition.
        let h = FamilySpec::Rigid { c: 0.5 }.build().unwrap();
        let two = IntervalDecomposition {
            cut_points: vec![0.0, 0.45, 1.0],
        };
        let merged = maximal_merge(&two, &h).unwrap();
        assert_eq!(merged.period_count(), 2);
    }

    #[test]
    fn certify_free_margins() {
        let h = FamilySpec::Rigid { c: 0.3 }.build().unwrap();
        // Analytic distance 0.2 minus sampling slack.
        let m = certify_free(&h, &Rect::new(0.0, 0.1, -1.0, -0.9)).unwrap();
        assert!(m > 0.15 && m <= 0.2, "margin {m}");
        // The identity map is never free.
        let ident = FamilySpec::Rigid { c: 0.0 }.build().unwrap();
        assert!(certify_free(&ident, &Rect::new(0.0, 0.1, -1.0, -0.9)).is_err());
        // Width 0.5 overlaps its own image under a 0.3 rotation.
        assert!(certify_free(&h, &Rect::new(0.0, 0.5, -1.0, -0.5)).is_err());
    }

    #[test]
    fn recertification_with_finer_spacing_never_flips_a_pass() {
        let h = FamilySpec::Drift { c: 0.4, beta: 0.3 }.build().unwrap();
        let rects = [
            Rect::new(0.0, 0.2, -1.0, -0.8),
            Rect::new(0.3, 0.4, 0.0, 0.1),
            Rect::new(0.7, 0.9, 0.5, 0.7),
        ];
        for rect in rects {
            let coarse = certify_free_spaced(&h, &rect, 0.02).unwrap();
            let fine = certify_free_spaced(&h, &rect, 0.005).unwrap();
            assert!(fine >= coarse - 1e-9, "coarse {coarse} fine {fine}");
        }
    }

    #[test]
    fn rotation_decomposition_satisfies_all_invariants() {
        let h = FamilySpec::Rigid { c: 0.3 }.build().unwrap();
        let deco = build_brick_decomposition(&h, 8, &[]).unwrap();
        assert!(deco.epsilon > 0.0 && deco.epsilon < 1.0);
        assert!(deco.brick_count() < 10_000);
        for b in &deco.bricks {
            assert!(b.margin > 0.0);
        }
        for b in &deco.bricks[..deco.boundary_chain.len()] {
            assert!(b.boundary);
            assert!((b.rect.y0 + 1.0).abs() < 1e-12);
            assert!((b.rect.y1 + 1.0 - deco.epsilon).abs() < 1e-12);
        }
        // Chain property with explicit witnesses.
        for n in -3..8 {
            let w = chain_witness(&h, &deco, n).unwrap();
            let (id_next, shift_next) = deco.boundary_brick(n + 1);
            let target = deco.bricks[id_next].materialize(shift_next);
            assert!(target.contains(h.forward(w)));
        }
    }

    #[test]
    fn interior_cover_has_no_gaps_and_small_overlap_count() {
        let h = FamilySpec::Drift { c: 0.4, beta: 0.3 }.build().unwrap();
        let deco = build_brick_decomposition(&h, 8, &[]).unwrap();
        // Sampled cover check over one period.
        for i in 0..40 {
            for j in 0..40 {
                let p = StripPoint::new(i as f64 / 40.0 + 0.0123, -0.99 + 1.97 * j as f64 / 40.0);
                let found = deco.locate(p);
                assert!(
                    (1..=4).contains(&found.len()),
                    "point {:?} in {} bricks",
                    p,
                    found.len()
                );
            }
        }
    }

    #[test]
    fn normalized_twist_lift_has_a_free_decomposition() {
        // The lift τ∘twist has empty fixed set in the strip (the annulus
        // map's fixed circle belongs to the other lift), so the whole strip
        // tiles freely.
        let h = FamilySpec::Twist { k: 0.5 }.build().unwrap();
        let h0 = normalize_lower(&h).unwrap();
        let deco = build_brick_decomposition(&h0, 8, &[]).unwrap();
        assert!(deco.bricks.iter().all(|b| b.margin > 0.0));
    }

    #[test]
    fn unexcluded_fixed_point_defeats_the_quadtree() {
        // Without the fixed point handed over, cells around it can never
        // certify and there is no exclusion to absorb them.
        let h = FamilySpec::Pinch { c: 0.5, theta0: 0.5, r0: 0.0 }.build().unwrap();
        assert!(matches!(
            build_brick_decomposition(&h, 8, &[]),
            Err(Error::RefinementOverflow { .. })
        ));
    }

    #[test]
    fn pinch_decomposition_excises_a_small_hole() {
        let h = FamilySpec::Pinch { c: 0.5, theta0: 0.5, r0: 0.0 }.build().unwrap();
        let fps = find_fixed_points(&h, 64, 1e-10).unwrap();
        let deco = build_brick_decomposition(&h, 8, &fps).unwrap();
        assert!(!deco.excluded.is_empty());
        let hole_extent: f64 = deco
            .excluded
            .iter()
            .map(|r| {
                r.dist_to_point(StripPoint::new(0.5, 0.0)) + r.diameter()
            })
            .fold(0.0, f64::max);
        assert!(hole_extent < 1e-3, "hole extends {hole_extent}");
        for b in &deco.bricks {
            assert!(b.margin > 0.0);
        }
    }

    #[test]
    fn equivariance_is_exact_by_construction() {
        let h = FamilySpec::Rigid { c: 0.3 }.build().unwrap();
        let deco = build_brick_decomposition(&h, 8, &[]).unwrap();
        for b in deco.bricks.iter().take(10) {
            let shifted = b.materialize(5);
            assert_eq!(shifted.x0, b.rect.x0 + 5.0);
            assert_eq!(shifted.y0, b.rect.y0);
        }
    }

    #[test]
    fn dump_round_trips() {
        let h = FamilySpec::Rigid { c: 0.3 }.build().unwrap();
        let deco = build_brick_decomposition(&h, 8, &[]).unwrap();
        let text = decomposition_dump(&deco);
        let (bricks, holes) = parse_decomposition_dump(&text).unwrap();
        assert_eq!(bricks.len(), deco.bricks.len());
        assert_eq!(holes.len(), deco.excluded.len());
        assert_eq!(bricks[3].rect, deco.bricks[3].rect);
    }

    #[test]
    fn normalization_brings_displacement_into_the_unit_interval() {
        let bump = FamilySpec::Bump { b: 0.25, substeps: 8 }.build().unwrap();
        // Lower boundary displacement of the raw lift is -1/2.
        let h0 = normalize_lower(&bump).unwrap();
        let (lo, hi) = boundary_displacement_extremes(&h0, 512);
        assert!(lo > 0.0 && hi < 1.0, "({lo}, {hi})");
    }
}
