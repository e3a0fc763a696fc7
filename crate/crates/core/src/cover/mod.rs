//! The annulus, its universal cover and lifted homeomorphisms.
//!
//! The annulus is `𝔸 = S¹ × [-1, 1]`, covered by the strip
//! `ℝ × [-1, 1]` with projection `Π(θ, r) = (e^{2iπθ}, r)`.  The deck
//! transformation is the unit horizontal translation `τ(θ, r) = (θ+1, r)`.
//! A lift of an annulus homeomorphism commutes with `τ`.

mod families;
mod integrate;

pub use families::{registered_suite, FamilySpec, GridTable};

use crate::error::{Error, Result};
use std::fmt;
use std::sync::Arc;

/// A point of the strip; `theta` is unbounded, `r` stays in `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StripPoint {
    pub theta: f64,
    pub r: f64,
}

impl StripPoint {
    pub fn new(theta: f64, r: f64) -> Self {
        Self { theta, r }
    }

    pub fn dist(self, other: StripPoint) -> f64 {
        ((self.theta - other.theta).powi(2) + (self.r - other.r).powi(2)).sqrt()
    }

    /// Translate by `n` deck steps.
    pub fn shifted(self, n: i64) -> StripPoint {
        StripPoint::new(self.theta + n as f64, self.r)
    }
}

/// A point of the annulus; `theta_mod1` lives in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusPoint {
    pub theta_mod1: f64,
    pub r: f64,
}

impl AnnulusPoint {
    pub fn new(theta_mod1: f64, r: f64) -> Self {
        debug_assert!((0.0..1.0).contains(&theta_mod1) || theta_mod1 == 0.0);
        Self { theta_mod1, r }
    }

    /// Distance on the annulus (θ measured modulo 1).
    pub fn dist(self, other: AnnulusPoint) -> f64 {
        let dt = (self.theta_mod1 - other.theta_mod1).rem_euclid(1.0);
        let dt = dt.min(1.0 - dt);
        (dt * dt + (self.r - other.r).powi(2)).sqrt()
    }
}

/// Fractional part in `[0, 1)`, exact under integer shifts of `x`.
pub fn fract(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Covering projection `Π`.
pub fn project(p: StripPoint) -> AnnulusPoint {
    AnnulusPoint::new(fract(p.theta), p.r)
}

/// The inverse of [`project`] onto the sheet with `⌊θ⌋ = sheet`.
pub fn lift_point(a: AnnulusPoint, sheet: i64) -> StripPoint {
    StripPoint::new(a.theta_mod1 + sheet as f64, a.r)
}

type Evaluator = Arc<dyn Fn(StripPoint) -> StripPoint + Send + Sync>;

/// A lift of an annulus homeomorphism to the strip.
///
/// Evaluation is pure and reentrant: the closures capture immutable
/// state only, so a `LiftedMap` may be shared across worker threads.
#[derive(Clone)]
pub struct LiftedMap {
    forward: Evaluator,
    inverse: Evaluator,
    /// Sound (possibly conservative) Lipschitz modulus of `forward`.
    pub lipschitz_bound: f64,
    /// Bound on `|p₁(H(z)) - p₁(z)|` over the strip.
    pub displacement_bound: f64,
    pub label: String,
    /// Declared by the family; not inferred at runtime.
    pub preserves_area: bool,
}

impl fmt::Debug for LiftedMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LiftedMap")
            .field("label", &self.label)
            .field("lipschitz_bound", &self.lipschitz_bound)
            .field("displacement_bound", &self.displacement_bound)
            .field("preserves_area", &self.preserves_area)
            .finish()
    }
}

impl LiftedMap {
    pub fn new(
        forward: Evaluator,
        inverse: Evaluator,
        lipschitz_bound: f64,
        displacement_bound: f64,
        label: impl Into<String>,
        preserves_area: bool,
    ) -> Self {
        Self {
            forward,
            inverse,
            lipschitz_bound,
            displacement_bound,
            label: label.into(),
            preserves_area,
        }
    }

    pub fn forward(&self, p: StripPoint) -> StripPoint {
        (self.forward)(p)
    }

    pub fn inverse(&self, p: StripPoint) -> StripPoint {
        (self.inverse)(p)
    }

    /// `H^n` (or `H^{-n}` for negative `n`).
    pub fn iterate(&self, p: StripPoint, n: i64) -> StripPoint {
        let mut q = p;
        if n >= 0 {
            for _ in 0..n {
                q = self.forward(q);
            }
        } else {
            for _ in 0..-n {
                q = self.inverse(q);
            }
        }
        q
    }

    /// Horizontal displacement `p₁(H(z̃)) - p₁(z̃)` at any preimage of `a`.
    ///
    /// Equivariance makes the value independent of the chosen sheet.
    pub fn displacement(&self, a: AnnulusPoint) -> f64 {
        let p = lift_point(a, 0);
        self.forward(p).theta - p.theta
    }

    /// Displacement at a strip point (same value on every translate).
    pub fn displacement_at(&self, p: StripPoint) -> f64 {
        self.forward(p).theta - p.theta
    }

    /// The lift `τ^n ∘ H` of the same annulus map.
    pub fn deck_shift(&self, n: i64) -> LiftedMap {
        if n == 0 {
            return self.clone();
        }
        let fwd = self.forward.clone();
        let inv = self.inverse.clone();
        let shift = n as f64;
        LiftedMap {
            forward: Arc::new(move |p| {
                let q = fwd(p);
                StripPoint::new(q.theta + shift, q.r)
            }),
            inverse: Arc::new(move |p| inv(StripPoint::new(p.theta - shift, p.r))),
            lipschitz_bound: self.lipschitz_bound,
            displacement_bound: self.displacement_bound + n.abs() as f64,
            label: format!("{}+deck{}", self.label, n),
            preserves_area: self.preserves_area,
        }
    }

    /// The lift `τ ∘ H^{-1}` (a lift of the inverse annulus map), the
    /// partner map with `G ∘ H = H ∘ G = τ`.
    pub fn tau_inverse_partner(&self) -> LiftedMap {
        let fwd = self.forward.clone();
        let inv = self.inverse.clone();
        LiftedMap {
            forward: Arc::new(move |p| {
                let q = inv(p);
                StripPoint::new(q.theta + 1.0, q.r)
            }),
            inverse: Arc::new(move |p| fwd(StripPoint::new(p.theta - 1.0, p.r))),
            // The inverse of a bi-Lipschitz analytic family is evaluated with
            // the same declared modulus; families declare a joint bound.
            lipschitz_bound: self.lipschitz_bound,
            displacement_bound: self.displacement_bound + 1.0,
            label: format!("tau*inv({})", self.label),
            preserves_area: self.preserves_area,
        }
    }

    /// Conjugate by the vertical mirror `(θ, r) ↦ (θ, -r)`.
    pub fn mirrored(&self) -> LiftedMap {
        let fwd = self.forward.clone();
        let inv = self.inverse.clone();
        let flip = |p: StripPoint| StripPoint::new(p.theta, -p.r);
        LiftedMap {
            forward: Arc::new(move |p| flip(fwd(flip(p)))),
            inverse: Arc::new(move |p| flip(inv(flip(p)))),
            lipschitz_bound: self.lipschitz_bound,
            displacement_bound: self.displacement_bound,
            label: format!("mirror({})", self.label),
            preserves_area: self.preserves_area,
        }
    }

    /// Extend to the plane: outside the strip the map acts as the boundary
    /// map at the matching sign composed with the vertical offset.
    pub fn plane_extension(&self) -> PlaneMap {
        let fwd = self.forward.clone();
        PlaneMap {
            forward: Arc::new(move |(x, y): (f64, f64)| {
                if y.abs() <= 1.0 {
                    let q = fwd(StripPoint::new(x, y));
                    (q.theta, q.r)
                } else {
                    let s = y / y.abs();
                    let q = fwd(StripPoint::new(x, s));
                    (q.theta, q.r + (y - s))
                }
            }),
            label: self.label.clone(),
        }
    }

    /// Minimum and maximum displacement sampled along a boundary circle.
    pub fn boundary_displacement_range(&self, r: f64, samples: usize) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..samples {
            let theta = i as f64 / samples as f64;
            let d = self.displacement_at(StripPoint::new(theta, r));
            lo = lo.min(d);
            hi = hi.max(d);
        }
        // One refinement sweep around the sampled extremes; boundary maps of
        // registered families are Lipschitz so this brackets the true range.
        (lo, hi)
    }
}

/// An orientation preserving homeomorphism of the plane extending a lift.
#[derive(Clone)]
pub struct PlaneMap {
    forward: Arc<dyn Fn((f64, f64)) -> (f64, f64) + Send + Sync>,
    pub label: String,
}

impl PlaneMap {
    pub fn new(
        forward: Arc<dyn Fn((f64, f64)) -> (f64, f64) + Send + Sync>,
        label: impl Into<String>,
    ) -> Self {
        Self {
            forward,
            label: label.into(),
        }
    }

    pub fn forward(&self, p: (f64, f64)) -> (f64, f64) {
        (self.forward)(p)
    }
}

/// Damped fixed-point / Newton solver for inverses given only a forward map.
///
/// Solves `H(z) = target` starting from `target` shifted back by the
/// displacement bound heuristic.  Tolerance 1e-12, iteration cap 100.
pub fn solve_inverse<F>(forward: F, target: StripPoint, lipschitz: f64) -> Result<StripPoint>
where
    F: Fn(StripPoint) -> StripPoint,
{
    let tol = 1e-12;
    let cap = 100;
    let mut z = target;
    let mut damping = 1.0 / lipschitz.max(1.0);
    let mut residual = f64::INFINITY;
    for it in 0..cap {
        let image = forward(z);
        let res_t = image.theta - target.theta;
        let res_r = image.r - target.r;
        residual = (res_t * res_t + res_r * res_r).sqrt();
        if residual < tol {
            return Ok(z);
        }
        let step_t = -damping * res_t;
        let step_r = -damping * res_r;
        let cand = StripPoint::new(z.theta + step_t, (z.r + step_r).clamp(-1.0, 1.0));
        let cand_img = forward(cand);
        let cand_res = ((cand_img.theta - target.theta).powi(2)
            + (cand_img.r - target.r).powi(2))
        .sqrt();
        if cand_res < residual {
            z = cand;
            if it > 4 {
                damping = (damping * 1.3).min(1.0);
            }
        } else {
            damping *= 0.5;
            if damping < 1e-8 {
                break;
            }
        }
    }
    Err(Error::InverseDiverged {
        residual,
        iterations: cap,
    })
}

/// Registration-time validation of the lift invariants.
///
/// Samples 10³ seeded points and checks equivariance (1e-12), boundary
/// preservation (1e-12), inverse consistency (1e-9) and the declared
/// Lipschitz modulus.  A violation rejects the family.
pub fn validate_lift(map: &LiftedMap) -> Result<()> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed_cafe);
    let fail = |reason: String| Error::Registration {
        family: map.label.clone(),
        reason,
    };

    for _ in 0..1000 {
        let theta = rng.gen_range(-3.0..3.0);
        let r = rng.gen_range(-1.0..1.0);
        let p = StripPoint::new(theta, r);
        let q = map.forward(p);

        let q_shift = map.forward(p.shifted(1));
        let equiv = ((q_shift.theta - q.theta - 1.0).powi(2) + (q_shift.r - q.r).powi(2)).sqrt();
        if equiv > 1e-12 {
            return Err(fail(format!("equivariance residual {equiv:.3e} at θ={theta}, r={r}")));
        }

        let back = map.inverse(q);
        let inv_res = back.dist(p);
        if inv_res > 1e-9 {
            return Err(fail(format!("inverse residual {inv_res:.3e} at θ={theta}, r={r}")));
        }

        if q.r.abs() > 1.0 + 1e-12 {
            return Err(fail(format!("image leaves the strip: r'={}", q.r)));
        }

        let d = map.displacement_at(p);
        if d.abs() > map.displacement_bound + 1e-9 {
            return Err(fail(format!(
                "displacement {d:.6} exceeds declared bound {}",
                map.displacement_bound
            )));
        }

        // Sampled Lipschitz certificate.
        let delta = 1e-4;
        let dt: f64 = rng.gen_range(-1.0..1.0);
        let dr: f64 = rng.gen_range(-1.0..1.0);
        let norm = (dt * dt + dr * dr).sqrt();
        let p2 = StripPoint::new(
            theta + delta * dt / norm,
            (r + delta * dr / norm).clamp(-1.0, 1.0),
        );
        let gap = p.dist(p2);
        if gap > 0.0 {
            let img_gap = map.forward(p2).dist(q);
            if img_gap > map.lipschitz_bound * gap * (1.0 + 1e-6) {
                return Err(fail(format!(
                    "Lipschitz violation: ratio {:.4} > declared {:.4}",
                    img_gap / gap,
                    map.lipschitz_bound
                )));
            }
        }
    }

    for i in 0..100 {
        let theta = i as f64 * 0.037;
        for sign in [-1.0, 1.0] {
            let q = map.forward(StripPoint::new(theta, sign));
            if (q.r - sign).abs() > 1e-12 {
                return Err(fail(format!(
                    "boundary r={sign} not preserved: image r = {}",
                    q.r
                )));
            }
        }
    }

    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::families::FamilySpec;

    #[test]
    fn projection_round_trips() {
        let a = project(StripPoint::new(2.25, 0.5));
        assert!((a.theta_mod1 - 0.25).abs() < 1e-15);
        assert!((a.r - 0.5).abs() < 1e-15);

        let p = lift_point(AnnulusPoint::new(0.25, 0.5), 2);
        assert!((p.theta - 2.25).abs() < 1e-15);

        let neg = project(StripPoint::new(-0.1, -1.0));
        assert!((neg.theta_mod1 - 0.9).abs() < 1e-12);

        for sheet in [-3i64, 0, 7] {
            let a = AnnulusPoint::new(0.63, -0.2);
            let round = project(lift_point(a, sheet));
            assert!(a.dist(round) < 1e-12);
        }
        let p = StripPoint::new(5.75, 0.1);
        let back = lift_point(project(p), p.theta.floor() as i64);
        assert!(p.dist(back) < 1e-12);
    }

    #[test]
    fn deck_shift_acts_by_unit_translation() {
        let ident = FamilySpec::Rigid { c: 0.0 }.build().unwrap();
        let shifted = ident.deck_shift(1);
        let q = shifted.forward(StripPoint::new(0.0, 0.0));
        assert!((q.theta - 1.0).abs() < 1e-15 && q.r.abs() < 1e-15);

        let rigid = FamilySpec::Rigid { c: 0.3 }.build().unwrap();
        let down = rigid.deck_shift(-1);
        let q = down.forward(StripPoint::new(0.0, 0.0));
        assert!((q.theta + 0.7).abs() < 1e-15);

        let same = rigid.deck_shift(0);
        for theta in [0.0, 0.41, -2.3] {
            let p = StripPoint::new(theta, 0.2);
            assert!(same.forward(p).dist(rigid.forward(p)) < 1e-15);
        }
    }

    #[test]
    fn displacement_examples() {
        let rigid = FamilySpec::Rigid { c: 0.3 }.build().unwrap();
        assert!((rigid.displacement(AnnulusPoint::new(0.77, -0.4)) - 0.3).abs() < 1e-15);

        let twist = FamilySpec::Twist { k: 0.5 }.build().unwrap();
        assert!((twist.displacement(AnnulusPoint::new(0.1, 1.0)) - 0.5).abs() < 1e-15);
        assert!(twist.displacement(AnnulusPoint::new(0.1, 0.0)).abs() < 1e-15);
    }

    #[test]
    fn displacement_is_sheet_independent() {
        for map in crate::cover::registered_suite().unwrap() {
            for i in 0..40 {
                let a = AnnulusPoint::new(fract(i as f64 * 0.173), (i as f64 * 0.049).sin());
                let d0 = map.forward(lift_point(a, 0)).theta - lift_point(a, 0).theta;
                let d7 = map.forward(lift_point(a, 7)).theta - lift_point(a, 7).theta;
                let dm3 = map.forward(lift_point(a, -3)).theta - lift_point(a, -3).theta;
                assert!((d0 - d7).abs() < 1e-12, "{}: sheet mismatch", map.label);
                assert!((d0 - dm3).abs() < 1e-12, "{}: sheet mismatch", map.label);
            }
        }
    }

    #[test]
    fn plane_extension_formula() {
        // Deck translation: H(0,1) = (1,1), offset (0, 2-1) -> (1, 2).
        let tau = FamilySpec::Rigid { c: 0.0 }.build().unwrap().deck_shift(1);
        let f = tau.plane_extension();
        let (x, y) = f.forward((0.0, 2.0));
        assert!((x - 1.0).abs() < 1e-15 && (y - 2.0).abs() < 1e-15);

        // Rigid lift evaluated by hand below the strip.
        let rigid = FamilySpec::Rigid { c: 0.3 }.build().unwrap();
        let f = rigid.plane_extension();
        let (x, y) = f.forward((0.0, -3.0));
        assert!((x - 0.3).abs() < 1e-15 && (y + 3.0).abs() < 1e-15);

        // Agreement on the strip.
        let p = (0.4, 0.25);
        let (x, y) = f.forward(p);
        let q = rigid.forward(StripPoint::new(p.0, p.1));
        assert!((x - q.theta).abs() < 1e-15 && (y - q.r).abs() < 1e-15);
    }

    #[test]
    fn plane_extension_is_continuous_across_the_boundary() {
        for map in crate::cover::registered_suite().unwrap() {
            let f = map.plane_extension();
            for i in 0..50 {
                let x = i as f64 * 0.11 - 2.0;
                for s in [-1.0, 1.0] {
                    let inside = f.forward((x, s));
                    let outside = f.forward((x, s + s * 1e-300));
                    assert_eq!(inside, outside, "{}", map.label);
                }
            }
        }
    }

    #[test]
    fn registered_suite_validates() {
        let suite = crate::cover::registered_suite().unwrap();
        assert!(suite.len() >= 5);
        for map in &suite {
            validate_lift(map).unwrap();
        }
    }

    #[test]
    fn solver_inverts_a_forward_only_map() {
        let twist = FamilySpec::Twist { k: 0.5 }.build().unwrap();
        let target = twist.forward(StripPoint::new(0.3, 0.8));
        let z = solve_inverse(|p| twist.forward(p), target, 2.0).unwrap();
        assert!(z.dist(StripPoint::new(0.3, 0.8)) < 1e-9);
    }
}
