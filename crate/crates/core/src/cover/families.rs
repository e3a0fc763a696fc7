//! Registered map families.
//!
//! Analytic families ship closed-form forward maps and either closed-form
//! inverses or the damped solver; the Hamiltonian bump family is the
//! time-1 map of a pendulum-like field under fourth-order symplectic
//! integration; grid families interpolate a sampled displacement table.
//!
//! Every family is validated at build time ([`super::validate_lift`]).

use super::integrate::{time_map, HamiltonianField};
use super::{fract, solve_inverse, validate_lift, LiftedMap, StripPoint};
use crate::error::{Error, Result};
use std::f64::consts::PI;
use std::sync::Arc;

/// Construction recipe for a lift, parsed from config blocks.
#[derive(Debug, Clone, PartialEq)]
pub enum FamilySpec {
    /// `(θ, r) ↦ (θ + c, r)`.
    Rigid { c: f64 },
    /// `(θ, r) ↦ (θ + k·r, r)`; the whole circle `r = 0` is fixed.
    Twist { k: f64 },
    /// `(θ, r) ↦ (θ + c, r - β(1 - r²))`: rotation combined with a
    /// boundary-fixing contraction towards the lower circle.
    Drift { c: f64, beta: f64 },
    /// Time-1 map of `Φ = r²/4 + (b/2π)·cos(2πθ)·(1-r²)²`: an
    /// area-preserving twist-like map with zero mean displacement and
    /// exactly two interior fixed points, at `(0,0)` and `(1/2,0)`.
    Bump { b: f64, substeps: usize },
    /// `(θ, r) ↦ (θ + c·ρ(θ,r), r)` with
    /// `ρ = sqrt(sin²(π(θ-θ₀))/π² + (r-r₀)²/4)`: displacement grows
    /// linearly with the distance to the single fixed point `(θ₀, r₀)`,
    /// which has winding index 0.
    Pinch { c: f64, theta0: f64, r0: f64 },
    /// Bilinear interpolation of a sampled displacement table.
    Grid(GridTable),
}

impl FamilySpec {
    pub fn family_name(&self) -> &'static str {
        match self {
            FamilySpec::Rigid { .. } => "rigid",
            FamilySpec::Twist { .. } => "twist",
            FamilySpec::Drift { .. } => "drift",
            FamilySpec::Bump { .. } => "bump",
            FamilySpec::Pinch { .. } => "pinch",
            FamilySpec::Grid(_) => "grid",
        }
    }

    /// Build and validate the lift.
    pub fn build(&self) -> Result<LiftedMap> {
        let map = self.build_unchecked()?;
        validate_lift(&map)?;
        Ok(map)
    }

    fn build_unchecked(&self) -> Result<LiftedMap> {
        match *self {
            FamilySpec::Rigid { c } => Ok(rigid(c)),
            FamilySpec::Twist { k } => Ok(twist(k)),
            FamilySpec::Drift { c, beta } => drift(c, beta),
            FamilySpec::Bump { b, substeps } => bump(b, substeps),
            FamilySpec::Pinch { c, theta0, r0 } => pinch(c, theta0, r0),
            FamilySpec::Grid(ref table) => Ok(table.clone().into_lift()),
        }
    }
}

fn rigid(c: f64) -> LiftedMap {
    LiftedMap::new(
        Arc::new(move |p: StripPoint| StripPoint::new(p.theta + c, p.r)),
        Arc::new(move |p: StripPoint| StripPoint::new(p.theta - c, p.r)),
        1.0,
        c.abs() + 1e-12,
        format!("rigid(c={c})"),
        true,
    )
}

fn twist(k: f64) -> LiftedMap {
    LiftedMap::new(
        Arc::new(move |p: StripPoint| StripPoint::new(p.theta + k * p.r, p.r)),
        Arc::new(move |p: StripPoint| StripPoint::new(p.theta - k * p.r, p.r)),
        (2.0 + k * k).sqrt(),
        k.abs() + 1e-12,
        format!("twist(k={k})"),
        true,
    )
}

fn drift(c: f64, beta: f64) -> Result<LiftedMap> {
    if !(0.0..0.5).contains(&beta) {
        return Err(Error::Registration {
            family: "drift".into(),
            reason: format!("contraction β={beta} must lie in [0, 0.5) to stay injective"),
        });
    }
    let fwd = move |p: StripPoint| StripPoint::new(p.theta + c, p.r - beta * (1.0 - p.r * p.r));
    // r' = βr² + r - β  =>  r = (-1 + sqrt(1 + 4β(β + r'))) / (2β).
    let inv = move |p: StripPoint| {
        let r = if beta == 0.0 {
            p.r
        } else {
            (-1.0 + (1.0 + 4.0 * beta * (beta + p.r)).sqrt()) / (2.0 * beta)
        };
        StripPoint::new(p.theta - c, r.clamp(-1.0, 1.0))
    };
    Ok(LiftedMap::new(
        Arc::new(fwd),
        Arc::new(inv),
        1.0 + 2.0 * beta + 1e-9,
        c.abs() + 1e-12,
        format!("drift(c={c},beta={beta})"),
        false,
    ))
}

struct PendulumTwist {
    b: f64,
}

impl HamiltonianField for PendulumTwist {
    fn field(&self, theta: f64, r: f64) -> (f64, f64) {
        // Φ = r²/4 + (b/2π)·cos(2πθ)·w(r),  w = (1-r²)².
        // θ is reduced mod 1 so the field is bitwise periodic.
        let t = 2.0 * PI * fract(theta);
        let (s, c) = t.sin_cos();
        let wr = (1.0 - r * r).powi(2);
        let dw = -4.0 * r * (1.0 - r * r);
        (0.5 * r + self.b / (2.0 * PI) * c * dw, self.b * s * wr)
    }
}

fn bump(b: f64, substeps: usize) -> Result<LiftedMap> {
    if !(0.0..0.45).contains(&b) {
        return Err(Error::Registration {
            family: "bump".into(),
            reason: format!("bump strength b={b} outside the validated range [0, 0.45)"),
        });
    }
    let substeps = substeps.max(2);
    let field = Arc::new(PendulumTwist { b });
    let f2 = field.clone();
    // |θ'| ≤ 1/2 + b·max|w'|/(2π)·2π …; max|w'| = 8/(3√3) ≈ 1.5396.
    let disp = 0.5 + b * 1.5396 / (2.0 * PI) * (2.0 * PI) + 1e-9;
    // Crude flow bound exp(sup‖Dfield‖); sampled validation tightens trust.
    let jac = (0.5 + 8.0 * b / (2.0 * PI)) + 2.0 * PI * b + 1.6 * b;
    let lip = jac.exp().min(12.0);
    Ok(LiftedMap::new(
        Arc::new(move |p: StripPoint| time_map(field.as_ref(), p, 1.0, substeps)),
        Arc::new(move |p: StripPoint| time_map(f2.as_ref(), p, -1.0, substeps)),
        lip,
        disp,
        format!("bump(b={b})"),
        true,
    ))
}

fn pinch(c: f64, theta0: f64, r0: f64) -> Result<LiftedMap> {
    if !(0.0..1.0).contains(&c) {
        return Err(Error::Registration {
            family: "pinch".into(),
            reason: format!("pinch strength c={c} must lie in [0, 1) to stay injective"),
        });
    }
    let rho = move |theta: f64, r: f64| -> f64 {
        let u = (PI * (theta - theta0)).sin() / PI;
        let v = 0.5 * (r - r0);
        (u * u + v * v).sqrt()
    };
    let fwd = move |p: StripPoint| StripPoint::new(p.theta + c * rho(fract(p.theta), p.r), p.r);
    let lip = 1.0 + c * (1.0 + 0.25f64).sqrt() + 1e-6;
    let inv = move |p: StripPoint| {
        // θ ↦ θ + c·ρ(θ, r) is strictly increasing for c < 1; invert per row.
        solve_inverse(fwd, p, 2.0).expect("pinch inverse solve")
    };
    let disp = c * (1.0 / (PI * PI) + 0.25 * (1.0 - r0).abs().max((1.0 + r0).abs()).powi(2)).sqrt();
    Ok(LiftedMap::new(
        Arc::new(fwd),
        Arc::new(inv),
        lip,
        disp + 1e-9,
        format!("pinch(c={c},theta0={theta0},r0={r0})"),
        false,
    ))
}

/// A sampled displacement table on a regular grid over one period.
///
/// Rows of the source CSV are `(θ_in, r_in, θ_out, r_out)`; displacements
/// are stored and interpolated bilinearly, which keeps the interpolant
/// exactly deck-equivariant.
#[derive(Debug, Clone, PartialEq)]
pub struct GridTable {
    pub n_theta: usize,
    pub n_r: usize,
    /// Row-major `[i_r][i_theta]`, θ-period wraps around.
    pub d_theta: Vec<f64>,
    pub d_r: Vec<f64>,
    pub label: String,
}

impl GridTable {
    pub fn parse_csv(text: &str, label: impl Into<String>) -> Result<GridTable> {
        let mut rows: Vec<(f64, f64, f64, f64)> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 4 {
                return Err(Error::Config(format!(
                    "grid csv line {}: expected 4 fields, got {}",
                    lineno + 1,
                    fields.len()
                )));
            }
            let mut vals = [0.0; 4];
            for (k, f) in fields.iter().enumerate() {
                vals[k] = f.parse::<f64>().map_err(|e| {
                    Error::Config(format!("grid csv line {}: {}", lineno + 1, e))
                })?;
            }
            rows.push((vals[0], vals[1], vals[2], vals[3]));
        }
        if rows.is_empty() {
            return Err(Error::Config("grid csv is empty".into()));
        }

        let mut thetas: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let mut rs: Vec<f64> = rows.iter().map(|r| r.1).collect();
        thetas.sort_by(f64::total_cmp);
        thetas.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        rs.sort_by(f64::total_cmp);
        rs.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        let n_theta = thetas.len();
        let n_r = rs.len();
        if n_theta < 2 || n_r < 2 {
            return Err(Error::Config("grid csv: need at least a 2×2 grid".into()));
        }
        for (k, t) in thetas.iter().enumerate() {
            let expect = k as f64 / n_theta as f64;
            if (t - expect).abs() > 1e-9 {
                return Err(Error::Config(format!(
                    "grid csv: θ nodes must be k/{n_theta}, found {t}"
                )));
            }
        }
        for (k, r) in rs.iter().enumerate() {
            let expect = -1.0 + 2.0 * k as f64 / (n_r - 1) as f64;
            if (r - expect).abs() > 1e-9 {
                return Err(Error::Config(format!(
                    "grid csv: r nodes must be uniform over [-1,1], found {r}"
                )));
            }
        }
        if rows.len() != n_theta * n_r {
            return Err(Error::Config(format!(
                "grid csv: {} rows do not fill a {}×{} grid",
                rows.len(),
                n_theta,
                n_r
            )));
        }

        let mut d_theta = vec![0.0; n_theta * n_r];
        let mut d_r = vec![0.0; n_theta * n_r];
        for (t_in, r_in, t_out, r_out) in rows {
            let i = ((t_in * n_theta as f64).round() as usize) % n_theta;
            let j = (((r_in + 1.0) / 2.0 * (n_r - 1) as f64).round() as usize).min(n_r - 1);
            d_theta[j * n_theta + i] = t_out - t_in;
            d_r[j * n_theta + i] = r_out - r_in;
        }
        Ok(GridTable {
            n_theta,
            n_r,
            d_theta,
            d_r,
            label: label.into(),
        })
    }

    fn displacement(&self, theta: f64, r: f64) -> (f64, f64) {
        let tf = fract(theta) * self.n_theta as f64;
        let i0 = (tf.floor() as usize).min(self.n_theta - 1);
        let ft = tf - i0 as f64;
        let i1 = (i0 + 1) % self.n_theta;
        let rf = ((r.clamp(-1.0, 1.0) + 1.0) / 2.0) * (self.n_r - 1) as f64;
        let j0 = (rf.floor() as usize).min(self.n_r - 2);
        let fr = rf - j0 as f64;
        let j1 = j0 + 1;
        let at = |j: usize, i: usize| (self.d_theta[j * self.n_theta + i], self.d_r[j * self.n_theta + i]);
        let (t00, r00) = at(j0, i0);
        let (t10, r10) = at(j0, i1);
        let (t01, r01) = at(j1, i0);
        let (t11, r11) = at(j1, i1);
        let dt = (1.0 - ft) * (1.0 - fr) * t00
            + ft * (1.0 - fr) * t10
            + (1.0 - ft) * fr * t01
            + ft * fr * t11;
        let dr = (1.0 - ft) * (1.0 - fr) * r00
            + ft * (1.0 - fr) * r10
            + (1.0 - ft) * fr * r01
            + ft * fr * r11;
        (dt, dr)
    }

    /// Finite-difference Lipschitz estimate times a 1.25 safety factor.
    fn lipschitz_estimate(&self) -> f64 {
        let mut worst: f64 = 1.0;
        let ht = 1.0 / self.n_theta as f64;
        let hr = 2.0 / (self.n_r - 1) as f64;
        for j in 0..self.n_r {
            for i in 0..self.n_theta {
                let (dt0, dr0) = self.displacement(i as f64 * ht, -1.0 + j as f64 * hr);
                let (dt1, dr1) = self.displacement((i as f64 + 1.0) * ht, -1.0 + j as f64 * hr);
                let col = (((dt1 - dt0) / ht + 1.0).powi(2) + ((dr1 - dr0) / ht).powi(2)).sqrt();
                worst = worst.max(col);
                if j + 1 < self.n_r {
                    let (dt2, dr2) = self.displacement(i as f64 * ht, -1.0 + (j as f64 + 1.0) * hr);
                    let row = (((dt2 - dt0) / hr).powi(2) + ((dr2 - dr0) / hr + 1.0).powi(2)).sqrt();
                    worst = worst.max(row);
                }
            }
        }
        worst * 1.25
    }

    fn into_lift(self) -> LiftedMap {
        let lip = self.lipschitz_estimate();
        let disp = self
            .d_theta
            .iter()
            .fold(0.0f64, |m, d| m.max(d.abs()))
            + 1e-9;
        let label = self.label.clone();
        let table = Arc::new(self);
        let t_inv = table.clone();
        let fwd = move |p: StripPoint| {
            let (dt, dr) = table.displacement(p.theta, p.r);
            StripPoint::new(p.theta + dt, (p.r + dr).clamp(-1.0, 1.0))
        };
        let inv = move |p: StripPoint| {
            let f = |q: StripPoint| {
                let (dt, dr) = t_inv.displacement(q.theta, q.r);
                StripPoint::new(q.theta + dt, (q.r + dr).clamp(-1.0, 1.0))
            };
            solve_inverse(f, p, 4.0).expect("grid inverse solve")
        };
        LiftedMap::new(Arc::new(fwd), Arc::new(inv), lip, disp, label, false)
    }
}

/// The shipped example suite, in a stable order.
pub fn registered_suite() -> Result<Vec<LiftedMap>> {
    Ok(vec![
        FamilySpec::Rigid { c: 0.3 }.build()?,
        FamilySpec::Twist { k: 0.5 }.build()?,
        FamilySpec::Drift { c: 0.4, beta: 0.3 }.build()?,
        FamilySpec::Bump { b: 0.25, substeps: 8 }.build()?,
        FamilySpec::Pinch { c: 0.5, theta0: 0.5, r0: 0.0 }.build()?,
    ])
}
