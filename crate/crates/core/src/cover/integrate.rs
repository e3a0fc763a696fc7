//! Symplectic time-1 maps of Hamiltonian vector fields on the strip.
//!
//! The vector field is `θ' = ∂Φ/∂r`, `r' = -∂Φ/∂θ` for a 1-periodic
//! Hamiltonian `Φ`.  The basic step is the implicit midpoint rule, which
//! is symplectic and symmetric for arbitrary (also non-separable)
//! Hamiltonians; a triple-jump composition raises it to fourth order.
//! Midpoint equations are solved by fixed-point iteration to 1e-14.

use super::StripPoint;

pub trait HamiltonianField: Send + Sync {
    /// `(∂Φ/∂r, -∂Φ/∂θ)` at the given point.
    fn field(&self, theta: f64, r: f64) -> (f64, f64);
}

const SOLVE_TOL: f64 = 1e-14;
const SOLVE_CAP: usize = 60;

fn midpoint_step<F: HamiltonianField>(f: &F, p: StripPoint, h: f64) -> StripPoint {
    let (ft, fr) = f.field(p.theta, p.r);
    let mut qt = p.theta + h * ft;
    let mut qr = p.r + h * fr;
    for _ in 0..SOLVE_CAP {
        let mt = 0.5 * (p.theta + qt);
        let mr = 0.5 * (p.r + qr);
        let (ft, fr) = f.field(mt, mr);
        let nt = p.theta + h * ft;
        let nr = p.r + h * fr;
        let delta = (nt - qt).abs().max((nr - qr).abs());
        qt = nt;
        qr = nr;
        if delta < SOLVE_TOL {
            break;
        }
    }
    StripPoint::new(qt, qr)
}

/// One fourth-order composed step of size `h`.
fn yoshida_step<F: HamiltonianField>(f: &F, p: StripPoint, h: f64) -> StripPoint {
    let w1 = 1.0 / (2.0 - 2f64.powf(1.0 / 3.0));
    let w0 = 1.0 - 2.0 * w1;
    let p = midpoint_step(f, p, w1 * h);
    let p = midpoint_step(f, p, w0 * h);
    midpoint_step(f, p, w1 * h)
}

/// Time-1 map (forward for `substeps > 0` intermediate steps; pass a
/// negative `time` to integrate backwards).
pub fn time_map<F: HamiltonianField>(f: &F, p: StripPoint, time: f64, substeps: usize) -> StripPoint {
    let h = time / substeps as f64;
    let mut q = p;
    for _ in 0..substeps {
        q = yoshida_step(f, q, h);
    }
    // Clamp roundoff excursions; the exact flow preserves the strip.
    if q.r > 1.0 {
        q.r = 1.0;
    } else if q.r < -1.0 {
        q.r = -1.0;
    }
    q
}
