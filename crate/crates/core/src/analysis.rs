//! Weighted-norm computations and empirical exponent fits: distance-weighted
//! Lebesgue/Sobolev norms, the solution-space norm, a dyadic boundary-layer
//! diagnostic, boundary decay exponents, and time-Hoelder exponents.

use crate::geometry::{zeta_layer, Grid};
use crate::solver::Trajectory;
use crate::{Error, Result};
use nalgebra::DVector;

#[derive(Debug, Clone, Copy)]
pub struct NormSpec {
    pub p: f64,
    pub theta: f64,
    /// Derivative order: 0 or 1.
    pub order: usize,
    /// Extra power of the distance weight applied to the field first.
    pub weight_shift: f64,
}

impl NormSpec {
    pub fn order0(p: f64, theta: f64) -> NormSpec {
        NormSpec {
            p,
            theta,
            order: 0,
            weight_shift: 0.0,
        }
    }
}

fn lp_sum(field: &[f64], p: f64, theta: f64, grid: &Grid) -> f64 {
    let d = grid.domain.dim() as f64;
    let hd = grid.h.powi(grid.domain.dim() as i32);
    let mut acc = 0.0;
    for (i, &dx) in grid.distances().iter().enumerate() {
        if field[i] != 0.0 {
            acc += field[i].abs().powf(p) * dx.powf(theta - d) * hd;
        }
    }
    acc
}

/// (sum |u|^p d_x^{theta-d} h^d)^{1/p} over interior nodes.
pub fn weighted_lp_norm(field: &[f64], p: f64, theta: f64, grid: &Grid) -> f64 {
    lp_sum(field, p, theta, grid).powf(1.0 / p)
}

// First differences of the exterior-zero extension: centered where both
// lattice neighbours are interior, one-sided against the zero extension at
// boundary-adjacent nodes.
fn gradient_component(field: &[f64], grid: &Grid, axis: usize) -> Vec<f64> {
    let n = grid.len();
    let mut out = vec![0.0; n];
    let mut step = [0i64; 2];
    step[axis] = 1;
    for (i, z) in grid.lattice.iter().enumerate() {
        let plus = grid.interior_index([z[0] + step[0], z[1] + step[1]]);
        let minus = grid.interior_index([z[0] - step[0], z[1] - step[1]]);
        let up = plus.map_or(0.0, |j| field[j]);
        let um = minus.map_or(0.0, |j| field[j]);
        out[i] = match (plus, minus) {
            (Some(_), Some(_)) => (up - um) / (2.0 * grid.h),
            (Some(_), None) => (up - field[i]) / grid.h,
            (None, Some(_)) => (field[i] - um) / grid.h,
            (None, None) => 0.0,
        };
    }
    out
}

/// Order-n weighted Sobolev norm: the order-0 piece plus, for n = 1, the
/// |d_x Du|^p piece with the same weight.
pub fn weighted_sobolev_norm(field: &[f64], n: usize, p: f64, theta: f64, grid: &Grid) -> f64 {
    assert!(n <= 1, "only orders 0 and 1 are supported");
    let mut acc = lp_sum(field, p, theta, grid);
    if n == 1 {
        let dist = grid.distances();
        for axis in 0..grid.domain.dim() {
            let grad = gradient_component(field, grid, axis);
            let weighted: Vec<f64> = grad
                .iter()
                .zip(dist.iter())
                .map(|(g, d)| g * d)
                .collect();
            acc += lp_sum(&weighted, p, theta, grid);
        }
    }
    acc.powf(1.0 / p)
}

#[derive(Debug, Clone, Copy)]
pub struct SolutionNormParams {
    pub p: f64,
    pub theta: f64,
    pub alpha: f64,
}

fn time_lp(fields: &[Vec<f64>], dt: f64, p: f64, theta: f64, grid: &Grid) -> f64 {
    let mut acc = 0.0;
    for f in fields {
        acc += dt * lp_sum(f, p, theta, grid);
    }
    acc.powf(1.0 / p)
}

fn shifted(field: &[f64], psi: &[f64], expo: f64) -> Vec<f64> {
    field
        .iter()
        .zip(psi.iter())
        .map(|(u, s)| u * s.powf(expo))
        .collect()
}

/// Discrete solution-space norm: the weighted norm of psi^{-alpha/2} u, the
/// initial-data term |psi^{-alpha/2+alpha/p} u0|, the drift term
/// |psi^{alpha/2} f| and the unshifted amplitude term, all in L_{p,theta}
/// with a rectangle rule in time for the trajectory pieces.
pub fn solution_space_norm(
    traj: &Trajectory,
    drift_fields: &[Vec<f64>],
    amp_fields: &[Vec<f64>],
    u0: &DVector<f64>,
    params: &SolutionNormParams,
    grid: &Grid,
) -> f64 {
    let psi = grid.distances();
    let dt = if traj.times.len() > 1 {
        traj.times[1] - traj.times[0]
    } else {
        1.0
    };
    let a2 = params.alpha / 2.0;
    let u_piece: Vec<Vec<f64>> = traj
        .fields
        .iter()
        .map(|f| shifted(f.as_slice(), &psi, -a2))
        .collect();
    let f_piece: Vec<Vec<f64>> = drift_fields
        .iter()
        .map(|f| shifted(f, &psi, a2))
        .collect();
    let u0_piece = shifted(u0.as_slice(), &psi, -a2 + params.alpha / params.p);
    time_lp(&u_piece, dt, params.p, params.theta, grid)
        + weighted_lp_norm(&u0_piece, params.p, params.theta, grid)
        + time_lp(&f_piece, dt, params.p, params.theta, grid)
        + time_lp(amp_fields, dt, params.p, params.theta, grid)
}

/// Order-0 dyadic layer diagnostic
/// (sum_k e^{-k(theta-d)} sum_i zeta_k(x_i)^p |u_i|^p h^d)^{1/p},
/// comparable to the weighted L_p norm.
pub fn dyadic_norm_diagnostic(field: &[f64], p: f64, theta: f64, grid: &Grid) -> f64 {
    let d = grid.domain.dim() as f64;
    let hd = grid.h.powi(grid.domain.dim() as i32);
    let dist = grid.distances();
    let dmax = dist.iter().cloned().fold(0.0f64, f64::max);
    let dmin = dist.iter().cloned().fold(f64::INFINITY, f64::min);
    let k_lo = (-dmax.ln()).floor() as i64 - 2;
    let k_hi = (-dmin.ln()).ceil() as i64 + 2;
    let mut acc = 0.0;
    for k in k_lo..=k_hi {
        let mut layer = 0.0;
        for (i, &x) in grid.nodes.iter().enumerate() {
            if field[i] != 0.0 {
                let z = zeta_layer(&grid.domain, k, x);
                if z > 0.0 {
                    layer += z.powf(p) * field[i].abs().powf(p) * hd;
                }
            }
        }
        acc += (-(k as f64) * (theta - d)).exp() * layer;
    }
    acc.powf(1.0 / p)
}

pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(ys.iter()) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}

/// Least-squares slope of log u against log d_x over the boundary strip
/// d_x in (2h, 0.1 diam); requires a positive field there.
pub fn boundary_decay_exponent(field: &[f64], grid: &Grid) -> Result<f64> {
    let diam = grid.domain.diameter();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, &dx) in grid.distances().iter().enumerate() {
        if dx > 2.0 * grid.h && dx < 0.1 * diam && field[i] > 0.0 {
            xs.push(dx.ln());
            ys.push(field[i].ln());
        }
    }
    if xs.len() < 4 {
        return Err(Error::Numerics(format!(
            "too few strip nodes for decay fit: {}",
            xs.len()
        )));
    }
    Ok(least_squares_slope(&xs, &ys))
}

/// Fitted slope of log E|u(t)-u(s)| (norm over space, mean over pairs and
/// paths) against log|t-s| over dyadic lags. Errors on trajectories that
/// are constant in time.
pub fn time_holder_exponent(
    trajs: &[Trajectory],
    spec: &NormSpec,
    grid: &Grid,
) -> Result<f64> {
    let steps = trajs
        .first()
        .map(|t| t.times.len() - 1)
        .ok_or_else(|| Error::Numerics("no trajectories".into()))?;
    if steps < 64 {
        return Err(Error::Numerics(format!(
            "need at least 64 time steps, got {steps}"
        )));
    }
    let dt = trajs[0].times[1] - trajs[0].times[0];
    let mut lags = Vec::new();
    let mut lag = 1usize;
    while lag <= steps / 4 {
        lags.push(lag);
        lag *= 2;
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &lag in &lags {
        let mut acc = 0.0;
        let mut cnt = 0usize;
        for traj in trajs {
            // Stride to keep the pair count bounded per lag.
            let stride = (steps / 16).max(1);
            let mut k = 0;
            while k + lag <= steps {
                let diff: Vec<f64> = traj.fields[k + lag]
                    .iter()
                    .zip(traj.fields[k].iter())
                    .map(|(a, b)| a - b)
                    .collect();
                acc += weighted_lp_norm(&diff, spec.p, spec.theta, grid);
                cnt += 1;
                k += stride;
            }
        }
        let mean = acc / cnt as f64;
        if mean <= 1e-14 {
            return Err(Error::Numerics("degenerate (constant) trajectory".into()));
        }
        xs.push((lag as f64 * dt).ln());
        ys.push(mean.ln());
    }
    Ok(least_squares_slope(&xs, &ys))
}
