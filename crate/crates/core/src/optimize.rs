//! Purity optimization over initial superpositions.
//!
//! The channel is affine on Bloch vectors, `r ↦ M r + b`, so the purity of
//! the output, `(1 + ‖M r + b‖²)/2`, is a convex quadratic in `r` and its
//! maximum over pure inputs sits on the unit sphere. [`max_purity`] searches
//! it with a 1° grid followed by coordinate refinement of every grid-local
//! maximum; [`max_purity_exact`] solves the same problem through the secular
//! equation and is kept as an independent cross-check.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, Matrix2, Matrix3, Vector3};
use num_complex::Complex64;
use serde::Serialize;

use crate::dynamics::{purity, reduced_density, ChannelMatrices, ChannelPropagator, SpinState};
use crate::error::Result;
use crate::model::HamiltonianParams;
use crate::spectral::{eigh, Temperature};
use crate::system::System;

/// Affine action of the channel on Bloch vectors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochChannel {
    pub m: Matrix3<f64>,
    pub b: Vector3<f64>,
    pub time: f64,
}

fn bloch_of(rho: &Matrix2<Complex64>) -> Vector3<f64> {
    Vector3::new(
        (rho[(0, 1)] + rho[(1, 0)]).re,
        (rho[(1, 0)] - rho[(0, 1)]).im,
        (rho[(0, 0)] - rho[(1, 1)]).re,
    )
}

pub fn bloch_channel(ch: &ChannelMatrices) -> BlochChannel {
    let half = Complex64::new(0.5, 0.0);
    let half_i = Complex64::new(0.0, 0.5);
    // (I + xσx + yσy + zσz)/2 ↦ (Q+R)/2 + x(P+T)/2 + y(−iP+iT)/2 + z(Q−R)/2
    let b = bloch_of(&((ch.q + ch.r) * half));
    let mx = bloch_of(&((ch.p + ch.t) * half));
    let my = bloch_of(&((ch.t - ch.p) * half_i));
    let mz = bloch_of(&((ch.q - ch.r) * half));
    BlochChannel {
        m: Matrix3::from_columns(&[mx, my, mz]),
        b,
        time: ch.time,
    }
}

impl BlochChannel {
    pub fn apply(&self, r: &Vector3<f64>) -> Vector3<f64> {
        self.m * r + self.b
    }

    pub fn purity(&self, r: &Vector3<f64>) -> f64 {
        0.5 * (1.0 + self.apply(r).norm_squared())
    }

    /// Purity of the output for the pure input at Bloch polar angle `polar`
    /// and relative phase `theta` (see [`SpinState::from_angles`]).
    pub fn purity_at(&self, polar: f64, theta: f64) -> f64 {
        self.purity(&bloch_from_angles(polar, theta))
    }
}

fn bloch_from_angles(polar: f64, theta: f64) -> Vector3<f64> {
    let (sp, cp) = polar.sin_cos();
    let (st, ct) = theta.sin_cos();
    Vector3::new(sp * ct, -sp * st, cp)
}

fn state_from_bloch(r: &Vector3<f64>) -> SpinState {
    let polar = r.z.clamp(-1.0, 1.0).acos();
    let theta = (-r.y).atan2(r.x);
    SpinState::from_angles(polar, theta)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SolverDiagnostics {
    pub grid_points: usize,
    pub refined_candidates: usize,
    pub refinement_iterations: usize,
    pub final_step: f64,
    pub final_improvement: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PurityReport {
    pub s_max: f64,
    pub state: SpinState,
    /// Purity range over the relative phase at the optimal magnitudes.
    pub s_diff: f64,
    pub time: f64,
    pub diagnostics: SolverDiagnostics,
}

impl PurityReport {
    pub fn c_plus_abs(&self) -> f64 {
        self.state.c_plus().norm()
    }

    pub fn theta(&self) -> f64 {
        self.state.relative_phase()
    }
}

const GRID_STEP: f64 = PI / 180.0;
const MIN_STEP: f64 = 1e-10;
const MAX_REFINE_ITERATIONS: usize = 100_000;
const MAX_CANDIDATES: usize = 8;

struct Refined {
    point: Vec<f64>,
    value: f64,
    iterations: usize,
    final_step: f64,
    last_improvement: f64,
}

/// Compass search: try ± step along every coordinate, move to the best
/// improvement, halve the step when nothing improves.
fn refine(f: impl Fn(&[f64]) -> f64, start: Vec<f64>, step: f64) -> Refined {
    let mut point = start;
    let mut value = f(&point);
    let mut step = step;
    let mut iterations = 0;
    let mut last_improvement = 0.0;
    while step >= MIN_STEP && iterations < MAX_REFINE_ITERATIONS {
        iterations += 1;
        let mut best: Option<(Vec<f64>, f64)> = None;
        for axis in 0..point.len() {
            for dir in [1.0, -1.0] {
                let mut trial = point.clone();
                trial[axis] += dir * step;
                let v = f(&trial);
                if v > best.as_ref().map_or(value, |b| b.1) {
                    best = Some((trial, v));
                }
            }
        }
        match best {
            Some((p, v)) => {
                last_improvement = v - value;
                point = p;
                value = v;
            }
            None => step *= 0.5,
        }
    }
    Refined {
        point,
        value,
        iterations,
        final_step: step,
        last_improvement,
    }
}

/// Maximum purity over pure initial states at the channel's time.
pub fn max_purity(ch: &ChannelMatrices) -> PurityReport {
    let bc = bloch_channel(ch);
    let n_polar = 181;
    let n_phase = 360;
    let grid = DMatrix::from_fn(n_polar, n_phase, |i, j| {
        bc.purity_at(i as f64 * GRID_STEP, j as f64 * GRID_STEP)
    });

    // Discrete local maxima; the phase axis wraps, the polar axis does not.
    let mut candidates: Vec<(usize, usize, f64)> = Vec::new();
    for i in 0..n_polar {
        for j in 0..n_phase {
            let v = grid[(i, j)];
            let mut is_max = true;
            'nb: for di in [-1i64, 0, 1] {
                let ii = i as i64 + di;
                if ii < 0 || ii >= n_polar as i64 {
                    continue;
                }
                for dj in [-1i64, 0, 1] {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let jj = (j as i64 + dj).rem_euclid(n_phase as i64) as usize;
                    if grid[(ii as usize, jj)] > v {
                        is_max = false;
                        break 'nb;
                    }
                }
            }
            if is_max {
                candidates.push((i, j, v));
            }
        }
    }
    // Stable sort keeps grid order among equal values.
    candidates.sort_by(|a, b| b.2.total_cmp(&a.2));
    candidates.truncate(MAX_CANDIDATES);

    let objective = |x: &[f64]| bc.purity_at(x[0], x[1]);
    let mut best: Option<Refined> = None;
    let mut iterations = 0;
    for &(i, j, _) in &candidates {
        let r = refine(
            objective,
            vec![i as f64 * GRID_STEP, j as f64 * GRID_STEP],
            GRID_STEP,
        );
        iterations += r.iterations;
        if best.as_ref().is_none_or(|b| r.value > b.value) {
            best = Some(r);
        }
    }
    let best = best.expect("grid always has a maximum");
    let state = state_from_bloch(&bloch_from_angles(best.point[0], best.point[1]));
    let s_diff = s_diff(ch, state.c_plus().norm()).s_diff;
    PurityReport {
        s_max: best.value,
        state,
        s_diff,
        time: ch.time,
        diagnostics: SolverDiagnostics {
            grid_points: n_polar * n_phase,
            refined_candidates: candidates.len(),
            refinement_iterations: iterations,
            final_step: best.final_step,
            final_improvement: best.last_improvement,
        },
    }
}

/// Exact maximum of `(1 + ‖M r + b‖²)/2` over `‖r‖ = 1` via the secular
/// equation of the trust-region subproblem. Returns the purity and the
/// optimal Bloch vector.
pub fn max_purity_exact(bc: &BlochChannel) -> Result<(f64, Vector3<f64>)> {
    let a = bc.m.transpose() * bc.m;
    let c = bc.m.transpose() * bc.b;
    let eig = eigh(&DMatrix::from_column_slice(3, 3, a.as_slice()))?;
    let vals = eig.energies();
    let vecs = eig.vectors();
    let top = vals[2];
    let u: [Vector3<f64>; 3] =
        std::array::from_fn(|i| Vector3::new(vecs[(0, i)], vecs[(1, i)], vecs[(2, i)]));
    let cp = u.map(|ui| ui.dot(&c));

    let scale = top.abs().max(1.0);
    let in_top = |i: usize| top - vals[i] <= 1e-13 * scale;
    let top_weight: f64 = (0..3).filter(|&i| in_top(i)).map(|i| cp[i] * cp[i]).sum();
    let secular = |lambda: f64| -> f64 {
        (0..3)
            .map(|i| {
                let d = lambda - vals[i];
                cp[i] * cp[i] / (d * d)
            })
            .sum()
    };
    let rest_at_top: f64 = (0..3)
        .filter(|&i| !in_top(i))
        .map(|i| {
            let d = top - vals[i];
            cp[i] * cp[i] / (d * d)
        })
        .sum();

    let r = if top_weight <= 1e-28 * (1.0 + c.norm_squared()) && rest_at_top <= 1.0 {
        // Hard case: λ sits on the top eigenvalue and the free component
        // along the top eigenvector completes the unit norm.
        let mut r = Vector3::zeros();
        for i in (0..3).filter(|&i| !in_top(i)) {
            r += u[i] * (cp[i] / (top - vals[i]));
        }
        let tau = (1.0 - r.norm_squared()).max(0.0).sqrt();
        r + u[2] * tau
    } else {
        let mut lo = top;
        let mut hi = top + c.norm();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if secular(mid) > 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let lambda = hi;
        let mut r = Vector3::zeros();
        for i in 0..3 {
            r += u[i] * (cp[i] / (lambda - vals[i]));
        }
        r.normalize()
    };
    Ok((bc.purity(&r), r))
}

/// Outcome of scanning the relative phase at fixed magnitudes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhaseScan {
    pub s_diff: f64,
    pub s_high: f64,
    pub theta_high: f64,
    pub s_low: f64,
    pub theta_low: f64,
}

/// `max_θ S − min_θ S` with `|c₊|` held fixed.
pub fn s_diff(ch: &ChannelMatrices, c_plus_abs: f64) -> PhaseScan {
    let c_plus_abs = c_plus_abs.clamp(0.0, 1.0);
    let c_minus = (1.0 - c_plus_abs * c_plus_abs).sqrt();
    let s_of = |theta: f64| {
        let psi = SpinState::new(
            Complex64::from_polar(c_plus_abs, theta),
            Complex64::new(c_minus, 0.0),
        )
        .expect("normalized by construction");
        purity(&reduced_density(ch, &psi))
    };
    if c_plus_abs == 0.0 || c_minus == 0.0 {
        // No superposition, so the phase is unphysical.
        let s = s_of(0.0);
        return PhaseScan {
            s_diff: 0.0,
            s_high: s,
            theta_high: 0.0,
            s_low: s,
            theta_low: 0.0,
        };
    }
    let n = 720;
    let step = TAU / n as f64;
    let values: Vec<f64> = (0..n).map(|i| s_of(i as f64 * step)).collect();
    let mut i_hi = 0;
    let mut i_lo = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[i_hi] {
            i_hi = i;
        }
        if *v < values[i_lo] {
            i_lo = i;
        }
    }
    let high = refine(|x: &[f64]| s_of(x[0]), vec![i_hi as f64 * step], step);
    let low = refine(|x: &[f64]| -s_of(x[0]), vec![i_lo as f64 * step], step);
    PhaseScan {
        s_diff: (high.value + low.value).max(0.0),
        s_high: high.value,
        theta_high: high.point[0].rem_euclid(TAU),
        s_low: -low.value,
        theta_low: low.point[0].rem_euclid(TAU),
    }
}

/// Purity at each requested time for a fixed initial state.
pub fn trajectory(
    propagator: &ChannelPropagator,
    psi: &SpinState,
    times: &[f64],
) -> Vec<(f64, f64)> {
    times
        .iter()
        .map(|&t| (t, purity(&reduced_density(&propagator.at(t), psi))))
        .collect()
}

/// Builds the system for `params` at `temperature` and evaluates
/// [`trajectory`].
pub fn purity_trajectory(
    params: &HamiltonianParams,
    temperature: Temperature,
    psi: &SpinState,
    times: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let system = System::new(*params, temperature)?;
    Ok(trajectory(&system.propagator, psi, times))
}
