//! Dense real-symmetric eigendecomposition and oscillator Boltzmann weights.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{HBAR, K_B, RAD_PER_NS_TO_RAD_PER_S};

/// Relative asymmetry accepted by [`eigh`].
pub const SYMMETRY_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// Eigenvalues (ascending) and orthonormal eigenvectors (columns) of a real
/// symmetric matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenSystem {
    energies: DVector<f64>,
    vectors: DMatrix<f64>,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &DVector<f64> {
        &self.energies
    }

    /// Column `γ` holds `|γ⟩` in the input basis.
    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    /// `max_γ ‖A v_γ − E_γ v_γ‖`.
    pub fn max_residual(&self, matrix: &DMatrix<f64>) -> f64 {
        let av = matrix * &self.vectors;
        (0..self.dim())
            .map(|g| (av.column(g) - self.vectors.column(g) * self.energies[g]).norm())
            .fold(0.0, f64::max)
    }

    /// `max |VᵀV − I|` elementwise.
    pub fn orthonormality_error(&self) -> f64 {
        let gram = self.vectors.transpose() * &self.vectors;
        (gram - DMatrix::identity(self.dim(), self.dim())).amax()
    }

    /// Largest `|E_γ|`, i.e. the spectral norm of the decomposed matrix.
    pub fn spectral_norm(&self) -> f64 {
        self.energies.amax()
    }

    /// Flips the sign of eigenvector `γ`. Every physical quantity downstream
    /// is unchanged; this exists to probe that.
    pub fn negate_vector(&mut self, gamma: usize) {
        self.vectors.column_mut(gamma).neg_mut();
    }
}

/// Cyclic Jacobi eigendecomposition of a real symmetric matrix.
///
/// Eigenvalues come back ascending. Each eigenvector is normalized so that
/// its largest-magnitude entry (first one on ties) is positive.
pub fn eigh(matrix: &DMatrix<f64>) -> Result<EigenSystem> {
    let n = matrix.nrows();
    if matrix.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: matrix.ncols(),
        });
    }
    if n == 0 {
        return Err(Error::invalid("matrix", "dimension must be at least 1"));
    }
    if matrix.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("matrix", "entries must be finite"));
    }

    let scale = matrix.amax();
    for c in 0..n {
        for r in (c + 1)..n {
            let deviation = (matrix[(r, c)] - matrix[(c, r)]).abs();
            if deviation > SYMMETRY_TOL * scale {
                return Err(Error::NotSymmetric {
                    row: r,
                    col: c,
                    deviation,
                });
            }
        }
    }

    let mut a = DMatrix::from_fn(n, n, |r, c| 0.5 * (matrix[(r, c)] + matrix[(c, r)]));
    let mut v = DMatrix::<f64>::identity(n, n);
    jacobi_sweeps(&mut a, &mut v)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));

    let energies = DVector::from_iterator(n, order.iter().map(|&i| a[(i, i)]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.column(src).clone_owned();
        let mut pivot = 0;
        for (i, x) in col.iter().enumerate() {
            if x.abs() > col[pivot].abs() {
                pivot = i;
            }
        }
        if col[pivot] < 0.0 {
            col.neg_mut();
        }
        vectors.set_column(dst, &col);
    }
    Ok(EigenSystem { energies, vectors })
}

fn off_diagonal_norm(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut sum = 0.0;
    for c in 0..n {
        for r in (c + 1)..n {
            sum += a[(r, c)] * a[(r, c)];
        }
    }
    (2.0 * sum).sqrt()
}

fn jacobi_sweeps(a: &mut DMatrix<f64>, v: &mut DMatrix<f64>) -> Result<()> {
    let n = a.nrows();
    // Rotations whose angle is below this fraction of the local diagonal
    // scale cannot change the diagonal in floating point.
    let negligible = 1e-3 * f64::EPSILON;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 || apq.abs() <= negligible * (a[(p, p)].abs() + a[(q, q)].abs()) {
                    continue;
                }
                rotated = true;
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;
                let tau = s / (1.0 + c);

                a[(p, p)] -= t * apq;
                a[(q, q)] += t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    let new_kp = akp - s * (akq + tau * akp);
                    let new_kq = akq + s * (akp - tau * akq);
                    a[(k, p)] = new_kp;
                    a[(p, k)] = new_kp;
                    a[(k, q)] = new_kq;
                    a[(q, k)] = new_kq;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp - s * (vkq + tau * vkp);
                    v[(k, q)] = vkq + s * (vkp - tau * vkq);
                }
            }
        }
        if !rotated {
            return Ok(());
        }
    }
    let diag_norm = a.diagonal().norm();
    Err(Error::NoConvergence {
        sweeps: MAX_SWEEPS,
        off_norm: off_diagonal_norm(a),
        target: negligible * diag_norm,
    })
}

/// Bath temperature. `Zero` is the ground-state limit, which the Boltzmann
/// formula cannot represent directly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Temperature {
    Kelvin(f64),
    Zero,
}

impl std::fmt::Display for Temperature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Temperature::Kelvin(t) => write!(f, "{t} K"),
            Temperature::Zero => f.write_str("0 K"),
        }
    }
}

/// Boltzmann populations `p_n` of the truncated oscillator levels.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThermalWeights {
    pub temperature: Temperature,
    pub omega: f64,
    pub weights: Vec<f64>,
}

impl ThermalWeights {
    /// `ħω / k_B T` for `omega` in rad/ns, `temperature` in K.
    pub fn reduced_energy(omega: f64, temperature: f64) -> f64 {
        HBAR * omega * RAD_PER_NS_TO_RAD_PER_S / (K_B * temperature)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

impl std::ops::Index<usize> for ThermalWeights {
    type Output = f64;

    fn index(&self, n: usize) -> &f64 {
        &self.weights[n]
    }
}

/// `p_n ∝ exp(−E_n / k_B T)` with `E_n = (n + ½) ħω`, normalized over the
/// first `n_bath` levels.
pub fn thermal_weights(
    omega: f64,
    temperature: Temperature,
    n_bath: usize,
) -> Result<ThermalWeights> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::invalid(
            "omega",
            "oscillator frequency must be positive",
        ));
    }
    if n_bath == 0 {
        return Err(Error::invalid(
            "n_bath",
            "at least one oscillator level is required",
        ));
    }
    let weights = match temperature {
        Temperature::Zero => {
            let mut w = vec![0.0; n_bath];
            w[0] = 1.0;
            w
        }
        Temperature::Kelvin(t) => {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::invalid(
                    "temperature",
                    format!("must be positive and finite, got {t} K (use the zero-temperature limit instead)"),
                ));
            }
            let x = ThermalWeights::reduced_energy(omega, t);
            let exponents: Vec<f64> = (0..n_bath).map(|n| -(n as f64 + 0.5) * x).collect();
            // Shift by the largest exponent so low temperatures do not underflow.
            let shift = exponents[0];
            let boltzmann: Vec<f64> = exponents.iter().map(|e| (e - shift).exp()).collect();
            let z: f64 = boltzmann.iter().sum();
            boltzmann.into_iter().map(|b| b / z).collect()
        }
    };
    Ok(ThermalWeights {
        temperature,
        omega,
        weights,
    })
}
