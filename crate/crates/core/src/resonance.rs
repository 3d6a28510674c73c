//! Resonance profiles of bare states and the overlapping-resonance metric.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::dynamics::OverlapTable;
use crate::error::{Error, Result};
use crate::model::Spin;

/// Squared overlaps `|⟨γ|s,m⟩|²` of one bare state with every eigenstate,
/// ordered by eigenenergy.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResonanceProfile {
    pub spin: Spin,
    pub level: usize,
    /// `(E_γ [rad/ns], |⟨γ|s,m⟩|²)`
    pub points: Vec<(f64, f64)>,
}

impl ResonanceProfile {
    pub fn total_weight(&self) -> f64 {
        self.points.iter().map(|(_, w)| w).sum()
    }

    /// Number of eigenstates carrying more than `threshold` of the weight.
    pub fn support(&self, threshold: f64) -> usize {
        self.points.iter().filter(|(_, w)| *w > threshold).count()
    }
}

pub fn resonance_profile(
    table: &OverlapTable,
    spin: Spin,
    level: usize,
) -> Result<ResonanceProfile> {
    if level >= table.n_bath() {
        return Err(Error::OutOfRange(format!(
            "bare state |{spin},{level}> outside truncation of {} levels",
            table.n_bath()
        )));
    }
    // Energies are already ascending.
    let points = table
        .energies()
        .iter()
        .enumerate()
        .map(|(g, &e)| {
            let c = table.coefficient(spin, level, g);
            (e, c * c)
        })
        .collect();
    Ok(ResonanceProfile {
        spin,
        level,
        points,
    })
}

/// `A₊₋ = Σ_{m≠n} A₊^{mn} A₋^{mn}` with `A_s^{mn} = Σ_γ |⟨s,m|γ⟩⟨γ|s,n⟩|`.
///
/// The sum runs over ordered pairs, so every unordered pair contributes twice.
#[derive(Clone, Debug, PartialEq)]
pub struct OverlapMetric {
    pub a_plus_minus: f64,
    /// `A₊^{mn}`, symmetric.
    pub a_plus: DMatrix<f64>,
    /// `A₋^{mn}`, symmetric.
    pub a_minus: DMatrix<f64>,
}

/// Temperature does not enter; the table's thermal weights are unused.
pub fn overlap_metric(table: &OverlapTable) -> OverlapMetric {
    let n = table.n_bath();
    let pair_table = |spin: Spin| {
        let abs = DMatrix::from_fn(n, table.n_states(), |m, g| {
            table.coefficient(spin, m, g).abs()
        });
        &abs * abs.transpose()
    };
    let a_plus = pair_table(Spin::Plus);
    let a_minus = pair_table(Spin::Minus);
    let mut a_plus_minus = 0.0;
    for m in 0..n {
        for k in 0..n {
            if m != k {
                a_plus_minus += a_plus[(m, k)] * a_minus[(m, k)];
            }
        }
    }
    OverlapMetric {
        a_plus_minus,
        a_plus,
        a_minus,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::overlap_table;
    use crate::model::{build_hamiltonian, HamiltonianParams};
    use crate::spectral::{eigh, thermal_weights, Temperature};
    use crate::units::ghz;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn table_for(p: &HamiltonianParams) -> OverlapTable {
        let eig = eigh(&build_hamiltonian(p).unwrap()).unwrap();
        let w = thermal_weights(p.omega, Temperature::Kelvin(0.025), p.n_bath).unwrap();
        overlap_table(&eig, p.basis().unwrap(), &w).unwrap()
    }

    #[test]
    fn uncoupled_profile_is_a_single_line() {
        let p = HamiltonianParams::from_ghz(1.0, 0.1, 0.0, 0.0, 0.0, 5).unwrap();
        let t = table_for(&p);
        let prof = resonance_profile(&t, Spin::Minus, 2).unwrap();
        let lines: Vec<_> = prof.points.iter().filter(|(_, w)| *w > 0.0).collect();
        assert_eq!(lines.len(), 1);
        assert_eq!(lines[0].1, 1.0);
        assert_relative_eq!(lines[0].0, 2.0 * p.omega - 0.5 * p.omega0, epsilon = 1e-12);
        assert_eq!(overlap_metric(&t).a_plus_minus, 0.0);
    }

    #[test]
    fn strong_coupling_profile_is_broad() {
        let p = HamiltonianParams::from_ghz(1.0, 0.1, 1.0, 1.0, 0.0, 20).unwrap();
        let t = table_for(&p);
        for (s, m) in [
            (Spin::Plus, 0),
            (Spin::Minus, 0),
            (Spin::Minus, 2),
            (Spin::Plus, 2),
        ] {
            let prof = resonance_profile(&t, s, m).unwrap();
            assert_relative_eq!(prof.total_weight(), 1.0, epsilon = 1e-10);
            assert!(prof.points.windows(2).all(|w| w[0].0 <= w[1].0));
            assert!(prof.support(1e-3) >= 3, "{s},{m}: {}", prof.support(1e-3));
        }
        assert!(resonance_profile(&t, Spin::Plus, 20).is_err());
    }

    #[test]
    fn metric_matches_triple_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let p = HamiltonianParams::new(
                rng.gen_range(0.5..3.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                2,
            )
            .unwrap();
            let t = table_for(&p);
            let mut expected = 0.0;
            for m in 0..2 {
                for n in 0..2 {
                    if m == n {
                        continue;
                    }
                    let mut plus = 0.0;
                    let mut minus = 0.0;
                    for g in 0..4 {
                        plus += (t.coefficient(Spin::Plus, m, g) * t.coefficient(Spin::Plus, n, g))
                            .abs();
                        minus += (t.coefficient(Spin::Minus, m, g)
                            * t.coefficient(Spin::Minus, n, g))
                        .abs();
                    }
                    expected += plus * minus;
                }
            }
            let metric = overlap_metric(&t);
            assert_relative_eq!(metric.a_plus_minus, expected, epsilon = 1e-13);
            assert!(metric.a_plus_minus >= 0.0);
            assert_eq!(metric.a_plus, metric.a_plus.transpose());
        }
    }

    #[test]
    fn metric_peaks_on_dfs_plane() {
        // g_nr fixed at 1 GHz, g_r stepped through it
        let values: Vec<f64> = [0.5, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3, 1.5]
            .iter()
            .map(|&g_r| {
                let p =
                    HamiltonianParams::new(ghz(1.0), ghz(0.1), ghz(g_r), ghz(1.0), ghz(0.5), 20)
                        .unwrap();
                overlap_metric(&table_for(&p)).a_plus_minus
            })
            .collect();
        let argmax = (0..values.len())
            .max_by(|&a, &b| values[a].total_cmp(&values[b]))
            .unwrap();
        assert_eq!(argmax, 4, "{values:?}");
    }
}
