//! Exact eigenvalue counting: N(mu), the strict variant, full spectra at
//! small sizes, and the dual-spectrum identity.
//!
//! Counting runs on two cross-validated paths. Small problems use a dense
//! symmetric eigendecomposition; larger ones factor H - (mu +- eps) I and
//! read the inertia off the LDL^T pivots (Sylvester's law). The tie guard
//! eps = 1e-12 (1 + |mu|) pins "<=" versus "<" semantics at
//! machine-representable eigenvalues.

use crate::curve::{CountingCurve, CurveKind, CurveMeta};
use crate::error::{Error, Result};
use crate::operator::Hamiltonian;

/// Tie guard for counting semantics at eigenvalues.
pub fn tie_guard(mu: f64) -> f64 {
    1e-12 * (1.0 + mu.abs())
}

/// Sorted eigenvalues of H (dense path).
#[derive(Debug, Clone)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
}

/// Full symmetric eigendecomposition; O(n^3), intended for K^d in the
/// thousands at most.
pub fn spectrum(h: &Hamiltonian) -> Spectrum {
    let m = h.dense();
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().cloned().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Spectrum { eigenvalues: ev }
}

impl Spectrum {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn count_leq(&self, mu: f64) -> usize {
        let bar = mu + tie_guard(mu);
        self.eigenvalues.partition_point(|&ev| ev <= bar)
    }

    pub fn count_lt(&self, mu: f64) -> usize {
        let bar = mu - tie_guard(mu);
        self.eigenvalues.partition_point(|&ev| ev < bar)
    }
}

/// Path selection for the counting operations.
#[derive(Debug, Clone, Copy)]
pub struct CountOptions {
    /// Use the dense path when K^d does not exceed this.
    pub dense_limit: usize,
}

impl Default for CountOptions {
    fn default() -> Self {
        CountOptions { dense_limit: 4096 }
    }
}

/// Number of eigenvalues strictly below `shift`, by inertia of the LDL^T
/// factorization of H - shift I. No retries; counting semantics live in
/// the guarded wrappers.
pub fn inertia_count_below(h: &Hamiltonian, shift: f64) -> Result<usize> {
    h.shifted_skyline(shift)
        .ldlt()
        .map(|f| f.negative_pivots())
        .map_err(|_| Error::ShiftDegeneracy { shift })
}

/// Inertia count at mu + sign * eps with the tie guard doubled on each
/// factorization breakdown (three retries). The retry direction matches
/// the counting semantics: "+" keeps near-mu eigenvalues counted (<=),
/// "-" keeps them excluded (<).
fn inertia_count_guarded(h: &Hamiltonian, mu: f64, sign: f64) -> Result<usize> {
    for attempt in 0..=3 {
        let shift = mu + sign * tie_guard(mu) * (1 << attempt) as f64;
        if let Ok(f) = h.shifted_skyline(shift).ldlt() {
            return Ok(f.negative_pivots());
        }
    }
    Err(Error::ShiftDegeneracy { shift: mu })
}

/// Exact number of eigenvalues of H with lambda <= mu.
pub fn count_leq(h: &Hamiltonian, mu: f64) -> Result<usize> {
    count_leq_with(h, mu, &CountOptions::default())
}

pub fn count_leq_with(h: &Hamiltonian, mu: f64, opts: &CountOptions) -> Result<usize> {
    if h.n() <= opts.dense_limit {
        Ok(spectrum(h).count_leq(mu))
    } else {
        inertia_count_guarded(h, mu, 1.0)
    }
}

/// Exact number of eigenvalues of H with lambda < mu.
pub fn count_lt(h: &Hamiltonian, mu: f64) -> Result<usize> {
    count_lt_with(h, mu, &CountOptions::default())
}

pub fn count_lt_with(h: &Hamiltonian, mu: f64, opts: &CountOptions) -> Result<usize> {
    if h.n() <= opts.dense_limit {
        Ok(spectrum(h).count_lt(mu))
    } else {
        inertia_count_guarded(h, mu, -1.0)
    }
}

/// The integrated density of states N(mu) = count_leq / K^d over a sorted
/// grid. The dense path reuses one decomposition for the whole grid; the
/// inertia path factors once per point. The output does not depend on the
/// choice.
pub fn ids_curve(h: &Hamiltonian, grid: &[f64], opts: &CountOptions) -> Result<CountingCurve> {
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidDomain("mu grid must be sorted".into()));
    }
    let n = h.n() as f64;
    let values: Vec<f64> = if h.n() <= opts.dense_limit {
        let spec = spectrum(h);
        grid.iter()
            .map(|&mu| spec.count_leq(mu) as f64 / n)
            .collect()
    } else {
        let mut out = Vec::with_capacity(grid.len());
        for &mu in grid {
            out.push(inertia_count_guarded(h, mu, 1.0)? as f64 / n);
        }
        out
    };
    let meta = CurveMeta {
        d: h.torus().d(),
        k: h.torus().k(),
        potential: format!("vmax={}", h.potential().vmax()),
        seeds: vec![],
        shift: None,
    };
    CountingCurve::new(grid.to_vec(), values, CurveKind::N, meta)
}

/// Max integer deviation of the dual-spectrum identity
/// count_leq(H, mu) + count_lt(H~, 4d + Vmax - mu) = K^d over the grid.
/// Zero means the identity holds exactly. Requires K even.
pub fn dual_identity_check(h: &Hamiltonian, grid: &[f64], opts: &CountOptions) -> Result<usize> {
    let k = h.torus().k();
    if !k.is_multiple_of(2) {
        return Err(Error::Parity { k });
    }
    let dual = h.dual();
    let top = h.top_of_spectrum();
    let n = h.n() as i64;
    let mut worst = 0usize;
    if h.n() <= opts.dense_limit {
        let s = spectrum(h);
        let sd = spectrum(&dual);
        for &mu in grid {
            let lhs = s.count_leq(mu) as i64 + sd.count_lt(top - mu) as i64;
            worst = worst.max((lhs - n).unsigned_abs() as usize);
        }
    } else {
        for &mu in grid {
            let a = inertia_count_guarded(h, mu, 1.0)? as i64;
            let b = inertia_count_guarded(&dual, top - mu, -1.0)? as i64;
            worst = worst.max((a + b - n).unsigned_abs() as usize);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::make_torus;
    use crate::operator::assemble;
    use crate::potential::PotentialField;
    use crate::rng::SeedStream;

    fn free_k4() -> Hamiltonian {
        let t = make_torus(1, 4).unwrap();
        assemble(t, PotentialField::explicit(t, vec![0.0; 4]).unwrap()).unwrap()
    }

    fn random_h(d: usize, k: usize, vmax: f64, seed: u64) -> Hamiltonian {
        let t = make_torus(d, k).unwrap();
        let mut s = SeedStream::new(seed, 0);
        let v =
            PotentialField::explicit(t, (0..t.volume()).map(|_| s.range_f64(0.0, vmax)).collect())
                .unwrap();
        assemble(t, v).unwrap()
    }

    #[test]
    fn circulant_spectrum_counts() {
        // spectrum {0, 2, 2, 4}
        let h = free_k4();
        assert_eq!(count_leq(&h, 1.9).unwrap(), 1);
        assert_eq!(count_leq(&h, 2.0).unwrap(), 3);
        assert_eq!(count_lt(&h, 2.0).unwrap(), 1);
        assert_eq!(count_lt(&h, 0.0).unwrap(), 0);
        assert_eq!(count_leq(&h, h.top_of_spectrum()).unwrap(), 4);
    }

    #[test]
    fn leq_minus_lt_is_multiplicity() {
        let h = free_k4();
        assert_eq!(count_leq(&h, 2.0).unwrap() - count_lt(&h, 2.0).unwrap(), 2);
        assert_eq!(count_leq(&h, 1.0).unwrap() - count_lt(&h, 1.0).unwrap(), 0);
    }

    #[test]
    fn spectrum_enclosure_and_trace() {
        for seed in 0..5 {
            let h = random_h(2, 6, 7.0, seed);
            let s = spectrum(&h);
            let top = h.top_of_spectrum();
            for &ev in s.eigenvalues() {
                assert!(ev >= -1e-9 && ev <= top + 1e-9);
            }
            let trace: f64 = h.diagonal().iter().sum();
            let sum: f64 = s.eigenvalues().iter().sum();
            assert!((sum - trace).abs() <= 1e-8 * trace);
        }
    }

    #[test]
    fn ids_curve_on_circulant() {
        let h = free_k4();
        let c = ids_curve(&h, &[0.0, 2.0, 4.0], &CountOptions::default()).unwrap();
        assert_eq!(c.values, vec![0.25, 0.75, 1.0]);
        assert!(c.is_nondecreasing());
        let neg = ids_curve(&h, &[-1.0], &CountOptions::default()).unwrap();
        assert_eq!(neg.values, vec![0.0]);
    }

    #[test]
    fn inertia_matches_dense() {
        let mut s = SeedStream::new(99, 0);
        for seed in 0..20 {
            let (d, k) = if seed % 3 == 0 { (2, 5) } else { (1, 37) };
            let h = random_h(d, k, 6.0, 1000 + seed);
            for _ in 0..4 {
                let mu = s.range_f64(-0.5, h.top_of_spectrum() + 0.5);
                let dense = spectrum(&h).count_leq(mu);
                let inertia = inertia_count_below(&h, mu + tie_guard(mu)).unwrap();
                assert_eq!(dense, inertia, "d={d} k={k} mu={mu}");
            }
        }
    }

    #[test]
    fn weyl_monotonicity_probe() {
        let mut s = SeedStream::new(7, 0);
        let h = random_h(1, 40, 4.0, 5);
        let t = h.torus();
        let bump: Vec<f64> = (0..40).map(|_| s.range_f64(0.0, 1.0)).collect();
        let vals: Vec<f64> = h
            .potential()
            .values()
            .iter()
            .zip(&bump)
            .map(|(a, b)| a + b)
            .collect();
        let h2 = assemble(t, PotentialField::explicit(t, vals).unwrap()).unwrap();
        for mu in [0.1, 0.5, 1.0, 3.0, 6.0] {
            assert!(count_leq(&h2, mu).unwrap() <= count_leq(&h, mu).unwrap());
        }
    }

    #[test]
    fn dual_identity_exact_on_free_k4() {
        let h = free_k4();
        let grid: Vec<f64> = (0..50).map(|i| -0.3 + i as f64 * 0.1).collect();
        assert_eq!(
            dual_identity_check(&h, &grid, &CountOptions::default()).unwrap(),
            0
        );
    }

    #[test]
    fn dual_identity_and_multiset_random() {
        let h = random_h(1, 50, 5.0, 123);
        let top = h.top_of_spectrum();
        let grid: Vec<f64> = (0..100)
            .map(|i| 1e-3 + (top + 0.5) * i as f64 / 99.0)
            .collect();
        assert_eq!(
            dual_identity_check(&h, &grid, &CountOptions::default()).unwrap(),
            0
        );
        // eigenvalues of the dual are the mirrored multiset
        let ev = spectrum(&h);
        let evd = spectrum(&h.dual());
        let mut mirrored: Vec<f64> = ev.eigenvalues().iter().map(|&l| top - l).collect();
        mirrored.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in evd.eigenvalues().iter().zip(&mirrored) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn dual_identity_rejects_odd_k() {
        let h = random_h(1, 5, 2.0, 3);
        assert!(matches!(
            dual_identity_check(&h, &[1.0], &CountOptions::default()),
            Err(Error::Parity { .. })
        ));
    }

    #[test]
    fn mu_above_top_counts_everything() {
        let h = random_h(2, 4, 3.0, 8);
        assert_eq!(count_leq(&h, h.top_of_spectrum() + 1.0).unwrap(), 16);
    }
}
