//! The landscape equation Hu = 1: solvers, the effective potential 1/u,
//! the uncertainty-principle identity, and the scaling (doubling) audit.

use crate::error::{Error, Result};
use crate::lattice::Torus;
use crate::linalg::pcg;
use crate::operator::Hamiltonian;

/// Positive solution of Hu = 1 together with its reciprocal.
#[derive(Debug, Clone)]
pub struct LandscapeField {
    torus: Torus,
    u: Vec<f64>,
    effective: Vec<f64>,
    residual_norm: f64,
}

impl LandscapeField {
    /// Wrap explicit positive values (deserialization and crafted tests);
    /// the residual is unknown and recorded as NaN.
    pub fn from_values(torus: Torus, u: Vec<f64>) -> Result<Self> {
        if u.len() != torus.volume() {
            return Err(Error::Mismatch(format!(
                "landscape length {} does not match torus volume {}",
                u.len(),
                torus.volume()
            )));
        }
        for &x in &u {
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::InvalidDomain(format!(
                    "landscape value {x} must be positive"
                )));
            }
        }
        let effective = u.iter().map(|&x| 1.0 / x).collect();
        Ok(LandscapeField {
            torus,
            u,
            effective,
            residual_norm: f64::NAN,
        })
    }

    pub fn torus(&self) -> Torus {
        self.torus
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    /// Effective potential W = 1/u.
    pub fn effective(&self) -> &[f64] {
        &self.effective
    }

    /// Max-norm of Hu - 1 achieved by the solver.
    pub fn residual_norm(&self) -> f64 {
        self.residual_norm
    }

    pub fn min_u(&self) -> f64 {
        self.u.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max_u(&self) -> f64 {
        self.u.iter().cloned().fold(0.0, f64::max)
    }

    /// Same flat text format as potentials.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.torus.d(), self.torus.k());
        for v in &self.u {
            s.push_str(&format!("{v}\n"));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let (torus, values) = crate::potential::parse_field_text(text)?;
        Self::from_values(torus, values)
    }
}

/// Solver selection for the landscape equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    /// Direct sparse Cholesky below `direct_limit` sites, PCG above.
    Auto,
    Direct,
    ConjugateGradient,
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub method: SolveMethod,
    /// Size cutoff for the direct path under `Auto`.
    pub direct_limit: usize,
    /// Relative l2 residual target for the CG path.
    pub cg_rel_tol: f64,
    /// Max-norm residual the returned field must satisfy.
    pub residual_tol: f64,
    /// Accept constant potentials (degenerate, outside the theorems).
    pub allow_constant: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            method: SolveMethod::Auto,
            direct_limit: 20_000,
            cg_rel_tol: 1e-12,
            residual_tol: 1e-10,
            allow_constant: false,
        }
    }
}

/// Solve Hu = 1 with default options.
pub fn solve_landscape(h: &Hamiltonian) -> Result<LandscapeField> {
    solve_landscape_with(h, &SolveOptions::default())
}

pub fn solve_landscape_with(h: &Hamiltonian, opts: &SolveOptions) -> Result<LandscapeField> {
    if h.potential().is_zero() {
        return Err(Error::SingularOperator);
    }
    if h.potential().is_constant() && !opts.allow_constant {
        return Err(Error::ConstantPotential);
    }
    let n = h.n();
    let b = vec![1.0; n];
    let direct = match opts.method {
        SolveMethod::Direct => true,
        SolveMethod::ConjugateGradient => false,
        SolveMethod::Auto => n <= opts.direct_limit,
    };
    let mut u = if direct {
        let chol = h.shifted_skyline(0.0).cholesky()?;
        let mut x = chol.solve(&b);
        // one step of iterative refinement
        let hx = h.apply(&x)?;
        let mut corr: Vec<f64> = b.iter().zip(&hx).map(|(bi, yi)| bi - yi).collect();
        chol.solve_in_place(&mut corr);
        for i in 0..n {
            x[i] += corr[i];
        }
        x
    } else {
        let diag = h.diagonal();
        pcg(
            |v| h.apply(v).expect("dimensions fixed"),
            &diag,
            &b,
            opts.cg_rel_tol,
            10 * n,
        )?
    };
    // strictly positive by the maximum principle; tiny negative values can
    // only come from solver failure
    let residual = {
        let hu = h.apply(&u)?;
        hu.iter().map(|&y| (y - 1.0).abs()).fold(0.0, f64::max)
    };
    if residual > opts.residual_tol {
        return Err(Error::Numerical(format!(
            "landscape residual {residual:.3e} exceeds {:.1e}",
            opts.residual_tol
        )));
    }
    let vmax = h.potential().vmax_realized();
    let floor = 1.0 / vmax;
    let min_u = u.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_u <= 0.0 {
        return Err(Error::Numerical(format!(
            "landscape not positive (min {min_u:.3e})"
        )));
    }
    if min_u < floor - 1e-9 {
        return Err(Error::Numerical(format!(
            "landscape floor violated: min u = {min_u:.12e} < 1/Vmax = {floor:.12e}"
        )));
    }
    let effective: Vec<f64> = u.iter().map(|&x| 1.0 / x).collect();
    let torus = h.torus();
    u.shrink_to_fit();
    Ok(LandscapeField {
        torus,
        u,
        effective,
        residual_norm: residual,
    })
}

/// Residual of the landscape uncertainty identity
/// <f,Hf> = sum_{n,i} u_{n+e_i} u_n (grad_i (f/u))^2 + sum_n f_n^2 / u_n.
pub fn uncertainty_residual(h: &Hamiltonian, l: &LandscapeField, f: &[f64]) -> Result<f64> {
    let t = h.torus();
    if l.torus() != t {
        return Err(Error::Mismatch(
            "landscape lives on a different torus".into(),
        ));
    }
    if f.len() != t.volume() {
        return Err(Error::Mismatch("vector length mismatch".into()));
    }
    let qf = h.quadratic_form(f)?;
    let u = l.u();
    let mut grad_term = 0.0;
    let mut floor_term = 0.0;
    for n in t.sites() {
        for axis in 0..t.d() {
            let m = t.neighbor(n, axis, true);
            let diff = f[m] / u[m] - f[n] / u[n];
            grad_term += u[m] * u[n] * diff * diff;
        }
        floor_term += f[n] * f[n] / u[n];
    }
    Ok((qf - grad_term - floor_term).abs())
}

/// Box sums of `values` over every anchored window of per-axis length `w`
/// (periodic), indexed by anchor site.
fn torus_box_sums(t: Torus, values: &[f64], w: usize) -> Vec<f64> {
    let k = t.k();
    let mut acc = values.to_vec();
    for axis in 0..t.d() {
        let stride = t.stride(axis);
        let mut out = vec![0.0; acc.len()];
        for base in t.sites() {
            if !(base / stride).is_multiple_of(k) {
                continue; // not the start of a line along this axis
            }
            let at = |j: usize| base + (j % k) * stride;
            let mut window: f64 = (0..w).map(|j| acc[at(j)]).sum();
            for j in 0..k {
                out[at(j)] = window;
                window += acc[at(j + w)] - acc[at(j)];
            }
        }
        acc = out;
    }
    acc
}

/// Minimal admissible scaling constant at side `ell`: the maximum over all
/// K^d anchors of sum_{3Q} u^2 / (sum_Q u^2 + ell^(d+4)).
pub fn scaling_constant(l: &LandscapeField, ell: usize) -> Result<f64> {
    let t = l.torus();
    let k = t.k();
    if ell == 0 {
        return Err(Error::InvalidDomain("cube side must be positive".into()));
    }
    if 3 * ell > k {
        return Err(Error::ScaleTooLarge { ell, k });
    }
    let usq: Vec<f64> = l.u().iter().map(|&x| x * x).collect();
    let small = torus_box_sums(t, &usq, ell);
    let big = torus_box_sums(t, &usq, 3 * ell);
    let penalty = (ell as f64).powi(t.d() as i32 + 4);
    let mut best = 0.0f64;
    for anchor in t.sites() {
        // 3Q of the cube anchored here starts ell earlier on every axis
        let mut shifted = anchor;
        for axis in 0..t.d() {
            let stride = t.stride(axis);
            let coord = (shifted / stride) % k;
            let back = (coord + k - ell) % k;
            shifted = shifted - coord * stride + back * stride;
        }
        let ratio = big[shifted] / (small[anchor] + penalty);
        if ratio > best {
            best = ratio;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::make_torus;
    use crate::operator::assemble;
    use crate::potential::PotentialField;
    use crate::rng::SeedStream;

    fn random_h(d: usize, k: usize, vmax: f64, seed: u64) -> Hamiltonian {
        let t = make_torus(d, k).unwrap();
        let mut s = SeedStream::new(seed, 0);
        let v =
            PotentialField::explicit(t, (0..t.volume()).map(|_| s.range_f64(0.0, vmax)).collect())
                .unwrap();
        assemble(t, v).unwrap()
    }

    #[test]
    fn constant_potential_gives_constant_landscape() {
        let t = make_torus(2, 5).unwrap();
        let v = PotentialField::explicit(t, vec![4.0; 25]).unwrap();
        let h = assemble(t, v).unwrap();
        assert!(matches!(solve_landscape(&h), Err(Error::ConstantPotential)));
        let opts = SolveOptions {
            allow_constant: true,
            ..SolveOptions::default()
        };
        let l = solve_landscape_with(&h, &opts).unwrap();
        for &x in l.u() {
            assert!((x - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn small_exact_landscape() {
        let t = make_torus(1, 3).unwrap();
        let v = PotentialField::explicit(t, vec![1.0, 0.0, 0.0]).unwrap();
        let h = assemble(t, v).unwrap();
        let l = solve_landscape(&h).unwrap();
        let expect = [3.0, 4.0, 4.0];
        for (a, b) in l.u().iter().zip(expect) {
            assert!((a - b).abs() < 1e-10);
        }
        let hu = h.apply(l.u()).unwrap();
        for y in hu {
            assert!((y - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_potential_is_singular() {
        let t = make_torus(1, 5).unwrap();
        let v = PotentialField::explicit(t, vec![0.0; 5]).unwrap();
        let h = assemble(t, v).unwrap();
        assert!(matches!(solve_landscape(&h), Err(Error::SingularOperator)));
    }

    #[test]
    fn landscape_floor_holds() {
        for seed in 0..5 {
            let h = random_h(1, 60, 8.0, seed);
            let l = solve_landscape(&h).unwrap();
            assert!(l.min_u() >= 1.0 / h.potential().vmax_realized() - 1e-9);
            assert!(l.residual_norm() <= 1e-10);
        }
    }

    #[test]
    fn cg_and_direct_agree() {
        let h = random_h(2, 9, 6.0, 77);
        let direct = solve_landscape_with(
            &h,
            &SolveOptions {
                method: SolveMethod::Direct,
                ..SolveOptions::default()
            },
        )
        .unwrap();
        let cg = solve_landscape_with(
            &h,
            &SolveOptions {
                method: SolveMethod::ConjugateGradient,
                ..SolveOptions::default()
            },
        )
        .unwrap();
        let max_diff = direct
            .u()
            .iter()
            .zip(cg.u())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(max_diff < 1e-8, "max diff {max_diff:.3e}");
    }

    #[test]
    fn uncertainty_identity_small() {
        let h = random_h(1, 50, 5.0, 3);
        let l = solve_landscape(&h).unwrap();
        let mut s = SeedStream::new(31, 0);
        // f = 0 gives residual 0
        assert_eq!(uncertainty_residual(&h, &l, &vec![0.0; 50]).unwrap(), 0.0);
        // f = u collapses the gradient term
        let r = uncertainty_residual(&h, &l, l.u()).unwrap();
        let usum: f64 = l.u().iter().sum();
        assert!(r <= 1e-8 * (1.0 + usum));
        for _ in 0..20 {
            let f: Vec<f64> = (0..50).map(|_| s.range_f64(-1.0, 1.0)).collect();
            let qf = h.quadratic_form(&f).unwrap();
            let r = uncertainty_residual(&h, &l, &f).unwrap();
            assert!(r <= 1e-8 * (1.0 + qf));
        }
    }

    #[test]
    fn monotone_potential_lowers_landscape() {
        let t = make_torus(1, 30).unwrap();
        let mut s = SeedStream::new(8, 0);
        let base: Vec<f64> = (0..30).map(|_| s.range_f64(0.1, 2.0)).collect();
        let bumped: Vec<f64> = base.iter().map(|&v| v + s.range_f64(0.0, 1.0)).collect();
        let h1 = assemble(t, PotentialField::explicit(t, base).unwrap()).unwrap();
        let h2 = assemble(t, PotentialField::explicit(t, bumped).unwrap()).unwrap();
        let u1 = solve_landscape(&h1).unwrap();
        let u2 = solve_landscape(&h2).unwrap();
        for (a, b) in u2.u().iter().zip(u1.u()) {
            assert!(*a <= b + 1e-9);
        }
    }

    #[test]
    fn box_sums_match_direct_scan() {
        let t = make_torus(2, 7).unwrap();
        let mut s = SeedStream::new(5, 0);
        let vals: Vec<f64> = (0..49).map(|_| s.range_f64(0.0, 1.0)).collect();
        let sums = torus_box_sums(t, &vals, 2);
        for anchor in t.sites() {
            let c = t.coords(anchor);
            let mut direct = 0.0;
            for dx in 0..2 {
                for dy in 0..2 {
                    let coords = [(c[0] - 1 + dx) % 7 + 1, (c[1] - 1 + dy) % 7 + 1];
                    direct += vals[t.site_at(&coords)];
                }
            }
            assert!((sums[anchor] - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn scaling_constant_for_flat_field() {
        // u = 1: ratio is 3^d ell^d / (ell^d + ell^(d+4)) < 3^d at every ell.
        let t = make_torus(1, 30).unwrap();
        let l = LandscapeField::from_values(t, vec![1.0; 30]).unwrap();
        for ell in 1..=10 {
            let c = scaling_constant(&l, ell).unwrap();
            let e = ell as f64;
            let expect = 3.0 * e / (e + e.powi(5));
            assert!((c - expect).abs() < 1e-12);
            assert!(c < 3.0);
        }
        assert!(matches!(
            scaling_constant(&l, 11),
            Err(Error::ScaleTooLarge { .. })
        ));
    }

    #[test]
    fn scaling_constant_dominates_single_anchor() {
        let h = random_h(1, 24, 4.0, 12);
        let l = solve_landscape(&h).unwrap();
        let ell = 4;
        let c = scaling_constant(&l, ell).unwrap();
        // cube anchored at site 1 (flat 0): direct evaluation
        let u = l.u();
        let sum_q: f64 = (0..ell).map(|i| u[i] * u[i]).sum();
        let sum_3q: f64 = (0..3 * ell)
            .map(|i| {
                let idx = (24 + i as isize - ell as isize) as usize % 24;
                u[idx] * u[idx]
            })
            .sum();
        let ratio = sum_3q / (sum_q + (ell as f64).powi(5));
        assert!(c >= ratio - 1e-12);
    }
}
