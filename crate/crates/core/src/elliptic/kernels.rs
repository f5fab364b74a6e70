//! Dirichlet problems on Q(r; xi): the general solver, the discrete Poisson
//! kernel and Green's function keyed by the center, the integration-by-parts
//! residual, and Poisson-weighted surface averages.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::elliptic::cube::CubeProblem;
use crate::error::{Error, Result};
use crate::linalg::{CholeskyFactor, Skyline};

/// Memory caps for kernel construction, per dimension.
fn radius_cap(d: usize) -> usize {
    match d {
        1 => 4096,
        2 => 24,
        3 => 8,
        _ => 3,
    }
}

/// Interior Laplacian of Q(r) with zero Dirichlet boundary, in envelope form.
fn interior_laplacian(p: &CubeProblem) -> Skyline {
    let interior = p.interior();
    let n = interior.len();
    let mut int_index = vec![usize::MAX; p.sites()];
    for (i, &cube_idx) in interior.iter().enumerate() {
        int_index[cube_idx] = i;
    }
    let d = p.d() as f64;
    let mut entries = Vec::new();
    for (i, &cube_idx) in interior.iter().enumerate() {
        entries.push((i, i, 2.0 * d));
        for m in p.cube().neighbors_in(cube_idx) {
            let j = int_index[m];
            if j != usize::MAX && j < i {
                entries.push((i, j, -1.0));
            }
        }
    }
    Skyline::from_entries(n, entries)
}

/// Solve -Delta u = f on the interior of Q(r) with boundary data h on
/// dQ(r). `f` is indexed by interior sites, `h` by boundary sites, both in
/// their canonical enumeration order; the result covers the whole cube.
/// r = 0 degenerates to the single boundary site.
pub fn dirichlet_solve(p: &CubeProblem, f: &[f64], h: &[f64]) -> Result<Vec<f64>> {
    let interior = p.interior();
    let boundary = p.boundary();
    if f.len() != interior.len() || h.len() != boundary.len() {
        return Err(Error::Mismatch(format!(
            "expected {} interior and {} boundary values, got {} and {}",
            interior.len(),
            boundary.len(),
            f.len(),
            h.len()
        )));
    }
    if p.r() == 0 {
        return Ok(vec![h[0]]);
    }
    let mut out = vec![0.0; p.sites()];
    for (b, &cube_idx) in boundary.iter().enumerate() {
        out[cube_idx] = h[b];
    }
    let factor = interior_laplacian(p).cholesky()?;
    solve_with_boundary(p, &factor, f, &mut out)?;
    Ok(out)
}

/// Shared core: given boundary values already written into `out`, solve for
/// the interior with load `f` and one step of iterative refinement, then
/// verify the interior residual.
fn solve_with_boundary(
    p: &CubeProblem,
    factor: &CholeskyFactor,
    f: &[f64],
    out: &mut [f64],
) -> Result<()> {
    let interior = p.interior();
    let mut int_index = vec![usize::MAX; p.sites()];
    for (i, &cube_idx) in interior.iter().enumerate() {
        int_index[cube_idx] = i;
    }
    let rhs: Vec<f64> = interior
        .iter()
        .enumerate()
        .map(|(i, &cube_idx)| {
            let boundary_feed: f64 = p
                .cube()
                .neighbors_in(cube_idx)
                .into_iter()
                .filter(|&m| int_index[m] == usize::MAX)
                .map(|m| out[m])
                .sum();
            f[i] + boundary_feed
        })
        .collect();
    let mut x = factor.solve(&rhs);
    // iterative refinement against the interior operator
    let apply = |y: &[f64]| -> Vec<f64> {
        interior
            .iter()
            .enumerate()
            .map(|(i, &cube_idx)| {
                let mut s = 2.0 * p.d() as f64 * y[i];
                for m in p.cube().neighbors_in(cube_idx) {
                    let j = int_index[m];
                    if j != usize::MAX {
                        s -= y[j];
                    }
                }
                s
            })
            .collect()
    };
    let ax = apply(&x);
    let mut corr: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
    factor.solve_in_place(&mut corr);
    for i in 0..x.len() {
        x[i] += corr[i];
    }
    for (i, &cube_idx) in interior.iter().enumerate() {
        out[cube_idx] = x[i];
    }
    // residual check on the interior
    let mut worst = 0.0f64;
    for (i, &cube_idx) in interior.iter().enumerate() {
        let res = (p.cube().neg_laplacian_at(out, cube_idx) - f[i]).abs();
        if res > worst {
            worst = res;
        }
    }
    if worst > 1e-11 * (1.0 + out.iter().fold(0.0f64, |m, &v| m.max(v.abs()))) {
        return Err(Error::Numerical(format!(
            "Dirichlet residual {worst:.3e} too large"
        )));
    }
    Ok(())
}

/// Solution kernels of the Dirichlet problem on Q(r; xi), pole at the
/// center: the Poisson rows P_rho(xi, .) for every radius rho <= r, the
/// center Green row G_r(xi, .), the shell weights p_n, and the interior
/// factorization for arbitrary Green columns.
pub struct DirichletKernels {
    d: usize,
    r: usize,
    /// poisson[rho - 1] lists (cube index within Q(r), P_rho(xi, m)).
    poisson: Vec<Vec<(usize, f64)>>,
    /// G_r(xi, m) per interior enumeration index of Q(r).
    green_center: Vec<f64>,
    /// p_n = |dQ(rho_n)| P_rho(xi, n) per cube index of Q(r); p_xi = 1.
    weights: Vec<f64>,
    factor: CholeskyFactor,
}

/// Build the kernels at (d, r); guarded by per-dimension radius caps.
pub fn kernels(p: &CubeProblem) -> Result<DirichletKernels> {
    let (d, r) = (p.d(), p.r());
    if r < 1 {
        return Err(Error::DegenerateCube("kernels need r >= 1".into()));
    }
    if r > radius_cap(d) {
        return Err(Error::MemoryGuard(format!(
            "radius {r} exceeds cap {} in d = {d}",
            radius_cap(d)
        )));
    }
    let mut poisson: Vec<Vec<(usize, f64)>> = Vec::with_capacity(r);
    let mut weights = vec![0.0; p.sites()];
    weights[p.center_idx()] = 1.0;
    let mut outer_factor = None;
    let mut outer_green = None;
    for rho in 1..=r {
        let sub = CubeProblem::new(d, rho)?;
        let factor = interior_laplacian(&sub).cholesky()?;
        // center Green row on Q(rho): one solve with a unit load at the pole
        let interior = sub.interior();
        let mut int_index = vec![usize::MAX; sub.sites()];
        for (i, &c) in interior.iter().enumerate() {
            int_index[c] = i;
        }
        let mut e = vec![0.0; interior.len()];
        e[int_index[sub.center_idx()]] = 1.0;
        let green = factor.solve(&e);
        // P_rho(xi, m) = sum of G_rho(xi, n') over interior neighbors n' of m
        let mut row = Vec::new();
        for m in sub.boundary() {
            let mass: f64 = sub
                .cube()
                .neighbors_in(m)
                .into_iter()
                .filter(|&n| int_index[n] != usize::MAX)
                .map(|n| green[int_index[n]])
                .sum();
            // map the sub-cube site into Q(r) coordinates
            let local = sub.cube().coords(m);
            let shifted: Vec<usize> = local.iter().map(|&c| c + r - rho).collect();
            row.push((p.cube().idx(&shifted), mass));
        }
        let shell = sub.boundary().len() as f64;
        for &(cube_idx, mass) in &row {
            weights[cube_idx] = shell * mass;
        }
        if rho == r {
            outer_factor = Some(factor);
            outer_green = Some(green);
        }
        poisson.push(row);
    }
    Ok(DirichletKernels {
        d,
        r,
        poisson,
        green_center: outer_green.unwrap(),
        weights,
        factor: outer_factor.unwrap(),
    })
}

impl DirichletKernels {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// P_rho(xi, .) as (cube index in Q(r), value) pairs, rho in 1..=r.
    pub fn poisson_row(&self, rho: usize) -> &[(usize, f64)] {
        &self.poisson[rho - 1]
    }

    /// G_r(xi, m) per interior enumeration index.
    pub fn green_center(&self) -> &[f64] {
        &self.green_center
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Sum of the outermost Poisson row; equals 1 up to rounding.
    pub fn poisson_mass(&self, rho: usize) -> f64 {
        self.poisson_row(rho).iter().map(|&(_, v)| v).sum()
    }

    /// Green column G_r(., m) for an interior enumeration index, via the
    /// stored factorization.
    pub fn green_column(&self, p: &CubeProblem, interior_idx: usize) -> Vec<f64> {
        let n = p.interior().len();
        let mut e = vec![0.0; n];
        e[interior_idx] = 1.0;
        self.factor.solve(&e)
    }

    /// The Poisson row at the full radius recomputed the slow way, one
    /// Dirichlet solve per boundary delta. Agreement with `poisson_row(r)`
    /// cross-validates the Green-identity path.
    pub fn poisson_row_by_solves(&self, p: &CubeProblem) -> Result<Vec<(usize, f64)>> {
        let boundary = p.boundary();
        let interior = p.interior();
        let center = p.center_idx();
        let zero = vec![0.0; interior.len()];
        let mut out = Vec::with_capacity(boundary.len());
        for (b, &cube_idx) in boundary.iter().enumerate() {
            let mut h = vec![0.0; boundary.len()];
            h[b] = 1.0;
            let u = dirichlet_solve(p, &zero, &h)?;
            out.push((cube_idx, u[center]));
        }
        Ok(out)
    }
}

/// Kernels memoized by (d, r) behind a mutex; concurrent readers share the
/// Arc, writes are serialized.
#[derive(Default)]
pub struct KernelCache {
    map: Mutex<HashMap<(usize, usize), Arc<DirichletKernels>>>,
}

impl KernelCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, d: usize, r: usize) -> Result<Arc<DirichletKernels>> {
        if let Some(k) = self.map.lock().unwrap().get(&(d, r)) {
            return Ok(Arc::clone(k));
        }
        let p = CubeProblem::new(d, r)?;
        let built = Arc::new(kernels(&p)?);
        let mut guard = self.map.lock().unwrap();
        let entry = guard.entry((d, r)).or_insert_with(|| Arc::clone(&built));
        Ok(Arc::clone(entry))
    }
}

/// Residual of the integration-by-parts identity
/// u_xi = sum_{dQ(r)} P_r(xi, m) u_m - sum_{Q(r-1)} G_r(xi, m) (Delta u)_m
/// for a field on the full cube.
pub fn ibp_residual(p: &CubeProblem, k: &DirichletKernels, u: &[f64]) -> Result<f64> {
    if u.len() != p.sites() {
        return Err(Error::Mismatch("field length does not match cube".into()));
    }
    if k.d() != p.d() || k.r() != p.r() {
        return Err(Error::Mismatch("kernels built for a different cube".into()));
    }
    let surface: f64 = k
        .poisson_row(p.r())
        .iter()
        .map(|&(idx, w)| w * u[idx])
        .sum();
    let mut volume = 0.0;
    for (i, &cube_idx) in p.interior().iter().enumerate() {
        let lap = -p.cube().neg_laplacian_at(u, cube_idx);
        volume += k.green_center()[i] * lap;
    }
    Ok((u[p.center_idx()] - surface + volume).abs())
}

/// Poisson-weighted surface averages a_rho and ball averages A_rho of a
/// field on Q(r; xi), with the margins of the bound a_rho >= u_xi - rho^2.
pub struct SurfaceAverages {
    /// a_0 = u_xi, then a_rho for rho = 1..=r.
    pub a: Vec<f64>,
    /// A_rho = |Q(rho)|^-1 sum_{Q(rho)} p_n u_n, same indexing.
    pub big_a: Vec<f64>,
    /// a_rho - u_xi + rho^2 for rho = 1..=r.
    pub margins: Vec<f64>,
}

pub fn surface_averages(
    p: &CubeProblem,
    k: &DirichletKernels,
    u: &[f64],
) -> Result<SurfaceAverages> {
    if u.len() != p.sites() {
        return Err(Error::Mismatch("field length does not match cube".into()));
    }
    let center = u[p.center_idx()];
    let mut a = vec![center];
    for rho in 1..=p.r() {
        a.push(k.poisson_row(rho).iter().map(|&(idx, w)| w * u[idx]).sum());
    }
    let mut big_a = Vec::with_capacity(p.r() + 1);
    let mut acc = center; // p_xi = 1
    big_a.push(acc);
    for rho in 1..=p.r() {
        acc += p.shell_size(rho) as f64 * a[rho];
        big_a.push(acc / (2 * rho + 1).pow(p.d() as u32) as f64);
    }
    let margins = (1..=p.r())
        .map(|rho| a[rho] - center + (rho * rho) as f64)
        .collect();
    Ok(SurfaceAverages { a, big_a, margins })
}
