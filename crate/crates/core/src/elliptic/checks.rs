//! Estimate checks: maximum principle, Poincare, sub-mean value,
//! Moser-Harnack extremal ratios, and the Harnack chain bound with its
//! explicit constant.

use crate::elliptic::cube::{CubeProblem, ZBox};
use crate::error::{Error, Result};

/// Per-site slack granted when verifying sub/super-solution preconditions;
/// generators produce their inputs through solves.
fn precondition_tol(f: &[f64]) -> f64 {
    1e-11 * (1.0 + f.iter().fold(0.0f64, |m, &v| m.max(v.abs())))
}

pub struct MaxPrincipleReport {
    pub pass: bool,
    pub interior_min: f64,
    pub flat_boundary_min: f64,
    /// Interior site undercutting the flat-boundary minimum, if any.
    pub witness: Option<usize>,
}

/// Minimum comparison for sub-solutions of -Delta f + v f >= 0 on a box:
/// the interior minimum may not undercut the flat-boundary minimum.
/// The sub-solution property is verified first (precondition error naming
/// the first violating site otherwise).
pub fn max_principle_check(b: &ZBox, v: &[f64], f: &[f64]) -> Result<MaxPrincipleReport> {
    if v.len() != b.volume() || f.len() != b.volume() {
        return Err(Error::Mismatch("field lengths do not match box".into()));
    }
    if let Some(site) = v.iter().position(|&x| x < 0.0) {
        return Err(Error::InvalidPotential(format!(
            "negative potential at site {site}"
        )));
    }
    let tol = precondition_tol(f);
    let interior = b.interior();
    for &n in &interior {
        let val = b.neg_laplacian_at(f, n) + v[n] * f[n];
        if val < -tol {
            return Err(Error::Precondition {
                site: n,
                what: format!("not a sub-solution: (-Delta f + v f)_n = {val:.3e}"),
            });
        }
    }
    let interior_min = interior.iter().map(|&n| f[n]).fold(f64::INFINITY, f64::min);
    let flat_boundary_min = b
        .flat_boundary()
        .iter()
        .map(|&n| f[n])
        .fold(f64::INFINITY, f64::min);
    let pass = interior_min >= flat_boundary_min - 1e-12;
    let witness = if pass {
        None
    } else {
        interior
            .iter()
            .copied()
            .find(|&n| f[n] < flat_boundary_min - 1e-12)
    };
    Ok(MaxPrincipleReport {
        pass,
        interior_min,
        flat_boundary_min,
        witness,
    })
}

pub struct PoincareReport {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Discrete Poincare inequality on a box:
/// sum (f - mean)^2 <= (d/2) l_max^2 sum |grad f|^2, gradients over edges
/// interior to the box.
pub fn poincare_check(b: &ZBox, f: &[f64]) -> Result<PoincareReport> {
    if f.len() != b.volume() {
        return Err(Error::Mismatch("field length does not match box".into()));
    }
    let n = b.volume() as f64;
    let mean = f.iter().sum::<f64>() / n;
    let lhs: f64 = f.iter().map(|&x| (x - mean) * (x - mean)).sum();
    let mut grad = 0.0;
    for idx in 0..b.volume() {
        let c = b.coords(idx);
        for axis in 0..b.d() {
            if c[axis] + 1 < b.lens()[axis] {
                let mut m = c.clone();
                m[axis] += 1;
                let diff = f[b.idx(&m)] - f[idx];
                grad += diff * diff;
            }
        }
    }
    let lmax = b.max_len() as f64;
    let rhs = 0.5 * b.d() as f64 * lmax * lmax * grad;
    let pass = lhs <= rhs + 1e-12 * (1.0 + rhs);
    Ok(PoincareReport { lhs, rhs, pass })
}

pub struct SubmeanReport {
    pub center: f64,
    /// f_xi * r^(d-1) / sum_{dQ(r)} f, when the surface sum is positive.
    pub surface_ratio: Option<f64>,
    /// f_xi * r^d / sum_{Q(r)} f, when the ball sum is positive.
    pub volume_ratio: Option<f64>,
}

/// Sub-mean value data for a nonnegative subharmonic field, meaning
/// -(Delta f)_n <= 0 on the interior. The dimensional constant of the
/// bound is unspecified, so the extremal ratios are reported, not asserted.
pub fn submean_check(p: &CubeProblem, f: &[f64]) -> Result<SubmeanReport> {
    if f.len() != p.sites() {
        return Err(Error::Mismatch("field length does not match cube".into()));
    }
    let tol = precondition_tol(f);
    if let Some((site, &bad)) = f.iter().enumerate().find(|&(_, &x)| x < -tol) {
        return Err(Error::Precondition {
            site,
            what: format!("not nonnegative: f = {bad:.3e}"),
        });
    }
    for &n in &p.interior() {
        let val = p.cube().neg_laplacian_at(f, n);
        if val > tol {
            return Err(Error::Precondition {
                site: n,
                what: format!("not subharmonic: -(Delta f)_n = {val:.3e} > 0"),
            });
        }
    }
    let r = p.r() as f64;
    let d = p.d() as i32;
    let center = f[p.center_idx()];
    let surface_sum: f64 = p.boundary().iter().map(|&n| f[n]).sum();
    let ball_sum: f64 = f.iter().sum();
    let surface_ratio = (surface_sum > 0.0).then(|| center * r.powi(d - 1) / surface_sum);
    let volume_ratio = (ball_sum > 0.0).then(|| center * r.powi(d) / ball_sum);
    Ok(SubmeanReport {
        center,
        surface_ratio,
        volume_ratio,
    })
}

pub struct MoserHarnackReport {
    pub ell: usize,
    pub sum_3omega: f64,
    pub sup_omega_sq: f64,
    /// (sum_{3 Omega} g^2 / l^d + l^4) / sup_Omega g^2; the battery's
    /// empirical c_H is the minimum of this over instances.
    pub ratio: f64,
}

/// Extremal ratio of the Moser-Harnack bound
/// sum_{3 Omega} g^2 >= l^d (c_H sup_Omega g^2 - l^4)
/// for a nonnegative g with -Delta g <= 1 on the tripled cube. `g` lives on
/// a box of side 3 ell; Omega is its middle third.
pub fn moser_harnack_ratio(d: usize, ell: usize, g: &[f64]) -> Result<MoserHarnackReport> {
    if ell == 0 {
        return Err(Error::InvalidDomain("ell must be positive".into()));
    }
    let b = ZBox::new(vec![3 * ell; d])?;
    if g.len() != b.volume() {
        return Err(Error::Mismatch(format!(
            "expected {} values on the tripled cube, got {}",
            b.volume(),
            g.len()
        )));
    }
    let tol = precondition_tol(g);
    if let Some((site, &bad)) = g.iter().enumerate().find(|&(_, &x)| x < -tol) {
        return Err(Error::Precondition {
            site,
            what: format!("not nonnegative: g = {bad:.3e}"),
        });
    }
    for idx in 0..b.volume() {
        if b.is_interior(idx) {
            let val = b.neg_laplacian_at(g, idx);
            if val > 1.0 + tol {
                return Err(Error::Precondition {
                    site: idx,
                    what: format!("-(Delta g)_n = {val:.3e} exceeds 1"),
                });
            }
        }
    }
    let sum_3omega: f64 = g.iter().map(|&x| x * x).sum();
    let mut sup_omega_sq = 0.0f64;
    for idx in 0..b.volume() {
        let c = b.coords(idx);
        if c.iter().all(|&x| (ell..2 * ell).contains(&x)) {
            sup_omega_sq = sup_omega_sq.max(g[idx] * g[idx]);
        }
    }
    if sup_omega_sq == 0.0 {
        return Err(Error::Domain("g vanishes on the middle third".into()));
    }
    let elld = (ell as f64).powi(d as i32);
    let ratio = (sum_3omega / elld + (ell as f64).powi(4)) / sup_omega_sq;
    Ok(MoserHarnackReport {
        ell,
        sum_3omega,
        sup_omega_sq,
        ratio,
    })
}

pub struct HarnackReport {
    pub sup: f64,
    pub inf: f64,
    /// Interior side length used in the chain bound.
    pub ell: usize,
    pub vmax: f64,
    pub pass: bool,
}

/// Harnack inequality with the explicit chain constant: a nonnegative
/// super-solution of -Delta f + v f >= 0 on Q(r) satisfies
/// sup f <= (2d + vmax)^(d ell) inf f over the interior box (side
/// ell = 2r - 1). This is a hard bound; any failure is a bug.
pub fn harnack_check(p: &CubeProblem, v: &[f64], f: &[f64]) -> Result<HarnackReport> {
    if v.len() != p.sites() || f.len() != p.sites() {
        return Err(Error::Mismatch("field lengths do not match cube".into()));
    }
    if p.r() < 1 {
        return Err(Error::DegenerateCube("harnack needs r >= 1".into()));
    }
    let tol = precondition_tol(f);
    if let Some((site, &bad)) = f.iter().enumerate().find(|&(_, &x)| x < -tol) {
        return Err(Error::Precondition {
            site,
            what: format!("not nonnegative: f = {bad:.3e}"),
        });
    }
    let interior = p.interior();
    for &n in &interior {
        let val = p.cube().neg_laplacian_at(f, n) + v[n] * f[n];
        if val < -tol {
            return Err(Error::Precondition {
                site: n,
                what: format!("not a super-solution: value {val:.3e}"),
            });
        }
    }
    let vmax = v.iter().cloned().fold(0.0, f64::max);
    let sup = interior.iter().map(|&n| f[n]).fold(0.0f64, f64::max);
    let inf = interior.iter().map(|&n| f[n]).fold(f64::INFINITY, f64::min);
    let ell = 2 * p.r() - 1;
    let pass = if inf <= 0.0 {
        sup <= 0.0
    } else {
        // compare in logs; the constant overflows f64 readily
        sup.ln()
            <= (p.d() * ell) as f64 * (2.0 * p.d() as f64 + vmax).ln() + inf.ln() + 1e-9_f64.ln_1p()
    };
    Ok(HarnackReport {
        sup,
        inf,
        ell,
        vmax,
        pass,
    })
}
