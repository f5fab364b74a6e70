//! The landscape box-counting function N_u, the Landscape-Law inequality
//! checks, practical two-parameter scaling fits, and Lifschitz-tail slopes.

use crate::curve::{fmt17, CountingCurve, CurveKind, CurveMeta};
use crate::error::{Error, Result};
use crate::landscape::LandscapeField;
use crate::lattice::partition;

/// Partition side s(mu) = ceil(mu^(-1/2)), with an exactness guard: when
/// mu^(-1/2) sits within 1e-9 of an integer, that integer wins.
pub fn s_of_mu(mu: f64) -> Result<usize> {
    if !mu.is_finite() || mu <= 0.0 {
        return Err(Error::Domain(format!("s(mu) needs mu > 0, got {mu}")));
    }
    let x = 1.0 / mu.sqrt();
    let nearest = x.round();
    let s = if (x - nearest).abs() <= 1e-9 && nearest >= 1.0 {
        nearest
    } else {
        x.ceil()
    };
    Ok((s as usize).max(1))
}

/// N_u(mu): the fraction (per unit volume) of boxes of the unshifted
/// partition P(s(mu)) on which min 1/u does not exceed mu.
pub fn box_counting(l: &LandscapeField, mu: f64) -> Result<f64> {
    box_counting_shifted(l, mu, None)
}

/// N_u(mu) over the partition translated by `shift`.
pub fn box_counting_shifted(l: &LandscapeField, mu: f64, shift: Option<&[usize]>) -> Result<f64> {
    let t = l.torus();
    let s = s_of_mu(mu)?;
    if s > t.k() {
        let kk = t.k() as f64;
        return Err(Error::MuTooSmall {
            mu,
            min_mu: 1.0 / (kk * kk),
        });
    }
    let shift_reduced: Option<Vec<usize>> = shift.map(|a| a.iter().map(|&c| c % s).collect());
    let p = partition(t, s, shift_reduced.as_deref())?;
    let w = l.effective();
    let mut qualifying = 0usize;
    for cube in p.boxes() {
        let mut min = f64::INFINITY;
        cube.for_each_site(|n| {
            if w[n] < min {
                min = w[n];
            }
        });
        if min <= mu {
            qualifying += 1;
        }
    }
    Ok(qualifying as f64 / t.volume() as f64)
}

/// N_u over a sorted positive grid with the default (unshifted) partition.
pub fn nu_curve(l: &LandscapeField, grid: &[f64]) -> Result<CountingCurve> {
    nu_curve_shifted(l, grid, None)
}

pub fn nu_curve_shifted(
    l: &LandscapeField,
    grid: &[f64],
    shift: Option<&[usize]>,
) -> Result<CountingCurve> {
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidDomain("mu grid must be sorted".into()));
    }
    let mut values = Vec::with_capacity(grid.len());
    for &mu in grid {
        values.push(box_counting_shifted(l, mu, shift)?);
    }
    let meta = CurveMeta {
        d: l.torus().d(),
        k: l.torus().k(),
        potential: String::new(),
        seeds: vec![],
        shift: shift.map(|a| a.to_vec()),
    };
    CountingCurve::new(grid.to_vec(), values, CurveKind::Nu, meta)
}

/// One evaluated inequality point.
#[derive(Debug, Clone, Copy)]
pub struct LawRow {
    pub mu: f64,
    pub lhs: f64,
    pub rhs: f64,
}

impl LawRow {
    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }
}

/// Outcome of a Landscape-Law inequality check over a grid.
#[derive(Debug, Clone)]
pub struct LawReport {
    pub rows: Vec<LawRow>,
    /// Rows where the checked inequality failed.
    pub violations: Vec<LawRow>,
    /// Grid points skipped because a scaled argument left the box-counting
    /// domain.
    pub truncated: Vec<f64>,
    /// Practical-law fit (c1, c2, sup distance) when one was computed.
    pub fitted: Option<(f64, f64, f64)>,
}

impl LawReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// CSV rows `mu,lhs,rhs,margin` followed by a summary line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("mu,lhs,rhs,margin\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                fmt17(r.mu),
                fmt17(r.lhs),
                fmt17(r.rhs),
                fmt17(r.margin())
            ));
        }
        let fitted = match self.fitted {
            Some((c1, c2, dist)) => format!(
                " fit: c1={} c2={} sup_distance={}",
                fmt17(c1),
                fmt17(c2),
                fmt17(dist)
            ),
            None => String::new(),
        };
        out.push_str(&format!(
            "# summary: rows={} violations={} truncated={}{}\n",
            self.rows.len(),
            self.violations.len(),
            self.truncated.len(),
            fitted
        ));
        out
    }
}

/// Upper Landscape Law: N(mu) <= N_u(4 d mu) pointwise, with fresh box
/// counts at the scaled argument.
pub fn upper_bound_check(n: &CountingCurve, l: &LandscapeField) -> Result<LawReport> {
    let d = l.torus().d() as f64;
    let mut rows = Vec::with_capacity(n.len());
    let mut violations = Vec::new();
    let mut truncated = Vec::new();
    for (&mu, &lhs) in n.grid.iter().zip(&n.values) {
        match box_counting(l, 4.0 * d * mu) {
            Ok(rhs) => {
                let row = LawRow { mu, lhs, rhs };
                if lhs > rhs {
                    violations.push(row);
                }
                rows.push(row);
            }
            Err(Error::MuTooSmall { .. }) => truncated.push(mu),
            Err(e) => return Err(e),
        }
    }
    Ok(LawReport {
        rows,
        violations,
        truncated,
        fitted: None,
    })
}

/// Trial constants for the lower-bound exploration. The theory only
/// guarantees such constants exist; concrete values are caller inputs,
/// never defaults.
#[derive(Debug, Clone, Copy)]
pub struct LowerConstants {
    pub c0: f64,
    pub big_c0: f64,
    pub c1: f64,
}

/// Lower-bound exploration:
/// N(mu) >= c0 alpha^d N_u(c1 alpha^(d+2) mu) - C0 N_u(c1 alpha^(d+4) mu).
/// Reports per-point margins; inadmissible scaled arguments truncate the
/// grid and are recorded.
pub fn lower_bound_check(
    n: &CountingCurve,
    l: &LandscapeField,
    alpha: f64,
    constants: LowerConstants,
) -> Result<LawReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::ParameterRange(format!(
            "alpha = {alpha} outside (0, 1)"
        )));
    }
    let d = l.torus().d() as f64;
    let scale_mid = constants.c1 * alpha.powf(d + 2.0);
    let scale_far = constants.c1 * alpha.powf(d + 4.0);
    let mut rows = Vec::new();
    let mut violations = Vec::new();
    let mut truncated = Vec::new();
    for (&mu, &n_value) in n.grid.iter().zip(&n.values) {
        let mid = box_counting(l, scale_mid * mu);
        let far = box_counting(l, scale_far * mu);
        match (mid, far) {
            (Ok(m), Ok(f)) => {
                // N(mu) >= combination: store the combination as lhs so the
                // shared margin convention (rhs - lhs >= 0) means pass
                let combination = constants.c0 * alpha.powf(d) * m - constants.big_c0 * f;
                let row = LawRow {
                    mu,
                    lhs: combination,
                    rhs: n_value,
                };
                if n_value < combination {
                    violations.push(row);
                }
                rows.push(row);
            }
            (Err(Error::MuTooSmall { .. }), _) | (_, Err(Error::MuTooSmall { .. })) => {
                truncated.push(mu)
            }
            (Err(e), _) | (_, Err(e)) => return Err(e),
        }
    }
    Ok(LawReport {
        rows,
        violations,
        truncated,
        fitted: None,
    })
}

/// Fit the practical law N(mu) ~ c1 N_u(c2 mu): grid search over c2 in
/// logspace [0.1, 10] (60 points), best c1 by least sup distance for each
/// c2. Returns (c1, c2, achieved sup distance).
pub fn fit_scaling(n: &CountingCurve, l: &LandscapeField) -> Result<(f64, f64, f64)> {
    fit_scaling_with(&n.grid, &n.values, |mu| box_counting(l, mu).ok())
}

/// Core of the fit against an arbitrary evaluator; `eval` returns None where
/// a scaled argument is out of domain (such points are skipped).
pub fn fit_scaling_with(
    grid: &[f64],
    n_values: &[f64],
    eval: impl Fn(f64) -> Option<f64>,
) -> Result<(f64, f64, f64)> {
    if grid.is_empty() || n_values.iter().all(|&v| v == 0.0) {
        return Err(Error::Fit(
            "degenerate N curve (empty or identically zero)".into(),
        ));
    }
    let c2_grid = crate::curve::log_grid(0.1, 10.0, 60)?;
    let mut best: Option<(f64, f64, f64)> = None;
    for &c2 in &c2_grid {
        let mut pairs = Vec::with_capacity(grid.len());
        for (&mu, &nv) in grid.iter().zip(n_values) {
            if let Some(nu) = eval(c2 * mu) {
                pairs.push((nv, nu));
            }
        }
        if pairs.len() < 2 || pairs.iter().all(|&(_, nu)| nu == 0.0) {
            continue;
        }
        let (c1, dist) = best_scale_sup(&pairs);
        if best.is_none_or(|(_, _, d)| dist < d) {
            best = Some((c1, c2, dist));
        }
    }
    best.ok_or_else(|| Error::Fit("no admissible c2 in the search grid".into()))
}

/// Minimize max_i |a_i - c b_i| over c >= 0 (convex piecewise-linear in c).
fn best_scale_sup(pairs: &[(f64, f64)]) -> (f64, f64) {
    let objective = |c: f64| {
        pairs
            .iter()
            .map(|&(a, b)| (a - c * b).abs())
            .fold(0.0, f64::max)
    };
    let mut lo = 0.0f64;
    let mut hi = pairs
        .iter()
        .filter(|&&(_, b)| b > 0.0)
        .map(|&(a, b)| a / b)
        .fold(1.0, f64::max)
        * 2.0;
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if objective(m1) <= objective(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let c = 0.5 * (lo + hi);
    (c, objective(c))
}

/// `lifschitz_fit` after dropping window points whose value leaves (0, 1)
/// (empirically zero or saturated means); the dropped mu values are
/// returned alongside the slope.
pub fn lifschitz_fit_excluding(
    mean_curve: &CountingCurve,
    window: (f64, f64),
) -> Result<(f64, Vec<f64>)> {
    let (lo, hi) = window;
    let mut grid = Vec::new();
    let mut values = Vec::new();
    let mut excluded = Vec::new();
    for (&mu, &v) in mean_curve.grid.iter().zip(&mean_curve.values) {
        if mu < lo || mu > hi {
            continue;
        }
        if v > 0.0 && v < 1.0 {
            grid.push(mu);
            values.push(v);
        } else {
            excluded.push(mu);
        }
    }
    let inner = CountingCurve::new(grid, values, mean_curve.kind, mean_curve.meta.clone())?;
    let slope = lifschitz_fit(&inner, window)?;
    Ok((slope, excluded))
}

/// Least-squares slope of log(-log EN) against log mu over the grid points
/// falling in `window`. Requires every used value to lie strictly in (0, 1).
pub fn lifschitz_fit(mean_curve: &CountingCurve, window: (f64, f64)) -> Result<f64> {
    let (lo, hi) = window;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Window(format!("bad window [{lo}, {hi}]")));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&mu, &v) in mean_curve.grid.iter().zip(&mean_curve.values) {
        if mu < lo || mu > hi {
            continue;
        }
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::Window(format!(
                "EN = {v} at mu = {mu} outside (0, 1)"
            )));
        }
        xs.push(mu.ln());
        ys.push((-v.ln()).ln());
    }
    if xs.len() < 2 {
        return Err(Error::Window(format!(
            "window [{lo}, {hi}] covers {} grid points; need at least 2",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|&x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(&x, &y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::CurveMeta;
    use crate::lattice::make_torus;
    use crate::rng::SeedStream;

    #[test]
    fn partition_side_examples() {
        assert_eq!(s_of_mu(1.0 / 9.0).unwrap(), 3);
        assert_eq!(s_of_mu(1.0).unwrap(), 1);
        assert_eq!(s_of_mu(1.5).unwrap(), 1);
        assert_eq!(s_of_mu(0.5).unwrap(), 2);
        assert_eq!(s_of_mu(1.0 / 36.0).unwrap(), 6);
        assert!(s_of_mu(0.0).is_err());
        assert!(s_of_mu(-1.0).is_err());
    }

    #[test]
    fn figure_two_configuration() {
        // d = 1, K = 11, P(3) = {Q1..Q4}; u crafted so that min(1/u) falls
        // below mu = 1/9 exactly on Q2, Q3, Q4.
        let t = make_torus(1, 11).unwrap();
        let u = vec![2.0, 3.0, 4.0, 6.0, 10.0, 7.0, 5.0, 9.5, 6.0, 12.0, 8.0];
        let l = LandscapeField::from_values(t, u).unwrap();
        let v = box_counting(&l, 1.0 / 9.0).unwrap();
        assert!((v - 3.0 / 11.0).abs() < 1e-15);
    }

    #[test]
    fn constant_landscape_step_curve() {
        // u = 1/c: N_u(mu) is 1 for mu >= c and 0 below.
        let t = make_torus(1, 12).unwrap();
        let c = 2.0;
        let l = LandscapeField::from_values(t, vec![1.0 / c; 12]).unwrap();
        assert_eq!(box_counting(&l, c).unwrap(), 1.0);
        assert_eq!(box_counting(&l, c * 1.5).unwrap(), 1.0);
        assert_eq!(box_counting(&l, c * 0.9).unwrap(), 0.0);
    }

    #[test]
    fn every_box_qualifies_above_vmax() {
        // min over a box of 1/u never exceeds Vmax, so N_u saturates at 1
        // for mu >= max(1, Vmax).
        use crate::lattice::make_torus;
        use crate::operator::assemble;
        use crate::potential::PotentialField;
        let t = make_torus(1, 30).unwrap();
        let mut s = SeedStream::new(44, 0);
        let vals: Vec<f64> = (0..30).map(|_| s.range_f64(0.0, 3.0)).collect();
        let h = assemble(t, PotentialField::explicit(t, vals).unwrap()).unwrap();
        let l = crate::landscape::solve_landscape(&h).unwrap();
        let mu = h.potential().vmax_realized().max(1.0);
        assert_eq!(box_counting(&l, mu).unwrap(), 1.0);
        assert_eq!(box_counting(&l, mu * 2.0).unwrap(), 1.0);
    }

    #[test]
    fn lower_bound_truncates_out_of_domain_arguments() {
        let t = make_torus(1, 12).unwrap();
        let l = LandscapeField::from_values(t, vec![1.0; 12]).unwrap();
        let grid = vec![0.05, 0.5, 2.0];
        let n = nu_curve(&l, &grid).unwrap();
        // alpha^(d+4) mu drops below 1/K^2 = 6.9e-3 for the small grid points
        let report = lower_bound_check(
            &n,
            &l,
            0.3,
            LowerConstants {
                c0: 1.0,
                big_c0: 1.0,
                c1: 1.0,
            },
        )
        .unwrap();
        assert!(!report.truncated.is_empty());
        assert_eq!(report.rows.len() + report.truncated.len(), grid.len());
    }

    #[test]
    fn mu_too_small_reports_minimum() {
        let t = make_torus(1, 10).unwrap();
        let l = LandscapeField::from_values(t, vec![1.0; 10]).unwrap();
        match box_counting(&l, 1e-4) {
            Err(Error::MuTooSmall { min_mu, .. }) => assert!((min_mu - 0.01).abs() < 1e-15),
            other => panic!("expected MuTooSmall, got {other:?}"),
        }
        // the minimal admissible mu itself is fine (guard makes s = K exact)
        assert!(box_counting(&l, 0.01).is_ok());
    }

    #[test]
    fn shift_sensitivity_within_3d_factor() {
        let t = make_torus(2, 17).unwrap();
        let mut s = SeedStream::new(4, 0);
        let u: Vec<f64> = (0..t.volume()).map(|_| s.range_f64(0.2, 30.0)).collect();
        let l = LandscapeField::from_values(t, u).unwrap();
        for mu in [0.05, 0.11, 0.3] {
            let side = s_of_mu(mu).unwrap();
            let base = box_counting(&l, mu).unwrap();
            for _ in 0..5 {
                let shift: Vec<usize> = (0..2).map(|_| s.range_usize(0, side - 1)).collect();
                let shifted = box_counting_shifted(&l, mu, Some(&shift)).unwrap();
                if base > 0.0 && shifted > 0.0 {
                    let ratio = shifted / base;
                    assert!(
                        (1.0 / 9.0 - 1e-12..=9.0 + 1e-12).contains(&ratio),
                        "ratio {ratio}"
                    );
                }
            }
        }
    }

    #[test]
    fn identity_fit_recovers_unit_constants() {
        let grid: Vec<f64> = crate::curve::log_grid(0.05, 5.0, 40).unwrap();
        let n: Vec<f64> = grid.iter().map(|&mu| (mu / 5.0).min(1.0)).collect();
        let lookup = |mu: f64| Some((mu / 5.0_f64).min(1.0));
        let (c1, c2, dist) = fit_scaling_with(&grid, &n, lookup).unwrap();
        assert!(dist < 0.02, "dist {dist}");
        assert!((c1 - 1.0).abs() < 0.05, "c1 {c1}");
        assert!((c2 - 1.0).abs() < 0.2, "c2 {c2}");
    }

    #[test]
    fn step_threshold_ratio_recovered() {
        // N is a step at mu0, the evaluator a step at ratio * mu0 with the
        // ratio sitting exactly on the c2 search grid: the fit recovers it
        // with zero sup distance.
        let mu0 = 0.7;
        let ratio = crate::curve::log_grid(0.1, 10.0, 60).unwrap()[45];
        let grid: Vec<f64> = crate::curve::log_grid(0.05, 5.0, 200).unwrap();
        let n: Vec<f64> = grid
            .iter()
            .map(|&mu| if mu >= mu0 { 1.0 } else { 0.0 })
            .collect();
        let eval = |mu: f64| Some(if mu >= ratio * mu0 { 1.0 } else { 0.0 });
        let (c1, c2, dist) = fit_scaling_with(&grid, &n, eval).unwrap();
        assert!(dist < 1e-9, "dist {dist}");
        assert!((c1 - 1.0).abs() < 1e-6);
        assert_eq!(c2, ratio);
    }

    #[test]
    fn lifschitz_synthetic_slopes() {
        let grid: Vec<f64> = crate::curve::log_grid(0.02, 0.2, 60).unwrap();
        for (power, want) in [(0.5, -0.5), (1.0, -1.0)] {
            let vals: Vec<f64> = grid.iter().map(|&mu| (-mu.powf(-power)).exp()).collect();
            let c = CountingCurve::new(grid.clone(), vals, CurveKind::MeanN, CurveMeta::default())
                .unwrap();
            let slope = lifschitz_fit(&c, (0.02, 0.2)).unwrap();
            assert!((slope - want).abs() < 1e-6, "slope {slope} want {want}");
        }
    }

    #[test]
    fn lifschitz_rejects_saturated_values() {
        let c = CountingCurve::new(
            vec![0.1, 0.2],
            vec![0.5, 1.0],
            CurveKind::MeanN,
            CurveMeta::default(),
        )
        .unwrap();
        assert!(matches!(
            lifschitz_fit(&c, (0.05, 0.3)),
            Err(Error::Window(_))
        ));
    }

    #[test]
    fn lower_bound_with_zero_constants_always_holds() {
        let t = make_torus(1, 40).unwrap();
        let mut s = SeedStream::new(6, 0);
        let u: Vec<f64> = (0..40).map(|_| s.range_f64(0.5, 20.0)).collect();
        let l = LandscapeField::from_values(t, u).unwrap();
        let grid: Vec<f64> = crate::curve::log_grid(0.01, 4.0, 30).unwrap();
        let n = nu_curve(&l, &grid).unwrap(); // any nonnegative curve works here
        let report = lower_bound_check(
            &n,
            &l,
            0.5,
            LowerConstants {
                c0: 0.0,
                big_c0: 0.0,
                c1: 1.0,
            },
        )
        .unwrap();
        assert!(report.passed());
    }

    #[test]
    fn law_report_csv_shape() {
        let report = LawReport {
            rows: vec![LawRow {
                mu: 1.0,
                lhs: 0.25,
                rhs: 0.5,
            }],
            violations: vec![],
            truncated: vec![],
            fitted: Some((1.0, 2.0, 0.05)),
        };
        let csv = report.to_csv();
        assert!(csv.starts_with("mu,lhs,rhs,margin\n"));
        assert!(csv.contains("# summary: rows=1 violations=0 truncated=0 fit:"));
    }
}
