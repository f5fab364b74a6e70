//! Counting curves: a sorted mu grid paired with values in [0, 1], plus the
//! CSV form shared by the CLI artifacts.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    N,
    NStrict,
    Nu,
    MeanN,
    MeanNu,
    MeanNuDual,
}

impl CurveKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CurveKind::N => "N",
            CurveKind::NStrict => "N_strict",
            CurveKind::Nu => "N_u",
            CurveKind::MeanN => "mean_N",
            CurveKind::MeanNu => "mean_N_u",
            CurveKind::MeanNuDual => "mean_N_u_dual",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "N" => CurveKind::N,
            "N_strict" => CurveKind::NStrict,
            "N_u" => CurveKind::Nu,
            "mean_N" => CurveKind::MeanN,
            "mean_N_u" => CurveKind::MeanNu,
            "mean_N_u_dual" => CurveKind::MeanNuDual,
            other => return Err(Error::Parse(format!("unknown curve kind {other:?}"))),
        })
    }
}

/// Provenance recorded with a curve.
#[derive(Debug, Clone, Default)]
pub struct CurveMeta {
    pub d: usize,
    pub k: usize,
    pub potential: String,
    pub seeds: Vec<u64>,
    pub shift: Option<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub struct CountingCurve {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub kind: CurveKind,
    pub meta: CurveMeta,
}

impl CountingCurve {
    pub fn new(grid: Vec<f64>, values: Vec<f64>, kind: CurveKind, meta: CurveMeta) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::Mismatch("grid and value lengths differ".into()));
        }
        if grid.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidDomain("mu grid must be sorted".into()));
        }
        Ok(CountingCurve {
            grid,
            values,
            kind,
            meta,
        })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[0] <= w[1] + 1e-15)
    }

    /// CSV body: header `mu,value,kind`, one row per grid point, 17
    /// significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("mu,value,kind\n");
        for (mu, v) in self.grid.iter().zip(&self.values) {
            out.push_str(&format!(
                "{},{},{}\n",
                fmt17(*mu),
                fmt17(*v),
                self.kind.as_str()
            ));
        }
        out
    }

    /// Parse the CSV form; `#`-prefixed metadata lines are skipped.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut grid = Vec::new();
        let mut values = Vec::new();
        let mut kind: Option<CurveKind> = None;
        let mut saw_header = false;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !saw_header {
                if line != "mu,value,kind" {
                    return Err(Error::Parse(format!(
                        "expected header 'mu,value,kind', got {line:?}"
                    )));
                }
                saw_header = true;
                continue;
            }
            let mut parts = line.split(',');
            let mu: f64 = parts
                .next()
                .ok_or_else(|| Error::Parse("missing mu column".into()))?
                .parse()
                .map_err(|e| Error::Parse(format!("bad mu: {e}")))?;
            let v: f64 = parts
                .next()
                .ok_or_else(|| Error::Parse("missing value column".into()))?
                .parse()
                .map_err(|e| Error::Parse(format!("bad value: {e}")))?;
            let k = CurveKind::parse(
                parts
                    .next()
                    .ok_or_else(|| Error::Parse("missing kind column".into()))?,
            )?;
            if let Some(prev) = kind {
                if prev != k {
                    return Err(Error::Parse("mixed curve kinds in one file".into()));
                }
            }
            kind = Some(k);
            grid.push(mu);
            values.push(v);
        }
        let kind = kind.ok_or_else(|| Error::Parse("empty curve file".into()))?;
        CountingCurve::new(grid, values, kind, CurveMeta::default())
    }
}

/// 17-significant-digit decimal form, exact for round-tripping f64.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// `points` log-spaced values spanning [lo, hi].
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi > lo) {
        return Err(Error::InvalidDomain(format!(
            "log grid needs 0 < lo < hi, got [{lo}, {hi}]"
        )));
    }
    if points < 2 {
        return Err(Error::InvalidDomain(
            "log grid needs at least two points".into(),
        ));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect())
}

/// Default mu grid: `points` log-spaced values in
/// [1e-3 (4d + Vmax), 4d + Vmax], raised to the box-counting domain
/// mu >= 1/K^2 when necessary. Returns the grid and whether it was clipped.
pub fn default_mu_grid(d: usize, k: usize, vmax: f64, points: usize) -> Result<(Vec<f64>, bool)> {
    let top = 4.0 * d as f64 + vmax;
    let floor = 1.0 / (k as f64 * k as f64);
    let lo = 1e-3 * top;
    let clipped = lo < floor;
    let grid = log_grid(lo.max(floor), top, points)?;
    Ok((grid, clipped))
}
