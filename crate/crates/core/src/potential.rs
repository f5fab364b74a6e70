//! Potential fields on the torus: explicit arrays, periodic tilings, and
//! Anderson-type i.i.d. draws from a declared distribution.

use crate::error::{Error, Result};
use crate::lattice::Torus;
use crate::rng::SeedStream;

/// Distribution of a single Anderson entry. Support must lie in [0, inf).
#[derive(Debug, Clone, PartialEq)]
pub enum DistributionSpec {
    Uniform {
        lo: f64,
        hi: f64,
    },
    Bernoulli {
        p: f64,
        height: f64,
    },
    /// Finite list of (value, probability) atoms.
    FiniteDiscrete {
        atoms: Vec<(f64, f64)>,
    },
}

impl DistributionSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            DistributionSpec::Uniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && *lo >= 0.0 && hi > lo) {
                    return Err(Error::InvalidDistribution(format!(
                        "uniform needs 0 <= lo < hi, got [{lo}, {hi}]"
                    )));
                }
            }
            DistributionSpec::Bernoulli { p, height } => {
                if !(0.0..=1.0).contains(p) {
                    return Err(Error::InvalidDistribution(format!(
                        "bernoulli p = {p} outside [0, 1]"
                    )));
                }
                if !(height.is_finite() && *height >= 0.0) {
                    return Err(Error::InvalidDistribution(format!(
                        "bernoulli height = {height} must be >= 0"
                    )));
                }
            }
            DistributionSpec::FiniteDiscrete { atoms } => {
                if atoms.is_empty() {
                    return Err(Error::InvalidDistribution(
                        "discrete distribution needs at least one atom".into(),
                    ));
                }
                let mut total = 0.0;
                for &(v, p) in atoms {
                    if !(v.is_finite() && v >= 0.0) {
                        return Err(Error::InvalidDistribution(format!(
                            "atom value {v} must be >= 0"
                        )));
                    }
                    if !(p.is_finite() && p >= 0.0) {
                        return Err(Error::InvalidDistribution(format!(
                            "atom probability {p} must be >= 0"
                        )));
                    }
                    total += p;
                }
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidDistribution(format!(
                        "atom probabilities sum to {total}, not 1"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Cumulative distribution F(delta) = P(v <= delta).
    pub fn cdf(&self, delta: f64) -> f64 {
        match self {
            DistributionSpec::Uniform { lo, hi } => {
                if delta < *lo {
                    0.0
                } else if delta >= *hi {
                    1.0
                } else {
                    (delta - lo) / (hi - lo)
                }
            }
            DistributionSpec::Bernoulli { p, height } => {
                if delta < 0.0 {
                    0.0
                } else if delta < *height {
                    1.0 - p
                } else {
                    1.0
                }
            }
            DistributionSpec::FiniteDiscrete { atoms } => atoms
                .iter()
                .filter(|&&(v, _)| v <= delta)
                .map(|&(_, p)| p)
                .sum(),
        }
    }

    /// Essential supremum of the support.
    pub fn ess_sup(&self) -> f64 {
        match self {
            DistributionSpec::Uniform { hi, .. } => *hi,
            DistributionSpec::Bernoulli { p, height } => {
                if *p > 0.0 {
                    *height
                } else {
                    0.0
                }
            }
            DistributionSpec::FiniteDiscrete { atoms } => atoms
                .iter()
                .filter(|&&(_, p)| p > 0.0)
                .map(|&(v, _)| v)
                .fold(0.0, f64::max),
        }
    }

    /// Essential infimum of the support.
    pub fn ess_inf(&self) -> f64 {
        match self {
            DistributionSpec::Uniform { lo, .. } => *lo,
            DistributionSpec::Bernoulli { p, height } => {
                if *p < 1.0 {
                    0.0
                } else {
                    *height
                }
            }
            DistributionSpec::FiniteDiscrete { atoms } => atoms
                .iter()
                .filter(|&&(_, p)| p > 0.0)
                .map(|&(v, _)| v)
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Inverse-CDF transform of a uniform draw in [0, 1).
    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            DistributionSpec::Uniform { lo, hi } => lo + (hi - lo) * u,
            DistributionSpec::Bernoulli { p, height } => {
                if u < 1.0 - p {
                    0.0
                } else {
                    *height
                }
            }
            DistributionSpec::FiniteDiscrete { atoms } => {
                let mut acc = 0.0;
                for &(v, p) in atoms {
                    acc += p;
                    if u < acc {
                        return v;
                    }
                }
                atoms.last().unwrap().0
            }
        }
    }

    /// One-line description used in artifact metadata.
    pub fn describe(&self) -> String {
        match self {
            DistributionSpec::Uniform { lo, hi } => format!("uniform[{lo},{hi}]"),
            DistributionSpec::Bernoulli { p, height } => format!("bernoulli(p={p},h={height})"),
            DistributionSpec::FiniteDiscrete { atoms } => {
                let parts: Vec<String> = atoms.iter().map(|(v, p)| format!("{v}:{p}")).collect();
                format!("discrete({})", parts.join(","))
            }
        }
    }
}

/// Nonnegative potential on a torus.
///
/// `vmax` is the amplitude used by dual constructions: the distribution's
/// essential sup for ensemble draws, the realized maximum otherwise. The
/// realized maximum is always kept separately.
#[derive(Debug, Clone)]
pub struct PotentialField {
    torus: Torus,
    values: Vec<f64>,
    vmax_realized: f64,
    ensemble_sup: Option<f64>,
    constant: bool,
}

impl PotentialField {
    /// Wrap explicit values; all must be finite and nonnegative.
    pub fn explicit(torus: Torus, values: Vec<f64>) -> Result<Self> {
        if values.len() != torus.volume() {
            return Err(Error::Mismatch(format!(
                "potential length {} does not match torus volume {}",
                values.len(),
                torus.volume()
            )));
        }
        for &v in &values {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidPotential(format!(
                    "value {v} is not a finite nonnegative number"
                )));
            }
        }
        let vmax_realized = values.iter().cloned().fold(0.0, f64::max);
        let constant = values.iter().all(|&v| v == values[0]);
        Ok(PotentialField {
            torus,
            values,
            vmax_realized,
            ensemble_sup: None,
            constant,
        })
    }

    /// Tile a fundamental cell across the torus. Each cell side must divide K.
    pub fn periodic(torus: Torus, cell_dims: &[usize], cell_values: &[f64]) -> Result<Self> {
        if cell_dims.len() != torus.d() {
            return Err(Error::Mismatch(format!(
                "cell rank {} does not match dimension {}",
                cell_dims.len(),
                torus.d()
            )));
        }
        for &p in cell_dims {
            if p == 0 || !torus.k().is_multiple_of(p) {
                return Err(Error::IncompatiblePeriod {
                    period: p,
                    k: torus.k(),
                });
            }
        }
        let cell_vol: usize = cell_dims.iter().product();
        if cell_values.len() != cell_vol {
            return Err(Error::Mismatch(format!(
                "cell has {} values but dims give {}",
                cell_values.len(),
                cell_vol
            )));
        }
        let mut values = vec![0.0; torus.volume()];
        for site in torus.sites() {
            let coords = torus.coords(site);
            let mut idx = 0;
            for axis in 0..torus.d() {
                idx = idx * cell_dims[axis] + (coords[axis] - 1) % cell_dims[axis];
            }
            values[site] = cell_values[idx];
        }
        Self::explicit(torus, values)
    }

    /// One Anderson realization: a deterministic function of
    /// (torus, distribution, master seed, realization index), with sites
    /// filled in canonical order from the keyed counter stream.
    pub fn anderson(
        torus: Torus,
        dist: &DistributionSpec,
        master_seed: u64,
        realization: u64,
    ) -> Result<Self> {
        dist.validate()?;
        let mut stream = SeedStream::new(master_seed, realization);
        let values: Vec<f64> = torus
            .sites()
            .map(|_| dist.quantile(stream.unit_f64()))
            .collect();
        let mut field = Self::explicit(torus, values)?;
        field.ensemble_sup = Some(dist.ess_sup());
        Ok(field)
    }

    pub fn torus(&self) -> Torus {
        self.torus
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Amplitude used by dual constructions and spectral bounds.
    pub fn vmax(&self) -> f64 {
        self.ensemble_sup.unwrap_or(self.vmax_realized)
    }

    /// Maximum of the realized values.
    pub fn vmax_realized(&self) -> f64 {
        self.vmax_realized
    }

    pub fn is_constant(&self) -> bool {
        self.constant
    }

    pub fn is_zero(&self) -> bool {
        self.vmax_realized == 0.0
    }

    /// Dual field V_max - V; nonnegative, same amplitude.
    pub fn dual(&self) -> PotentialField {
        let vmax = self.vmax();
        let values: Vec<f64> = self.values.iter().map(|&v| vmax - v).collect();
        let vmax_realized = values.iter().cloned().fold(0.0, f64::max);
        PotentialField {
            torus: self.torus,
            values,
            vmax_realized,
            ensemble_sup: self.ensemble_sup,
            constant: self.constant,
        }
    }

    /// Flat text format: header line `d K`, then K^d values in canonical
    /// site order.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.torus.d(), self.torus.k());
        for v in &self.values {
            s.push_str(&format!("{v}\n"));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let (torus, values) = parse_field_text(text)?;
        Self::explicit(torus, values)
    }
}

/// Parse the shared flat text format (`d K` header + K^d values).
/// Lines starting with `#` carry artifact metadata and are skipped.
pub fn parse_field_text(text: &str) -> Result<(Torus, Vec<f64>)> {
    let mut tokens = text
        .lines()
        .filter(|line| !line.trim_start().starts_with('#'))
        .flat_map(str::split_whitespace);
    let d: usize = tokens
        .next()
        .ok_or_else(|| Error::Parse("missing dimension in header".into()))?
        .parse()
        .map_err(|e| Error::Parse(format!("bad dimension: {e}")))?;
    let k: usize = tokens
        .next()
        .ok_or_else(|| Error::Parse("missing side length in header".into()))?
        .parse()
        .map_err(|e| Error::Parse(format!("bad side length: {e}")))?;
    let torus = Torus::new(d, k)?;
    let mut values = Vec::with_capacity(torus.volume());
    for tok in tokens {
        let v: f64 = tok
            .parse()
            .map_err(|e| Error::Parse(format!("bad value {tok:?}: {e}")))?;
        values.push(v);
    }
    if values.len() != torus.volume() {
        return Err(Error::Parse(format!(
            "expected {} values, found {}",
            torus.volume(),
            values.len()
        )));
    }
    Ok((torus, values))
}
