//! The tight-binding Hamiltonian H = -Delta + V on the torus: sparse
//! assembly, matrix-free application, the Dirichlet quadratic form, and the
//! sign-flip dual transform.

use crate::error::{Error, Result};
use crate::lattice::{gradient, Torus};
use crate::linalg::Skyline;
use crate::potential::PotentialField;

/// H = -Delta + V stored as compressed sparse rows (diagonal 2d + v_n,
/// -1 toward each of the 2d neighbors), alongside the potential for
/// stencil application.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    torus: Torus,
    potential: PotentialField,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

/// Assemble H on the torus carrying `potential`.
pub fn assemble(torus: Torus, potential: PotentialField) -> Result<Hamiltonian> {
    if potential.torus() != torus {
        return Err(Error::Mismatch(
            "potential lives on a different torus".into(),
        ));
    }
    let n = torus.volume();
    let deg = 2 * torus.d();
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::with_capacity(n * (deg + 1));
    let mut values = Vec::with_capacity(n * (deg + 1));
    row_ptr.push(0);
    for site in torus.sites() {
        let mut row: Vec<(usize, f64)> = Vec::with_capacity(deg + 1);
        row.push((site, deg as f64 + potential.values()[site]));
        for m in torus.neighbors(site) {
            row.push((m, -1.0));
        }
        row.sort_unstable_by_key(|&(j, _)| j);
        for (j, v) in row {
            col_idx.push(j);
            values.push(v);
        }
        row_ptr.push(col_idx.len());
    }
    Ok(Hamiltonian {
        torus,
        potential,
        row_ptr,
        col_idx,
        values,
    })
}

impl Hamiltonian {
    pub fn torus(&self) -> Torus {
        self.torus
    }

    pub fn potential(&self) -> &PotentialField {
        &self.potential
    }

    pub fn n(&self) -> usize {
        self.torus.volume()
    }

    /// Upper edge of the spectral enclosure, 4d + V_max.
    pub fn top_of_spectrum(&self) -> f64 {
        4.0 * self.torus.d() as f64 + self.potential.vmax()
    }

    /// Matrix-free stencil evaluation of (H phi)_n.
    pub fn apply(&self, phi: &[f64]) -> Result<Vec<f64>> {
        if phi.len() != self.n() {
            return Err(Error::Mismatch(format!(
                "vector length {} does not match K^d = {}",
                phi.len(),
                self.n()
            )));
        }
        let deg = 2.0 * self.torus.d() as f64;
        let v = self.potential.values();
        let out = self
            .torus
            .sites()
            .map(|n| {
                let hop: f64 = self.torus.neighbors(n).into_iter().map(|m| phi[m]).sum();
                (deg + v[n]) * phi[n] - hop
            })
            .collect();
        Ok(out)
    }

    /// CSR evaluation; agrees with the stencil up to summation order.
    pub fn apply_csr(&self, phi: &[f64]) -> Result<Vec<f64>> {
        if phi.len() != self.n() {
            return Err(Error::Mismatch("vector length mismatch".into()));
        }
        let out = (0..self.n())
            .map(|i| {
                self.row_range(i)
                    .map(|k| self.values[k] * phi[self.col_idx[k]])
                    .sum()
            })
            .collect();
        Ok(out)
    }

    fn row_range(&self, i: usize) -> std::ops::Range<usize> {
        self.row_ptr[i]..self.row_ptr[i + 1]
    }

    /// Row i as (column, value) pairs.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.row_range(i)
            .map(move |k| (self.col_idx[k], self.values[k]))
    }

    /// Diagonal entries 2d + v_n.
    pub fn diagonal(&self) -> Vec<f64> {
        let deg = 2.0 * self.torus.d() as f64;
        self.potential.values().iter().map(|&v| deg + v).collect()
    }

    /// The Dirichlet form <f, Hf> = sum |grad f|^2 + sum v f^2.
    pub fn quadratic_form(&self, f: &[f64]) -> Result<f64> {
        let g = gradient(self.torus, f)?;
        let grad: f64 = g.total_norm_sq();
        let pot: f64 = self
            .potential
            .values()
            .iter()
            .zip(f)
            .map(|(&v, &x)| v * x * x)
            .sum();
        Ok(grad + pot)
    }

    /// Lower triangle in envelope form, with `shift` subtracted from the
    /// diagonal (H - shift I).
    pub fn shifted_skyline(&self, shift: f64) -> Skyline {
        let n = self.n();
        let entries = (0..n).flat_map(|i| {
            self.row_range(i).filter_map(move |k| {
                let j = self.col_idx[k];
                if j < i {
                    Some((i, j, self.values[k]))
                } else if j == i {
                    Some((i, i, self.values[k] - shift))
                } else {
                    None
                }
            })
        });
        Skyline::from_entries(n, entries)
    }

    /// Dense copy, for small eigenproblems.
    pub fn dense(&self) -> nalgebra::DMatrix<f64> {
        let n = self.n();
        let mut m = nalgebra::DMatrix::zeros(n, n);
        for i in 0..n {
            for k in self.row_range(i) {
                m[(i, self.col_idx[k])] += self.values[k];
            }
        }
        m
    }

    /// The dual operator -Delta + (V_max - V) on the same torus.
    pub fn dual(&self) -> Hamiltonian {
        assemble(self.torus, self.potential.dual()).expect("dual potential lives on the same torus")
    }
}

/// Sign-flip transform phi~_n = (-1)^(n_1+..+n_d) phi_n; requires K even so
/// the sign pattern is periodic.
pub fn dual_vector(torus: Torus, phi: &[f64]) -> Result<Vec<f64>> {
    if !torus.k().is_multiple_of(2) {
        return Err(Error::Parity { k: torus.k() });
    }
    if phi.len() != torus.volume() {
        return Err(Error::Mismatch("vector length mismatch".into()));
    }
    Ok(torus.sites().map(|n| torus.sign(n) * phi[n]).collect())
}
