//! Envelope (skyline) factorizations and a Jacobi-preconditioned conjugate
//! gradient. The envelope format fits lattice operators well: torus wrap adds
//! a handful of long rows to an otherwise banded profile, and factorization
//! fill never leaves the envelope.

use crate::error::{Error, Result};

/// Symmetric matrix stored by rows of the lower triangle, each row dense
/// from its first nonzero column to the diagonal.
#[derive(Debug, Clone)]
pub struct Skyline {
    n: usize,
    first: Vec<usize>,
    offsets: Vec<usize>,
    data: Vec<f64>,
}

impl Skyline {
    /// Assemble from lower-triangle entries (i >= j). Duplicates accumulate.
    pub fn from_entries(n: usize, entries: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let entries: Vec<(usize, usize, f64)> = entries.into_iter().collect();
        let mut first: Vec<usize> = (0..n).collect();
        for &(i, j, _) in &entries {
            debug_assert!(j <= i && i < n);
            if j < first[i] {
                first[i] = j;
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for i in 0..n {
            offsets.push(offsets[i] + (i - first[i] + 1));
        }
        let mut data = vec![0.0; offsets[n]];
        for (i, j, v) in entries {
            data[offsets[i] + (j - first[i])] += v;
        }
        Skyline {
            n,
            first,
            offsets,
            data,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Cholesky factorization; fails on a non-positive pivot.
    pub fn cholesky(&self) -> Result<CholeskyFactor> {
        let n = self.n;
        let mut f = self.clone();
        for i in 0..n {
            let fi = f.first[i];
            for j in fi..i {
                let fj = f.first[j];
                let lo = fi.max(fj);
                let mut s = f.data[f.offsets[i] + (j - fi)];
                if lo < j {
                    let ri = &f.data[f.offsets[i] + (lo - fi)..f.offsets[i] + (j - fi)];
                    let rj = &f.data[f.offsets[j] + (lo - fj)..f.offsets[j] + (j - fj)];
                    s -= dot(ri, rj);
                }
                let piv = f.data[f.offsets[j + 1] - 1];
                f.data[f.offsets[i] + (j - fi)] = s / piv;
            }
            let mut s = f.data[f.offsets[i + 1] - 1];
            for k in 0..(i - fi) {
                let v = f.data[f.offsets[i] + k];
                s -= v * v;
            }
            if !s.is_finite() || s <= 0.0 {
                return Err(Error::NotPositiveDefinite { index: i, pivot: s });
            }
            f.data[f.offsets[i + 1] - 1] = s.sqrt();
        }
        Ok(CholeskyFactor { l: f })
    }

    /// LDL^T factorization without pivoting; reports the inertia-relevant
    /// diagonal. Breaks down on an exactly zero or non-finite pivot.
    pub fn ldlt(&self) -> Result<LdltFactor> {
        let n = self.n;
        let mut f = self.clone();
        let mut d = vec![0.0; n];
        let mut y = vec![0.0; n]; // y[k] = L_ik * d_k while row i is active
        for i in 0..n {
            let fi = f.first[i];
            for j in fi..i {
                let fj = f.first[j];
                let lo = fi.max(fj);
                let mut s = f.data[f.offsets[i] + (j - fi)];
                if lo < j {
                    let yi = &y[lo..j];
                    let rj = &f.data[f.offsets[j] + (lo - fj)..f.offsets[j] + (j - fj)];
                    s -= dot(yi, rj);
                }
                let lij = s / d[j];
                f.data[f.offsets[i] + (j - fi)] = lij;
                y[j] = lij * d[j];
            }
            let mut s = f.data[f.offsets[i + 1] - 1];
            for k in fi..i {
                let lik = f.data[f.offsets[i] + (k - fi)];
                s -= lik * y[k];
            }
            if s == 0.0 || !s.is_finite() {
                return Err(Error::ShiftDegeneracy { shift: s });
            }
            d[i] = s;
        }
        Ok(LdltFactor { l: f, d })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Lower-triangular Cholesky factor in envelope storage.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    l: Skyline,
}

impl CholeskyFactor {
    /// Solve A x = b in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.l.n;
        debug_assert_eq!(b.len(), n);
        // forward: L y = b
        for i in 0..n {
            let fi = self.l.first[i];
            let row = self.l.row(i);
            let mut s = b[i];
            for (k, &lik) in row[..row.len() - 1].iter().enumerate() {
                s -= lik * b[fi + k];
            }
            b[i] = s / row[row.len() - 1];
        }
        // backward: L^T x = y (scatter by descending rows)
        for i in (0..n).rev() {
            let fi = self.l.first[i];
            let row = self.l.row(i);
            let xi = b[i] / row[row.len() - 1];
            b[i] = xi;
            for (k, &lik) in row[..row.len() - 1].iter().enumerate() {
                b[fi + k] -= lik * xi;
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// LDL^T factor; `negative_pivots` is the count of negative eigenvalues of
/// the factored matrix by Sylvester's law of inertia.
#[derive(Debug, Clone)]
pub struct LdltFactor {
    #[allow(dead_code)]
    l: Skyline,
    d: Vec<f64>,
}

impl LdltFactor {
    pub fn negative_pivots(&self) -> usize {
        self.d.iter().filter(|&&x| x < 0.0).count()
    }
}

/// Jacobi-preconditioned conjugate gradient for SPD operators.
///
/// Converges when ||b - Ax||_2 <= rel_tol * ||b||_2; otherwise reports an
/// iteration-limit error carrying the relative residual reached.
pub fn pcg(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    diag: &[f64],
    b: &[f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    let n = b.len();
    let norm_b = dot(b, b).sqrt();
    if norm_b == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(ri, di)| ri / di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut res = norm_b;
    for _ in 0..max_iter {
        let ap = apply(&p);
        let pap = dot(&p, &ap);
        if pap <= 0.0 || !pap.is_finite() {
            return Err(Error::Numerical(format!(
                "pcg: operator not positive definite (pAp = {pap:.3e})"
            )));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        res = dot(&r, &r).sqrt();
        if res <= rel_tol * norm_b {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::IterationLimit {
        iterations: max_iter,
        residual: res / norm_b,
    })
}
