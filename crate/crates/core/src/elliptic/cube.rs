//! Boxes in Z^d with local row-major indexing, and the centered Dirichlet
//! cube Q(r; xi) of side 2r + 1.

use crate::error::{Error, Result};
use crate::lattice::Torus;

/// An axis-aligned box of Z^d sites, addressed by local 0-based coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZBox {
    lens: Vec<usize>,
}

impl ZBox {
    pub fn new(lens: Vec<usize>) -> Result<Self> {
        if lens.is_empty() || lens.contains(&0) {
            return Err(Error::InvalidDomain("box extents must be positive".into()));
        }
        Ok(ZBox { lens })
    }

    pub fn d(&self) -> usize {
        self.lens.len()
    }

    pub fn lens(&self) -> &[usize] {
        &self.lens
    }

    pub fn volume(&self) -> usize {
        self.lens.iter().product()
    }

    pub fn max_len(&self) -> usize {
        *self.lens.iter().max().unwrap()
    }

    pub fn idx(&self, coords: &[usize]) -> usize {
        let mut s = 0;
        for (axis, &c) in coords.iter().enumerate() {
            debug_assert!(c < self.lens[axis]);
            s = s * self.lens[axis] + c;
        }
        s
    }

    pub fn coords(&self, idx: usize) -> Vec<usize> {
        let mut c = vec![0; self.d()];
        let mut rest = idx;
        for axis in (0..self.d()).rev() {
            c[axis] = rest % self.lens[axis];
            rest /= self.lens[axis];
        }
        c
    }

    /// Number of axes on which the site sits at an end of the box.
    pub fn exits(&self, idx: usize) -> usize {
        let c = self.coords(idx);
        (0..self.d())
            .filter(|&axis| c[axis] == 0 || c[axis] == self.lens[axis] - 1)
            .count()
    }

    pub fn is_interior(&self, idx: usize) -> bool {
        self.exits(idx) == 0
    }

    pub fn interior(&self) -> Vec<usize> {
        (0..self.volume())
            .filter(|&i| self.is_interior(i))
            .collect()
    }

    pub fn boundary(&self) -> Vec<usize> {
        (0..self.volume()).filter(|&i| self.exits(i) >= 1).collect()
    }

    /// Boundary with corners removed: exactly one exiting axis.
    pub fn flat_boundary(&self) -> Vec<usize> {
        (0..self.volume()).filter(|&i| self.exits(i) == 1).collect()
    }

    /// Neighbors of a site that stay inside the box.
    pub fn neighbors_in(&self, idx: usize) -> Vec<usize> {
        let c = self.coords(idx);
        let mut out = Vec::with_capacity(2 * self.d());
        for axis in 0..self.d() {
            if c[axis] + 1 < self.lens[axis] {
                let mut m = c.clone();
                m[axis] += 1;
                out.push(self.idx(&m));
            }
            if c[axis] > 0 {
                let mut m = c.clone();
                m[axis] -= 1;
                out.push(self.idx(&m));
            }
        }
        out
    }

    /// -(Delta f)_idx with all 2d neighbors taken inside the box; only valid
    /// at interior sites.
    pub fn neg_laplacian_at(&self, f: &[f64], idx: usize) -> f64 {
        let nbrs = self.neighbors_in(idx);
        debug_assert_eq!(nbrs.len(), 2 * self.d());
        2.0 * self.d() as f64 * f[idx] - nbrs.into_iter().map(|m| f[m]).sum::<f64>()
    }
}

/// The cube Q(r; xi) = { m : |m - xi|_inf <= r }, side 2r + 1. Kernels are
/// translation invariant, so the problem is keyed by (d, r) alone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CubeProblem {
    d: usize,
    r: usize,
    cube: ZBox,
}

impl CubeProblem {
    pub fn new(d: usize, r: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidDomain("dimension must be >= 1".into()));
        }
        let cube = ZBox::new(vec![2 * r + 1; d])?;
        Ok(CubeProblem { d, r, cube })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// The underlying box of side 2r + 1.
    pub fn cube(&self) -> &ZBox {
        &self.cube
    }

    pub fn sites(&self) -> usize {
        self.cube.volume()
    }

    pub fn center_idx(&self) -> usize {
        self.cube.idx(&vec![self.r; self.d])
    }

    /// Sup-norm distance of a site from the center.
    pub fn shell(&self, idx: usize) -> usize {
        self.cube
            .coords(idx)
            .into_iter()
            .map(|c| c.abs_diff(self.r))
            .max()
            .unwrap()
    }

    /// Sites of the inner boundary, shell == r.
    pub fn boundary(&self) -> Vec<usize> {
        (0..self.sites())
            .filter(|&i| self.shell(i) == self.r)
            .collect()
    }

    /// Sites with shell <= r - 1, as cube indices (empty when r = 0).
    pub fn interior(&self) -> Vec<usize> {
        if self.r == 0 {
            return vec![];
        }
        (0..self.sites())
            .filter(|&i| self.shell(i) < self.r)
            .collect()
    }

    /// Count of sites at a given shell radius, |dQ(rho)|.
    pub fn shell_size(&self, rho: usize) -> usize {
        if rho == 0 {
            1
        } else {
            let outer = (2 * rho + 1).pow(self.d as u32);
            let inner = (2 * rho - 1).pow(self.d as u32);
            outer - inner
        }
    }
}

/// Copy a torus field onto Q(r; center). Requires 2r + 1 <= K so the window
/// sees each torus site at most once; the window may cross the periodic
/// seam (values are well defined by periodicity).
pub fn torus_window(
    torus: Torus,
    values: &[f64],
    center_site: usize,
    r: usize,
) -> Result<Vec<f64>> {
    if values.len() != torus.volume() {
        return Err(Error::Mismatch("field length does not match torus".into()));
    }
    if 2 * r + 1 > torus.k() {
        return Err(Error::InvalidDomain(format!(
            "window side {} exceeds K = {}",
            2 * r + 1,
            torus.k()
        )));
    }
    let d = torus.d();
    let k = torus.k();
    let center = torus.coords(center_site);
    let p = CubeProblem::new(d, r)?;
    let mut out = vec![0.0; p.sites()];
    for idx in 0..p.sites() {
        let local = p.cube().coords(idx);
        let coords: Vec<usize> = (0..d)
            .map(|axis| {
                let offset = local[axis] as isize - r as isize;
                let c = (center[axis] as isize - 1 + offset).rem_euclid(k as isize);
                c as usize + 1
            })
            .collect();
        out[idx] = values[torus.site_at(&coords)];
    }
    Ok(out)
}
