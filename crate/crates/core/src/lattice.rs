//! Torus geometry: site indexing, neighbor structure, cubes with their
//! derived sets (tripled cube, middle third, boundaries), partitions and
//! their shifts, discrete gradients, and cut-off functions.
//!
//! Sites of the torus (Z/KZ)^d are the points of {1,..,K}^d, linearized
//! row-major (first coordinate slowest). Every module of the crate shares
//! this bijection.

use crate::error::{Error, Result};

/// The periodic index lattice (Z/KZ)^d, K >= 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Torus {
    d: usize,
    k: usize,
}

impl Torus {
    pub fn new(d: usize, k: usize) -> Result<Self> {
        if d < 1 {
            return Err(Error::InvalidDomain(format!(
                "dimension d = {d} must be >= 1"
            )));
        }
        if k < 3 {
            return Err(Error::InvalidDomain(format!(
                "side length K = {k} must be >= 3"
            )));
        }
        let mut vol: usize = 1;
        for _ in 0..d {
            vol = vol
                .checked_mul(k)
                .filter(|&v| v <= 1 << 32)
                .ok_or_else(|| {
                    Error::InvalidDomain(format!("K^d overflows desk scale (K = {k}, d = {d})"))
                })?;
        }
        Ok(Torus { d, k })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of sites, K^d.
    pub fn volume(&self) -> usize {
        self.k.pow(self.d as u32)
    }

    /// Row-major stride of an axis: K^(d-1-axis).
    pub fn stride(&self, axis: usize) -> usize {
        self.k.pow((self.d - 1 - axis) as u32)
    }

    /// 1-based coordinates of a flat site index.
    pub fn coords(&self, site: usize) -> Vec<usize> {
        let mut c = vec![0; self.d];
        let mut rest = site;
        for axis in (0..self.d).rev() {
            c[axis] = rest % self.k + 1;
            rest /= self.k;
        }
        c
    }

    /// Flat index of 1-based coordinates.
    pub fn site_at(&self, coords: &[usize]) -> usize {
        debug_assert_eq!(coords.len(), self.d);
        let mut s = 0;
        for &c in coords {
            debug_assert!((1..=self.k).contains(&c));
            s = s * self.k + (c - 1);
        }
        s
    }

    /// Neighbor one step along `axis`; `forward` picks +e_i, else -e_i.
    /// Wraps periodically.
    pub fn neighbor(&self, site: usize, axis: usize, forward: bool) -> usize {
        let stride = self.stride(axis);
        let coord = (site / stride) % self.k;
        let next = if forward {
            if coord + 1 == self.k {
                0
            } else {
                coord + 1
            }
        } else if coord == 0 {
            self.k - 1
        } else {
            coord - 1
        };
        site - coord * stride + next * stride
    }

    /// The 2d nearest neighbors of a site.
    pub fn neighbors(&self, site: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(2 * self.d);
        for axis in 0..self.d {
            out.push(self.neighbor(site, axis, true));
            out.push(self.neighbor(site, axis, false));
        }
        out
    }

    pub fn sites(&self) -> std::ops::Range<usize> {
        0..self.volume()
    }

    /// Parity (-1)^(n_1 + .. + n_d) of the 1-based coordinates of a site.
    pub fn sign(&self, site: usize) -> f64 {
        let mut sum = 0usize;
        let mut rest = site;
        for _ in 0..self.d {
            sum += rest % self.k + 1;
            rest /= self.k;
        }
        if sum.is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }
}

/// Make a torus; `d >= 1`, `K >= 3`.
pub fn make_torus(d: usize, k: usize) -> Result<Torus> {
    Torus::new(d, k)
}

/// An axis-aligned box of sites on a torus, addressed by its lowest corner
/// (1-based coordinates) and per-axis extents. Boxes from partitions may be
/// irregular; most cube machinery requires all extents equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cube {
    torus: Torus,
    anchor: Vec<usize>,
    lengths: Vec<usize>,
}

impl Cube {
    pub fn new(torus: Torus, anchor: Vec<usize>, lengths: Vec<usize>) -> Result<Self> {
        if anchor.len() != torus.d() || lengths.len() != torus.d() {
            return Err(Error::Mismatch(format!(
                "cube rank {} does not match torus dimension {}",
                anchor.len(),
                torus.d()
            )));
        }
        for &a in &anchor {
            if !(1..=torus.k()).contains(&a) {
                return Err(Error::InvalidDomain(format!(
                    "anchor coordinate {a} outside 1..={}",
                    torus.k()
                )));
            }
        }
        for &l in &lengths {
            if l < 1 || l > torus.k() {
                return Err(Error::InvalidDomain(format!(
                    "cube length {l} outside 1..={}",
                    torus.k()
                )));
            }
        }
        Ok(Cube {
            torus,
            anchor,
            lengths,
        })
    }

    pub fn torus(&self) -> Torus {
        self.torus
    }

    pub fn anchor(&self) -> &[usize] {
        &self.anchor
    }

    pub fn lengths(&self) -> &[usize] {
        &self.lengths
    }

    pub fn is_regular(&self) -> bool {
        self.lengths.iter().all(|&l| l == self.lengths[0])
    }

    /// Side length of a regular cube.
    pub fn side(&self) -> Option<usize> {
        if self.is_regular() {
            Some(self.lengths[0])
        } else {
            None
        }
    }

    pub fn volume(&self) -> usize {
        self.lengths.iter().product()
    }

    /// Flat site index at a local offset (0-based per axis, < length).
    pub fn site_at_offset(&self, offset: &[usize]) -> usize {
        let k = self.torus.k();
        let mut s = 0;
        for axis in 0..self.torus.d() {
            let c = (self.anchor[axis] - 1 + offset[axis]) % k;
            s = s * k + c;
        }
        s
    }

    /// Visit every site of the cube, row-major in local offsets.
    pub fn for_each_site(&self, mut f: impl FnMut(usize)) {
        let d = self.torus.d();
        let mut off = vec![0usize; d];
        loop {
            f(self.site_at_offset(&off));
            let mut axis = d;
            loop {
                if axis == 0 {
                    return;
                }
                axis -= 1;
                off[axis] += 1;
                if off[axis] < self.lengths[axis] {
                    break;
                }
                off[axis] = 0;
            }
        }
    }

    pub fn sites(&self) -> Vec<usize> {
        let mut v = Vec::with_capacity(self.volume());
        self.for_each_site(|s| v.push(s));
        v
    }

    /// The tripled cube 3Q: the union of the 3^d translates of Q by
    /// multiples of its side. Requires a regular cube with 3*side <= K so
    /// the translates do not self-overlap on the torus.
    pub fn tripled(&self) -> Result<Cube> {
        let side = self
            .side()
            .ok_or_else(|| Error::InvalidDomain("3Q is only defined for regular cubes".into()))?;
        let k = self.torus.k();
        if 3 * side > k {
            return Err(Error::ScaleTooLarge { ell: side, k });
        }
        let anchor = self
            .anchor
            .iter()
            .map(|&a| ((a + k - 1 - side) % k) + 1)
            .collect();
        Cube::new(self.torus, anchor, vec![3 * side; self.torus.d()])
    }

    /// The middle third Q/3, per axis I/3 = [a + ceil(r/3), a + ceil(r/3) + floor(r/3) - 1].
    pub fn middle_third(&self) -> Result<Cube> {
        let d = self.torus.d();
        let k = self.torus.k();
        let mut anchor = Vec::with_capacity(d);
        let mut lengths = Vec::with_capacity(d);
        for axis in 0..d {
            let r = self.lengths[axis];
            if r < 3 {
                return Err(Error::DegenerateCube(format!(
                    "middle third needs side >= 3, got {r}"
                )));
            }
            let lo = r.div_ceil(3);
            anchor.push((self.anchor[axis] - 1 + lo) % k + 1);
            lengths.push(r / 3);
        }
        Cube::new(self.torus, anchor, lengths)
    }

    /// Inner boundary: sites with a 1-step exit from the cube along some axis.
    /// Axes that wrap the whole torus contribute no boundary.
    pub fn boundary(&self) -> Vec<usize> {
        self.boundary_filtered(|exits| exits >= 1)
    }

    /// Flat boundary: the inner boundary with corners removed (exactly one
    /// exiting axis).
    pub fn flat_boundary(&self) -> Vec<usize> {
        self.boundary_filtered(|exits| exits == 1)
    }

    fn boundary_filtered(&self, keep: impl Fn(usize) -> bool) -> Vec<usize> {
        let d = self.torus.d();
        let k = self.torus.k();
        let mut out = Vec::new();
        let mut off = vec![0usize; d];
        loop {
            let exits = (0..d)
                .filter(|&axis| {
                    self.lengths[axis] < k
                        && (off[axis] == 0 || off[axis] == self.lengths[axis] - 1)
                })
                .count();
            if keep(exits) {
                out.push(self.site_at_offset(&off));
            }
            let mut axis = d;
            let mut done = true;
            loop {
                if axis == 0 {
                    break;
                }
                axis -= 1;
                off[axis] += 1;
                if off[axis] < self.lengths[axis] {
                    done = false;
                    break;
                }
                off[axis] = 0;
            }
            if done {
                return out;
            }
        }
    }

    /// Translate by a nonnegative offset vector (mod K).
    pub fn translated(&self, shift: &[usize]) -> Cube {
        let k = self.torus.k();
        let anchor = self
            .anchor
            .iter()
            .zip(shift)
            .map(|(&a, &s)| (a - 1 + s) % k + 1)
            .collect();
        Cube {
            torus: self.torus,
            anchor,
            lengths: self.lengths.clone(),
        }
    }
}

/// A disjoint cover of the torus by boxes of side `s` (with remainder boxes
/// along the last row of each axis), optionally translated by a shift.
#[derive(Debug, Clone)]
pub struct Partition {
    torus: Torus,
    side: usize,
    shift: Vec<usize>,
    axis_starts: Vec<usize>,
    axis_lengths: Vec<usize>,
}

/// Build the partition P(s) of the torus, shifted by `shift` (components in
/// [0, s-1]; `None` means the unshifted partition).
pub fn partition(torus: Torus, side: usize, shift: Option<&[usize]>) -> Result<Partition> {
    let k = torus.k();
    if side < 1 || side > k {
        return Err(Error::InvalidPartition(format!(
            "side {side} outside 1..={k}"
        )));
    }
    let shift = match shift {
        Some(a) => {
            if a.len() != torus.d() {
                return Err(Error::InvalidPartition(format!(
                    "shift rank {} does not match dimension {}",
                    a.len(),
                    torus.d()
                )));
            }
            for &c in a {
                if c >= side {
                    return Err(Error::InvalidPartition(format!(
                        "shift component {c} outside 0..{side}"
                    )));
                }
            }
            a.to_vec()
        }
        None => vec![0; torus.d()],
    };
    let q = k / side;
    let r = k % side;
    let mut axis_starts = Vec::with_capacity(q + 1);
    let mut axis_lengths = Vec::with_capacity(q + 1);
    for j in 0..q {
        axis_starts.push(1 + j * side);
        axis_lengths.push(side);
    }
    if r > 0 {
        axis_starts.push(1 + q * side);
        axis_lengths.push(r);
    }
    Ok(Partition {
        torus,
        side,
        shift,
        axis_starts,
        axis_lengths,
    })
}

impl Partition {
    pub fn torus(&self) -> Torus {
        self.torus
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn shift(&self) -> &[usize] {
        &self.shift
    }

    /// Number of boxes per axis.
    pub fn segments(&self) -> usize {
        self.axis_starts.len()
    }

    pub fn box_count(&self) -> usize {
        self.segments().pow(self.torus.d() as u32)
    }

    /// The boxes, lexicographic over per-axis segment indices.
    pub fn boxes(&self) -> Vec<Cube> {
        let d = self.torus.d();
        let m = self.segments();
        let k = self.torus.k();
        let mut out = Vec::with_capacity(self.box_count());
        let mut idx = vec![0usize; d];
        loop {
            let anchor: Vec<usize> = (0..d)
                .map(|axis| (self.axis_starts[idx[axis]] - 1 + self.shift[axis]) % k + 1)
                .collect();
            let lengths: Vec<usize> = (0..d).map(|axis| self.axis_lengths[idx[axis]]).collect();
            out.push(Cube {
                torus: self.torus,
                anchor,
                lengths,
            });
            let mut axis = d;
            let mut done = true;
            loop {
                if axis == 0 {
                    break;
                }
                axis -= 1;
                idx[axis] += 1;
                if idx[axis] < m {
                    done = false;
                    break;
                }
                idx[axis] = 0;
            }
            if done {
                return out;
            }
        }
    }
}

/// Plateau cut-off supported on a regular cube Q of side R >= 3: equal to 1
/// on Q/3, stepping down by 3/R on successive sup-distance shells, zero
/// outside 3(Q/3). Every forward difference on the torus has magnitude at
/// most 3/R.
pub fn cutoff(cube: &Cube) -> Result<Vec<f64>> {
    let side = cube
        .side()
        .ok_or_else(|| Error::InvalidDomain("cut-off is only defined for regular cubes".into()))?;
    if side < 3 {
        return Err(Error::DegenerateCube(format!(
            "cut-off needs side >= 3, got {side}"
        )));
    }
    let r = side as f64;
    let d = cube.torus().d();
    let j_max = side / 3;
    // Local offsets of the middle third inside the cube.
    let core_lo = side.div_ceil(3);
    let core_hi = core_lo + side / 3 - 1;

    let mut chi = vec![0.0; cube.torus().volume()];
    let mut off = vec![0usize; d];
    loop {
        let j = (0..d)
            .map(|axis| {
                let x = off[axis];
                if x < core_lo {
                    core_lo - x
                } else {
                    x.saturating_sub(core_hi)
                }
            })
            .max()
            .unwrap();
        let value = if j == 0 {
            1.0
        } else if j <= j_max {
            1.0 - 3.0 * j as f64 / r
        } else {
            0.0
        };
        chi[cube.site_at_offset(&off)] = value;
        let mut axis = d;
        let mut done = true;
        loop {
            if axis == 0 {
                break;
            }
            axis -= 1;
            off[axis] += 1;
            if off[axis] < side {
                done = false;
                break;
            }
            off[axis] = 0;
        }
        if done {
            return Ok(chi);
        }
    }
}

/// Forward differences of a field along every axis, with periodic wrap.
#[derive(Debug, Clone)]
pub struct GradientField {
    torus: Torus,
    components: Vec<Vec<f64>>,
}

pub fn gradient(torus: Torus, f: &[f64]) -> Result<GradientField> {
    if f.len() != torus.volume() {
        return Err(Error::Mismatch(format!(
            "field length {} does not match torus volume {}",
            f.len(),
            torus.volume()
        )));
    }
    let components = (0..torus.d())
        .map(|axis| {
            torus
                .sites()
                .map(|n| f[torus.neighbor(n, axis, true)] - f[n])
                .collect()
        })
        .collect();
    Ok(GradientField { torus, components })
}

impl GradientField {
    pub fn component(&self, axis: usize) -> &[f64] {
        &self.components[axis]
    }

    /// Squared norm of the gradient at a site.
    pub fn norm_sq(&self, site: usize) -> f64 {
        self.components.iter().map(|c| c[site] * c[site]).sum()
    }

    /// Sum of squared gradient norms over the torus.
    pub fn total_norm_sq(&self) -> f64 {
        self.torus.sites().map(|n| self.norm_sq(n)).sum()
    }
}
