//! Periodic two-dimensional scalar fields.
//!
//! A [`Field`] stores `nx * ny` concentrations in row-major order: entry
//! `(i, j)` lives at `data[i * ny + j]`, with `i` the row and `j` the column.
//! Indices passed to [`Field::wrapped`] are reduced modulo the grid size, so
//! the lattice is a torus.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    nx: usize,
    ny: usize,
    data: Vec<f64>,
}

impl Field {
    pub fn new(nx: usize, ny: usize, data: Vec<f64>) -> Result<Self> {
        check_dims(nx, ny)?;
        if data.len() != nx * ny {
            return Err(Error::Dimension(format!(
                "data length {} does not match {nx}x{ny}",
                data.len()
            )));
        }
        Ok(Self { nx, ny, data })
    }

    /// Field with every entry equal to `c`.
    pub fn constant(nx: usize, ny: usize, c: f64) -> Result<Self> {
        check_dims(nx, ny)?;
        Ok(Self {
            nx,
            ny,
            data: vec![c; nx * ny],
        })
    }

    pub fn zeros(nx: usize, ny: usize) -> Result<Self> {
        Self::constant(nx, ny, 0.0)
    }

    pub fn from_fn(nx: usize, ny: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        check_dims(nx, ny)?;
        let mut data = Vec::with_capacity(nx * ny);
        for i in 0..nx {
            for j in 0..ny {
                data.push(f(i, j));
            }
        }
        Ok(Self { nx, ny, data })
    }

    #[inline]
    pub fn nx(&self) -> usize {
        self.nx
    }

    #[inline]
    pub fn ny(&self) -> usize {
        self.ny
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn same_shape(&self, other: &Field) -> bool {
        self.nx == other.nx && self.ny == other.ny
    }

    pub(crate) fn ensure_same_shape(&self, other: &Field) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::Dimension(format!(
                "{}x{} vs {}x{}",
                self.nx, self.ny, other.nx, other.ny
            )))
        }
    }

    /// Entry at `(i, j)` with periodic wrapping in both directions.
    #[inline]
    pub fn wrapped(&self, i: isize, j: isize) -> f64 {
        let i = i.rem_euclid(self.nx as isize) as usize;
        let j = j.rem_euclid(self.ny as isize) as usize;
        self.data[i * self.ny + j]
    }

    /// Cyclic shift: the result at `(i, j)` equals `self` at `(i - di, j - dj)`.
    pub fn shifted(&self, di: isize, dj: isize) -> Field {
        let mut out = self.clone();
        for i in 0..self.nx {
            for j in 0..self.ny {
                out[(i, j)] = self.wrapped(i as isize - di, j as isize - dj);
            }
        }
        out
    }

    /// Maximum absolute entry.
    pub fn sup_norm(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn min_entry(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_entry(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Sequential sum in storage order, so results are reproducible.
    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    /// Discrete integral `h² Σ f`.
    pub fn mass(&self, h: f64) -> f64 {
        h * h * self.sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.len() as f64
    }

    /// Population standard deviation of the entries.
    pub fn std_dev(&self) -> f64 {
        let mean = self.mean();
        let var = self.data.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / self.len() as f64;
        var.sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            nx: self.nx,
            ny: self.ny,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        self.ensure_same_shape(other)?;
        Ok(Field {
            nx: self.nx,
            ny: self.ny,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    /// `a * self + b * other`.
    pub fn lincomb(&self, a: f64, other: &Field, b: f64) -> Result<Field> {
        self.zip_map(other, |x, y| a * x + b * y)
    }

    pub fn scaled(&self, a: f64) -> Field {
        self.map(|x| a * x)
    }

    /// Largest absolute entry-wise difference.
    pub fn max_abs_diff(&self, other: &Field) -> Result<f64> {
        self.ensure_same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs())))
    }
}

impl Index<(usize, usize)> for Field {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.ny + j]
    }
}

impl IndexMut<(usize, usize)> for Field {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.ny + j]
    }
}

fn check_dims(nx: usize, ny: usize) -> Result<()> {
    if nx == 0 || ny == 0 {
        return Err(Error::Dimension(format!(
            "grid dimensions must be positive, got {nx}x{ny}"
        )));
    }
    Ok(())
}

/// Square periodic domain `[0, L]²` sampled with `n` points per side.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticeSpec {
    pub length: f64,
    pub n: usize,
    pub h: f64,
}

impl LatticeSpec {
    pub fn new(length: f64, n: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::Parameter(format!("domain length must be positive, got {length}")));
        }
        if n == 0 {
            return Err(Error::Parameter("lattice needs at least one point per side".into()));
        }
        Ok(Self {
            length,
            n,
            h: length / n as f64,
        })
    }

    /// Unit-spacing lattice with `n` points per side.
    pub fn unit(n: usize) -> Result<Self> {
        Self::new(n as f64, n)
    }

    /// `|Ω| = L²`.
    pub fn area(&self) -> f64 {
        self.length * self.length
    }

    pub fn cells(&self) -> usize {
        self.n * self.n
    }
}
