//! Cell-centered rectangular grids and the scalar fields sampled on them.

use std::io::{Read, Write};
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// `nx × ny` cells covering `[0, lx] × [0, ly]`; samples sit at cell centers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
}

impl Grid {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        for (name, n) in [("nx", nx), ("ny", ny)] {
            if n < 4 || n % 2 != 0 {
                return Err(Error::InvalidGrid(format!(
                    "{name} = {n}: need an even cell count of at least 4"
                )));
            }
        }
        if !(lx.is_finite() && lx > 0.0 && ly.is_finite() && ly > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "edge lengths must be positive, got {lx} x {ly}"
            )));
        }
        Ok(Self { nx, ny, lx, ly })
    }

    /// Square grid on a square domain.
    pub fn square(n: usize, l: f64) -> Result<Self> {
        Self::new(n, n, l, l)
    }

    pub fn hx(&self) -> f64 {
        self.lx / self.nx as f64
    }

    pub fn hy(&self) -> f64 {
        self.ly / self.ny as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.hx() * self.hy()
    }

    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn x(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.hx()
    }

    pub fn y(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.hy()
    }

    /// Row-major index: rows run along `y`, each row is contiguous in `x`.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }
}

/// Scalar samples on the cell centers of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.len()],
        }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Format(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Format(format!("non-finite sample {v}")));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f(x, y)` at every cell center.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.ny {
            let y = grid.y(j);
            for i in 0..grid.nx {
                values.push(f(grid.x(i), y));
            }
        }
        Self { grid, values }
    }

    pub(crate) fn from_raw(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field::from_raw(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn try_map(&self, f: impl Fn(f64) -> Result<f64>) -> Result<Field> {
        let values = self.values.iter().map(|&v| f(v)).collect::<Result<_>>()?;
        Ok(Field::from_raw(self.grid, values))
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Field {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        Field::from_raw(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn check_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: f64, x: &Field) {
        assert_eq!(self.grid, x.grid, "fields live on different grids");
        for (s, &v) in self.values.iter_mut().zip(&x.values) {
            *s += a * v;
        }
    }

    pub fn scale(&self, a: f64) -> Field {
        self.map(|v| a * v)
    }

    pub fn add_scalar(&self, c: f64) -> Field {
        self.map(|v| v + c)
    }

    /// Cell average, i.e. `(1/|Ω|) ∫ f` under the midpoint rule.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Copy with the mean removed.
    pub fn mean_free(&self) -> Field {
        let m = self.mean();
        self.add_scalar(-m)
    }

    /// Midpoint-rule `∫ f g`.
    pub fn dot(&self, other: &Field) -> f64 {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            * self.grid.cell_area()
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_area()
    }

    pub fn l2(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// `L^p` norm for finite `p ≥ 1`; `p = ∞` falls through to [`Field::linf`].
    pub fn lp(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.linf();
        }
        let linf = self.linf();
        if linf == 0.0 {
            return 0.0;
        }
        // Scaled by the max to keep high powers representable.
        let s: f64 = self.values.iter().map(|v| (v.abs() / linf).powf(p)).sum();
        linf * (s * self.grid.cell_area()).powf(1.0 / p)
    }

    pub fn linf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Writes the binary snapshot format: magic `HDCH`, `u32` version 1,
    /// `u32` nx, `u32` ny, `f64` lx, `f64` ly, then the samples row-major,
    /// everything little-endian.
    pub fn write_snapshot(&self, mut w: impl Write) -> Result<()> {
        let g = &self.grid;
        w.write_all(SNAPSHOT_MAGIC)?;
        w.write_all(&SNAPSHOT_VERSION.to_le_bytes())?;
        w.write_all(&(g.nx as u32).to_le_bytes())?;
        w.write_all(&(g.ny as u32).to_le_bytes())?;
        w.write_all(&g.lx.to_le_bytes())?;
        w.write_all(&g.ly.to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_snapshot(mut r: impl Read) -> Result<Field> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != SNAPSHOT_MAGIC {
            return Err(Error::Format("bad snapshot magic".into()));
        }
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        let mut read_u32 = |r: &mut dyn Read| -> Result<u32> {
            r.read_exact(&mut b4)?;
            Ok(u32::from_le_bytes(b4))
        };
        let version = read_u32(&mut r)?;
        if version != SNAPSHOT_VERSION {
            return Err(Error::Format(format!("unsupported snapshot version {version}")));
        }
        let nx = read_u32(&mut r)? as usize;
        let ny = read_u32(&mut r)? as usize;
        let mut read_f64 = |r: &mut dyn Read| -> Result<f64> {
            r.read_exact(&mut b8)?;
            Ok(f64::from_le_bytes(b8))
        };
        let lx = read_f64(&mut r)?;
        let ly = read_f64(&mut r)?;
        let grid = Grid::new(nx, ny, lx, ly)?;
        let mut values = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            values.push(read_f64(&mut r)?);
        }
        Field::from_values(grid, values)
    }
}

const SNAPSHOT_MAGIC: &[u8; 4] = b"HDCH";
const SNAPSHOT_VERSION: u32 = 1;

impl Add for &Field {
    type Output = Field;
    fn add(self, rhs: &Field) -> Field {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &Field {
    type Output = Field;
    fn sub(self, rhs: &Field) -> Field {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl Mul for &Field {
    type Output = Field;
    fn mul(self, rhs: &Field) -> Field {
        self.zip_map(rhs, |a, b| a * b)
    }
}

impl Neg for &Field {
    type Output = Field;
    fn neg(self) -> Field {
        self.map(|v| -v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(2, 8, 1.0, 1.0).is_err());
        assert!(Grid::new(8, 7, 1.0, 1.0).is_err());
        assert!(Grid::new(8, 8, 0.0, 1.0).is_err());
        assert!(Grid::new(8, 8, 1.0, f64::NAN).is_err());
        assert!(Grid::new(4, 6, 1.0, 2.0).is_ok());
    }

    #[test]
    fn mean_of_constant_and_odd_mode() {
        let g = Grid::new(16, 12, 2.0, 3.0).unwrap();
        assert_eq!(Field::constant(g, 0.25).mean(), 0.25);
        let f = Field::from_fn(g, |x, _| (std::f64::consts::PI * x / g.lx).cos());
        assert!(f.mean().abs() < 1e-15);
    }

    #[test]
    fn mean_matches_naive_sum() {
        let g = Grid::new(32, 16, 1.0, 1.0).unwrap();
        let f = Field::from_fn(g, |x, y| (13.0 * x).sin() * (7.0 * y + x * y).exp());
        let mut naive = 0.0;
        for j in 0..g.ny {
            for i in 0..g.nx {
                naive += f.get(i, j) * g.hx() * g.hy();
            }
        }
        naive /= g.area();
        assert!((f.mean() - naive).abs() <= 1e-14 * naive.abs());
    }

    #[test]
    fn lp_norms_of_constant() {
        let g = Grid::new(8, 8, 2.0, 0.5).unwrap();
        let f = Field::constant(g, -3.0);
        for p in [1.0, 2.0, 4.0, 8.0] {
            let expect = 3.0 * g.area().powf(1.0 / p);
            assert!((f.lp(p) - expect).abs() < 1e-13 * expect);
        }
        assert_eq!(f.lp(f64::INFINITY), 3.0);
        assert_eq!(Field::zeros(g).lp(4.0), 0.0);
    }

    #[test]
    fn snapshot_layout_is_bit_exact() {
        let g = Grid::new(4, 6, 1.5, 2.5).unwrap();
        let f = Field::from_fn(g, |x, y| x - 2.0 * y);
        let mut buf = Vec::new();
        f.write_snapshot(&mut buf).unwrap();
        assert_eq!(buf.len(), 4 + 4 * 3 + 8 * 2 + 8 * 24);
        assert_eq!(&buf[..4], b"HDCH");
        assert_eq!(&buf[4..8], &1u32.to_le_bytes());
        assert_eq!(&buf[8..12], &4u32.to_le_bytes());
        assert_eq!(&buf[12..16], &6u32.to_le_bytes());
        assert_eq!(&buf[16..24], &1.5f64.to_le_bytes());
        assert_eq!(&buf[24..32], &2.5f64.to_le_bytes());
        // Second sample is cell (1, 0).
        assert_eq!(&buf[40..48], &f.get(1, 0).to_le_bytes());
        let back = Field::read_snapshot(&buf[..]).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn snapshot_rejects_garbage() {
        assert!(Field::read_snapshot(&b"NOPE\x01\0\0\0"[..]).is_err());
        assert!(Field::read_snapshot(&b"HDCH"[..]).is_err());
    }
}
