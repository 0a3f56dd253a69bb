//! Complex wave fields on uniform physical grids, L² metrics on them, and the
//! CSV/JSON export format shared by the assembler and the reference solvers.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Cplx, Real};

/// One uniform axis with inclusive endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis<T> {
    pub min: T,
    pub step: T,
    pub count: usize,
}

impl<T: Real> Axis<T> {
    pub fn covering(min: T, max: T, count: usize) -> Self {
        assert!(count >= 2);
        Axis { min, step: (max - min) / T::of((count - 1) as f64), count }
    }

    pub fn coord(&self, i: usize) -> T {
        self.min + self.step * T::of(i as f64)
    }

    pub fn max(&self) -> T {
        self.coord(self.count - 1)
    }

    fn close_to(&self, other: &Axis<T>) -> bool {
        let tol = T::of(1e-9) * (T::one() + self.step.abs());
        self.count == other.count
            && (self.min - other.min).abs() <= tol
            && (self.step - other.step).abs() <= tol
    }
}

/// Serializable grid description used in config files and export sidecars.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridSpec {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    pub count: Vec<usize>,
}

/// Complex-valued function sampled on a uniform grid, n ∈ {1, 2}.
#[derive(Debug, Clone)]
pub struct WaveField<T: Real> {
    axes: Vec<Axis<T>>,
    values: Vec<Cplx<T>>,
    pub t: T,
    pub eps: T,
}

impl<T: Real> WaveField<T> {
    pub fn zeros(axes: Vec<Axis<T>>, t: T, eps: T) -> Self {
        assert!(!axes.is_empty() && axes.len() <= 2);
        let len = axes.iter().map(|a| a.count).product();
        WaveField { axes, values: vec![Cplx::new(T::zero(), T::zero()); len], t, eps }
    }

    pub fn fill(axes: Vec<Axis<T>>, t: T, eps: T, mut f: impl FnMut(&[T]) -> Cplx<T>) -> Self {
        let mut field = Self::zeros(axes, t, eps);
        let coords: Vec<Vec<T>> = field.node_coords();
        for (v, y) in field.values.iter_mut().zip(&coords) {
            *v = f(y);
        }
        field
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis<T>] {
        &self.axes
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Cplx<T>] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Cplx<T>] {
        &mut self.values
    }

    /// Node coordinates in storage order (row-major over axes).
    pub fn node_coords(&self) -> Vec<Vec<T>> {
        let mut out = Vec::with_capacity(self.len());
        match self.axes.len() {
            1 => {
                for i in 0..self.axes[0].count {
                    out.push(vec![self.axes[0].coord(i)]);
                }
            }
            2 => {
                for i in 0..self.axes[0].count {
                    for j in 0..self.axes[1].count {
                        out.push(vec![self.axes[0].coord(i), self.axes[1].coord(j)]);
                    }
                }
            }
            _ => unreachable!(),
        }
        out
    }

    fn trapezoid_weight(&self, flat: usize) -> T {
        let mut w = T::one();
        let half = T::of(0.5);
        match self.axes.len() {
            1 => {
                let a = &self.axes[0];
                if flat == 0 || flat == a.count - 1 {
                    w = w * half;
                }
                w * a.step
            }
            2 => {
                let (c0, c1) = (self.axes[0].count, self.axes[1].count);
                let (i, j) = (flat / c1, flat % c1);
                if i == 0 || i == c0 - 1 {
                    w = w * half;
                }
                if j == 0 || j == c1 - 1 {
                    w = w * half;
                }
                w * self.axes[0].step * self.axes[1].step
            }
            _ => unreachable!(),
        }
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec {
            min: self.axes.iter().map(|a| a.min.as_f64()).collect(),
            max: self.axes.iter().map(|a| a.max().as_f64()).collect(),
            count: self.axes.iter().map(|a| a.count).collect(),
        }
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().map(|v| v.norm()).fold(T::zero(), T::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

/// Trapezoidal L² norm.
pub fn l2_norm<T: Real>(f: &WaveField<T>) -> T {
    let mut acc = T::zero();
    for (i, v) in f.values().iter().enumerate() {
        acc = acc + f.trapezoid_weight(i) * v.norm_sqr();
    }
    acc.sqrt()
}

/// Trapezoidal L² distance; grids must match exactly.
pub fn l2_distance<T: Real>(f: &WaveField<T>, g: &WaveField<T>) -> Result<T> {
    if f.dim() != g.dim() || f.axes.iter().zip(&g.axes).any(|(a, b)| !a.close_to(b)) {
        return Err(Error::GridMismatch);
    }
    let mut acc = T::zero();
    for (i, (a, b)) in f.values().iter().zip(g.values()).enumerate() {
        acc = acc + f.trapezoid_weight(i) * (a - b).norm_sqr();
    }
    Ok(acc.sqrt())
}

/// Writes `<base>.csv` (columns `y…, re, im`) and the `<base>.json` sidecar.
pub fn export_field<T: Real>(field: &WaveField<T>, base: &Path, k: usize) -> Result<()> {
    let mut csv = std::fs::File::create(base.with_extension("csv"))?;
    match field.dim() {
        1 => writeln!(csv, "y0,re,im")?,
        _ => writeln!(csv, "y0,y1,re,im")?,
    }
    for (y, v) in field.node_coords().iter().zip(field.values()) {
        let coords: Vec<String> = y.iter().map(|c| format!("{:.17e}", c.as_f64())).collect();
        writeln!(csv, "{},{:.17e},{:.17e}", coords.join(","), v.re.as_f64(), v.im.as_f64())?;
    }
    let sidecar = serde_json::json!({
        "t": field.t.as_f64(),
        "eps": field.eps.as_f64(),
        "k": k,
        "grid": field.grid_spec(),
    });
    std::fs::write(base.with_extension("json"), serde_json::to_string_pretty(&sidecar)?)?;
    Ok(())
}
