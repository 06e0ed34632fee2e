//! Wigner functions of photon-added coherent states and coherent states.
//!
//! Phase space is the complex plane `z = x + iy` with measure `dx dy`, and
//! a coherent state `|α⟩` has the Gaussian `(2/π) e^{−2|z−α|²}`. With this
//! scaling the photon-added coherent state has
//!
//! ```text
//! W(z) = 2(|2z − α|² − 1) / (π(1 + |α|²)) · e^{−2|z−α|²}
//! ```
//!
//! which is negative exactly on the open disk `|z − α/2| < 1/2`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::io::{fmt_f64, json_array, json_complex, JsonObject};

pub const DEFAULT_RESOLUTION: usize = 400;

pub fn spacs_wigner(alpha: Complex64, z: Complex64) -> f64 {
    let lobe = (2.0 * z - alpha).norm_sqr() - 1.0;
    2.0 * lobe / (PI * (1.0 + alpha.norm_sqr())) * (-2.0 * (z - alpha).norm_sqr()).exp()
}

pub fn coherent_wigner(alpha: Complex64, z: Complex64) -> f64 {
    2.0 / PI * (-2.0 * (z - alpha).norm_sqr()).exp()
}

/// Single-photon Fock Wigner function, the `α → 0` limit of [`spacs_wigner`].
pub fn fock1_wigner(z: Complex64) -> f64 {
    2.0 * (4.0 * z.norm_sqr() - 1.0) * (-2.0 * z.norm_sqr()).exp() / PI
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WignerKind {
    Spacs,
    Coherent,
}

impl WignerKind {
    pub fn eval(self, alpha: Complex64, z: Complex64) -> f64 {
        match self {
            Self::Spacs => spacs_wigner(alpha, z),
            Self::Coherent => coherent_wigner(alpha, z),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Spacs => "spacs",
            Self::Coherent => "coherent",
        }
    }
}

/// Rectangular phase-space window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
}

impl Window {
    /// Square of half-width `half` centred on `center`.
    pub fn centered(center: Complex64, half: f64) -> Self {
        Self {
            x_range: (center.re - half, center.re + half),
            y_range: (center.im - half, center.im + half),
        }
    }
}

/// Wigner values at cell midpoints; row `r` holds `y_r`, column `c` holds `x_c`.
#[derive(Clone, Debug, PartialEq)]
pub struct WignerGrid {
    pub alpha: Complex64,
    pub kind: WignerKind,
    pub window: Window,
    pub resolution: usize,
    pub values: Vec<f64>,
}

impl WignerGrid {
    pub fn dx(&self) -> f64 {
        (self.window.x_range.1 - self.window.x_range.0) / self.resolution as f64
    }

    pub fn dy(&self) -> f64 {
        (self.window.y_range.1 - self.window.y_range.0) / self.resolution as f64
    }

    pub fn point(&self, row: usize, col: usize) -> Complex64 {
        Complex64::new(
            self.window.x_range.0 + (col as f64 + 0.5) * self.dx(),
            self.window.y_range.0 + (row as f64 + 0.5) * self.dy(),
        )
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.resolution + col]
    }

    /// Midpoint-rule integral of `W` over the window.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.dx() * self.dy()
    }

    /// Rows `x, y, W`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["x", "y", "W"]).expect("in-memory write");
        for row in 0..self.resolution {
            for col in 0..self.resolution {
                let z = self.point(row, col);
                w.write_record([fmt_f64(z.re), fmt_f64(z.im), fmt_f64(self.value(row, col))])
                    .expect("in-memory write");
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }

    pub fn to_json(&self) -> String {
        let rows = (0..self.resolution)
            .map(|r| json_array((0..self.resolution).map(|c| fmt_f64(self.value(r, c)))));
        let range = |(lo, hi): (f64, f64)| format!("[{},{}]", fmt_f64(lo), fmt_f64(hi));
        JsonObject::new()
            .string("kind", self.kind.name())
            .raw("alpha", &json_complex(self.alpha))
            .raw("x_range", &range(self.window.x_range))
            .raw("y_range", &range(self.window.y_range))
            .int("resolution", self.resolution as u64)
            .raw("values", &json_array(rows))
            .finish()
    }
}

pub fn wigner_grid(
    alpha: Complex64,
    window: Window,
    resolution: usize,
    kind: WignerKind,
) -> Result<WignerGrid> {
    if resolution < 2 {
        return Err(Error::InvalidInput(format!(
            "resolution must be at least 2, got {resolution}"
        )));
    }
    let (x0, x1) = window.x_range;
    let (y0, y1) = window.y_range;
    if !(x1 > x0) || !(y1 > y0) || ![x0, x1, y0, y1].iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidInput(format!("degenerate window {window:?}")));
    }
    let mut grid = WignerGrid {
        alpha,
        kind,
        window,
        resolution,
        values: vec![0.0; resolution * resolution],
    };
    let template = grid.clone();
    grid.values
        .par_chunks_mut(resolution)
        .enumerate()
        .for_each(|(row, out)| {
            for (col, v) in out.iter_mut().enumerate() {
                *v = kind.eval(alpha, template.point(row, col));
            }
        });
    Ok(grid)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NegativityMetrics {
    pub min_value: f64,
    pub min_location: Complex64,
    /// `∫∫ max(−W, 0) dx dy`.
    pub negative_volume: f64,
}

pub fn negativity_metrics(grid: &WignerGrid) -> NegativityMetrics {
    let (mut best, mut at) = (f64::INFINITY, 0usize);
    for (k, &v) in grid.values.iter().enumerate() {
        if v < best {
            best = v;
            at = k;
        }
    }
    let negative: f64 = grid.values.iter().map(|&v| (-v).max(0.0)).sum();
    NegativityMetrics {
        min_value: best,
        min_location: grid.point(at / grid.resolution, at % grid.resolution),
        negative_volume: negative * grid.dx() * grid.dy(),
    }
}

/// `W(x + 0i)` at `resolution` evenly spaced points including both ends.
pub fn major_axis_slice(
    alpha: f64,
    x_range: (f64, f64),
    resolution: usize,
) -> Result<Vec<(f64, f64)>> {
    if resolution < 2 || !(x_range.1 > x_range.0) {
        return Err(Error::InvalidInput(
            "slice needs resolution >= 2 and a non-empty range".into(),
        ));
    }
    let (lo, hi) = x_range;
    let a = Complex64::new(alpha, 0.0);
    Ok((0..resolution)
        .map(|k| {
            let x = lo + (hi - lo) * k as f64 / (resolution - 1) as f64;
            (x, spacs_wigner(a, Complex64::new(x, 0.0)))
        })
        .collect())
}

/// Slice along the axis through the origin and `α`, for complex `α`.
///
/// `W_α(z) = W_{|α|}(z e^{−i arg α})`, so the slice coordinate `t` maps to
/// `z = t e^{i arg α}`.
pub fn major_axis_slice_rotated(
    alpha: Complex64,
    t_range: (f64, f64),
    resolution: usize,
) -> Result<Vec<(f64, f64)>> {
    major_axis_slice(alpha.norm(), t_range, resolution)
}
