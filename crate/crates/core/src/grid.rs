//! Uniform symmetric mesh on `[-L, L]` and the finite-difference operators
//! defined on it.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finite-difference approximation of the second derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stencil {
    /// 3-point, `O(h^2)`.
    Second,
    /// 5-point, `O(h^4)`.
    #[default]
    Fourth,
}

impl Stencil {
    /// Coefficients of `-d^2/ds^2` as `[diagonal, first off-diagonal, second off-diagonal]`.
    pub fn neg_laplacian_bands(self, h: f64) -> [f64; 3] {
        let inv_h2 = 1.0 / (h * h);
        match self {
            Stencil::Second => [2.0 * inv_h2, -inv_h2, 0.0],
            Stencil::Fourth => [2.5 * inv_h2, -4.0 / 3.0 * inv_h2, inv_h2 / 12.0],
        }
    }

    pub fn bandwidth(self) -> usize {
        match self {
            Stencil::Second => 1,
            Stencil::Fourth => 2,
        }
    }

    /// Formal order of accuracy.
    pub fn order(self) -> u32 {
        match self {
            Stencil::Second => 2,
            Stencil::Fourth => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
struct GridSpec {
    half_width: f64,
    n_points: usize,
    #[serde(default)]
    stencil: Stencil,
}

/// Uniform grid `s_j = (j - (n-1)/2) h` with `h = 2L/(n-1)`.
///
/// `n_points` is odd so that `s = 0` is a node, and nodes are computed from
/// the centre outwards so that `s_j = -s_{n-1-j}` holds exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec")]
pub struct Grid {
    half_width: f64,
    n_points: usize,
    stencil: Stencil,
}

impl TryFrom<GridSpec> for Grid {
    type Error = Error;

    fn try_from(spec: GridSpec) -> Result<Self> {
        Grid::new(spec.half_width, spec.n_points).map(|g| g.with_stencil(spec.stencil))
    }
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            half_width: 12.0,
            n_points: 2001,
            stencil: Stencil::Fourth,
        }
    }
}

impl Grid {
    pub fn new(half_width: f64, n_points: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::invalid("half_width", format!("must be positive, got {half_width}")));
        }
        if n_points < 5 || n_points % 2 == 0 {
            return Err(Error::invalid(
                "n_points",
                format!("must be odd and at least 5, got {n_points}"),
            ));
        }
        Ok(Grid {
            half_width,
            n_points,
            stencil: Stencil::default(),
        })
    }

    pub fn with_stencil(mut self, stencil: Stencil) -> Self {
        self.stencil = stencil;
        self
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn stencil(&self) -> Stencil {
        self.stencil
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.n_points - 1) as f64
    }

    /// Index of the node at `s = 0`.
    pub fn centre(&self) -> usize {
        (self.n_points - 1) / 2
    }

    pub fn node(&self, j: usize) -> f64 {
        let offset = j as isize - self.centre() as isize;
        if offset.unsigned_abs() == self.centre() {
            return self.half_width.copysign(offset as f64);
        }
        offset as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.node(j)).collect()
    }

    /// Composite trapezoidal rule over the full grid.
    pub fn trapezoid(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.n_points);
        let n = values.len();
        let inner: f64 = values[1..n - 1].iter().sum();
        self.spacing() * (inner + 0.5 * (values[0] + values[n - 1]))
    }

    /// Applies `-d^2/ds^2` with homogeneous Dirichlet conditions: samples at
    /// the two boundary nodes and beyond are taken as zero, and the output is
    /// zero on the boundary.
    pub fn apply_neg_laplacian<T>(&self, u: &[T], out: &mut [T])
    where
        T: Copy + Default + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
    {
        let n = self.n_points;
        debug_assert_eq!(u.len(), n);
        debug_assert_eq!(out.len(), n);
        let [d, o1, o2] = self.stencil.neg_laplacian_bands(self.spacing());
        let at = |j: isize| -> T {
            if j <= 0 || j >= n as isize - 1 {
                T::default()
            } else {
                u[j as usize]
            }
        };
        out[0] = T::default();
        out[n - 1] = T::default();
        for j in 1..n - 1 {
            let i = j as isize;
            let mut v = u[j] * d + (at(i - 1) + at(i + 1)) * o1;
            if o2 != 0.0 {
                v = v + (at(i - 2) + at(i + 2)) * o2;
            }
            out[j] = v;
        }
    }

    /// Quadratic form `h sum_j conj(u_j) (-D w)_j` of [`Self::apply_neg_laplacian`],
    /// evaluated as a sum of difference products so that no `O(1/h^2)` terms
    /// cancel.
    pub fn dirichlet_form<T>(&self, u: &[T], w: &[T], conj: impl Fn(T) -> T) -> T
    where
        T: Copy + Default + Add<Output = T> + Sub<Output = T> + Mul<Output = T> + Mul<f64, Output = T>,
    {
        let n = self.n_points;
        let h = self.spacing();
        let at = |v: &[T], j: usize| -> T {
            if j == 0 || j == n - 1 {
                T::default()
            } else {
                v[j]
            }
        };
        // <Gu, Gw> with forward differences equals the 3-point form
        let mut second = T::default();
        for j in 0..n - 1 {
            let du = at(u, j + 1) - at(u, j);
            let dw = at(w, j + 1) - at(w, j);
            second = second + conj(du) * dw;
        }
        let second = second * (1.0 / h);
        match self.stencil {
            Stencil::Second => second,
            Stencil::Fourth => {
                // 5-point operator = A2 + (h^2/12) (A2^2 + corner terms), A2 the 3-point one
                let mut curvature = T::default();
                for j in 1..n - 1 {
                    let lu = at(u, j - 1) - at(u, j) * 2.0 + at(u, j + 1);
                    let lw = at(w, j - 1) - at(w, j) * 2.0 + at(w, j + 1);
                    curvature = curvature + conj(lu) * lw;
                }
                let corners = conj(at(u, 1)) * at(w, 1) + conj(at(u, n - 2)) * at(w, n - 2);
                second + (curvature + corners) * (1.0 / (12.0 * h))
            }
        }
    }
}
