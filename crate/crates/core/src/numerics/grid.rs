use serde::{Deserialize, Serialize};

/// Topology of the 1-dimensional factor `L`.
///
/// On a `Circle` the node at `r_max` is identified with the one at `r_min`
/// and is not stored; on an `Interval` both endpoints are included.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    Circle,
    Interval,
}

/// Uniform sample grid for the coordinate `r` on `L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n: usize,
    r_min: f64,
    r_max: f64,
    topology: Topology,
}

impl Grid {
    /// Minimum number of samples; the widest stencil uses six nodes.
    pub const MIN_SAMPLES: usize = 8;

    /// # Panics
    /// Panics if `n < 8`, the endpoints are not finite, or `r_max <= r_min`.
    pub fn new(n: usize, r_min: f64, r_max: f64, topology: Topology) -> Self {
        assert!(
            n >= Self::MIN_SAMPLES,
            "grid needs at least {} samples",
            Self::MIN_SAMPLES
        );
        assert!(
            r_min.is_finite() && r_max.is_finite(),
            "grid endpoints must be finite"
        );
        assert!(r_max > r_min, "grid requires r_max > r_min");
        Grid {
            n,
            r_min,
            r_max,
            topology,
        }
    }

    pub fn circle(n: usize, r_min: f64, r_max: f64) -> Self {
        Self::new(n, r_min, r_max, Topology::Circle)
    }

    pub fn interval(n: usize, r_min: f64, r_max: f64) -> Self {
        Self::new(n, r_min, r_max, Topology::Interval)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    /// Uniform node spacing.
    pub fn spacing(&self) -> f64 {
        match self.topology {
            Topology::Circle => (self.r_max - self.r_min) / self.n as f64,
            Topology::Interval => (self.r_max - self.r_min) / (self.n - 1) as f64,
        }
    }

    pub fn node(&self, i: usize) -> f64 {
        debug_assert!(i < self.n);
        self.r_min + self.spacing() * i as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.node(i))
    }

    pub fn contains(&self, r: f64) -> bool {
        r >= self.r_min && r <= self.r_max
    }
}

/// Real-valued samples of a function of `r` on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    /// # Panics
    /// Panics if the sample count does not match the grid or any value is
    /// not finite.
    pub fn new(grid: Grid, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.len(), "field length must match grid");
        assert!(
            values.iter().all(|v| v.is_finite()),
            "field values must be finite"
        );
        Field { grid, values }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().map(f).collect();
        Self::new(grid, values)
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self::new(grid, vec![c; grid.len()])
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Pointwise combination of two fields on the same grid.
    ///
    /// # Panics
    /// Panics if the grids differ.
    pub fn zip_with(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Field {
        assert_eq!(self.grid, other.grid, "fields must share a grid");
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Field::new(self.grid, values)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, &v| m.max(v.abs()))
    }

    pub fn min_abs(&self) -> f64 {
        self.values
            .iter()
            .fold(f64::INFINITY, |m, &v| m.min(v.abs()))
    }

    /// Largest absolute pointwise difference against another field.
    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        assert_eq!(self.grid, other.grid, "fields must share a grid");
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0_f64, |m, (&a, &b)| m.max((a - b).abs()))
    }
}
