use rayon::prelude::*;

use crate::Point;

use super::{fisher_matrix, position_covariance, LocalizationError, Scenario};

/// Axis-aligned rectangle sampled on an `nx × ny` lattice, edges included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn validate(&self) -> Result<(), LocalizationError> {
        if self.nx == 0 || self.ny == 0 {
            return Err(LocalizationError::InvalidGrid("resolution must be at least 1"));
        }
        let finite = [self.x_min, self.x_max, self.y_min, self.y_max].iter().all(|v| v.is_finite());
        if !finite || self.x_max < self.x_min || self.y_max < self.y_min {
            return Err(LocalizationError::InvalidGrid("bounds must be finite and ordered"));
        }
        Ok(())
    }

    fn coord(min: f64, max: f64, n: usize, i: usize) -> f64 {
        if n == 1 {
            min
        } else {
            min + (max - min) * i as f64 / (n - 1) as f64
        }
    }

    /// Row-major point list: `y` outer, `x` inner.
    pub fn points(&self) -> Vec<Point> {
        (0..self.ny)
            .flat_map(|j| {
                let y = Self::coord(self.y_min, self.y_max, self.ny, j);
                (0..self.nx).map(move |i| Point::new(Self::coord(self.x_min, self.x_max, self.nx, i), y))
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrbValue {
    pub drms: f64,
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrbPoint {
    pub position: Point,
    /// `None` where the geometry is singular or the point sits on a station.
    pub value: Option<CrbValue>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrbGrid {
    pub spec: GridSpec,
    pub points: Vec<CrbPoint>,
}

impl CrbGrid {
    pub fn drms_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().filter_map(|p| p.value.map(|v| v.drms))
    }
}

/// CRB `drms` at every grid point. Points are evaluated in parallel; each
/// value depends only on its own point, so the result matches a sequential
/// sweep exactly.
pub fn crb_grid(spec: &GridSpec, scenario: &Scenario) -> Result<CrbGrid, LocalizationError> {
    spec.validate()?;
    let points = spec
        .points()
        .into_par_iter()
        .map(|position| CrbPoint { position, value: crb_at(&position, scenario) })
        .collect();
    Ok(CrbGrid { spec: *spec, points })
}

fn crb_at(p: &Point, scenario: &Scenario) -> Option<CrbValue> {
    let fisher = fisher_matrix(p, scenario).ok()?;
    let cov = position_covariance(&fisher).ok()?;
    Some(CrbValue { drms: cov.drms(), sigma_x: cov.sigma_x, sigma_y: cov.sigma_y, rho: cov.rho })
}
