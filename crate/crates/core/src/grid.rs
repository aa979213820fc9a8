/// Uniform 1D grid on `[left, right]` that contains `x1 = 0` as a node.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    pub left: f64,
    pub right: f64,
    pub n_points: usize,
    pub spacing: f64,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid bounds must satisfy left < 0 < right, got [{left}, {right}]")]
    Bounds { left: f64, right: f64 },
    #[error("spacing must be positive and finite, got {0}")]
    Spacing(f64),
    #[error("spacing {h} does not divide [{left}, 0] and [0, {right}] into whole cells")]
    NotAligned { left: f64, right: f64, h: f64 },
}

fn whole_cells(len: f64, h: f64) -> Option<usize> {
    let n = (len / h).round();
    ((len / h - n).abs() <= 1e-8 * n.max(1.0)).then_some(n as usize)
}

impl Grid1D {
    pub fn new(left: f64, right: f64, spacing: f64) -> Result<Self, GridError> {
        if !(left < 0.0 && right > 0.0 && left.is_finite() && right.is_finite()) {
            return Err(GridError::Bounds { left, right });
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(GridError::Spacing(spacing));
        }
        let (Some(nl), Some(nr)) = (whole_cells(-left, spacing), whole_cells(right, spacing)) else {
            return Err(GridError::NotAligned { left, right, h: spacing });
        };
        if nl == 0 || nr == 0 {
            return Err(GridError::NotAligned { left, right, h: spacing });
        }
        Ok(Self { left, right, n_points: nl + nr + 1, spacing })
    }

    /// Index of the node at `x1 = 0`.
    pub fn interface_index(&self) -> usize {
        (-self.left / self.spacing).round() as usize
    }

    pub fn x(&self, i: usize) -> f64 {
        let i0 = self.interface_index();
        // measured from the interface so x(i0) is exactly zero
        (i as f64 - i0 as f64) * self.spacing
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.x(i)).collect()
    }

    /// Same spacing, bounds scaled by `factor` (rounded to whole cells).
    pub fn scaled_domain(&self, factor: f64) -> Result<Self, GridError> {
        let h = self.spacing;
        let nl = (self.interface_index() as f64 * factor).round();
        let nr = ((self.n_points - 1 - self.interface_index()) as f64 * factor).round();
        Self::new(-nl * h, nr * h, h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_grid_counts() {
        let g = Grid1D::new(-40.0, 40.0, 1e-3).unwrap();
        assert_eq!(g.n_points, 80_001);
        assert_eq!(g.interface_index(), 40_000);
        assert_eq!(g.x(40_000), 0.0);
        assert!((g.x(0) + 40.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_misaligned() {
        assert!(matches!(Grid1D::new(-1.05, 1.0, 0.1), Err(GridError::NotAligned { .. })));
        assert!(matches!(Grid1D::new(0.5, 1.0, 0.1), Err(GridError::Bounds { .. })));
        assert!(matches!(Grid1D::new(-1.0, 1.0, 0.0), Err(GridError::Spacing(_))));
    }

    #[test]
    fn asymmetric_grid() {
        let g = Grid1D::new(-0.3, 0.5, 0.1).unwrap();
        assert_eq!(g.n_points, 9);
        assert_eq!(g.interface_index(), 3);
        let d = g.scaled_domain(2.0).unwrap();
        assert_eq!(d.n_points, 17);
    }
}
