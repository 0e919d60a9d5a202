use serde::{Deserialize, Serialize};

use super::MacGrid;

/// Dirichlet data of the lid-driven cavity: the top wall slides with
/// `lid_speed` in +x, every other wall value is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryData {
    pub lid_speed: f64,
}

impl Default for BoundaryData {
    fn default() -> Self {
        Self { lid_speed: 1.0 }
    }
}

/// Face velocities plus the tangential wall values used by the ghost cells.
///
/// Wall arrays have `n + 1` entries: `top_u[i]` and `bottom_u[i]` sit at
/// `x = i h`, `left_v[j]` and `right_v[j]` at `y = j h`. Only the entries
/// adjacent to interior faces are read by the operators.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub top_u: Vec<f64>,
    pub bottom_u: Vec<f64>,
    pub left_v: Vec<f64>,
    pub right_v: Vec<f64>,
}

impl VelocityField {
    /// All faces and wall values zero (homogeneous boundary data).
    pub fn zeros(g: &MacGrid) -> Self {
        let n = g.n();
        Self {
            u: vec![0.0; g.u_len()],
            v: vec![0.0; g.v_len()],
            top_u: vec![0.0; n + 1],
            bottom_u: vec![0.0; n + 1],
            left_v: vec![0.0; n + 1],
            right_v: vec![0.0; n + 1],
        }
    }

    /// Zero interior with the cavity boundary data imposed.
    pub fn cavity(g: &MacGrid, bc: &BoundaryData) -> Self {
        let mut w = Self::zeros(g);
        w.top_u.fill(bc.lid_speed);
        w
    }

    /// Sample `(fu, fv)` at face locations. Wall values are sampled at the
    /// wall points, so smooth fields get consistent ghost values.
    pub fn sample(g: &MacGrid, fu: impl Fn(f64, f64) -> f64, fv: impl Fn(f64, f64) -> f64) -> Self {
        let n = g.n();
        let h = g.h();
        let mut w = Self::zeros(g);
        for j in 0..n {
            for i in 0..=n {
                w.u[g.u_at(i, j)] = fu(i as f64 * h, (j as f64 + 0.5) * h);
            }
        }
        for j in 0..=n {
            for i in 0..n {
                w.v[g.v_at(i, j)] = fv((i as f64 + 0.5) * h, j as f64 * h);
            }
        }
        for k in 0..=n {
            let s = k as f64 * h;
            w.top_u[k] = fu(s, 1.0);
            w.bottom_u[k] = fu(s, 0.0);
            w.left_v[k] = fv(0.0, s);
            w.right_v[k] = fv(1.0, s);
        }
        w
    }

    /// True when every boundary face and wall value equals the cavity data exactly.
    pub fn satisfies(&self, g: &MacGrid, bc: &BoundaryData) -> bool {
        let n = g.n();
        let normal_zero = (0..n).all(|j| self.u[g.u_at(0, j)] == 0.0 && self.u[g.u_at(n, j)] == 0.0)
            && (0..n).all(|i| self.v[g.v_at(i, 0)] == 0.0 && self.v[g.v_at(i, n)] == 0.0);
        let walls = (1..n).all(|i| self.top_u[i] == bc.lid_speed && self.bottom_u[i] == 0.0)
            && (1..n).all(|j| self.left_v[j] == 0.0 && self.right_v[j] == 0.0);
        normal_zero && walls
    }

    /// `self - other`, boundary data included.
    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|a| a * s)
    }

    /// `self += s * other`, boundary data included.
    pub fn axpy(&mut self, s: f64, other: &Self) {
        for (dst, src) in self.arrays_mut().into_iter().zip(other.arrays()) {
            for (d, x) in dst.iter_mut().zip(src) {
                *d += s * x;
            }
        }
    }

    /// Linear combination `sum_i coeffs[i] * fields[i]`.
    pub fn combine(coeffs: &[f64], fields: &[&Self]) -> Self {
        assert_eq!(coeffs.len(), fields.len());
        assert!(!fields.is_empty());
        let mut out = fields[0].scale(coeffs[0]);
        for (c, f) in coeffs.iter().zip(fields).skip(1) {
            out.axpy(*c, f);
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.arrays()
            .into_iter()
            .flat_map(|a| a.iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.arrays().into_iter().flat_map(|a| a.iter()).all(|v| v.is_finite())
    }

    fn arrays(&self) -> [&[f64]; 6] {
        [&self.u, &self.v, &self.top_u, &self.bottom_u, &self.left_v, &self.right_v]
    }

    fn arrays_mut(&mut self) -> [&mut Vec<f64>; 6] {
        [
            &mut self.u,
            &mut self.v,
            &mut self.top_u,
            &mut self.bottom_u,
            &mut self.left_v,
            &mut self.right_v,
        ]
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let m = |a: &[f64]| a.iter().map(|&x| f(x)).collect::<Vec<_>>();
        Self {
            u: m(&self.u),
            v: m(&self.v),
            top_u: m(&self.top_u),
            bottom_u: m(&self.bottom_u),
            left_v: m(&self.left_v),
            right_v: m(&self.right_v),
        }
    }

    fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        let m = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect::<Vec<_>>();
        Self {
            u: m(&self.u, &other.u),
            v: m(&self.v, &other.v),
            top_u: m(&self.top_u, &other.top_u),
            bottom_u: m(&self.bottom_u, &other.bottom_u),
            left_v: m(&self.left_v, &other.left_v),
            right_v: m(&self.right_v, &other.right_v),
        }
    }
}

/// Cell-centered scalar; used for pressures, multipliers and divergences.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureField {
    pub p: Vec<f64>,
}

impl PressureField {
    pub fn zeros(g: &MacGrid) -> Self {
        Self { p: vec![0.0; g.cells()] }
    }

    pub fn mean(&self) -> f64 {
        self.p.iter().sum::<f64>() / self.p.len() as f64
    }

    /// Shift to zero mean.
    pub fn remove_mean(&mut self) {
        let m = self.mean();
        self.p.iter_mut().for_each(|x| *x -= m);
    }

    pub fn max_abs(&self) -> f64 {
        self.p.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cavity_field_satisfies_its_boundary_data() {
        let g = MacGrid::new(6).unwrap();
        let bc = BoundaryData { lid_speed: 2.5 };
        let w = VelocityField::cavity(&g, &bc);
        assert!(w.satisfies(&g, &bc));
        assert!(!w.satisfies(&g, &BoundaryData::default()));
        assert!(w.sub(&w).satisfies(&g, &BoundaryData { lid_speed: 0.0 }));
    }

    #[test]
    fn combine_with_unit_sum_keeps_lid() {
        let g = MacGrid::new(4).unwrap();
        let bc = BoundaryData::default();
        let a = VelocityField::cavity(&g, &bc);
        let mut b = a.clone();
        b.u[g.u_at(1, 1)] = 3.0;
        let c = VelocityField::combine(&[1.5, -0.5], &[&a, &b]);
        assert!(c.satisfies(&g, &bc));
        assert_eq!(c.u[g.u_at(1, 1)], -1.5);
    }

    #[test]
    fn pressure_mean_removal() {
        let mut p = PressureField { p: vec![1.0, 2.0, 3.0, 6.0] };
        p.remove_mean();
        assert!(p.mean().abs() < 1e-15);
    }
}
