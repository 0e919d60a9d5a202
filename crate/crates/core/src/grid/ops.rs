use super::{GridError, MacGrid, PressureField, VelocityField};

/// Cell-centered divergence `(u_E - u_W + v_N - v_S) / h`.
pub fn divergence(g: &MacGrid, w: &VelocityField) -> Result<PressureField, GridError> {
    g.check_velocity(w)?;
    let n = g.n();
    let inv_h = 1.0 / g.h();
    let mut out = PressureField::zeros(g);
    for j in 0..n {
        for i in 0..n {
            out.p[g.cell_at(i, j)] = (w.u[g.u_at(i + 1, j)] - w.u[g.u_at(i, j)]
                + w.v[g.v_at(i, j + 1)]
                - w.v[g.v_at(i, j)])
                * inv_h;
        }
    }
    Ok(out)
}

/// Neighbor values of interior faces, with reflected ghosts across tangential walls.
struct Stencil<'a> {
    g: &'a MacGrid,
    w: &'a VelocityField,
}

impl Stencil<'_> {
    #[inline]
    fn u_north(&self, i: usize, j: usize) -> f64 {
        let g = self.g;
        if j + 1 == g.n() {
            2.0 * self.w.top_u[i] - self.w.u[g.u_at(i, j)]
        } else {
            self.w.u[g.u_at(i, j + 1)]
        }
    }

    #[inline]
    fn u_south(&self, i: usize, j: usize) -> f64 {
        let g = self.g;
        if j == 0 {
            2.0 * self.w.bottom_u[i] - self.w.u[g.u_at(i, 0)]
        } else {
            self.w.u[g.u_at(i, j - 1)]
        }
    }

    #[inline]
    fn v_east(&self, i: usize, j: usize) -> f64 {
        let g = self.g;
        if i + 1 == g.n() {
            2.0 * self.w.right_v[j] - self.w.v[g.v_at(i, j)]
        } else {
            self.w.v[g.v_at(i + 1, j)]
        }
    }

    #[inline]
    fn v_west(&self, i: usize, j: usize) -> f64 {
        let g = self.g;
        if i == 0 {
            2.0 * self.w.left_v[j] - self.w.v[g.v_at(0, j)]
        } else {
            self.w.v[g.v_at(i - 1, j)]
        }
    }
}

/// Five-point Laplacian at every interior face; boundary entries of the
/// result are zero.
pub fn vector_laplacian(g: &MacGrid, w: &VelocityField) -> Result<VelocityField, GridError> {
    g.check_velocity(w)?;
    let n = g.n();
    let inv_h2 = 1.0 / (g.h() * g.h());
    let s = Stencil { g, w };
    let mut out = VelocityField::zeros(g);
    for j in 0..n {
        for i in 1..n {
            let c = w.u[g.u_at(i, j)];
            let sum = w.u[g.u_at(i + 1, j)] + w.u[g.u_at(i - 1, j)] + s.u_north(i, j) + s.u_south(i, j);
            out.u[g.u_at(i, j)] = (sum - 4.0 * c) * inv_h2;
        }
    }
    for j in 1..n {
        for i in 0..n {
            let c = w.v[g.v_at(i, j)];
            let sum = w.v[g.v_at(i, j + 1)] + w.v[g.v_at(i, j - 1)] + s.v_east(i, j) + s.v_west(i, j);
            out.v[g.v_at(i, j)] = (sum - 4.0 * c) * inv_h2;
        }
    }
    Ok(out)
}

/// Skew-symmetric convection of `w` by the advecting field `a`.
///
/// Each momentum control volume exchanges `F_f (w_P + w_nb) / 2` through its
/// faces, with `F_f` the centered interpolation of `a` normal to the face.
/// The diagonal of that divergence form is half the control-volume
/// divergence of `a`, which is exactly what the advective form subtracts, so
/// their average keeps only the neighbor terms:
///
/// `(C(a) w)_P = (1 / 2h) * sum_f F_f w_nb(f)`.
///
/// Fluxes through walls vanish whenever `a` has zero normal wall velocity,
/// which makes `C(a)` exactly skew-symmetric on fields with homogeneous
/// boundary data.
pub fn convect(g: &MacGrid, a: &VelocityField, w: &VelocityField) -> Result<VelocityField, GridError> {
    g.check_velocity(a)?;
    g.check_velocity(w)?;
    let n = g.n();
    let half_inv_h = 0.5 / g.h();
    let s = Stencil { g, w };
    let mut out = VelocityField::zeros(g);
    for j in 0..n {
        for i in 1..n {
            let fe = 0.5 * (a.u[g.u_at(i, j)] + a.u[g.u_at(i + 1, j)]);
            let fw = 0.5 * (a.u[g.u_at(i - 1, j)] + a.u[g.u_at(i, j)]);
            let fn_ = 0.5 * (a.v[g.v_at(i - 1, j + 1)] + a.v[g.v_at(i, j + 1)]);
            let fs = 0.5 * (a.v[g.v_at(i - 1, j)] + a.v[g.v_at(i, j)]);
            let acc = fe * w.u[g.u_at(i + 1, j)] - fw * w.u[g.u_at(i - 1, j)] + fn_ * s.u_north(i, j)
                - fs * s.u_south(i, j);
            out.u[g.u_at(i, j)] = acc * half_inv_h;
        }
    }
    for j in 1..n {
        for i in 0..n {
            let fn_ = 0.5 * (a.v[g.v_at(i, j)] + a.v[g.v_at(i, j + 1)]);
            let fs = 0.5 * (a.v[g.v_at(i, j - 1)] + a.v[g.v_at(i, j)]);
            let fe = 0.5 * (a.u[g.u_at(i + 1, j - 1)] + a.u[g.u_at(i + 1, j)]);
            let fw = 0.5 * (a.u[g.u_at(i, j - 1)] + a.u[g.u_at(i, j)]);
            let acc = fn_ * w.v[g.v_at(i, j + 1)] - fs * w.v[g.v_at(i, j - 1)] + fe * s.v_east(i, j)
                - fw * s.v_west(i, j);
            out.v[g.v_at(i, j)] = acc * half_inv_h;
        }
    }
    Ok(out)
}

/// Discrete H¹ seminorm inner product `(grad w1, grad w2)`.
///
/// Sum over stencil links of products of differences; a link to a tangential
/// wall spans half a cell and contributes `2 (w1 - wall1)(w2 - wall2)`. For
/// homogeneous boundary data this equals `h² <-Δ_h w1, w2>` over interior faces.
pub fn discrete_inner_product_h1(g: &MacGrid, w1: &VelocityField, w2: &VelocityField) -> Result<f64, GridError> {
    g.check_velocity(w1)?;
    g.check_velocity(w2)?;
    let n = g.n();
    let mut acc = 0.0;
    // u: links along x include the side-wall faces, links along y stop at the walls
    for j in 0..n {
        for i in 0..n {
            let a = g.u_at(i + 1, j);
            let b = g.u_at(i, j);
            acc += (w1.u[a] - w1.u[b]) * (w2.u[a] - w2.u[b]);
        }
    }
    for j in 0..n - 1 {
        for i in 1..n {
            let a = g.u_at(i, j + 1);
            let b = g.u_at(i, j);
            acc += (w1.u[a] - w1.u[b]) * (w2.u[a] - w2.u[b]);
        }
    }
    for i in 1..n {
        let bot = g.u_at(i, 0);
        let top = g.u_at(i, n - 1);
        acc += 2.0 * (w1.u[bot] - w1.bottom_u[i]) * (w2.u[bot] - w2.bottom_u[i]);
        acc += 2.0 * (w1.u[top] - w1.top_u[i]) * (w2.u[top] - w2.top_u[i]);
    }
    // v: the mirror image
    for j in 0..n {
        for i in 0..n {
            let a = g.v_at(i, j + 1);
            let b = g.v_at(i, j);
            acc += (w1.v[a] - w1.v[b]) * (w2.v[a] - w2.v[b]);
        }
    }
    for j in 1..n {
        for i in 0..n - 1 {
            let a = g.v_at(i + 1, j);
            let b = g.v_at(i, j);
            acc += (w1.v[a] - w1.v[b]) * (w2.v[a] - w2.v[b]);
        }
    }
    for j in 1..n {
        let left = g.v_at(0, j);
        let right = g.v_at(n - 1, j);
        acc += 2.0 * (w1.v[left] - w1.left_v[j]) * (w2.v[left] - w2.left_v[j]);
        acc += 2.0 * (w1.v[right] - w1.right_v[j]) * (w2.v[right] - w2.right_v[j]);
    }
    Ok(acc)
}
