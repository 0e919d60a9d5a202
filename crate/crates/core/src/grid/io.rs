//! Debug dumps of grid fields.
//!
//! Each component is written to its own CSV with header `i,j,value`, one row
//! per stored entry, using the face/cell indices of the MAC layout:
//! `u.csv` has `(n+1) x n` rows, `v.csv` has `n x (n+1)`, `p.csv` has `n x n`.
//! Wall values of the tangential components are not written.

use std::io::Write;

use super::{MacGrid, PressureField, VelocityField};

fn write_component<W: Write>(out: W, ni: usize, nj: usize, value: impl Fn(usize, usize) -> f64) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["i", "j", "value"])?;
    for j in 0..nj {
        for i in 0..ni {
            w.write_record([i.to_string(), j.to_string(), value(i, j).to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_u_csv<W: Write>(g: &MacGrid, w: &VelocityField, out: W) -> csv::Result<()> {
    write_component(out, g.n() + 1, g.n(), |i, j| w.u[g.u_at(i, j)])
}

pub fn write_v_csv<W: Write>(g: &MacGrid, w: &VelocityField, out: W) -> csv::Result<()> {
    write_component(out, g.n(), g.n() + 1, |i, j| w.v[g.v_at(i, j)])
}

pub fn write_p_csv<W: Write>(g: &MacGrid, p: &PressureField, out: W) -> csv::Result<()> {
    write_component(out, g.n(), g.n(), |i, j| p.p[g.cell_at(i, j)])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn u_csv_has_one_row_per_face() {
        let g = MacGrid::new(4).unwrap();
        let w = VelocityField::sample(&g, |x, _| x, |_, _| 0.0);
        let mut buf = Vec::new();
        write_u_csv(&g, &w, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "i,j,value");
        assert_eq!(lines.len(), 1 + 5 * 4);
        assert_eq!(lines[5], "4,0,1");
    }
}
