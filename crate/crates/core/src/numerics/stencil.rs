use super::{Field, Grid, Topology};

/// Derivative with respect to `r`.
///
/// 4th-order central differences everywhere on `Circle` grids; on `Interval`
/// grids the two nodes next to each boundary use 4th-order one-sided
/// stencils, so the result is exact for polynomials of degree <= 4. The
/// stencils are evaluated in difference form, so constants map to exact
/// zero.
pub fn diff(f: &Field) -> Field {
    let grid = f.grid();
    let n = grid.len();
    let v = f.values();
    let scale = 1.0 / (12.0 * grid.spacing());
    let mut out = vec![0.0; n];

    // (v[-2] - 8 v[-1] + 8 v[+1] - v[+2]) / (12 dr)
    let central = |m2: f64, m1: f64, p1: f64, p2: f64| scale * ((m2 - p2) + 8.0 * (p1 - m1));
    // (-25 v0 + 48 v1 - 36 v2 + 16 v3 - 3 v4) / (12 dr)
    let edge0 = |v0: f64, v1: f64, v2: f64, v3: f64, v4: f64| {
        scale * (48.0 * (v1 - v0) - 36.0 * (v2 - v0) + 16.0 * (v3 - v0) - 3.0 * (v4 - v0))
    };
    // (-3 v0 - 10 v1 + 18 v2 - 6 v3 + v4) / (12 dr)
    let edge1 = |v0: f64, v1: f64, v2: f64, v3: f64, v4: f64| {
        scale * (-3.0 * (v0 - v1) + 18.0 * (v2 - v1) - 6.0 * (v3 - v1) + (v4 - v1))
    };

    match grid.topology() {
        Topology::Circle => {
            for i in 0..n {
                out[i] = central(
                    v[(i + n - 2) % n],
                    v[(i + n - 1) % n],
                    v[(i + 1) % n],
                    v[(i + 2) % n],
                );
            }
        }
        Topology::Interval => {
            out[0] = edge0(v[0], v[1], v[2], v[3], v[4]);
            out[1] = edge1(v[0], v[1], v[2], v[3], v[4]);
            for i in 2..n - 2 {
                out[i] = central(v[i - 2], v[i - 1], v[i + 1], v[i + 2]);
            }
            // mirrored one-sided stencils at the right boundary
            out[n - 2] = -edge1(v[n - 1], v[n - 2], v[n - 3], v[n - 4], v[n - 5]);
            out[n - 1] = -edge0(v[n - 1], v[n - 2], v[n - 3], v[n - 4], v[n - 5]);
        }
    }
    Field::new(grid, out)
}

// Interval rules integrating the local quintic, scaled by dr/1440.
const Q_INT: [f64; 6] = [11.0, -93.0, 802.0, 802.0, -93.0, 11.0];
const Q_LEFT0: [f64; 6] = [475.0, 1427.0, -798.0, 482.0, -173.0, 27.0];
const Q_LEFT1: [f64; 6] = [-27.0, 637.0, 1022.0, -258.0, 77.0, -11.0];

/// Antiderivative `F(r) = \int_{r0}^{r} f(s) ds` sampled on the grid of `f`.
///
/// Node-to-node increments come from integrating the quintic through six
/// neighbouring samples, then the running sum is shifted so that `F(r0) = 0`
/// (with `r0` located by quartic interpolation when it is off-node).
///
/// # Panics
/// Panics if `r0` lies outside the grid range.
pub fn quadrature(f: &Field, r0: f64) -> Field {
    let grid = f.grid();
    assert!(
        grid.contains(r0),
        "quadrature anchor must lie inside the grid range"
    );
    let n = grid.len();
    let v = f.values();
    let scale = grid.spacing() / 1440.0;

    // increment over [node i, node i+1]
    let segment = |i: usize| -> f64 {
        match grid.topology() {
            Topology::Circle => {
                let idx = |k: isize| v[(i as isize + k).rem_euclid(n as isize) as usize];
                scale
                    * (Q_INT[0] * idx(-2)
                        + Q_INT[1] * idx(-1)
                        + Q_INT[2] * idx(0)
                        + Q_INT[3] * idx(1)
                        + Q_INT[4] * idx(2)
                        + Q_INT[5] * idx(3))
            }
            Topology::Interval => {
                let (w, base): (&[f64; 6], usize) = if i == 0 {
                    (&Q_LEFT0, 0)
                } else if i == 1 {
                    (&Q_LEFT1, 0)
                } else if i + 3 < n {
                    (&Q_INT, i - 2)
                } else if i == n - 3 {
                    // mirror of Q_LEFT1
                    return scale
                        * (Q_LEFT1[0] * v[n - 1]
                            + Q_LEFT1[1] * v[n - 2]
                            + Q_LEFT1[2] * v[n - 3]
                            + Q_LEFT1[3] * v[n - 4]
                            + Q_LEFT1[4] * v[n - 5]
                            + Q_LEFT1[5] * v[n - 6]);
                } else {
                    // mirror of Q_LEFT0 for the last interval
                    return scale
                        * (Q_LEFT0[0] * v[n - 1]
                            + Q_LEFT0[1] * v[n - 2]
                            + Q_LEFT0[2] * v[n - 3]
                            + Q_LEFT0[3] * v[n - 4]
                            + Q_LEFT0[4] * v[n - 5]
                            + Q_LEFT0[5] * v[n - 6]);
                };
                scale
                    * (w[0] * v[base]
                        + w[1] * v[base + 1]
                        + w[2] * v[base + 2]
                        + w[3] * v[base + 3]
                        + w[4] * v[base + 4]
                        + w[5] * v[base + 5])
            }
        }
    };

    let mut cum = vec![0.0; n];
    for i in 0..n - 1 {
        cum[i + 1] = cum[i] + segment(i);
    }

    // shift so the antiderivative vanishes at r0
    let offset = interpolate(grid, &cum, r0);
    Field::new(grid, cum.into_iter().map(|c| c - offset).collect())
}

/// Quartic Lagrange interpolation of grid samples at an arbitrary point.
fn interpolate(grid: Grid, values: &[f64], r: f64) -> f64 {
    let n = grid.len();
    let dr = grid.spacing();
    let x = (r - grid.r_min()) / dr;
    let i = (x.round() as isize).clamp(0, n as isize - 1) as usize;
    if (x - i as f64).abs() < 1e-12 {
        return values[i];
    }
    let lo = (i as isize - 2).clamp(0, n as isize - 5) as usize;
    let mut acc = 0.0;
    for (j, &vj) in values.iter().enumerate().skip(lo).take(5) {
        let mut l = 1.0;
        for m in lo..lo + 5 {
            if m != j {
                l *= (x - m as f64) / (j as f64 - m as f64);
            }
        }
        acc += l * vj;
    }
    acc
}
