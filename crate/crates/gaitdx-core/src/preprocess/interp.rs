//! Bilinear resampling shared by rotation and resizing.

use ndarray::Array2;

/// Samples `src` at fractional (row, col) with edge clamping. Points more
/// than half a cell outside the grid read as zero.
pub fn sample_bilinear(src: &Array2<f64>, row: f64, col: f64) -> f64 {
    let (h, w) = src.dim();
    if h == 0 || w == 0 {
        return 0.0;
    }
    if row < -0.5 || col < -0.5 || row > h as f64 - 0.5 || col > w as f64 - 0.5 {
        return 0.0;
    }
    let r0f = row.floor();
    let c0f = col.floor();
    let fr = row - r0f;
    let fc = col - c0f;
    let clamp_r = |r: i64| r.clamp(0, h as i64 - 1) as usize;
    let clamp_c = |c: i64| c.clamp(0, w as i64 - 1) as usize;
    let r0 = clamp_r(r0f as i64);
    let r1 = clamp_r(r0f as i64 + 1);
    let c0 = clamp_c(c0f as i64);
    let c1 = clamp_c(c0f as i64 + 1);
    let top = src[[r0, c0]] * (1.0 - fc) + src[[r0, c1]] * fc;
    let bottom = src[[r1, c0]] * (1.0 - fc) + src[[r1, c1]] * fc;
    top * (1.0 - fr) + bottom * fr
}

/// Rotates the matrix contents by `angle_deg` about `center = (row, col)`,
/// resampling bilinearly and clipping results at zero. A positive angle
/// increases the foot progression angle measured by the feature extractor.
pub fn rotate_about(src: &Array2<f64>, angle_deg: f64, center: (f64, f64)) -> Array2<f64> {
    let (h, w) = src.dim();
    let theta = angle_deg.to_radians();
    let (sin_t, cos_t) = theta.sin_cos();
    let mut out = Array2::<f64>::zeros((h, w));
    for i in 0..h {
        for j in 0..w {
            let dy = i as f64 - center.0;
            let dx = j as f64 - center.1;
            // Pull each output cell from the source rotated the other way.
            let sx = cos_t * dx - sin_t * dy + center.1;
            let sy = sin_t * dx + cos_t * dy + center.0;
            out[[i, j]] = sample_bilinear(src, sy, sx).max(0.0);
        }
    }
    out
}

/// Resizes `src` to `(rows, cols)` with bilinear interpolation over pixel
/// centers.
pub fn resize_bilinear(src: &Array2<f64>, rows: usize, cols: usize) -> Array2<f64> {
    let (h, w) = src.dim();
    let mut out = Array2::<f64>::zeros((rows, cols));
    if h == 0 || w == 0 || rows == 0 || cols == 0 {
        return out;
    }
    let row_scale = h as f64 / rows as f64;
    let col_scale = w as f64 / cols as f64;
    for i in 0..rows {
        let sy = ((i as f64 + 0.5) * row_scale - 0.5).clamp(0.0, (h - 1) as f64);
        for j in 0..cols {
            let sx = ((j as f64 + 0.5) * col_scale - 0.5).clamp(0.0, (w - 1) as f64);
            out[[i, j]] = sample_bilinear(src, sy, sx).max(0.0);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr2;

    #[test]
    fn sampling_at_integer_coordinates_is_exact() {
        let m = arr2(&[[1.0, 2.0], [3.0, 4.0]]);
        assert_eq!(sample_bilinear(&m, 0.0, 1.0), 2.0);
        assert_eq!(sample_bilinear(&m, 1.0, 0.0), 3.0);
    }

    #[test]
    fn sampling_midpoint_averages_neighbors() {
        let m = arr2(&[[0.0, 2.0], [4.0, 6.0]]);
        assert!((sample_bilinear(&m, 0.5, 0.5) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn rotation_by_zero_is_identity() {
        let m = arr2(&[[1.0, 2.0, 0.0], [3.0, 4.0, 1.0], [0.0, 1.0, 5.0]]);
        let rotated = rotate_about(&m, 0.0, (1.0, 1.0));
        for (a, b) in m.iter().zip(rotated.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rotation_by_360_recovers_interior() {
        let m = arr2(&[[0.0, 0.0, 0.0], [0.0, 7.0, 0.0], [0.0, 0.0, 0.0]]);
        let rotated = rotate_about(&m, 360.0, (1.0, 1.0));
        assert!((rotated[[1, 1]] - 7.0).abs() < 1e-9);
    }

    #[test]
    fn resize_of_constant_is_constant() {
        let m = Array2::from_elem((3, 5), 2.5);
        let out = resize_bilinear(&m, 7, 11);
        assert!(out.iter().all(|&v| (v - 2.5).abs() < 1e-12));
    }
}
