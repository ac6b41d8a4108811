//! Classical plantar-pressure characteristics: foot progression angle, arch
//! index, regional division, percent medial impulse, center-of-pressure
//! trajectory, and peak/mean/integrated pressure summaries.

pub mod geometry;

use crate::preprocess::{aggregate_average, aggregate_max, aggregate_sum, PressureImage};
use crate::recording::Recording;
use geometry::{common_tangents, convex_hull, GeometryError, Point};
use ndarray::Array2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("critical fraction must lie in (0, 1), got {0}")]
    BadCriticalFraction(f64),
    #[error("footprint is empty: no cell exceeds the critical value")]
    EmptyFootprint,
    #[error("the {0} sub-mask is empty; cannot build tangent hulls")]
    EmptySubmask(&'static str),
    #[error("recording carries no pressure at all (zero impulse)")]
    ZeroImpulse,
    #[error("no frame has positive total pressure")]
    AllFramesZero,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

fn check_fraction(critical_fraction: f64) -> Result<(), FeatureError> {
    if critical_fraction > 0.0 && critical_fraction < 1.0 {
        Ok(())
    } else {
        Err(FeatureError::BadCriticalFraction(critical_fraction))
    }
}

/// Boolean footprint: cells strictly above `critical_fraction` times the
/// image maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct FootprintMask {
    pub mask: Array2<bool>,
    pub critical_value: f64,
}

impl FootprintMask {
    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&m| m)
    }

    pub fn area(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Masked cell centers as geometry points (x = column, y = row).
    pub fn points(&self) -> Vec<Point> {
        self.mask
            .indexed_iter()
            .filter(|(_, &m)| m)
            .map(|((i, j), _)| Point::new(j as f64, i as f64))
            .collect()
    }

    /// Mean masked coordinate as (row, col), if any cell is masked.
    pub fn centroid(&self) -> Option<(f64, f64)> {
        let mut n = 0usize;
        let (mut sr, mut sc) = (0.0, 0.0);
        for ((i, j), &m) in self.mask.indexed_iter() {
            if m {
                n += 1;
                sr += i as f64;
                sc += j as f64;
            }
        }
        (n > 0).then(|| (sr / n as f64, sc / n as f64))
    }
}

/// Thresholds the image at `critical_fraction` of its maximum. An all-zero
/// image yields an empty mask; downstream operations reject that case.
pub fn footprint_mask(img: &PressureImage, critical_fraction: f64) -> FootprintMask {
    let critical_value = critical_fraction * img.max_value();
    let mask = img.cells.map(|&v| v > critical_value);
    FootprintMask { mask, critical_value }
}

/// Principal axis of the masked cells, oriented anterior (toward the toes).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FootAxis {
    /// (x, y) centroid of the masked cells.
    pub centroid: (f64, f64),
    /// Unit vector along the foot pointing anterior.
    pub direction: (f64, f64),
    /// Unit vector across the foot; equals +x when the axis is +y.
    pub perpendicular: (f64, f64),
}

impl FootAxis {
    /// Along-axis coordinate of a point relative to the centroid.
    pub fn along(&self, p: Point) -> f64 {
        (p.x - self.centroid.0) * self.direction.0 + (p.y - self.centroid.1) * self.direction.1
    }

    /// Across-axis coordinate; positive toward `perpendicular`.
    pub fn across(&self, p: Point) -> f64 {
        (p.x - self.centroid.0) * self.perpendicular.0
            + (p.y - self.centroid.1) * self.perpendicular.1
    }
}

/// Fits the foot axis: the largest-eigenvector direction of the masked cell
/// coordinates. The anterior sense is the axis half carrying more masked
/// area (the forefoot plus toes outweigh the heel).
pub fn foot_axis(mask: &FootprintMask) -> Option<FootAxis> {
    let points = mask.points();
    if points.is_empty() {
        return None;
    }
    let n = points.len() as f64;
    let (mx, my) = points
        .iter()
        .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
    let (mx, my) = (mx / n, my / n);
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in &points {
        let dx = p.x - mx;
        let dy = p.y - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    sxx /= n;
    sxy /= n;
    syy /= n;

    let trace_half = (sxx + syy) / 2.0;
    let det_term = (((sxx - syy) / 2.0).powi(2) + sxy * sxy).sqrt();
    let lambda = trace_half + det_term;
    let mut dir = if sxy.abs() > 1e-12 {
        (sxy, lambda - sxx)
    } else if sxx >= syy {
        (1.0, 0.0)
    } else {
        (0.0, 1.0)
    };
    let len = (dir.0 * dir.0 + dir.1 * dir.1).sqrt();
    if len < 1e-12 {
        dir = (0.0, 1.0);
    } else {
        dir = (dir.0 / len, dir.1 / len);
    }
    if dir.1 < 0.0 || (dir.1 == 0.0 && dir.0 < 0.0) {
        dir = (-dir.0, -dir.1);
    }

    let mut axis = FootAxis {
        centroid: (mx, my),
        direction: dir,
        perpendicular: (dir.1, -dir.0),
    };

    // Resolve anterior: more masked area ahead of the extent midpoint.
    let ts: Vec<f64> = points.iter().map(|&p| axis.along(p)).collect();
    let t_min = ts.iter().cloned().fold(f64::INFINITY, f64::min);
    let t_max = ts.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mid = (t_min + t_max) / 2.0;
    let ahead = ts.iter().filter(|&&t| t >= mid).count();
    let behind = ts.len() - ahead;
    if ahead < behind {
        axis.direction = (-axis.direction.0, -axis.direction.1);
        axis.perpendicular = (axis.direction.1, -axis.direction.0);
    }
    Some(axis)
}

/// The five-region standard division plus everything outside the footprint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    Heel,
    /// Medial midfoot.
    MedialMidfoot,
    /// Medial forefoot.
    MedialForefoot,
    /// Lateral midfoot.
    LateralMidfoot,
    /// Lateral forefoot.
    LateralForefoot,
    Outside,
}

/// Canonical order of the five foot regions in every regional summary.
pub const REGION_ORDER: [Region; 5] = [
    Region::Heel,
    Region::MedialMidfoot,
    Region::MedialForefoot,
    Region::LateralMidfoot,
    Region::LateralForefoot,
];

#[derive(Debug, Clone, PartialEq)]
pub struct RegionMap {
    pub assignment: Array2<Region>,
}

impl RegionMap {
    pub fn area(&self, region: Region) -> usize {
        self.assignment.iter().filter(|&&r| r == region).count()
    }
}

/// Assigns each masked cell to one of the five regions: the posterior third
/// of the axis extent is the heel, and the middle and anterior thirds are
/// split at the axis midline into medial and lateral halves. The medial side
/// comes from the image's foot metadata.
pub fn region_map(img: &PressureImage, critical_fraction: f64) -> Result<RegionMap, FeatureError> {
    check_fraction(critical_fraction)?;
    let mask = footprint_mask(img, critical_fraction);
    let axis = foot_axis(&mask).ok_or(FeatureError::EmptyFootprint)?;
    region_map_from(&mask, &axis, img.foot.medial_sign())
}

fn region_map_from(
    mask: &FootprintMask,
    axis: &FootAxis,
    medial_sign: f64,
) -> Result<RegionMap, FeatureError> {
    let points = mask.points();
    if points.is_empty() {
        return Err(FeatureError::EmptyFootprint);
    }
    let ts: Vec<f64> = points.iter().map(|&p| axis.along(p)).collect();
    let t_min = ts.iter().cloned().fold(f64::INFINITY, f64::min);
    let t_max = ts.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = t_max - t_min;

    let mut assignment = Array2::from_elem(mask.mask.dim(), Region::Outside);
    for (p, t) in points.iter().zip(ts.iter()) {
        let (i, j) = (p.y as usize, p.x as usize);
        let region = if span <= 0.0 || t - t_min < span / 3.0 {
            Region::Heel
        } else {
            let medial = medial_sign * axis.across(*p) >= 0.0;
            if t - t_min < 2.0 * span / 3.0 {
                if medial {
                    Region::MedialMidfoot
                } else {
                    Region::LateralMidfoot
                }
            } else if medial {
                Region::MedialForefoot
            } else {
                Region::LateralForefoot
            }
        };
        assignment[[i, j]] = region;
    }
    Ok(RegionMap { assignment })
}

/// Foot progression angle in degrees: the mean angle of the two outer common
/// tangents between the rearfoot hull (posterior third of the footprint
/// bounding box) and the forefoot hull (anterior third).
pub fn compute_fpa(img: &PressureImage, critical_fraction: f64) -> Result<f64, FeatureError> {
    check_fraction(critical_fraction)?;
    let mask = footprint_mask(img, critical_fraction);
    if mask.is_empty() {
        return Err(FeatureError::EmptyFootprint);
    }

    let rows: Vec<usize> = mask
        .mask
        .indexed_iter()
        .filter(|(_, &m)| m)
        .map(|((i, _), _)| i)
        .collect();
    let r0 = *rows.iter().min().unwrap();
    let r1 = *rows.iter().max().unwrap();
    let span = (r1 - r0 + 1) as f64;

    let mut rear: Vec<Point> = Vec::new();
    let mut fore: Vec<Point> = Vec::new();
    for ((i, j), &m) in mask.mask.indexed_iter() {
        if !m {
            continue;
        }
        let offset = (i - r0) as f64;
        if offset < span / 3.0 {
            rear.push(Point::new(j as f64, i as f64));
        } else if offset >= 2.0 * span / 3.0 {
            fore.push(Point::new(j as f64, i as f64));
        }
    }
    if rear.is_empty() {
        return Err(FeatureError::EmptySubmask("rearfoot"));
    }
    if fore.is_empty() {
        return Err(FeatureError::EmptySubmask("forefoot"));
    }

    let tangents = common_tangents(&convex_hull(&rear), &convex_hull(&fore))?;
    Ok((tangents.medial_deg + tangents.lateral_deg) / 2.0)
}

/// 8-connected components of the mask, each as a list of (row, col).
fn connected_components(mask: &Array2<bool>) -> Vec<Vec<(usize, usize)>> {
    let (h, w) = mask.dim();
    let mut seen = Array2::from_elem((h, w), false);
    let mut components = Vec::new();
    for i in 0..h {
        for j in 0..w {
            if !mask[[i, j]] || seen[[i, j]] {
                continue;
            }
            let mut stack = vec![(i, j)];
            let mut cells = Vec::new();
            seen[[i, j]] = true;
            while let Some((r, c)) = stack.pop() {
                cells.push((r, c));
                for dr in -1i64..=1 {
                    for dc in -1i64..=1 {
                        let (nr, nc) = (r as i64 + dr, c as i64 + dc);
                        if nr < 0 || nc < 0 || nr >= h as i64 || nc >= w as i64 {
                            continue;
                        }
                        let (nr, nc) = (nr as usize, nc as usize);
                        if mask[[nr, nc]] && !seen[[nr, nc]] {
                            seen[[nr, nc]] = true;
                            stack.push((nr, nc));
                        }
                    }
                }
            }
            components.push(cells);
        }
    }
    components
}

/// Arch index: after toe exclusion, the fraction of footprint area that lies
/// in the middle third of the axis extent. Toe exclusion removes connected
/// components smaller than 10% of the largest whose centroid lies anterior
/// to the largest component's centroid.
pub fn arch_index(img: &PressureImage, critical_fraction: f64) -> Result<f64, FeatureError> {
    check_fraction(critical_fraction)?;
    let mask = footprint_mask(img, critical_fraction);
    if mask.is_empty() {
        return Err(FeatureError::EmptyFootprint);
    }

    let axis = foot_axis(&mask).expect("nonempty mask");
    let components = connected_components(&mask.mask);
    let largest = components
        .iter()
        .enumerate()
        .max_by_key(|(_, c)| c.len())
        .map(|(idx, _)| idx)
        .expect("nonempty mask has components");
    let centroid_t = |cells: &[(usize, usize)]| -> f64 {
        let sum: f64 = cells
            .iter()
            .map(|&(i, j)| axis.along(Point::new(j as f64, i as f64)))
            .sum();
        sum / cells.len() as f64
    };
    let largest_t = centroid_t(&components[largest]);
    let largest_area = components[largest].len();

    let mut kept = mask.mask.clone();
    for (idx, cells) in components.iter().enumerate() {
        if idx == largest {
            continue;
        }
        let is_toe =
            cells.len() < largest_area / 10 + usize::from(largest_area % 10 != 0) && centroid_t(cells) > largest_t;
        if is_toe {
            for &(i, j) in cells {
                kept[[i, j]] = false;
            }
        }
    }
    let kept_mask = FootprintMask { mask: kept, critical_value: mask.critical_value };
    let axis = foot_axis(&kept_mask).ok_or(FeatureError::EmptyFootprint)?;

    let points = kept_mask.points();
    let ts: Vec<f64> = points.iter().map(|&p| axis.along(p)).collect();
    let t_min = ts.iter().cloned().fold(f64::INFINITY, f64::min);
    let t_max = ts.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = t_max - t_min;
    if span <= 0.0 {
        return Ok(0.0);
    }
    let middle = ts
        .iter()
        .filter(|&&t| t - t_min >= span / 3.0 && t - t_min < 2.0 * span / 3.0)
        .count();
    Ok(middle as f64 / ts.len() as f64)
}

/// Percent medial impulse: the share of the pressure-time impulse carried by
/// the medial midfoot and forefoot, out of the impulse over all five regions.
pub fn pmi(r: &Recording, critical_fraction: f64) -> Result<f64, FeatureError> {
    check_fraction(critical_fraction)?;
    let sum = aggregate_sum(r);
    let regions = region_map(&sum, critical_fraction)?;
    let dt = r.frame_interval();

    let mut medial = 0.0;
    let mut total = 0.0;
    for ((i, j), &region) in regions.assignment.indexed_iter() {
        if region == Region::Outside {
            continue;
        }
        let impulse = sum.cells[[i, j]] * dt;
        total += impulse;
        if region == Region::MedialMidfoot || region == Region::MedialForefoot {
            medial += impulse;
        }
    }
    if total <= 0.0 {
        return Err(FeatureError::ZeroImpulse);
    }
    Ok(100.0 * medial / total)
}

/// Pressure-weighted centroid of one frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CopPoint {
    pub frame_index: usize,
    /// Column coordinate.
    pub x: f64,
    /// Row coordinate.
    pub y: f64,
    pub total_pressure: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CopTrajectory {
    pub points: Vec<CopPoint>,
    /// Sum of consecutive Euclidean distances, in cells.
    pub path_length: f64,
    /// Mean horizontal distance between each point and the foot axis line.
    pub mean_lateral_offset: f64,
}

/// Center-of-pressure trajectory over the frames with positive total
/// pressure. The lateral offset is measured against the foot axis fitted to
/// the sum-image footprint at `critical_fraction`.
pub fn cop_trajectory(
    r: &Recording,
    critical_fraction: f64,
) -> Result<CopTrajectory, FeatureError> {
    check_fraction(critical_fraction)?;
    let mut points = Vec::new();
    for (k, frame) in r.frames.iter().enumerate() {
        let total: f64 = frame.sum();
        if total <= 0.0 {
            continue;
        }
        let (mut sx, mut sy) = (0.0, 0.0);
        for ((i, j), &v) in frame.indexed_iter() {
            sx += j as f64 * v;
            sy += i as f64 * v;
        }
        points.push(CopPoint {
            frame_index: k,
            x: sx / total,
            y: sy / total,
            total_pressure: total,
        });
    }
    if points.is_empty() {
        return Err(FeatureError::AllFramesZero);
    }

    let path_length = points
        .windows(2)
        .map(|w| ((w[1].x - w[0].x).powi(2) + (w[1].y - w[0].y).powi(2)).sqrt())
        .sum();

    let sum = aggregate_sum(r);
    let mask = footprint_mask(&sum, critical_fraction);
    let axis = foot_axis(&mask).ok_or(FeatureError::EmptyFootprint)?;
    let offset_of = |p: &CopPoint| -> f64 {
        let (dx, dy) = axis.direction;
        if dy.abs() > 1e-9 {
            let line_x = axis.centroid.0 + (p.y - axis.centroid.1) * dx / dy;
            (p.x - line_x).abs()
        } else {
            axis.across(Point::new(p.x, p.y)).abs()
        }
    };
    let mean_lateral_offset =
        points.iter().map(offset_of).sum::<f64>() / points.len() as f64;

    Ok(CopTrajectory { points, path_length, mean_lateral_offset })
}

/// Peak pressure, mean pressure and pressure-time integral images with their
/// per-region mean summaries (region order: [`REGION_ORDER`]).
#[derive(Debug, Clone, PartialEq)]
pub struct PressureSummaries {
    pub peak: PressureImage,
    pub mean: PressureImage,
    /// The sum image scaled by the frame interval; its `kind` stays `Sum`.
    pub impulse: PressureImage,
    pub peak_regional: [f64; 5],
    pub mean_regional: [f64; 5],
    pub impulse_regional: [f64; 5],
}

/// Computes PP, MP and PTI: the max image, the nonzero-mean image, and the
/// sum image times the frame interval, plus regional mean summaries over the
/// five-region division of the sum image's footprint.
pub fn pp_mp_pti(
    r: &Recording,
    critical_fraction: f64,
) -> Result<PressureSummaries, FeatureError> {
    check_fraction(critical_fraction)?;
    let peak = aggregate_max(r);
    let mean = aggregate_average(r);
    let sum = aggregate_sum(r);
    let regions = region_map(&sum, critical_fraction)?;

    let mut impulse = sum;
    let dt = r.frame_interval();
    impulse.cells.mapv_inplace(|v| v * dt);

    let regional = |img: &PressureImage| -> [f64; 5] {
        let mut out = [0.0; 5];
        for (slot, &region) in REGION_ORDER.iter().enumerate() {
            let mut total = 0.0;
            let mut count = 0usize;
            for ((i, j), &assigned) in regions.assignment.indexed_iter() {
                if assigned == region {
                    total += img.cells[[i, j]];
                    count += 1;
                }
            }
            out[slot] = if count > 0 { total / count as f64 } else { 0.0 };
        }
        out
    };

    Ok(PressureSummaries {
        peak_regional: regional(&peak),
        mean_regional: regional(&mean),
        impulse_regional: regional(&impulse),
        peak,
        mean,
        impulse,
    })
}

/// The classical characteristics of one recording.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSet {
    pub fpa_degrees: f64,
    pub arch_index: f64,
    pub pmi_percent: f64,
    pub cop_path_length: f64,
    pub cop_mean_lateral_offset: f64,
    /// Regional peak pressure in [`REGION_ORDER`].
    pub pp_regional: [f64; 5],
    /// Regional mean pressure.
    pub mp_regional: [f64; 5],
    /// Regional pressure-time integral.
    pub pti_regional: [f64; 5],
}

impl FeatureSet {
    /// Twenty numbers in the documented order: fpa, arch index, pmi, COP
    /// path length, COP mean lateral offset, then the three regional vectors.
    pub fn to_vector(&self) -> [f64; 20] {
        let mut out = [0.0; 20];
        out[0] = self.fpa_degrees;
        out[1] = self.arch_index;
        out[2] = self.pmi_percent;
        out[3] = self.cop_path_length;
        out[4] = self.cop_mean_lateral_offset;
        out[5..10].copy_from_slice(&self.pp_regional);
        out[10..15].copy_from_slice(&self.mp_regional);
        out[15..20].copy_from_slice(&self.pti_regional);
        out
    }
}

/// Extracts every classical characteristic of one recording.
pub fn compute_feature_set(
    r: &Recording,
    critical_fraction: f64,
) -> Result<FeatureSet, FeatureError> {
    check_fraction(critical_fraction)?;
    let sum = aggregate_sum(r);
    let fpa_degrees = compute_fpa(&sum, critical_fraction)?;
    let arch = arch_index(&sum, critical_fraction)?;
    let pmi_percent = pmi(r, critical_fraction)?;
    let cop = cop_trajectory(r, critical_fraction)?;
    let summaries = pp_mp_pti(r, critical_fraction)?;
    Ok(FeatureSet {
        fpa_degrees,
        arch_index: arch,
        pmi_percent,
        cop_path_length: cop.path_length,
        cop_mean_lateral_offset: cop.mean_lateral_offset,
        pp_regional: summaries.peak_regional,
        mp_regional: summaries.mean_regional,
        pti_regional: summaries.impulse_regional,
    })
}

/// The 40-dimensional baseline feature vector of one case: the left foot's
/// twenty numbers followed by the right foot's.
pub fn feature_vector(
    left: &Recording,
    right: &Recording,
    critical_fraction: f64,
) -> Result<Vec<f64>, FeatureError> {
    let l = compute_feature_set(left, critical_fraction)?;
    let r = compute_feature_set(right, critical_fraction)?;
    let mut out = Vec::with_capacity(40);
    out.extend_from_slice(&l.to_vector());
    out.extend_from_slice(&r.to_vector());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::AggregationKind;
    use crate::recording::{Foot, Label};
    use ndarray::arr2;

    fn image(cells: Array2<f64>, foot: Foot) -> PressureImage {
        PressureImage { kind: AggregationKind::Sum, cells, subject_id: "S1".into(), foot }
    }

    /// A stylized foot pointing anterior (+rows): heel blob, narrow lateral
    /// midfoot, wide forefoot.
    fn foot_image(foot: Foot) -> PressureImage {
        let mut cells = Array2::<f64>::zeros((30, 20));
        let medial = foot.medial_sign();
        let blob = |cells: &mut Array2<f64>, cy: f64, cx: f64, sy: f64, sx: f64, w: f64| {
            for i in 0..30 {
                for j in 0..20 {
                    let dy = (i as f64 - cy) / sy;
                    let dx = (j as f64 - cx) / sx;
                    cells[[i, j]] += w * (-0.5 * (dy * dy + dx * dx)).exp();
                }
            }
        };
        blob(&mut cells, 5.0, 10.0, 2.4, 2.4, 1.0); // heel
        blob(&mut cells, 13.0, 10.0 - 2.0 * medial, 3.5, 1.5, 0.55); // lateral midfoot
        blob(&mut cells, 21.0, 10.0 + 1.5 * medial, 2.2, 2.4, 1.05); // medial ball
        blob(&mut cells, 20.5, 10.0 - 2.5 * medial, 2.0, 2.0, 0.8); // lateral ball
        blob(&mut cells, 26.0, 10.0 + 1.8 * medial, 1.5, 1.4, 0.7); // hallux
        image(cells, foot)
    }

    #[test]
    fn uniform_image_masks_everything() {
        let img = image(Array2::from_elem((4, 4), 2.0), Foot::Left);
        let mask = footprint_mask(&img, 0.05);
        assert_eq!(mask.area(), 16);
        assert_eq!(mask.critical_value, 0.1);
    }

    #[test]
    fn single_nonzero_cell_masks_exactly_that_cell() {
        let mut cells = Array2::<f64>::zeros((3, 3));
        cells[[1, 2]] = 5.0;
        let mask = footprint_mask(&image(cells, Foot::Left), 0.05);
        assert_eq!(mask.area(), 1);
        assert!(mask.mask[[1, 2]]);
    }

    #[test]
    fn all_zero_image_gives_empty_mask() {
        let mask = footprint_mask(&image(Array2::zeros((3, 3)), Foot::Left), 0.05);
        assert!(mask.is_empty());
        assert!(foot_axis(&mask).is_none());
    }

    #[test]
    fn axis_of_vertical_bar_points_anterior() {
        // Bar along rows with a wider head at high rows.
        let mut cells = Array2::<f64>::zeros((12, 7));
        for i in 2..10 {
            cells[[i, 3]] = 1.0;
        }
        for j in 1..6 {
            cells[[9, j]] = 1.0;
            cells[[8, j]] = 1.0;
        }
        let mask = footprint_mask(&image(cells, Foot::Left), 0.05);
        let axis = foot_axis(&mask).unwrap();
        assert!(axis.direction.1 > 0.9, "axis should point down rows: {:?}", axis.direction);
    }

    #[test]
    fn fpa_of_symmetric_footprint_is_zero() {
        let img = foot_image(Foot::Left);
        let fpa = compute_fpa(&img, 0.05).unwrap();
        assert!(fpa.abs() <= 1.0, "fpa {fpa}");
    }

    #[test]
    fn fpa_tracks_rotation() {
        let img = foot_image(Foot::Left);
        let base = compute_fpa(&img, 0.05).unwrap();
        let rotated = PressureImage {
            cells: crate::preprocess::interp::rotate_about(&img.cells, 10.0, (15.0, 10.0)),
            ..img.clone()
        };
        let fpa = compute_fpa(&rotated, 0.05).unwrap();
        assert!((fpa - base - 10.0).abs() <= 2.0, "fpa {fpa} vs base {base}");
    }

    #[test]
    fn heel_only_strip_has_no_forefoot() {
        let mut cells = Array2::<f64>::zeros((8, 8));
        for j in 2..6 {
            cells[[3, j]] = 4.0;
        }
        match compute_fpa(&image(cells, Foot::Left), 0.05) {
            Err(FeatureError::EmptySubmask("forefoot")) => {}
            other => panic!("expected empty forefoot, got {other:?}"),
        }
    }

    #[test]
    fn arch_index_of_full_rectangle_is_a_third() {
        let img = image(Array2::from_elem((30, 10), 1.0), Foot::Left);
        let ai = arch_index(&img, 0.05).unwrap();
        assert!((ai - 1.0 / 3.0).abs() < 0.04, "ai {ai}");
    }

    #[test]
    fn arch_index_of_empty_midfoot_is_zero() {
        let mut cells = Array2::<f64>::zeros((30, 10));
        // Heel and forefoot blocks, nothing in the middle third.
        for i in 0..8 {
            for j in 2..8 {
                cells[[i, j]] = 1.0;
            }
        }
        for i in 22..30 {
            for j in 1..9 {
                cells[[i, j]] = 1.0;
            }
        }
        let ai = arch_index(&image(cells, Foot::Left), 0.05).unwrap();
        assert_eq!(ai, 0.0);
    }

    #[test]
    fn arch_index_excludes_anterior_toes() {
        // Anterior-heavy main component (narrow shaft, wide forefoot) so the
        // anterior direction resolves toward high rows.
        let mut with_toe = Array2::<f64>::zeros((32, 10));
        for i in 2..26 {
            for j in 3..7 {
                with_toe[[i, j]] = 1.0;
            }
        }
        for i in 19..26 {
            for j in 1..9 {
                with_toe[[i, j]] = 1.0;
            }
        }
        // Small detached toe blob anterior to the main component.
        with_toe[[29, 5]] = 1.0;
        with_toe[[29, 6]] = 1.0;
        let ai_with = arch_index(&image(with_toe.clone(), Foot::Left), 0.05).unwrap();
        let mut without = with_toe;
        without[[29, 5]] = 0.0;
        without[[29, 6]] = 0.0;
        let ai_without = arch_index(&image(without, Foot::Left), 0.05).unwrap();
        assert_eq!(ai_with, ai_without);
    }

    #[test]
    fn regions_partition_the_footprint() {
        let img = foot_image(Foot::Left);
        let mask = footprint_mask(&img, 0.05);
        let regions = region_map(&img, 0.05).unwrap();
        let total: usize = REGION_ORDER.iter().map(|&r| regions.area(r)).sum();
        assert_eq!(total, mask.area());
    }

    #[test]
    fn symmetric_rectangle_splits_mid_regions_evenly() {
        // Even width so no cell sits exactly on the midline.
        let img = image(Array2::from_elem((30, 8), 1.0), Foot::Left);
        let regions = region_map(&img, 0.05).unwrap();
        let mm = regions.area(Region::MedialMidfoot);
        let lm = regions.area(Region::LateralMidfoot);
        assert_eq!(mm, lm);
        assert!(regions.area(Region::Heel) > 0);
    }

    #[test]
    fn single_cell_mask_is_heel() {
        let mut cells = Array2::<f64>::zeros((6, 6));
        cells[[2, 3]] = 1.0;
        let regions = region_map(&image(cells, Foot::Left), 0.05).unwrap();
        assert_eq!(regions.area(Region::Heel), 1);
    }

    #[test]
    fn mirrored_feet_swap_medial_and_lateral() {
        let left = foot_image(Foot::Left);
        let right = foot_image(Foot::Right);
        let rl = region_map(&left, 0.05).unwrap();
        let rr = region_map(&right, 0.05).unwrap();
        assert_eq!(rl.area(Region::MedialForefoot), rr.area(Region::MedialForefoot));
        assert_eq!(rl.area(Region::LateralForefoot), rr.area(Region::LateralForefoot));
    }

    fn recording_from_frames(frames: Vec<Array2<f64>>, foot: Foot) -> Recording {
        let (h, w) = frames[0].dim();
        Recording {
            grid_width: w,
            grid_height: h,
            sample_rate_hz: 100.0,
            frames,
            subject_id: "S1".into(),
            foot,
            label: Label::Negative,
        }
    }

    #[test]
    fn pmi_counts_the_heel_in_the_denominator() {
        // A single uniform column: every cell sits on the axis midline and
        // is medial by the tie convention, but the posterior third is Heel
        // and stays in the denominator. 21 cells split 7/7/7, so exactly
        // two thirds of the impulse counts as medial.
        let mut frame = Array2::<f64>::zeros((32, 16));
        for i in 10..31 {
            frame[[i, 11]] = 3.0;
        }
        let r = recording_from_frames(vec![frame], Foot::Left);
        let value = pmi(&r, 0.05).unwrap();
        assert!((value - 100.0 * 14.0 / 21.0).abs() < 1e-9, "pmi {value}");
    }

    #[test]
    fn pmi_of_symmetric_loading_is_50() {
        // Symmetric mid+forefoot loading, tiny heel impulse.
        let mut frame = Array2::<f64>::zeros((30, 8));
        for i in 12..28 {
            for j in 1..7 {
                frame[[i, j]] = 2.0;
            }
        }
        for j in 2..6 {
            frame[[2, j]] = 0.2;
        }
        let r = recording_from_frames(vec![frame], Foot::Left);
        let value = pmi(&r, 0.05).unwrap();
        assert!((value - 50.0).abs() <= 2.0, "pmi {value}");
    }

    #[test]
    fn pmi_rejects_zero_impulse() {
        let r = recording_from_frames(vec![Array2::zeros((4, 4))], Foot::Left);
        assert!(matches!(pmi(&r, 0.05), Err(FeatureError::EmptyFootprint | FeatureError::ZeroImpulse)));
    }

    #[test]
    fn cop_of_constant_point_load_is_constant() {
        let mut frame = Array2::<f64>::zeros((6, 6));
        frame[[2, 4]] = 3.0;
        let r = recording_from_frames(vec![frame.clone(), frame.clone(), frame], Foot::Left);
        let cop = cop_trajectory(&r, 0.05).unwrap();
        assert_eq!(cop.points.len(), 3);
        assert_eq!(cop.path_length, 0.0);
        for p in &cop.points {
            assert_eq!((p.x, p.y), (4.0, 2.0));
        }
    }

    #[test]
    fn cop_path_length_of_two_point_hop() {
        let mut a = Array2::<f64>::zeros((6, 6));
        a[[1, 0]] = 1.0;
        let mut b = Array2::<f64>::zeros((6, 6));
        b[[1, 4]] = 1.0;
        let r = recording_from_frames(vec![a, b], Foot::Left);
        let cop = cop_trajectory(&r, 0.05).unwrap();
        assert!((cop.path_length - 4.0).abs() < 1e-12);
    }

    #[test]
    fn cop_rejects_all_zero_recordings() {
        let r = recording_from_frames(vec![Array2::zeros((4, 4)); 2], Foot::Left);
        assert!(matches!(cop_trajectory(&r, 0.05), Err(FeatureError::AllFramesZero)));
    }

    #[test]
    fn pti_scales_constant_pressure_by_time() {
        let frame = Array2::from_elem((10, 6), 2.0);
        let frames = vec![frame; 50];
        let r = recording_from_frames(frames, Foot::Left);
        let summaries = pp_mp_pti(&r, 0.05).unwrap();
        // 2 pressure units held for 50 frames at 100 Hz.
        let expected = 2.0 * 50.0 / 100.0;
        for &v in summaries.impulse.cells.iter() {
            assert!((v - expected).abs() < 1e-12);
        }
        assert_eq!(summaries.peak.cells, aggregate_max(&r).cells);
        assert_eq!(summaries.mean.cells, aggregate_average(&r).cells);
    }

    #[test]
    fn feature_vector_has_40_entries_and_mirrors() {
        use crate::recording::{generate_recording, subject_profile, GeneratorConfig};
        let config = GeneratorConfig { frame_count: 40, ..GeneratorConfig::default() };
        let profile = subject_profile(3, 0, Label::Negative, &config);
        let left = generate_recording(&profile, 0, Foot::Left, &config);

        // Mirror the left recording's columns to fabricate a right foot.
        let mut right = left.clone();
        right.foot = Foot::Right;
        for frame in right.frames.iter_mut() {
            let mirrored = frame.slice(ndarray::s![.., ..;-1]).to_owned();
            *frame = mirrored;
        }

        let vec = feature_vector(&left, &right, 0.05).unwrap();
        assert_eq!(vec.len(), 40);

        let l = compute_feature_set(&left, 0.05).unwrap();
        let r = compute_feature_set(&right, 0.05).unwrap();
        assert_eq!(&vec[..20], &l.to_vector());
        assert_eq!(&vec[20..], &r.to_vector());

        // Mirroring negates the angle and preserves the medial-aware scalars.
        assert!((l.fpa_degrees + r.fpa_degrees).abs() < 1.0);
        assert!((l.arch_index - r.arch_index).abs() < 0.02);
        assert!((l.pmi_percent - r.pmi_percent).abs() < 1.0);
        assert!((l.cop_path_length - r.cop_path_length).abs() < 0.3);
        for slot in 0..5 {
            assert!((l.pp_regional[slot] - r.pp_regional[slot]).abs() < 1.0);
            assert!((l.pti_regional[slot] - r.pti_regional[slot]).abs() < 1.0);
        }
    }

    #[test]
    fn features_are_scale_invariant_and_summaries_scale() {
        use crate::recording::{generate_recording, subject_profile, GeneratorConfig};
        let config = GeneratorConfig { frame_count: 30, ..GeneratorConfig::default() };
        let profile = subject_profile(8, 1, Label::Negative, &config);
        let r = generate_recording(&profile, 0, Foot::Left, &config);
        let mut scaled = r.clone();
        for frame in scaled.frames.iter_mut() {
            frame.mapv_inplace(|v| v * 3.0);
        }
        let base = compute_feature_set(&r, 0.05).unwrap();
        let big = compute_feature_set(&scaled, 0.05).unwrap();
        assert!((base.fpa_degrees - big.fpa_degrees).abs() < 1e-9);
        assert!((base.arch_index - big.arch_index).abs() < 1e-12);
        assert!((base.pmi_percent - big.pmi_percent).abs() < 1e-9);
        assert!((base.cop_path_length - big.cop_path_length).abs() < 1e-9);
        for slot in 0..5 {
            assert!((3.0 * base.pp_regional[slot] - big.pp_regional[slot]).abs() < 1e-9);
            assert!((3.0 * base.mp_regional[slot] - big.mp_regional[slot]).abs() < 1e-9);
            assert!((3.0 * base.pti_regional[slot] - big.pti_regional[slot]).abs() < 1e-9);
        }
    }
}
