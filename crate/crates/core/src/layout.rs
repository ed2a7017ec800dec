//! Page-level layout indicators: hierarchy deviation of the main map,
//! compactness, sight-line alignment and moment-based visual balance.

use serde::{Deserialize, Serialize};

use crate::error::AnalysisError;
use crate::mask;
use crate::model::{envelope, obb_area, obb_centroid, AxisAlignedBox, BinaryMask, ElementKind, MapElement, PageGeometry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SightLines {
    /// Both edges and the center of each envelope.
    #[default]
    EdgesAndCenter,
    EdgesOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BalanceWeight {
    /// Clipped area times lever arm to the axis.
    #[default]
    Moment,
    Area,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayoutConfig {
    /// Maximum gap between neighbouring sight lines of one cluster.
    pub tolerance: f64,
    pub sight_lines: SightLines,
    pub balance_weight: BalanceWeight,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        Self {
            tolerance: 0.01,
            sight_lines: SightLines::default(),
            balance_weight: BalanceWeight::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignmentDetail {
    pub r_horizontal: f64,
    pub r_vertical: f64,
    pub misaligned_h: u32,
    pub total_h: u32,
    pub misaligned_v: u32,
    pub total_v: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BalanceDetail {
    /// Top versus bottom, positive when the top is heavier.
    pub b_horizontal: f64,
    /// Left versus right, positive when the left is heavier.
    pub b_vertical: f64,
    pub w_top: f64,
    pub w_bottom: f64,
    pub w_left: f64,
    pub w_right: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayoutProfile {
    pub d_hier: f64,
    pub r_map: f64,
    pub alignment: AlignmentDetail,
    pub balance: BalanceDetail,
}

pub fn hierarchy_deviation(main_centroid: (f64, f64), _page: PageGeometry) -> f64 {
    let dh = (main_centroid.0 - 0.5) / 0.5;
    let dv = (main_centroid.1 - 0.5) / 0.5;
    dh.hypot(dv) / std::f64::consts::SQRT_2
}

pub fn compactness(a_map: f64, a_page: f64) -> Result<f64, AnalysisError> {
    if a_page <= 0.0 || !a_page.is_finite() {
        return Err(AnalysisError::DegeneratePage);
    }
    if !(0.0..=a_page).contains(&a_map) {
        return Err(AnalysisError::InvalidArea { a_map, a_page });
    }
    Ok(a_map / a_page)
}

fn sight_lines(lo: f64, hi: f64, mode: SightLines) -> Vec<f64> {
    match mode {
        SightLines::EdgesAndCenter => vec![lo, (lo + hi) / 2.0, hi],
        SightLines::EdgesOnly => vec![lo, hi],
    }
}

/// Returns `(misaligned, total)` for one direction. `lines` holds
/// `(coordinate, element index)`.
fn count_misaligned(mut lines: Vec<(f64, usize)>, tolerance: f64) -> (u32, u32) {
    lines.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let total = lines.len() as u32;
    let mut misaligned = 0;
    let mut start = 0;
    while start < lines.len() {
        let mut end = start + 1;
        while end < lines.len() && lines[end].0 - lines[end - 1].0 <= tolerance {
            end += 1;
        }
        let cluster = &lines[start..end];
        let first_owner = cluster[0].1;
        let mixed = cluster.iter().any(|&(_, owner)| owner != first_owner);
        if !mixed {
            misaligned += cluster.len() as u32;
        }
        start = end;
    }
    (misaligned, total)
}

pub fn alignment(elements: &[MapElement], page: PageGeometry, config: &LayoutConfig) -> AlignmentDetail {
    let envelopes: Vec<AxisAlignedBox> = elements.iter().map(|e| envelope(&e.bbox, page)).collect();
    let mut vertical = Vec::new();
    let mut horizontal = Vec::new();
    for (i, env) in envelopes.iter().enumerate() {
        vertical.extend(sight_lines(env.x_min, env.x_max, config.sight_lines).into_iter().map(|x| (x, i)));
        horizontal.extend(sight_lines(env.y_min, env.y_max, config.sight_lines).into_iter().map(|y| (y, i)));
    }
    if elements.len() < 2 {
        return AlignmentDetail {
            r_horizontal: 0.0,
            r_vertical: 0.0,
            misaligned_h: 0,
            total_h: horizontal.len() as u32,
            misaligned_v: 0,
            total_v: vertical.len() as u32,
        };
    }
    let (misaligned_v, total_v) = count_misaligned(vertical, config.tolerance);
    let (misaligned_h, total_h) = count_misaligned(horizontal, config.tolerance);
    let ratio = |c: u32, l: u32| if l == 0 { 0.0 } else { c as f64 / l as f64 };
    AlignmentDetail {
        r_horizontal: ratio(misaligned_h, total_h),
        r_vertical: ratio(misaligned_v, total_v),
        misaligned_h,
        total_h,
        misaligned_v,
        total_v,
    }
}

/// Weight of the part of `[lo, hi] x extent` lying on one side of `axis`.
fn side_weight(lo: f64, hi: f64, extent: f64, axis: f64, mode: BalanceWeight) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let area = (hi - lo) * extent;
    match mode {
        BalanceWeight::Area => area,
        BalanceWeight::Moment => area * ((lo + hi) / 2.0 - axis).abs(),
    }
}

fn normalized_difference(a: f64, b: f64) -> f64 {
    let total = a + b;
    if total > 0.0 {
        (a - b) / total
    } else {
        0.0
    }
}

pub fn visual_balance(elements: &[MapElement], page: PageGeometry, config: &LayoutConfig) -> BalanceDetail {
    let (mut top, mut bottom, mut left, mut right) = (0.0, 0.0, 0.0, 0.0);
    let mode = config.balance_weight;
    for e in elements {
        let env = envelope(&e.bbox, page);
        let (w, h) = (env.width(), env.height());
        top += side_weight(env.y_min, env.y_max.min(0.5), w, 0.5, mode);
        bottom += side_weight(env.y_min.max(0.5), env.y_max, w, 0.5, mode);
        left += side_weight(env.x_min, env.x_max.min(0.5), h, 0.5, mode);
        right += side_weight(env.x_min.max(0.5), env.x_max, h, 0.5, mode);
    }
    BalanceDetail {
        b_horizontal: normalized_difference(top, bottom),
        b_vertical: normalized_difference(left, right),
        w_top: top,
        w_bottom: bottom,
        w_left: left,
        w_right: right,
    }
}

/// All six layout indicators for one page. The main map's mask, when given,
/// supplies its centroid and area; otherwise its oriented box does.
pub fn layout_profile(
    elements: &[MapElement],
    page: PageGeometry,
    refined_mask: Option<&BinaryMask>,
    config: &LayoutConfig,
) -> Result<LayoutProfile, AnalysisError> {
    let mains: Vec<&MapElement> = elements.iter().filter(|e| e.kind == ElementKind::MainMap).collect();
    let [main] = mains.as_slice() else {
        return Err(AnalysisError::MainMapCount(mains.len()));
    };
    let (centroid, r_map) = match refined_mask {
        Some(m) => {
            let area = mask::mask_area(m) as f64;
            let page_area = m.width() as f64 * m.height() as f64;
            (mask::mask_centroid(m)?, compactness(area, page_area)?)
        }
        // Boxes may overshoot the page within the slack, so the area is capped.
        None => (obb_centroid(&main.bbox), compactness(obb_area(&main.bbox).min(1.0), 1.0)?),
    };
    Ok(LayoutProfile {
        d_hier: hierarchy_deviation(centroid, page),
        r_map,
        alignment: alignment(elements, page, config),
        balance: visual_balance(elements, page, config),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::OrientedBox;

    fn page() -> PageGeometry {
        PageGeometry::new(100, 100).unwrap()
    }

    fn el(kind: ElementKind, x: f64, y: f64, w: f64, h: f64) -> MapElement {
        MapElement::new(kind, OrientedBox::axis_aligned(x, y, w, h).unwrap())
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn hierarchy_examples() {
        assert_eq!(hierarchy_deviation((0.5, 0.5), page()), 0.0);
        assert!(close(hierarchy_deviation((0.0, 0.0), page()), 1.0));
        assert!(close(hierarchy_deviation((1.0, 1.0), page()), 1.0));
        assert!(close(hierarchy_deviation((0.75, 0.5), page()), 0.5 / 2f64.sqrt()));
    }

    #[test]
    fn compactness_examples() {
        assert_eq!(compactness(10_000.0, 10_000.0).unwrap(), 1.0);
        assert_eq!(compactness(2500.0, 10_000.0).unwrap(), 0.25);
        assert!(close(compactness(0.9 * 0.85, 1.0).unwrap(), 0.765));
        assert_eq!(compactness(1.0, 0.0), Err(AnalysisError::DegeneratePage));
        assert!(compactness(2.0, 1.0).is_err());
    }

    #[test]
    fn stacked_boxes_align_vertically_only() {
        let els = [el(ElementKind::MainMap, 0.2, 0.1, 0.6, 0.3), el(ElementKind::Legend, 0.2, 0.6, 0.6, 0.2)];
        let a = alignment(&els, page(), &LayoutConfig::default());
        assert_eq!((a.misaligned_v, a.total_v), (0, 6));
        assert_eq!((a.misaligned_h, a.total_h), (6, 6));
        assert_eq!(a.r_vertical, 0.0);
        assert_eq!(a.r_horizontal, 1.0);
    }

    #[test]
    fn single_element_is_perfectly_aligned() {
        let a = alignment(&[el(ElementKind::MainMap, 0.1, 0.1, 0.5, 0.5)], page(), &LayoutConfig::default());
        assert_eq!((a.r_horizontal, a.r_vertical), (0.0, 0.0));
    }

    #[test]
    fn shared_left_edge_only() {
        let els = [
            el(ElementKind::MainMap, 0.1, 0.1, 0.5, 0.2),
            el(ElementKind::Legend, 0.1, 0.4, 0.2, 0.1),
            el(ElementKind::Title, 0.1, 0.7, 0.35, 0.1),
        ];
        let a = alignment(&els, page(), &LayoutConfig::default());
        assert_eq!((a.misaligned_v, a.total_v), (6, 9));
        assert!((a.r_vertical - 6.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn edges_only_mode_emits_two_lines() {
        let els = [el(ElementKind::MainMap, 0.1, 0.1, 0.5, 0.2), el(ElementKind::Legend, 0.1, 0.4, 0.2, 0.1)];
        let config = LayoutConfig { sight_lines: SightLines::EdgesOnly, ..Default::default() };
        let a = alignment(&els, page(), &config);
        assert_eq!((a.misaligned_v, a.total_v), (2, 4));
    }

    #[test]
    fn huge_tolerance_aligns_everything() {
        let els = [el(ElementKind::MainMap, 0.1, 0.1, 0.5, 0.2), el(ElementKind::Legend, 0.7, 0.8, 0.2, 0.1)];
        let config = LayoutConfig { tolerance: 1.0, ..Default::default() };
        let a = alignment(&els, page(), &config);
        assert_eq!((a.r_horizontal, a.r_vertical), (0.0, 0.0));
    }

    #[test]
    fn balance_examples() {
        let config = LayoutConfig::default();
        let centered = [el(ElementKind::MainMap, 0.25, 0.25, 0.5, 0.5)];
        let b = visual_balance(&centered, page(), &config);
        assert_eq!((b.b_horizontal, b.b_vertical), (0.0, 0.0));

        let top = [el(ElementKind::Legend, 0.1, 0.1, 0.2, 0.2)];
        assert_eq!(visual_balance(&top, page(), &config).b_horizontal, 1.0);

        let mirrored = [el(ElementKind::Legend, 0.4, 0.1, 0.2, 0.2), el(ElementKind::Title, 0.4, 0.7, 0.2, 0.2)];
        assert!(visual_balance(&mirrored, page(), &config).b_horizontal.abs() < 1e-12);
    }

    #[test]
    fn area_weighting_ignores_lever_arm() {
        let config = LayoutConfig { balance_weight: BalanceWeight::Area, ..Default::default() };
        // equal areas at different distances balance under area weighting
        let els = [el(ElementKind::Legend, 0.4, 0.0, 0.2, 0.1), el(ElementKind::Title, 0.4, 0.5, 0.2, 0.1)];
        assert!(visual_balance(&els, page(), &config).b_horizontal.abs() < 1e-12);
        let moment = visual_balance(&els, page(), &LayoutConfig::default());
        assert!(moment.b_horizontal > 0.0);
    }

    #[test]
    fn full_page_main_map_is_degenerate_everywhere() {
        let els = [MapElement::new(ElementKind::MainMap, OrientedBox::new(0.5, 0.5, 1.0, 1.0, 0.0).unwrap())];
        let p = layout_profile(&els, page(), None, &LayoutConfig::default()).unwrap();
        assert_eq!(p.d_hier, 0.0);
        assert_eq!(p.r_map, 1.0);
        assert_eq!((p.alignment.r_horizontal, p.alignment.r_vertical), (0.0, 0.0));
        assert_eq!((p.balance.b_horizontal, p.balance.b_vertical), (0.0, 0.0));
        let full = BinaryMask::filled(100, 100).unwrap();
        let with_mask = layout_profile(&els, page(), Some(&full), &LayoutConfig::default()).unwrap();
        assert_eq!(with_mask, p);
    }

    #[test]
    fn main_map_with_corner_legend_matches_hand_computation() {
        // main map envelope [0.1, 0.9] x [0.1, 0.8]; legend [0.7, 0.9] x [0.85, 0.95]
        let els = [
            MapElement::new(ElementKind::MainMap, OrientedBox::new(0.5, 0.45, 0.8, 0.7, 0.0).unwrap()),
            MapElement::new(ElementKind::Legend, OrientedBox::new(0.8, 0.9, 0.2, 0.1, 0.0).unwrap()),
        ];
        let p = layout_profile(&els, page(), None, &LayoutConfig::default()).unwrap();
        let tol = 1e-12;
        assert!((p.d_hier - 0.1 / 2f64.sqrt()).abs() < tol);
        assert!((p.r_map - 0.56).abs() < tol);
        // only the shared right edge at x = 0.9 aligns
        assert_eq!((p.alignment.misaligned_v, p.alignment.total_v), (4, 6));
        assert_eq!((p.alignment.misaligned_h, p.alignment.total_h), (6, 6));
        // top: 0.32 * 0.2; bottom: 0.24 * 0.15 + 0.02 * 0.4
        assert!((p.balance.w_top - 0.064).abs() < tol);
        assert!((p.balance.w_bottom - 0.044).abs() < tol);
        assert!((p.balance.b_horizontal - 0.02 / 0.108).abs() < tol);
        // left: 0.28 * 0.2; right: 0.28 * 0.2 + 0.02 * 0.3
        assert!((p.balance.b_vertical - (-0.006 / 0.118)).abs() < tol);
    }

    #[test]
    fn typical_layout_falls_in_reported_ranges() {
        let els = [
            MapElement::new(ElementKind::MainMap, OrientedBox::new(0.5, 0.48, 0.85, 0.8, 0.0).unwrap()),
            el(ElementKind::Legend, 0.78, 0.82, 0.15, 0.12),
        ];
        let p = layout_profile(&els, page(), None, &LayoutConfig::default()).unwrap();
        assert!(p.d_hier < 0.2);
        assert!(p.r_map > 0.5);
    }

    #[test]
    fn requires_exactly_one_main_map() {
        let none = [el(ElementKind::Legend, 0.1, 0.1, 0.2, 0.2)];
        assert_eq!(
            layout_profile(&none, page(), None, &LayoutConfig::default()),
            Err(AnalysisError::MainMapCount(0))
        );
    }
}
