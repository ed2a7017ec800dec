//! Main-map mask refinement: connected-component labeling, largest-component
//! retention, and pixel-exact area and centroid.

use crate::error::AnalysisError;
use crate::model::BinaryMask;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Connectivity {
    Four,
    #[default]
    Eight,
}

/// Labels are dense `1..=K` in order of first appearance in a row-major scan;
/// 0 is background. `component_sizes[k - 1]` is the size of label `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentLabeling {
    pub width: u32,
    pub height: u32,
    pub labels: Vec<u32>,
    pub component_sizes: Vec<u64>,
}

impl ComponentLabeling {
    pub fn count(&self) -> usize {
        self.component_sizes.len()
    }

    pub fn label_at(&self, row: u32, col: u32) -> u32 {
        self.labels[row as usize * self.width as usize + col as usize]
    }
}

struct DisjointSet {
    parent: Vec<u32>,
}

impl DisjointSet {
    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    // Keeps the smaller provisional label as root so first-seen order survives.
    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi as usize] = lo;
        }
    }
}

/// Two-pass union-find labeling.
pub fn label_components(mask: &BinaryMask, connectivity: Connectivity) -> ComponentLabeling {
    let w = mask.width() as usize;
    let h = mask.height() as usize;
    let bits = mask.bits();
    let mut provisional = vec![0u32; w * h];
    let mut sets = DisjointSet { parent: vec![0] };

    for row in 0..h {
        for col in 0..w {
            let idx = row * w + col;
            if !bits[idx] {
                continue;
            }
            let mut neighbours = [0u32; 4];
            let mut n = 0;
            let mut push = |label: u32| {
                if label != 0 {
                    neighbours[n] = label;
                    n += 1;
                }
            };
            if col > 0 {
                push(provisional[idx - 1]);
            }
            if row > 0 {
                push(provisional[idx - w]);
                if connectivity == Connectivity::Eight {
                    if col > 0 {
                        push(provisional[idx - w - 1]);
                    }
                    if col + 1 < w {
                        push(provisional[idx - w + 1]);
                    }
                }
            }
            let neighbours = &neighbours[..n];
            match neighbours.iter().min() {
                None => {
                    let fresh = sets.parent.len() as u32;
                    sets.parent.push(fresh);
                    provisional[idx] = fresh;
                }
                Some(&lowest) => {
                    provisional[idx] = lowest;
                    for &other in neighbours {
                        sets.union(lowest, other);
                    }
                }
            }
        }
    }

    // Resolve roots and renumber densely in scan order.
    let mut dense = vec![0u32; sets.parent.len()];
    let mut sizes = Vec::new();
    let mut labels = vec![0u32; w * h];
    for idx in 0..w * h {
        let p = provisional[idx];
        if p == 0 {
            continue;
        }
        let root = sets.find(p) as usize;
        if dense[root] == 0 {
            sizes.push(0);
            dense[root] = sizes.len() as u32;
        }
        let label = dense[root];
        labels[idx] = label;
        sizes[label as usize - 1] += 1;
    }

    ComponentLabeling {
        width: mask.width(),
        height: mask.height(),
        labels,
        component_sizes: sizes,
    }
}

/// Keep only the largest 8-connected component. Equal sizes resolve to the
/// component reached first in a row-major scan.
pub fn refine_main_mask(mask: &BinaryMask) -> Result<BinaryMask, AnalysisError> {
    let labeling = label_components(mask, Connectivity::Eight);
    let mut best: Option<(usize, u64)> = None;
    for (i, &size) in labeling.component_sizes.iter().enumerate() {
        if best.is_none_or(|(_, s)| size > s) {
            best = Some((i, size));
        }
    }
    let (keep, _) = best.ok_or(AnalysisError::EmptyMask)?;
    let keep = keep as u32 + 1;
    let bits = labeling.labels.iter().map(|&l| l == keep).collect();
    Ok(BinaryMask::from_bits(mask.width(), mask.height(), bits).expect("same dimensions"))
}

pub fn mask_area(mask: &BinaryMask) -> u64 {
    mask.bits().iter().filter(|&&b| b).count() as u64
}

/// Mean of foreground pixel centers, normalized: pixel `(i, j)` sits at
/// `((j + 0.5) / W, (i + 0.5) / H)`.
pub fn mask_centroid(mask: &BinaryMask) -> Result<(f64, f64), AnalysisError> {
    let w = mask.width() as usize;
    let mut count = 0u64;
    // Sums of doubled pixel-center coordinates stay integral.
    let mut sum_x2 = 0u128;
    let mut sum_y2 = 0u128;
    for (idx, _) in mask.bits().iter().enumerate().filter(|(_, &b)| b) {
        let (row, col) = (idx / w, idx % w);
        count += 1;
        sum_x2 += 2 * col as u128 + 1;
        sum_y2 += 2 * row as u128 + 1;
    }
    if count == 0 {
        return Err(AnalysisError::EmptyMask);
    }
    let x = sum_x2 as f64 / (2.0 * count as f64 * mask.width() as f64);
    let y = sum_y2 as f64 / (2.0 * count as f64 * mask.height() as f64);
    Ok((x, y))
}

/// Square-window erosion: a pixel survives when every pixel within Chebyshev
/// distance `radius` is foreground. Pixels outside the raster count as
/// background.
pub fn erode(mask: &BinaryMask, radius: u32) -> BinaryMask {
    if radius == 0 {
        return mask.clone();
    }
    let (w, h) = (mask.width() as i64, mask.height() as i64);
    let r = radius as i64;
    BinaryMask::from_fn(mask.width(), mask.height(), |row, col| {
        let (row, col) = (row as i64, col as i64);
        if row < r || col < r || row + r >= h || col + r >= w {
            return false;
        }
        (row - r..=row + r).all(|y| (col - r..=col + r).all(|x| mask.get(y as u32, x as u32)))
    })
    .expect("same dimensions")
}

/// Pixelwise AND of two equally sized masks.
pub fn intersect(a: &BinaryMask, b: &BinaryMask) -> Result<BinaryMask, AnalysisError> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(AnalysisError::DimensionMismatch {
            image: (a.width(), a.height()),
            mask: (b.width(), b.height()),
        });
    }
    let bits = a.bits().iter().zip(b.bits()).map(|(&x, &y)| x && y).collect();
    Ok(BinaryMask::from_bits(a.width(), a.height(), bits).expect("same dimensions"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(rows: &[&str]) -> BinaryMask {
        let h = rows.len() as u32;
        let w = rows[0].len() as u32;
        BinaryMask::from_fn(w, h, |r, c| rows[r as usize].as_bytes()[c as usize] == b'#').unwrap()
    }

    #[test]
    fn empty_mask_has_no_components() {
        let m = BinaryMask::new(5, 4).unwrap();
        assert_eq!(label_components(&m, Connectivity::Eight).count(), 0);
        assert_eq!(refine_main_mask(&m), Err(AnalysisError::EmptyMask));
        assert_eq!(mask_centroid(&m), Err(AnalysisError::EmptyMask));
    }

    #[test]
    fn diagonal_pixels_depend_on_connectivity() {
        let m = parse(&["#.", ".#"]);
        assert_eq!(label_components(&m, Connectivity::Eight).count(), 1);
        assert_eq!(label_components(&m, Connectivity::Four).count(), 2);
        let anti = parse(&[".#", "#."]);
        assert_eq!(label_components(&anti, Connectivity::Eight).count(), 1);
    }

    #[test]
    fn u_shape_merges_through_union() {
        let m = parse(&["#.#", "#.#", "###"]);
        let lab = label_components(&m, Connectivity::Four);
        assert_eq!(lab.count(), 1);
        assert_eq!(lab.component_sizes, vec![7]);
    }

    #[test]
    fn labels_are_dense_in_scan_order() {
        let m = parse(&["..#", "#..", "..#"]);
        let lab = label_components(&m, Connectivity::Four);
        assert_eq!(lab.label_at(0, 2), 1);
        assert_eq!(lab.label_at(1, 0), 2);
        assert_eq!(lab.label_at(2, 2), 3);
    }

    #[test]
    fn refine_keeps_single_blob() {
        let m = parse(&["....", ".##.", ".##.", "...."]);
        assert_eq!(refine_main_mask(&m).unwrap(), m);
    }

    #[test]
    fn refine_drops_speck() {
        // 500-pixel blob plus a separate 3-pixel speck
        let m = BinaryMask::from_fn(40, 40, |r, c| {
            (r < 20 && c < 25) || (r == 38 && (36..=38).contains(&c))
        })
        .unwrap();
        assert_eq!(mask_area(&m), 503);
        let refined = refine_main_mask(&m).unwrap();
        assert_eq!(mask_area(&refined), 500);
        assert!(!refined.get(38, 37));
    }

    #[test]
    fn refine_tie_takes_first_in_scan_order() {
        // Two 10-pixel blobs; the upper-right one is reached first by the scan.
        let m = BinaryMask::from_fn(12, 8, |r, c| {
            (r <= 1 && (6..11).contains(&c)) || ((4..6).contains(&r) && c < 5)
        })
        .unwrap();
        let lab = label_components(&m, Connectivity::Eight);
        assert_eq!(lab.component_sizes, vec![10, 10]);
        let refined = refine_main_mask(&m).unwrap();
        assert!(refined.get(0, 6));
        assert!(!refined.get(4, 0));
    }

    #[test]
    fn area_examples() {
        assert_eq!(mask_area(&BinaryMask::filled(10, 10).unwrap()), 100);
        assert_eq!(mask_area(&BinaryMask::new(10, 10).unwrap()), 0);
        let checker = BinaryMask::from_fn(4, 4, |r, c| (r + c) % 2 == 0).unwrap();
        assert_eq!(mask_area(&checker), 8);
    }

    #[test]
    fn centroid_examples() {
        assert_eq!(mask_centroid(&BinaryMask::filled(7, 13).unwrap()).unwrap(), (0.5, 0.5));
        let mut single = BinaryMask::new(10, 10).unwrap();
        single.set(0, 0, true);
        assert_eq!(mask_centroid(&single).unwrap(), (0.05, 0.05));
        // L shape: column 0 rows 0..4 plus row 3 cols 1..3 on a 10x10 grid.
        let l = BinaryMask::from_fn(10, 10, |r, c| (c == 0 && r < 4) || (r == 3 && c < 4)).unwrap();
        let pixels: Vec<(f64, f64)> = [(0, 0), (1, 0), (2, 0), (3, 0), (3, 1), (3, 2), (3, 3)]
            .iter()
            .map(|&(r, c)| ((c as f64 + 0.5) / 10.0, (r as f64 + 0.5) / 10.0))
            .collect();
        let ex = pixels.iter().map(|p| p.0).sum::<f64>() / 7.0;
        let ey = pixels.iter().map(|p| p.1).sum::<f64>() / 7.0;
        let (x, y) = mask_centroid(&l).unwrap();
        assert!((x - ex).abs() < 1e-15 && (y - ey).abs() < 1e-15);
    }

    #[test]
    fn erosion_shrinks_by_radius() {
        let m = parse(&[".....", ".###.", ".###.", ".###.", "....."]);
        let e = erode(&m, 1);
        assert_eq!(mask_area(&e), 1);
        assert!(e.get(2, 2));
        assert_eq!(erode(&m, 0), m);
        assert_eq!(mask_area(&erode(&BinaryMask::filled(3, 3).unwrap(), 1)), 1);
        assert_eq!(mask_area(&erode(&BinaryMask::filled(2, 2).unwrap(), 1)), 0);
    }
}
