//! Independent reference implementations used by the integration tests.
//! Each favours obviousness over speed.

#![allow(dead_code)]

use std::collections::VecDeque;

use mapdesign::color::HueThresholds;
use mapdesign::cooccur::{FrequentItemset, ItemSet, Transaction};
use mapdesign::model::{BinaryMask, ElementKind};
use mapdesign::raster::RgbRaster;
use rand::Rng;

// ---------------------------------------------------------------- masks

/// Breadth-first flood fill started from each unvisited foreground pixel in
/// row-major order. Returns labels (0 = background) and component sizes.
pub fn flood_fill_labels(mask: &BinaryMask, eight: bool) -> (Vec<u32>, Vec<u64>) {
    let (w, h) = (mask.width() as i64, mask.height() as i64);
    let mut labels = vec![0u32; (w * h) as usize];
    let mut sizes = Vec::new();
    let offsets: &[(i64, i64)] = if eight {
        &[(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]
    } else {
        &[(-1, 0), (0, -1), (0, 1), (1, 0)]
    };
    for r in 0..h {
        for c in 0..w {
            if !mask.get(r as u32, c as u32) || labels[(r * w + c) as usize] != 0 {
                continue;
            }
            sizes.push(0u64);
            let label = sizes.len() as u32;
            let mut queue = VecDeque::from([(r, c)]);
            labels[(r * w + c) as usize] = label;
            while let Some((y, x)) = queue.pop_front() {
                sizes[label as usize - 1] += 1;
                for &(dy, dx) in offsets {
                    let (ny, nx) = (y + dy, x + dx);
                    if ny < 0 || nx < 0 || ny >= h || nx >= w {
                        continue;
                    }
                    let idx = (ny * w + nx) as usize;
                    if mask.get(ny as u32, nx as u32) && labels[idx] == 0 {
                        labels[idx] = label;
                        queue.push_back((ny, nx));
                    }
                }
            }
        }
    }
    (labels, sizes)
}

pub fn random_mask(rng: &mut impl Rng, w: u32, h: u32) -> BinaryMask {
    let density = rng.gen_range(0.1..0.9);
    let bits = (0..w * h).map(|_| rng.gen_bool(density)).collect();
    BinaryMask::from_bits(w, h, bits).unwrap()
}

// ---------------------------------------------------------------- color

/// Category index in the library's order (black, gray, white, red, orange,
/// yellow, green, cyan, blue, purple), decided with integer arithmetic only.
pub fn category_exact(px: [u8; 3], t: &HueThresholds) -> usize {
    let (r, g, b) = (px[0] as i64, px[1] as i64, px[2] as i64);
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let v = max as f64 / 255.0;
    if v < t.black_value {
        return 0;
    }
    let s = if max == 0 { 0.0 } else { (max - min) as f64 / max as f64 };
    if s < t.neutral_saturation {
        return if v >= t.white_value { 2 } else { 1 };
    }
    // Hue as the fraction num/den degrees.
    let d = max - min;
    let num = if max == r {
        let n = 60 * (g - b);
        if n < 0 { n + 360 * d } else { n }
    } else if max == g {
        60 * (b - r) + 120 * d
    } else {
        60 * (r - g) + 240 * d
    };
    // Default bounds are whole degrees, compared as num < bound * den.
    let bounds = [t.bounds.red_end, t.bounds.orange_end, t.bounds.yellow_end, t.bounds.green_end,
        t.bounds.cyan_end, t.bounds.blue_end, t.bounds.purple_end];
    let below = |bound: f64| (num as f64) < bound * d as f64;
    if below(bounds[0]) || !below(bounds[6]) {
        return 3;
    }
    for (i, &bound) in bounds.iter().enumerate().skip(1) {
        if below(bound) {
            return 3 + i;
        }
    }
    unreachable!()
}

pub struct NaiveColor {
    pub counts: [u64; 10],
    pub n: u64,
    pub s_ave: f64,
    pub b_ave: f64,
    pub b_con: f64,
    pub n_hue: u32,
    pub e_hue: f64,
    pub dominant: usize,
}

/// Per-pixel reference for the color profile.
pub fn naive_color(image: &RgbRaster, mask: &BinaryMask, t: &HueThresholds, presence: f64) -> Option<NaiveColor> {
    let mut counts = [0u64; 10];
    let mut s_sum = 0.0;
    let mut v_int_sum = 0u64;
    let mut vs = Vec::new();
    for row in 0..image.height() {
        for col in 0..image.width() {
            let idx = (row * image.width() + col) as usize;
            if !mask.get(row, col) || image.alpha().is_some_and(|a| a[idx] == 0) {
                continue;
            }
            let px = image.pixels()[idx];
            counts[category_exact(px, t)] += 1;
            let max = px.iter().max().copied().unwrap() as u64;
            let min = px.iter().min().copied().unwrap() as u64;
            s_sum += if max == 0 { 0.0 } else { (max - min) as f64 / max as f64 };
            v_int_sum += max;
            vs.push(max as f64 / 255.0);
        }
    }
    let n = vs.len() as u64;
    if n == 0 {
        return None;
    }
    let b_ave = v_int_sum as f64 / (255.0 * n as f64);
    let mean = vs.iter().sum::<f64>() / n as f64;
    let b_con = (vs.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64).sqrt();
    let kept: Vec<f64> =
        counts.iter().filter(|&&c| c > 0 && c as f64 / n as f64 >= presence).map(|&c| c as f64).collect();
    let total: f64 = kept.iter().sum();
    let e_hue = kept.iter().map(|c| c / total).map(|p| -p * p.log2()).sum::<f64>();
    let mut dominant = 0;
    for i in 1..10 {
        if counts[i] > counts[dominant] {
            dominant = i;
        }
    }
    Some(NaiveColor {
        counts,
        n,
        s_ave: s_sum / n as f64,
        b_ave,
        b_con,
        n_hue: kept.len() as u32,
        e_hue: if kept.len() <= 1 { 0.0 } else { e_hue },
        dominant,
    })
}

/// Raster drawn from a small palette so that hue categories repeat.
pub fn random_raster(rng: &mut impl Rng, w: u32, h: u32) -> RgbRaster {
    let palette: Vec<[u8; 3]> = (0..rng.gen_range(1..8)).map(|_| rng.gen()).collect();
    let pixels = (0..w * h)
        .map(|_| if rng.gen_bool(0.3) { rng.gen() } else { palette[rng.gen_range(0..palette.len())] })
        .collect();
    RgbRaster::new(w, h, pixels).unwrap()
}

// ---------------------------------------------------------------- stats

/// Two-sided exact Mann-Whitney p, `2 P(U1 <= u)` capped at one, by
/// enumerating every assignment of ranks 1..=n1+n2 to the first sample.
pub fn mwu_enumerated_p(n1: usize, n2: usize, u_observed: f64) -> f64 {
    let n = n1 + n2;
    let mut at_most = 0u64;
    let mut total = 0u64;
    for subset in 0u32..(1 << n) {
        if subset.count_ones() as usize != n1 {
            continue;
        }
        let rank_sum: usize = (0..n).filter(|i| subset & (1 << i) != 0).map(|i| i + 1).sum();
        let u1 = rank_sum - n1 * (n1 + 1) / 2;
        total += 1;
        if (u1 as f64) <= u_observed {
            at_most += 1;
        }
    }
    (2.0 * at_most as f64 / total as f64).min(1.0)
}

/// Doubled mid-ranks, which are always integers.
pub fn doubled_midranks(values: &[f64]) -> Vec<i64> {
    values
        .iter()
        .map(|v| {
            let less = values.iter().filter(|w| *w < v).count() as i64;
            let equal = values.iter().filter(|w| *w == v).count() as i64;
            2 * less + equal + 1
        })
        .collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Spearman rho and its exact two-sided permutation p. Extremeness is
/// decided on the integer co-moment of doubled ranks, so no rounding enters.
pub fn spearman_enumerated(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as i64;
    let rx = doubled_midranks(x);
    let ry = doubled_midranks(y);
    let comoment = |ry: &[i64]| {
        let sxy: i64 = rx.iter().zip(ry).map(|(a, b)| a * b).sum();
        n * sxy - rx.iter().sum::<i64>() * ry.iter().sum::<i64>()
    };
    let spread = |r: &[i64]| n * r.iter().map(|a| a * a).sum::<i64>() - r.iter().sum::<i64>().pow(2);
    let observed = comoment(&ry);
    let rho = observed as f64 / ((spread(&rx) as f64) * (spread(&ry) as f64)).sqrt();
    let perms = permutations(x.len());
    let extreme = perms
        .iter()
        .filter(|p| comoment(&p.iter().map(|&i| ry[i]).collect::<Vec<_>>()).abs() >= observed.abs())
        .count();
    (rho, extreme as f64 / perms.len() as f64)
}

/// Classic tie-free formula `1 - 6 sum d^2 / (n (n^2 - 1))`.
pub fn spearman_d2(x: &[f64], y: &[f64]) -> f64 {
    let rx = doubled_midranks(x);
    let ry = doubled_midranks(y);
    let n = x.len() as f64;
    let d2: f64 = rx.iter().zip(&ry).map(|(a, b)| ((a - b) as f64 / 2.0).powi(2)).sum();
    1.0 - 6.0 * d2 / (n * (n * n - 1.0))
}

// ---------------------------------------------------------------- mining

/// Every non-empty subset of the ten kinds, counted directly.
pub fn brute_force_itemsets(transactions: &[Transaction], min_support: f64) -> Vec<FrequentItemset> {
    let n = transactions.len() as f64;
    let mut out: Vec<FrequentItemset> = (1u16..1 << 10)
        .filter_map(|bits| {
            let set = ItemSet::from_bits(bits);
            let count = transactions.iter().filter(|t| set.is_subset_of(t.items)).count() as u64;
            (count as f64 / n >= min_support).then(|| FrequentItemset {
                items: set,
                support: count as f64 / n,
                support_count: count,
            })
        })
        .collect();
    out.sort_by(|a, b| {
        a.items
            .len()
            .cmp(&b.items.len())
            .then(b.support_count.cmp(&a.support_count))
            .then(a.items.kinds().cmp(&b.items.kinds()))
    });
    out
}

pub fn random_transactions(rng: &mut impl Rng, max_len: usize) -> Vec<Transaction> {
    let len = rng.gen_range(1..=max_len);
    // Skewed per-kind probabilities give a realistic spread of supports.
    let probs: Vec<f64> = ElementKind::ALL.iter().map(|_| rng.gen_range(0.02..0.95)).collect();
    (0..len)
        .map(|_| Transaction::new(ElementKind::ALL.into_iter().zip(&probs).filter(|(_, &p)| rng.gen_bool(p)).map(|(k, _)| k)))
        .collect()
}
