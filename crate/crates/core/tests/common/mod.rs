//! Brute-force reference implementations and data helpers shared by the
//! integration tests. Every oracle follows the textbook definition directly,
//! with full sorts and explicit pair enumeration.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use odstream::Record;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut impl Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..d).map(|_| rng.sample(StandardNormal)).collect()).collect()
}

pub fn records(points: &[Vec<f64>]) -> Vec<Record> {
    points.iter().enumerate().map(|(i, p)| Record::new(i as u64, p.clone())).collect()
}

pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Indices of the k nearest points to `q`, excluding `skip`, by full sort.
fn knn_sorted(points: &[Vec<f64>], q: &[f64], k: usize, skip: Option<usize>) -> Vec<(usize, f64)> {
    let mut all: Vec<(usize, f64)> =
        (0..points.len()).filter(|&i| Some(i) != skip).map(|i| (i, euclid(&points[i], q))).collect();
    all.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
    all.truncate(k);
    all
}

/// LOF of `query` against `reference`, straight from the definition.
pub fn lof_oracle(reference: &[Vec<f64>], query: &[f64], k: usize) -> f64 {
    let k_dist = |i: usize| knn_sorted(reference, &reference[i], k, Some(i))[k - 1].1;
    let lrd_of = |neigh: &[(usize, f64)]| {
        let mean: f64 = neigh.iter().map(|&(o, d)| k_dist(o).max(d)).sum::<f64>() / k as f64;
        if mean > 0.0 {
            1.0 / mean
        } else {
            1e12
        }
    };
    let nq = knn_sorted(reference, query, k, None);
    let lrd_q = lrd_of(&nq);
    let sum: f64 = nq.iter().map(|&(o, _)| lrd_of(&knn_sorted(reference, &reference[o], k, Some(o))) / lrd_q).sum();
    sum / k as f64
}

/// Raw ABOD factor by explicit enumeration of unordered pairs, two-pass variance.
pub fn abod_oracle(reference: &[Vec<f64>], query: &[f64]) -> f64 {
    let diffs: Vec<Vec<f64>> = reference
        .iter()
        .map(|p| p.iter().zip(query).map(|(a, b)| a - b).collect::<Vec<f64>>())
        .filter(|v| v.iter().any(|&x| x != 0.0))
        .collect();
    let mut terms = Vec::new();
    for i in 0..diffs.len() {
        for j in (i + 1)..diffs.len() {
            let (a, b) = (&diffs[i], &diffs[j]);
            let na2: f64 = a.iter().map(|x| x * x).sum();
            let nb2: f64 = b.iter().map(|x| x * x).sum();
            let cos = a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / (na2.sqrt() * nb2.sqrt());
            terms.push((cos, 1.0 / (na2 * nb2)));
        }
    }
    let w: f64 = terms.iter().map(|t| t.1).sum();
    let mean = terms.iter().map(|(c, wt)| c * wt).sum::<f64>() / w;
    terms.iter().map(|(c, wt)| wt * (c - mean) * (c - mean)).sum::<f64>() / w
}

/// For each point of a live window (oldest first): (neighbours after it,
/// neighbours before it) within `radius`, by all-pairs scan.
pub fn storm_oracle(window: &[Vec<f64>], radius: f64) -> Vec<(usize, usize)> {
    (0..window.len())
        .map(|i| {
            let near = |j: &usize| *j != i && euclid(&window[i], &window[*j]) <= radius;
            let after = (i + 1..window.len()).filter(near).count();
            let before = (0..i).filter(near).count();
            (after, before)
        })
        .collect()
}

/// AUC by counting every positive/negative pair, ties worth one half.
/// Returned as (2 * wins + ties, 2 * P * N).
pub fn auc_pairs(scores: &[f64], labels: &[bool]) -> (u128, u128) {
    let (mut num, mut pairs) = (0u128, 0u128);
    let pos = scores.iter().zip(labels).filter(|(_, &l)| l).map(|(s, _)| *s);
    for si in pos {
        for sj in scores.iter().zip(labels).filter(|(_, &l)| !l).map(|(s, _)| *s) {
            pairs += 1;
            num += if si > sj {
                2
            } else if si == sj {
                1
            } else {
                0
            };
        }
    }
    (num, 2 * pairs)
}

/// Uniformly random rotation in `d` dimensions (Gram-Schmidt on a Gaussian matrix).
pub fn random_rotation(rng: &mut impl Rng, d: usize) -> Vec<Vec<f64>> {
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(d);
    while q.len() < d {
        let mut v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        for u in &q {
            let p: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(u).for_each(|(a, b)| *a -= p * b);
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            q.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    q
}

pub fn apply(m: &[Vec<f64>], x: &[f64], shift: &[f64]) -> Vec<f64> {
    m.iter().zip(shift).map(|(row, s)| row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + s).collect()
}

/// Two-sided Kolmogorov-Smirnov statistic of `sample` against U(0, 1).
pub fn ks_uniform(sample: &[f64]) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let lo = x - i as f64 / n;
            let hi = (i + 1) as f64 / n - x;
            lo.max(hi)
        })
        .fold(0.0, f64::max)
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}
