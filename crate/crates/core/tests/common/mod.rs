#![allow(dead_code)]

//! Oracles the integration suites trust: independent reimplementations of
//! the interesting outputs along a different algorithmic route, frozen here
//! so the library cannot agree with itself by accident.

use std::sync::Arc;

use rand::Rng;

use tropkern::sampling::trial_rng;
use tropkern::semimodule::{GroundSet, SemimoduleSpec, TropVector};
use tropkern::semimetric::Semimetric;
use tropkern::semiring::{Scalar, SemiringKind};
use tropkern::{star_closure, KernelMatrix};

pub const KIND: SemiringKind = SemiringKind::RmaxComplete;
pub const NEG: f64 = f64::NEG_INFINITY;

/// Floyd–Warshall route to the star closure: max-plus longest path gains
/// over `I ⊕ m`, then `⊤` wherever a positive-gain cycle is reachable in
/// both directions.  The library squares matrices instead, so agreement is
/// meaningful.
pub fn fw_closure_oracle(m: &KernelMatrix) -> KernelMatrix {
    let n = m.rows_ground().len();
    let mut fw = vec![NEG; n * n];
    for x in 0..n {
        for y in 0..n {
            let base = m.entry(x, y).value();
            fw[x * n + y] = if x == y { base.max(0.0) } else { base };
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = fw[i * n + k] + fw[k * n + j];
                if via > fw[i * n + j] {
                    fw[i * n + j] = via;
                }
            }
        }
    }
    let positive: Vec<bool> = (0..n).map(|w| fw[w * n + w] > 0.0).collect();
    let entries = (0..n * n)
        .map(|idx| {
            let (i, j) = (idx / n, idx % n);
            let divergent = (0..n).any(|w| {
                positive[w] && fw[i * n + w] != NEG && fw[w * n + j] != NEG
            });
            if divergent {
                Scalar::top(KIND)
            } else {
                Scalar::new(KIND, fw[idx]).expect("finite oracle entry")
            }
        })
        .collect();
    KernelMatrix::new(m.rows_ground().clone(), m.cols_ground().clone(), KIND, entries).unwrap()
}

/// Random square matrix with integer entries in `[-9, 9]` and `𝟘` holes:
/// the closure-suite input distribution.
pub fn random_integer_matrix(n: usize, seed: u64, index: u64) -> KernelMatrix {
    let g = GroundSet::indexed(n).unwrap();
    let mut rng = trial_rng(seed, index);
    let entries = (0..n * n)
        .map(|_| {
            if rng.gen_bool(0.3) {
                Scalar::zero(KIND)
            } else {
                Scalar::new(KIND, rng.gen_range(-9..=9) as f64).unwrap()
            }
        })
        .collect();
    KernelMatrix::new(g.clone(), g, KIND, entries).unwrap()
}

/// Random symmetric integer metric: star closure of a symmetric
/// nonpositive weight matrix, i.e. negated shortest-path distances.
pub fn random_symmetric_metric(n: usize, seed: u64, index: u64) -> Semimetric {
    let g = GroundSet::indexed(n).unwrap();
    let mut rng = trial_rng(seed, index);
    let mut entries = vec![Scalar::zero(KIND); n * n];
    for x in 0..n {
        entries[x * n + x] = Scalar::one(KIND);
        for y in x + 1..n {
            let w = Scalar::new(KIND, -(rng.gen_range(1..=9) as f64)).unwrap();
            entries[x * n + y] = w;
            entries[y * n + x] = w;
        }
    }
    let m = KernelMatrix::new(g.clone(), g, KIND, entries).unwrap();
    star_closure(&m).unwrap()
}

/// Brute-force span membership: enumerate coefficient tuples over an
/// integer grid wide enough to cover the instance's value spread, plus `𝟘`.
/// Exponential in the generator count, hence only for desk-scale oracles.
pub fn brute_membership(spec: &SemimoduleSpec, f: &TropVector, half_width: i64) -> bool {
    let k = spec.generators().len();
    let mut grid: Vec<Scalar> = vec![Scalar::zero(KIND)];
    for v in -half_width..=half_width {
        grid.push(Scalar::new(KIND, v as f64).unwrap());
    }
    let mut stack = vec![0usize; k];
    loop {
        let coeffs: Vec<Scalar> = stack.iter().map(|&i| grid[i]).collect();
        if spec.combine(&coeffs).unwrap() == *f {
            return true;
        }
        // odometer
        let mut pos = 0;
        loop {
            if pos == k {
                return false;
            }
            stack[pos] += 1;
            if stack[pos] < grid.len() {
                break;
            }
            stack[pos] = 0;
            pos += 1;
        }
    }
}

/// Chord-max concave envelope: the value at a grid point is the best
/// chord over all support pairs that straddle it (O(n²) per point), an
/// independent route to the monotone-chain hull.
pub fn hull_oracle(coords: &[f64], values: &[f64]) -> Vec<f64> {
    let n = coords.len();
    let support: Vec<usize> = (0..n).filter(|&i| values[i] != NEG).collect();
    if support.is_empty() {
        return vec![NEG; n];
    }
    let (lo, hi) = (support[0], support[support.len() - 1]);
    (0..n)
        .map(|x| {
            if x < lo || x > hi {
                return NEG;
            }
            let mut best = NEG;
            for &i in &support {
                if i > x {
                    continue;
                }
                for &j in &support {
                    if j < x {
                        continue;
                    }
                    let chord = if i == j {
                        values[i]
                    } else {
                        let t = (coords[x] - coords[i]) / (coords[j] - coords[i]);
                        values[i] + t * (values[j] - values[i])
                    };
                    if chord > best {
                        best = chord;
                    }
                }
            }
            best
        })
        .collect()
}

pub fn ground(n: usize) -> Arc<GroundSet> {
    GroundSet::indexed(n).unwrap()
}

pub fn rvec(g: &Arc<GroundSet>, values: &[f64]) -> TropVector {
    TropVector::from_values(g.clone(), KIND, values).unwrap()
}
