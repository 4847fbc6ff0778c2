//! Seeded randomized-trial plumbing shared by verification routines, the
//! test suites and the CLI.
//!
//! Every batch derives one independent ChaCha stream per trial index, so
//! probe batches can be evaluated in any order (or in parallel) and still
//! produce identical draws for a given `(seed, index)` pair.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::operator::KernelMatrix;
use crate::semimodule::{Closure, GroundSet, SemimoduleSpec, TropVector};
use crate::semiring::{Scalar, SemiringKind};

/// Default seed for every randomized routine; override per run.
pub const DEFAULT_SEED: u64 = 0x5eed_cafe;

/// Knobs for randomized verification batches.
#[derive(Clone, Copy, Debug)]
pub struct ProbeConfig {
    pub seed: u64,
    /// Random probes per kernel verification (on top of the generators).
    pub kernel_probes: usize,
    /// Probes per b-linearity certification of a black-box functional.
    pub linearity_probes: usize,
    /// Trials for randomized property checks.
    pub trials: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            seed: DEFAULT_SEED,
            kernel_probes: 64,
            linearity_probes: 128,
            trials: 200,
        }
    }
}

impl ProbeConfig {
    pub fn with_seed(seed: u64) -> Self {
        ProbeConfig {
            seed,
            ..ProbeConfig::default()
        }
    }
}

/// Independent generator for trial `index` of a batch.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Finite value in `[-9, 9]` (the desk-scale box; exact in max-plus
/// arithmetic). Boolean scalars have `𝟙` as their only finite value.
pub fn random_finite_scalar<R: Rng>(kind: SemiringKind, rng: &mut R) -> Scalar {
    match kind {
        SemiringKind::Boolean => Scalar::one(kind),
        _ => Scalar::new(kind, rng.gen_range(-9..=9) as f64).expect("integer box scalar"),
    }
}

/// Generator/kernel entry: `𝟘` with probability ~1/4, otherwise finite.
pub fn random_entry<R: Rng>(kind: SemiringKind, rng: &mut R) -> Scalar {
    if rng.gen_bool(0.25) {
        Scalar::zero(kind)
    } else {
        random_finite_scalar(kind, rng)
    }
}

/// Combination coefficient: mostly finite, sometimes `𝟘` (~15%) and
/// occasionally `⊤` (~5%) to exercise the completed part of the semiring.
pub fn random_coefficient<R: Rng>(kind: SemiringKind, rng: &mut R) -> Scalar {
    let roll: f64 = rng.gen();
    if roll < 0.15 {
        Scalar::zero(kind)
    } else if roll < 0.20 {
        Scalar::top(kind)
    } else {
        random_finite_scalar(kind, rng)
    }
}

pub fn random_coefficients<R: Rng>(n: usize, kind: SemiringKind, rng: &mut R) -> Vec<Scalar> {
    (0..n).map(|_| random_coefficient(kind, rng)).collect()
}

pub fn random_vector<R: Rng>(
    ground: &Arc<GroundSet>,
    kind: SemiringKind,
    rng: &mut R,
) -> TropVector {
    let entries = (0..ground.len()).map(|_| random_entry(kind, rng)).collect();
    TropVector::new(ground.clone(), entries).expect("entry count matches ground")
}

pub fn random_kernel<R: Rng>(
    rows: &Arc<GroundSet>,
    cols: &Arc<GroundSet>,
    kind: SemiringKind,
    rng: &mut R,
) -> KernelMatrix {
    let entries = (0..rows.len() * cols.len())
        .map(|_| random_entry(kind, rng))
        .collect();
    KernelMatrix::new(rows.clone(), cols.clone(), kind, entries).expect("dimensions match")
}

/// Random member of a spec: a coefficient combination for spans, an inf of
/// up to three combinations for wedge closures.
pub fn random_member<R: Rng>(spec: &SemimoduleSpec, rng: &mut R) -> Result<TropVector> {
    let combo = |rng: &mut R| -> Result<TropVector> {
        let coeffs = random_coefficients(spec.generators().len(), spec.kind(), rng);
        spec.combine(&coeffs)
    };
    match spec.closure() {
        Closure::BClosedSpan => combo(rng),
        Closure::WedgeClosed => {
            let mut acc = combo(rng)?;
            for _ in 0..rng.gen_range(0..3) {
                acc = acc.inf(&combo(rng)?)?;
            }
            Ok(acc)
        }
    }
}

/// Random span with `⊤`-free generators; every ground point is given an
/// invertible value somewhere, so the result is nondegenerate and (being
/// zero-or-invertible entrywise) admissible.
pub fn random_nondegenerate_span<R: Rng>(
    ground: &Arc<GroundSet>,
    kind: SemiringKind,
    n_generators: usize,
    closure: Closure,
    rng: &mut R,
) -> Result<SemimoduleSpec> {
    let n = ground.len();
    let mut cols: Vec<Vec<Scalar>> = (0..n_generators)
        .map(|_| (0..n).map(|_| random_entry(kind, rng)).collect())
        .collect();
    for x in 0..n {
        if cols.iter().all(|g| g[x].is_zero()) {
            let pick = rng.gen_range(0..n_generators);
            cols[pick][x] = random_finite_scalar(kind, rng);
        }
    }
    let generators = cols
        .into_iter()
        .map(|entries| TropVector::new(ground.clone(), entries))
        .collect::<Result<Vec<_>>>()?;
    SemimoduleSpec::new(ground.clone(), kind, generators, closure)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trial_streams_are_reproducible_and_independent() {
        let a: Vec<i64> = {
            let mut rng = trial_rng(7, 3);
            (0..8).map(|_| rng.gen_range(-9..=9)).collect()
        };
        let b: Vec<i64> = {
            let mut rng = trial_rng(7, 3);
            (0..8).map(|_| rng.gen_range(-9..=9)).collect()
        };
        let c: Vec<i64> = {
            let mut rng = trial_rng(7, 4);
            (0..8).map(|_| rng.gen_range(-9..=9)).collect()
        };
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn scalars_respect_their_carrier() {
        let mut rng = trial_rng(DEFAULT_SEED, 0);
        for _ in 0..200 {
            let s = random_coefficient(SemiringKind::ZmaxComplete, &mut rng);
            assert!(s.is_zero() || s.is_top() || s.value().fract() == 0.0);
            let b = random_entry(SemiringKind::Boolean, &mut rng);
            assert!(b.is_zero() || b.is_one());
        }
    }

    #[test]
    fn nondegenerate_spans_are_nondegenerate() {
        let ground = GroundSet::indexed(5).unwrap();
        for t in 0..50 {
            let mut rng = trial_rng(11, t);
            let spec = random_nondegenerate_span(
                &ground,
                SemiringKind::RmaxComplete,
                3,
                Closure::BClosedSpan,
                &mut rng,
            )
            .unwrap();
            assert!(spec.is_nondegenerate());
            assert!(spec.is_admissible().unwrap());
        }
    }

    #[test]
    fn members_belong_to_their_spec() {
        let ground = GroundSet::indexed(4).unwrap();
        for t in 0..30 {
            let mut rng = trial_rng(23, t);
            let spec = random_nondegenerate_span(
                &ground,
                SemiringKind::RmaxComplete,
                3,
                Closure::WedgeClosed,
                &mut rng,
            )
            .unwrap();
            let f = random_member(&spec, &mut rng).unwrap();
            assert!(spec.contains(&f).unwrap());
        }
    }
}
