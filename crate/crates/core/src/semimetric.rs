//! Semimetrics with values in a completed idempotent semiring, their star
//! closures, and the Lipschitz-type semimodules they induce.
//!
//! A semimetric is a square matrix satisfying `d = d ⊙ d` exactly (not just
//! the triangle inequality; for reflexive `d` the two coincide).  It induces
//!
//! * `Lip(X, d)`: functions with `f ≽ f ⊙ d`,
//! * `lip(X, d)`: functions with `f = f ⊙ d`,
//! * `lip₀(X, d)`: the span of the rows `d_x`, which on a finite ground
//!   set already exhausts `lip(X, d)` (every member is `⊕_y f(y) ⊙ d_y`).

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::operator::KernelMatrix;
use crate::sampling::{self, ProbeConfig};
use crate::semimodule::{same_ground, Closure, GroundSet, SemimoduleSpec, TropVector};
use crate::semiring::{Scalar, SemiringKind};

/// Checks `m = m ⊙ m` exactly; `None` means valid, otherwise the first
/// violating pair in row-major order is returned.
pub fn validate_semimetric(m: &KernelMatrix) -> Result<Option<(usize, usize)>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(
            "semimetric validation requires a square matrix".into(),
        ));
    }
    let mm = m.compose(m)?;
    let n = m.rows_ground().len();
    for x in 0..n {
        for y in 0..n {
            if m.entry(x, y) != mm.entry(x, y) {
                return Ok(Some((x, y)));
            }
        }
    }
    Ok(None)
}

/// A validated semimetric.
#[derive(Clone, Debug)]
pub struct Semimetric {
    matrix: KernelMatrix,
    reflexive: bool,
    symmetric: bool,
}

impl Semimetric {
    /// Validates the `d = d ⊙ d` equality and caches the reflexivity and
    /// symmetry flags.
    pub fn try_new(matrix: KernelMatrix) -> Result<Self> {
        if let Some((x, y)) = validate_semimetric(&matrix)? {
            return Err(Error::NotSemimetric {
                x: matrix.rows_ground().label(x).to_string(),
                y: matrix.rows_ground().label(y).to_string(),
            });
        }
        let n = matrix.rows_ground().len();
        let reflexive = (0..n).all(|x| matrix.entry(x, x).is_one());
        let symmetric =
            (0..n).all(|x| (0..n).all(|y| matrix.entry(x, y) == matrix.entry(y, x)));
        Ok(Semimetric {
            matrix,
            reflexive,
            symmetric,
        })
    }

    pub fn matrix(&self) -> &KernelMatrix {
        &self.matrix
    }

    pub fn ground(&self) -> &Arc<GroundSet> {
        self.matrix.rows_ground()
    }

    pub fn kind(&self) -> SemiringKind {
        self.matrix.kind()
    }

    pub fn is_reflexive(&self) -> bool {
        self.reflexive
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// The row function `d_x : y ↦ d(x, y)`; always a `lip` member.
    pub fn row(&self, x: usize) -> TropVector {
        self.matrix.row(x)
    }

    /// `f ∈ lip(X, d)`: `f = f ⊙ d` exactly.
    pub fn in_lip(&self, f: &TropVector) -> Result<bool> {
        Ok(self.lip_project(f)? == *f)
    }

    /// `f ∈ Lip(X, d)`: `f ≽ f ⊙ d` pointwise.
    pub fn in_upper_lip(&self, f: &TropVector) -> Result<bool> {
        self.lip_project(f)?.leq(f)
    }

    /// The canonical retraction `f ↦ f ⊙ d` onto `lip(X, d)`; idempotent
    /// because `d ⊙ d = d`.
    pub fn lip_project(&self, f: &TropVector) -> Result<TropVector> {
        self.matrix.apply(f)
    }

    /// `lip₀(X, d)`: the b-closed span of the rows.
    pub fn lip0_span(&self) -> Result<SemimoduleSpec> {
        SemimoduleSpec::new(
            self.ground().clone(),
            self.kind(),
            self.matrix.row_vectors(),
            Closure::BClosedSpan,
        )
    }

    /// The rows as a wedge-closed spec.  Requires reflexivity: then
    /// `lip = Lip` is inf-closed, so the span and its wedge closure
    /// coincide and the wedge presentation is faithful.
    pub fn lip_wedge_spec(&self) -> Result<SemimoduleSpec> {
        if !self.reflexive {
            return Err(Error::InvalidParameter(
                "the wedge presentation of lip(X, d) requires a reflexive semimetric".into(),
            ));
        }
        SemimoduleSpec::new(
            self.ground().clone(),
            self.kind(),
            self.matrix.row_vectors(),
            Closure::WedgeClosed,
        )
    }
}

fn closure_impl(
    m: &KernelMatrix,
    compose: fn(&KernelMatrix, &KernelMatrix) -> Result<KernelMatrix>,
) -> Result<Semimetric> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(
            "star closure requires a square matrix".into(),
        ));
    }
    let kind = m.kind();
    let ground = m.rows_ground().clone();
    let n = ground.len();
    let mut a = KernelMatrix::identity(ground.clone(), kind).sup(m)?;
    let mut power = 1usize;
    while power < n {
        a = compose(&a, &a)?;
        power *= 2;
    }
    // `a` now holds best walk weights up to a power ≥ n, enough to expose
    // every simple cycle on its diagonal.  An entry diverges exactly when
    // some witness point carries a positive cycle and is reachable from the
    // row point and reaches the column point.
    let one = Scalar::one(kind);
    let divergent: Vec<bool> = (0..n).map(|w| !a.entry(w, w).leq(&one).unwrap_or(true)).collect();
    let top = Scalar::top(kind);
    let mut entries = Vec::with_capacity(n * n);
    for x in 0..n {
        for y in 0..n {
            let diverges = (0..n).any(|w| {
                divergent[w] && !a.entry(x, w).is_zero() && !a.entry(w, y).is_zero()
            });
            entries.push(if diverges { top } else { a.entry(x, y) });
        }
    }
    let closed = KernelMatrix::new(ground, m.cols_ground().clone(), kind, entries)?;
    Semimetric::try_new(closed)
        .map_err(|e| Error::Postcondition(format!("star closure failed validation: {e}")))
}

/// Least reflexive-or-divergent semimetric above `m`: the Kleene star
/// `⊕_k (I ⊕ m)^k`, with entries fed by a positive cycle set to `⊤`.  The
/// diagonal is `𝟙` exactly where no positive cycle passes, `⊤` elsewhere.
pub fn star_closure(m: &KernelMatrix) -> Result<Semimetric> {
    closure_impl(m, KernelMatrix::compose)
}

/// Sequential twin of [`star_closure`] for benchmarking.
pub fn star_closure_serial(m: &KernelMatrix) -> Result<Semimetric> {
    closure_impl(m, KernelMatrix::compose_serial)
}

/// Metric ingestion: validates that `r` is a finite nonnegative metric
/// (symmetric, zero diagonal, triangle inequality) and returns the
/// reflexive symmetric semimetric `d = −r`.
pub fn lipschitz_space(r: &KernelMatrix) -> Result<Semimetric> {
    if !r.is_square() {
        return Err(Error::DimensionMismatch("a metric matrix must be square".into()));
    }
    if r.kind() == SemiringKind::Boolean {
        return Err(Error::InvalidParameter(
            "metric distances need a numeric semiring".into(),
        ));
    }
    let g = r.rows_ground();
    let n = g.len();
    for x in 0..n {
        for y in 0..n {
            let v = r.entry(x, y).value();
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "distance ({}, {}) is not a finite nonnegative value",
                    g.label(x),
                    g.label(y)
                )));
            }
            if x == y && v != 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "nonzero self-distance at {}",
                    g.label(x)
                )));
            }
            if r.entry(x, y) != r.entry(y, x) {
                return Err(Error::InvalidParameter(format!(
                    "asymmetric distances between {} and {}",
                    g.label(x),
                    g.label(y)
                )));
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if r.entry(i, j).value() > r.entry(i, k).value() + r.entry(k, j).value() {
                    return Err(Error::TriangleViolation {
                        i: g.label(i).to_string(),
                        j: g.label(j).to_string(),
                        k: g.label(k).to_string(),
                    });
                }
            }
        }
    }
    let kind = r.kind();
    let entries = (0..n)
        .flat_map(|x| (0..n).map(move |y| (x, y)))
        .map(|(x, y)| Scalar::new(kind, -r.entry(x, y).value()))
        .collect::<Result<Vec<_>>>()?;
    let d = KernelMatrix::new(g.clone(), g.clone(), kind, entries)?;
    Semimetric::try_new(d)
}

/// The companion predicate of [`lipschitz_space`]: `f` is everywhere finite
/// with `|f(x) − f(y)| ≤ r(x, y)`, or `f ≡ 𝟘`.
pub fn satisfies_lipschitz_bound(f: &TropVector, r: &KernelMatrix) -> Result<bool> {
    if !same_ground(f.ground(), r.rows_ground()) {
        return Err(Error::GroundMismatch);
    }
    if f.is_zero() {
        return Ok(true);
    }
    let n = f.len();
    if (0..n).any(|x| !f.get(x).is_invertible()) {
        return Ok(false);
    }
    for x in 0..n {
        for y in 0..n {
            if (f.get(x).value() - f.get(y).value()).abs() > r.entry(x, y).value() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// A failed lower-ideal trial: `minor ≼ member` lies in `lip(X, d)` but not
/// in the checked span.
#[derive(Clone, Debug)]
pub struct LowerIdealWitness {
    pub trial: u64,
    pub member: TropVector,
    pub minor: TropVector,
}

/// Randomized check that `v` is a lower ideal in `lip(X, d)`: for random
/// members `f ∈ v` and random `g ∈ lip(X, d)` with `g ≼ f`, membership of
/// `g` in `v` must hold.  Preconditions (rows of `d` belong to `v`, every
/// generator of `v` lies in `Lip(X, d)`) are rejected loudly rather than
/// sampled around.
pub fn lower_ideal_check(
    v: &SemimoduleSpec,
    d: &Semimetric,
    trials: u64,
    seed: u64,
) -> Result<Option<LowerIdealWitness>> {
    if v.closure() != Closure::BClosedSpan {
        return Err(Error::WrongClosure {
            expected: Closure::BClosedSpan,
            found: v.closure(),
        });
    }
    if !same_ground(v.ground(), d.ground()) {
        return Err(Error::GroundMismatch);
    }
    for x in 0..d.ground().len() {
        if !v.membership(&d.row(x))?.member {
            return Err(Error::InvalidParameter(format!(
                "the span does not contain the row d_{}",
                d.ground().label(x)
            )));
        }
    }
    for (i, g) in v.generators().iter().enumerate() {
        if !d.in_upper_lip(g)? {
            return Err(Error::InvalidParameter(format!(
                "generator {i} lies outside Lip(X, d)"
            )));
        }
    }
    let kind = v.kind();
    for t in 0..trials {
        let mut rng = sampling::trial_rng(seed, t);
        let f = sampling::random_member(v, &mut rng)?;
        // shrink f pointwise, then retract into lip; the result stays ≼ f
        // because f ∈ Lip(X, d)
        let shrunk = {
            let entries = (0..f.len())
                .map(|x| {
                    let down = sampling::random_entry(kind, &mut rng);
                    let nonpos = if down.is_zero() {
                        down
                    } else {
                        Scalar::new(kind, -down.value().abs()).expect("negated finite value")
                    };
                    f.get(x).odot(&nonpos).expect("same semiring")
                })
                .collect();
            TropVector::new(f.ground().clone(), entries)?
        };
        let minor = d.lip_project(&shrunk)?;
        debug_assert!(minor.leq(&f)?);
        if !v.membership(&minor)?.member {
            return Ok(Some(LowerIdealWitness {
                trial: t,
                member: f,
                minor,
            }));
        }
    }
    Ok(None)
}

/// Star closure of a random nonpositive weight matrix: always reflexive,
/// with finite-or-`𝟘` entries (nonpositive weights admit no positive
/// cycle).
pub fn random_reflexive_semimetric<R: Rng>(
    ground: &Arc<GroundSet>,
    kind: SemiringKind,
    rng: &mut R,
) -> Result<Semimetric> {
    let entries = (0..ground.len() * ground.len())
        .map(|_| {
            let e = sampling::random_entry(kind, rng);
            if e.is_zero() {
                e
            } else {
                Scalar::new(kind, -e.value().abs()).expect("negated finite value")
            }
        })
        .collect::<Vec<_>>();
    let m = KernelMatrix::new(ground.clone(), ground.clone(), kind, entries)?;
    star_closure(&m)
}

/// Randomized reflexive-case coincidence and reconstruction checks used by
/// the properties suite; factored here so the CLI can run them too.
pub fn reflexive_lip_coincidence(d: &Semimetric, cfg: &ProbeConfig) -> Result<bool> {
    let span = d.lip0_span()?;
    for t in 0..cfg.trials as u64 {
        let mut rng = sampling::trial_rng(cfg.seed, t);
        let f = sampling::random_member(&span, &mut rng)?;
        if !d.in_lip(&f)? {
            return Ok(false);
        }
        let free = sampling::random_vector(d.ground(), d.kind(), &mut rng);
        if d.in_upper_lip(&free)? != d.in_lip(&free)? {
            return Ok(false);
        }
    }
    Ok(true)
}
