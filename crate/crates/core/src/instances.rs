//! The built-in instance catalogue: small, exactly reproducible modules,
//! semimetrics, and grids that the demos, theorem checks, and acceptance
//! suites run against.

use std::fmt;
use std::sync::Arc;

use num_rational::Ratio;
use rand::Rng;

use crate::error::{Error, Result};
use crate::nuclearity::Functional;
use crate::operator::KernelMatrix;
use crate::sampling::{self};
use crate::semimetric::{lipschitz_space, random_reflexive_semimetric, Semimetric};
use crate::semimodule::{Closure, GroundSet, SemimoduleSpec, TropVector};
use crate::semiring::{Scalar, SemiringKind};

const KIND: SemiringKind = SemiringKind::RmaxComplete;

/// A parsed instance name with its size parameter filled in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InstanceName {
    /// `K(X)` on `n` points, generated by the unit vectors.
    FullKx(usize),
    /// The bounded mappings on `n` points; on a finite set these are all of
    /// `K(X)`, presented with a redundant constant-`𝟙` generator.
    BoundedKx(usize),
    /// Span of the step functions on a chain of `n` points: the
    /// nonincreasing functions.
    NonincreasingChain(usize),
    /// Integer grid `{0, 1, 2}` carrying the concave-envelope addition.
    ConcaveGrid,
    /// Integer grid `[-n, n]` with the span of `x ↦ -x` and `𝟙`, plus the
    /// coordinate functional `(a, b) ↦ b`.
    Example7Window(i64),
    /// `n` collinear points at unit spacing with the metric-induced
    /// semimetric `d = -r`.
    MetricLipschitz(usize),
    OrderIndicatorStrict(usize),
    OrderIndicatorNonstrict(usize),
    /// Star closure of a seeded nonpositive weight matrix on `n` points.
    RandomSemimetric(usize),
    /// Seeded nondegenerate b-closed span on `n` points.
    RandomSpan(usize),
    /// Seeded nondegenerate wedge-closed module on `n` points.
    RandomWedge(usize),
}

impl fmt::Display for InstanceName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InstanceName::FullKx(n) => write!(f, "full-KX({n})"),
            InstanceName::BoundedKx(n) => write!(f, "bounded-KX({n})"),
            InstanceName::NonincreasingChain(n) => write!(f, "nonincreasing-chain({n})"),
            InstanceName::ConcaveGrid => write!(f, "concave-grid"),
            InstanceName::Example7Window(n) => write!(f, "example7-window({n})"),
            InstanceName::MetricLipschitz(n) => write!(f, "metric-lipschitz({n})"),
            InstanceName::OrderIndicatorStrict(n) => write!(f, "order-indicator-strict({n})"),
            InstanceName::OrderIndicatorNonstrict(n) => {
                write!(f, "order-indicator-nonstrict({n})")
            }
            InstanceName::RandomSemimetric(n) => write!(f, "random-semimetric({n})"),
            InstanceName::RandomSpan(n) => write!(f, "random-span({n})"),
            InstanceName::RandomWedge(n) => write!(f, "random-wedge({n})"),
        }
    }
}

/// Parses `name`, `name(k)`, or `name:k`.
pub fn parse_instance_name(s: &str) -> Result<InstanceName> {
    let (base, param) = match s.find(['(', ':']) {
        Some(i) => {
            let raw = s[i + 1..].trim_end_matches(')');
            let value: i64 = raw.parse().map_err(|_| {
                Error::InvalidParameter(format!("instance parameter `{raw}` is not an integer"))
            })?;
            if value <= 0 {
                return Err(Error::InvalidParameter(
                    "instance parameter must be positive".into(),
                ));
            }
            (&s[..i], Some(value))
        }
        None => (s, None),
    };
    let size = |default: usize| param.map(|v| v as usize).unwrap_or(default);
    Ok(match base {
        "full-KX" => InstanceName::FullKx(size(4)),
        "bounded-KX" => InstanceName::BoundedKx(size(4)),
        "nonincreasing-chain" => InstanceName::NonincreasingChain(size(4)),
        "concave-grid" => InstanceName::ConcaveGrid,
        "example7-window" | "example7" => InstanceName::Example7Window(param.unwrap_or(10)),
        "metric-lipschitz" => InstanceName::MetricLipschitz(size(3)),
        "order-indicator-strict" => InstanceName::OrderIndicatorStrict(size(4)),
        "order-indicator-nonstrict" => InstanceName::OrderIndicatorNonstrict(size(4)),
        "random-semimetric" => InstanceName::RandomSemimetric(size(4)),
        "random-span" => InstanceName::RandomSpan(size(4)),
        "random-wedge" => InstanceName::RandomWedge(size(4)),
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown instance name `{other}`"
            )))
        }
    })
}

/// A constructed instance, in whichever shape the name denotes.
#[derive(Clone, Debug)]
pub enum BuiltInstance {
    Module(SemimoduleSpec),
    /// A module together with a declared functional and the coefficient
    /// schedule its unboundedness demo probes with.
    Window {
        module: SemimoduleSpec,
        functional: Functional,
        schedule: Vec<Vec<Scalar>>,
    },
    Metric(Semimetric),
    /// A raw matrix, possibly failing semimetric validation on purpose.
    Matrix(KernelMatrix),
    Concave(ConcaveGrid),
}

impl BuiltInstance {
    pub fn module(&self) -> Option<&SemimoduleSpec> {
        match self {
            BuiltInstance::Module(m) | BuiltInstance::Window { module: m, .. } => Some(m),
            _ => None,
        }
    }

    pub fn functionals(&self) -> Vec<Functional> {
        match self {
            BuiltInstance::Window { functional, .. } => vec![functional.clone()],
            _ => Vec::new(),
        }
    }

    pub fn matrix(&self) -> Option<&KernelMatrix> {
        match self {
            BuiltInstance::Metric(d) => Some(d.matrix()),
            BuiltInstance::Matrix(m) => Some(m),
            _ => None,
        }
    }
}

fn chain_ground(n: usize) -> Result<Arc<GroundSet>> {
    GroundSet::new((1..=n).map(|i| i.to_string()).collect::<Vec<_>>())
}

fn indicator_matrix(n: usize, strict: bool) -> Result<KernelMatrix> {
    let g = chain_ground(n)?;
    let mut vals = Vec::with_capacity(n * n);
    for x in 1..=n {
        for y in 1..=n {
            let hit = if strict { y < x } else { y <= x };
            vals.push(if hit { 0.0 } else { f64::NEG_INFINITY });
        }
    }
    KernelMatrix::from_values(g.clone(), g, KIND, &vals)
}

fn collinear_metric(n: usize) -> Result<KernelMatrix> {
    if n < 2 {
        return Err(Error::InvalidParameter(
            "a metric instance needs at least two points".into(),
        ));
    }
    let coords: Vec<f64> = (0..n).map(|i| i as f64).collect();
    let g = GroundSet::with_coords(
        (0..n).map(|i| i.to_string()).collect::<Vec<_>>(),
        coords.clone(),
    )?;
    let mut vals = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            vals.push((coords[i] - coords[j]).abs());
        }
    }
    KernelMatrix::from_values(g.clone(), g, KIND, &vals)
}

/// Builds the window module and its coordinate functional.  The probe
/// schedule scales with the window (`a ∈ {0, n, 2n, 4n, 8n}`) so the
/// kernel bound at the origin is driven strictly below `-n` on every
/// window size.
fn example7_window(n: i64) -> Result<BuiltInstance> {
    let labels: Vec<String> = (-n..=n).map(|x| x.to_string()).collect();
    let coords: Vec<f64> = (-n..=n).map(|x| x as f64).collect();
    let g = GroundSet::with_coords(labels, coords.clone())?;
    let neg_x = TropVector::from_values(
        g.clone(),
        KIND,
        &coords.iter().map(|c| -c).collect::<Vec<_>>(),
    )?;
    let one = TropVector::from_values(g.clone(), KIND, &vec![0.0; coords.len()])?;
    let module = SemimoduleSpec::new(g, KIND, vec![neg_x, one], Closure::BClosedSpan)?;
    let functional = Functional::declared(
        module.clone(),
        vec![Scalar::zero(KIND), Scalar::one(KIND)],
    )?;
    let schedule = [0, n, 2 * n, 4 * n, 8 * n]
        .iter()
        .map(|&a| Ok(vec![Scalar::new(KIND, a as f64)?, Scalar::one(KIND)]))
        .collect::<Result<Vec<_>>>()?;
    Ok(BuiltInstance::Window {
        module,
        functional,
        schedule,
    })
}

/// Materialises a named instance.  Random instances draw from the seed;
/// deterministic ones ignore it.
pub fn build_instance(name: &InstanceName, seed: u64) -> Result<BuiltInstance> {
    match name {
        InstanceName::FullKx(n) => {
            let g = GroundSet::indexed(*n)?;
            let gens = (0..*n)
                .map(|i| TropVector::unit(g.clone(), KIND, i))
                .collect();
            Ok(BuiltInstance::Module(SemimoduleSpec::new(
                g,
                KIND,
                gens,
                Closure::BClosedSpan,
            )?))
        }
        InstanceName::BoundedKx(n) => {
            let g = GroundSet::indexed(*n)?;
            let mut gens: Vec<TropVector> = (0..*n)
                .map(|i| TropVector::unit(g.clone(), KIND, i))
                .collect();
            gens.push(TropVector::from_values(g.clone(), KIND, &vec![0.0; *n])?);
            Ok(BuiltInstance::Module(SemimoduleSpec::new(
                g,
                KIND,
                gens,
                Closure::BClosedSpan,
            )?))
        }
        InstanceName::NonincreasingChain(n) => {
            let g = chain_ground(*n)?;
            let gens = (0..*n)
                .map(|i| {
                    let vals: Vec<f64> = (0..*n)
                        .map(|y| if y <= i { 0.0 } else { f64::NEG_INFINITY })
                        .collect();
                    TropVector::from_values(g.clone(), KIND, &vals)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(BuiltInstance::Module(SemimoduleSpec::new(
                g,
                KIND,
                gens,
                Closure::BClosedSpan,
            )?))
        }
        InstanceName::ConcaveGrid => Ok(BuiltInstance::Concave(ConcaveGrid::new(vec![
            0.0, 1.0, 2.0,
        ])?)),
        InstanceName::Example7Window(n) => example7_window(*n),
        InstanceName::MetricLipschitz(n) => {
            Ok(BuiltInstance::Metric(lipschitz_space(&collinear_metric(*n)?)?))
        }
        InstanceName::OrderIndicatorStrict(n) => {
            Ok(BuiltInstance::Matrix(indicator_matrix(*n, true)?))
        }
        InstanceName::OrderIndicatorNonstrict(n) => {
            Ok(BuiltInstance::Matrix(indicator_matrix(*n, false)?))
        }
        InstanceName::RandomSemimetric(n) => {
            let g = GroundSet::indexed(*n)?;
            let mut rng = sampling::trial_rng(seed, 0);
            Ok(BuiltInstance::Metric(random_reflexive_semimetric(
                &g, KIND, &mut rng,
            )?))
        }
        InstanceName::RandomSpan(n) => {
            let g = GroundSet::indexed(*n)?;
            let mut rng = sampling::trial_rng(seed, 0);
            Ok(BuiltInstance::Module(sampling::random_nondegenerate_span(
                &g,
                KIND,
                3,
                Closure::BClosedSpan,
                &mut rng,
            )?))
        }
        InstanceName::RandomWedge(n) => {
            let g = GroundSet::indexed(*n)?;
            let mut rng = sampling::trial_rng(seed, 0);
            Ok(BuiltInstance::Module(sampling::random_nondegenerate_span(
                &g,
                KIND,
                3,
                Closure::WedgeClosed,
                &mut rng,
            )?))
        }
    }
}

type R = Ratio<i128>;

/// Exact rational form of a finite `f64` (every finite double is a dyadic
/// rational).  Rejects magnitudes that would overflow the hull arithmetic.
fn exact_ratio(v: f64) -> Result<R> {
    if !v.is_finite() {
        return Err(Error::InvalidParameter(
            "hull arithmetic needs finite values".into(),
        ));
    }
    let mut num = v;
    let mut den: i128 = 1;
    while num.fract() != 0.0 {
        num *= 2.0;
        den *= 2;
        if den > (1 << 60) {
            return Err(Error::InvalidParameter(
                "value too fine for exact hull arithmetic".into(),
            ));
        }
    }
    if num.abs() >= 9.0e18 {
        return Err(Error::InvalidParameter(
            "value too large for exact hull arithmetic".into(),
        ));
    }
    Ok(Ratio::new(num as i128, den))
}

fn ratio_to_f64(r: &R) -> f64 {
    // numerator and denominator stay desk-scale after reduction, so the
    // division below is the correctly rounded quotient; dyadic values
    // (denominator a power of two) convert exactly
    *r.numer() as f64 / *r.denom() as f64
}

/// Upper concave envelope of the points `(coords[i], values[i])`, exact in
/// rational arithmetic; `None` values (semiring `𝟘`) contribute no point.
/// The result is `𝟘` outside the support interval and the hull value
/// inside it.
fn envelope_core(coords: &[R], values: &[Option<R>]) -> Vec<Option<R>> {
    let points: Vec<(R, R)> = coords
        .iter()
        .zip(values)
        .filter_map(|(x, v)| v.as_ref().map(|y| (*x, *y)))
        .collect();
    if points.is_empty() {
        return vec![None; coords.len()];
    }
    // monotone chain, slopes strictly decreasing along the hull
    let mut hull: Vec<(R, R)> = Vec::with_capacity(points.len());
    for p in points {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // drop b when it lies on or below the chord a–p
            if (b.1 - a.1) * (p.0 - a.0) <= (p.1 - a.1) * (b.0 - a.0) {
                hull.pop();
            } else {
                break;
            }
        }
        if let Some(last) = hull.last() {
            if last.0 == p.0 {
                // duplicate coordinate: keep the higher value
                if p.1 > last.1 {
                    hull.pop();
                } else {
                    continue;
                }
            }
        }
        hull.push(p);
    }
    let lo = hull.first().unwrap().0;
    let hi = hull.last().unwrap().0;
    coords
        .iter()
        .map(|x| {
            if *x < lo || *x > hi {
                return None;
            }
            let seg = hull.windows(2).find(|w| w[0].0 <= *x && *x <= w[1].0);
            Some(match seg {
                None => hull[0].1,
                Some(w) => {
                    let (a, b) = (w[0], w[1]);
                    a.1 + (b.1 - a.1) * (*x - a.0) / (b.0 - a.0)
                }
            })
        })
        .collect()
}

fn scalars_to_ratios(f: &TropVector) -> Result<Vec<Option<R>>> {
    f.entries()
        .iter()
        .map(|e| {
            if e.is_zero() {
                Ok(None)
            } else if e.is_top() {
                Err(Error::InvalidParameter(
                    "the concave grid has no top element".into(),
                ))
            } else {
                exact_ratio(e.value()).map(Some)
            }
        })
        .collect()
}

/// Least concave majorant of the pointwise max of `f` and `g` over the
/// given coordinates: the addition of the concave-grid quasisubsemimodule.
/// Computed exactly in rational arithmetic; outputs are exact `f64`s
/// whenever the interpolation denominators are dyadic (always the case on
/// the default grid).
pub fn concave_oplus(f: &TropVector, g: &TropVector, coords: &[f64]) -> Result<TropVector> {
    if f.ground() != g.ground() || coords.len() != f.len() {
        return Err(Error::GroundMismatch);
    }
    let xs = coords.iter().map(|&c| exact_ratio(c)).collect::<Result<Vec<_>>>()?;
    for w in xs.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::UnsortedCoords);
        }
    }
    let fv = scalars_to_ratios(f)?;
    let gv = scalars_to_ratios(g)?;
    let merged: Vec<Option<R>> = fv
        .into_iter()
        .zip(gv)
        .map(|(a, b)| match (a, b) {
            (None, v) | (v, None) => v,
            (Some(x), Some(y)) => Some(x.max(y)),
        })
        .collect();
    let hull = envelope_core(&xs, &merged);
    let entries = hull
        .into_iter()
        .map(|v| match v {
            None => Ok(Scalar::zero(f.kind())),
            Some(r) => Scalar::new(f.kind(), ratio_to_f64(&r)),
        })
        .collect::<Result<Vec<_>>>()?;
    TropVector::new(f.ground().clone(), entries)
}

/// A finite grid carrying the concave-envelope addition: the one catalogue
/// member that is a quasisubsemimodule rather than a b-subsemimodule, and
/// the standing counterexample to pointwise behaviour of δ-functionals.
#[derive(Clone, Debug)]
pub struct ConcaveGrid {
    ground: Arc<GroundSet>,
    coords: Vec<f64>,
}

impl ConcaveGrid {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::InvalidParameter(
                "a concave grid needs at least two points".into(),
            ));
        }
        for w in coords.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::UnsortedCoords);
            }
        }
        let ground = GroundSet::with_coords(
            coords.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            coords.clone(),
        )?;
        Ok(ConcaveGrid { ground, coords })
    }

    pub fn ground(&self) -> &Arc<GroundSet> {
        &self.ground
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn hull_sum(&self, f: &TropVector, g: &TropVector) -> Result<TropVector> {
        concave_oplus(f, g, &self.coords)
    }

    pub fn envelope(&self, f: &TropVector) -> Result<TropVector> {
        let zero = TropVector::zero(self.ground.clone(), f.kind());
        concave_oplus(f, &zero, &self.coords)
    }

    /// Membership in the grid's concave cone: the function equals its own
    /// envelope (in particular its support is an interval).
    pub fn contains(&self, f: &TropVector) -> Result<bool> {
        Ok(self.envelope(f)? == *f)
    }

    /// The documented witness against pointwise δ-linearity: two concave
    /// ramps whose hull sum lifts the middle of the grid strictly above
    /// the pointwise max.
    pub fn witness_pair(&self) -> Result<(TropVector, TropVector)> {
        let n = self.coords.len();
        if n < 3 {
            return Err(Error::InvalidParameter(
                "the witness pair needs an interior point".into(),
            ));
        }
        let f = TropVector::from_values(
            self.ground.clone(),
            KIND,
            &(0..n)
                .map(|i| -5.0 * (self.coords[i] - self.coords[0]))
                .collect::<Vec<_>>(),
        )?;
        let g = TropVector::from_values(
            self.ground.clone(),
            KIND,
            &(0..n)
                .map(|i| -5.0 * (self.coords[n - 1] - self.coords[i]))
                .collect::<Vec<_>>(),
        )?;
        Ok((f, g))
    }

    pub fn middle_index(&self) -> usize {
        self.coords.len() / 2
    }
}

/// Random concave member of the grid: cumulative sums of nonincreasing
/// integer increments are exactly the integer concave functions, so no
/// envelope pass (and no rounding) is involved.
pub fn random_concave<RNG: Rng>(grid: &ConcaveGrid, rng: &mut RNG) -> Result<TropVector> {
    let n = grid.coords.len();
    let start: i64 = rng.gen_range(-5..=5);
    let mut slope: i64 = rng.gen_range(0..=4);
    let mut value = start as f64;
    let mut vals = Vec::with_capacity(n);
    vals.push(value);
    for i in 1..n {
        value += slope as f64 * (grid.coords[i] - grid.coords[i - 1]);
        vals.push(value);
        slope -= rng.gen_range(0..=2);
    }
    TropVector::from_values(grid.ground.clone(), KIND, &vals)
}
