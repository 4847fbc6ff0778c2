//! Finitely generated semimodules of semiring-valued functions on a finite
//! ground set.
//!
//! A [`SemimoduleSpec`] holds a generator list together with a closure mode:
//!
//! * `b-closed-span`: arbitrary (bounded) sups of scaled generators.  Over a
//!   completed scalar domain this collapses to finite sups `⊕ cᵢ ⊙ gᵢ` with
//!   coefficients drawn from the completed semiring, so membership is decided
//!   exactly by the principal (residuated) coefficients.
//! * `wedge-closed`: additionally closed under finite pointwise infima.
//!   Since the scalar order is total, `⊙` and `⊕` distribute over `∧`, and
//!   the wedge closure is exactly the set of finite infima of span members.
//!
//! Membership, support computation, admissibility and the minimal unit
//! sections used by the kernel machinery all live here.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::semiring::{inf_set, Scalar, SemiringKind};

/// A finite, ordered set of labelled points, optionally with a real
/// coordinate per point (used by grid-flavoured instances).
#[derive(Clone, Debug, PartialEq)]
pub struct GroundSet {
    labels: Vec<String>,
    coords: Option<Vec<f64>>,
}

impl GroundSet {
    pub fn new<S: Into<String>>(labels: Vec<S>) -> Result<Arc<Self>> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::InvalidParameter("ground set is empty".into()));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate ground point `{l}`"
                )));
            }
        }
        Ok(Arc::new(GroundSet {
            labels,
            coords: None,
        }))
    }

    pub fn with_coords<S: Into<String>>(labels: Vec<S>, coords: Vec<f64>) -> Result<Arc<Self>> {
        let base = GroundSet::new(labels)?;
        if coords.len() != base.labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels but {} coordinates",
                base.labels.len(),
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(
                "coordinates must be finite".into(),
            ));
        }
        Ok(Arc::new(GroundSet {
            labels: base.labels.clone(),
            coords: Some(coords),
        }))
    }

    /// Convenience: points labelled `p0..p{n-1}`.
    pub fn indexed(n: usize) -> Result<Arc<Self>> {
        GroundSet::new((0..n).map(|i| format!("p{i}")).collect())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn coords(&self) -> Option<&[f64]> {
        self.coords.as_deref()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownPoint(label.to_string()))
    }
}

pub(crate) fn same_ground(a: &Arc<GroundSet>, b: &Arc<GroundSet>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// A `K`-valued function on a ground set, stored densely.
#[derive(Clone)]
pub struct TropVector {
    ground: Arc<GroundSet>,
    entries: Vec<Scalar>,
}

impl fmt::Debug for TropVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "]")
    }
}

impl PartialEq for TropVector {
    fn eq(&self, other: &Self) -> bool {
        same_ground(&self.ground, &other.ground) && self.entries == other.entries
    }
}

impl TropVector {
    pub fn new(ground: Arc<GroundSet>, entries: Vec<Scalar>) -> Result<Self> {
        if entries.len() != ground.len() {
            return Err(Error::DimensionMismatch(format!(
                "vector has {} entries on a ground set of {} points",
                entries.len(),
                ground.len()
            )));
        }
        let kind = entries[0].kind();
        for e in &entries[1..] {
            if e.kind() != kind {
                return Err(Error::SemiringMismatch {
                    left: kind,
                    right: e.kind(),
                });
            }
        }
        Ok(TropVector { ground, entries })
    }

    /// Builds from raw `f64` values, validating each entry.
    pub fn from_values(ground: Arc<GroundSet>, kind: SemiringKind, values: &[f64]) -> Result<Self> {
        let entries = values
            .iter()
            .map(|&v| Scalar::new(kind, v))
            .collect::<Result<Vec<_>>>()?;
        TropVector::new(ground, entries)
    }

    pub fn zero(ground: Arc<GroundSet>, kind: SemiringKind) -> Self {
        let entries = vec![Scalar::zero(kind); ground.len()];
        TropVector { ground, entries }
    }

    /// The unit vector `δ`-shaped at `index`: `𝟙` there, `𝟘` elsewhere.
    pub fn unit(ground: Arc<GroundSet>, kind: SemiringKind, index: usize) -> Self {
        let mut entries = vec![Scalar::zero(kind); ground.len()];
        entries[index] = Scalar::one(kind);
        TropVector { ground, entries }
    }

    pub fn ground(&self) -> &Arc<GroundSet> {
        &self.ground
    }

    pub fn kind(&self) -> SemiringKind {
        self.entries[0].kind()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Scalar] {
        &self.entries
    }

    pub fn get(&self, index: usize) -> Scalar {
        self.entries[index]
    }

    /// Evaluation at a labelled point (the `δ_x` functional applied to `self`).
    pub fn value_at(&self, label: &str) -> Result<Scalar> {
        Ok(self.entries[self.ground.index_of(label)?])
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Scalar::is_zero)
    }

    fn check_compatible(&self, other: &TropVector) -> Result<()> {
        if !same_ground(&self.ground, &other.ground) {
            return Err(Error::GroundMismatch);
        }
        if self.kind() != other.kind() {
            return Err(Error::SemiringMismatch {
                left: self.kind(),
                right: other.kind(),
            });
        }
        Ok(())
    }

    /// Pointwise `⊕`.
    pub fn sup(&self, other: &TropVector) -> Result<TropVector> {
        self.check_compatible(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.oplus(b))
            .collect::<Result<Vec<_>>>()?;
        TropVector::new(self.ground.clone(), entries)
    }

    /// Pointwise `∧`.
    pub fn inf(&self, other: &TropVector) -> Result<TropVector> {
        self.check_compatible(other)?;
        let kind = self.kind();
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| inf_set(kind, &[*a, *b]))
            .collect::<Result<Vec<_>>>()?;
        TropVector::new(self.ground.clone(), entries)
    }

    /// Scalar multiple `c ⊙ self`.
    pub fn scale(&self, c: &Scalar) -> Result<TropVector> {
        let entries = self
            .entries
            .iter()
            .map(|e| c.odot(e))
            .collect::<Result<Vec<_>>>()?;
        TropVector::new(self.ground.clone(), entries)
    }

    /// Entrywise residual `c \ self`.
    pub fn residual_from(&self, c: &Scalar) -> Result<TropVector> {
        let entries = self
            .entries
            .iter()
            .map(|e| c.residual(e))
            .collect::<Result<Vec<_>>>()?;
        TropVector::new(self.ground.clone(), entries)
    }

    /// Pointwise order.
    pub fn leq(&self, other: &TropVector) -> Result<bool> {
        self.check_compatible(other)?;
        for (a, b) in self.entries.iter().zip(&other.entries) {
            if !a.leq(b)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Evaluation functional: `δ_x(f) = f(x)`.
pub fn delta_eval(label: &str, f: &TropVector) -> Result<Scalar> {
    f.value_at(label)
}

/// How a generator list is closed into a semimodule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Closure {
    #[serde(rename = "b-closed-span")]
    BClosedSpan,
    #[serde(rename = "wedge-closed")]
    WedgeClosed,
}

impl fmt::Display for Closure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Closure::BClosedSpan => f.write_str("b-closed-span"),
            Closure::WedgeClosed => f.write_str("wedge-closed"),
        }
    }
}

/// Outcome of a span membership test: the principal coefficients and the
/// projection they reconstruct.  `projection` is the largest span member
/// below the query, so `member` holds exactly when they coincide.
#[derive(Clone, Debug)]
pub struct Membership {
    pub member: bool,
    pub coefficients: Vec<Scalar>,
    pub projection: TropVector,
}

/// A finitely generated functional semimodule.
#[derive(Clone, Debug)]
pub struct SemimoduleSpec {
    ground: Arc<GroundSet>,
    kind: SemiringKind,
    generators: Vec<TropVector>,
    closure: Closure,
    /// Indices of the support `X_V = { x : ∃ f ∈ V, f(x) = 𝟙 }`, cached at
    /// construction.
    support: Vec<usize>,
}

impl SemimoduleSpec {
    pub fn new(
        ground: Arc<GroundSet>,
        kind: SemiringKind,
        generators: Vec<TropVector>,
        closure: Closure,
    ) -> Result<Self> {
        for g in &generators {
            if !same_ground(g.ground(), &ground) {
                return Err(Error::GroundMismatch);
            }
            if g.kind() != kind {
                return Err(Error::SemiringMismatch {
                    left: kind,
                    right: g.kind(),
                });
            }
        }
        let support = compute_support(&ground, &generators)?;
        Ok(SemimoduleSpec {
            ground,
            kind,
            generators,
            closure,
            support,
        })
    }

    pub fn ground(&self) -> &Arc<GroundSet> {
        &self.ground
    }

    pub fn kind(&self) -> SemiringKind {
        self.kind
    }

    pub fn generators(&self) -> &[TropVector] {
        &self.generators
    }

    pub fn closure(&self) -> Closure {
        self.closure
    }

    /// Indices of the nondegeneracy support `X_V`.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn support_labels(&self) -> Vec<&str> {
        self.support
            .iter()
            .map(|&i| self.ground.label(i))
            .collect()
    }

    /// `V` is nondegenerate when every ground point carries a member with
    /// value `𝟙`.
    pub fn is_nondegenerate(&self) -> bool {
        self.support.len() == self.ground.len()
    }

    /// Two specs present the same module the same way: equal ground sets,
    /// generator lists and closure mode.
    pub fn same_presentation(&self, other: &SemimoduleSpec) -> bool {
        same_ground(&self.ground, &other.ground)
            && self.kind == other.kind
            && self.closure == other.closure
            && self.generators == other.generators
    }

    fn check_vector(&self, f: &TropVector) -> Result<()> {
        if !same_ground(f.ground(), &self.ground) {
            return Err(Error::GroundMismatch);
        }
        if f.kind() != self.kind {
            return Err(Error::SemiringMismatch {
                left: self.kind,
                right: f.kind(),
            });
        }
        Ok(())
    }

    /// `⊕ cᵢ ⊙ gᵢ` for a full coefficient tuple.
    pub fn combine(&self, coefficients: &[Scalar]) -> Result<TropVector> {
        if coefficients.len() != self.generators.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for {} generators",
                coefficients.len(),
                self.generators.len()
            )));
        }
        let mut acc = TropVector::zero(self.ground.clone(), self.kind);
        for (c, g) in coefficients.iter().zip(&self.generators) {
            acc = acc.sup(&g.scale(c)?)?;
        }
        Ok(acc)
    }

    /// Principal-solution membership for `b-closed-span` specs.
    ///
    /// The coefficients `cᵢ = ∧_x gᵢ(x) \ f(x)` are the largest ones whose
    /// combination stays below `f`; `f` is a member iff the combination
    /// reaches `f` again.
    pub fn membership(&self, f: &TropVector) -> Result<Membership> {
        if self.closure != Closure::BClosedSpan {
            return Err(Error::WrongClosure {
                expected: Closure::BClosedSpan,
                found: self.closure,
            });
        }
        self.check_vector(f)?;
        let mut coefficients = Vec::with_capacity(self.generators.len());
        for g in &self.generators {
            let mut c = Scalar::top(self.kind);
            for (gx, fx) in g.entries().iter().zip(f.entries()) {
                c = inf_set(self.kind, &[c, gx.residual(fx)?])?;
            }
            coefficients.push(c);
        }
        let projection = self.combine(&coefficients)?;
        let member = projection == *f;
        Ok(Membership {
            member,
            coefficients,
            projection,
        })
    }

    /// Membership for `wedge-closed` specs.
    ///
    /// `f` lies in the wedge closure iff for every point `x` some span
    /// member dominates `f` while touching it at `x`.  The cheapest touching
    /// value at `x` is `⊕_y ∧_i (gᵢ(y) \ f(y)) ⊙ gᵢ(x)` over the points `y`
    /// that constrain domination, so `f` is a member iff that projection
    /// collapses back onto `f`.  Generators are used at points where their
    /// value is invertible; a constraint no generator can cover is an
    /// immediate rejection.
    pub fn wedge_membership(&self, f: &TropVector) -> Result<bool> {
        if self.closure != Closure::WedgeClosed {
            return Err(Error::WrongClosure {
                expected: Closure::WedgeClosed,
                found: self.closure,
            });
        }
        self.check_vector(f)?;
        if f.is_zero() {
            return Ok(true);
        }
        let n = self.ground.len();
        let mut projection = TropVector::zero(self.ground.clone(), self.kind);
        for y in 0..n {
            let fy = f.get(y);
            if fy.is_zero() {
                continue;
            }
            // tightest dominating cover of the constraint at y, per point
            let mut cover: Option<TropVector> = None;
            for g in &self.generators {
                let gy = g.get(y);
                if !gy.is_invertible() {
                    continue;
                }
                let scaled = g.scale(&gy.residual(&fy)?)?;
                cover = Some(match cover {
                    None => scaled,
                    Some(c) => c.inf(&scaled)?,
                });
            }
            match cover {
                None => return Ok(false),
                Some(c) => projection = projection.sup(&c)?,
            }
        }
        Ok(projection == *f)
    }

    /// Dispatches on the closure mode.
    pub fn contains(&self, f: &TropVector) -> Result<bool> {
        match self.closure {
            Closure::BClosedSpan => Ok(self.membership(f)?.member),
            Closure::WedgeClosed => self.wedge_membership(f),
        }
    }

    /// Admissibility: every member `f` and point `x` with `f(x) ≠ 𝟘` admit a
    /// member `g` with `g(x) = 𝟙` and `f(x) ⊙ g ≼ f`.
    ///
    /// When every generator entry is `𝟘` or invertible this holds outright
    /// (normalise by the inverse; coefficients equal to `⊤` only enlarge the
    /// top-set, which the same normalised generator covers).  Otherwise the
    /// critical members are the generators and their `⊤`-multiples, and each
    /// `⊤`-valued constraint needs a unit witness supported inside the
    /// offending top-set; that search is explicit.
    pub fn is_admissible(&self) -> Result<bool> {
        let regular = self
            .generators
            .iter()
            .all(|g| g.entries().iter().all(|e| e.is_zero() || e.is_invertible()));
        if regular {
            return Ok(true);
        }
        let top = Scalar::top(self.kind);
        let one = Scalar::one(self.kind);
        for g in &self.generators {
            for scale in [one, top] {
                let f = g.scale(&scale)?;
                for x in 0..self.ground.len() {
                    let fx = f.get(x);
                    if fx.is_zero() || fx.is_invertible() {
                        continue;
                    }
                    let top_set: Vec<bool> = f.entries().iter().map(Scalar::is_top).collect();
                    if !self.unit_witness_inside(x, &top_set)? {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    /// Can some member take value `𝟙` at `x` while vanishing outside `mask`?
    fn unit_witness_inside(&self, x: usize, mask: &[bool]) -> Result<bool> {
        let one = Scalar::one(self.kind);
        for g in &self.generators {
            let supported = g
                .entries()
                .iter()
                .enumerate()
                .all(|(i, e)| e.is_zero() || mask[i]);
            if !supported {
                continue;
            }
            let gx = g.get(x);
            if gx.odot(&gx.residual(&one)?)?.is_one() {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// The minimal member with value `𝟙` at `x`:
    /// `∧ { f ∈ V : f(x) = 𝟙 } = ∧_i gᵢ(x)⁻¹ ⊙ gᵢ` over generators with an
    /// invertible value at `x`.  Requires a wedge-closed, admissible spec and
    /// `x` in the support; the defining postconditions are re-checked and any
    /// failure is reported rather than masked.
    pub fn unit_minorant(&self, x: usize) -> Result<TropVector> {
        if self.closure != Closure::WedgeClosed {
            return Err(Error::WrongClosure {
                expected: Closure::WedgeClosed,
                found: self.closure,
            });
        }
        if !self.is_admissible()? {
            return Err(Error::NotAdmissible);
        }
        if !self.support.contains(&x) {
            return Err(Error::OutsideSupport(self.ground.label(x).to_string()));
        }
        let one = Scalar::one(self.kind);
        let mut acc: Option<TropVector> = None;
        for g in &self.generators {
            let gx = g.get(x);
            if !gx.is_invertible() {
                continue;
            }
            let normalised = g.scale(&gx.residual(&one)?)?;
            acc = Some(match acc {
                None => normalised,
                Some(a) => a.inf(&normalised)?,
            });
        }
        let d = acc.ok_or_else(|| {
            Error::Postcondition(format!(
                "no invertible generator value at `{}`",
                self.ground.label(x)
            ))
        })?;
        if !d.get(x).is_one() {
            return Err(Error::Postcondition(format!(
                "minimal section takes value {} ≠ 𝟙 at `{}`",
                d.get(x),
                self.ground.label(x)
            )));
        }
        for g in &self.generators {
            if !d.scale(&g.get(x))?.leq(g)? {
                return Err(Error::Postcondition(format!(
                    "minimal section at `{}` fails domination against a generator",
                    self.ground.label(x)
                )));
            }
        }
        Ok(d)
    }

    /// `(x, d_x)` for every support point.
    pub fn unit_minorant_table(&self) -> Result<Vec<(usize, TropVector)>> {
        self.support
            .iter()
            .map(|&x| Ok((x, self.unit_minorant(x)?)))
            .collect()
    }
}

/// `x ∈ X_V` iff some scaled generator reaches `𝟙` at `x`; with completed
/// coefficients that happens exactly when `g(x) ⊙ (g(x) \ 𝟙) = 𝟙` for some
/// generator.
fn compute_support(ground: &Arc<GroundSet>, generators: &[TropVector]) -> Result<Vec<usize>> {
    let mut support = Vec::new();
    'points: for x in 0..ground.len() {
        for g in generators {
            let gx = g.get(x);
            let one = Scalar::one(gx.kind());
            if gx.odot(&gx.residual(&one)?)?.is_one() {
                support.push(x);
                continue 'points;
            }
        }
    }
    Ok(support)
}
