//! b-linear operators between functional semimodules and their integral
//! kernels.
//!
//! An integral operator acts through a kernel matrix:
//! `(Af)(y) = ⊕_x f(x) ⊙ k(x, y)`.  A kernel of an operator `V → W` is
//! required to have every row `k(x, ·)` inside the codomain module `W`;
//! [`max_kernel`] extracts the entrywise-largest such kernel and verifies
//! the representation exactly, on the generators and on a seeded batch of
//! random probes.  Verification failure is not an error: it is the
//! interesting outcome (some b-linear functionals have no integral kernel),
//! so the result carries a flag plus the first failing witness.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exec;
use crate::sampling::{self, ProbeConfig};
use crate::semimodule::{same_ground, Closure, GroundSet, SemimoduleSpec, TropVector};
use crate::semiring::{inf_set, Scalar, SemiringKind};

/// A scalar matrix indexed by two ground sets, row-major.  Houses integral
/// kernels `k(x, y)` and semimetrics `d(x, y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelMatrix {
    rows: Arc<GroundSet>,
    cols: Arc<GroundSet>,
    kind: SemiringKind,
    entries: Vec<Scalar>,
}

impl KernelMatrix {
    pub fn new(
        rows: Arc<GroundSet>,
        cols: Arc<GroundSet>,
        kind: SemiringKind,
        entries: Vec<Scalar>,
    ) -> Result<Self> {
        if entries.len() != rows.len() * cols.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {}×{} matrix",
                entries.len(),
                rows.len(),
                cols.len()
            )));
        }
        for e in &entries {
            if e.kind() != kind {
                return Err(Error::SemiringMismatch {
                    left: kind,
                    right: e.kind(),
                });
            }
        }
        Ok(KernelMatrix {
            rows,
            cols,
            kind,
            entries,
        })
    }

    /// Builds from raw `f64` values in row-major order.
    pub fn from_values(
        rows: Arc<GroundSet>,
        cols: Arc<GroundSet>,
        kind: SemiringKind,
        values: &[f64],
    ) -> Result<Self> {
        let entries = values
            .iter()
            .map(|&v| Scalar::new(kind, v))
            .collect::<Result<Vec<_>>>()?;
        KernelMatrix::new(rows, cols, kind, entries)
    }

    /// Stacks row vectors (all on one codomain ground).
    pub fn from_rows(rows: Arc<GroundSet>, row_vectors: &[TropVector]) -> Result<Self> {
        if row_vectors.len() != rows.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} row vectors for {} row points",
                row_vectors.len(),
                rows.len()
            )));
        }
        let cols = row_vectors
            .first()
            .ok_or_else(|| Error::InvalidParameter("cannot stack zero rows".into()))?
            .ground()
            .clone();
        let kind = row_vectors[0].kind();
        let mut entries = Vec::with_capacity(rows.len() * cols.len());
        for r in row_vectors {
            if !same_ground(r.ground(), &cols) {
                return Err(Error::GroundMismatch);
            }
            if r.kind() != kind {
                return Err(Error::SemiringMismatch {
                    left: kind,
                    right: r.kind(),
                });
            }
            entries.extend_from_slice(r.entries());
        }
        KernelMatrix::new(rows, cols, kind, entries)
    }

    pub fn zero(rows: Arc<GroundSet>, cols: Arc<GroundSet>, kind: SemiringKind) -> Self {
        let entries = vec![Scalar::zero(kind); rows.len() * cols.len()];
        KernelMatrix {
            rows,
            cols,
            kind,
            entries,
        }
    }

    /// `k(x, y) = 𝟙` iff `x = y`, `𝟘` otherwise; neutral for composition.
    pub fn identity(ground: Arc<GroundSet>, kind: SemiringKind) -> Self {
        let n = ground.len();
        let mut entries = vec![Scalar::zero(kind); n * n];
        for i in 0..n {
            entries[i * n + i] = Scalar::one(kind);
        }
        KernelMatrix {
            rows: ground.clone(),
            cols: ground,
            kind,
            entries,
        }
    }

    pub fn rows_ground(&self) -> &Arc<GroundSet> {
        &self.rows
    }

    pub fn cols_ground(&self) -> &Arc<GroundSet> {
        &self.cols
    }

    pub fn kind(&self) -> SemiringKind {
        self.kind
    }

    pub fn is_square(&self) -> bool {
        same_ground(&self.rows, &self.cols)
    }

    pub fn entry(&self, x: usize, y: usize) -> Scalar {
        self.entries[x * self.cols.len() + y]
    }

    pub fn row(&self, x: usize) -> TropVector {
        let w = self.cols.len();
        let entries = self.entries[x * w..(x + 1) * w].to_vec();
        TropVector::new(self.cols.clone(), entries).expect("row slice matches column ground")
    }

    pub fn row_vectors(&self) -> Vec<TropVector> {
        (0..self.rows.len()).map(|x| self.row(x)).collect()
    }

    pub fn transpose(&self) -> KernelMatrix {
        let (n, m) = (self.rows.len(), self.cols.len());
        let mut entries = Vec::with_capacity(n * m);
        for y in 0..m {
            for x in 0..n {
                entries.push(self.entry(x, y));
            }
        }
        KernelMatrix {
            rows: self.cols.clone(),
            cols: self.rows.clone(),
            kind: self.kind,
            entries,
        }
    }

    fn check_same_shape(&self, other: &KernelMatrix) -> Result<()> {
        if !same_ground(&self.rows, &other.rows) || !same_ground(&self.cols, &other.cols) {
            return Err(Error::GroundMismatch);
        }
        if self.kind != other.kind {
            return Err(Error::SemiringMismatch {
                left: self.kind,
                right: other.kind,
            });
        }
        Ok(())
    }

    /// Entrywise `⊕`.
    pub fn sup(&self, other: &KernelMatrix) -> Result<KernelMatrix> {
        self.check_same_shape(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.oplus(b))
            .collect::<Result<Vec<_>>>()?;
        KernelMatrix::new(self.rows.clone(), self.cols.clone(), self.kind, entries)
    }

    /// Entrywise order.
    pub fn leq(&self, other: &KernelMatrix) -> Result<bool> {
        self.check_same_shape(other)?;
        for (a, b) in self.entries.iter().zip(&other.entries) {
            if !a.leq(b)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Kernel action: `(f ⊙ k)(y) = ⊕_x f(x) ⊙ k(x, y)`.
    pub fn apply(&self, f: &TropVector) -> Result<TropVector> {
        if !same_ground(f.ground(), &self.rows) {
            return Err(Error::GroundMismatch);
        }
        if f.kind() != self.kind {
            return Err(Error::SemiringMismatch {
                left: self.kind,
                right: f.kind(),
            });
        }
        let mut out = vec![Scalar::zero(self.kind); self.cols.len()];
        for x in 0..self.rows.len() {
            let fx = f.get(x);
            if fx.is_zero() {
                continue;
            }
            for (y, o) in out.iter_mut().enumerate() {
                let term = fx.odot(&self.entry(x, y)).expect("same semiring");
                *o = o.oplus(&term).expect("same semiring");
            }
        }
        TropVector::new(self.cols.clone(), out)
    }

    fn compose_row(&self, other: &KernelMatrix, x: usize) -> Vec<Scalar> {
        let mid = self.cols.len();
        let w = other.cols.len();
        let mut out = vec![Scalar::zero(self.kind); w];
        for y in 0..mid {
            let a = self.entry(x, y);
            if a.is_zero() {
                continue;
            }
            for (z, o) in out.iter_mut().enumerate() {
                let term = a.odot(&other.entry(y, z)).expect("same semiring");
                *o = o.oplus(&term).expect("same semiring");
            }
        }
        out
    }

    fn compose_checked(&self, other: &KernelMatrix) -> Result<()> {
        if !same_ground(&self.cols, &other.rows) {
            return Err(Error::GroundMismatch);
        }
        if self.kind != other.kind {
            return Err(Error::SemiringMismatch {
                left: self.kind,
                right: other.kind,
            });
        }
        Ok(())
    }

    /// Tropical matrix product `(a ∘ b)(x, z) = ⊕_y a(x, y) ⊙ b(y, z)`;
    /// rows are computed data-parallel when the `parallel` feature is on.
    pub fn compose(&self, other: &KernelMatrix) -> Result<KernelMatrix> {
        self.compose_checked(other)?;
        let rows = exec::map_indices(self.rows.len(), |x| self.compose_row(other, x));
        KernelMatrix::new(
            self.rows.clone(),
            other.cols.clone(),
            self.kind,
            rows.concat(),
        )
    }

    /// Sequential twin of [`compose`](Self::compose), kept callable in
    /// parallel builds so the two paths can be benchmarked side by side.
    pub fn compose_serial(&self, other: &KernelMatrix) -> Result<KernelMatrix> {
        self.compose_checked(other)?;
        let rows = exec::map_indices_serial(self.rows.len(), |x| self.compose_row(other, x));
        KernelMatrix::new(
            self.rows.clone(),
            other.cols.clone(),
            self.kind,
            rows.concat(),
        )
    }
}

/// A b-linear operator, stored as a kernel whenever possible.  The
/// tabulated form exists for black-box functionals given by their values on
/// the generators of a span.
#[derive(Clone, Debug)]
pub enum LinearOperator {
    Integral(KernelMatrix),
    Tabulated {
        domain: SemimoduleSpec,
        values: Vec<TropVector>,
    },
}

impl LinearOperator {
    pub fn identity(ground: Arc<GroundSet>, kind: SemiringKind) -> Self {
        LinearOperator::Integral(KernelMatrix::identity(ground, kind))
    }

    /// Tabulated operator with a consistency check: whenever two coefficient
    /// tuples present the same vector, the declared values must agree.  The
    /// canonical (principal) representation is compared against the declared
    /// one on every generator and on a seeded probe batch.
    pub fn tabulated(
        domain: SemimoduleSpec,
        values: Vec<TropVector>,
        cfg: &ProbeConfig,
    ) -> Result<Self> {
        let op = LinearOperator::from_declared_values(domain, values)?;
        let (domain, values) = match &op {
            LinearOperator::Tabulated { domain, values } => (domain, values),
            LinearOperator::Integral(_) => unreachable!(),
        };
        let check = |label: &str, coeffs: &[Scalar]| -> Result<()> {
            let vector = domain.combine(coeffs)?;
            let principal = domain.membership(&vector)?.coefficients;
            let declared = combine_values(domain.kind(), values, coeffs)?;
            let canonical = combine_values(domain.kind(), values, &principal)?;
            if declared != canonical {
                return Err(Error::InconsistentTabulation(format!(
                    "{label}: declared value {declared:?} vs canonical {canonical:?}"
                )));
            }
            Ok(())
        };
        let one = Scalar::one(domain.kind());
        let zero = Scalar::zero(domain.kind());
        for i in 0..domain.generators().len() {
            let mut unit = vec![zero; domain.generators().len()];
            unit[i] = one;
            check(&format!("generator {i}"), &unit)?;
        }
        for p in 0..cfg.kernel_probes {
            let mut rng = sampling::trial_rng(cfg.seed, p as u64);
            let coeffs =
                sampling::random_coefficients(domain.generators().len(), domain.kind(), &mut rng);
            check(&format!("probe {p}"), &coeffs)?;
        }
        Ok(op)
    }

    /// Tabulated operator evaluated by declared coefficients only, with no
    /// consistency probing.  This is the faithful reading of a functional
    /// defined on abstract coordinates: two coefficient tuples may present
    /// the same vector yet be sent to different values, which is precisely
    /// how embedding-dependent non-integrality shows up.
    pub fn from_declared_values(
        domain: SemimoduleSpec,
        values: Vec<TropVector>,
    ) -> Result<Self> {
        if domain.closure() != Closure::BClosedSpan {
            return Err(Error::WrongClosure {
                expected: Closure::BClosedSpan,
                found: domain.closure(),
            });
        }
        if values.len() != domain.generators().len() {
            return Err(Error::DimensionMismatch(format!(
                "{} values for {} generators",
                values.len(),
                domain.generators().len()
            )));
        }
        if let Some(first) = values.first() {
            for v in &values {
                if !same_ground(v.ground(), first.ground()) {
                    return Err(Error::GroundMismatch);
                }
                if v.kind() != domain.kind() {
                    return Err(Error::SemiringMismatch {
                        left: domain.kind(),
                        right: v.kind(),
                    });
                }
            }
        }
        Ok(LinearOperator::Tabulated { domain, values })
    }

    pub fn domain_ground(&self) -> &Arc<GroundSet> {
        match self {
            LinearOperator::Integral(k) => k.rows_ground(),
            LinearOperator::Tabulated { domain, .. } => domain.ground(),
        }
    }

    /// The codomain ground, when it is determined by the representation.
    pub fn codomain_ground(&self) -> Option<&Arc<GroundSet>> {
        match self {
            LinearOperator::Integral(k) => Some(k.cols_ground()),
            LinearOperator::Tabulated { values, .. } => values.first().map(TropVector::ground),
        }
    }

    pub fn kind(&self) -> SemiringKind {
        match self {
            LinearOperator::Integral(k) => k.kind(),
            LinearOperator::Tabulated { domain, .. } => domain.kind(),
        }
    }

    /// Applies to a vector.  Tabulated operators resolve the argument
    /// through span membership (principal coefficients), so they require a
    /// consistent tabulation to be meaningful; constructors enforce this
    /// unless the caller explicitly opted out.
    pub fn apply(&self, f: &TropVector) -> Result<TropVector> {
        match self {
            LinearOperator::Integral(k) => k.apply(f),
            LinearOperator::Tabulated { domain, values } => {
                let m = domain.membership(f)?;
                if !m.member {
                    return Err(Error::NotMember);
                }
                combine_values(domain.kind(), values, &m.coefficients)
            }
        }
    }

    /// Applies to an abstract element `⊕ cᵢ ⊙ gᵢ` given by its coefficients
    /// over `domain`'s generators.
    pub fn apply_coeffs(&self, domain: &SemimoduleSpec, coeffs: &[Scalar]) -> Result<TropVector> {
        match self {
            LinearOperator::Integral(k) => k.apply(&domain.combine(coeffs)?),
            LinearOperator::Tabulated {
                domain: own,
                values,
            } => {
                if !own.same_presentation(domain) {
                    return Err(Error::InvalidParameter(
                        "tabulated operator is declared on a different presentation".into(),
                    ));
                }
                if coeffs.len() != values.len() {
                    return Err(Error::DimensionMismatch(format!(
                        "{} coefficients for {} tabulated values",
                        coeffs.len(),
                        values.len()
                    )));
                }
                combine_values(own.kind(), values, coeffs)
            }
        }
    }

    /// The operator's values on the generators of `domain`.
    pub fn values_on_generators(&self, domain: &SemimoduleSpec) -> Result<Vec<TropVector>> {
        match self {
            LinearOperator::Integral(k) => {
                domain.generators().iter().map(|g| k.apply(g)).collect()
            }
            LinearOperator::Tabulated {
                domain: own,
                values,
            } => {
                if !own.same_presentation(domain) {
                    return Err(Error::InvalidParameter(
                        "tabulated operator is declared on a different presentation".into(),
                    ));
                }
                Ok(values.clone())
            }
        }
    }
}

fn combine_values(
    kind: SemiringKind,
    values: &[TropVector],
    coeffs: &[Scalar],
) -> Result<TropVector> {
    let ground = values
        .first()
        .ok_or_else(|| Error::InvalidParameter(
            "tabulated operator over the empty generator list has no codomain".into(),
        ))?
        .ground()
        .clone();
    let mut acc = TropVector::zero(ground, kind);
    for (c, v) in coeffs.iter().zip(values) {
        acc = acc.sup(&v.scale(c)?)?;
    }
    Ok(acc)
}

/// Pointwise sup of a finite family of integral operators: the kernel is
/// the entrywise sup of kernels, and application commutes with the sup.
pub fn sup_operators(ops: &[LinearOperator]) -> Result<LinearOperator> {
    let mut kernels = ops.iter().map(|op| match op {
        LinearOperator::Integral(k) => Ok(k),
        LinearOperator::Tabulated { .. } => Err(Error::InvalidParameter(
            "sup of operators requires integral representations".into(),
        )),
    });
    let first = kernels
        .next()
        .ok_or(Error::EmptyFamily)??
        .clone();
    let kernel = kernels.try_fold(first, |acc, k| acc.sup(k?))?;
    Ok(LinearOperator::Integral(kernel))
}

/// First reconstruction failure found during kernel verification.
#[derive(Clone, Debug)]
pub struct KernelWitness {
    /// Which input broke the representation (`generator i` or `probe i`).
    pub label: String,
    /// Operator value on that input.
    pub expected: TropVector,
    /// Value reconstructed through the candidate kernel.
    pub actual: TropVector,
}

/// Result of maximal-kernel extraction.
#[derive(Clone, Debug)]
pub struct MaxKernel {
    pub kernel: KernelMatrix,
    pub verified: bool,
    pub witness: Option<KernelWitness>,
}

/// Extracts the entrywise-largest candidate kernel of `a` on `domain` and
/// verifies the integral representation exactly.
///
/// Wedge-closed domains take the constructive route: row `x` is `a` applied
/// to the minimal unit section `d_x` (rows off the support are `𝟘`).  For
/// plain spans the candidate is the residual
/// `k(x, y) = ∧ᵢ gᵢ(x) \ (a gᵢ)(y)` over generators with `gᵢ(x)`
/// invertible.  Any valid kernel is bounded by this candidate, so exact
/// verification on the generators (plus a seeded probe batch; probes are
/// evaluated in parallel, the reported witness is the first in index order)
/// decides integrality.
///
/// When `codomain` is given, kernel rows are additionally constrained to be
/// members of it: the candidate rows are replaced by their projections onto
/// the codomain module.  A valid row-constrained kernel exists if and only
/// if the projected candidate verifies, because projection preserves every
/// row that already is a member and any valid kernel is below the
/// projection.
pub fn max_kernel(
    a: &LinearOperator,
    domain: &SemimoduleSpec,
    codomain: Option<&SemimoduleSpec>,
    cfg: &ProbeConfig,
) -> Result<MaxKernel> {
    if !same_ground(a.domain_ground(), domain.ground()) {
        return Err(Error::GroundMismatch);
    }
    let kind = domain.kind();
    let values = a.values_on_generators(domain)?;
    let cols = match (a.codomain_ground(), codomain) {
        (Some(g), Some(w)) => {
            if !same_ground(g, w.ground()) {
                return Err(Error::GroundMismatch);
            }
            g.clone()
        }
        (Some(g), None) => g.clone(),
        (None, Some(w)) => w.ground().clone(),
        (None, None) => {
            return Err(Error::InvalidParameter(
                "cannot determine the codomain ground of the operator".into(),
            ))
        }
    };
    if let Some(w) = codomain {
        if w.kind() != kind {
            return Err(Error::SemiringMismatch {
                left: kind,
                right: w.kind(),
            });
        }
    }

    let n = domain.ground().len();
    let zero_row = TropVector::zero(cols.clone(), kind);
    let mut rows: Vec<TropVector> = vec![zero_row; n];
    match domain.closure() {
        Closure::WedgeClosed => {
            if !domain.is_admissible()? {
                return Err(Error::NotAdmissible);
            }
            for &x in domain.support() {
                rows[x] = a.apply(&domain.unit_minorant(x)?)?;
            }
        }
        Closure::BClosedSpan => {
            for &x in domain.support() {
                let mut row = vec![Scalar::top(kind); cols.len()];
                for (g, ag) in domain.generators().iter().zip(&values) {
                    let gx = g.get(x);
                    if !gx.is_invertible() {
                        continue;
                    }
                    for (y, r) in row.iter_mut().enumerate() {
                        *r = inf_set(kind, &[*r, gx.residual(&ag.get(y))?])?;
                    }
                }
                rows[x] = TropVector::new(cols.clone(), row)?;
            }
        }
    }
    if let Some(w) = codomain {
        // A wedge-closed codomain projects through its minorant span:
        // admissibility makes every member a sup of unit minorants, so the
        // span projection below is the true lower projection onto `w`.
        let span_form = match w.closure() {
            Closure::BClosedSpan => None,
            Closure::WedgeClosed => {
                let minorants: Vec<TropVector> = w
                    .unit_minorant_table()?
                    .into_iter()
                    .map(|(_, d)| d)
                    .collect();
                Some(SemimoduleSpec::new(
                    w.ground().clone(),
                    w.kind(),
                    minorants,
                    Closure::BClosedSpan,
                )?)
            }
        };
        let target = span_form.as_ref().unwrap_or(w);
        for row in rows.iter_mut() {
            if !row.is_zero() {
                *row = target.membership(row)?.projection;
            }
        }
    }
    let kernel = KernelMatrix::from_rows(domain.ground().clone(), &rows)?;

    let mismatch = |label: String, expected: &TropVector, input: &TropVector| -> Result<Option<KernelWitness>> {
        let actual = kernel.apply(input)?;
        Ok(if actual == *expected {
            None
        } else {
            Some(KernelWitness {
                label,
                expected: expected.clone(),
                actual,
            })
        })
    };

    let mut witness = None;
    for (i, (g, ag)) in domain.generators().iter().zip(&values).enumerate() {
        if let Some(w) = mismatch(format!("generator {i}"), ag, g)? {
            witness = Some(w);
            break;
        }
    }
    if witness.is_none() {
        let probe_results = exec::map_indices(cfg.kernel_probes, |p| -> Result<Option<KernelWitness>> {
            let mut rng = sampling::trial_rng(cfg.seed, p as u64);
            let (input, expected) = match domain.closure() {
                Closure::BClosedSpan => {
                    let coeffs = sampling::random_coefficients(
                        domain.generators().len(),
                        kind,
                        &mut rng,
                    );
                    let input = domain.combine(&coeffs)?;
                    let expected = a.apply_coeffs(domain, &coeffs)?;
                    (input, expected)
                }
                Closure::WedgeClosed => {
                    let input = sampling::random_member(domain, &mut rng)?;
                    let expected = a.apply(&input)?;
                    (input, expected)
                }
            };
            mismatch(format!("probe {p}"), &expected, &input)
        });
        for r in probe_results {
            if let Some(w) = r? {
                witness = Some(w);
                break;
            }
        }
    }

    Ok(MaxKernel {
        kernel,
        verified: witness.is_none(),
        witness,
    })
}

/// Does `a` have an integral representation on `domain` (with rows in
/// `codomain`, when given)?
pub fn is_integral(
    a: &LinearOperator,
    domain: &SemimoduleSpec,
    codomain: Option<&SemimoduleSpec>,
    cfg: &ProbeConfig,
) -> Result<bool> {
    Ok(max_kernel(a, domain, codomain, cfg)?.verified)
}
