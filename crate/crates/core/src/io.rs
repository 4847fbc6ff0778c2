//! File formats: JSON instance/matrix/vector files and plain-text edge
//! lists.
//!
//! Scalars travel as JSON numbers when finite and as the strings `"-inf"`
//! and `"+inf"` for the bottom and top of the semiring.  A module file
//! looks like
//!
//! ```json
//! {
//!   "semiring": "rmax-complete",
//!   "ground_set": ["0", "1", "2"],
//!   "generators": [[0, -1, "-inf"], [0, 0, 0]],
//!   "closure": "b-closed-span"
//! }
//! ```
//!
//! with optional `coords` (per-point real coordinates), `functional`
//! (declared coefficients of a functional on the generators), and
//! `schedule` (coefficient tuples for kernel-bound probes).  A matrix file
//! is `{"domain": [...], "codomain": [...], "entries": [[...]]}` with
//! `codomain` defaulting to `domain`.  An edge list is one `x y weight`
//! triple per line; weights are distances, ingested as the symmetric
//! matrix of negated weights with unit diagonal, ready for `closure`.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::instances::BuiltInstance;
use crate::nuclearity::Functional;
use crate::operator::KernelMatrix;
use crate::semimodule::{Closure, GroundSet, SemimoduleSpec, TropVector};
use crate::semiring::{Scalar, SemiringKind};

/// Wire form of a scalar.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum JsonScalar {
    Num(f64),
    Sym(String),
}

impl JsonScalar {
    pub fn to_scalar(&self, kind: SemiringKind) -> Result<Scalar> {
        match self {
            JsonScalar::Num(v) => Scalar::new(kind, *v),
            JsonScalar::Sym(s) if s == "-inf" => Ok(Scalar::zero(kind)),
            JsonScalar::Sym(s) if s == "+inf" => Ok(Scalar::top(kind)),
            JsonScalar::Sym(other) => {
                Err(Error::Parse(format!("unknown scalar symbol `{other}`")))
            }
        }
    }

    pub fn from_scalar(s: &Scalar) -> JsonScalar {
        let v = s.value();
        if v == f64::NEG_INFINITY {
            JsonScalar::Sym("-inf".into())
        } else if v == f64::INFINITY {
            JsonScalar::Sym("+inf".into())
        } else {
            JsonScalar::Num(v)
        }
    }
}

impl Serialize for JsonScalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            JsonScalar::Sym(s) => serializer.serialize_str(s),
            JsonScalar::Num(v) => {
                // integers render without a trailing `.0`
                if v.fract() == 0.0 && v.abs() < 9e15 {
                    serializer.serialize_i64(*v as i64)
                } else {
                    serializer.serialize_f64(*v)
                }
            }
        }
    }
}

fn scalars_to_wire(entries: &[Scalar]) -> Vec<JsonScalar> {
    entries.iter().map(JsonScalar::from_scalar).collect()
}

fn wire_to_scalars(wire: &[JsonScalar], kind: SemiringKind) -> Result<Vec<Scalar>> {
    wire.iter().map(|w| w.to_scalar(kind)).collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionalFile {
    /// Declared coefficients, one per generator.
    pub values: Vec<JsonScalar>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semiring: Option<SemiringKind>,
    pub ground_set: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<f64>>,
    pub generators: Vec<Vec<JsonScalar>>,
    pub closure: Closure,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functional: Option<FunctionalFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<Vec<JsonScalar>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semiring: Option<SemiringKind>,
    pub domain: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub codomain: Option<Vec<String>>,
    pub entries: Vec<Vec<JsonScalar>>,
}

/// A vector file is either `{"values": [...]}` or a bare array.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VectorFile {
    Tagged { values: Vec<JsonScalar> },
    Bare(Vec<JsonScalar>),
}

impl VectorFile {
    pub fn values(&self) -> &[JsonScalar] {
        match self {
            VectorFile::Tagged { values } => values,
            VectorFile::Bare(values) => values,
        }
    }
}

fn file_kind(semiring: Option<SemiringKind>) -> SemiringKind {
    semiring.unwrap_or(SemiringKind::RmaxComplete)
}

pub fn module_from_file(file: &ModuleFile) -> Result<BuiltInstance> {
    let kind = file_kind(file.semiring);
    let ground = match &file.coords {
        Some(coords) => GroundSet::with_coords(file.ground_set.clone(), coords.clone())?,
        None => GroundSet::new(file.ground_set.clone())?,
    };
    let generators = file
        .generators
        .iter()
        .map(|row| TropVector::new(ground.clone(), wire_to_scalars(row, kind)?))
        .collect::<Result<Vec<_>>>()?;
    let module = SemimoduleSpec::new(ground, kind, generators, file.closure)?;
    let Some(functional) = &file.functional else {
        if file.schedule.is_some() {
            return Err(Error::Parse(
                "a probe schedule requires a functional".into(),
            ));
        }
        return Ok(BuiltInstance::Module(module));
    };
    let functional = Functional::declared(module.clone(), wire_to_scalars(&functional.values, kind)?)?;
    let schedule = file
        .schedule
        .as_deref()
        .unwrap_or(&[])
        .iter()
        .map(|tuple| wire_to_scalars(tuple, kind))
        .collect::<Result<Vec<_>>>()?;
    Ok(BuiltInstance::Window {
        module,
        functional,
        schedule,
    })
}

pub fn module_to_file(
    module: &SemimoduleSpec,
    functional: Option<&Functional>,
    schedule: &[Vec<Scalar>],
) -> Result<ModuleFile> {
    let functional = match functional {
        None => None,
        Some(Functional::Declared { values, .. }) => Some(FunctionalFile {
            values: scalars_to_wire(values),
        }),
        Some(Functional::Kernel(k)) => Some(FunctionalFile {
            values: scalars_to_wire(k.entries()),
        }),
    };
    Ok(ModuleFile {
        semiring: Some(module.kind()),
        ground_set: module.ground().labels().to_vec(),
        coords: module.ground().coords().map(|c| c.to_vec()),
        generators: module
            .generators()
            .iter()
            .map(|g| scalars_to_wire(g.entries()))
            .collect(),
        closure: module.closure(),
        functional,
        schedule: if schedule.is_empty() {
            None
        } else {
            Some(schedule.iter().map(|t| scalars_to_wire(t)).collect())
        },
    })
}

pub fn matrix_from_file(file: &MatrixFile) -> Result<KernelMatrix> {
    let kind = file_kind(file.semiring);
    let rows_ground = GroundSet::new(file.domain.clone())?;
    let cols_ground = match &file.codomain {
        Some(labels) => GroundSet::new(labels.clone())?,
        None => rows_ground.clone(),
    };
    if file.entries.len() != rows_ground.len() {
        return Err(Error::DimensionMismatch(format!(
            "expected {} rows, found {}",
            rows_ground.len(),
            file.entries.len()
        )));
    }
    let mut entries = Vec::with_capacity(rows_ground.len() * cols_ground.len());
    for row in &file.entries {
        if row.len() != cols_ground.len() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} columns, found {}",
                cols_ground.len(),
                row.len()
            )));
        }
        entries.extend(wire_to_scalars(row, kind)?);
    }
    KernelMatrix::new(rows_ground, cols_ground, kind, entries)
}

pub fn matrix_to_file(matrix: &KernelMatrix) -> MatrixFile {
    let rows = matrix.rows_ground();
    let cols = matrix.cols_ground();
    MatrixFile {
        semiring: Some(matrix.kind()),
        domain: rows.labels().to_vec(),
        codomain: if rows == cols {
            None
        } else {
            Some(cols.labels().to_vec())
        },
        entries: (0..rows.len())
            .map(|x| scalars_to_wire(matrix.row(x).entries()))
            .collect(),
    }
}

pub fn vector_from_file(
    file: &VectorFile,
    ground: &std::sync::Arc<GroundSet>,
    kind: SemiringKind,
) -> Result<TropVector> {
    TropVector::new(ground.clone(), wire_to_scalars(file.values(), kind)?)
}

pub fn vector_to_file(v: &TropVector) -> VectorFile {
    VectorFile::Tagged {
        values: scalars_to_wire(v.entries()),
    }
}

/// Parses an `x y weight` edge list into the symmetric matrix of negated
/// weights with unit diagonal.  Lines starting with `#` are comments;
/// parallel edges keep the shorter distance.
pub fn parse_edge_list(text: &str) -> Result<KernelMatrix> {
    let mut labels: Vec<String> = Vec::new();
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    let index_of = |labels: &mut Vec<String>, token: &str| -> usize {
        match labels.iter().position(|l| l == token) {
            Some(i) => i,
            None => {
                labels.push(token.to_string());
                labels.len() - 1
            }
        }
    };
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Parse(format!(
                "line {}: expected `x y weight`, found `{line}`",
                lineno + 1
            )));
        }
        let w: f64 = fields[2].parse().map_err(|_| {
            Error::Parse(format!(
                "line {}: weight `{}` is not a number",
                lineno + 1,
                fields[2]
            ))
        })?;
        if !w.is_finite() || w < 0.0 {
            return Err(Error::Parse(format!(
                "line {}: distances must be finite and nonnegative",
                lineno + 1
            )));
        }
        let x = index_of(&mut labels, fields[0]);
        let y = index_of(&mut labels, fields[1]);
        edges.push((x, y, w));
    }
    if labels.is_empty() {
        return Err(Error::Parse("edge list names no points".into()));
    }
    let n = labels.len();
    let kind = SemiringKind::RmaxComplete;
    let ground = GroundSet::new(labels)?;
    let mut entries = vec![Scalar::zero(kind); n * n];
    for i in 0..n {
        entries[i * n + i] = Scalar::one(kind);
    }
    for (x, y, w) in edges {
        let value = Scalar::new(kind, -w)?;
        for (i, j) in [(x, y), (y, x)] {
            let slot = &mut entries[i * n + j];
            if slot.is_zero() || slot.value() < value.value() {
                *slot = value;
            }
        }
    }
    KernelMatrix::new(ground.clone(), ground, kind, entries)
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Loads a matrix from a JSON matrix file or, when the file does not look
/// like JSON, from an edge list.
pub fn load_matrix(path: &Path) -> Result<KernelMatrix> {
    let text = read_text(path)?;
    if text.trim_start().starts_with('{') {
        let file: MatrixFile = serde_json::from_str(&text)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        matrix_from_file(&file)
    } else {
        parse_edge_list(&text)
    }
}

/// Loads any instance file: a module file (with optional functional), a
/// matrix file, or an edge list.
pub fn load_instance_file(path: &Path) -> Result<BuiltInstance> {
    let text = read_text(path)?;
    if !text.trim_start().starts_with('{') {
        return Ok(BuiltInstance::Matrix(parse_edge_list(&text)?));
    }
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let object = value
        .as_object()
        .ok_or_else(|| Error::Parse(format!("{}: expected a JSON object", path.display())))?;
    if object.contains_key("generators") {
        let file: ModuleFile = serde_json::from_value(value.clone())
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        module_from_file(&file)
    } else if object.contains_key("entries") {
        let file: MatrixFile = serde_json::from_value(value.clone())
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Ok(BuiltInstance::Matrix(matrix_from_file(&file)?))
    } else {
        Err(Error::Parse(format!(
            "{}: neither a module file (generators) nor a matrix file (entries)",
            path.display()
        )))
    }
}

/// Serializes a built instance for `instance build --out`.
pub fn instance_to_value(built: &BuiltInstance) -> Result<serde_json::Value> {
    fn wrap<T: Serialize>(v: T) -> Result<serde_json::Value> {
        serde_json::to_value(v).map_err(|e| Error::Io(format!("serialization failed: {e}")))
    }
    match built {
        BuiltInstance::Module(m) => wrap(module_to_file(m, None, &[])?),
        BuiltInstance::Window {
            module,
            functional,
            schedule,
        } => wrap(module_to_file(module, Some(functional), schedule)?),
        BuiltInstance::Metric(d) => wrap(matrix_to_file(d.matrix())),
        BuiltInstance::Matrix(m) => wrap(matrix_to_file(m)),
        BuiltInstance::Concave(_) => Err(Error::InvalidParameter(
            "the concave grid has no file form; use `demo concave`".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{build_instance, parse_instance_name};
    use crate::semimetric::star_closure;

    #[test]
    fn scalar_wire_round_trip() {
        let kind = SemiringKind::RmaxComplete;
        for v in [0.0, -3.0, 2.5, f64::NEG_INFINITY, f64::INFINITY] {
            let s = Scalar::new(kind, v).unwrap();
            let wire = JsonScalar::from_scalar(&s);
            assert_eq!(wire.to_scalar(kind).unwrap(), s);
        }
        assert_eq!(
            serde_json::to_string(&JsonScalar::from_scalar(&Scalar::rmax(-3.0))).unwrap(),
            "-3"
        );
        assert_eq!(
            serde_json::to_string(&JsonScalar::from_scalar(&Scalar::zero(kind))).unwrap(),
            "\"-inf\""
        );
        assert!(JsonScalar::Sym("inf".into()).to_scalar(kind).is_err());
    }

    #[test]
    fn module_file_round_trip() {
        let built = build_instance(&parse_instance_name("example7-window(5)").unwrap(), 0).unwrap();
        let BuiltInstance::Window {
            module,
            functional,
            schedule,
        } = &built
        else {
            panic!("wrong shape");
        };
        let file = module_to_file(module, Some(functional), schedule).unwrap();
        let text = serde_json::to_string(&file).unwrap();
        let parsed: ModuleFile = serde_json::from_str(&text).unwrap();
        let reloaded = module_from_file(&parsed).unwrap();
        let BuiltInstance::Window {
            module: m2,
            schedule: s2,
            ..
        } = &reloaded
        else {
            panic!("wrong shape after reload");
        };
        assert_eq!(module.generators(), m2.generators());
        assert_eq!(schedule, s2);
        assert_eq!(module.ground().coords(), m2.ground().coords());
    }

    #[test]
    fn matrix_file_round_trip_preserves_entries() {
        let built = build_instance(&parse_instance_name("random-semimetric(4)").unwrap(), 3).unwrap();
        let m = built.matrix().unwrap();
        let file = matrix_to_file(m);
        let text = serde_json::to_string_pretty(&file).unwrap();
        let parsed: MatrixFile = serde_json::from_str(&text).unwrap();
        assert_eq!(&matrix_from_file(&parsed).unwrap(), m);
    }

    #[test]
    fn edge_list_builds_the_negated_symmetric_matrix() {
        let text = "# a path of two unit edges\na b 1\nb c 1\n";
        let m = parse_edge_list(text).unwrap();
        assert_eq!(m.rows_ground().labels(), &["a", "b", "c"]);
        assert_eq!(m.entry(0, 1), Scalar::rmax(-1.0));
        assert_eq!(m.entry(1, 0), Scalar::rmax(-1.0));
        assert!(m.entry(0, 2).is_zero());
        assert!(m.entry(0, 0).is_one());
        // closure completes it to the path semimetric
        let d = star_closure(&m).unwrap();
        assert_eq!(d.matrix().entry(0, 2), Scalar::rmax(-2.0));
    }

    #[test]
    fn edge_list_keeps_the_shorter_parallel_edge() {
        let m = parse_edge_list("a b 5\na b 2\n").unwrap();
        assert_eq!(m.entry(0, 1), Scalar::rmax(-2.0));
    }

    #[test]
    fn edge_list_reports_malformed_lines() {
        let err = parse_edge_list("a b\n").unwrap_err();
        assert!(matches!(err, Error::Parse(m) if m.contains("line 1")));
        let err = parse_edge_list("a b x\n").unwrap_err();
        assert!(matches!(err, Error::Parse(m) if m.contains("not a number")));
        let err = parse_edge_list("a b -3\n").unwrap_err();
        assert!(matches!(err, Error::Parse(m) if m.contains("nonnegative")));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = r#"{"domain": ["a"], "entries": [[0]], "extra": 1}"#;
        assert!(serde_json::from_str::<MatrixFile>(text).is_err());
    }
}
