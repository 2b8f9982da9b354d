//! JSON problem files and a 17-significant-digit float writer.

use std::io;
use std::path::Path;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generate::{GeneratedProblem, ProblemKind};
use crate::problem::{ModelError, PrimalDualPoint, StandardFormLp};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl FormatError {
    pub fn is_io(&self) -> bool {
        matches!(self, Self::Io(_))
    }
}

/// Writes every `f64` as `d.dddddddddddddddde±x`, which round-trips exactly.
#[derive(Debug, Clone, Copy, Default)]
pub struct FullPrecision;

impl serde_json::ser::Formatter for FullPrecision {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        write!(writer, "{:.16e}", f64::from(value))
    }
}

/// Serializes with [`FullPrecision`] floats.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String, serde_json::Error> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FullPrecision);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(out).expect("serde_json emits UTF-8"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointFile {
    pub x: Vec<f64>,
    pub lambda: Vec<f64>,
    pub s: Vec<f64>,
}

impl From<&PrimalDualPoint> for PointFile {
    fn from(p: &PrimalDualPoint) -> Self {
        Self {
            x: p.x.as_slice().to_vec(),
            lambda: p.lambda.as_slice().to_vec(),
            s: p.s.as_slice().to_vec(),
        }
    }
}

impl From<&PointFile> for PrimalDualPoint {
    fn from(p: &PointFile) -> Self {
        Self {
            x: DVector::from_column_slice(&p.x),
            lambda: DVector::from_column_slice(&p.lambda),
            s: DVector::from_column_slice(&p.s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindTag {
    Optimal,
    Unbounded,
    Unknown,
}

impl From<ProblemKind> for KindTag {
    fn from(k: ProblemKind) -> Self {
        match k {
            ProblemKind::OptimalSolvable => Self::Optimal,
            ProblemKind::Unbounded => Self::Unbounded,
            ProblemKind::Unknown => Self::Unknown,
        }
    }
}

impl From<KindTag> for ProblemKind {
    fn from(k: KindTag) -> Self {
        match k {
            KindTag::Optimal => Self::OptimalSolvable,
            KindTag::Unbounded => Self::Unbounded,
            KindTag::Unknown => Self::Unknown,
        }
    }
}

/// On-disk problem layout; `A` is row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub m: usize,
    pub n: usize,
    #[serde(rename = "A")]
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub known_optimum: Option<PointFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub known_ray: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feasible_point: Option<Vec<f64>>,
    #[serde(default = "unknown_kind")]
    pub kind: KindTag,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub generator: Option<String>,
}

fn unknown_kind() -> KindTag {
    KindTag::Unknown
}

impl ProblemFile {
    pub fn from_generated(g: &GeneratedProblem) -> Self {
        let (m, n) = (g.lp.m(), g.lp.n());
        let mut a = Vec::with_capacity(m * n);
        for i in 0..m {
            a.extend(g.lp.a.row(i).iter().copied());
        }
        Self {
            m,
            n,
            a,
            b: g.lp.b.as_slice().to_vec(),
            c: g.lp.c.as_slice().to_vec(),
            known_optimum: g.known_optimum.as_ref().map(PointFile::from),
            known_ray: g.known_ray.as_ref().map(|d| d.as_slice().to_vec()),
            feasible_point: g.feasible_point.as_ref().map(|x| x.as_slice().to_vec()),
            kind: g.kind.into(),
            seed: Some(g.seed),
            generator: Some(g.generator.clone()),
        }
    }

    /// Validated model; dimension fields must agree with the arrays.
    pub fn to_lp(&self) -> Result<StandardFormLp, ModelError> {
        let check = |what, expected, got| {
            if expected == got {
                Ok(())
            } else {
                Err(ModelError::DimensionMismatch {
                    what,
                    expected,
                    got,
                })
            }
        };
        check("b", self.m, self.b.len())?;
        check("c", self.n, self.c.len())?;
        StandardFormLp::from_row_major(self.m, self.n, &self.a, &self.b, &self.c)
    }

    pub fn known_optimum(&self) -> Option<PrimalDualPoint> {
        self.known_optimum.as_ref().map(PrimalDualPoint::from)
    }

    pub fn to_json(&self) -> String {
        to_json_string(self).expect("problem file serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, FormatError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: &Path) -> Result<Self, FormatError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<(), FormatError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate_optimal_lp, generate_unbounded_lp};

    #[test]
    fn floats_round_trip_bit_exact() {
        let values = vec![
            0.1,
            -1.0 / 3.0,
            f64::MIN_POSITIVE,
            5e-324,
            f64::MAX,
            1.0 + f64::EPSILON,
            0.0,
            -0.0,
        ];
        let text = to_json_string(&values).unwrap();
        let back: Vec<f64> = serde_json::from_str(&text).unwrap();
        for (a, b) in values.iter().zip(&back) {
            assert_eq!(a.to_bits(), b.to_bits(), "{a} vs {b}");
        }
    }

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(to_json_string(&0.1).unwrap(), "1.0000000000000001e-1");
        assert_eq!(to_json_string(&f64::NAN).unwrap(), "null");
    }

    #[test]
    fn generated_problem_round_trips() {
        let g = generate_optimal_lp(4, 9, 21).unwrap();
        let file = ProblemFile::from_generated(&g);
        let back = ProblemFile::from_json(&file.to_json()).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.to_lp().unwrap(), g.lp);
        assert_eq!(back.known_optimum(), g.known_optimum);
        assert_eq!(back.kind, KindTag::Optimal);
    }

    #[test]
    fn unbounded_keeps_ray() {
        let g = generate_unbounded_lp(3, 8, 4).unwrap();
        let back = ProblemFile::from_json(&ProblemFile::from_generated(&g).to_json()).unwrap();
        assert_eq!(back.kind, KindTag::Unbounded);
        assert_eq!(back.known_ray.unwrap(), g.known_ray.unwrap().as_slice());
        assert!(back.known_optimum.is_none());
    }

    #[test]
    fn minimal_file_accepted() {
        let text = r#"{"m":1,"n":2,"A":[1,1],"b":[1],"c":[1,2]}"#;
        let file = ProblemFile::from_json(text).unwrap();
        assert_eq!(file.kind, KindTag::Unknown);
        assert_eq!(file.to_lp().unwrap().n(), 2);
    }

    #[test]
    fn inconsistent_sizes_rejected() {
        let text = r#"{"m":1,"n":2,"A":[1,1,1],"b":[1],"c":[1,2]}"#;
        let file = ProblemFile::from_json(text).unwrap();
        assert!(file.to_lp().is_err());
        let text = r#"{"m":1,"n":2,"A":[1,1],"b":[1,3],"c":[1,2]}"#;
        assert!(ProblemFile::from_json(text).unwrap().to_lp().is_err());
    }
}
