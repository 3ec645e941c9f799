use super::quadratic::{QuadraticProblem, Regularizer};
use super::{BlockQuadratic, InstanceError};
use crate::linalg::Matrix;
use serde::{Deserialize, Serialize};

/// On-disk problem description. Matrices are row-major nested arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub n: usize,
    pub m: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    pub c: Vec<Vec<f64>>,
    pub b1: Vec<f64>,
    pub b2: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g1: Option<RegularizerSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g2: Option<RegularizerSpec>,
}

/// Regularizer descriptor; infinite bounds are written as `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum RegularizerSpec {
    Zero,
    Box {
        lower: Vec<Option<f64>>,
        upper: Vec<Option<f64>>,
    },
    L1 {
        weight: f64,
    },
}

impl RegularizerSpec {
    fn to_regularizer(&self) -> Regularizer {
        match self {
            RegularizerSpec::Zero => Regularizer::Zero,
            RegularizerSpec::Box { lower, upper } => Regularizer::Box {
                lower: lower
                    .iter()
                    .map(|v| v.unwrap_or(f64::NEG_INFINITY))
                    .collect(),
                upper: upper.iter().map(|v| v.unwrap_or(f64::INFINITY)).collect(),
            },
            RegularizerSpec::L1 { weight } => Regularizer::L1 { weight: *weight },
        }
    }

    pub fn from_regularizer(r: &Regularizer) -> Self {
        let finite = |v: &f64| v.is_finite().then_some(*v);
        match r {
            Regularizer::Zero => RegularizerSpec::Zero,
            Regularizer::Box { lower, upper } => RegularizerSpec::Box {
                lower: lower.iter().map(finite).collect(),
                upper: upper.iter().map(finite).collect(),
            },
            Regularizer::L1 { weight } => RegularizerSpec::L1 { weight: *weight },
        }
    }
}

fn matrix(
    name: &'static str,
    rows: &[Vec<f64>],
    r: usize,
    c: usize,
) -> Result<Matrix, InstanceError> {
    if rows.len() != r || rows.iter().any(|row| row.len() != c) {
        return Err(InstanceError::Shape {
            name,
            expected: format!("{r}x{c}"),
            got: format!(
                "{} rows of lengths {:?}",
                rows.len(),
                rows.iter().map(Vec::len).collect::<Vec<_>>()
            ),
        });
    }
    Ok(Matrix::from_rows(rows, c)?)
}

impl ProblemFile {
    pub fn quadratic(&self) -> Result<BlockQuadratic, InstanceError> {
        let a = matrix("A", &self.a, self.n, self.n)?;
        let b = matrix("B", &self.b, self.m, self.n)?;
        let c = matrix("C", &self.c, self.m, self.m)?;
        BlockQuadratic::new(a, b, c, self.b1.clone(), self.b2.clone())
    }

    pub fn problem(&self) -> Result<QuadraticProblem, InstanceError> {
        let reg = |g: &Option<RegularizerSpec>| {
            g.as_ref()
                .map_or(Regularizer::Zero, RegularizerSpec::to_regularizer)
        };
        QuadraticProblem::new(self.quadratic()?, reg(&self.g1), reg(&self.g2))
    }

    pub fn from_problem(p: &QuadraticProblem) -> Self {
        let q = p.quadratic();
        let spec = |r: &Regularizer| match r {
            Regularizer::Zero => None,
            other => Some(RegularizerSpec::from_regularizer(other)),
        };
        ProblemFile {
            n: q.n(),
            m: q.m(),
            a: q.a.to_rows(),
            b: q.b.to_rows(),
            c: q.c.to_rows(),
            b1: q.b1.clone(),
            b2: q.b2.clone(),
            g1: spec(p.regularizer1()),
            g2: spec(p.regularizer2()),
        }
    }
}

/// Parses and validates a problem file. JSON has no NaN literal, so
/// non-finite values can only arrive as overflowing literals, which are
/// rejected by validation.
pub fn parse_problem_file(text: &str) -> Result<(ProblemFile, QuadraticProblem), InstanceError> {
    let file: ProblemFile =
        serde_json::from_str(text).map_err(|e| InstanceError::Parse(e.to_string()))?;
    let problem = file.problem()?;
    Ok((file, problem))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::assemble_paper_example;

    const EXAMPLE: &str = r#"{
        "n": 3, "m": 2,
        "A": [[5,-1,-2],[-1,6,-2],[-2,-2,6]],
        "B": [[1,0.5,0.2],[-1,2,1]],
        "C": [[2,0.4],[0.4,1.4]],
        "b1": [1,1,1], "b2": [1,1]
    }"#;

    #[test]
    fn parses_block_example() {
        let (_, p) = parse_problem_file(EXAMPLE).unwrap();
        assert_eq!(p.quadratic(), &assemble_paper_example());
        assert!(p.is_smooth());
    }

    #[test]
    fn parses_regularizers() {
        let text = EXAMPLE.trim_end().trim_end_matches('}').to_string()
            + r#", "g1": {"kind":"box","lower":[0,null,-1],"upper":[null,1,1]},
                  "g2": {"kind":"l1","weight":0.5} }"#;
        let (file, p) = parse_problem_file(&text).unwrap();
        assert_eq!(
            p.regularizer1(),
            &Regularizer::Box {
                lower: vec![0.0, f64::NEG_INFINITY, -1.0],
                upper: vec![f64::INFINITY, 1.0, 1.0]
            }
        );
        assert_eq!(p.regularizer2(), &Regularizer::L1 { weight: 0.5 });
        let round: ProblemFile =
            serde_json::from_str(&serde_json::to_string(&file).unwrap()).unwrap();
        assert_eq!(round, file);
    }

    #[test]
    fn rejects_malformed() {
        let ragged = EXAMPLE.replace("[2,0.4],[0.4,1.4]", "[2,0.4],[0.4]");
        assert!(matches!(
            parse_problem_file(&ragged),
            Err(InstanceError::Shape { name: "C", .. })
        ));
        let asym = EXAMPLE.replace("[2,0.4],[0.4,1.4]", "[2,0.4],[0.41,1.4]");
        assert!(matches!(
            parse_problem_file(&asym),
            Err(InstanceError::Asymmetric { name: "C", .. })
        ));
        let overflow = EXAMPLE.replace("\"b2\": [1,1]", "\"b2\": [1e999,1]");
        assert!(parse_problem_file(&overflow).is_err());
        assert!(matches!(
            parse_problem_file("{\"n\": 1"),
            Err(InstanceError::Parse(_))
        ));
        let wrong_n = EXAMPLE.replace("\"n\": 3", "\"n\": 2");
        assert!(parse_problem_file(&wrong_n).is_err());
    }
}
