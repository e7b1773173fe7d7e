//! Point and measure files.
//!
//! One point per line, coordinates separated by commas and/or whitespace. A
//! first line reading `# weights` marks the last column as a weight; without it
//! every row gets weight 1/rows. Blank lines and other `#` lines are skipped.

use std::fs;
use std::path::{Path, PathBuf};

use sphere_energy::{DiscreteMeasure, UnitVector};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InputError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: no points")]
    Empty { path: PathBuf },
    #[error("{path}: {source}")]
    Measure {
        path: PathBuf,
        #[source]
        source: sphere_energy::Error,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    pub points: Vec<UnitVector>,
    pub weights: Option<Vec<f64>>,
}

impl PointSet {
    /// Weights from the file, or uniform 1/rows.
    pub fn weights_or_uniform(&self) -> Vec<f64> {
        self.weights
            .clone()
            .unwrap_or_else(|| vec![1.0 / self.points.len() as f64; self.points.len()])
    }
}

pub fn parse_points(path: &Path) -> Result<PointSet, InputError> {
    let text = fs::read_to_string(path).map_err(|source| InputError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_points_str(&text, path)
}

pub fn parse_points_str(text: &str, path: &Path) -> Result<PointSet, InputError> {
    let err = |line: usize, message: String| InputError::Parse {
        path: path.to_owned(),
        line,
        message,
    };
    let mut weighted = false;
    let mut arity: Option<usize> = None;
    let mut points = Vec::new();
    let mut weights = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if points.is_empty() && comment.trim().eq_ignore_ascii_case("weights") {
                weighted = true;
            }
            continue;
        }
        let fields: Vec<f64> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| err(line_no, format!("non-numeric field '{f}'")))
            })
            .collect::<Result<_, _>>()?;
        match arity {
            None => arity = Some(fields.len()),
            Some(a) if a != fields.len() => {
                return Err(err(
                    line_no,
                    format!("expected {a} fields, found {}", fields.len()),
                ));
            }
            _ => {}
        }
        let (coords, weight) = if weighted {
            let (w, c) = fields
                .split_last()
                .ok_or_else(|| err(line_no, "empty row".into()))?;
            (c.to_vec(), Some(*w))
        } else {
            (fields, None)
        };
        if coords.len() < 2 {
            return Err(err(
                line_no,
                format!("need at least 2 coordinates, found {}", coords.len()),
            ));
        }
        let p = UnitVector::new(coords).map_err(|e| err(line_no, e.to_string()))?;
        points.push(p);
        if let Some(w) = weight {
            if !w.is_finite() {
                return Err(err(line_no, "non-finite weight".into()));
            }
            weights.push(w);
        }
    }
    if points.is_empty() {
        return Err(InputError::Empty {
            path: path.to_owned(),
        });
    }
    Ok(PointSet {
        points,
        weights: weighted.then_some(weights),
    })
}

pub fn parse_measure(path: &Path) -> Result<DiscreteMeasure, InputError> {
    let set = parse_points(path)?;
    let weights = set.weights_or_uniform();
    DiscreteMeasure::new(set.points, weights).map_err(|source| InputError::Measure {
        path: path.to_owned(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<PointSet, InputError> {
        parse_points_str(text, Path::new("mem.csv"))
    }

    fn line_of(e: InputError) -> usize {
        match e {
            InputError::Parse { line, .. } => line,
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn two_circle_points() {
        let s = parse("1,0\n0,1\n").unwrap();
        assert_eq!(s.points.len(), 2);
        assert_eq!(s.points[1].coords(), &[0.0, 1.0]);
        assert_eq!(s.weights, None);
        assert_eq!(s.weights_or_uniform(), vec![0.5, 0.5]);
    }

    #[test]
    fn rows_are_normalized() {
        let s = parse("3,0,4\n").unwrap();
        let c = s.points[0].coords();
        assert!((c[0] - 0.6).abs() < 1e-15 && c[1] == 0.0 && (c[2] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn zero_vector_rejected_with_line() {
        assert_eq!(line_of(parse("0,0\n").unwrap_err()), 1);
        assert_eq!(line_of(parse("1,0\n\n0 0\n").unwrap_err()), 3);
    }

    #[test]
    fn ragged_and_garbage_rows() {
        assert_eq!(line_of(parse("1,0\n1,0,0\n").unwrap_err()), 2);
        assert_eq!(line_of(parse("1,x\n").unwrap_err()), 1);
        assert_eq!(line_of(parse("1\n").unwrap_err()), 1);
        assert!(matches!(
            parse("\n# nothing\n"),
            Err(InputError::Empty { .. })
        ));
    }

    #[test]
    fn weight_column() {
        let s = parse("# weights\n1 0 0.25\n0 1 0.75\n").unwrap();
        assert_eq!(s.weights, Some(vec![0.25, 0.75]));
        assert_eq!(s.points[0].dim(), 2);
        assert_eq!(line_of(parse("# weights\n1,0\n").unwrap_err()), 2);
    }
}
