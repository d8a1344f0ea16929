use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{format_rational, int, parse_rational, to_f64, Rational};

/// A finite list of points in `R^d`. Duplicates are allowed and count as
/// distinct vertices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointSet {
    pub d: usize,
    #[serde(with = "points_serde")]
    pub points: Vec<Vec<Rational>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl PointSet {
    pub fn new(d: usize, points: Vec<Vec<Rational>>) -> Result<Self> {
        if d == 0 {
            return Err(Error::Input("point dimension must be positive".into()));
        }
        if let Some((i, p)) = points.iter().enumerate().find(|(_, p)| p.len() != d) {
            return Err(Error::Input(format!(
                "point {i} has {} coordinates, expected {d}",
                p.len()
            )));
        }
        Ok(PointSet { d, points, label: None })
    }

    pub fn from_ints(d: usize, points: &[Vec<i64>]) -> Result<Self> {
        Self::new(d, points.iter().map(|p| p.iter().map(|&x| int(x)).collect()).collect())
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[Rational] {
        &self.points[i]
    }

    pub fn subset(&self, idx: &[usize]) -> PointSet {
        PointSet {
            d: self.d,
            points: idx.iter().map(|&i| self.points[i].clone()).collect(),
            label: self.label.clone(),
        }
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.points.iter().map(|p| p.iter().map(to_f64).collect()).collect()
    }

    /// `# d=<dim>` header followed by one comma-separated row per point.
    pub fn to_csv(&self) -> String {
        let mut s = format!("# d={}\n", self.d);
        for p in &self.points {
            let row: Vec<String> = p.iter().map(format_rational).collect();
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let d = loop {
            let (n, line) = lines
                .next()
                .ok_or(Error::Parse { line: 1, msg: "missing '# d=<dim>' header".into() })?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let dim = line
                .strip_prefix('#')
                .map(str::trim)
                .and_then(|r| r.strip_prefix("d="))
                .ok_or(Error::Parse {
                    line: n + 1,
                    msg: format!("expected '# d=<dim>', found {line:?}"),
                })?;
            let d: usize = dim.trim().parse().map_err(|_| Error::Parse {
                line: n + 1,
                msg: format!("bad dimension {dim:?}"),
            })?;
            if d == 0 {
                return Err(Error::Parse { line: n + 1, msg: "dimension must be positive".into() });
            }
            break d;
        };
        let mut points = Vec::new();
        for (n, line) in lines {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .split(',')
                .map(parse_rational)
                .collect::<Result<Vec<_>>>()
                .map_err(|e| Error::Parse { line: n + 1, msg: e.to_string() })?;
            if row.len() != d {
                return Err(Error::Parse {
                    line: n + 1,
                    msg: format!("row has {} values, expected {d}", row.len()),
                });
            }
            points.push(row);
        }
        Ok(PointSet { d, points, label: None })
    }

    /// Exact check that some coordinate values repeat as whole points.
    pub fn has_duplicates(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        !self.points.iter().all(|p| seen.insert(p))
    }
}

mod points_serde {
    use super::Rational;
    use crate::rational::{format_rational, parse_rational};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Vec<Rational>], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(|p| p.iter().map(format_rational).collect::<Vec<_>>())
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Rational>>, D::Error> {
        let raw = Vec::<Vec<serde_json::Value>>::deserialize(d)?;
        raw.into_iter()
            .map(|p| {
                p.into_iter()
                    .map(|x| {
                        let s = match x {
                            serde_json::Value::String(s) => s,
                            serde_json::Value::Number(n) => n.to_string(),
                            other => return Err(serde::de::Error::custom(format!("bad coordinate {other}"))),
                        };
                        parse_rational(&s).map_err(serde::de::Error::custom)
                    })
                    .collect()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn parses_header_and_rows() {
        let p = PointSet::from_csv("# d=2\n1,2\n3/2,5").unwrap();
        assert_eq!(p.d, 2);
        assert_eq!(p.points, vec![vec![int(1), int(2)], vec![ratio(3, 2), int(5)]]);
    }

    #[test]
    fn empty_body_is_valid() {
        let p = PointSet::from_csv("# d=3\n").unwrap();
        assert!(p.is_empty());
        assert_eq!(p.d, 3);
    }

    #[test]
    fn wrong_arity_reports_line() {
        match PointSet::from_csv("# d=2\n1,2\n\n1,2,3\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(PointSet::from_csv("1,2"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(PointSet::from_csv("# d=1\nx"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn csv_and_json_round_trip() {
        let p = PointSet::new(2, vec![vec![ratio(-7, 3), int(0)], vec![int(4), ratio(1, 9)]]).unwrap();
        assert_eq!(PointSet::from_csv(&p.to_csv()).unwrap(), p);
        let j = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<PointSet>(&j).unwrap(), p);
    }
}
