use super::config::{RunConfig, Task};
use crate::error::{Error, Result};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// A float that survives JSON: non-finite values are written as the
/// strings `"inf"`, `"-inf"` and `"nan"`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Num(pub f64);

impl From<f64> for Num {
    fn from(v: f64) -> Self {
        Num(v)
    }
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v = self.0;
        if v.is_finite() {
            s.serialize_f64(v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            F(f64),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::F(v) => Ok(Num(v)),
            Raw::S(s) => match s.as_str() {
                "inf" => Ok(Num(f64::INFINITY)),
                "-inf" => Ok(Num(f64::NEG_INFINITY)),
                "nan" => Ok(Num(f64::NAN)),
                _ => Err(serde::de::Error::custom(format!("not a number: {s}"))),
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl Status {
    pub fn exit_code(&self) -> i32 {
        match self {
            Status::Pass => 0,
            _ => 1,
        }
    }

    /// The worse of two statuses, `Fail` dominating `Inconclusive`.
    pub fn worst(self, other: Status) -> Status {
        match (self, other) {
            (Status::Fail, _) | (_, Status::Fail) => Status::Fail,
            (Status::Inconclusive, _) | (_, Status::Inconclusive) => Status::Inconclusive,
            _ => Status::Pass,
        }
    }
}

/// Acceptance bound on a measured value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    Lt(Num),
    Le(Num),
    Gt(Num),
    Ge(Num),
    Within([Num; 2]),
}

impl Bound {
    pub fn holds(&self, v: f64) -> bool {
        match *self {
            Bound::Lt(b) => v < b.0,
            Bound::Le(b) => v <= b.0,
            Bound::Gt(b) => v > b.0,
            Bound::Ge(b) => v >= b.0,
            Bound::Within([lo, hi]) => lo.0 <= v && v <= hi.0,
        }
    }
}

pub type Witness = BTreeMap<String, Num>;

/// Builds a [`Witness`] from `(name, value)` pairs.
pub fn witness<const N: usize>(pairs: [(&str, f64); N]) -> Witness {
    pairs.into_iter().map(|(k, v)| (k.to_string(), Num(v))).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: Num,
    pub bound: Bound,
    pub pass: bool,
    /// Where the value was attained.
    pub witness: Witness,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessPoint {
    pub label: String,
    pub point: Witness,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub task: Task,
    pub status: Status,
    pub checks: Vec<Check>,
    pub metrics: BTreeMap<String, Num>,
    pub witness_points: Vec<WitnessPoint>,
    /// Module error that ended the task early.
    pub error: Option<String>,
    pub children: Vec<RunReport>,
    pub wall_time_s: f64,
    pub config: RunConfig,
    pub version: String,
    pub rng: String,
}

impl RunReport {
    /// Copy with every wall time set to zero, for comparisons.
    pub fn without_timing(&self) -> RunReport {
        let mut r = self.clone();
        r.wall_time_s = 0.0;
        r.children = r.children.iter().map(RunReport::without_timing).collect();
        r
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("malformed report: {e}")))
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn child(&self, task: Task) -> Option<&RunReport> {
        self.children.iter().find(|c| c.task == task)
    }
}

/// A file produced by a task, relative to the output directory.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn csv<T: Serialize>(name: &str, rows: &[T]) -> Result<Self> {
        let mut w = csv::Writer::from_writer(vec![]);
        for r in rows {
            w.serialize(r).map_err(|e| Error::Io { path: name.into(), reason: e.to_string() })?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io { path: name.into(), reason: e.to_string() })?;
        Ok(Artifact { name: name.into(), bytes })
    }

    pub fn json<T: Serialize>(name: &str, value: &T) -> Result<Self> {
        let mut bytes =
            serde_json::to_vec_pretty(value).map_err(|e| Error::Io { path: name.into(), reason: e.to_string() })?;
        bytes.push(b'\n');
        Ok(Artifact { name: name.into(), bytes })
    }

    pub fn header(&self) -> Option<&str> {
        std::str::from_utf8(&self.bytes).ok()?.lines().next()
    }
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    let io = |e: std::io::Error| Error::Io { path: path.display().to_string(), reason: e.to_string() };
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    std::fs::write(path, bytes).map_err(io)
}

/// Writes `report.json` and the artifacts under `dir`, replacing earlier
/// output of the same names. Returns the written paths.
pub fn emit(report: &RunReport, artifacts: &[Artifact], dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths = vec![];
    let p = dir.join("report.json");
    write(&p, report.to_json().as_bytes())?;
    paths.push(p);
    for a in artifacts {
        let p = dir.join(&a.name);
        write(&p, &a.bytes)?;
        paths.push(p);
    }
    Ok(paths)
}
