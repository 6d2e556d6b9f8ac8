//! Problem specification files.

use std::path::Path;

use psum::instances::by_name;
use psum::system::NumericalDatum;
use psum::{PolySystem, Support};
use serde::{Deserialize, Serialize};

use crate::failure::Failure;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub schema: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub p: u64,
    pub n: usize,
    pub constraints: Vec<String>,
    pub target: String,
    #[serde(default)]
    pub support: Support,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_level: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub character_conductor_cap: Option<u32>,
    /// Pairs `[N, v]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution_data: Option<Vec<[u32; 2]>>,
    /// Exponent `s` for the delta check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
}

impl ProblemSpec {
    pub fn from_json(text: &str) -> Result<Self, Failure> {
        let spec: ProblemSpec = serde_json::from_str(text).map_err(|e| Failure::Schema(e.to_string()))?;
        if spec.schema != SCHEMA_VERSION {
            return Err(Failure::Schema(format!("unsupported schema version {} (expected {SCHEMA_VERSION})", spec.schema)));
        }
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Schema(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn bundled(name: &str) -> Result<Self, Failure> {
        let inst = by_name(name).ok_or_else(|| Failure::Schema(format!("no bundled instance named {name:?}")))?;
        Ok(ProblemSpec {
            schema: SCHEMA_VERSION,
            name: Some(inst.name.to_string()),
            p: inst.p,
            n: inst.n,
            constraints: inst.constraints.iter().map(|s| s.to_string()).collect(),
            target: inst.target.to_string(),
            support: Support::UnitPolydisc,
            max_level: None,
            character_conductor_cap: None,
            resolution_data: None,
            s: None,
            budget: None,
        })
    }

    pub fn system(&self) -> Result<PolySystem, Failure> {
        let cs: Vec<&str> = self.constraints.iter().map(String::as_str).collect();
        let sys = PolySystem::parse(self.p, self.n, &cs, &self.target).map_err(Failure::from_core)?;
        match &self.resolution_data {
            Some(data) => sys
                .with_resolution_data(data.iter().map(|&[n, v]| NumericalDatum { n, v }).collect())
                .map_err(Failure::from_core),
            None => Ok(sys),
        }
    }

    pub fn support(&self) -> Result<Support, Failure> {
        self.support.normalized(self.p, self.n).map_err(Failure::from_core)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unknown_fields_and_versions() {
        let ok = r#"{"schema": 1, "p": 3, "n": 2, "constraints": ["x1"], "target": "x2^2"}"#;
        assert!(ProblemSpec::from_json(ok).is_ok());
        let extra = r#"{"schema": 1, "p": 3, "n": 2, "constraints": ["x1"], "target": "x2^2", "smooth": true}"#;
        assert!(matches!(ProblemSpec::from_json(extra), Err(Failure::Schema(_))));
        let v2 = r#"{"schema": 2, "p": 3, "n": 2, "constraints": ["x1"], "target": "x2^2"}"#;
        assert!(matches!(ProblemSpec::from_json(v2), Err(Failure::Schema(_))));
    }

    #[test]
    fn parses_cosets_and_data() {
        let text = r#"{"schema": 1, "p": 3, "n": 2, "constraints": ["x1"], "target": "x2^3",
            "support": {"kind": "cosets", "level": 1, "centers": [[0, 4]]}, "resolution_data": [[3, 1]]}"#;
        let spec = ProblemSpec::from_json(text).unwrap();
        assert_eq!(spec.support().unwrap(), Support::Cosets { level: 1, centers: vec![vec![0, 1]] });
        assert_eq!(spec.system().unwrap().rho_from_data(), Some((1, 3)));
    }

    #[test]
    fn bundled_round_trip() {
        let spec = ProblemSpec::bundled("parabola").unwrap();
        let back = ProblemSpec::from_json(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(spec, back);
    }
}
