//! Request/response shapes shared by the CLI and the HTTP service.

use serde::{Deserialize, Serialize};

use crate::config::{ConfigDocument, PointConfig};
use crate::curves::JordanCurve;
use crate::error::{Error, Result};
use crate::solver::{find_inscriptions, SolveOptions, SolveReport};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveRequest {
    pub curve: JordanCurve,
    pub config: PointConfig,
    /// Must equal `n - 1`; inferred when absent.
    #[serde(default)]
    pub degree: Option<usize>,
    #[serde(default)]
    pub opts: SolveOptions,
}

impl SolveRequest {
    pub fn check_degree(&self) -> Result<()> {
        let n = self.config.n();
        match self.degree {
            Some(d) if d + 1 != n => Err(Error::DegreeMismatch { degree: d, n }),
            _ => Ok(()),
        }
    }

    pub fn solve(&self) -> Result<SolveReport> {
        self.check_degree()?;
        find_inscriptions(&self.curve, &self.config, &self.opts)
    }
}

/// Wire form of a [`SolveRequest`]. The config is only checked by
/// [`SolveDocument::into_request`], so its errors keep their own codes.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveDocument {
    pub curve: JordanCurve,
    pub config: ConfigDocument,
    #[serde(default)]
    pub degree: Option<usize>,
    #[serde(default)]
    pub opts: SolveOptions,
}

impl SolveDocument {
    pub fn into_request(self) -> Result<SolveRequest> {
        Ok(SolveRequest {
            curve: self.curve,
            config: self.config.into_config()?,
            degree: self.degree,
            opts: self.opts,
        })
    }
}

pub fn parse_solve_request(text: &str) -> Result<SolveRequest> {
    serde_json::from_str::<SolveDocument>(text)?.into_request()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn request_round_trip_and_degree_check() {
        let text = r#"{
            "curve": {"K": 1, "coeffs": [{"k": 1, "re": 1.0, "im": 0.0}]},
            "config": {"alpha": [[1,0],[-1,0]], "beta": [[0,1],[0,-1]]},
            "degree": 1,
            "opts": {"n_starts": 200, "seed": 3}
        }"#;
        let req = parse_solve_request(text).unwrap();
        assert_eq!(req.opts.n_starts, Some(200));
        assert_eq!(req.opts.seed, 3);
        let report = req.solve().unwrap();
        let json = serde_json::to_value(&report).unwrap();
        let coeffs = &json["inscriptions"][0]["poly"];
        assert!(coeffs[0].is_array() && coeffs[0].as_array().unwrap().len() == 2);

        let bad = SolveRequest { degree: Some(2), ..req };
        assert!(matches!(bad.solve(), Err(Error::DegreeMismatch { .. })));
    }

    #[test]
    fn malformed_requests_name_the_field() {
        let err = parse_solve_request(r#"{"curve": {"K": 1, "coeffs": []}}"#).unwrap_err();
        assert!(err.to_string().contains("config"), "{err}");
    }
}
