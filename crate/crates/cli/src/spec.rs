//! Distribution mini-grammar used on the command line.
//!
//! ```text
//! gauss:MU,SIGMA                       N(MU, SIGMA²)
//! gaussnd:{"mu":[..],"sigma":[[..]]}   multivariate Gaussian (JSON)
//! box:LO1,..,LOn,HI1,..,HIn            uniform on an axis-aligned box
//! ring:INNER,OUTER,DIM                 uniform on INNER < |w_i| <= OUTER
//! ```

use drcc_core::distributions::{Distribution, Gaussian1, GaussianNdSpec, RingUniform, UniformBox};
use drcc_core::GaussianNd;

use crate::CliError;

pub const GRAMMAR: &str = "distributions: gauss:MU,SIGMA | gaussnd:{\"mu\":[..],\"sigma\":[[..]]} | \
box:LO1,..,LOn,HI1,..,HIn | ring:INNER,OUTER,DIM";

pub fn parse_distribution(text: &str) -> Result<Distribution, CliError> {
    let (family, body) = text
        .split_once(':')
        .ok_or_else(|| CliError::usage(format!("distribution '{text}' lacks a family prefix; {GRAMMAR}")))?;
    let dist: Distribution = match family.trim() {
        "gauss" => {
            let v = numbers(body, 2, text)?;
            Gaussian1::new(v[0], v[1])?.into()
        }
        "gaussnd" => {
            let spec: GaussianNdSpec = serde_json::from_str(body)
                .map_err(|e| CliError::usage(format!("bad gaussnd JSON in '{text}': {e}")))?;
            GaussianNd::try_from(spec)?.into()
        }
        "box" => {
            let v = numbers(body, 0, text)?;
            if v.is_empty() || v.len() % 2 != 0 {
                return Err(CliError::usage(format!("box needs 2n numbers (lows then highs), got '{text}'")));
            }
            let n = v.len() / 2;
            UniformBox::new(v[..n].to_vec(), v[n..].to_vec())?.into()
        }
        "ring" => {
            let v = numbers(body, 3, text)?;
            if v[2].fract() != 0.0 || v[2] < 1.0 {
                return Err(CliError::usage(format!("ring dimension must be a positive integer in '{text}'")));
            }
            RingUniform::new(v[0], v[1], v[2] as usize)?.into()
        }
        other => return Err(CliError::usage(format!("unknown distribution family '{other}'; {GRAMMAR}"))),
    };
    Ok(dist)
}

/// Comma-separated floats; `expect = 0` accepts any count.
fn numbers(body: &str, expect: usize, whole: &str) -> Result<Vec<f64>, CliError> {
    let v = body
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::usage(format!("bad number in '{whole}': {e}")))?;
    if expect > 0 && v.len() != expect {
        return Err(CliError::usage(format!("'{whole}' needs {expect} numbers, got {}", v.len())));
    }
    Ok(v)
}
