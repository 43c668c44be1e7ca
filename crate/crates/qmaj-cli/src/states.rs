//! The `--state` / `--p` / `--q` mini-language.
//!
//! States: `fock:k`, `coeffs:[re,im;re,im;...]`, or `@file.json` holding a
//! JSON array of `[re, im]` pairs. Distributions: `probs:[p0,p1,...]`,
//! `schmidt:k,lambda`, or `@file.json` holding `{"probs": [...],
//! "tail_mass": t}`.

use qmaj::fock::{normalize, FockState, ProbabilityVector};
use qmaj::squeezer::{auto_dim, schmidt_vector};
use qmaj::C64;

use crate::CliError;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn bracket_body<'a>(spec: &'a str, prefix: &str) -> Result<&'a str, CliError> {
    let rest = &spec[prefix.len()..];
    rest.strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| usage(format!("expected {prefix}[...], got `{spec}`")))
}

fn parse_f64(token: &str, what: &str) -> Result<f64, CliError> {
    token
        .trim()
        .parse()
        .map_err(|_| usage(format!("cannot parse {what} `{}`", token.trim())))
}

/// Parse a pure-state specification.
pub fn parse_state(spec: &str) -> Result<FockState, CliError> {
    if let Some(k) = spec.strip_prefix("fock:") {
        let k: usize = k
            .parse()
            .map_err(|_| usage(format!("cannot parse Fock index `{k}`")))?;
        return Ok(FockState::fock(k));
    }
    if spec.starts_with("coeffs:") {
        let body = bracket_body(spec, "coeffs:")?;
        let mut amps = Vec::new();
        for pair in body.split(';') {
            let (re, im) = pair
                .split_once(',')
                .ok_or_else(|| usage(format!("coefficient `{pair}` is not `re,im`")))?;
            amps.push(C64::new(
                parse_f64(re, "real part")?,
                parse_f64(im, "imaginary part")?,
            ));
        }
        return normalize(&amps).map_err(CliError::Lib);
    }
    if let Some(path) = spec.strip_prefix('@') {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read state file `{path}`: {e}")))?;
        return serde_json::from_str(&text)
            .map_err(|e| usage(format!("cannot parse state file `{path}`: {e}")));
    }
    Err(usage(format!(
        "unknown state spec `{spec}`; use fock:k, coeffs:[re,im;...], or @file.json"
    )))
}

/// Parse a probability-distribution specification.
pub fn parse_distribution(
    spec: &str,
    nmax: Option<usize>,
    eps: f64,
) -> Result<ProbabilityVector, CliError> {
    if spec.starts_with("probs:") {
        let body = bracket_body(spec, "probs:")?;
        let probs = body
            .split(',')
            .map(|t| parse_f64(t, "probability"))
            .collect::<Result<Vec<_>, _>>()?;
        let total: f64 = probs.iter().sum();
        return ProbabilityVector::new(probs, 1.0 - total).map_err(CliError::Lib);
    }
    if let Some(args) = spec.strip_prefix("schmidt:") {
        let parts: Vec<&str> = args.split(',').collect();
        if parts.len() != 2 {
            return Err(usage(format!(
                "schmidt spec needs `schmidt:k,lambda`, got `{spec}`"
            )));
        }
        let k: usize = parts[0]
            .parse()
            .map_err(|_| usage(format!("cannot parse Fock index `{}`", parts[0])))?;
        let lambda = parse_f64(parts[1], "lambda")?;
        let n = nmax.unwrap_or_else(|| auto_dim(k, lambda, eps));
        return schmidt_vector(k, lambda, n).map_err(CliError::Lib);
    }
    if let Some(path) = spec.strip_prefix('@') {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read distribution file `{path}`: {e}")))?;
        return serde_json::from_str(&text)
            .map_err(|e| usage(format!("cannot parse distribution file `{path}`: {e}")));
    }
    Err(usage(format!(
        "unknown distribution spec `{spec}`; use probs:[...], schmidt:k,lambda, or @file.json"
    )))
}
