//! Line-oriented `key = value` configuration files.
//!
//! ```text
//! # pairs
//! t_atom_mK    = 50
//! f_lambda_GHz = 5 GHz     # a trailing unit must match the key's suffix
//! kappa_per_s  = 0
//! variant      = two
//! ```
//!
//! Missing keys keep their baseline value (see [`ModelParams::default`]).

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::params::{Key, ModelParams, Variant};

fn config_err(line: usize, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        message: message.into(),
    }
}

/// Parses a config on top of the baseline parameter set.
pub fn parse_config(text: &str) -> Result<ModelParams> {
    parse_config_onto(text, ModelParams::default())
}

pub fn parse_config_onto(text: &str, base: ModelParams) -> Result<ModelParams> {
    let mut params = base;
    let mut seen: HashSet<String> = HashSet::new();
    let mut numeric: Vec<(usize, Key, f64)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| config_err(line_no, format!("expected `key = value`, got `{line}`")))?;
        let key = key.trim();
        let value = value.trim();
        if !seen.insert(key.to_string()) {
            return Err(config_err(line_no, format!("duplicate key `{key}`")));
        }
        if key == "variant" {
            params.variant = value.parse::<Variant>().map_err(|m| config_err(line_no, m))?;
            continue;
        }
        let k = Key::parse(key).map_err(|m| config_err(line_no, m))?;
        let mut tokens = value.split_whitespace();
        let number = tokens
            .next()
            .ok_or_else(|| config_err(line_no, format!("missing value for `{key}`")))?;
        let v: f64 = number
            .parse()
            .map_err(|_| config_err(line_no, format!("`{number}` is not a number")))?;
        if let Some(unit) = tokens.next() {
            if !k.accepts_unit(unit) {
                return Err(config_err(
                    line_no,
                    format!("unit `{unit}` does not match key `{key}`"),
                ));
            }
        }
        if let Some(extra) = tokens.next() {
            return Err(config_err(line_no, format!("unexpected `{extra}` after value")));
        }
        numeric.push((line_no, k, v));
    }

    if seen.contains(Key::FAtom.name()) && seen.contains(Key::Delta.name()) {
        let line = numeric.iter().find(|(_, k, _)| *k == Key::Delta).map_or(0, |x| x.0);
        return Err(config_err(line, "give either f_atom_GHz or delta_MHz, not both"));
    }
    // f_atom is relative to the cavity, whatever the order in the file
    numeric.sort_by_key(|(_, k, _)| *k == Key::FAtom);
    for (line_no, k, v) in numeric {
        params.set(k, v).map_err(|e| config_err(line_no, e.to_string()))?;
    }
    validate_at(&params, text)?;
    Ok(params)
}

fn validate_at(params: &ModelParams, text: &str) -> Result<()> {
    params.validate().map_err(|e| {
        let name = match &e {
            Error::InvalidParameter { name, .. } => *name,
            _ => "",
        };
        let line = config_line_for(name, text);
        config_err(line, e.to_string())
    })
}

/// Line number of the config key that feeds an internal parameter.
fn config_line_for(param: &str, text: &str) -> usize {
    let key = match param {
        "t_atom" => "t_atom_mK",
        "t_bath" => "t_bath_K",
        "omega1" => "f_cavity_GHz",
        "omega" => "f_atom_GHz",
        "lambda" => "f_lambda_GHz",
        "g" => "g_over_2pi_MHz",
        "tau" => "tau_ns",
        "rate" => "rate_R_per_s",
        "kappa" => "kappa_per_s",
        "chi" => "chi",
        "delta" => "delta_MHz",
        _ => return 0,
    };
    text.lines()
        .position(|l| l.split('#').next().unwrap_or("").split('=').next().map(str::trim) == Some(key))
        .map_or(0, |i| i + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::angular;

    #[test]
    fn empty_is_baseline() {
        assert_eq!(parse_config("").unwrap(), ModelParams::default());
        assert_eq!(parse_config("# nothing\n\n   \n").unwrap(), ModelParams::default());
    }

    #[test]
    fn ideal_cavity_accepted() {
        assert_eq!(parse_config("kappa_per_s = 0").unwrap().kappa, 0.0);
    }

    #[test]
    fn chi_out_of_range() {
        let e = parse_config("tau_ns = 40\nchi = 2.5\n").unwrap_err();
        match e {
            Error::Config { line, message } => {
                assert_eq!(line, 2);
                assert!(message.contains("chi"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn units_and_comments() {
        let p = parse_config("t_bath_K = 1 K   # colder\nkappa_per_s = 1e3 /s\nvariant = one\n").unwrap();
        assert_eq!(p.t_bath, 1.0);
        assert_eq!(p.kappa, 1e3);
        assert_eq!(p.variant, Variant::One);
        assert!(matches!(parse_config("t_bath_K = 1 mK"), Err(Error::Config { line: 1, .. })));
        assert!(matches!(parse_config("\nt_bath_mK = 1"), Err(Error::Config { line: 2, .. })));
    }

    #[test]
    fn malformed_lines() {
        for (text, line) in [
            ("nonsense", 1),
            ("a = 1", 1),
            ("chi = 1\nchi = 2", 2),
            ("tau_ns = fast", 1),
            ("tau_ns =", 1),
            ("variant = three", 1),
            ("tau_ns = 1 ns extra", 1),
        ] {
            match parse_config(text) {
                Err(Error::Config { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
        let e = parse_config("speed = 3").unwrap_err().to_string();
        assert!(e.contains("valid keys"));
    }

    #[test]
    fn atom_frequency_relative_to_cavity() {
        let p = parse_config("f_atom_GHz = 5.1\nf_cavity_GHz = 5.0\n").unwrap();
        assert!((p.delta - angular(1e8)).abs() < 1e-2);
        assert!(parse_config("f_atom_GHz = 5.1\ndelta_MHz = 3").is_err());
    }
}
