//! Quantities with unit suffixes: `"20 kHz"`, `"60 ng"`, `"800 mK"`.
//!
//! Bare numbers are taken in SI base units (rad/s for angular frequencies).
//! A frequency in Hz given for an angular quantity is multiplied by 2π.

use std::f64::consts::PI;

use optomech::constants::SPEED_OF_LIGHT;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Dimensionless,
    /// rad/s; accepts Hz (×2π) and rad/s
    AngularFrequency,
    /// like `AngularFrequency`, and a vacuum wavelength converted to `2πc/λ`
    Optical,
    Time,
    Mass,
    Temperature,
    Length,
}

const PREFIXES: &[(&str, f64)] = &[
    ("f", 1e-15),
    ("p", 1e-12),
    ("n", 1e-9),
    ("u", 1e-6),
    ("μ", 1e-6),
    ("µ", 1e-6),
    ("m", 1e-3),
    ("c", 1e-2),
    ("k", 1e3),
    ("M", 1e6),
    ("G", 1e9),
    ("T", 1e12),
];

enum Base {
    Scale(f64),
    Wavelength,
}

fn bases(dim: Dimension) -> &'static [(&'static str, Base)] {
    use Base::*;
    match dim {
        Dimension::Dimensionless => &[],
        Dimension::AngularFrequency => &[("Hz", Scale(2.0 * PI)), ("rad/s", Scale(1.0))],
        Dimension::Optical => &[("Hz", Scale(2.0 * PI)), ("rad/s", Scale(1.0)), ("m", Wavelength)],
        Dimension::Time => &[("s", Scale(1.0))],
        Dimension::Mass => &[("g", Scale(1e-3))],
        Dimension::Temperature => &[("K", Scale(1.0))],
        Dimension::Length => &[("m", Scale(1.0))],
    }
}

fn split_number(s: &str) -> Option<(f64, &str)> {
    let end = s
        .char_indices()
        .find(|&(_, c)| !(c.is_ascii_digit() || matches!(c, '.' | '+' | '-' | 'e' | 'E')))
        .map_or(s.len(), |(i, _)| i);
    (1..=end)
        .rev()
        .find_map(|i| s[..i].parse::<f64>().ok().map(|v| (v, s[i..].trim())))
}

/// Parse `text` as a quantity of dimension `dim`, returning SI base units.
pub fn parse_quantity(text: &str, dim: Dimension) -> Result<f64, CliError> {
    let bad = |why: &str| CliError::Unit(format!("`{text}`: {why}"));
    let (value, unit) = split_number(text.trim()).ok_or_else(|| bad("no leading number"))?;
    if unit.is_empty() {
        return Ok(value);
    }
    for (symbol, base) in bases(dim) {
        let factor = if unit == *symbol {
            Some(1.0)
        } else {
            unit.strip_suffix(symbol)
                .and_then(|p| PREFIXES.iter().find(|(q, _)| *q == p))
                .map(|(_, f)| *f)
        };
        if let Some(f) = factor {
            return Ok(match base {
                Base::Scale(s) => value * f * s,
                Base::Wavelength => 2.0 * PI * SPEED_OF_LIGHT / (value * f),
            });
        }
    }
    Err(bad(&format!("unit `{unit}` not allowed for a {dim:?} quantity")))
}
