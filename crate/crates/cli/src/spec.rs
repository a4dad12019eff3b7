//! Small textual specs accepted on the command line.

use std::f64::consts::PI;
use std::ops::RangeInclusive;

/// `X<d>(<angle>)`, where the angle is a product/quotient of numbers and
/// `pi`, optionally negated: `X3(pi/2)`, `x5(-2*pi/3)`, `X3(0.25)`.
pub fn parse_phase_gate(spec: &str) -> Result<(usize, f64), String> {
    let spec = spec.trim();
    let rest = spec
        .strip_prefix('X')
        .or_else(|| spec.strip_prefix('x'))
        .ok_or_else(|| format!("gate spec {spec:?} must start with X"))?;
    let open = rest.find('(').ok_or_else(|| format!("gate spec {spec:?} needs (angle)"))?;
    let inner = rest[open + 1..]
        .strip_suffix(')')
        .ok_or_else(|| format!("gate spec {spec:?} needs a closing parenthesis"))?;
    let d: usize = rest[..open]
        .parse()
        .map_err(|_| format!("bad dimension in {spec:?}"))?;
    if d < 2 {
        return Err(format!("dimension in {spec:?} must be >= 2"));
    }
    Ok((d, parse_angle(inner)?))
}

pub fn parse_angle(text: &str) -> Result<f64, String> {
    let text = text.trim();
    let (sign, body) = match text.strip_prefix('-') {
        Some(b) => (-1.0, b),
        None => (1.0, text),
    };
    let mut value = 1.0;
    let mut op = '*';
    let mut start = 0;
    let bytes: Vec<char> = body.chars().collect();
    for i in 0..=bytes.len() {
        if i == bytes.len() || bytes[i] == '*' || bytes[i] == '/' {
            let token: String = bytes[start..i].iter().collect();
            let token = token.trim();
            let x = match token {
                "pi" | "PI" | "π" => PI,
                _ => token.parse::<f64>().map_err(|_| format!("bad angle term {token:?}"))?,
            };
            value = if op == '*' { value * x } else { value / x };
            if i < bytes.len() {
                op = bytes[i];
            }
            start = i + 1;
        }
    }
    if !value.is_finite() {
        return Err(format!("angle {text:?} is not finite"));
    }
    Ok(sign * value)
}

/// `8`, `2..8` (inclusive) or `2,3,5`.
pub fn parse_dims(text: &str) -> Result<Vec<usize>, String> {
    let bad = || format!("bad dimension list {text:?}");
    if let Some((a, b)) = text.split_once("..") {
        let b = b.trim_start_matches('=');
        let range: RangeInclusive<usize> = a.trim().parse().map_err(|_| bad())?..=b.trim().parse().map_err(|_| bad())?;
        let dims: Vec<usize> = range.collect();
        if dims.is_empty() {
            return Err(bad());
        }
        return Ok(dims);
    }
    text.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect()
}
