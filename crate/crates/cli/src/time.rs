//! Time literals: decimals, or multiples of π written as `pi`, `pi/4`,
//! `3pi/4`, `3*pi/4`, `-pi/2`.

use std::f64::consts::PI;

pub fn parse_time(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let bad = || format!("cannot parse time {s:?}");
    let value = match s.find("pi") {
        None => s.parse::<f64>().map_err(|_| bad())?,
        Some(at) => {
            let coef = match s[..at].trim_end_matches('*') {
                "" => 1.0,
                "-" => -1.0,
                c => c.parse::<f64>().map_err(|_| bad())?,
            };
            let rest = &s[at + 2..];
            let den = match rest.strip_prefix('/') {
                None if rest.is_empty() => 1.0,
                None => return Err(bad()),
                Some(d) => d.parse::<f64>().map_err(|_| bad())?,
            };
            if den == 0.0 {
                return Err(bad());
            }
            coef * PI / den
        }
    };
    if !value.is_finite() {
        return Err(bad());
    }
    Ok(value)
}

/// Comma-separated literals.
pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').filter(|t| !t.trim().is_empty()).map(parse_time).collect()
}

/// `start:stop:step`, endpoints included. The number of steps is rounded so
/// that `0:pi:pi/64` gives 65 points ending exactly at π.
pub fn parse_range(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, h] = parts[..] else {
        return Err(format!("range {s:?} must be start:stop:step"));
    };
    let (a, b, h) = (parse_time(a)?, parse_time(b)?, parse_time(h)?);
    if !(h > 0.0) || b < a {
        return Err(format!("range {s:?} needs step > 0 and stop >= start"));
    }
    let steps = ((b - a) / h).round();
    if (steps * h - (b - a)).abs() > 1e-9 * (b - a).abs().max(1.0) {
        return Err(format!("range {s:?}: step does not divide the interval"));
    }
    let steps = steps as usize;
    if steps == 0 {
        return Ok(vec![a]);
    }
    Ok((0..=steps).map(|k| if k == steps { b } else { a + (b - a) * k as f64 / steps as f64 }).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals() {
        assert_eq!(parse_time("pi/2").unwrap(), PI / 2.0);
        assert_eq!(parse_time("3pi/4").unwrap(), 3.0 * PI / 4.0);
        assert_eq!(parse_time("3*pi/4").unwrap(), 3.0 * PI / 4.0);
        assert_eq!(parse_time("-pi").unwrap(), -PI);
        assert_eq!(parse_time("0.25").unwrap(), 0.25);
        assert!(parse_time("pi/0").is_err());
        assert!(parse_time("pix").is_err());
        assert!(parse_time("").is_err());
    }

    #[test]
    fn ranges() {
        let t = parse_range("0:pi:pi/64").unwrap();
        assert_eq!(t.len(), 65);
        assert_eq!(t[64], PI);
        assert_eq!(t[32], PI / 2.0);
        assert!(parse_range("0:1:0.3").is_err());
        assert_eq!(parse_list("pi/6, pi/5,").unwrap().len(), 2);
        assert!(parse_list("").unwrap().is_empty());
    }
}
