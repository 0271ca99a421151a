//! Number rendering for text and JSON output.

use hct_core::C64;
use serde_json::{json, Value};

/// `x` with `sig` significant digits, trailing zeros trimmed; scientific
/// notation outside `[1e-4, 10^sig)`.
pub fn real(x: f64, sig: usize) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sig = sig.max(1);
    let exp = x.abs().log10().floor() as i32;
    if exp < -4 || exp >= sig as i32 {
        let s = format!("{:.*e}", sig - 1, x);
        let (mantissa, e) = s.split_once('e').expect("scientific format has an exponent");
        return format!("{}e{e}", trim_zeros(mantissa));
    }
    let decimals = (sig as i32 - 1 - exp).max(0) as usize;
    let s = trim_zeros(&format!("{x:.decimals$}")).to_string();
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `a`, `bj`, `a+bj` or `a-bj`.
pub fn complex(z: C64, sig: usize) -> String {
    let (re, im) = (real(z.re, sig), real(z.im.abs(), sig));
    match (re.as_str(), im.as_str()) {
        (_, "0") => re,
        ("0", _) => format!("{}j", real(z.im, sig)),
        _ => format!("{re}{}{im}j", if z.im < 0.0 { '-' } else { '+' }),
    }
}

/// Zeroes real or imaginary parts not exceeding `floor`, for display.
pub fn chop(z: C64, floor: f64) -> C64 {
    let cut = |x: f64| if x.abs() <= floor { 0.0 } else { x };
    C64::new(cut(z.re), cut(z.im))
}

/// Display floor for a set of values: `1e-12` of the largest modulus.
pub fn noise_floor<'a>(values: impl IntoIterator<Item = &'a C64>) -> f64 {
    1e-12 * values.into_iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `[re, im]`; non-finite parts become `null`.
pub fn json_complex(z: C64) -> Value {
    json!([z.re, z.im])
}

/// Reads `[re, im]` or a bare number.
pub fn parse_json_complex(v: &Value) -> Option<C64> {
    match v {
        Value::Number(n) => Some(C64::new(n.as_f64()?, 0.0)),
        Value::Array(parts) if parts.len() == 2 => {
            Some(C64::new(parts[0].as_f64()?, parts[1].as_f64()?))
        }
        _ => None,
    }
}

/// Left-aligned table with two-space gutters.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| -> String {
        let mut out = String::new();
        for (k, cell) in cells.iter().enumerate() {
            out.push_str(cell);
            if k + 1 < cols {
                let pad = widths[k] - cell.chars().count() + 2;
                out.push_str(&" ".repeat(pad));
            }
        }
        out.trim_end().to_string()
    };
    let mut out = line(header.to_vec());
    out.push('\n');
    for row in rows {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals() {
        assert_eq!(real(0.0, 6), "0");
        assert_eq!(real(-0.0, 6), "0");
        assert_eq!(real(1.0, 6), "1");
        assert_eq!(real(-0.664123456, 6), "-0.664123");
        assert_eq!(real(123456789.0, 6), "1.23457e8");
        assert_eq!(real(2.5e-17, 6), "2.5e-17");
        assert_eq!(real(0.00012345678, 3), "0.000123");
        assert_eq!(real(100.0, 6), "100");
    }

    #[test]
    fn complexes() {
        assert_eq!(complex(C64::new(0.332, 0.0011), 3), "0.332+0.0011j");
        assert_eq!(complex(C64::new(0.065, -0.199), 6), "0.065-0.199j");
        assert_eq!(complex(C64::new(0.0, -1.0), 6), "-1j");
        assert_eq!(complex(C64::new(2.0, 0.0), 6), "2");
        assert_eq!(complex(C64::new(0.0, 0.0), 6), "0");
    }

    #[test]
    fn chopping() {
        let z = C64::new(0.333, 6e-22);
        assert_eq!(complex(chop(z, noise_floor(&[z])), 3), "0.333");
        assert_eq!(chop(C64::new(-1e-3, 2.0), 1e-6), C64::new(-1e-3, 2.0));
    }

    #[test]
    fn json_round_trip() {
        let z = C64::new(0.1 + 0.2, -1e-300);
        assert_eq!(parse_json_complex(&json_complex(z)), Some(z));
        assert_eq!(parse_json_complex(&json!(3)), Some(C64::new(3.0, 0.0)));
        assert_eq!(parse_json_complex(&json!("x")), None);
    }
}
