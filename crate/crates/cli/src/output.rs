//! Number formatting and table writing.

use std::io::Write;

/// Shortest decimal string that parses back to exactly `x`. Moderate
/// magnitudes print positionally (`1`, `0.75`), extremes in exponent form.
pub fn fmt_num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-5..1e16).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Writes a CSV table with `\n` line endings.
pub fn write_csv(out: &mut dyn Write, header: &[&str], rows: &[Vec<String>]) -> std::io::Result<()> {
    let mut buf = String::new();
    buf.push_str(&header.join(","));
    buf.push('\n');
    for row in rows {
        buf.push_str(&row.join(","));
        buf.push('\n');
    }
    out.write_all(buf.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting_round_trips() {
        assert_eq!(fmt_num(1.0), "1");
        assert_eq!(fmt_num(-0.5), "-0.5");
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(1e-20), "1e-20");
        assert_eq!(fmt_num(2.5e300), "2.5e300");
        for x in [
            0.1 + 0.2,
            std::f64::consts::PI,
            1.0 / 3.0,
            7.0e-6,
            123456789.123,
            -4.9e-324,
            f64::MAX,
        ] {
            assert_eq!(fmt_num(x).parse::<f64>().unwrap(), x);
        }
    }
}
