//! Fixed-decimal text output. Nothing here depends on the locale.

use std::fmt::Write;

use marketdyn_core::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Tsv,
}

impl Format {
    pub fn separator(self) -> char {
        match self {
            Format::Csv => ',',
            Format::Tsv => '\t',
        }
    }
}

/// Nine significant digits written as a plain decimal, never in exponent
/// form. Negative zero prints as `0`.
pub fn number(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    // Exponent after rounding to nine digits, so 9.999999999 counts as 10.
    let sci = format!("{v:.8e}");
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    let decimals = (8 - exp).max(0) as usize;
    let s = format!("{v:.decimals$}");
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_string()
    } else {
        s
    }
}

pub fn write_trajectory(out: &mut String, tr: &Trajectory, format: Format) {
    let sep = format.separator();
    out.push('t');
    for l in tr.labels() {
        out.push(sep);
        out.push_str(l);
    }
    out.push('\n');
    for (t, row) in tr.times().iter().zip(tr.states()) {
        out.push_str(&number(*t));
        for v in row {
            out.push(sep);
            out.push_str(&number(*v));
        }
        out.push('\n');
    }
}

/// Two-column `name,value` block.
pub fn write_metrics(out: &mut String, metrics: &[(String, f64)], notes: &[String], format: Format) {
    let sep = format.separator();
    let _ = writeln!(out, "metric{sep}value");
    for (k, v) in metrics {
        let _ = writeln!(out, "{k}{sep}{}", number(*v));
    }
    for n in notes {
        let _ = writeln!(out, "# {n}");
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(number(0.5), "0.500000000");
        assert_eq!(number(5.0), "5.00000000");
        assert_eq!(number(1234.5678), "1234.56780");
        assert_eq!(number(123456789012.0), "123456789012");
        assert_eq!(number(0.000123456789123), "0.000123456789");
        assert_eq!(number(9.9999999999), "10.0000000");
        assert_eq!(number(-2.0), "-2.00000000");
        assert_eq!(number(-0.0), "0");
        assert_eq!(number(-1e-30), "-0.00000000000000000000000000000100000000");
        assert_eq!(number(f64::INFINITY), "inf");
    }

    #[test]
    fn header_and_rows() {
        let tr = Trajectory::from_columns(&[0.0, 1.0], &["u", "D"], &[vec![0.0, 0.25], vec![1.0, 0.5]]).unwrap();
        let mut s = String::new();
        write_trajectory(&mut s, &tr, Format::Csv);
        assert_eq!(s, "t,u,D\n0,0,1.00000000\n1.00000000,0.250000000,0.500000000\n");
        let mut s = String::new();
        write_trajectory(&mut s, &tr, Format::Tsv);
        assert!(s.starts_with("t\tu\tD\n"));
    }
}
