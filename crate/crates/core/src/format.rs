//! Locale-independent number formatting for reports.

/// Significant digits used in every emitted number.
pub const SIG_DIGITS: usize = 12;

/// Rounds to [`SIG_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIG_DIGITS - 1, x).parse().unwrap_or(x)
}

/// Formats with [`SIG_DIGITS`] significant digits, trailing zeros trimmed.
///
/// Plain decimal notation is used for magnitudes in `[1e-6, 1e15)`, scientific
/// otherwise. Negative zero prints as `0`.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let r = round_sig(x);
    if r == 0.0 {
        return "0".into();
    }
    let mag = r.abs().log10().floor() as i32;
    if (-6..15).contains(&mag) {
        let decimals = (SIG_DIGITS as i32 - 1 - mag).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, r))
    } else {
        let s = format!("{:.*e}", SIG_DIGITS - 1, r);
        match s.split_once('e') {
            Some((mant, exp)) => format!("{}e{}", trim_zeros(mant.to_string()), exp),
            None => s,
        }
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}
