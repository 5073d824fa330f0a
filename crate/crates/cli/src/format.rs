//! Deterministic number formatting for CSV output.

/// Fixed-point decimal with nine significant digits; `nan` for non-finite
/// values.
pub fn sig9(v: f64) -> String {
    if !v.is_finite() {
        return "nan".to_string();
    }
    if v == 0.0 {
        return "0.00000000".to_string();
    }
    // The exponent after rounding to nine digits decides the decimals.
    let sci = format!("{v:.8e}");
    let exp: i32 = sci.rsplit('e').next().and_then(|e| e.parse().ok()).expect("scientific notation");
    let decimals = (8 - exp).max(0) as usize;
    format!("{v:.decimals$}")
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn parse_hex(s: &str) -> Option<Vec<u8>> {
    let s = s.trim();
    if s.len() % 2 != 0 {
        return None;
    }
    (0..s.len()).step_by(2).map(|i| s.get(i..i + 2).and_then(|b| u8::from_str_radix(b, 16).ok())).collect()
}
