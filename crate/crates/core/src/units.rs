//! Unit conversions. Every data size is carried in bits internally, with
//! decimal prefixes: 1 KB = 8000 bits, 1 MB = 8×10⁶ bits.

pub const BITS_PER_KB: f64 = 8.0e3;
pub const BITS_PER_MB: f64 = 8.0e6;

pub fn kb_to_bits(kb: f64) -> f64 {
    kb * BITS_PER_KB
}

pub fn mb_to_bits(mb: f64) -> f64 {
    mb * BITS_PER_MB
}

pub fn bits_to_mb(bits: f64) -> f64 {
    bits / BITS_PER_MB
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Parses a data size such as `8MB`, `100 kb`, `2.5e5` or `4000b`.
/// A bare number is taken as bits.
pub fn parse_size_bits(text: &str) -> Option<f64> {
    let lower = text.trim().to_ascii_lowercase();
    let (number, scale) = if let Some(n) = lower.strip_suffix("mb") {
        (n, BITS_PER_MB)
    } else if let Some(n) = lower.strip_suffix("kb") {
        (n, BITS_PER_KB)
    } else if let Some(n) = lower.strip_suffix('b') {
        (n, 1.0)
    } else {
        (lower.as_str(), 1.0)
    };
    let value: f64 = number.trim().parse().ok()?;
    value.is_finite().then_some(value * scale)
}
