/// Relative tolerance for floating comparisons of exact finite sums.
pub const REL_TOL: f64 = 1e-12;

/// `a <= b` up to `REL_TOL` scaled by the larger magnitude.
pub fn le(a: f64, b: f64) -> bool {
    a <= b + REL_TOL * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// `|a - b|` within `rel` of the larger magnitude.
pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
