//! Sign-change bracketing for scalar functions.

/// Narrows a bracket `[a, b]` with `inside(a) != inside(b)` until
/// `b - a <= tol`. Returns the final bracket, still ordered as given
/// (`inside(lo)` keeps the value it had at `a`).
pub fn bisect<F>(mut a: f64, mut b: f64, tol: f64, mut inside: F) -> (f64, f64)
where
    F: FnMut(f64) -> bool,
{
    let side_a = inside(a);
    debug_assert_ne!(side_a, inside(b), "bracket does not straddle a change");
    // 200 halvings exhaust f64 resolution on any finite bracket.
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        let mid = a + (b - a) * 0.5;
        if mid == a || mid == b {
            break;
        }
        if inside(mid) == side_a {
            a = mid;
        } else {
            b = mid;
        }
    }
    (a, b)
}
