//! Sample sizes for PAC learning a row of the function table.

/// Rounding slack so that formula values that are integers up to floating
/// error are not pushed to the next integer.
const CEIL_SLACK: f64 = 1e-9;

fn ceil_count(v: f64) -> u64 {
    libm::ceil(v - CEIL_SLACK).max(0.0) as u64
}

/// `⌈c0·((1/ε)·log₂(1/δ) + (d/ε)·log₂(1/ε))⌉`: enough samples for a
/// consistent learner of a VC-dimension-`d` class to reach error `ε` with
/// confidence `1 − δ`.
pub fn sample_size_boolean(d: usize, eps: f64, delta: f64, c0: f64) -> u64 {
    let inv = 1.0 / eps;
    ceil_count(c0 * (inv * libm::log2(1.0 / delta) + d as f64 * inv * libm::log2(inv)))
}

/// `⌈c0·((1/ε⁴)·log₂(1/δ) + (d/ε⁴)·log₂²(d/ε))⌉`: the real-valued analogue
/// for pseudo-dimension `d`. The second term vanishes at `d = 0`.
pub fn sample_size_nonboolean(d: usize, eps: f64, delta: f64, c0: f64) -> u64 {
    let inv4 = libm::pow(eps, -4.0);
    let dim_term = if d == 0 {
        0.0
    } else {
        let l = libm::log2(d as f64 / eps);
        d as f64 * inv4 * l * l
    };
    ceil_count(c0 * (inv4 * libm::log2(1.0 / delta) + dim_term))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boolean_sizes() {
        assert_eq!(sample_size_boolean(1, 0.125, 0.125, 1.0), 48);
        assert_eq!(sample_size_boolean(1, 0.125, 1.0, 1.0), 24);
        assert_eq!(sample_size_boolean(0, 0.3, 1.0, 1.0), 0);
        assert_eq!(sample_size_boolean(1, 0.125, 0.125, 2.0), 96);
    }

    #[test]
    fn nonboolean_sizes() {
        assert_eq!(sample_size_nonboolean(0, 0.3, 1.0, 1.0), 0);
        assert_eq!(sample_size_nonboolean(2, 0.25, 0.5, 1.0), 4864);
        let mut prev = sample_size_nonboolean(1, 0.2, 0.1, 1.0);
        for d in [2, 4, 8, 16] {
            let m = sample_size_nonboolean(d, 0.2, 0.1, 1.0);
            assert!(m > prev);
            prev = m;
        }
    }
}
