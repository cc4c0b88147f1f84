//! Fourth-order finite differences along the radial direction, with
//! one-sided stencils at the two ends.

/// `(d/dr, d²/dr²)` of uniformly spaced samples with spacing `h`.
/// Needs at least six samples.
pub(crate) fn radial_derivatives(u: &[f64], h: f64, d1: &mut [f64], d2: &mut [f64]) {
    let n = u.len();
    debug_assert!(n >= 6);
    let c1 = 1.0 / (12.0 * h);
    let c2 = 1.0 / (12.0 * h * h);
    for i in 2..n - 2 {
        d1[i] = (-u[i + 2] + 8.0 * u[i + 1] - 8.0 * u[i - 1] + u[i - 2]) * c1;
        d2[i] = (-u[i + 2] + 16.0 * u[i + 1] - 30.0 * u[i] + 16.0 * u[i - 1] - u[i - 2]) * c2;
    }
    // ends: reflect the index so one stencil serves both sides
    for (side, sign) in [(false, 1.0), (true, -1.0)] {
        let v = |k: usize| if side { u[n - 1 - k] } else { u[k] };
        let at = |k: usize| if side { n - 1 - k } else { k };
        d1[at(0)] = sign * (-25.0 * v(0) + 48.0 * v(1) - 36.0 * v(2) + 16.0 * v(3) - 3.0 * v(4)) * c1;
        d1[at(1)] = sign * (-3.0 * v(0) - 10.0 * v(1) + 18.0 * v(2) - 6.0 * v(3) + v(4)) * c1;
        d2[at(0)] = (45.0 * v(0) - 154.0 * v(1) + 214.0 * v(2) - 156.0 * v(3) + 61.0 * v(4) - 10.0 * v(5)) * c2;
        d2[at(1)] = (10.0 * v(0) - 15.0 * v(1) - 4.0 * v(2) + 14.0 * v(3) - 6.0 * v(4) + v(5)) * c2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;

    #[test]
    fn exact_on_quartics() {
        let h = 0.1;
        let p = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x + 3.0 * x * x * x - x * x * x * x;
        let p1 = |x: f64| -2.0 + x + 9.0 * x * x - 4.0 * x * x * x;
        let p2 = |x: f64| 1.0 + 18.0 * x - 12.0 * x * x;
        let u: Vec<f64> = (0..9).map(|i| p(i as f64 * h)).collect();
        let mut d1 = vec![0.0; 9];
        let mut d2 = vec![0.0; 9];
        radial_derivatives(&u, h, &mut d1, &mut d2);
        for i in 0..9 {
            let x = i as f64 * h;
            assert!((d1[i] - p1(x)).abs() < 1e-10, "d1 at {i}");
            assert!((d2[i] - p2(x)).abs() < 1e-9, "d2 at {i}");
        }
    }
}
