//! Composite quadrature on uniform grids.

/// Composite Simpson rule over uniformly spaced samples.
///
/// An even number of intervals uses plain Simpson; an odd count closes the
/// last interval with the 3/8 rule so every sample contributes.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    match n {
        0 | 1 => 0.0,
        2 => 0.5 * h * (values[0] + values[1]),
        3 => h / 3.0 * (values[0] + 4.0 * values[1] + values[2]),
        _ => {
            let intervals = n - 1;
            let (simpson_end, tail) = if intervals.is_multiple_of(2) {
                (n - 1, 0.0)
            } else {
                let k = n - 4;
                let tail = 3.0 * h / 8.0
                    * (values[k] + 3.0 * values[k + 1] + 3.0 * values[k + 2] + values[k + 3]);
                (n - 4, tail)
            };
            let mut acc = values[0] + values[simpson_end];
            for (i, v) in values.iter().enumerate().take(simpson_end).skip(1) {
                acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
            }
            h / 3.0 * acc + tail
        }
    }
}

/// Integrates `f` over `[a, b]` with `n` Simpson panels (2n intervals).
pub fn simpson_fn(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let panels = panels.max(1);
    let intervals = 2 * panels;
    let h = (b - a) / intervals as f64;
    let mut acc = f(a) + f(b);
    for i in 1..intervals {
        let x = a + i as f64 * h;
        acc += if i % 2 == 1 { 4.0 * f(x) } else { 2.0 * f(x) };
    }
    h / 3.0 * acc
}

/// Uniform grid from `start` to `end` inclusive with step close to `step`.
pub fn uniform_grid(start: f64, end: f64, step: f64) -> Vec<f64> {
    let n = ((end - start) / step).ceil().max(1.0) as usize;
    let h = (end - start) / n as f64;
    (0..=n).map(|i| start + i as f64 * h).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_is_exact() {
        for n in [5usize, 6, 7, 8] {
            let h = 1.0 / (n - 1) as f64;
            let v: Vec<f64> = (0..n).map(|i| (i as f64 * h).powi(3)).collect();
            assert!((simpson(&v, h) - 0.25).abs() < 1e-14, "n = {n}");
        }
        assert!((simpson_fn(|x| x * x * x, 0.0, 2.0, 3) - 4.0).abs() < 1e-13);
    }

    #[test]
    fn grid_endpoints() {
        let g = uniform_grid(-1.0, 1.0, 0.3);
        assert_eq!(g.first(), Some(&-1.0));
        assert!((g.last().unwrap() - 1.0).abs() < 1e-15);
        assert!(g.windows(2).all(|p| p[1] > p[0]));
    }
}
