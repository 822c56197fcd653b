use statrs::distribution::{ContinuousCDF, Normal};

/// Two-sided p-value of a standard-normal deviate, `2·(1 − Φ(|z|))`.
pub fn two_sided_p(z: f64) -> f64 {
    let std_normal = Normal::new(0.0, 1.0).expect("valid parameters");
    (2.0 * std_normal.sf(z.abs())).min(1.0)
}
