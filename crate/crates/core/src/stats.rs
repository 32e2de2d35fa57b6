use std::f64::consts::PI;

/// Standard normal density.
pub(crate) fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

pub(crate) fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// Upper tail probability of a chi-square variable with `df` degrees of freedom.
pub(crate) fn chi_square_sf(statistic: f64, df: f64) -> f64 {
    if statistic <= 0.0 {
        return 1.0;
    }
    statrs::function::gamma::gamma_ur(df / 2.0, statistic / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_is_symmetric_and_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!((sigmoid(9f64.ln()) - 0.9).abs() < 1e-15);
        assert!((sigmoid(3.0) + sigmoid(-3.0) - 1.0).abs() < 1e-15);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
    }

    #[test]
    fn chi_square_two_df_is_exponential() {
        for x in [0.1, 1.0, 5.991, 20.0] {
            assert!((chi_square_sf(x, 2.0) - (-x / 2.0f64).exp()).abs() < 1e-12);
        }
        assert_eq!(chi_square_sf(0.0, 2.0), 1.0);
    }
}
