//! Empirical convergence rate from an error series.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Least-squares fit of `ln xi` against `ln t`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFit<T> {
    pub slope: T,
    pub intercept: T,
    /// Points actually used.
    pub used: usize,
    /// Indices (into the input) after burn-in that were dropped for `xi <= 0`.
    pub excluded: Vec<usize>,
}

/// Slope of `ln xi` vs `ln t` over the points at index `>= burn_in`.
///
/// Non-positive `xi` values cannot be logged; they are skipped and listed in
/// [`RateFit::excluded`]. At least five usable points are required.
pub fn fit_rate<T: Scalar>(t_values: &[T], xi_values: &[T], burn_in: usize) -> Result<RateFit<T>> {
    if t_values.len() != xi_values.len() {
        return Err(Error::Dimension {
            what: "rate series",
            expected: t_values.len(),
            found: xi_values.len(),
        });
    }
    let mut excluded = Vec::new();
    let mut points = Vec::new();
    for (i, (&t, &xi)) in t_values.iter().zip(xi_values).enumerate().skip(burn_in) {
        if !(t > T::zero()) {
            return Err(Error::Domain(format!(
                "time {t} at index {i} is not positive"
            )));
        }
        if xi > T::zero() {
            points.push((t.ln(), xi.ln()));
        } else {
            excluded.push(i);
        }
    }
    if points.len() < 5 {
        return Err(Error::TooFewPoints {
            needed: 5,
            have: points.len(),
        });
    }
    let n = T::from_usize(points.len()).expect("point count");
    let mean_x = points.iter().map(|p| p.0).sum::<T>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<T>() / n;
    let sxx: T = points.iter().map(|p| (p.0 - mean_x) * (p.0 - mean_x)).sum();
    let sxy: T = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    if !(sxx > T::zero()) {
        return Err(Error::Domain("all time values are equal".into()));
    }
    let slope = sxy / sxx;
    Ok(RateFit {
        slope,
        intercept: mean_y - slope * mean_x,
        used: points.len(),
        excluded,
    })
}
