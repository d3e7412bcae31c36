//! The weighted coverage family `U_rho` over occupancy vectors.
//!
//! For weights `mu > 0` and `rho >= 1`,
//!
//! ```text
//! U_1(d)   = sum mu * ln d
//! U_rho(d) = sum mu^rho * d^(1 - rho) / (1 - rho)      (rho > 1)
//! ```
//!
//! with gradient `(mu / d)^rho`. Large `rho` overflows the gradient long before
//! it stops being useful, so the Frank–Wolfe callers go through
//! [`RhoObjective::log_gradient_weights`], which returns the gradient scaled so
//! its largest entry is one.

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

/// Strictly positive per-pair importance weights `mu`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageWeights<T> {
    mu: Vec<T>,
    mu_max: T,
    mu_min: T,
}

impl<T: Scalar> CoverageWeights<T> {
    pub fn new(mu: Vec<T>) -> Result<Self> {
        if mu.is_empty() {
            return Err(Error::Parameter("coverage weights are empty".into()));
        }
        if let Some(i) = mu.iter().position(|&m| !(m > T::zero() && m.is_finite())) {
            return Err(Error::Parameter(format!(
                "coverage weight {i} = {} is not positive and finite",
                mu[i]
            )));
        }
        let mu_max = mu.iter().copied().fold(T::neg_infinity(), T::max);
        let mu_min = mu.iter().copied().fold(T::infinity(), T::min);
        Ok(Self { mu, mu_max, mu_min })
    }

    /// `mu = 1` on every pair.
    pub fn uniform(num_pairs: usize) -> Self {
        Self {
            mu: vec![T::one(); num_pairs],
            mu_max: T::one(),
            mu_min: T::one(),
        }
    }

    pub fn values(&self) -> &[T] {
        &self.mu
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    pub fn mu_max(&self) -> T {
        self.mu_max
    }

    pub fn mu_min(&self) -> T {
        self.mu_min
    }

    /// `mu / sum(mu)`.
    pub fn normalized(&self) -> Vec<T> {
        let total: T = self.mu.iter().copied().sum();
        self.mu.iter().map(|&m| m / total).collect()
    }

    /// Every weight multiplied by `factor > 0`.
    pub fn scaled(&self, factor: T) -> Result<Self> {
        Self::new(self.mu.iter().map(|&m| m * factor).collect())
    }
}

/// The `(rho, mu)` pair selecting one member of the coverage family.
#[derive(Debug, Clone, PartialEq)]
pub struct RhoObjective<T> {
    rho: T,
    weights: CoverageWeights<T>,
}

/// Gradient `(mu / d)^rho` represented as `weights * exp(log_scale)`, with the
/// largest weight exactly one.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledGradient<T> {
    pub weights: Vec<T>,
    pub log_scale: T,
}

impl<T: Scalar> RhoObjective<T> {
    pub fn new(rho: T, weights: CoverageWeights<T>) -> Result<Self> {
        if !(rho >= T::one() && rho.is_finite()) {
            return Err(Error::Parameter(format!(
                "rho = {rho} must be finite and >= 1"
            )));
        }
        Ok(Self { rho, weights })
    }

    pub fn rho(&self) -> T {
        self.rho
    }

    pub fn weights(&self) -> &CoverageWeights<T> {
        &self.weights
    }

    fn is_log_branch(&self) -> bool {
        self.rho == T::one()
    }

    /// `U_rho(d)`; every `d` entry must be strictly positive.
    pub fn value(&self, d: &[T]) -> Result<T> {
        check_interior(d, self.weights.len())?;
        let mu = self.weights.values();
        if self.is_log_branch() {
            return Ok(mu.iter().zip(d).map(|(&m, &x)| m * x.ln()).sum());
        }
        let rho = self.rho;
        let one_minus = T::one() - rho;
        Ok(mu
            .iter()
            .zip(d)
            .map(|(&m, &x)| (rho * m.ln() + one_minus * x.ln()).exp() / one_minus)
            .sum())
    }

    /// `(mu / d)^rho`; fails with [`Error::Overflow`] when an entry is not finite.
    pub fn gradient(&self, d: &[T]) -> Result<Vec<T>> {
        check_interior(d, self.weights.len())?;
        let rho = self.rho;
        self.weights
            .values()
            .iter()
            .zip(d)
            .enumerate()
            .map(|(index, (&m, &x))| {
                let g = (m / x).powf(rho);
                if g.is_finite() {
                    Ok(g)
                } else {
                    Err(Error::Overflow { index })
                }
            })
            .collect()
    }

    /// `exp(rho * (ln mu - ln d) - m)` with `m` the largest exponent.
    ///
    /// Proportional to [`gradient`](Self::gradient) and never overflows; the
    /// argmax set is unchanged.
    pub fn log_gradient_weights(&self, d: &[T]) -> Result<ScaledGradient<T>> {
        check_interior(d, self.weights.len())?;
        let exponents: Vec<T> = self
            .weights
            .values()
            .iter()
            .zip(d)
            .map(|(&m, &x)| self.rho * (m.ln() - x.ln()))
            .collect();
        let shift = exponents.iter().copied().fold(T::neg_infinity(), T::max);
        let weights = exponents.iter().map(|&e| (e - shift).exp()).collect();
        Ok(ScaledGradient {
            weights,
            log_scale: shift,
        })
    }

    /// Lipschitz constant of the gradient on `{d : d >= 2 eta}`:
    /// `rho * mu_max^rho / (2 eta)^(rho + 1)`.
    ///
    /// The Hessian is `diag(-rho mu^rho d^-(rho+1))` for every `rho >= 1`, so
    /// the same bound covers the logarithmic member.
    pub fn smoothness_constant(&self, eta: T) -> Result<T> {
        if !(eta > T::zero() && eta < lit(0.5)) {
            return Err(Error::Parameter(format!(
                "eta = {eta} must lie in (0, 1/2)"
            )));
        }
        let rho = self.rho;
        let two_eta = eta + eta;
        Ok(rho * self.weights.mu_max().powf(rho) / two_eta.powf(rho + T::one()))
    }

    /// `((1 - rho) U_rho(d))^(1/rho) = (sum d r^rho)^(1/rho)` with `r = mu / d`,
    /// evaluated by log-sum-exp. Requires `rho > 1`.
    pub fn v_rho(&self, d: &[T]) -> Result<T> {
        if self.is_log_branch() {
            return Err(Error::Parameter("V_rho is defined for rho > 1".into()));
        }
        check_interior(d, self.weights.len())?;
        let rho = self.rho;
        let logs: Vec<T> = self
            .weights
            .values()
            .iter()
            .zip(d)
            .map(|(&m, &x)| x.ln() + rho * (m.ln() - x.ln()))
            .collect();
        Ok((log_sum_exp(&logs) / rho).exp())
    }
}

fn check_interior<T: Scalar>(d: &[T], expected: usize) -> Result<()> {
    if d.len() != expected {
        return Err(Error::Dimension {
            what: "occupancy vs weights",
            expected,
            found: d.len(),
        });
    }
    if let Some(i) = d.iter().position(|&x| !(x > T::zero() && x.is_finite())) {
        return Err(Error::Domain(format!(
            "occupancy entry {i} = {} is not strictly positive",
            d[i]
        )));
    }
    Ok(())
}

pub(crate) fn log_sum_exp<T: Scalar>(xs: &[T]) -> T {
    let m = xs.iter().copied().fold(T::neg_infinity(), T::max);
    if !m.is_finite() {
        return m;
    }
    m + xs.iter().map(|&x| (x - m).exp()).sum::<T>().ln()
}

/// Largest coverage ratio `mu / d` and the first (row-major) pair attaining it.
pub fn max_ratio<T: Scalar>(weights: &CoverageWeights<T>, d: &[T]) -> Result<(T, usize)> {
    check_interior(d, weights.len())?;
    let mut best = (T::neg_infinity(), 0);
    for (i, (&m, &x)) in weights.values().iter().zip(d).enumerate() {
        let r = m / x;
        if r > best.0 {
            best = (r, i);
        }
    }
    Ok(best)
}

/// `KL(p || q) = sum p ln(p / q)` with `0 ln 0 = 0`.
pub fn kl_divergence<T: Scalar>(p: &[T], q: &[T]) -> Result<T> {
    if p.len() != q.len() {
        return Err(Error::Dimension {
            what: "kl operands",
            expected: p.len(),
            found: q.len(),
        });
    }
    let mut total = T::zero();
    for (i, (&pi, &qi)) in p.iter().zip(q).enumerate() {
        if pi < T::zero() || qi < T::zero() {
            return Err(Error::Domain(format!("negative probability at {i}")));
        }
        if pi == T::zero() {
            continue;
        }
        if qi == T::zero() {
            return Err(Error::Domain(format!("q vanishes where p > 0 at {i}")));
        }
        total += pi * (pi / qi).ln();
    }
    Ok(total)
}

/// Shannon entropy in nats, `0 ln 0 = 0`.
pub fn entropy<T: Scalar>(p: &[T]) -> T {
    -p.iter()
        .filter(|&&x| x > T::zero())
        .map(|&x| x * x.ln())
        .sum::<T>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn obj(rho: f64, mu: &[f64]) -> RhoObjective<f64> {
        RhoObjective::new(rho, CoverageWeights::new(mu.to_vec()).unwrap()).unwrap()
    }

    #[test]
    fn value_examples() {
        let u = obj(1.0, &[1.0; 4]).value(&[0.25; 4]).unwrap();
        assert_relative_eq!(u, -4.0 * 4f64.ln(), max_relative = 1e-14);
        assert_relative_eq!(u, -5.545177, max_relative = 1e-6);
        let u = obj(2.0, &[0.25; 4]).value(&[0.25; 4]).unwrap();
        assert_relative_eq!(u, -1.0, max_relative = 1e-14);
        let u = obj(3.0, &[1.0, 2.0]).value(&[0.5, 0.5]).unwrap();
        assert_relative_eq!(u, -18.0, max_relative = 1e-14);
    }

    #[test]
    fn boundary_is_a_domain_error() {
        let o = obj(2.0, &[1.0, 1.0]);
        assert!(matches!(o.value(&[1.0, 0.0]), Err(Error::Domain(_))));
        assert!(matches!(o.gradient(&[1.0, -0.1]), Err(Error::Domain(_))));
        assert!(matches!(
            max_ratio(o.weights(), &[0.0, 1.0]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(o.v_rho(&[0.0, 1.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn rejects_bad_parameters() {
        let w = CoverageWeights::new(vec![1.0, 2.0]).unwrap();
        assert!(RhoObjective::new(0.5, w.clone()).is_err());
        assert!(RhoObjective::new(f64::INFINITY, w).is_err());
        assert!(CoverageWeights::new(vec![1.0, 0.0]).is_err());
        assert!(CoverageWeights::<f64>::new(vec![]).is_err());
    }

    #[test]
    fn gradient_examples() {
        let g = obj(3.7, &[0.1, 0.3, 0.6])
            .gradient(&[0.1, 0.3, 0.6])
            .unwrap();
        for x in g {
            assert_relative_eq!(x, 1.0, max_relative = 1e-15);
        }
        let g = obj(1.0, &[2.0, 1.0]).gradient(&[0.5, 0.5]).unwrap();
        assert_eq!(g, vec![4.0, 2.0]);
    }

    #[test]
    fn gradient_overflow_is_signalled() {
        let err = obj(1000.0, &[1.0, 2.0]).gradient(&[0.5, 0.5]).unwrap_err();
        assert!(matches!(err, Error::Overflow { index: 1 }));
    }

    #[test]
    fn log_weights_at_large_rho() {
        let w = obj(200.0, &[1.0, 2.0])
            .log_gradient_weights(&[0.5, 0.5])
            .unwrap();
        assert_eq!(w.weights[1], 1.0);
        assert_relative_eq!(w.weights[0], 2f64.powi(-200), max_relative = 1e-12);
    }

    #[test]
    fn log_weights_consistent_with_gradient() {
        let o = obj(2.5, &[0.3, 1.2, 0.7, 2.0]);
        let d = [0.1, 0.4, 0.2, 0.3];
        let g = o.gradient(&d).unwrap();
        let w = o.log_gradient_weights(&d).unwrap();
        let scale = w.log_scale.exp();
        for (gi, wi) in g.iter().zip(&w.weights) {
            assert_relative_eq!(*gi, wi * scale, max_relative = 1e-12);
        }
        assert!(w.weights.iter().all(|&x| x > 0.0 && x <= 1.0));
        assert!(w.weights.contains(&1.0));
    }

    #[test]
    fn smoothness_examples() {
        assert_eq!(
            obj(2.0, &[1.0, 0.5]).smoothness_constant(0.25).unwrap(),
            16.0
        );
        assert_eq!(
            obj(1.0, &[1.0, 0.5]).smoothness_constant(0.25).unwrap(),
            4.0
        );
        assert!(obj(1.0, &[1.0]).smoothness_constant(0.5).is_err());
        assert!(obj(1.0, &[1.0]).smoothness_constant(0.0).is_err());
    }

    #[test]
    fn v_rho_examples() {
        let o = obj(2.0, &[1.0, 2.0]);
        assert_relative_eq!(
            o.v_rho(&[0.5, 0.5]).unwrap(),
            10f64.sqrt(),
            max_relative = 1e-14
        );
        let v = obj(64.0, &[1.0, 2.0]).v_rho(&[0.5, 0.5]).unwrap();
        assert!(v >= 0.5f64.powf(1.0 / 64.0) * 4.0 - 1e-12 && v <= 4.0 + 1e-12);
        assert!(obj(1.0, &[1.0, 2.0]).v_rho(&[0.5, 0.5]).is_err());
    }

    #[test]
    fn v_rho_sweep_nondecreasing() {
        let mut prev = 0.0;
        for k in 1..=10 {
            let rho = f64::from(1u32 << k);
            let v = obj(rho, &[1.0, 2.0]).v_rho(&[0.5, 0.5]).unwrap();
            assert!(v >= prev - 1e-12, "rho {rho}: {v} < {prev}");
            assert!(v <= 4.0 + 1e-12);
            prev = v;
        }
        assert_relative_eq!(prev, 4.0, max_relative = 1e-3);
    }

    #[test]
    fn max_ratio_examples() {
        let w = CoverageWeights::new(vec![1.0, 3.0]).unwrap();
        assert_eq!(max_ratio(&w, &[0.25, 0.75]).unwrap(), (4.0, 0));
        let d = [0.2, 0.5, 0.3];
        let w = CoverageWeights::new(d.iter().map(|x| 1.7 * x).collect()).unwrap();
        assert_relative_eq!(max_ratio(&w, &d).unwrap().0, 1.7, max_relative = 1e-15);
    }

    #[test]
    fn kl_examples() {
        assert_eq!(kl_divergence(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        assert_abs_diff_eq!(
            kl_divergence(&[1.0, 0.0], &[0.5, 0.5]).unwrap(),
            2f64.ln(),
            epsilon = 1e-15
        );
        assert!(kl_divergence(&[0.5, 0.5], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn average_relative_coverage_identity() {
        let mu = [0.4, 1.3, 0.2, 2.2];
        let d = [0.1, 0.35, 0.15, 0.4];
        let u = obj(2.0, &mu).value(&d).unwrap();
        let direct: f64 = -mu.iter().zip(&d).map(|(m, x)| m * m / x).sum::<f64>();
        assert_relative_eq!(u, direct, max_relative = 1e-13);
    }

    #[test]
    fn f32_evaluation_agrees_with_f64() {
        let o32 =
            RhoObjective::new(2.0f32, CoverageWeights::new(vec![1.0f32, 2.0]).unwrap()).unwrap();
        let v = o32.v_rho(&[0.5, 0.5]).unwrap();
        assert_relative_eq!(v, 10f32.sqrt(), max_relative = 1e-6);
    }
}
