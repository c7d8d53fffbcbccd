//! Series solution of the 1D rod step response.
//!
//! `ρ u_t = α u_xx − β u` on `[0, L]`, `u(0, t) = u_left`, `u(L, t) = 0`,
//! `u(x, 0) = 0` for `x > 0`.

use serde::{Deserialize, Serialize};

const SERIES_CUTOFF: f64 = 1e-12;
const MAX_TERMS: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rod {
    pub length: f64,
    pub alpha: f64,
    pub rho: f64,
    pub beta: f64,
    pub u_left: f64,
}

impl Rod {
    pub fn unit() -> Self {
        Self {
            length: 1.0,
            alpha: 1.0,
            rho: 1.0,
            beta: 0.0,
            u_left: 1.0,
        }
    }

    /// Steady profile `u_left·sinh(m(L−x))/sinh(mL)`, `m = sqrt(β/α)`; linear when `β = 0`.
    pub fn steady(&self, x: f64) -> f64 {
        let l = self.length;
        let m = (self.beta / self.alpha).sqrt();
        if m * l < 1e-8 {
            self.u_left * (1.0 - x / l)
        } else {
            // ratio of sinh without overflow for large m·L
            let num = (-m * x).exp() - (-m * (2.0 * l - x)).exp();
            let den = 1.0 - (-2.0 * m * l).exp();
            self.u_left * num / den
        }
    }

    pub fn value(&self, t: f64, x: f64) -> f64 {
        solve_rod_1d(
            self.length,
            self.alpha,
            self.rho,
            self.beta,
            self.u_left,
            t,
            x,
        )
    }
}

/// Steady profile minus the decaying sine series
/// `Σ 2u_left·k/(L(k² + m²))·sin(kx)·exp(−(αk² + β)t/ρ)`, `k = nπ/L`.
/// Summation stops once the magnitude bound of the next term drops below 1e−12.
pub fn solve_rod_1d(
    length: f64,
    alpha: f64,
    rho: f64,
    beta: f64,
    u_left: f64,
    t: f64,
    x: f64,
) -> f64 {
    let rod = Rod {
        length,
        alpha,
        rho,
        beta,
        u_left,
    };
    if x <= 0.0 {
        return u_left;
    }
    if x >= length {
        return 0.0;
    }
    if t <= 0.0 {
        return 0.0;
    }
    let m2 = beta / alpha;
    let mut sum = 0.0;
    for n in 1..=MAX_TERMS {
        let k = n as f64 * std::f64::consts::PI / length;
        let amplitude = 2.0 * u_left * k / (length * (k * k + m2));
        let decay = (-(alpha * k * k + beta) * t / rho).exp();
        let bound = amplitude.abs() * decay;
        if bound < SERIES_CUTOFF {
            break;
        }
        sum += amplitude * decay * (k * x).sin();
    }
    rod.steady(x) - sum
}
