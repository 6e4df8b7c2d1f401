//! Brute-force CVA oracle for the baseline structure.
//!
//! The Back Swap MtM for O is an arithmetic Brownian motion; its law at each
//! quadrature date comes from forward induction on a recombining trinomial
//! lattice (moment-matched, several lattice steps per quadrature interval).
//! Default of C is bucketed on the quadrature grid: a default in
//! `(t[k-1], t[k]]` is closed out at `t[k]`. This module shares no code with
//! the Monte Carlo engine.

#![allow(dead_code)]

#[derive(Clone, Copy, Debug)]
pub struct OracleInput {
    pub initial_mtm: f64,
    pub drift: f64,
    pub volatility: f64,
    pub hazard_rate: f64,
    pub discount_rate: f64,
    pub lgd: f64,
    pub horizon: f64,
    /// Quadrature spacing.
    pub dt: f64,
    /// Lattice steps per quadrature interval.
    pub substeps: usize,
}

/// `E[max(X(t_k), 0)]` for `k = 0..=K` on the quadrature grid.
pub fn expected_positive_mtm(inp: &OracleInput) -> Vec<f64> {
    let n_intervals = (inp.horizon / inp.dt).round() as usize;
    let mut out = Vec::with_capacity(n_intervals + 1);
    if inp.volatility == 0.0 {
        for k in 0..=n_intervals {
            let t = k as f64 * inp.dt;
            out.push((inp.initial_mtm + inp.drift * t).max(0.0));
        }
        return out;
    }
    let h = inp.dt / inp.substeps as f64;
    let dx = inp.volatility * (3.0 * h).sqrt();
    let m = inp.drift * h / dx;
    let pu = (1.0 / 3.0 + m * m + m) / 2.0;
    let pd = (1.0 / 3.0 + m * m - m) / 2.0;
    let pm = 1.0 - pu - pd;
    assert!(pu >= 0.0 && pd >= 0.0 && pm >= 0.0, "lattice probabilities out of range");

    let steps = n_intervals * inp.substeps;
    // node j (0..=2*steps) sits at initial + (j - steps) * dx
    let width = 2 * steps + 1;
    let mut p = vec![0.0; width];
    p[steps] = 1.0;
    let positive_part = |p: &[f64]| -> f64 {
        p.iter().enumerate().map(|(j, &q)| q * (inp.initial_mtm + (j as f64 - steps as f64) * dx).max(0.0)).sum()
    };
    out.push(positive_part(&p));
    let mut next = vec![0.0; width];
    for s in 1..=steps {
        next.iter_mut().for_each(|v| *v = 0.0);
        let lo = steps - (s - 1);
        let hi = steps + (s - 1);
        for j in lo..=hi {
            let q = p[j];
            next[j - 1] += pd * q;
            next[j] += pm * q;
            next[j + 1] += pu * q;
        }
        std::mem::swap(&mut p, &mut next);
        if s % inp.substeps == 0 {
            out.push(positive_part(&p));
        }
    }
    out
}

/// `LGD * sum_k P(t[k-1] < tau <= t[k]) * exp(-r t[k]) * E[X(t[k])+]`.
pub fn baseline_cva(inp: &OracleInput) -> f64 {
    let epe = expected_positive_mtm(inp);
    let survival = |t: f64| (-inp.hazard_rate * t).exp();
    let mut total = 0.0;
    for (k, e) in epe.iter().enumerate().skip(1) {
        let t0 = (k - 1) as f64 * inp.dt;
        let t1 = k as f64 * inp.dt;
        total += (survival(t0) - survival(t1)) * (-inp.discount_rate * t1).exp() * e;
    }
    inp.lgd * total
}

#[cfg(test)]
mod self_checks {
    use super::*;

    fn input(vol: f64, drift: f64) -> OracleInput {
        OracleInput {
            initial_mtm: 0.0,
            drift,
            volatility: vol,
            hazard_rate: 0.02,
            discount_rate: 0.01,
            lgd: 0.6,
            horizon: 10.0,
            dt: 0.25,
            substeps: 32,
        }
    }

    #[test]
    fn lattice_matches_closed_form_epe() {
        // driftless ABM from 0: E[X(t)+] = sigma * sqrt(t / (2 pi))
        let inp = input(30e6, 0.0);
        let epe = expected_positive_mtm(&inp);
        for (k, &v) in epe.iter().enumerate().skip(4) {
            let t = k as f64 * inp.dt;
            let exact = inp.volatility * (t / (2.0 * std::f64::consts::PI)).sqrt();
            assert!((v / exact - 1.0).abs() < 2e-3, "t={t} lattice={v} exact={exact}");
        }
    }

    #[test]
    fn lattice_matches_closed_form_with_drift() {
        // E[X+] for X ~ N(m, s^2) is m Phi(m/s) + s phi(m/s)
        let inp = input(20e6, 5e6);
        let epe = expected_positive_mtm(&inp);
        let t = 10.0;
        let (m, s) = (inp.drift * t, inp.volatility * t.sqrt());
        let z = m / s;
        let phi = (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let cdf = 0.5 * (1.0 + erf(z / std::f64::consts::SQRT_2));
        let exact = m * cdf + s * phi;
        assert!((epe[40] / exact - 1.0).abs() < 1e-3);
    }

    // Abramowitz-Stegun 7.1.26, adequate to 1.5e-7.
    fn erf(x: f64) -> f64 {
        let t = 1.0 / (1.0 + 0.3275911 * x.abs());
        let y = 1.0
            - (((((1.061405429 * t - 1.453152027) * t) + 1.421413741) * t - 0.284496736) * t + 0.254829592)
                * t
                * (-x * x).exp();
        y.copysign(x)
    }

    #[test]
    fn degenerate_oracle() {
        let mut inp = input(0.0, 0.0);
        inp.initial_mtm = 100e6;
        inp.discount_rate = 0.0;
        let expected = 0.6 * 100e6 * (1.0 - (-0.2f64).exp());
        assert!((baseline_cva(&inp) - expected).abs() < 1e-6 * expected);
    }
}
