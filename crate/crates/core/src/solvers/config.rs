use crate::error::{Error, Result};
use crate::ring::TrRank;

/// How the penalty parameter grows between iterations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MuRule {
    /// `μ ← min(ρμ, μ_max)`
    #[default]
    Capped,
    /// `μ ← max(ρμ, μ_max)`, which jumps to `μ_max` after the first iteration.
    LiteralMax,
}

/// Hyper-parameters shared by both ADMM solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub tr_rank: TrRank,
    /// Weight of the data-fit term.
    pub lambda: f64,
    pub mu0: f64,
    pub mu_max: f64,
    pub rho: f64,
    /// Stopping threshold on `‖X⁺ − X‖_F / ‖P_Ω(T)‖_F`.
    pub tol: f64,
    pub max_iters: usize,
    /// Seed of the normal initialization of the cores.
    pub seed: u64,
    pub mu_rule: MuRule,
}

impl SolverConfig {
    pub const DEFAULT_LAMBDA: f64 = 10.0;
    pub const DEFAULT_MU0: f64 = 1.0;
    pub const DEFAULT_MU_MAX: f64 = 1e2;
    pub const DEFAULT_RHO: f64 = 1.01;
    pub const DEFAULT_TOL: f64 = 1e-6;
    pub const DEFAULT_MAX_ITERS: usize = 500;

    /// Default hyper-parameters at the given ring rank.
    pub fn new(tr_rank: TrRank) -> Self {
        Self {
            tr_rank,
            lambda: Self::DEFAULT_LAMBDA,
            mu0: Self::DEFAULT_MU0,
            mu_max: Self::DEFAULT_MU_MAX,
            rho: Self::DEFAULT_RHO,
            tol: Self::DEFAULT_TOL,
            max_iters: Self::DEFAULT_MAX_ITERS,
            seed: 0,
            mu_rule: MuRule::Capped,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be finite and >= 0, got {}", self.lambda));
        }
        if !(self.mu0 > 0.0 && self.mu_max.is_finite()) {
            return bad(format!("mu0 must be > 0 and mu_max finite, got {} / {}", self.mu0, self.mu_max));
        }
        if self.mu0 > self.mu_max {
            return bad(format!("mu0 {} exceeds mu_max {}", self.mu0, self.mu_max));
        }
        if !(self.rho >= 1.0) {
            return bad(format!("rho must be >= 1, got {}", self.rho));
        }
        if !(self.tol > 0.0) {
            return bad(format!("tol must be > 0, got {}", self.tol));
        }
        if self.max_iters == 0 {
            return bad("max_iters must be positive".into());
        }
        Ok(())
    }

    pub fn next_mu(&self, mu: f64) -> f64 {
        match self.mu_rule {
            MuRule::Capped => (self.rho * mu).min(self.mu_max),
            MuRule::LiteralMax => (self.rho * mu).max(self.mu_max),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> SolverConfig {
        SolverConfig::new(TrRank::uniform(3, 2).unwrap())
    }

    #[test]
    fn defaults_are_valid() {
        let c = cfg();
        c.validate().unwrap();
        assert_eq!(c.lambda, 10.0);
        assert_eq!(c.mu0, 1.0);
        assert_eq!(c.mu_max, 100.0);
        assert_eq!(c.rho, 1.01);
        assert_eq!(c.tol, 1e-6);
    }

    #[test]
    fn rejects_bad_values() {
        for edit in [
            (|c: &mut SolverConfig| c.mu0 = 200.0) as fn(&mut SolverConfig),
            |c| c.rho = 0.9,
            |c| c.tol = 0.0,
            |c| c.max_iters = 0,
            |c| c.lambda = f64::NAN,
            |c| c.mu0 = 0.0,
        ] {
            let mut c = cfg();
            edit(&mut c);
            assert!(c.validate().is_err(), "{c:?}");
        }
    }

    #[test]
    fn mu_schedules() {
        let mut c = cfg();
        let mut mu = c.mu0;
        for _ in 0..1000 {
            let next = c.next_mu(mu);
            assert!(next >= mu && next <= c.mu_max);
            mu = next;
        }
        assert_eq!(mu, c.mu_max);
        c.mu_rule = MuRule::LiteralMax;
        assert_eq!(c.next_mu(1.0), 100.0);
    }
}
