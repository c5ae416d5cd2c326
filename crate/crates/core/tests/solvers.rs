use trc_core::solvers::{run, DIVERGENCE_STREAK};
use trc_core::{
    rse, AdmmState, DenseTensor, Error, LlrfState, MuRule, ObservationMask, OlrfState, RseScope,
    Solver, SolverConfig, TrCores, TrRank,
};

fn synthetic(shape: &[usize], ranks: &[usize], seed: u64) -> DenseTensor {
    TrCores::random(shape, &TrRank::new(ranks.to_vec()).unwrap(), 0.0, 0.5, seed)
        .unwrap()
        .reconstruct()
}

fn config(ranks: &[usize]) -> SolverConfig {
    SolverConfig::new(TrRank::new(ranks.to_vec()).unwrap())
}

#[test]
fn fully_observed_input_is_returned_after_one_iteration() {
    let truth = synthetic(&[5, 4, 6], &[2, 3, 2], 1);
    let mask = ObservationMask::full(truth.shape()).unwrap();
    for solver in [Solver::Olrf, Solver::Llrf] {
        let mut cfg = config(&[2, 3, 2]);
        cfg.max_iters = 1;
        let report = solver.solve(&truth, &mask, &cfg, Some(&truth)).unwrap();
        assert_eq!(report.iterations, 1);
        assert_eq!(report.final_x, truth);
        assert_eq!(rse(&report.final_x, &truth, RseScope::All).unwrap(), 0.0);
        assert_eq!(report.rse_history, vec![0.0]);
    }
}

#[test]
fn huge_tolerance_stops_after_one_iteration() {
    let truth = synthetic(&[5, 4, 6], &[2, 2, 2], 2);
    let mask = ObservationMask::random_missing(truth.shape(), 0.4, 3).unwrap();
    let mut cfg = config(&[2, 2, 2]);
    cfg.tol = 1e300;
    for solver in [Solver::Olrf, Solver::Llrf] {
        let report = solver.solve(&truth, &mask, &cfg, None).unwrap();
        assert_eq!(report.iterations, 1);
        assert!(report.converged);
        assert_eq!(report.rel_change_history.len(), 1);
        assert!(report.rse_history.is_empty());
    }
}

#[test]
fn initial_states() {
    let truth = synthetic(&[4, 3, 5], &[2, 2, 3], 4);
    let mask = ObservationMask::random_missing(truth.shape(), 0.5, 5).unwrap();
    let cfg = config(&[2, 2, 3]);

    let a = OlrfState::init(&truth, &mask, &cfg).unwrap();
    let b = OlrfState::init(&truth, &mask, &cfg).unwrap();
    assert_eq!(a.cores, b.cores);
    assert_eq!(a.mu, cfg.mu0);
    assert!(a.multipliers.iter().flatten().all(|y| y.data().iter().all(|&v| v == 0.0)));
    assert!(a.aux.iter().flatten().all(|m| m.data().iter().all(|&v| v == 0.0)));
    for (k, &v) in a.x.data().iter().enumerate() {
        let want = if mask.is_observed(k) { truth.data()[k] } else { 0.0 };
        assert_eq!(v, want);
    }

    let l = LlrfState::init(&truth, &mask, &cfg).unwrap();
    assert_eq!(l.cores, a.cores);
    assert_eq!(l.x, a.x);
    assert!(l.multipliers.iter().all(|y| y.data().iter().all(|&v| v == 0.0)));
    assert!(l.latent.iter().flatten().all(|w| w.data().iter().all(|&v| v == 0.0)));
    assert_eq!(l.multipliers.len(), 3);
}

#[test]
fn invalid_problems_are_rejected() {
    let truth = synthetic(&[4, 3, 5], &[2, 2, 2], 6);
    let empty = ObservationMask::new(vec![4, 3, 5], vec![false; 60]).unwrap();
    let cfg = config(&[2, 2, 2]);
    assert!(matches!(
        Solver::Olrf.solve(&truth, &empty, &cfg, None),
        Err(Error::EmptyMask)
    ));
    let mask = ObservationMask::full(&[4, 3, 5]).unwrap();
    assert!(matches!(
        Solver::Llrf.solve(&truth, &mask, &config(&[2, 2]), None),
        Err(Error::RankOrderMismatch { ranks: 2, order: 3 })
    ));
    let other = ObservationMask::full(&[4, 3, 6]).unwrap();
    assert!(Solver::Olrf.solve(&truth, &other, &cfg, None).is_err());
    let mut bad = cfg.clone();
    bad.rho = 0.5;
    assert!(matches!(
        Solver::Olrf.solve(&truth, &mask, &bad, None),
        Err(Error::InvalidConfig(_))
    ));
}

fn check_iterates<S: AdmmState>(mut state: S, truth: &DenseTensor, mask: &ObservationMask, cfg: &SolverConfig) {
    let mut mu = state.mu();
    for _ in 0..30 {
        state.step(truth, mask, cfg).unwrap();
        for (k, (&x, &t)) in state.x().data().iter().zip(truth.data()).enumerate() {
            if mask.is_observed(k) {
                assert_eq!(x.to_bits(), t.to_bits());
            }
        }
        assert!(state.mu() >= mu && state.mu() <= cfg.mu_max);
        mu = state.mu();
    }
}

#[test]
fn observed_entries_and_mu_schedule_hold_every_iteration() {
    let truth = synthetic(&[6, 5, 4, 3], &[2, 3, 2, 2], 7);
    let mask = ObservationMask::random_missing(truth.shape(), 0.6, 8).unwrap();
    let mut cfg = config(&[2, 3, 2, 2]);
    cfg.rho = 1.5;
    check_iterates(OlrfState::init(&truth, &mask, &cfg).unwrap(), &truth, &mask, &cfg);
    check_iterates(LlrfState::init(&truth, &mask, &cfg).unwrap(), &truth, &mask, &cfg);
}

#[test]
fn literal_max_rule_jumps_to_cap() {
    let truth = synthetic(&[4, 4, 4], &[2, 2, 2], 9);
    let mask = ObservationMask::random_missing(truth.shape(), 0.3, 9).unwrap();
    let mut cfg = config(&[2, 2, 2]);
    cfg.mu_rule = MuRule::LiteralMax;
    let mut state = OlrfState::init(&truth, &mask, &cfg).unwrap();
    state.step(&truth, &mask, &cfg).unwrap();
    assert_eq!(state.mu, cfg.mu_max);
}

#[test]
fn runs_are_deterministic() {
    let truth = synthetic(&[5, 5, 5], &[2, 2, 2], 10);
    let mask = ObservationMask::random_missing(truth.shape(), 0.5, 11).unwrap();
    let mut cfg = config(&[2, 2, 2]);
    cfg.max_iters = 40;
    for solver in [Solver::Olrf, Solver::Llrf] {
        let a = solver.solve(&truth, &mask, &cfg, None).unwrap();
        let b = solver.solve(&truth, &mask, &cfg, None).unwrap();
        assert_eq!(a.final_x, b.final_x);
        assert_eq!(a.rel_change_history, b.rel_change_history);
    }
}

#[test]
fn recovery_instance_converges_and_splitting_variables_agree() {
    let shape = [10, 10, 10, 10];
    let ranks = [4, 5, 4, 5];
    let truth = synthetic(&shape, &ranks, 1);
    let mask = ObservationMask::random_missing(&shape, 0.5, 2).unwrap();
    let cfg = config(&ranks);
    for solver in [Solver::Olrf, Solver::Llrf] {
        let report = solver.solve(&truth, &mask, &cfg, None).unwrap();
        let err = rse(&report.final_x, &truth, RseScope::Missing(&mask)).unwrap();
        assert!(err < 1e-2, "{solver}: rse {err:e}");
        assert!(report.converged, "{solver} did not reach tol");
        assert!(*report.rel_change_history.last().unwrap() < cfg.tol);
        assert!(report.consistency < 1e-3, "{solver}: consistency {:e}", report.consistency);
        // the estimate on missing entries is exactly the ring reconstruction
        let z = report.final_cores.reconstruct();
        for k in 0..z.len() {
            if !mask.is_observed(k) {
                assert_eq!(report.final_x.data()[k], z.data()[k]);
            }
        }
    }
}

#[test]
fn order_six_instance_latent_model_tracks_overlapped_model() {
    let shape = [4, 4, 4, 6, 6, 6];
    let ranks = [4; 6];
    let truth = synthetic(&shape, &ranks, 3);
    let mask = ObservationMask::random_missing(&shape, 0.7, 4).unwrap();
    let cfg = config(&ranks);
    let olrf = Solver::Olrf.solve(&truth, &mask, &cfg, None).unwrap();
    let llrf = Solver::Llrf.solve(&truth, &mask, &cfg, None).unwrap();
    let e_o = rse(&olrf.final_x, &truth, RseScope::Missing(&mask)).unwrap();
    let e_l = rse(&llrf.final_x, &truth, RseScope::Missing(&mask)).unwrap();
    assert!(e_l <= 2.0 * e_o, "llrf {e_l:e} vs olrf {e_o:e}");
}

/// A state whose estimate explodes geometrically.
struct Exploding {
    x: DenseTensor,
    cores: TrCores,
    iter: usize,
}

impl AdmmState for Exploding {
    fn x(&self) -> &DenseTensor {
        &self.x
    }
    fn cores(&self) -> &TrCores {
        &self.cores
    }
    fn mu(&self) -> f64 {
        1.0
    }
    fn iteration(&self) -> usize {
        self.iter
    }
    fn step(&mut self, _: &DenseTensor, _: &ObservationMask, _: &SolverConfig) -> trc_core::Result<()> {
        self.x = self.x.map(|v| v * 1e4 + 1.0)?;
        self.iter += 1;
        Ok(())
    }
    fn consistency(&self) -> f64 {
        0.0
    }
    fn into_parts(self) -> (DenseTensor, TrCores) {
        (self.x, self.cores)
    }
}

#[test]
fn divergence_guard_aborts() {
    let ranks = TrRank::uniform(2, 1).unwrap();
    let observed = DenseTensor::filled(&[2, 2], 1.0).unwrap();
    let mask = ObservationMask::full(&[2, 2]).unwrap();
    let state = Exploding {
        x: observed.clone(),
        cores: TrCores::zeros(&[2, 2], &ranks).unwrap(),
        iter: 0,
    };
    let cfg = SolverConfig::new(ranks);
    match run(state, &observed, &mask, &cfg, None) {
        Err(Error::Diverged { iteration, streak, .. }) => {
            assert_eq!(iteration, DIVERGENCE_STREAK);
            assert_eq!(streak, DIVERGENCE_STREAK);
        }
        other => panic!("expected divergence, got {other:?}"),
    }
}

#[test]
fn seventy_percent_missing_reaches_tolerance() {
    let shape = [10, 10, 10, 10];
    let ranks = [4, 5, 4, 5];
    let truth = synthetic(&shape, &ranks, 1);
    let mask = ObservationMask::random_missing(&shape, 0.7, 2).unwrap();
    let mut cfg = config(&ranks);
    cfg.max_iters = 1500;
    for solver in [Solver::Olrf, Solver::Llrf] {
        let report = solver.solve(&truth, &mask, &cfg, None).unwrap();
        assert!(report.converged, "{solver}: {} iterations", report.iterations);
        assert!(report.rel_change_history.iter().any(|&r| r < cfg.tol));
    }
}
