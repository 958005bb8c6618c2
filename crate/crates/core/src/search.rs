//! Random-walk optimization: coset screening, `|Δ4|` maximization over the
//! eight live parameters, and the 13-parameter local-unitary connection.
//!
//! Every restart or coset job draws from its own ChaCha stream
//! `(seed, job index)`, so results do not depend on thread count.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::f2linear::{BitMatrix4, CosetTable};
use crate::hyperdet::{abs_delta4_fast, MAX_ABS_DELTA4};
use crate::qstate::{ParamMatrix, StateVector};

/// Survivor count the screening run is expected to reproduce.
pub const EXPECTED_SURVIVORS: usize = 333;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub seed: u64,
    pub restarts: usize,
    pub max_steps: u64,
    pub initial_step: f64,
    pub shrink_factor: f64,
    pub patience: u64,
    /// The walk stops once the step falls below this.
    pub step_floor: f64,
    pub target: f64,
    pub tolerance: f64,
}

impl WalkConfig {
    /// Defaults for `|Δ4|` maximization.
    pub fn maximize() -> Self {
        Self {
            seed: 0,
            restarts: 32,
            max_steps: 200_000,
            initial_step: 0.5,
            shrink_factor: 0.5,
            patience: 200,
            step_floor: 1e-9,
            target: MAX_ABS_DELTA4,
            tolerance: 1e-9,
        }
    }

    /// Defaults for the local-unitary connection. The residual is an L1
    /// norm with a cone-shaped minimum, so the step must be allowed to fall
    /// well below the tolerance.
    pub fn connect() -> Self {
        Self {
            step_floor: 1e-12,
            target: 0.0,
            tolerance: 1e-10,
            ..Self::maximize()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return bad("initial_step must be positive");
        }
        if !(self.shrink_factor > 0.0 && self.shrink_factor < 1.0) {
            return bad("shrink_factor must lie in (0, 1)");
        }
        if self.restarts == 0 {
            return bad("restarts must be at least 1");
        }
        if self.patience == 0 {
            return bad("patience must be at least 1");
        }
        if self.step_floor < 0.0 || self.tolerance < 0.0 {
            return bad("step_floor and tolerance must be non-negative");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Maximize,
    Minimize,
}

/// Result of one walk.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkOutcome<const D: usize> {
    pub x: [f64; D],
    pub value: f64,
    pub steps: u64,
    pub evaluations: u64,
    pub converged: bool,
    /// Largest objective value seen at any evaluation, accepted or not.
    pub peak: f64,
}

/// Adaptive Gaussian random walk from `start`.
///
/// Each step perturbs every coordinate by `N(0, step²)` and keeps the move
/// only on strict improvement. After `patience` rejections in a row the
/// step shrinks by `shrink_factor`. `on_accept` sees every accepted value,
/// starting with `f(start)`.
pub fn random_walk<const D: usize>(
    f: impl Fn(&[f64; D]) -> f64,
    start: [f64; D],
    cfg: &WalkConfig,
    sense: Sense,
    rng: &mut ChaCha8Rng,
    mut on_accept: impl FnMut(f64),
) -> WalkOutcome<D> {
    let better = |a: f64, b: f64| match sense {
        Sense::Maximize => a > b,
        Sense::Minimize => a < b,
    };
    let done = |v: f64| match sense {
        Sense::Maximize => v >= cfg.target - cfg.tolerance,
        Sense::Minimize => v < cfg.target + cfg.tolerance,
    };
    let mut x = start;
    let mut value = f(&x);
    let mut peak = value;
    on_accept(value);
    let mut step = cfg.initial_step;
    let mut rejections = 0;
    let mut steps = 0;
    let mut evaluations = 1;
    while steps < cfg.max_steps && !done(value) {
        steps += 1;
        let cand: [f64; D] = std::array::from_fn(|i| {
            let z: f64 = StandardNormal.sample(rng);
            x[i] + step * z
        });
        let v = f(&cand);
        evaluations += 1;
        peak = peak.max(v);
        if better(v, value) {
            x = cand;
            value = v;
            rejections = 0;
            on_accept(value);
        } else {
            rejections += 1;
            if rejections >= cfg.patience {
                step *= cfg.shrink_factor;
                rejections = 0;
                if step < cfg.step_floor {
                    break;
                }
            }
        }
    }
    WalkOutcome {
        x,
        value,
        steps,
        evaluations,
        converged: done(value),
        peak,
    }
}

/// Private stream for job `index`.
pub fn job_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub params: ParamMatrix,
    /// Global phase, for connection runs.
    pub phase: Option<f64>,
    pub objective: f64,
    pub steps: u64,
    pub restart: usize,
    pub converged: bool,
    pub evaluations: u64,
    /// Largest `|Δ4|` seen at any evaluation (maximization only).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub peak: Option<f64>,
}

/// Uniform `α ∈ [0, 2π)`, `β ∈ [0, π)` per qubit.
pub fn random_live(rng: &mut ChaCha8Rng) -> [f64; 8] {
    std::array::from_fn(|n| {
        if n % 2 == 0 {
            rng.random_range(0.0..2.0 * PI)
        } else {
            rng.random_range(0.0..PI)
        }
    })
}

/// `|Δ4(X_A |P⟩)|` for the live parameters of `P`.
pub fn delta4_objective(a: &BitMatrix4, live: &[f64; 8]) -> f64 {
    abs_delta4_fast(&ParamMatrix::from_live(live).state().apply_linear(a))
}

fn pick_best(results: Vec<SearchResult>, sense: Sense) -> SearchResult {
    let mut best: Option<SearchResult> = None;
    for r in results {
        let take = match &best {
            None => true,
            Some(b) => match sense {
                Sense::Maximize => r.objective > b.objective,
                Sense::Minimize => r.objective < b.objective,
            },
        };
        if take {
            best = Some(r);
        }
    }
    best.expect("at least one restart")
}

/// One result per restart, in restart order.
pub fn maximize_delta4_restarts(
    a: &BitMatrix4,
    cfg: &WalkConfig,
    start: Option<&ParamMatrix>,
) -> Result<Vec<SearchResult>> {
    cfg.validate()?;
    if !a.is_invertible() {
        return Err(Error::Singular);
    }
    let results = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = job_rng(cfg.seed, r as u64);
            let x0 = match (r, start) {
                (0, Some(p)) => p.live(),
                _ => random_live(&mut rng),
            };
            let out = random_walk(|x| delta4_objective(a, x), x0, cfg, Sense::Maximize, &mut rng, |_| {});
            SearchResult {
                params: ParamMatrix::from_live(&out.x),
                phase: None,
                objective: out.value,
                steps: out.steps,
                restart: r,
                converged: out.converged,
                evaluations: out.evaluations,
                peak: Some(out.peak),
            }
        })
        .collect();
    Ok(results)
}

/// Best `|Δ4(X_A|P⟩)|` over all restarts; ties go to the lowest restart.
pub fn maximize_delta4(a: &BitMatrix4, cfg: &WalkConfig) -> Result<SearchResult> {
    maximize_delta4_from(a, cfg, None)
}

/// As [`maximize_delta4`], with restart 0 starting at `start`.
pub fn maximize_delta4_from(a: &BitMatrix4, cfg: &WalkConfig, start: Option<&ParamMatrix>) -> Result<SearchResult> {
    let all = maximize_delta4_restarts(a, cfg, start)?;
    let peak = all.iter().filter_map(|r| r.peak).fold(0.0, f64::max);
    let mut best = pick_best(all, Sense::Maximize);
    best.peak = Some(peak);
    Ok(best)
}

/// Refines a maximizer with a short walk of small steps that never stops
/// early, so the parameters settle as close to the optimum as double
/// precision allows.
pub fn polish(a: &BitMatrix4, p: &ParamMatrix, seed: u64) -> Result<SearchResult> {
    let cfg = WalkConfig {
        seed,
        restarts: 1,
        max_steps: 200_000,
        initial_step: 1e-3,
        shrink_factor: 0.5,
        patience: 200,
        step_floor: 1e-12,
        target: f64::INFINITY,
        tolerance: 0.0,
    };
    maximize_delta4_from(a, &cfg, Some(p))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScreenConfig {
    pub seed: u64,
    pub samples: usize,
    pub threshold: f64,
}

impl Default for ScreenConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            samples: 200,
            threshold: 1e-12,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScreenReport {
    pub config: ScreenConfig,
    /// Largest sampled `|Δ4|` per coset, by coset index.
    pub peaks: Vec<f64>,
    pub survivors: Vec<usize>,
}

impl ScreenReport {
    pub fn is_survivor(&self, index: usize) -> bool {
        self.peaks[index] > self.config.threshold
    }

    /// Cosets whose peak lies closest to the threshold (in log scale).
    pub fn nearest_to_threshold(&self, n: usize) -> Vec<(usize, f64)> {
        let t = self.config.threshold.log10();
        let mut v: Vec<(usize, f64)> = self.peaks.iter().copied().enumerate().collect();
        let dist = |p: f64| if p > 0.0 { (p.log10() - t).abs() } else { f64::INFINITY };
        v.sort_by(|a, b| dist(a.1).total_cmp(&dist(b.1)).then(a.0.cmp(&b.0)));
        v.truncate(n);
        v
    }

    /// Fails with the borderline cosets listed unless there are `expected`
    /// survivors.
    pub fn check_expected(&self, expected: usize) -> Result<()> {
        if self.survivors.len() == expected {
            Ok(())
        } else {
            Err(Error::SurvivorCount {
                found: self.survivors.len(),
                expected,
                near: self.nearest_to_threshold(10),
            })
        }
    }

    pub fn apply_to(&self, table: &mut CosetTable) {
        for i in 0..self.peaks.len() {
            table.set_survivor(i, self.is_survivor(i));
        }
    }
}

/// Samples `|Δ4(X_A|P⟩)|` at random `P` for each coset representative.
pub fn screen_cosets(table: &CosetTable, cfg: &ScreenConfig) -> ScreenReport {
    let peaks: Vec<f64> = table
        .records()
        .par_iter()
        .map(|rec| {
            let mut rng = job_rng(cfg.seed, rec.index as u64);
            (0..cfg.samples)
                .map(|_| delta4_objective(&rec.matrix, &random_live(&mut rng)))
                .fold(0.0, f64::max)
        })
        .collect();
    let survivors = (0..peaks.len()).filter(|&i| peaks[i] > cfg.threshold).collect();
    ScreenReport {
        config: cfg.clone(),
        peaks,
        survivors,
    }
}

/// Marks cosets whose best objective is within `tol` of the maximum.
pub fn flag_maximizers(table: &mut CosetTable, results: &[(usize, SearchResult)], tol: f64) {
    for (index, r) in results {
        table.set_maximizer(*index, r.objective >= MAX_ABS_DELTA4 - tol);
    }
}

/// `Σ_x |target_x − e^{iφ}(U(P) source)_x|`.
pub fn lu_residual(source: &StateVector, target: &StateVector, p: &ParamMatrix, phi: f64) -> f64 {
    let moved = p.operator().apply(source).scale(Complex64::from_polar(1.0, phi));
    target.l1_distance(&moved)
}

fn split13(x: &[f64; 13]) -> (ParamMatrix, f64) {
    let mut flat = [0.0; 12];
    flat.copy_from_slice(&x[..12]);
    (ParamMatrix::from_flat(&flat), x[12])
}

/// Searches `P`, `φ` with `target = e^{iφ} U(P) source`.
pub fn lu_connect(source: &StateVector, target: &StateVector, cfg: &WalkConfig) -> Result<SearchResult> {
    lu_connect_from(source, target, cfg, None)
}

/// As [`lu_connect`]; restart 0 starts at `start`, or at `P = 0, φ = 0`.
pub fn lu_connect_from(
    source: &StateVector,
    target: &StateVector,
    cfg: &WalkConfig,
    start: Option<(&ParamMatrix, f64)>,
) -> Result<SearchResult> {
    cfg.validate()?;
    source.check_normalized()?;
    target.check_normalized()?;
    let f = |x: &[f64; 13]| {
        let (p, phi) = split13(x);
        lu_residual(source, target, &p, phi)
    };
    let results = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = job_rng(cfg.seed, r as u64);
            let x0: [f64; 13] = if r == 0 {
                let mut x = [0.0; 13];
                if let Some((p, phi)) = start {
                    x[..12].copy_from_slice(&p.flat());
                    x[12] = phi;
                }
                x
            } else {
                std::array::from_fn(|_| rng.random_range(-PI..PI))
            };
            let out = random_walk(f, x0, cfg, Sense::Minimize, &mut rng, |_| {});
            let (params, phi) = split13(&out.x);
            SearchResult {
                params,
                phase: Some(phi),
                objective: out.value,
                steps: out.steps,
                restart: r,
                converged: out.converged,
                evaluations: out.evaluations,
                peak: None,
            }
        })
        .collect();
    Ok(pick_best(results, Sense::Minimize))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn quick() -> WalkConfig {
        WalkConfig {
            restarts: 4,
            max_steps: 3000,
            ..WalkConfig::maximize()
        }
    }

    #[test]
    fn config_validation() {
        assert!(WalkConfig::maximize().validate().is_ok());
        for bad in [
            WalkConfig { initial_step: 0.0, ..WalkConfig::maximize() },
            WalkConfig { shrink_factor: 1.0, ..WalkConfig::maximize() },
            WalkConfig { shrink_factor: 0.0, ..WalkConfig::maximize() },
            WalkConfig { restarts: 0, ..WalkConfig::maximize() },
        ] {
            assert!(matches!(bad.validate(), Err(Error::InvalidConfig(_))));
        }
    }

    #[test]
    fn singular_matrix_rejected() {
        assert!(matches!(maximize_delta4(&BitMatrix4::zero(), &quick()), Err(Error::Singular)));
    }

    #[test]
    fn start_at_p_max_is_immediately_optimal() {
        let (_, a2) = catalog::build_m(0, 1, 2).unwrap();
        let r = maximize_delta4_from(&a2, &WalkConfig { restarts: 1, ..quick() }, Some(&catalog::p_max())).unwrap();
        assert!((r.objective - MAX_ABS_DELTA4).abs() < 1e-12);
        assert_eq!(r.steps, 0);
        assert!(r.converged);
    }

    #[test]
    fn identity_coset_stays_at_zero() {
        let r = maximize_delta4(&BitMatrix4::identity(), &WalkConfig { max_steps: 500, ..quick() }).unwrap();
        assert!(r.objective < 1e-15);
        assert!(!r.converged);
    }

    #[test]
    fn deterministic_given_seed() {
        let (_, a2) = catalog::build_m(0, 1, 2).unwrap();
        let cfg = WalkConfig { seed: 7, ..quick() };
        let a = maximize_delta4(&a2, &cfg).unwrap();
        let b = maximize_delta4(&a2, &cfg).unwrap();
        assert_eq!(a, b);
        let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = serial.install(|| maximize_delta4(&a2, &cfg).unwrap());
        assert_eq!(a, c);
    }

    #[test]
    fn result_is_reproducible() {
        let (_, a2) = catalog::build_m(0, 1, 2).unwrap();
        let r = maximize_delta4(&a2, &quick()).unwrap();
        assert!((delta4_objective(&a2, &r.params.live()) - r.objective).abs() <= 1e-14);
    }

    #[test]
    fn accepted_values_are_monotone() {
        let (_, a2) = catalog::build_m(0, 1, 2).unwrap();
        let cfg = quick();
        let mut rng = job_rng(3, 0);
        let x0 = random_live(&mut rng);
        let mut seen = Vec::new();
        random_walk(|x| delta4_objective(&a2, x), x0, &cfg, Sense::Maximize, &mut rng, |v| seen.push(v));
        assert!(seen.len() > 1);
        assert!(seen.windows(2).all(|w| w[1] >= w[0]));

        let src = catalog::psi_max();
        let dst = catalog::l_state();
        let mut seen = Vec::new();
        let f = |x: &[f64; 13]| {
            let (p, phi) = split13(x);
            lu_residual(&src, &dst, &p, phi)
        };
        random_walk(f, [0.0; 13], &WalkConfig::connect(), Sense::Minimize, &mut rng, |v| seen.push(v));
        assert!(seen.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn connect_identity_is_trivial() {
        let s = catalog::psi_max();
        let r = lu_connect(&s, &s, &WalkConfig { restarts: 1, ..WalkConfig::connect() }).unwrap();
        assert_eq!(r.objective, 0.0);
        assert!(r.converged);
        assert_eq!(r.steps, 0);
    }

    #[test]
    fn catalog_lu_parameters_have_small_residual() {
        let psi = catalog::psi_max();
        let r = lu_residual(&psi, &catalog::psi_max_prime(), &catalog::p_psi_to_psi_prime(), catalog::PHI_PSI_TO_PSI_PRIME);
        assert!(r < 1e-12, "{r}");
        let r = lu_residual(&psi, &catalog::l_state(), &catalog::p_psi_to_l(), catalog::PHI_PSI_TO_L);
        assert!(r < 1e-12, "{r}");
    }

    #[test]
    fn connect_refines_a_perturbed_start() {
        let psi = catalog::psi_max();
        let target = catalog::l_state();
        let mut flat = catalog::p_psi_to_l().flat();
        for (n, x) in flat.iter_mut().enumerate() {
            *x += 1e-3 * ((n as f64) - 5.5);
        }
        let start = ParamMatrix::from_flat(&flat);
        let cfg = WalkConfig {
            restarts: 1,
            initial_step: 1e-3,
            ..WalkConfig::connect()
        };
        let r = lu_connect_from(&psi, &target, &cfg, Some((&start, catalog::PHI_PSI_TO_L + 1e-3))).unwrap();
        assert!(r.converged, "{}", r.objective);
        assert!((lu_residual(&psi, &target, &r.params, r.phase.unwrap()) - r.objective).abs() <= 1e-14);
    }

    #[test]
    fn unnormalized_connect_input_rejected() {
        let s = catalog::psi_max().scale(Complex64::new(2.0, 0.0));
        assert!(matches!(
            lu_connect(&s, &catalog::psi_max(), &WalkConfig::connect()),
            Err(Error::NotNormalized(_))
        ));
    }

    #[test]
    fn survivor_count_error_lists_cosets() {
        let report = ScreenReport {
            config: ScreenConfig::default(),
            peaks: vec![0.0, 1e-13, 2e-12, 1e-7],
            survivors: vec![2, 3],
        };
        match report.check_expected(3) {
            Err(Error::SurvivorCount { found, expected, near }) => {
                assert_eq!((found, expected), (2, 3));
                assert_eq!(near[0].0, 2);
                assert_eq!(near[1].0, 1);
            }
            other => panic!("{other:?}"),
        }
        assert!(report.check_expected(2).is_ok());
    }
}
