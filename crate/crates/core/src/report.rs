//! Run configuration and result reports.

use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;

use crate::automaton::{build, check_k, BuildError, StateGraph};
use crate::options::Features;
use crate::persist::encode;
use crate::spectral::{optimize, PowerParams};

/// Lower bound on the connective constant; no valid run may report less.
pub const MU_LOWER_BOUND: f64 = 2.62002;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunConfig {
    pub k: u32,
    pub features: Features,
    pub tol: f64,
    pub max_iter: usize,
    pub rounds: usize,
}

impl RunConfig {
    pub fn new(k: u32, features: Features) -> Self {
        let p = PowerParams::default();
        RunConfig {
            k,
            features,
            tol: p.tol,
            max_iter: p.max_iter,
            rounds: 50,
        }
    }

    pub fn params(&self) -> PowerParams {
        PowerParams {
            tol: self.tol,
            max_iter: self.max_iter,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        check_k(self.k).map_err(|e| e.to_string())?;
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(format!("tolerance must be positive, got {}", self.tol));
        }
        if self.rounds == 0 || self.max_iter == 0 {
            return Err("rounds and max-iter must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub config: RunConfig,
    pub label: String,
    pub states: usize,
    pub transitions: usize,
    /// Size in bytes of the serialized graph.
    pub file_size: u64,
    /// Certified upper bound.
    pub bound: f64,
    pub lambda_lo: f64,
    pub converged: bool,
    pub fixed_point: bool,
    pub rounds_used: usize,
    pub iterations: usize,
    pub build_seconds: f64,
    pub wall_seconds: f64,
    /// Certified bound after each round.
    pub history: Vec<f64>,
}

impl Report {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "k                {}", self.config.k);
        let _ = writeln!(s, "features         {}", self.label);
        let _ = writeln!(s, "states           {}", self.states);
        let _ = writeln!(s, "transitions      {}", self.transitions);
        let _ = writeln!(s, "graph file size  {} bytes", self.file_size);
        let _ = writeln!(s, "upper bound      {:.9}", self.bound);
        let _ = writeln!(s, "lower ratio      {:.9}", self.lambda_lo);
        let _ = writeln!(s, "converged        {}", self.converged);
        let _ = writeln!(
            s,
            "rounds           {} (fixed point: {})",
            self.rounds_used, self.fixed_point
        );
        let _ = writeln!(
            s,
            "wall time        {:.2} s (build {:.2} s)",
            self.wall_seconds, self.build_seconds
        );
        s
    }
}

/// Solves an already built graph.
pub fn solve_graph(
    g: &StateGraph,
    config: &RunConfig,
    build_seconds: f64,
    started: Instant,
) -> Report {
    let result = optimize(g, config.params(), config.rounds);
    Report {
        config: RunConfig {
            k: g.k,
            features: g.features,
            ..*config
        },
        label: g.features.label(),
        states: g.len(),
        transitions: g.transitions(),
        file_size: encode(g).len() as u64,
        bound: result.best.lambda_hi,
        lambda_lo: result.best.lambda_lo,
        converged: result.best.converged,
        fixed_point: result.fixed_point,
        rounds_used: result.history.len(),
        iterations: result.best.iterations,
        build_seconds,
        wall_seconds: started.elapsed().as_secs_f64(),
        history: result.history,
    }
}

/// Builds and solves.
pub fn run(config: &RunConfig) -> Result<Report, BuildError> {
    let started = Instant::now();
    let g = build(config.k, &config.features)?;
    let build_seconds = started.elapsed().as_secs_f64();
    Ok(solve_graph(&g, config, build_seconds, started))
}

/// The allowance and two-pass combinations compared in ablation runs, from
/// the baseline up to everything on.
pub fn ablation_features() -> Vec<Features> {
    let b = Features::baseline();
    vec![
        b,
        Features {
            line_like: true,
            ..b
        },
        Features {
            lacking_simpl: true,
            ..b
        },
        Features {
            line_like: true,
            lacking_simpl: true,
            ..b
        },
        Features {
            lacking_simpl: true,
            two_pass: true,
            ..b
        },
        Features::all_on(),
    ]
}

pub fn ablation_csv(reports: &[Report]) -> String {
    let mut s = String::from(
        "label,line_like,lacking_simpl,two_pass,staged_children,k,states,bound,seconds\n",
    );
    for r in reports {
        let f = r.config.features;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{:.9},{:.2}",
            r.label,
            u8::from(f.line_like),
            u8::from(f.lacking_simpl),
            u8::from(f.two_pass),
            u8::from(f.staged_children),
            r.config.k,
            r.states,
            r.bound,
            r.wall_seconds
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_small() {
        let r = run(&RunConfig::new(4, Features::erasure_only())).unwrap();
        assert_eq!(r.states, 3);
        assert!((r.bound - 2.8312).abs() < 5e-4);
        assert!(r.bound >= r.lambda_lo);
        assert!(r.to_text().contains("upper bound      2.8311"));
    }

    #[test]
    fn validation() {
        assert!(RunConfig::new(7, Features::all_on()).validate().is_err());
        let mut c = RunConfig::new(8, Features::all_on());
        assert!(c.validate().is_ok());
        c.tol = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn csv_has_one_row_per_report() {
        let reports: Vec<Report> = ablation_features()
            .into_iter()
            .map(|f| run(&RunConfig::new(6, f)).unwrap())
            .collect();
        let csv = ablation_csv(&reports);
        assert_eq!(csv.lines().count(), 7);
        assert!(csv
            .lines()
            .nth(1)
            .unwrap()
            .starts_with("baseline,0,0,0,0,6,"));
    }
}
