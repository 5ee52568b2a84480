use std::fmt::{self, Write as _};

use super::{AttackStrategy, ExactFraction, RateEstimate};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exhaustive,
    MonteCarlo,
    /// Honest runs; the bound is irrelevant and the rate must be 1.
    Completeness,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Exhaustive => "exhaustive",
            Mode::MonteCarlo => "monte-carlo",
            Mode::Completeness => "completeness",
        }
    }
}

/// One row of simulation output.
#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub strategy: AttackStrategy,
    pub mode: Mode,
    pub k: u8,
    pub trials: u64,
    pub successes: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub bound: f64,
    pub pass: bool,
}

fn bound(k: u8) -> f64 {
    0.5f64.powi(k as i32)
}

impl SimReport {
    /// Attacks pass iff the exact fraction is at most `2^-k`.
    pub fn exhaustive(strategy: AttackStrategy, k: u8, exact: ExactFraction) -> Self {
        let rate = exact.as_f64();
        let (mode, pass) = if strategy.kind.is_attack() {
            (Mode::Exhaustive, exact.within_bound(k))
        } else {
            (Mode::Completeness, exact.successes == exact.total)
        };
        SimReport {
            strategy,
            mode,
            k,
            trials: exact.total,
            successes: exact.successes,
            rate,
            ci_low: rate,
            ci_high: rate,
            bound: bound(k),
            pass,
        }
    }

    /// Attacks pass iff the bound is not below the interval; honest runs
    /// pass iff every session succeeded.
    pub fn monte_carlo(strategy: AttackStrategy, k: u8, est: RateEstimate) -> Self {
        let (mode, pass) = if strategy.kind.is_attack() {
            (Mode::MonteCarlo, est.ci_low <= bound(k))
        } else {
            (Mode::Completeness, est.successes == est.trials)
        };
        SimReport {
            strategy,
            mode,
            k,
            trials: est.trials,
            successes: est.successes,
            rate: est.rate,
            ci_low: est.ci_low,
            ci_high: est.ci_high,
            bound: bound(k),
            pass,
        }
    }

    pub fn verdict(&self) -> &'static str {
        if self.pass {
            "pass"
        } else {
            "fail"
        }
    }

    pub fn table_header() -> String {
        format!(
            "{:<34} {:<12} {:>3} {:>9} {:>9} {:>12} {:>12} {:>12} {:>12} {:>6}",
            "strategy",
            "mode",
            "k",
            "trials",
            "successes",
            "rate",
            "ci_low",
            "ci_high",
            "bound",
            "result"
        )
    }

    pub fn table_row(&self) -> String {
        format!(
            "{:<34} {:<12} {:>3} {:>9} {:>9} {:>12.6e} {:>12.6e} {:>12.6e} {:>12.6e} {:>6}",
            self.strategy.to_string(),
            self.mode.name(),
            self.k,
            self.trials,
            self.successes,
            self.rate,
            self.ci_low,
            self.ci_high,
            self.bound,
            self.verdict()
        )
    }

    /// Machine-readable form, one `key=value` per line.
    pub fn key_values(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "strategy={}", self.strategy);
        let _ = writeln!(out, "mode={}", self.mode.name());
        let _ = writeln!(out, "k={}", self.k);
        let _ = writeln!(out, "trials={}", self.trials);
        let _ = writeln!(out, "successes={}", self.successes);
        let _ = writeln!(out, "rate={}", self.rate);
        let _ = writeln!(out, "ci_low={}", self.ci_low);
        let _ = writeln!(out, "ci_high={}", self.ci_high);
        let _ = writeln!(out, "bound={}", self.bound);
        let _ = writeln!(out, "result={}", self.verdict());
        out
    }
}

impl fmt::Display for SimReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", Self::table_header())?;
        writeln!(f, "{}", self.table_row())?;
        writeln!(f)?;
        f.write_str(&self.key_values())
    }
}
