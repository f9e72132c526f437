//! The reflecting random walk on levels 1..4 and its two-symbol event coding.
//!
//! `X_{n+1} = X_n + Y_n` with `Y_n = +-1` equally likely at the interior levels
//! 2 and 3, and forced moves `1 -> 2`, `4 -> 3` at the boundary. Levels are
//! state indices `0..4` internally.
//!
//! The event coding works over `S = {s1, s2}` (levels 2 and 3). A step between
//! the interior levels is the event `f12` or `f21`; an excursion `2 -> 1 -> 2`
//! is the single event `f11` and `3 -> 4 -> 3` is `f22`. In symbols the
//! boundary visit simply disappears, so every event probability is 1/2.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::io::Provenance;
use crate::simulator::{simulate, Realization, SimulationError};
use crate::state_space::StateSpace;
use crate::transition::TransitionModel;

pub const LEVELS: [i64; 4] = [1, 2, 3, 4];

/// Index of the default starting level 2.
pub const DEFAULT_INITIAL: usize = 1;

const LOWER: usize = 0;
const UPPER: usize = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WalkError {
    #[error("invalid walk path at step {step}: {reason}")]
    InvalidWalkPath { step: usize, reason: String },
    #[error("path of length {len} is too short for {needed} breakpoints")]
    PathTooShort { len: usize, needed: usize },
    #[error("invalid plot configuration: {0}")]
    InvalidConfig(String),
    #[error("event symbol {0} is not s1 or s2")]
    InvalidSymbol(usize),
    #[error(transparent)]
    Simulation(#[from] SimulationError),
}

/// The raw four-level chain plus its event coding.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkChain {
    pub raw_model: TransitionModel,
    /// Levels labelled `1..4`, at distance `|a - b|`.
    pub raw_space: StateSpace,
    pub event_model: TransitionModel,
    /// `s1`, `s2` under the discrete metric.
    pub event_space: StateSpace,
}

/// Builds the raw walk and derives the event-coded chain from it: the
/// probability of `s_i -> s_j` is the direct move plus any excursion through a
/// boundary level that returns to `s_j`.
pub fn build_walk_chain() -> WalkChain {
    let raw_rows = vec![
        vec![0.0, 1.0, 0.0, 0.0],
        vec![0.5, 0.0, 0.5, 0.0],
        vec![0.0, 0.5, 0.0, 0.5],
        vec![0.0, 0.0, 1.0, 0.0],
    ];
    let raw_model = TransitionModel::validate_stochastic(raw_rows, 1, false)
        .expect("walk rows are stochastic");
    let labels: Vec<String> = LEVELS.iter().map(|l| l.to_string()).collect();
    let table = LEVELS
        .iter()
        .map(|a| LEVELS.iter().map(|b| (a - b).abs() as f64).collect())
        .collect();
    let raw_space = StateSpace::with_labels(labels, table).expect("level distance is a metric");

    let interior = [1usize, 2];
    let event_rows = interior
        .iter()
        .map(|&from| {
            interior
                .iter()
                .map(|&to| {
                    let direct = raw_model.row(from)[to];
                    let excursion: f64 = [LOWER, UPPER]
                        .iter()
                        .map(|&b| raw_model.row(from)[b] * raw_model.row(b)[to])
                        .sum();
                    direct + excursion
                })
                .collect()
        })
        .collect();
    let event_model = TransitionModel::validate_stochastic(event_rows, 1, true)
        .expect("event coding is stochastic");
    let event_space = StateSpace::discrete_with_labels(vec!["s1".into(), "s2".into()])
        .expect("two labels");

    WalkChain { raw_model, raw_space, event_model, event_space }
}

fn check_walk(raw: &[usize]) -> Result<(), WalkError> {
    let invalid = |step: usize, reason: String| Err(WalkError::InvalidWalkPath { step, reason });
    match raw.first() {
        None => return invalid(0, "empty path".into()),
        Some(&s) if s != 1 && s != 2 => {
            return invalid(0, format!("must start at level 2 or 3, not {}", level_name(s)))
        }
        _ => {}
    }
    for (step, pair) in raw.windows(2).enumerate() {
        let (a, b) = (pair[0], pair[1]);
        if b > UPPER {
            return invalid(step + 1, format!("state index {b} is not a level"));
        }
        if a.abs_diff(b) != 1 {
            return invalid(
                step + 1,
                format!("move {} -> {} is not a unit step", level_name(a), level_name(b)),
            );
        }
    }
    Ok(())
}

fn level_name(index: usize) -> String {
    LEVELS.get(index).map_or_else(|| format!("#{index}"), |l| l.to_string())
}

/// Maps a raw level path to the event-coded symbol sequence (`0` = s1,
/// `1` = s2). Boundary visits are absorbed into their excursion event; a
/// trailing boundary visit is an incomplete event and is dropped.
pub fn encode_walk_to_events(raw: &[usize]) -> Result<Vec<usize>, WalkError> {
    check_walk(raw)?;
    Ok(raw
        .iter()
        .filter(|&&level| level != LOWER && level != UPPER)
        .map(|&level| level - 1)
        .collect())
}

/// Inverse of [`encode_walk_to_events`]: repeats of s1 become an excursion to
/// level 1, repeats of s2 an excursion to level 4.
pub fn decode_events_to_walk(symbols: &[usize]) -> Result<Vec<usize>, WalkError> {
    if let Some(&bad) = symbols.iter().find(|&&s| s > 1) {
        return Err(WalkError::InvalidSymbol(bad));
    }
    let mut raw = Vec::with_capacity(symbols.len() * 2);
    if let Some(&first) = symbols.first() {
        raw.push(first + 1);
    }
    for pair in symbols.windows(2) {
        if pair[0] == pair[1] {
            raw.push(if pair[0] == 0 { LOWER } else { UPPER });
        }
        raw.push(pair[1] + 1);
    }
    Ok(raw)
}

/// Simulates the raw walk from `initial` (a level index).
pub fn simulate_walk(length: usize, initial: usize, seed: u64) -> Result<Realization, WalkError> {
    let chain = build_walk_chain();
    Ok(simulate(&chain.raw_model, &[initial], length, seed)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub levels: [i64; 4],
    pub horizon: f64,
    pub dt: f64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        Self { levels: LEVELS, horizon: 60.0, dt: 0.1 }
    }
}

impl WalkConfig {
    /// Number of unit intervals `[n dt, (n+1) dt)` covering `[0, horizon)`.
    pub fn intervals(&self) -> Result<usize, WalkError> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(WalkError::InvalidConfig(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(WalkError::InvalidConfig(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        let ratio = self.horizon / self.dt;
        let rounded = ratio.round();
        if (ratio - rounded).abs() > 1e-9 * rounded.max(1.0) || rounded < 1.0 {
            return Err(WalkError::InvalidConfig(format!(
                "horizon {} is not a multiple of dt {}",
                self.horizon, self.dt
            )));
        }
        Ok(rounded as usize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Breakpoint {
    pub t: f64,
    pub value: i64,
}

/// A vertical jump of the step function at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Connector {
    pub t: f64,
    pub from: i64,
    pub to: i64,
}

/// `phi(t) = X_n` for `t` in `[n dt, (n+1) dt)`, `0 <= t <= horizon`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepTrace {
    pub dt: f64,
    pub horizon: f64,
    pub intervals: usize,
    /// `(n dt, X_n)` for `n = 0..=intervals`.
    pub breakpoints: Vec<Breakpoint>,
}

/// Builds the step function of the first `intervals + 1` levels of `path`.
pub fn step_function_export(path: &[usize], config: &WalkConfig) -> Result<StepTrace, WalkError> {
    let intervals = config.intervals()?;
    let needed = intervals + 1;
    if path.len() < needed {
        return Err(WalkError::PathTooShort { len: path.len(), needed });
    }
    let mut breakpoints = Vec::with_capacity(needed);
    for (n, &level) in path[..needed].iter().enumerate() {
        let value = *config.levels.get(level).ok_or_else(|| WalkError::InvalidWalkPath {
            step: n,
            reason: format!("state index {level} is not a level"),
        })?;
        breakpoints.push(Breakpoint { t: tidy(n as f64 * config.dt), value });
    }
    Ok(StepTrace { dt: config.dt, horizon: config.horizon, intervals, breakpoints })
}

/// Rounds away binary noise such as `0.30000000000000004`.
fn tidy(t: f64) -> f64 {
    (t * 1e9).round() / 1e9
}

impl StepTrace {
    /// `phi(t)`, or `None` outside `[0, horizon]`.
    pub fn value_at(&self, t: f64) -> Option<i64> {
        if !(0.0..=self.horizon).contains(&t) {
            return None;
        }
        let n = ((t / self.dt) + 1e-9).floor() as usize;
        self.breakpoints.get(n.min(self.intervals)).map(|b| b.value)
    }

    /// The vertical segments joining consecutive pieces where the value jumps.
    pub fn connectors(&self) -> Vec<Connector> {
        self.breakpoints
            .windows(2)
            .filter(|w| w[0].value != w[1].value)
            .map(|w| Connector { t: w[1].t, from: w[0].value, to: w[1].value })
            .collect()
    }

    /// CSV with header `t,value`, preceded by `#` provenance comments.
    pub fn to_csv(&self, provenance: &Provenance) -> String {
        let mut out = provenance.comment_lines("#");
        out.push_str("t,value\n");
        for b in &self.breakpoints {
            let _ = writeln!(out, "{},{}", b.t, b.value);
        }
        out
    }

    /// Standalone SVG of the step function, optionally with vertical connectors.
    pub fn to_svg(&self, connectors: bool, provenance: &Provenance) -> String {
        const WIDTH: f64 = 960.0;
        const HEIGHT: f64 = 320.0;
        const LEFT: f64 = 50.0;
        const RIGHT: f64 = 20.0;
        const TOP: f64 = 20.0;
        const BOTTOM: f64 = 40.0;

        let lo = self.breakpoints.iter().map(|b| b.value).min().unwrap_or(0).min(1);
        let hi = self.breakpoints.iter().map(|b| b.value).max().unwrap_or(1).max(lo + 1);
        let plot_w = WIDTH - LEFT - RIGHT;
        let plot_h = HEIGHT - TOP - BOTTOM;
        let x = |t: f64| LEFT + t / self.horizon * plot_w;
        let y = |v: i64| TOP + (hi - v) as f64 / (hi - lo) as f64 * plot_h;

        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
        );
        let _ = writeln!(svg, "<!--{}-->", provenance.comment_lines("").trim_end().replace('\n', "; "));
        let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<g stroke="black" stroke-width="1"><line x1="{LEFT}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/><line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{:.2}"/></g>"#,
            TOP + plot_h,
            LEFT + plot_w,
            TOP + plot_h,
            TOP + plot_h
        );
        svg.push_str(r#"<g font-family="sans-serif" font-size="12" fill="black">"#);
        svg.push('\n');
        for v in lo..=hi {
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{v}</text>"#,
                LEFT - 6.0,
                y(v) + 4.0
            );
        }
        let ticks = (self.horizon / 10.0).floor() as usize;
        for k in 0..=ticks {
            let t = k as f64 * 10.0;
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{t}</text>"#,
                x(t),
                TOP + plot_h + 18.0
            );
        }
        svg.push_str("</g>\n");

        svg.push_str(r#"<g stroke="steelblue" stroke-width="1.5" fill="none">"#);
        svg.push('\n');
        let mut d = String::new();
        for (n, b) in self.breakpoints.iter().take(self.intervals).enumerate() {
            let end = if n + 1 == self.intervals { self.horizon } else { self.breakpoints[n + 1].t };
            let _ = write!(d, "M{:.2} {:.2}H{:.2}", x(b.t), y(b.value), x(end));
        }
        let _ = writeln!(svg, r#"<path d="{d}"/>"#);
        if connectors {
            let mut v = String::new();
            for c in self.connectors().iter().filter(|c| c.t < self.horizon) {
                let _ = write!(v, "M{:.2} {:.2}V{:.2}", x(c.t), y(c.from), y(c.to));
            }
            let _ = writeln!(svg, r#"<path d="{v}" stroke-width="0.75"/>"#);
        }
        svg.push_str("</g>\n</svg>\n");
        svg
    }
}
