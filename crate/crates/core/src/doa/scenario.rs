use std::f64::consts::TAU;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// A source that is active on [t_on, t_off) with direction ω(t) following a
/// piecewise-linear path.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalEvent {
    pub t_on: f64,
    pub t_off: f64,
    /// 10·log10(|C_0|²/σ²)
    pub snr_db: f64,
    /// (time, ω) breakpoints sorted by time; ω is held constant outside.
    pub omega_path: Vec<(f64, f64)>,
}

impl SignalEvent {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_on < self.t_off) {
            return Err(Error::InvalidParameter(format!(
                "signal needs t_on < t_off (got {} and {})",
                self.t_on, self.t_off
            )));
        }
        if !self.snr_db.is_finite() {
            return Err(Error::InvalidParameter("snr_db must be finite".into()));
        }
        if self.omega_path.is_empty() {
            return Err(Error::InvalidParameter("omega_path needs at least one breakpoint".into()));
        }
        for &(t, w) in &self.omega_path {
            if !t.is_finite() || !(0.0..TAU).contains(&w) {
                return Err(Error::InvalidParameter(format!("omega breakpoint {t}:{w} must have omega in [0, 2pi)")));
            }
        }
        if self.omega_path.windows(2).any(|p| p[0].0 >= p[1].0) {
            return Err(Error::InvalidParameter("omega_path times must be strictly increasing".into()));
        }
        Ok(())
    }

    pub fn is_active(&self, t: f64) -> bool {
        self.t_on <= t && t < self.t_off
    }

    /// |C_0|² for noise power `sigma2`.
    pub fn power(&self, sigma2: f64) -> f64 {
        sigma2 * 10f64.powf(self.snr_db / 10.0)
    }

    /// ω(t), linear between breakpoints.
    pub fn omega(&self, t: f64) -> f64 {
        let path = &self.omega_path;
        if t <= path[0].0 {
            return path[0].1;
        }
        for seg in path.windows(2) {
            let ((t0, w0), (t1, w1)) = (seg[0], seg[1]);
            if t <= t1 {
                return w0 + (w1 - w0) * (t - t0) / (t1 - t0);
            }
        }
        path[path.len() - 1].1
    }
}

/// Simulation setup. `window` is the covariance window length in time
/// units; the number of snapshots it holds depends on the sampling rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub n: usize,
    pub horizon: f64,
    pub sampling_rate: f64,
    pub window: f64,
    pub sigma2: f64,
    pub seed: u64,
    pub events: Vec<SignalEvent>,
}

const SCENARIO_KEYS: [&str; 6] = ["n", "horizon", "sampling_rate", "window", "sigma2", "seed"];
const SIGNAL_KEYS: [&str; 4] = ["t_on", "t_off", "snr_db", "omega_path"];

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::InvalidParameter("horizon must be positive".into()));
        }
        if !(self.sampling_rate > 0.0 && self.sampling_rate.is_finite()) {
            return Err(Error::InvalidParameter("sampling_rate must be positive".into()));
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(Error::InvalidParameter("sigma2 must be positive".into()));
        }
        if self.window_len() == 0 {
            return Err(Error::InvalidParameter("window must hold at least one snapshot".into()));
        }
        if self.steps() == 0 {
            return Err(Error::InvalidParameter("horizon holds no snapshots at this sampling rate".into()));
        }
        for e in &self.events {
            e.validate()?;
        }
        Ok(())
    }

    /// Snapshots per window, N = round(window × rate).
    pub fn window_len(&self) -> usize {
        (self.window * self.sampling_rate).round() as usize
    }

    /// Number of snapshots over the horizon.
    pub fn steps(&self) -> usize {
        (self.horizon * self.sampling_rate).round() as usize
    }

    /// Time of snapshot `k`.
    pub fn time(&self, k: usize) -> f64 {
        k as f64 / self.sampling_rate
    }

    pub fn with_sampling_rate(&self, rate: f64) -> Scenario {
        Scenario { sampling_rate: rate, ..self.clone() }
    }

    pub fn with_seed(&self, seed: u64) -> Scenario {
        Scenario { seed, ..self.clone() }
    }

    pub fn active_events(&self, t: f64) -> impl Iterator<Item = &SignalEvent> {
        self.events.iter().filter(move |e| e.is_active(t))
    }

    pub fn parse(text: &str) -> Result<Scenario> {
        #[derive(PartialEq)]
        enum Section {
            None,
            Scenario,
            Signal,
        }
        let mut section = Section::None;
        let mut seen_scenario = false;
        let mut head: Vec<(String, String, usize)> = Vec::new();
        let mut signals: Vec<(usize, Vec<(String, String, usize)>)> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') {
                if !line.ends_with(']') {
                    return Err(parse_error(line_no, format!("malformed section header {line:?}")));
                }
                match line[1..line.len() - 1].trim() {
                    "scenario" => {
                        if seen_scenario {
                            return Err(parse_error(line_no, "duplicate [scenario] section"));
                        }
                        seen_scenario = true;
                        section = Section::Scenario;
                    }
                    "signal" => {
                        section = Section::Signal;
                        signals.push((line_no, Vec::new()));
                    }
                    other => return Err(parse_error(line_no, format!("unknown section [{other}]"))),
                }
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(parse_error(line_no, format!("expected key = value, got {line:?}")));
            };
            let entry = (key.trim().to_string(), value.trim().to_string(), line_no);
            match section {
                Section::None => {
                    return Err(parse_error(line_no, "key outside of any section; expected a [scenario] section first"))
                }
                Section::Scenario => {
                    if !SCENARIO_KEYS.contains(&entry.0.as_str()) {
                        return Err(parse_error(line_no, format!("unknown [scenario] key {:?}", entry.0)));
                    }
                    head.push(entry);
                }
                Section::Signal => {
                    if !SIGNAL_KEYS.contains(&entry.0.as_str()) {
                        return Err(parse_error(line_no, format!("unknown [signal] key {:?}", entry.0)));
                    }
                    signals.last_mut().expect("inside a signal").1.push(entry);
                }
            }
        }
        if !seen_scenario {
            return Err(parse_error(text.lines().count().max(1), "missing [scenario] section"));
        }

        let get = |entries: &[(String, String, usize)], key: &str, section: &str, at: usize| {
            let found: Vec<_> = entries.iter().filter(|e| e.0 == key).collect();
            match found.as_slice() {
                [one] => Ok((one.1.clone(), one.2)),
                [] => Err(parse_error(at, format!("[{section}] is missing key {key:?}"))),
                [.., last] => Err(parse_error(last.2, format!("duplicate key {key:?} in [{section}]"))),
            }
        };
        let header_line = head.first().map(|e| e.2).unwrap_or(1);
        let num = |key: &str| -> Result<f64> {
            let (v, line) = get(&head, key, "scenario", header_line)?;
            v.parse::<f64>().map_err(|_| parse_error(line, format!("{key} must be a number, got {v:?}")))
        };
        let int = |key: &str| -> Result<u64> {
            let (v, line) = get(&head, key, "scenario", header_line)?;
            v.parse::<u64>().map_err(|_| parse_error(line, format!("{key} must be a nonnegative integer, got {v:?}")))
        };

        let mut events = Vec::new();
        for (at, entries) in &signals {
            let num = |key: &str| -> Result<f64> {
                let (v, line) = get(entries, key, "signal", *at)?;
                v.parse::<f64>().map_err(|_| parse_error(line, format!("{key} must be a number, got {v:?}")))
            };
            let (path, path_line) = get(entries, "omega_path", "signal", *at)?;
            let event = SignalEvent {
                t_on: num("t_on")?,
                t_off: num("t_off")?,
                snr_db: num("snr_db")?,
                omega_path: parse_path(&path).map_err(|m| parse_error(path_line, m))?,
            };
            event.validate().map_err(|e| parse_error(*at, e.to_string()))?;
            events.push(event);
        }

        let scenario = Scenario {
            n: int("n")? as usize,
            horizon: num("horizon")?,
            sampling_rate: num("sampling_rate")?,
            window: num("window")?,
            sigma2: num("sigma2")?,
            seed: int("seed")?,
            events,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    /// Serialise in the format accepted by [`Scenario::parse`].
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "[scenario]");
        let _ = writeln!(s, "n = {}", self.n);
        let _ = writeln!(s, "horizon = {}", self.horizon);
        let _ = writeln!(s, "sampling_rate = {}", self.sampling_rate);
        let _ = writeln!(s, "window = {}", self.window);
        let _ = writeln!(s, "sigma2 = {}", self.sigma2);
        let _ = writeln!(s, "seed = {}", self.seed);
        for e in &self.events {
            let path: Vec<String> = e.omega_path.iter().map(|(t, w)| format!("{t}:{w}")).collect();
            let _ = writeln!(s, "\n[signal]");
            let _ = writeln!(s, "t_on = {}", e.t_on);
            let _ = writeln!(s, "t_off = {}", e.t_off);
            let _ = writeln!(s, "snr_db = {}", e.snr_db);
            let _ = writeln!(s, "omega_path = {}", path.join(", "));
        }
        s
    }
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn parse_path(text: &str) -> std::result::Result<Vec<(f64, f64)>, String> {
    text.split(',')
        .map(|item| {
            let item = item.trim();
            let (t, w) = item.split_once(':').ok_or_else(|| format!("breakpoint {item:?} is not time:omega"))?;
            let t = t.trim().parse::<f64>().map_err(|_| format!("bad time in breakpoint {item:?}"))?;
            let w = w.trim().parse::<f64>().map_err(|_| format!("bad omega in breakpoint {item:?}"))?;
            Ok((t, w))
        })
        .collect()
}
