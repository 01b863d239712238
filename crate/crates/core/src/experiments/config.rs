use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Rpca,
    Pursuit,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Rpca => "rpca",
            Method::Pursuit => "pursuit",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rpca" => Ok(Method::Rpca),
            "pursuit" => Ok(Method::Pursuit),
            _ => Err(Error::Parse(format!("unknown method '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum LambdaRule {
    /// `1/√max(m, n)`
    InvSqrtN1,
    Fixed(f64),
}

impl LambdaRule {
    pub fn lambda(self, m: usize, n: usize) -> f64 {
        match self {
            LambdaRule::InvSqrtN1 => crate::solver::default_lambda(m, n),
            LambdaRule::Fixed(v) => v,
        }
    }
}

impl FromStr for LambdaRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "inv_sqrt_n1" || s == "default" {
            return Ok(LambdaRule::InvSqrtN1);
        }
        s.parse::<f64>()
            .ok()
            .filter(|v| *v > 0.0 && v.is_finite())
            .map(LambdaRule::Fixed)
            .ok_or_else(|| Error::Parse(format!("lambda_rule must be inv_sqrt_n1 or a positive number, got '{s}'")))
    }
}

/// Axes and settings of the recovery phase grid.
///
/// Text form is one `key = value` per line, `#` starts a comment, and lists
/// are comma separated:
///
/// ```text
/// m = 100
/// n = 200
/// k = 5
/// rank_fracs = 0.05, 0.1, 0.15
/// corruption_fracs = 0.01, 0.05
/// trials = 5
/// lambda_rule = inv_sqrt_n1
/// success_threshold = 0.05
/// methods = rpca, pursuit
/// base_seed = 0
/// ```
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PhaseGridConfig {
    pub m: usize,
    pub n: usize,
    /// Number of clusters (independent subspaces).
    pub k: usize,
    /// `r0 / min(m, n)`; the rank is rounded up to a multiple of `k`.
    pub rank_fracs: Vec<f64>,
    /// `|Ω| / (mn)`; exactly `round(frac·mn)` entries are corrupted.
    pub corruption_fracs: Vec<f64>,
    pub trials: usize,
    pub lambda_rule: LambdaRule,
    pub success_threshold: f64,
    pub methods: Vec<Method>,
    pub base_seed: u64,
}

impl Default for PhaseGridConfig {
    fn default() -> Self {
        Self::desk()
    }
}

impl PhaseGridConfig {
    /// 100×200, 5 clusters, 8×8 grid, 5 trials.
    pub fn desk() -> Self {
        Self {
            m: 100,
            n: 200,
            k: 5,
            rank_fracs: vec![0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4],
            corruption_fracs: vec![0.005, 0.01, 0.02, 0.03, 0.05, 0.075, 0.1, 0.15],
            trials: 5,
            lambda_rule: LambdaRule::InvSqrtN1,
            success_threshold: 0.05,
            methods: vec![Method::Rpca, Method::Pursuit],
            base_seed: 0,
        }
    }

    /// 200×1000, 5 clusters, 20×20 grid in steps of 0.025, 10 trials. Hours of compute.
    pub fn full() -> Self {
        let steps: Vec<f64> = (1..=20).map(|i| i as f64 * 0.025).collect();
        Self {
            m: 200,
            n: 1000,
            k: 5,
            rank_fracs: steps.clone(),
            corruption_fracs: steps,
            trials: 10,
            ..Self::desk()
        }
    }

    pub fn n2(&self) -> usize {
        self.m.min(self.n)
    }

    /// Rank used for a rank fraction: `round(frac·n2)` rounded up to a multiple of `k`.
    pub fn rank_for(&self, frac: f64) -> usize {
        let r = ((frac * self.n2() as f64).round() as usize).max(1);
        r.div_ceil(self.k) * self.k
    }

    pub fn corruptions_for(&self, frac: f64) -> usize {
        (frac * (self.m * self.n) as f64).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.m == 0 || self.n == 0 || self.k == 0 {
            return bad(format!("m, n, k must be positive, got {}, {}, {}", self.m, self.n, self.k));
        }
        if self.n % self.k != 0 {
            return bad(format!("k = {} does not divide n = {}", self.k, self.n));
        }
        if self.rank_fracs.is_empty() || self.corruption_fracs.is_empty() {
            return bad("both grid axes need at least one value".into());
        }
        for &f in self.rank_fracs.iter().chain(&self.corruption_fracs) {
            if !(f > 0.0 && f < 1.0) {
                return bad(format!("fraction {f} outside (0, 1)"));
            }
        }
        for &f in &self.rank_fracs {
            let r = self.rank_for(f);
            if r > self.n2() || r / self.k > self.n / self.k {
                return bad(format!("rank fraction {f} gives rank {r}, too large for {}x{}", self.m, self.n));
            }
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if !(self.success_threshold > 0.0) {
            return bad(format!("success_threshold must be positive, got {}", self.success_threshold));
        }
        if self.methods.is_empty() {
            return bad("at least one method is required".into());
        }
        Ok(())
    }

    /// Parse the text form, starting from the desk defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::desk();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", lineno + 1)))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse().map_err(|_| Error::Parse(format!("{key}: cannot parse '{v}'")))
        }
        fn list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
            v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| num(key, s)).collect()
        }
        match key {
            "m" => self.m = num(key, value)?,
            "n" => self.n = num(key, value)?,
            "k" => self.k = num(key, value)?,
            "rank_fracs" => self.rank_fracs = list(key, value)?,
            "corruption_fracs" => self.corruption_fracs = list(key, value)?,
            "trials" => self.trials = num(key, value)?,
            "lambda_rule" => self.lambda_rule = value.parse()?,
            "success_threshold" => self.success_threshold = num(key, value)?,
            "methods" => {
                self.methods = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::parse)
                    .collect::<Result<_>>()?;
                self.methods.sort();
                self.methods.dedup();
            }
            "base_seed" => self.base_seed = num(key, value)?,
            _ => return Err(Error::Parse(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Text form accepted by [`PhaseGridConfig::parse`].
    pub fn to_text(&self) -> String {
        let join = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(", ");
        let lambda = match self.lambda_rule {
            LambdaRule::InvSqrtN1 => "inv_sqrt_n1".to_string(),
            LambdaRule::Fixed(v) => v.to_string(),
        };
        let methods: Vec<_> = self.methods.iter().map(|m| m.name()).collect();
        format!(
            "m = {}\nn = {}\nk = {}\nrank_fracs = {}\ncorruption_fracs = {}\ntrials = {}\nlambda_rule = {}\nsuccess_threshold = {}\nmethods = {}\nbase_seed = {}\n",
            self.m,
            self.n,
            self.k,
            join(&self.rank_fracs),
            join(&self.corruption_fracs),
            self.trials,
            lambda,
            self.success_threshold,
            methods.join(", "),
            self.base_seed
        )
    }
}
