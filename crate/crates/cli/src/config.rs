//! Run configuration: flat `section.key = value` text (TOML dotted keys).
//!
//! Parameter keys take a scalar, a list `[a, b, c]` or a grid string
//! `"lin(a, b, n)"` / `"log(a, b, n)"`; the run covers the cartesian product.
//! `sweep.variable` names the axis that `sweep.grid` replaces.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crackwave_core::energy::LIMIT_FACTOR;
use crackwave_core::fields::{log_grid, TIP_WINDOW};
use crackwave_core::{FieldKind, LoadProfile, Material};

use crate::CliError;

const KEYS: [&str; 18] = [
    "material.G",
    "material.rho",
    "material.ell",
    "material.eta",
    "material.h0",
    "load.T0",
    "load.L_over_ell",
    "load.p",
    "crack.m",
    "crack.m_relative",
    "sweep.variable",
    "sweep.grid",
    "fields.kind",
    "tmax.x_min_over_ell",
    "tmax.x_max_over_ell",
    "limit.factor",
    "output.dir",
    "title",
];

/// Names accepted by `sweep.variable`.
pub const SWEEP_VARIABLES: [&str; 8] = ["eta", "h0", "p", "L_over_ell", "m", "omega_ell_over_cs", "k_ell", "X_over_ell"];

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub variable: String,
    pub grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub g: f64,
    pub rho: f64,
    pub ell: f64,
    pub eta: Vec<f64>,
    pub h0: Vec<f64>,
    pub t0: f64,
    pub l_over_ell: Vec<f64>,
    pub p: Vec<u32>,
    /// Crack speeds; fractions of `min(1, m_c)` when `m_relative` is set.
    pub m: Vec<f64>,
    pub m_relative: bool,
    pub sweep: Option<Sweep>,
    pub kinds: Vec<FieldKind>,
    pub x_min_over_ell: f64,
    /// `None` means `100·max(L, ℓ)/ℓ` per tuple.
    pub x_max_over_ell: Option<f64>,
    pub limit_factor: f64,
    pub out: PathBuf,
}

/// One point of the parameter product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tuple {
    pub eta: f64,
    pub h0: f64,
    pub p: u32,
    pub l_over_ell: f64,
    /// Raw `crack.m` value (a fraction when `m_relative` is set).
    pub m_input: f64,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, toml::Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            toml::Value::Table(t) => flatten(&key, t, out),
            other => {
                out.insert(key, other.clone());
            }
        }
    }
}

fn number(key: &str, v: &toml::Value) -> Result<f64, CliError> {
    match v {
        toml::Value::Float(x) => Ok(*x),
        toml::Value::Integer(i) => Ok(*i as f64),
        _ => Err(bad(format!("{key}: expected a number, got {v}"))),
    }
}

/// Parses `lin(a, b, n)` or `log(a, b, n)`.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let s = text.trim();
    let (kind, rest) = s.split_once('(').ok_or_else(|| bad(format!("grid `{text}`: expected lin(a, b, n) or log(a, b, n)")))?;
    let inner = rest.strip_suffix(')').ok_or_else(|| bad(format!("grid `{text}`: missing `)`")))?;
    let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(bad(format!("grid `{text}`: expected three arguments")));
    }
    let a: f64 = parts[0].parse().map_err(|_| bad(format!("grid `{text}`: bad start `{}`", parts[0])))?;
    let b: f64 = parts[1].parse().map_err(|_| bad(format!("grid `{text}`: bad end `{}`", parts[1])))?;
    let n: usize = parts[2].parse().map_err(|_| bad(format!("grid `{text}`: bad count `{}`", parts[2])))?;
    if n == 0 {
        return Err(bad(format!("grid `{text}`: empty")));
    }
    match kind.trim() {
        "lin" => Ok(if n == 1 {
            vec![a]
        } else {
            (0..n).map(|i| if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 }).collect()
        }),
        "log" => {
            if !(a > 0.0 && b > 0.0) {
                return Err(bad(format!("grid `{text}`: log grids need positive ends")));
            }
            Ok(log_grid(a, b, n))
        }
        other => Err(bad(format!("grid `{text}`: unknown kind `{other}`"))),
    }
}

fn values(key: &str, v: &toml::Value) -> Result<Vec<f64>, CliError> {
    let list = match v {
        toml::Value::Array(items) => items.iter().map(|x| number(key, x)).collect::<Result<Vec<_>, _>>()?,
        toml::Value::String(s) => parse_grid(s).map_err(|e| bad(format!("{key}: {e}")))?,
        other => vec![number(key, other)?],
    };
    if list.is_empty() {
        return Err(bad(format!("{key}: empty list")));
    }
    if list.iter().any(|x| !x.is_finite()) {
        return Err(bad(format!("{key}: non-finite value")));
    }
    if !strictly_monotone(&list) {
        return Err(bad(format!("{key}: values must be strictly monotone")));
    }
    Ok(list)
}

pub fn strictly_monotone(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0]) || v.windows(2).all(|w| w[1] < w[0])
}

fn integers(key: &str, v: &[f64]) -> Result<Vec<u32>, CliError> {
    v.iter()
        .map(|&x| {
            if x >= 0.0 && x.fract() == 0.0 && x <= u32::MAX as f64 {
                Ok(x as u32)
            } else {
                Err(bad(format!("{key}: {x} is not a non-negative integer")))
            }
        })
        .collect()
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| bad(e.message().to_string()))?;
        let mut kv = BTreeMap::new();
        flatten("", &table, &mut kv);
        if let Some(k) = kv.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(bad(format!("unknown key `{k}`")));
        }
        let scalar = |key: &str, default: f64| -> Result<f64, CliError> {
            kv.get(key).map_or(Ok(default), |v| number(key, v))
        };
        let list = |key: &str, default: f64| -> Result<Vec<f64>, CliError> {
            kv.get(key).map_or(Ok(vec![default]), |v| values(key, v))
        };

        let sweep = match (kv.get("sweep.variable"), kv.get("sweep.grid")) {
            (None, None) => None,
            (Some(toml::Value::String(var)), Some(grid)) => {
                if !SWEEP_VARIABLES.contains(&var.as_str()) {
                    return Err(bad(format!("sweep.variable: unknown variable `{var}`")));
                }
                Some(Sweep { variable: var.clone(), grid: values("sweep.grid", grid)? })
            }
            (Some(_), None) | (None, Some(_)) => {
                return Err(bad("sweep.variable and sweep.grid must be given together"));
            }
            (Some(v), Some(_)) => return Err(bad(format!("sweep.variable: expected a string, got {v}"))),
        };

        let kinds = match kv.get("fields.kind") {
            None => FieldKind::ALL.to_vec(),
            Some(toml::Value::String(s)) => vec![kind(s)?],
            Some(toml::Value::Array(items)) => items
                .iter()
                .map(|v| match v {
                    toml::Value::String(s) => kind(s),
                    other => Err(bad(format!("fields.kind: expected a name, got {other}"))),
                })
                .collect::<Result<_, _>>()?,
            Some(other) => return Err(bad(format!("fields.kind: expected names, got {other}"))),
        };

        let m_relative = match kv.get("crack.m_relative") {
            None => false,
            Some(toml::Value::Boolean(b)) => *b,
            Some(other) => return Err(bad(format!("crack.m_relative: expected true or false, got {other}"))),
        };
        let out = match kv.get("output.dir") {
            None => PathBuf::from("."),
            Some(toml::Value::String(s)) => PathBuf::from(s),
            Some(other) => return Err(bad(format!("output.dir: expected a path, got {other}"))),
        };
        if let Some(v) = kv.get("title") {
            if !v.is_str() {
                return Err(bad("title: expected a string"));
            }
        }

        let cfg = RunConfig {
            g: scalar("material.G", 1.0)?,
            rho: scalar("material.rho", 1.0)?,
            ell: scalar("material.ell", 1.0)?,
            eta: list("material.eta", 0.0)?,
            h0: list("material.h0", 0.0)?,
            t0: scalar("load.T0", 1.0)?,
            l_over_ell: list("load.L_over_ell", 1.0)?,
            p: integers("load.p", &list("load.p", 0.0)?)?,
            m: list("crack.m", 0.0)?,
            m_relative,
            sweep,
            kinds,
            x_min_over_ell: scalar("tmax.x_min_over_ell", TIP_WINDOW)?,
            x_max_over_ell: kv.get("tmax.x_max_over_ell").map(|v| number("tmax.x_max_over_ell", v)).transpose()?,
            limit_factor: scalar("limit.factor", LIMIT_FACTOR)?,
            out,
        };
        cfg.check()?;
        Ok(cfg)
    }

    /// Re-validates every material and load combination.
    fn check(&self) -> Result<(), CliError> {
        for t in self.tuples() {
            let mat = self.material(t.eta, t.h0).map_err(|e| bad(e.to_string()))?;
            LoadProfile::new(self.t0, t.l_over_ell * mat.ell, t.p).map_err(|e| bad(e.to_string()))?;
            if !(t.m_input >= 0.0) {
                return Err(bad(format!("crack.m: {} is negative", t.m_input)));
            }
        }
        if !(self.x_min_over_ell > 0.0) || self.x_max_over_ell.is_some_and(|x| !(x > self.x_min_over_ell)) {
            return Err(bad("tmax window must satisfy 0 < x_min < x_max"));
        }
        if !(self.limit_factor > 0.0 && self.limit_factor < 1.0) {
            return Err(bad(format!("limit.factor must lie in (0, 1), got {}", self.limit_factor)));
        }
        Ok(())
    }

    pub fn material(&self, eta: f64, h0: f64) -> crackwave_core::Result<Material> {
        Material::new(self.g, self.rho, self.ell, eta, h0)
    }

    pub fn profile(&self, t: &Tuple) -> crackwave_core::Result<LoadProfile> {
        LoadProfile::new(self.t0, t.l_over_ell * self.ell, t.p)
    }

    /// The sweep grid if `variable` is swept, otherwise `fallback`.
    pub fn axis(&self, variable: &str, fallback: &[f64]) -> Vec<f64> {
        match &self.sweep {
            Some(s) if s.variable == variable => s.grid.clone(),
            _ => fallback.to_vec(),
        }
    }

    /// Cartesian product in the order η, h₀, p, L/ℓ, m (last varies
    /// fastest).
    pub fn tuples(&self) -> Vec<Tuple> {
        let eta = self.axis("eta", &self.eta);
        let h0 = self.axis("h0", &self.h0);
        let p: Vec<u32> = match &self.sweep {
            Some(s) if s.variable == "p" => s.grid.iter().map(|&x| x as u32).collect(),
            _ => self.p.clone(),
        };
        let l = self.axis("L_over_ell", &self.l_over_ell);
        let m = self.axis("m", &self.m);
        let mut out = Vec::with_capacity(eta.len() * h0.len() * p.len() * l.len() * m.len());
        for &eta in &eta {
            for &h0 in &h0 {
                for &p in &p {
                    for &l_over_ell in &l {
                        for &m_input in &m {
                            out.push(Tuple { eta, h0, p, l_over_ell, m_input });
                        }
                    }
                }
            }
        }
        out
    }

    /// Requires the sweep variable, if any, to be one of `allowed`.
    pub fn require_sweep(&self, subcommand: &str, allowed: &[&str]) -> Result<(), CliError> {
        match &self.sweep {
            Some(s) if !allowed.contains(&s.variable.as_str()) => Err(bad(format!(
                "{subcommand}: cannot sweep `{}` (allowed: {})",
                s.variable,
                allowed.join(", ")
            ))),
            Some(s) if s.variable == "p" => integers("sweep.grid", &s.grid).map(|_| ()),
            _ => Ok(()),
        }
    }
}

fn kind(s: &str) -> Result<FieldKind, CliError> {
    FieldKind::parse(s).ok_or_else(|| bad(format!("fields.kind: unknown field `{s}`")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("lin(0, 1, 3)").unwrap(), vec![0.0, 0.5, 1.0]);
        let g = parse_grid("log(1e-2, 1e2, 5)").unwrap();
        assert!((g[2] - 1.0).abs() < 1e-15 && g[4] == 100.0);
        assert!(parse_grid("log(0, 1, 3)").is_err());
        assert!(parse_grid("cubic(0, 1, 3)").is_err());
        assert!(parse_grid("lin(0, 1)").is_err());
    }

    #[test]
    fn dotted_keys_and_lists() {
        let cfg = RunConfig::parse(
            "material.eta = [-0.9, 0, 0.9]\nmaterial.h0 = 0.707\nload.p = [0, 1]\ncrack.m = 0.3\n\
             sweep.variable = \"L_over_ell\"\nsweep.grid = \"log(0.1, 10, 3)\"\n",
        )
        .unwrap();
        assert_eq!(cfg.eta, vec![-0.9, 0.0, 0.9]);
        let t = cfg.tuples();
        assert_eq!(t.len(), 3 * 2 * 3);
        assert_eq!(t[1].l_over_ell, 1.0);
        assert_eq!(t[3].p, 1);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RunConfig::parse("material.etta = 0.1").is_err());
        assert!(RunConfig::parse("material.eta = 1.5").is_err());
        assert!(RunConfig::parse("load.p = 0.5").is_err());
        assert!(RunConfig::parse("material.h0 = [0.6, 0.6]").is_err());
        assert!(RunConfig::parse("sweep.variable = \"m\"").is_err());
        assert!(RunConfig::parse("sweep.variable = \"q\"\nsweep.grid = [1, 2]").is_err());
        assert!(RunConfig::parse("fields.kind = \"stress\"").is_err());
        assert!(RunConfig::parse("material.eta = ").is_err());
    }
}
