use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::gnn::{Activation, GnnSpec};
use crate::models::ModelSpec;

/// Flat `key=value` settings. Every lookup records the value it resolved to,
/// defaults included, so the exact configuration can be written next to results.
#[derive(Clone, Debug, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
    resolved: BTreeMap<String, String>,
}

impl Config {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses `key=value` lines; blank lines and lines starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = Config::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value, got '{line}'", i + 1)))?;
            c.set(k.trim(), v.trim());
        }
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn set(&mut self, key: &str, value: &str) {
        self.values.insert(key.to_string(), value.to_string());
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn raw(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    fn lookup(&mut self, key: &str, default: &str) -> String {
        let v = self.values.get(key).cloned().unwrap_or_else(|| default.to_string());
        self.resolved.insert(key.to_string(), v.clone());
        v
    }

    pub fn str(&mut self, key: &str, default: &str) -> String {
        self.lookup(key, default)
    }

    pub fn get<T: FromStr>(&mut self, key: &str, default: &str) -> Result<T> {
        let v = self.lookup(key, default);
        v.parse().map_err(|_| Error::Config(format!("cannot parse {key}='{v}'")))
    }

    /// Comma-separated list; an empty string gives an empty list.
    pub fn list<T: FromStr>(&mut self, key: &str, default: &str) -> Result<Vec<T>> {
        let v = self.lookup(key, default);
        v.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| t.parse().map_err(|_| Error::Config(format!("cannot parse element '{t}' of {key}='{v}'"))))
            .collect()
    }

    /// Strictly increasing list of positive sizes.
    pub fn n_grid(&mut self, key: &str, default: &str) -> Result<Vec<usize>> {
        let ns: Vec<usize> = self.list(key, default)?;
        if ns.is_empty() || ns[0] == 0 || ns.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!("{key} must be a strictly increasing list of positive sizes, got {ns:?}")));
        }
        Ok(ns)
    }

    /// Model from `model`/`space`/`kernel`/`dist`/`grid`.
    pub fn model(&mut self, default: &ModelSpec) -> Result<ModelSpec> {
        let spec = ModelSpec::from_map(&self.values, default)?;
        if let Some(m) = self.values.get("model").cloned() {
            self.resolved.insert("model".into(), m);
        }
        self.resolved.insert("space".into(), spec.space.clone());
        self.resolved.insert("kernel".into(), spec.kernel.clone());
        self.resolved.insert("dist".into(), spec.dist.clone());
        if let Some(g) = spec.grid {
            self.resolved.insert("grid".into(), g.to_string());
        }
        Ok(spec)
    }

    /// GNN architecture from `{prefix}dims`, `{prefix}order`, `{prefix}head`
    /// (`square` selects the exact-square head) and `{prefix}activation`.
    pub fn gnn(&mut self, prefix: &str, dims: &str, order: &str, head: &str, activation: &str) -> Result<GnnSpec> {
        let d: Vec<usize> = self.list(&format!("{prefix}dims"), dims)?;
        let k: usize = self.get(&format!("{prefix}order"), order)?;
        let h = self.str(&format!("{prefix}head"), head);
        let act = Activation::from_name(&self.str(&format!("{prefix}activation"), activation))?;
        if d.is_empty() {
            return Err(Error::Config(format!("{prefix}dims must not be empty")));
        }
        let spec = if h == "square" {
            GnnSpec::new(&d, k, &[]).with_square_head()
        } else {
            let widths: Vec<usize> = h
                .split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(|t| t.parse().map_err(|_| Error::Config(format!("bad {prefix}head '{h}'"))))
                .collect::<Result<_>>()?;
            GnnSpec::new(&d, k, &widths)
        };
        Ok(spec.with_activation(act))
    }

    /// `# config: key=value ...` over every resolved key, sorted.
    pub fn comment(&self) -> String {
        let body: Vec<String> = self.resolved.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("# config: {}", body.join(" "))
    }

    /// Keys that were supplied but never read.
    pub fn unused(&self) -> Vec<String> {
        self.values.keys().filter(|k| !self.resolved.contains_key(*k)).cloned().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_resolve() {
        let mut c = Config::parse("# comment\nns = 10,20\n\nkernel=gaussian:sigma=0.3\n").unwrap();
        assert_eq!(c.n_grid("ns", "1").unwrap(), vec![10, 20]);
        assert_eq!(c.get::<usize>("trials", "4").unwrap(), 4);
        let m = c.model(&ModelSpec::new("interval:-1,1", "constant:c=0.5", "uniform")).unwrap();
        assert_eq!(m.kernel, "gaussian:sigma=0.3");
        assert!(c.comment().starts_with("# config: dist=uniform kernel=gaussian:sigma=0.3 ns=10,20"));
        assert!(c.unused().is_empty());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Config::parse("novalue").is_err());
        let mut c = Config::parse("ns=20,10").unwrap();
        assert!(c.n_grid("ns", "").is_err());
        assert!(c.get::<usize>("x", "abc").is_err());
    }

    #[test]
    fn gnn_specs() {
        let mut c = Config::parse("inner_head=square").unwrap();
        let s = c.gnn("inner_", "1,4", "0", "", "relu").unwrap();
        assert!(s.square_head);
        let o = c.gnn("outer_", "4,8", "1", "1", "tanh").unwrap();
        assert_eq!(o.head, vec![1]);
        assert_eq!(o.activation, Activation::Tanh);
    }
}
