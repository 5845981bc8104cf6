//! Compact model specifications: `kind:key=value,key=value`.
//!
//! Rates: `constant:mu=0.02`, `powerlaw:mu0=6e-6,gamma=3`,
//! `piecewise:breaks=10;40,rates=0.01;0.02;0.05`, `tabulated:file=rates.csv`.
//! Success: `constant:sigma=0.01`, `moran:r=2,n=10`, `branching:p=0.75`.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::io::read_rate_table_file;
use crate::rate::{RateModel, SuccessModel};

fn usage(token: &str, message: &str) -> Error {
    Error::Usage(format!("`{token}`: {message}"))
}

struct Spec<'a> {
    kind: &'a str,
    params: BTreeMap<&'a str, &'a str>,
}

impl<'a> Spec<'a> {
    fn parse(text: &'a str) -> Result<Self> {
        let text = text.trim();
        let (kind, rest) = text
            .split_once(':')
            .ok_or_else(|| usage(text, "expected `kind:key=value,...`"))?;
        let mut params = BTreeMap::new();
        for pair in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| usage(pair, "expected `key=value`"))?;
            if params.insert(k.trim(), v.trim()).is_some() {
                return Err(usage(pair, "duplicate key"));
            }
        }
        Ok(Self {
            kind: kind.trim(),
            params,
        })
    }

    fn expect_keys(&self, keys: &[&str]) -> Result<()> {
        for k in self.params.keys() {
            if !keys.contains(k) {
                return Err(usage(k, &format!("unknown key for `{}`", self.kind)));
            }
        }
        for k in keys {
            if !self.params.contains_key(k) {
                return Err(usage(self.kind, &format!("missing key `{k}`")));
            }
        }
        Ok(())
    }

    fn raw(&self, key: &str) -> &'a str {
        self.params[key]
    }

    fn number(&self, key: &str) -> Result<f64> {
        let raw = self.raw(key);
        match raw.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(usage(raw, &format!("`{key}` must be a finite number"))),
        }
    }

    fn list(&self, key: &str) -> Result<Vec<f64>> {
        let raw = self.raw(key);
        if raw.is_empty() {
            return Ok(Vec::new());
        }
        raw.split(';')
            .map(|item| match item.trim().parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(usage(item, &format!("`{key}` entries must be finite numbers"))),
            })
            .collect()
    }
}

pub fn parse_rate_model(text: &str) -> Result<RateModel> {
    let spec = Spec::parse(text)?;
    match spec.kind {
        "constant" => {
            spec.expect_keys(&["mu"])?;
            RateModel::constant(spec.number("mu")?)
        }
        "powerlaw" => {
            spec.expect_keys(&["mu0", "gamma"])?;
            RateModel::power_law(spec.number("mu0")?, spec.number("gamma")?)
        }
        "piecewise" => {
            spec.expect_keys(&["breaks", "rates"])?;
            RateModel::piecewise_constant(spec.list("breaks")?, spec.list("rates")?)
        }
        "tabulated" => {
            spec.expect_keys(&["file"])?;
            read_rate_table_file(Path::new(spec.raw("file")))
        }
        other => Err(usage(other, "unknown rate model (constant, powerlaw, piecewise, tabulated)")),
    }
}

pub fn parse_success_model(text: &str) -> Result<SuccessModel> {
    let spec = Spec::parse(text)?;
    match spec.kind {
        "constant" => {
            spec.expect_keys(&["sigma"])?;
            SuccessModel::constant(spec.number("sigma")?)
        }
        "moran" => {
            spec.expect_keys(&["r", "n"])?;
            let raw = spec.raw("n");
            let n = raw
                .parse::<u64>()
                .map_err(|_| usage(raw, "`n` must be a positive integer"))?;
            SuccessModel::moran(spec.number("r")?, n)
        }
        "branching" => {
            spec.expect_keys(&["p"])?;
            SuccessModel::branching(spec.number("p")?)
        }
        other => Err(usage(other, "unknown success model (constant, moran, branching)")),
    }
}
