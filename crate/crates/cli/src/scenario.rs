//! Flat `key = value` scenario files for `bench`.
//!
//! ```text
//! name = angle-sweep
//! generator = sample-b
//! size = 64
//! sweep = angle: 0, 90, 180
//! methods = ls, irls, pudip
//! seeds = 1, 2, 3
//! profile = desk
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Any other key is a
//! generator parameter (see [`SceneParams::set`]) or a method override:
//! `iters`, `lr`, `eps_min`, `eps_max`, `refresh_every`, `input_channels`,
//! `stages`, `channels`.

use crate::error::{CliError, Result};
use crate::generators::{GeneratorKind, SceneParams};
use crate::methods::{Method, MethodOptions, Profile};

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub generator: GeneratorKind,
    pub params: SceneParams,
    /// Swept generator parameter and its values; a single unnamed cell when
    /// absent.
    pub sweep: Option<(String, Vec<String>)>,
    pub methods: Vec<Method>,
    pub seeds: Vec<u64>,
    pub options: MethodOptions,
}

fn list(value: &str) -> Vec<String> {
    value.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("{key}: cannot parse {value:?}")))
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        let mut name = None;
        let mut generator = None;
        let mut params = SceneParams::default();
        let mut sweep = None;
        let mut methods = Vec::new();
        let mut seeds = Vec::new();
        let mut options = MethodOptions::default();
        let mut extra = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("line {}: expected key = value", n + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "name" => name = Some(value.to_string()),
                "generator" => generator = Some(GeneratorKind::parse(value)?),
                "methods" => methods = list(value).iter().map(|m| Method::parse(m)).collect::<Result<_>>()?,
                "seeds" => seeds = list(value).iter().map(|s| parse_num(key, s)).collect::<Result<_>>()?,
                "profile" => options.profile = Profile::parse(value)?,
                "sweep" => {
                    let (param, values) = value
                        .split_once(':')
                        .ok_or_else(|| CliError::Usage(format!("line {}: sweep = param: v1, v2, ...", n + 1)))?;
                    let values = list(values);
                    if values.is_empty() {
                        return Err(CliError::Usage(format!("line {}: empty sweep", n + 1)));
                    }
                    sweep = Some((param.trim().to_string(), values));
                }
                "iters" => options.iterations = Some(parse_num(key, value)?),
                "lr" => options.lr = Some(parse_num(key, value)?),
                "eps_min" => options.eps_min = Some(parse_num(key, value)?),
                "eps_max" => options.eps_max = Some(parse_num(key, value)?),
                "refresh_every" => options.refresh_every = Some(parse_num(key, value)?),
                "input_channels" => options.input_channels = Some(parse_num(key, value)?),
                "stages" => options.stages = Some(parse_num(key, value)?),
                "channels" => options.body_channels = Some(parse_num(key, value)?),
                _ => extra.push((key.to_string(), value.to_string())),
            }
        }
        for (k, v) in &extra {
            params.set(k, v)?;
        }
        let generator = generator.ok_or_else(|| CliError::Usage("scenario needs a generator".into()))?;
        if generator == GeneratorKind::PhasenetData {
            return Err(CliError::Usage("phasenet-data cannot be benchmarked".into()));
        }
        if methods.is_empty() {
            return Err(CliError::Usage("scenario needs at least one method".into()));
        }
        if seeds.is_empty() {
            return Err(CliError::Usage("scenario needs at least one seed".into()));
        }
        if let Some((param, values)) = &sweep {
            // reject bad sweep values before any work starts
            let mut probe = params;
            for v in values {
                probe.set(param, v)?;
            }
        }
        Ok(Self {
            name: name.unwrap_or_else(|| generator.name().to_string()),
            generator,
            params,
            sweep,
            methods,
            seeds,
            options,
        })
    }

    /// `(label, params)` per sweep value, in file order.
    pub fn cells(&self) -> Vec<(String, SceneParams)> {
        match &self.sweep {
            None => vec![(String::new(), self.params)],
            Some((param, values)) => values
                .iter()
                .map(|v| {
                    let mut p = self.params;
                    p.set(param, v).expect("validated in parse");
                    (v.clone(), p)
                })
                .collect(),
        }
    }

    pub fn sweep_param(&self) -> &str {
        self.sweep.as_ref().map_or("value", |(p, _)| p.as_str())
    }
}
