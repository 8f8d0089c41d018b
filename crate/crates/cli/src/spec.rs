//! Generator spec parsing.
//!
//! Generators are addressed either through `generate` kind flags with
//! trailing `key=value` parameters or through one-line spec strings such as
//! `gap:n=6,m=2,seed=1`, which keep experiment configs diffable.

use crate::CliError;
use rogap::model::{
    gen_knapsack_family, gen_uniform_gap, gen_unit_iid, parse_rational, DiscreteDist, FamilyParams,
    GapGenRanges, InstanceFile, KnapsackFamily,
};
use rogap::Rat;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenKind {
    Gap,
    Knapsack,
    UnitIid,
}

impl GenKind {
    fn name(self) -> &'static str {
        match self {
            Self::Gap => "gap",
            Self::Knapsack => "knapsack",
            Self::UnitIid => "unit-iid",
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn parse_kv(params: &[String]) -> Result<Vec<(String, String)>, CliError> {
    params
        .iter()
        .map(|p| {
            p.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| usage(format!("expected key=value, got `{p}`")))
        })
        .collect()
}

struct Params<'a> {
    kind: GenKind,
    entries: &'a [(String, String)],
}

impl Params<'_> {
    fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    fn require(&self, key: &str) -> Result<&str, CliError> {
        self.get(key)
            .ok_or_else(|| usage(format!("{} generator requires {key}=...", self.kind.name())))
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| usage(format!("bad value for {key}: {e}")))
            })
            .transpose()
    }

    fn check_known(&self, allowed: &[&str]) -> Result<(), CliError> {
        for (k, _) in self.entries {
            if k == "seed" {
                continue;
            }
            if !allowed.contains(&k.as_str()) {
                return Err(usage(format!(
                    "unknown parameter `{k}` for the {} generator (allowed: {})",
                    self.kind.name(),
                    allowed.join(", ")
                )));
            }
        }
        Ok(())
    }
}

fn parse_dist(text: &str) -> Result<DiscreteDist, CliError> {
    let (kind, body) = text
        .split_once(':')
        .ok_or_else(|| usage("dist must be point:V, uniform:V1,V2,... or weighted:V1@W1,..."))?;
    let value = |s: &str| -> Result<Rat, CliError> {
        parse_rational(s).map_err(|e| usage(format!("bad distribution value `{s}`: {e}")))
    };
    let dist = match kind {
        "point" => DiscreteDist::point(value(body)?),
        "uniform" => {
            let values = body.split(',').map(value).collect::<Result<Vec<_>, _>>()?;
            DiscreteDist::uniform(values)
        }
        "weighted" => {
            let support = body
                .split(',')
                .map(|pair| {
                    let (v, w) = pair
                        .split_once('@')
                        .ok_or_else(|| usage(format!("expected V@W, got `{pair}`")))?;
                    let weight: f64 = w
                        .parse()
                        .map_err(|e| usage(format!("bad weight `{w}`: {e}")))?;
                    Ok((value(v)?, weight))
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            DiscreteDist::new(support)
        }
        other => return Err(usage(format!("unknown distribution kind `{other}`"))),
    };
    dist.map_err(|e| usage(e.to_string()))
}

/// Builds an instance from a generator kind, `key=value` parameters, and a
/// seed. Parameter problems are usage errors.
pub fn build_instance(
    kind: GenKind,
    entries: &[(String, String)],
    seed: u64,
) -> Result<InstanceFile, CliError> {
    let params = Params { kind, entries };
    match kind {
        GenKind::Gap => {
            params.check_known(&[
                "n", "m", "vmin", "vmax", "smin", "smax", "cmin", "cmax", "grid",
            ])?;
            let n: usize = params
                .parse("n")?
                .ok_or_else(|| usage("gap generator requires n=..."))?;
            let m: usize = params.parse("m")?.unwrap_or(2);
            let defaults = GapGenRanges::default();
            let ranges = GapGenRanges {
                value: (
                    params.parse("vmin")?.unwrap_or(defaults.value.0),
                    params.parse("vmax")?.unwrap_or(defaults.value.1),
                ),
                size: (
                    params.parse("smin")?.unwrap_or(defaults.size.0),
                    params.parse("smax")?.unwrap_or(defaults.size.1),
                ),
                capacity: (
                    params.parse("cmin")?.unwrap_or(defaults.capacity.0),
                    params.parse("cmax")?.unwrap_or(defaults.capacity.1),
                ),
                grid: params.parse("grid")?.unwrap_or(defaults.grid),
            };
            let inst = gen_uniform_gap(n, m, seed, &ranges).map_err(|e| usage(e.to_string()))?;
            Ok(InstanceFile::Gap(inst))
        }
        GenKind::Knapsack => {
            params.check_known(&["family", "n", "range", "offset", "capacity"])?;
            let n: usize = params
                .parse("n")?
                .ok_or_else(|| usage("knapsack generator requires n=..."))?;
            let family: KnapsackFamily = params
                .get("family")
                .unwrap_or("uncorrelated")
                .parse()
                .map_err(|e: rogap::model::ModelError| usage(e.to_string()))?;
            let defaults = FamilyParams::default();
            let family_params = FamilyParams {
                coeff_range: params.parse("range")?.unwrap_or(defaults.coeff_range),
                offset: params.parse("offset")?.unwrap_or(defaults.offset),
                capacity: params.parse("capacity")?,
            };
            let inst = gen_knapsack_family(family, n, seed, &family_params)
                .map_err(|e| usage(e.to_string()))?;
            Ok(InstanceFile::Knapsack(inst))
        }
        GenKind::UnitIid => {
            params.check_known(&["n", "dist"])?;
            let n: usize = params
                .parse("n")?
                .ok_or_else(|| usage("unit-iid generator requires n=..."))?;
            let dist = parse_dist(params.require("dist")?)?;
            let inst = gen_unit_iid(n, &dist, seed).map_err(|e| usage(e.to_string()))?;
            Ok(InstanceFile::Knapsack(inst))
        }
    }
}

/// Parses a one-line spec: `<kind>:key=value,key=value,...` with a mandatory
/// `seed=` entry so the spec alone reproduces the instance.
pub fn parse_gen_spec(spec: &str) -> Result<InstanceFile, CliError> {
    let (kind_name, body) = spec.split_once(':').unwrap_or((spec, ""));
    let kind = match kind_name {
        "gap" => GenKind::Gap,
        "knapsack" => GenKind::Knapsack,
        "unit-iid" => GenKind::UnitIid,
        other => return Err(usage(format!("unknown generator `{other}`"))),
    };
    let raw: Vec<String> = if body.is_empty() {
        Vec::new()
    } else {
        split_spec_body(body)
    };
    let entries = parse_kv(&raw)?;
    let seed: u64 = entries
        .iter()
        .find(|(k, _)| k == "seed")
        .ok_or_else(|| usage("generator spec requires seed=..."))?
        .1
        .parse()
        .map_err(|e| usage(format!("bad seed: {e}")))?;
    build_instance(kind, &entries, seed)
}

/// Splits on commas except inside a `dist=` value, where commas separate
/// support points (e.g. `unit-iid:n=9,dist=uniform:1,2,5,seed=3`).
fn split_spec_body(body: &str) -> Vec<String> {
    let mut parts: Vec<String> = Vec::new();
    for piece in body.split(',') {
        match parts.last_mut() {
            Some(last) if !piece.contains('=') && last.starts_with("dist=") => {
                last.push(',');
                last.push_str(piece);
            }
            _ => parts.push(piece.to_string()),
        }
    }
    parts
}
