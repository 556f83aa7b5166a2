//! The compute subcommands. Each returns the bytes it would write.

use anyhow::Result;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::json;

use badic_qmc::discrepancy::{
    composite_bound, empirical_vs_bound, star_discrepancy_exact, star_discrepancy_prefixes_1d, write_bound_table_csv,
};
use badic_qmc::engine::{generate_block, point_to_rational, points_to_json, write_points_csv};
use badic_qmc::quality::{t_profile, verify_t_sequence};

use crate::config::{floor_log, Format, RunConfig, Setup};

pub fn gen(config: &RunConfig, setup: &Setup) -> Result<Vec<u8>> {
    let points = generate_block(&setup.set, &setup.bij, &setup.seq, config.start, config.n, config.m)?;
    let mut out = Vec::new();
    match config.format {
        Format::Csv => write_points_csv(&mut out, &points, config.start, config.mode.into())?,
        Format::Json => {
            out.extend_from_slice(points_to_json(&points, config.start).as_bytes());
            out.push(b'\n');
        }
    }
    Ok(out)
}

/// T-profile up to `m`, plus net checks of blocks `k` for every `m' <= m` when a range is given.
pub fn quality(config: &RunConfig, setup: &Setup) -> Result<Vec<u8>> {
    let profile = t_profile(&setup.set, config.m)?;
    let mut report = json!({ "profile": profile, "t": profile.t() });
    if let Some([lo, hi]) = config.k {
        let mut nets = Vec::new();
        for m in 1..=config.m as u32 {
            nets.extend(verify_t_sequence(&setup.set, &setup.bij, &setup.seq, m, lo..=hi, Some(&profile))?);
        }
        report["seq"] = json!(setup.seq.spec());
        report["pass"] = json!(nets.iter().all(|r| r.pass));
        report["nets"] = json!(nets);
    }
    Ok(format!("{report}\n").into_bytes())
}

#[derive(Serialize)]
struct DiscRow {
    #[serde(rename = "N")]
    n: u64,
    #[serde(rename = "D*")]
    d_star: String,
    #[serde(rename = "D*_float")]
    d_star_float: f64,
    #[serde(rename = "ND*")]
    nd_star: String,
}

/// Exact star discrepancy of the first `N` points (each `N` in `ns`), truncated to `m` digits.
pub fn disc(config: &RunConfig, setup: &Setup) -> Result<Vec<u8>> {
    let ns = config.ns.clone().unwrap_or_else(|| vec![config.n]);
    let max = config.max_points();
    let points = generate_block(&setup.set, &setup.bij, &setup.seq, config.start, max, config.m)?;
    let coords: Vec<Vec<BigRational>> =
        points.iter().map(|p| (1..=p.s()).map(|i| point_to_rational(p, i)).collect()).collect();
    let results = if config.s == 1 {
        let xs: Vec<BigRational> = coords.iter().map(|c| c[0].clone()).collect();
        let sizes: Vec<usize> = ns.iter().map(|&n| n as usize).collect();
        star_discrepancy_prefixes_1d(&xs, &sizes)?
    } else {
        ns.iter().map(|&n| star_discrepancy_exact(&coords[..n as usize])).collect::<badic_qmc::Result<_>>()?
    };
    let rows: Vec<DiscRow> = ns
        .iter()
        .zip(&results)
        .map(|(&n, r)| DiscRow {
            n,
            d_star: r.value.to_string(),
            d_star_float: r.value_f64(),
            nd_star: (&r.value * BigRational::from_integer(n.into())).to_string(),
        })
        .collect();
    let mut out = Vec::new();
    match config.format {
        Format::Csv => {
            out.extend_from_slice(b"N,D*,D*_float,ND*\n");
            for r in &rows {
                out.extend_from_slice(format!("{},{},{},{}\n", r.n, r.d_star, r.d_star_float, r.nd_star).as_bytes());
            }
        }
        Format::Json => out.extend_from_slice(format!("{}\n", serde_json::to_string(&rows)?).as_bytes()),
    }
    Ok(out)
}

/// Composite bound for `s_n = n + alpha`: the term breakdown at `N`, or with `ns` a table of
/// exact `N D*_N` (points at precision `m`) against the bound.
pub fn bound(config: &RunConfig, setup: &Setup) -> Result<Vec<u8>> {
    let q = setup.set.field().order();
    let r = floor_log(config.max_points(), q) as usize;
    let profile = t_profile(&setup.set, r)?;
    let mut out = Vec::new();
    match &config.ns {
        None => {
            let breakdown = composite_bound(&setup.alpha, &profile, q, config.s, config.n)?;
            out.extend_from_slice(format!("{}\n", breakdown.to_json()).as_bytes());
        }
        Some(ns) => {
            let rows = empirical_vs_bound(&setup.set, &setup.bij, &setup.alpha, &profile, ns, config.m)?;
            match config.format {
                Format::Csv => write_bound_table_csv(&mut out, &rows)?,
                Format::Json => {
                    let with_ratio: Vec<_> = rows
                        .iter()
                        .map(|row| {
                            let mut v = json!(row);
                            v["ratio"] = json!(
                                row.nd_star.to_f64().unwrap_or(f64::NAN) / row.bound.to_f64().unwrap_or(f64::NAN)
                            );
                            v
                        })
                        .collect();
                    out.extend_from_slice(format!("{}\n", serde_json::to_string(&with_ratio)?).as_bytes());
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Command, RunArgs};

    fn run(command: Command, args: RunArgs, f: fn(&RunConfig, &Setup) -> Result<Vec<u8>>) -> String {
        let config = RunConfig::resolve(command, &args).unwrap();
        let setup = config.prepare().unwrap();
        String::from_utf8(f(&config, &setup).unwrap()).unwrap()
    }

    #[test]
    fn van_der_corput_prefix() {
        let args = RunArgs { m: Some(4), n: Some(8), ..RunArgs::default() };
        let out = run(Command::Gen, args, gen);
        assert_eq!(out, "n,x1\n0,0/16\n1,8/16\n2,4/16\n3,12/16\n4,2/16\n5,10/16\n6,6/16\n7,14/16\n");
    }

    #[test]
    fn quality_reports() {
        let out = run(Command::Quality, RunArgs { m: Some(4), ..RunArgs::default() }, quality);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["profile"]["T"], json!([0, 0, 0, 0, 0]));
        assert_eq!(v["t"], json!(0));
        assert!(v.get("nets").is_none());
        let args = RunArgs { matrix: Some("pairs".into()), m: Some(5), k: Some([0, 1]), ..RunArgs::default() };
        let v: serde_json::Value = serde_json::from_str(&run(Command::Quality, args, quality)).unwrap();
        assert_eq!(v["profile"]["T"], json!([0, 0, 1, 1, 2, 2]));
        assert_eq!(v["pass"], json!(true));
        assert_eq!(v["nets"].as_array().unwrap().len(), 10);
    }

    #[test]
    fn disc_van_der_corput() {
        let args = RunArgs { n: Some(4), m: Some(4), ..RunArgs::default() };
        assert_eq!(run(Command::Disc, args, disc), "N,D*,D*_float,ND*\n4,1/4,0.25,1\n");
    }

    #[test]
    fn bound_spot_value() {
        let v: serde_json::Value = serde_json::from_str(&run(Command::Bound, RunArgs::default(), bound)).unwrap();
        assert_eq!(v["total"], json!("5"));
        let args = RunArgs { ns: Some(vec![1, 9, 27]), format: Some(Format::Csv), ..RunArgs::default() };
        let table = run(Command::Bound, args, bound);
        assert_eq!(table.lines().count(), 4);
        assert!(table.lines().nth(2).unwrap().starts_with("9,"));
    }
}
