//! Library half of the `shearer` binary: argument types, file formats and
//! the command dispatcher. Outputs are byte-deterministic for identical
//! inputs and seeds.

pub mod args;
pub mod report;
pub mod spacefile;

use std::fmt;
use std::path::Path;

use args::{AuditCmd, Cli, ClusterCmd, Command, Format, LllCmd, Method, Model, PhaseCmd, SimCmd, ZCmd};
use report::{emit, fmt_f64, json_str, json_str_array, JsonObject};
use spacefile::{parse_measure_file, parse_queries, parse_space_file};

use shearer_core::lll::{
    check_inflation, check_kp, check_symmetric, euclidean_certificate, BoundVariant,
};
use shearer_core::sim::{
    empirical_stats, HardSphereSampler, MaternSampler, MaternVariant, Query, ShearerSampler,
    ZeroDependentSampler, ZeroPhaseSampler,
};
use shearer_core::space::RegionSet;
use shearer_core::zfun::{
    classify_phase, critical_lambda, phase_scan, z_exact, z_ratio, ZMethod,
};
use shearer_core::{AtomicMeasure, FiniteMetricSpace};

/// CLI failure: domain errors exit 1 (usage errors exit 2 via clap).
#[derive(Debug)]
pub enum CliError {
    Core(shearer_core::Error),
    Input(String),
    Io(std::io::Error),
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Input(msg) => write!(f, "{msg}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<shearer_core::Error> for CliError {
    fn from(e: shearer_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

fn region_from(
    space: &FiniteMetricSpace,
    ids: &Option<Vec<String>>,
) -> Result<RegionSet, CliError> {
    match ids {
        Some(ids) => Ok(RegionSet::from_ids(space, ids)?),
        None => Ok(space.full_region()),
    }
}

fn region_required(space: &FiniteMetricSpace, ids: &[String]) -> Result<RegionSet, CliError> {
    // clap's value delimiter turns a bare `--A ""` into one empty id.
    let cleaned: Vec<&String> = ids.iter().filter(|s| !s.is_empty()).collect();
    Ok(RegionSet::from_ids(space, &cleaned)?)
}

/// Runs one parsed invocation. Every artifact goes through [`emit`].
pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Z { cmd } => match cmd {
            ZCmd::Eval {
                space,
                region,
                method,
                out,
            } => {
                let (s, m) = parse_space_file(&space)?;
                let r = region_required(&s, &region)?;
                let method = match method {
                    Method::Recursion => ZMethod::Recursion,
                    Method::Enumeration => ZMethod::Enumeration,
                };
                let z = z_exact(&s, &m, r, method)?;
                let doc = JsonObject::new()
                    .field_raw("region", &json_str_array(&r.ids(&s)))
                    .field_num("Z", z)
                    .finish();
                emit_line(out.as_deref(), &doc)
            }
            ZCmd::Ratio { space, a, b, out } => {
                let (s, m) = parse_space_file(&space)?;
                let ra = region_required(&s, &a)?;
                let rb = region_required(&s, &b)?;
                let z = z_ratio(&s, &m, ra, rb)?;
                let doc = JsonObject::new()
                    .field_raw("A", &json_str_array(&ra.ids(&s)))
                    .field_raw("B", &json_str_array(&rb.ids(&s)))
                    .field_num("z", z)
                    .finish();
                emit_line(out.as_deref(), &doc)
            }
        },
        Command::Phase { cmd } => match cmd {
            PhaseCmd::Classify { space, out } => {
                let (s, m) = parse_space_file(&space)?;
                let label = classify_phase(&s, &m)?;
                let witness = match &label.witness {
                    Some(w) => json_str_array(&w.ids(&s)),
                    None => "null".into(),
                };
                let doc = JsonObject::new()
                    .field_str("label", label.phase.as_str())
                    .field_raw("witness", &witness)
                    .field_opt_num("witness_value", label.witness_value)
                    .finish();
                emit_line(out.as_deref(), &doc)
            }
            PhaseCmd::Scan {
                space,
                lambda_grid,
                region,
                format,
                out,
            } => {
                let (s, m) = parse_space_file(&space)?;
                let r = region_from(&s, &region)?;
                let lambdas = parse_lambda_grid(&lambda_grid)?;
                let rows = phase_scan(&s, &m, r, &lambdas)?;
                let artifact = match format {
                    Format::Csv => {
                        let mut text = String::from("lambda,Z,phase\n");
                        for row in rows {
                            text.push_str(&format!(
                                "{},{},{}\n",
                                fmt_f64(row.lambda),
                                fmt_f64(row.z),
                                row.phase.as_str()
                            ));
                        }
                        text
                    }
                    Format::Json => {
                        let body: Vec<String> = rows
                            .iter()
                            .map(|row| {
                                JsonObject::new()
                                    .field_num("lambda", row.lambda)
                                    .field_num("Z", row.z)
                                    .field_str("phase", row.phase.as_str())
                                    .finish()
                            })
                            .collect();
                        format!("[{}]\n", body.join(","))
                    }
                };
                emit(out.as_deref(), &artifact)?;
                Ok(())
            }
        },
        Command::Critical {
            space,
            region,
            tol,
            out,
        } => {
            let (s, m) = parse_space_file(&space)?;
            let r = region_from(&s, &region)?;
            let lambda = critical_lambda(&s, &m, r, tol)?;
            let doc = JsonObject::new()
                .field_raw("region", &json_str_array(&r.ids(&s)))
                .field_num("lambda_critical", lambda)
                .field_num("tol", tol)
                .finish();
            emit_line(out.as_deref(), &doc)
        }
        Command::Cluster { cmd } => match cmd {
            ClusterCmd::Expand {
                space,
                a,
                b,
                order,
                format,
                out,
            } => {
                let (s, m) = parse_space_file(&space)?;
                let ra = region_required(&s, &a)?;
                let rb = region_required(&s, &b)?;
                let series = shearer_core::cluster::log_z_series(&s, &m, ra, rb, order)?;
                let sums = series.partial_sums();
                let artifact = match format {
                    Format::Csv => {
                        let mut text = String::from("n,term,partial_sum,exact_minus_log_z\n");
                        for (i, (&t, &p)) in series.terms.iter().zip(&sums).enumerate() {
                            let exact = series
                                .exact_minus_log_z
                                .map(fmt_f64)
                                .unwrap_or_default();
                            text.push_str(&format!(
                                "{},{},{},{exact}\n",
                                i + 1,
                                fmt_f64(t),
                                fmt_f64(p)
                            ));
                        }
                        text
                    }
                    Format::Json => {
                        let terms: Vec<String> =
                            series.terms.iter().map(|&t| fmt_f64(t)).collect();
                        let partial: Vec<String> = sums.iter().map(|&p| fmt_f64(p)).collect();
                        let doc = JsonObject::new()
                            .field_raw("terms", &format!("[{}]", terms.join(",")))
                            .field_raw("partial_sums", &format!("[{}]", partial.join(",")))
                            .field_opt_num("exact_minus_log_z", series.exact_minus_log_z)
                            .finish();
                        format!("{doc}\n")
                    }
                };
                emit(out.as_deref(), &artifact)?;
                Ok(())
            }
        },
        Command::Lll { cmd } => {
            let (cert, out) = match cmd {
                LllCmd::Symmetric { space, out } => {
                    let (s, m) = parse_space_file(&space)?;
                    (certificate_json(&s, &check_symmetric(&s, &m)?), out)
                }
                LllCmd::Inflation { space, alpha, out } => {
                    let (s, m) = parse_space_file(&space)?;
                    (certificate_json(&s, &check_inflation(&s, &m, alpha)?), out)
                }
                LllCmd::Kp {
                    space,
                    n_measure,
                    out,
                } => {
                    let (s, m) = parse_space_file(&space)?;
                    let n = parse_measure_file(&n_measure, &s)?;
                    (certificate_json(&s, &check_kp(&s, &m, &n)?), out)
                }
                LllCmd::Euclidean {
                    lambda,
                    dim,
                    tol,
                    out,
                } => {
                    let cert = euclidean_certificate(lambda, dim, tol)?;
                    // No space is involved; serialise directly.
                    let doc = match &cert.variant {
                        BoundVariant::Euclidean {
                            lambda,
                            alpha,
                            volume,
                            dim,
                        } => JsonObject::new()
                            .field_str("variant", "euclidean")
                            .field_bool("condition_holds", true)
                            .field_num("lambda", *lambda)
                            .field_int("dim", *dim as i64)
                            .field_num("volume", *volume)
                            .field_num("alpha", *alpha)
                            .field_num("free_energy_density_bound", *alpha)
                            .finish(),
                        _ => unreachable!("euclidean_certificate builds the euclidean variant"),
                    };
                    (doc, out)
                }
            };
            emit_line(out.as_deref(), &cert)
        }
        Command::Sim { cmd } => match cmd {
            SimCmd::Run {
                model,
                space,
                samples,
                seed,
                queries,
                max_attempts,
                format,
                out,
            } => {
                let (s, m) = parse_space_file(&space)?;
                let query_list = parse_queries(&queries, &s)?;
                let report = run_model(model, &s, &m, samples, seed, &query_list, max_attempts)?;
                let artifact = match format {
                    Format::Csv => {
                        let mut text =
                            String::from("query_kind,query_args,estimate,stderr,n_samples,seed\n");
                        for r in &report.results {
                            text.push_str(&format!(
                                "{},{},{},{},{},{}\n",
                                r.query.kind(),
                                csv_field(&r.query.describe(&s)),
                                fmt_f64(r.estimate),
                                fmt_f64(r.std_error),
                                report.n_samples,
                                report.seed
                            ));
                        }
                        text
                    }
                    Format::Json => {
                        let rows: Vec<String> = report
                            .results
                            .iter()
                            .map(|r| {
                                JsonObject::new()
                                    .field_str("query_kind", r.query.kind())
                                    .field_str("query_args", &r.query.describe(&s))
                                    .field_num("estimate", r.estimate)
                                    .field_num("stderr", r.std_error)
                                    .finish()
                            })
                            .collect();
                        let doc = JsonObject::new()
                            .field_int("n_samples", report.n_samples as i64)
                            .field_int("seed", report.seed as i64)
                            .field_str("rng_family", report.rng_family)
                            .field_raw("results", &format!("[{}]", rows.join(",")))
                            .finish();
                        format!("{doc}\n")
                    }
                };
                emit(out.as_deref(), &artifact)?;
                Ok(())
            }
        },
        Command::Audit { cmd: AuditCmd::All } => {
            let outcomes = shearer_core::audit::run_all();
            let mut failed = 0;
            for o in &outcomes {
                let status = if o.passed { "PASS" } else { "FAIL" };
                println!("{:>2}  {status}  {:<32} {}", o.id, o.name, o.details);
                if !o.passed {
                    failed += 1;
                }
            }
            if failed > 0 {
                return Err(CliError::input(format!("{failed} audit checks failed")));
            }
            Ok(())
        }
    }
}

fn emit_line(out: Option<&Path>, doc: &str) -> Result<(), CliError> {
    emit(out, &format!("{doc}\n"))?;
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn parse_lambda_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = |t: &str| CliError::input(format!("cannot parse fugacity grid `{t}`"));
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(bad(text));
        }
        let start: f64 = parts[0].parse().map_err(|_| bad(text))?;
        let stop: f64 = parts[1].parse().map_err(|_| bad(text))?;
        let step: f64 = parts[2].parse().map_err(|_| bad(text))?;
        if step.is_nan() || step <= 0.0 || stop < start {
            return Err(bad(text));
        }
        let mut grid = Vec::new();
        let mut k = 0u64;
        loop {
            let v = start + step * k as f64;
            if v > stop + 1e-12 * step {
                break;
            }
            grid.push(v);
            k += 1;
        }
        Ok(grid)
    } else {
        text.split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| bad(text)))
            .collect()
    }
}

fn run_model(
    model: Model,
    space: &FiniteMetricSpace,
    measure: &AtomicMeasure,
    samples: u64,
    seed: u64,
    queries: &[Query],
    max_attempts: u64,
) -> Result<shearer_core::sim::SampleReport, CliError> {
    let report = match model {
        Model::Shearer => {
            let sampler = ShearerSampler::new(space, measure)?;
            empirical_stats(&sampler, samples, seed, queries, Some(measure))?
        }
        Model::Zerodep => {
            let sampler = ZeroDependentSampler::new(space, measure)?;
            empirical_stats(&sampler, samples, seed, queries, Some(measure))?
        }
        Model::Zerophase => {
            let sampler = ZeroPhaseSampler::new(space, measure)?;
            empirical_stats(&sampler, samples, seed, queries, Some(measure))?
        }
        Model::Hardsphere => {
            // The spatial intensity of the conditioned model differs from
            // the fugacity, so margin queries have no measure here.
            let sampler = HardSphereSampler::new(space, measure, max_attempts)?;
            empirical_stats(&sampler, samples, seed, queries, None)?
        }
        Model::Matern1 | Model::Matern2 | Model::Matern3 => {
            let variant = match model {
                Model::Matern1 => MaternVariant::I,
                Model::Matern2 => MaternVariant::II,
                _ => MaternVariant::III,
            };
            let sampler = MaternSampler::new(space, measure, variant)?;
            // The file measure is the underlying field, not the thinned
            // intensity, so margin queries have no measure here either.
            empirical_stats(&sampler, samples, seed, queries, None)?
        }
    };
    Ok(report)
}

fn certificate_json(
    space: &FiniteMetricSpace,
    cert: &shearer_core::lll::BoundCertificate,
) -> String {
    let witness = match &cert.witness {
        Some(w) => json_str_array(&w.ids(space)),
        None => "null".into(),
    };
    let detail = match &cert.witness_detail {
        Some(d) => json_str(d),
        None => "null".into(),
    };
    let base = JsonObject::new()
        .field_str("variant", cert.variant.name())
        .field_bool("condition_holds", cert.condition_holds);
    let with_variant = match &cert.variant {
        BoundVariant::Symmetric {
            k,
            threshold,
            max_unit_mass,
            mass_exact,
        } => base
            .field_int("K", *k as i64)
            .field_num("threshold", *threshold)
            .field_num("max_unit_diameter_mass", *max_unit_mass)
            .field_bool("mass_exact", *mass_exact),
        BoundVariant::Inflation {
            alpha,
            inflated_phase,
        } => base
            .field_num("alpha", *alpha)
            .field_str("inflated_phase", inflated_phase.as_str()),
        BoundVariant::KoteckyPreiss {
            strong_form_holds,
            cliques_exact,
            ..
        } => base
            .field_bool("strong_form_holds", *strong_form_holds)
            .field_bool("cliques_exact", *cliques_exact),
        BoundVariant::Euclidean {
            lambda,
            alpha,
            volume,
            dim,
        } => base
            .field_num("lambda", *lambda)
            .field_int("dim", *dim as i64)
            .field_num("volume", *volume)
            .field_num("alpha", *alpha),
    };
    with_variant
        .field_raw("witness", &witness)
        .field_raw("witness_detail", &detail)
        .finish()
}
