use std::io::Write;
use std::path::Path;

use hypertree::boundary::{build_full, build_kernel, build_reduced};
use hypertree::enumerate::{check_budget, enumerate_hypertrees, kalai_count};
use hypertree::exactla::gram_det;
use hypertree::harness::{
    annealed_histogram, cohen_lenstra_report, compare_report, exact_ball_law, mean_and_variance,
    quenched_statistic, serialize_biguint, BallExperiment, BallHistogram, LimitLaw,
};
use hypertree::par::{map_trials, trial_rng, Exec, Trials};
use hypertree::sampler::{DppSampler, Verify};
use hypertree::skeleton::ball_distribution;
use hypertree::treestats::{CanonicalCode, SemiKaryTree};
use hypertree::Face;
use num_bigint::{BigInt, BigUint};
use serde::{Deserialize, Serialize};

use crate::output::{CliError, CliResult, Format, Sink, SCHEMA_VERSION};
use crate::{Command, MatrixArg, Reference, RunConfig};

/// Trials drawn per parallel batch while streaming samples.
const SAMPLE_BATCH: u64 = 4096;

pub fn dispatch(config: &RunConfig) -> CliResult<()> {
    let sink = Sink::new(config.global.out.as_deref());
    let g = &config.global;
    match &config.command {
        Command::Enumerate { n, k } => enumerate(config, &sink, *n, *k),
        Command::Sample { n, k, trials, verify } => sample(config, &sink, *n, *k, *trials, (*verify).into()),
        Command::Skeleton {
            k,
            depth,
            trials,
            choice,
            max_depth,
        } => {
            let hist = ball_distribution(*k, *depth, Trials::new(*trials, g.seed), (*choice).into(), *max_depth)?;
            write_histogram(config, &sink, &hist)
        }
        Command::LimitProb { k, tree } => limit_prob(config, &sink, *k, tree),
        Command::Compare {
            n,
            k,
            depth,
            trials,
            roots,
            source,
            reference,
            max_children,
            max_vertices,
        } => {
            let exp = BallExperiment {
                roots: *roots,
                source: (*source).into(),
                mode: g.mode_for(*n),
                exec: Exec::Parallel,
                ..BallExperiment::new(*n, *k, *depth, *trials, g.seed)
            };
            let hist = annealed_histogram(&exp)?;
            let law = match reference {
                Reference::Limit => LimitLaw::skeleton(
                    *k,
                    *depth,
                    *max_children,
                    *max_vertices,
                    hist.iter().map(|(c, _)| c),
                )?,
                Reference::Exact => LimitLaw::from_exact(*k, *depth, &exact_ball_law(*n, *k, *depth, g.budget)?),
            };
            let report = compare_report(&hist, &law)?;
            match g.format {
                Format::Json => sink.write_json(config, &report)?,
                Format::Csv => sink.write_csv(
                    &["code", "tree", "count", "empirical", "reference", "expected", "z", "tested"],
                    report.rows.iter().map(|r| {
                        [
                            r.code.to_string(),
                            r.tree.to_string(),
                            r.count.to_string(),
                            r.empirical.to_string(),
                            r.limit.to_string(),
                            r.expected.to_string(),
                            r.z.map_or(String::new(), |z| z.to_string()),
                            r.tested.to_string(),
                        ]
                    }),
                )?,
            }
            if sink.is_file() {
                print!("{}", report.to_text());
            }
            Ok(())
        }
        Command::Quenched {
            n,
            k,
            depth,
            trials,
            target,
            star,
            tree,
            source,
        } => {
            let target = match (target, star, tree) {
                (Some(code), _, _) => CanonicalCode::parse(code)?,
                (None, Some(d), _) => SemiKaryTree::star(*k, *d).code(),
                (None, None, Some(path)) => SemiKaryTree::from_parents(*k, &read_parents(path)?)?.code(),
                (None, None, None) => unreachable!("validated"),
            };
            let exp = BallExperiment {
                source: (*source).into(),
                mode: g.mode_for(*n),
                exec: Exec::Parallel,
                ..BallExperiment::new(*n, *k, *depth, *trials, g.seed)
            };
            let values = quenched_statistic(&exp, &target)?;
            let (mean, variance) = mean_and_variance(&values);
            match g.format {
                Format::Json => sink.write_json(
                    config,
                    QuenchedResult {
                        target,
                        mean,
                        variance,
                        values,
                    },
                ),
                Format::Csv => sink.write_csv(
                    &["trial", "fraction"],
                    values.iter().enumerate().map(|(t, v)| [t.to_string(), v.to_string()]),
                ),
            }
        }
        Command::CohenLenstra { n, k, p, trials } => {
            let report = cohen_lenstra_report(*n, *k, *p, *trials, g.seed, Exec::Parallel)?;
            match g.format {
                Format::Json => sink.write_json(config, &report),
                Format::Csv => sink.write_csv(
                    &["sylow_type", "count", "frequency", "heuristic"],
                    report.rows.iter().map(|r| {
                        let ty: Vec<String> = r.sylow_type.iter().map(u32::to_string).collect();
                        [ty.join(" "), r.count.to_string(), r.frequency.to_string(), r.heuristic.to_string()]
                    }),
                ),
            }
        }
        Command::KalaiCheck { n, k } => kalai_check(config, &sink, *n, *k),
        Command::Dump { n, k, matrix } => {
            let out = sink.open()?;
            match matrix {
                MatrixArg::Boundary => build_full(*n, *k)?.write_csv(out)?,
                MatrixArg::Reduced => build_reduced(*n, *k)?.write_csv(out)?,
                MatrixArg::Kernel => build_kernel(*n, *k, g.mode_for(*n))?.write_csv(out)?,
            }
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct QuenchedResult {
    target: CanonicalCode,
    mean: f64,
    variance: f64,
    values: Vec<f64>,
}

#[derive(Serialize)]
struct Entry<'a> {
    faces: &'a [Face],
    #[serde(serialize_with = "serialize_biguint")]
    homology_order: &'a BigUint,
}

#[derive(Serialize)]
struct EnumerateResult<'a> {
    n: usize,
    k: usize,
    #[serde(serialize_with = "serialize_biguint")]
    total_weight: &'a BigUint,
    entries: Vec<Entry<'a>>,
}

fn enumerate(config: &RunConfig, sink: &Sink, n: usize, k: usize) -> CliResult<()> {
    let trees = enumerate_hypertrees(n, k, config.global.budget)?;
    let orders: Vec<&BigUint> = trees
        .iter()
        .map(|t| t.homology_order.as_ref().expect("enumeration computes orders"))
        .collect();
    let total: BigUint = orders.iter().map(|&h| h * h).sum();
    match config.global.format {
        Format::Json => sink.write_json(
            config,
            EnumerateResult {
                n,
                k,
                total_weight: &total,
                entries: trees
                    .iter()
                    .zip(&orders)
                    .map(|(t, h)| Entry {
                        faces: &t.faces,
                        homology_order: h,
                    })
                    .collect(),
            },
        ),
        Format::Csv => sink.write_csv(
            &["faces", "homology_order", "probability"],
            trees.iter().zip(&orders).map(|(t, &h)| {
                let p = num_rational::BigRational::new(BigInt::from(h * h), BigInt::from(total.clone()));
                [faces_json(&t.faces), h.to_string(), p.to_string()]
            }),
        ),
    }
}

fn faces_json(faces: &[Face]) -> String {
    serde_json::to_string(faces).expect("faces serialize")
}

#[derive(Serialize)]
struct Header<'a> {
    schema_version: u32,
    config: &'a RunConfig,
}

#[derive(Serialize)]
struct SampleLine<'a> {
    trial: u64,
    faces: &'a [Face],
    #[serde(serialize_with = "serialize_order")]
    homology_order: &'a Option<BigUint>,
}

fn serialize_order<S: serde::Serializer>(v: &&Option<BigUint>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(h) => serialize_biguint(h, s),
        None => s.serialize_none(),
    }
}

fn sample(config: &RunConfig, sink: &Sink, n: usize, k: usize, trials: u64, verify: Verify) -> CliResult<()> {
    let seed = config.global.seed;
    let sampler = DppSampler::new(n, k, config.global.mode_for(n))?;
    let mut out = sink.open()?;
    let format = config.global.format;
    match format {
        Format::Json => {
            // a header line carries the schema version and configuration
            let header = Header {
                schema_version: SCHEMA_VERSION,
                config,
            };
            writeln!(out, "{}", serde_json::to_string(&header)?)?;
        }
        Format::Csv => writeln!(out, "trial,faces,homology_order")?,
    }
    let mut start = 0;
    while start < trials {
        let len = SAMPLE_BATCH.min(trials - start);
        let batch = map_trials(Exec::Parallel, len, |i| {
            let t = start + i;
            sampler.draw(&mut trial_rng(seed, t), t, verify)
        });
        for (i, drawn) in batch.into_iter().enumerate() {
            let s = drawn?;
            let t = start + i as u64;
            match format {
                Format::Json => {
                    let line = SampleLine {
                        trial: t,
                        faces: &s.faces,
                        homology_order: &s.homology_order,
                    };
                    writeln!(out, "{}", serde_json::to_string(&line)?)?;
                }
                Format::Csv => {
                    let order = s.homology_order.as_ref().map_or(String::new(), |h| h.to_string());
                    writeln!(out, "{t},\"{}\",{order}", faces_json(&s.faces))?;
                }
            }
        }
        start += len;
    }
    out.flush()?;
    Ok(())
}

fn write_histogram(config: &RunConfig, sink: &Sink, hist: &BallHistogram) -> CliResult<()> {
    match config.global.format {
        Format::Json => sink.write_json(config, hist),
        Format::Csv => sink.write_csv(
            &["code", "tree", "count", "frequency"],
            hist.iter().map(|(code, count)| {
                [
                    code.to_string(),
                    code.is_tree().to_string(),
                    count.to_string(),
                    hist.frequency(code).to_string(),
                ]
            }),
        ),
    }
}

/// A tree file: either a bare parent array or `{"parents": [...]}`, with
/// `null` marking the root.
#[derive(Deserialize)]
#[serde(untagged)]
enum TreeFile {
    Bare(Vec<Option<usize>>),
    Wrapped { parents: Vec<Option<usize>> },
}

fn read_parents(path: &Path) -> CliResult<Vec<Option<usize>>> {
    let text = std::fs::read_to_string(path)?;
    let file: TreeFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: not a parent array: {e}", path.display())))?;
    Ok(match file {
        TreeFile::Bare(p) | TreeFile::Wrapped { parents: p } => p,
    })
}

#[derive(Serialize)]
struct LimitResult {
    code: CanonicalCode,
    #[serde(flatten)]
    breakdown: hypertree::treestats::LimitBreakdown,
}

fn limit_prob(config: &RunConfig, sink: &Sink, k: usize, path: &Path) -> CliResult<()> {
    let tree = SemiKaryTree::from_parents(k, &read_parents(path)?)?;
    if tree.depth() % 2 == 1 {
        return Err(CliError::Usage(format!("tree depth must be even, got {}", tree.depth())));
    }
    let result = LimitResult {
        code: tree.code(),
        breakdown: tree.limit_breakdown(),
    };
    match config.global.format {
        Format::Json => sink.write_json(config, &result),
        Format::Csv => {
            let b = &result.breakdown;
            sink.write_csv(
                &["code", "k", "depth", "m_star", "aut", "v_k", "v_k_minus_1_inner", "probability"],
                [[
                    result.code.to_string(),
                    b.k.to_string(),
                    b.depth.to_string(),
                    b.m_star.to_string(),
                    b.aut.to_string(),
                    b.v_k.to_string(),
                    b.v_k_minus_1_inner.to_string(),
                    b.probability.to_string(),
                ]],
            )
        }
    }
}

#[derive(Serialize)]
struct KalaiResult {
    #[serde(serialize_with = "serialize_biguint")]
    formula: BigUint,
    #[serde(serialize_with = "serialize_biguint")]
    enumerated: BigUint,
    #[serde(serialize_with = "serialize_bigint")]
    gram_determinant: BigInt,
    agree: bool,
}

fn serialize_bigint<S: serde::Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    match i64::try_from(v) {
        Ok(small) => s.serialize_i64(small),
        Err(_) => s.serialize_str(&v.to_string()),
    }
}

fn kalai_check(config: &RunConfig, sink: &Sink, n: usize, k: usize) -> CliResult<()> {
    check_budget(n, k, config.global.budget)?;
    let formula = kalai_count(n, k);
    let enumerated: BigUint = enumerate_hypertrees(n, k, config.global.budget)?
        .iter()
        .filter_map(|t| t.weight())
        .sum();
    let gram = gram_det(&build_reduced(n, k)?.to_int_matrix());
    let agree = enumerated == formula && gram == BigInt::from(formula.clone());
    let relation = if enumerated == formula { "=" } else { "!=" };
    println!("{enumerated} {relation} {formula}");
    if sink.is_file() {
        sink.write_json(
            config,
            KalaiResult {
                formula: formula.clone(),
                enumerated: enumerated.clone(),
                gram_determinant: gram.clone(),
                agree,
            },
        )?;
    }
    if agree {
        Ok(())
    } else {
        Err(CliError::Failed(format!(
            "enumeration gives {enumerated}, Gram determinant {gram}, formula {formula}"
        )))
    }
}
