//! Subcommand implementations.

use std::path::Path;

use hs2sd_core::files::round_sig12;
use hs2sd_core::{
    delta_hyperbolicity, hs2sd_distance, nearest_prototype_classify, pairwise_distance_matrix,
    signature_collision_survey, thue_morse_words, AdapterWeights, DeltaMode, DistanceConfig,
    Error, LabeledPointSet, MetricMatrix, PointSetFile,
};

use crate::DistanceOpts;

type Result<T> = std::result::Result<T, Error>;

/// All floats printed by the CLI go through the 12-significant-digit
/// rounding used for golden-file stability. Negative zero (a negated zero
/// logit) prints as plain 0.
fn fmt(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { round_sig12(v) };
    format!("{v}")
}

fn build_config(opts: &DistanceOpts) -> Result<DistanceConfig> {
    let mut cfg = if opts.lambda == "adapter" {
        let path = opts.adapter_weights.as_ref().ok_or(Error::InvalidParameter {
            detail: "--lambda adapter requires --adapter-weights <FILE>".into(),
        })?;
        DistanceConfig::adapter(AdapterWeights::from_path(path)?)
    } else {
        let value: f64 = opts.lambda.parse().map_err(|_| Error::InvalidParameter {
            detail: format!("--lambda must be a number in [0, 1] or \"adapter\", got {:?}", opts.lambda),
        })?;
        DistanceConfig::fixed(value)?
    };
    cfg.tm_terms = opts.tm_terms;
    cfg.normalize_adjacency = opts.normalize_adjacency;
    cfg.canonical_order = opts.canonical_order;
    cfg.symmetrize_lambda = opts.symmetrize_lambda;
    Ok(cfg)
}

pub fn dist(file: &Path, id_a: &str, id_b: &str, opts: &DistanceOpts) -> Result<()> {
    let cfg = build_config(opts)?;
    let file = PointSetFile::from_path(file)?;
    let sets = file.build_sets(opts.curvature)?;
    let a = &sets[file.find(id_a)?];
    let b = &sets[file.find(id_b)?];
    let report = hs2sd_distance(a, b, &cfg)?;
    println!(
        "{{\"d_g\":{},\"d_t\":{},\"lambda\":{},\"total\":{}}}",
        fmt(report.geodesic),
        fmt(report.topological),
        fmt(report.lambda),
        fmt(report.total)
    );
    Ok(())
}

pub fn matrix(file: &Path, opts: &DistanceOpts) -> Result<()> {
    let cfg = build_config(opts)?;
    let file = PointSetFile::from_path(file)?;
    if file.sets.is_empty() {
        return Err(Error::InvalidParameter {
            detail: "matrix needs at least one set".into(),
        });
    }
    let sets = file.build_sets(opts.curvature)?;
    let matrix = pairwise_distance_matrix(&sets, &cfg)?;
    let ids: Vec<&str> = file.sets.iter().map(|s| s.id.as_str()).collect();
    let mut out = String::new();
    out.push_str("id,");
    out.push_str(&ids.join(","));
    out.push('\n');
    for (i, id) in ids.iter().enumerate() {
        out.push_str(id);
        for j in 0..ids.len() {
            out.push(',');
            out.push_str(&fmt(matrix[(i, j)]));
        }
        out.push('\n');
    }
    print!("{out}");
    Ok(())
}

pub fn classify(support_file: &Path, query_file: &Path, opts: &DistanceOpts) -> Result<()> {
    let cfg = build_config(opts)?;
    let supports_file = PointSetFile::from_path(support_file)?;
    let queries_file = PointSetFile::from_path(query_file)?;
    let support_sets = supports_file.build_sets(opts.curvature)?;
    let query_sets = queries_file.build_sets(opts.curvature)?;

    let supports: Vec<LabeledPointSet> = supports_file
        .sets
        .iter()
        .zip(support_sets)
        .map(|(rec, set)| {
            let label = rec.label.clone().ok_or_else(|| Error::InvalidParameter {
                detail: format!("support set {:?} has no label", rec.id),
            })?;
            Ok(LabeledPointSet { label, set })
        })
        .collect::<Result<Vec<_>>>()?;

    let result = nearest_prototype_classify(&query_sets, &supports, &cfg)?;
    if result.lambda_forced_to_one {
        eprintln!(
            "note: query/prototype cardinalities differ; topological term disabled (lambda = 1)"
        );
    }

    println!("query_id,predicted,{}", result.class_labels.join(","));
    let mut correct = 0usize;
    let mut labeled = 0usize;
    for (qi, rec) in queries_file.sets.iter().enumerate() {
        let mut line = format!("{},{}", rec.id, result.predicted[qi]);
        for ci in 0..result.class_labels.len() {
            line.push(',');
            line.push_str(&fmt(result.logits[(qi, ci)]));
        }
        println!("{line}");
        if let Some(expected) = &rec.label {
            labeled += 1;
            if expected == &result.predicted[qi] {
                correct += 1;
            }
        }
    }
    if labeled == queries_file.sets.len() && labeled > 0 {
        println!("accuracy,{}", fmt(correct as f64 / labeled as f64));
    }
    Ok(())
}

fn metric_from_csv(text: &str) -> Result<MetricMatrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|cell| {
                cell.trim().parse::<f64>().map_err(|_| Error::InvalidParameter {
                    detail: format!("line {}: {:?} is not a number", lineno + 1, cell.trim()),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidParameter {
            detail: "CSV distance matrix must be square and nonempty".into(),
        });
    }
    let mut matrix = ndarray::Array2::zeros((n, n));
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            matrix[(i, j)] = *v;
        }
    }
    MetricMatrix::new(matrix)
}

pub fn delta(
    file: &Path,
    set_id: Option<&str>,
    mode: &str,
    samples: usize,
    seed: u64,
    curvature: Option<f64>,
) -> Result<()> {
    // flags are validated before any computation starts
    let mode = match mode {
        "exact" => DeltaMode::Exact,
        "sampled" => DeltaMode::Sampled { samples, seed },
        other => {
            return Err(Error::InvalidParameter {
                detail: format!("--mode must be exact or sampled, got {other:?}"),
            })
        }
    };
    let metric = if file.extension().is_some_and(|e| e == "csv") {
        metric_from_csv(&std::fs::read_to_string(file)?)?
    } else {
        let file = PointSetFile::from_path(file)?;
        let idx = match set_id {
            Some(id) => file.find(id)?,
            None if file.sets.len() == 1 => 0,
            None => {
                return Err(Error::InvalidParameter {
                    detail: format!(
                        "file holds {} sets; pick one with --set-id",
                        file.sets.len()
                    ),
                })
            }
        };
        let sets = file.build_sets(curvature)?;
        MetricMatrix::from_point_set(&sets[idx])?
    };
    let estimate = delta_hyperbolicity(&metric, mode)?;
    let relative = match estimate.relative {
        Some(r) => fmt(r),
        None => "null".into(),
    };
    println!(
        "{{\"delta\":{},\"mode\":\"{}\",\"quadruples_evaluated\":{},\"relative\":{}}}",
        fmt(estimate.delta),
        estimate.mode,
        estimate.quadruples_evaluated,
        relative
    );
    Ok(())
}

pub fn tree_survey(n: usize, tm_terms: usize, max_power: Option<usize>) -> Result<()> {
    let words = thue_morse_words(tm_terms);
    let report = signature_collision_survey(n, &words, max_power)?;
    println!("{}", report.to_json_string());
    Ok(())
}
