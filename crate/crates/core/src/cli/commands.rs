use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::data::{zscore_normalize, CentroidSet, DataMatrix, Dataset};
use crate::datagen::{case_study, generate, imbalanced_suite, MixtureSpec, Suite};
use crate::engine::{alpha_scan, auto_alpha, kmeanspp_init, run, SkmConfig};
use crate::error::SkmError;
use crate::metrics::EvalReport;
use crate::minibatch::{stream_run, StreamMode};
use crate::objectives::{landscape_scan_1d, linear_grid};
use crate::smoothmin::SmootherSpec;

use super::{
    bench, AlgorithmArgs, AlphaScanArgs, ClusterArgs, CliError, CliResult, Command, DataSource, EvalArgs,
    GenArgs, LandscapeArgs, RunArgs, StreamArgs,
};

pub(super) fn dispatch(command: Command) -> CliResult<()> {
    match command {
        Command::Gen(a) => gen(a),
        Command::Cluster(a) => cluster(a),
        Command::Eval(a) => eval(a),
        Command::Landscape(a) => landscape(a),
        Command::AlphaScan(a) => alpha_scan_cmd(a),
        Command::Stream(a) => stream(a),
        Command::Bench(a) => bench::bench(a),
    }
}

/// File at `path`, or standard output.
pub(super) fn output(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| io_error(p, e))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn io_error(path: &Path, e: io::Error) -> CliError {
    CliError {
        code: super::EXIT_IO,
        message: format!("{}: {e}", path.display()),
    }
}

pub(super) fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> CliResult<()> {
    let mut w = output(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::from(SkmError::Parse(e.to_string())))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub(super) fn parse_suite(s: &str) -> CliResult<Suite> {
    s.parse::<Suite>().map_err(CliError::from)
}

pub(super) fn load_path(path: &Path) -> CliResult<Dataset> {
    if !path.exists() {
        return Err(CliError {
            code: super::EXIT_IO,
            message: format!("{}: no such file", path.display()),
        });
    }
    Ok(Dataset::from_path(path)?)
}

pub(super) fn load(src: &DataSource) -> CliResult<Dataset> {
    let labelled = |(data, labels): (DataMatrix, Vec<usize>)| Dataset {
        data,
        labels: Some(labels),
        feature_names: None,
    };
    if let Some(path) = &src.input {
        load_path(path)
    } else if let Some(s) = &src.suite {
        Ok(labelled(imbalanced_suite(parse_suite(s)?, src.data_seed)?))
    } else if let Some(id) = src.case_study {
        Ok(labelled(case_study(id)?))
    } else {
        Err(CliError::usage("one of --input, --suite or --case-study is required"))
    }
}

/// Number of clusters: explicit, else the number of reference classes.
pub(super) fn resolve_k(k: Option<usize>, ds: &Dataset) -> CliResult<usize> {
    match (k, &ds.labels) {
        (Some(k), _) => Ok(k),
        (None, Some(labels)) => Ok(labels.iter().collect::<std::collections::BTreeSet<_>>().len()),
        (None, None) => Err(CliError::usage("-k is required when the data has no label column")),
    }
}

fn prepare(x: &DataMatrix, normalize: bool) -> CliResult<DataMatrix> {
    if normalize {
        Ok(zscore_normalize(x)?.0)
    } else {
        Ok(x.clone())
    }
}

pub(super) fn parse_alpha(s: &str, x: &DataMatrix) -> CliResult<f64> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(auto_alpha(x)?);
    }
    s.parse::<f64>()
        .map_err(|_| CliError::usage(format!("invalid alpha `{s}`: expected a number or `auto`")))
}

fn smoother(a: &AlgorithmArgs, x: &DataMatrix) -> CliResult<SmootherSpec> {
    let spec = match a.algorithm.to_ascii_lowercase().as_str() {
        "hkm" => SmootherSpec::hard(),
        "fkm" => {
            if a.m.is_nan() || a.m <= 1.0 {
                return Err(CliError::usage(format!("--m must be greater than 1, got {}", a.m)));
            }
            SmootherSpec::p_norm(1.0 / (a.m - 1.0))?
        }
        "mefc" => SmootherSpec::log_sum_exp(a.lambda)?,
        "ekm" => SmootherSpec::boltzmann(parse_alpha(&a.alpha, x)?)?,
        other => {
            return Err(CliError::usage(format!(
                "unknown algorithm `{other}`: expected hkm, fkm, mefc or ekm"
            )))
        }
    };
    Ok(spec)
}

fn config(spec: SmootherSpec, r: &RunArgs) -> SkmConfig {
    SkmConfig::new(spec)
        .with_restarts(r.restarts)
        .with_seed(r.seed)
        .with_tol(r.tol)
        .with_max_iter(r.max_iter)
}

fn gen(a: GenArgs) -> CliResult<()> {
    let (data, labels) = if let Some(s) = &a.suite {
        imbalanced_suite(parse_suite(s)?, a.seed)?
    } else if let Some(id) = a.case_study {
        case_study(id)?
    } else if let Some(path) = &a.spec {
        let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        let mut spec: MixtureSpec =
            serde_json::from_str(&text).map_err(|e| CliError::from(SkmError::Parse(e.to_string())))?;
        spec.seed = a.seed;
        generate(&spec)?
    } else {
        return Err(CliError::usage("one of --suite, --case-study or --spec is required"));
    };
    let ds = Dataset {
        data,
        labels: Some(labels),
        feature_names: None,
    };
    let mut w = output(a.out.as_deref())?;
    ds.to_writer(&mut w)?;
    w.flush()?;
    Ok(())
}

fn write_labels(path: &Path, labels: &[usize]) -> CliResult<()> {
    let mut w = BufWriter::new(File::create(path).map_err(|e| io_error(path, e))?);
    writeln!(w, "label")?;
    for l in labels {
        writeln!(w, "{l}")?;
    }
    w.flush()?;
    Ok(())
}

/// Reads one integer label per row. Accepts a `label` column in a headed
/// CSV, or else takes the last column.
pub(super) fn read_labels(path: &Path) -> CliResult<Vec<usize>> {
    let file = File::open(path).map_err(|e| io_error(path, e))?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut column = None;
    let mut labels = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(SkmError::from)?;
        if rec.is_empty() {
            continue;
        }
        if line == 0 && rec.iter().any(|f| f.parse::<f64>().is_err()) {
            column = rec.iter().position(|f| f.eq_ignore_ascii_case("label"));
            continue;
        }
        let idx = column.unwrap_or(rec.len() - 1);
        let field = rec
            .get(idx)
            .ok_or_else(|| SkmError::Parse(format!("line {}: missing label field", line + 1)))?;
        let v = field
            .parse::<usize>()
            .map_err(|_| SkmError::Parse(format!("line {}: `{field}` is not a label", line + 1)))?;
        labels.push(v);
    }
    if labels.is_empty() {
        return Err(SkmError::Empty("label file").into());
    }
    Ok(labels)
}

fn cluster(a: ClusterArgs) -> CliResult<()> {
    let ds = load(&a.data)?;
    let x = prepare(&ds.data, !a.run.no_normalize)?;
    let k = resolve_k(a.run.k, &ds)?;
    let spec = smoother(&a.alg, &x)?;
    let cfg = config(spec, &a.run).with_trace(a.trace);
    let result = run(&x, k, &cfg)?;
    if let Some(p) = &a.labels_out {
        write_labels(p, &result.labels)?;
    }
    write_json(a.out.as_deref(), &result)
}

fn eval(a: EvalArgs) -> CliResult<()> {
    let pred = read_labels(&a.pred)?;
    let reference = read_labels(&a.reference)?;
    let report = EvalReport::compute(&reference, &pred)?;
    write_json(None, &report)
}

fn parse_grid(s: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let nums: Option<Vec<f64>> = parts.iter().map(|p| p.trim().parse::<f64>().ok()).collect();
    match nums.as_deref() {
        Some([start, end, step]) => Ok(linear_grid(*start, *end, *step)?),
        _ => Err(CliError::usage(format!("invalid grid `{s}`: expected start:end:step"))),
    }
}

fn landscape(a: LandscapeArgs) -> CliResult<()> {
    let ds = load(&a.data)?;
    let x = prepare(&ds.data, a.normalize)?;
    let grid = parse_grid(&a.grid)?;
    let specs = a
        .specs
        .iter()
        .map(|s| s.parse::<SmootherSpec>())
        .collect::<Result<Vec<_>, _>>()?;
    let scan_index = a.scan_index.unwrap_or(a.fix.len());
    let curve = landscape_scan_1d(&x, &a.fix, scan_index, &grid, &specs)?;
    if let Some(p) = &a.out {
        let mut w = output(Some(p))?;
        curve.write_csv(&mut w)?;
        w.flush()?;
    }
    let mut out = io::stdout().lock();
    for (spec, argmin) in specs.iter().zip(curve.argmins()) {
        writeln!(out, "{spec}\t{argmin}")?;
    }
    Ok(())
}

fn alpha_scan_cmd(a: AlphaScanArgs) -> CliResult<()> {
    let ds = load(&a.data)?;
    let x = prepare(&ds.data, !a.run.no_normalize)?;
    let k = resolve_k(a.run.k, &ds)?;
    let cfg = config(SmootherSpec::hard(), &a.run);
    let rows = alpha_scan(&x, k, &a.alphas, &cfg, ds.labels.as_deref())?;
    let mut w = output(a.out.as_deref())?;
    writeln!(w, "alpha,min_centroid_distance,objective,iterations,converged,nmi")?;
    for r in rows {
        let nmi = r.nmi.map(|v| v.to_string()).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.alpha, r.min_centroid_distance, r.objective, r.iterations, r.converged, nmi
        )?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct StreamOutput {
    centroids: CentroidSet,
    counts: Vec<u64>,
    points_seen: u64,
    #[serde(flatten)]
    mode: StreamMode,
}

fn stream(a: StreamArgs) -> CliResult<()> {
    let ds = load(&a.data)?;
    let x = prepare(&ds.data, !a.no_normalize)?;
    let k = resolve_k(a.k, &ds)?;
    let mode = match a.mode.to_ascii_lowercase().as_str() {
        "hkm" => StreamMode::Hkm,
        "ekm" => StreamMode::Ekm {
            alpha: parse_alpha(&a.alpha, &x)?,
        },
        other => return Err(CliError::usage(format!("unknown stream mode `{other}`: expected hkm or ekm"))),
    };
    let c0 = kmeanspp_init(&x, k, a.seed)?;
    let (state, records) = stream_run(&x, c0, mode, a.epochs, a.seed, !a.no_shuffle)?;
    if let Some(p) = &a.epochs_out {
        let mut w = output(Some(p))?;
        writeln!(w, "epoch,objective,points_seen")?;
        for r in &records {
            writeln!(w, "{},{},{}", r.epoch, r.objective, r.points_seen)?;
        }
        w.flush()?;
    }
    write_json(
        a.out.as_deref(),
        &StreamOutput {
            centroids: state.centroids,
            counts: state.counts,
            points_seen: state.points_seen,
            mode,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("-1:1:0.5").unwrap(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert!(parse_grid("1:2").is_err());
        assert!(parse_grid("a:b:c").is_err());
    }

    #[test]
    fn labels_with_and_without_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("l.csv");
        std::fs::write(&p, "x0,label\n0.5,3\n1.5,1\n").unwrap();
        assert_eq!(read_labels(&p).unwrap(), vec![3, 1]);
        std::fs::write(&p, "2\n0\n").unwrap();
        assert_eq!(read_labels(&p).unwrap(), vec![2, 0]);
        std::fs::write(&p, "label\n").unwrap();
        assert!(read_labels(&p).is_err());
    }

    #[test]
    fn alpha_parsing() {
        let x = DataMatrix::from_column(&[1.0, -1.0]).unwrap();
        assert_eq!(parse_alpha("auto", &x).unwrap(), 4.0);
        assert_eq!(parse_alpha("0.5", &x).unwrap(), 0.5);
        assert!(parse_alpha("fast", &x).is_err());
    }
}
