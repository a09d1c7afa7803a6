use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use crate::data::{zscore_normalize, Dataset};
use crate::datagen::{case_study, imbalanced_suite};
use crate::engine::{restart_seed, run, SkmConfig};
use crate::error::SkmError;
use crate::metrics::{acc, ari, nmi};
use crate::smoothmin::SmootherSpec;

use super::commands::{load_path, output, parse_alpha, parse_suite};
use super::{BenchArgs, CliError, CliResult};

/// One manifest line.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub dataset: String,
    pub algorithm: String,
    pub k: Option<usize>,
}

/// Summary of the trials of one dataset × algorithm cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub dataset: String,
    pub algorithm: String,
    pub trials: usize,
    pub nmi_mean: f64,
    pub nmi_std: f64,
    pub ari_mean: f64,
    pub ari_std: f64,
    pub acc_mean: f64,
    pub acc_std: f64,
    pub iterations_mean: f64,
    pub seconds_mean: f64,
}

fn read_manifest(path: &Path) -> CliResult<Vec<ManifestEntry>> {
    let file = std::fs::File::open(path).map_err(|e| CliError {
        code: super::EXIT_IO,
        message: format!("{}: {e}", path.display()),
    })?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .comment(Some(b'#'))
        .from_reader(file);
    let mut entries = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(SkmError::from)?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if line == 0 && rec.get(0) == Some("dataset") {
            continue;
        }
        let (Some(dataset), Some(algorithm)) = (rec.get(0), rec.get(1)) else {
            return Err(CliError::usage(format!(
                "manifest line {}: expected dataset,algorithm[,k]",
                line + 1
            )));
        };
        let k = match rec.get(2).filter(|s| !s.is_empty()) {
            Some(s) => Some(
                s.parse()
                    .map_err(|_| CliError::usage(format!("manifest line {}: bad k `{s}`", line + 1)))?,
            ),
            None => None,
        };
        entries.push(ManifestEntry {
            dataset: dataset.to_string(),
            algorithm: algorithm.to_string(),
            k,
        });
    }
    if entries.is_empty() {
        return Err(CliError::usage(format!("manifest {} lists no runs", path.display())));
    }
    Ok(entries)
}

fn load_dataset(name: &str, data_seed: u64, base: &Path) -> CliResult<(crate::DataMatrix, Vec<usize>)> {
    let (data, labels) = if let Some(s) = name.strip_prefix("suite:") {
        imbalanced_suite(parse_suite(s)?, data_seed)?
    } else if let Some(id) = name.strip_prefix("case:") {
        let id = id
            .parse()
            .map_err(|_| CliError::usage(format!("bad case study id `{id}`")))?;
        case_study(id)?
    } else {
        let path = base.join(name);
        let ds: Dataset = load_path(&path)?;
        let labels = ds
            .labels
            .ok_or_else(|| CliError::usage(format!("{}: benchmark data needs a label column", path.display())))?;
        (ds.data, labels)
    };
    Ok((zscore_normalize(&data)?.0, labels))
}

fn algorithm_spec(alg: &str, x: &crate::DataMatrix) -> CliResult<SmootherSpec> {
    let (name, param) = match alg.split_once(':') {
        Some((n, p)) => (n, Some(p)),
        None => (alg, None),
    };
    let num = |default: f64| -> CliResult<f64> {
        param.map_or(Ok(default), |p| {
            p.parse()
                .map_err(|_| CliError::usage(format!("bad parameter in algorithm `{alg}`")))
        })
    };
    Ok(match name.to_ascii_lowercase().as_str() {
        "hkm" => SmootherSpec::hard(),
        "fkm" => {
            let m = num(2.0)?;
            if m.is_nan() || m <= 1.0 {
                return Err(CliError::usage(format!("fkm needs m > 1, got {m}")));
            }
            SmootherSpec::p_norm(1.0 / (m - 1.0))?
        }
        "mefc" => SmootherSpec::log_sum_exp(num(1.0)?)?,
        "ekm" => SmootherSpec::boltzmann(parse_alpha(param.unwrap_or("auto"), x)?)?,
        other => return Err(CliError::usage(format!("unknown algorithm `{other}` in manifest"))),
    })
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Runs every manifest cell `trials` times. Trial `t` uses seed
/// `restart_seed(seed, t)` so all algorithms on a dataset share the same
/// sequence of initializations.
pub(super) fn run_bench(args: &BenchArgs) -> CliResult<Vec<BenchRow>> {
    if args.trials == 0 {
        return Err(CliError::usage("--trials must be at least 1"));
    }
    let entries = read_manifest(&args.manifest)?;
    let base = args.manifest.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut rows = Vec::with_capacity(entries.len());
    for e in entries {
        let (x, labels) = load_dataset(&e.dataset, args.data_seed, &base)?;
        let k = e
            .k
            .unwrap_or_else(|| labels.iter().collect::<std::collections::BTreeSet<_>>().len());
        let spec = algorithm_spec(&e.algorithm, &x)?;
        let (mut nmis, mut aris, mut accs, mut iters, mut secs) = (vec![], vec![], vec![], vec![], vec![]);
        for t in 0..args.trials {
            let cfg = SkmConfig::new(spec)
                .with_restarts(args.restarts)
                .with_seed(restart_seed(args.seed, t))
                .with_tol(args.tol)
                .with_max_iter(args.max_iter);
            let start = Instant::now();
            let res = run(&x, k, &cfg)?;
            secs.push(start.elapsed().as_secs_f64());
            nmis.push(nmi(&labels, &res.labels)?);
            aris.push(ari(&labels, &res.labels)?);
            accs.push(acc(&labels, &res.labels)?);
            iters.push(res.iterations as f64);
        }
        let (nmi_mean, nmi_std) = mean_std(&nmis);
        let (ari_mean, ari_std) = mean_std(&aris);
        let (acc_mean, acc_std) = mean_std(&accs);
        rows.push(BenchRow {
            dataset: e.dataset,
            algorithm: e.algorithm,
            trials: args.trials,
            nmi_mean,
            nmi_std,
            ari_mean,
            ari_std,
            acc_mean,
            acc_std,
            iterations_mean: mean_std(&iters).0,
            seconds_mean: mean_std(&secs).0,
        });
    }
    Ok(rows)
}

pub(super) fn bench(args: BenchArgs) -> CliResult<()> {
    let rows = run_bench(&args)?;
    let mut w = output(args.out.as_deref())?;
    writeln!(
        w,
        "dataset,algorithm,trials,nmi_mean,nmi_std,ari_mean,ari_std,acc_mean,acc_std,iterations_mean,seconds_mean"
    )?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.2},{:.6}",
            r.dataset,
            r.algorithm,
            r.trials,
            r.nmi_mean,
            r.nmi_std,
            r.ari_mean,
            r.ari_std,
            r.acc_mean,
            r.acc_std,
            r.iterations_mean,
            r.seconds_mean
        )?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_parsing() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        std::fs::write(&p, "dataset,algorithm,k\n# comment\nsuite:A,hkm\ncase:1,ekm:0.5,2\n").unwrap();
        let m = read_manifest(&p).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m[1].k, Some(2));
        assert_eq!(m[1].algorithm, "ekm:0.5");
        std::fs::write(&p, "dataset,algorithm\n").unwrap();
        assert_eq!(read_manifest(&p).unwrap_err().code, super::super::EXIT_USAGE);
    }

    #[test]
    fn algorithm_names() {
        let x = crate::DataMatrix::from_column(&[1.0, -1.0]).unwrap();
        assert_eq!(algorithm_spec("fkm:3", &x).unwrap(), SmootherSpec::p_norm(0.5).unwrap());
        assert_eq!(algorithm_spec("ekm", &x).unwrap(), SmootherSpec::boltzmann(4.0).unwrap());
        assert!(algorithm_spec("fkm:1", &x).is_err());
        assert!(algorithm_spec("kmedoids", &x).is_err());
    }
}
