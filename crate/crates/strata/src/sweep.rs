//! Independent scenarios on a bounded worker pool.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{CliError, CliResult};
use crate::scenario::Setup;
use crate::simulate::{simulate, write_outcome, Summary};

pub const THREADS_VAR: &str = "STRATA_THREADS";

/// Worker count: `STRATA_THREADS` if set (at least 1), capped by the
/// available parallelism.
pub fn worker_count() -> CliResult<usize> {
    let avail = std::thread::available_parallelism().map_or(1, |n| n.get());
    match std::env::var(THREADS_VAR) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n.min(avail)),
            _ => Err(CliError::Validation(format!(
                "{THREADS_VAR} must be a positive integer, got `{v}`"
            ))),
        },
        Err(_) => Ok(avail),
    }
}

/// One finished sweep member.
pub struct SweepItem {
    pub path: PathBuf,
    pub dir: PathBuf,
    pub result: CliResult<Summary>,
}

/// Runs every scenario into `root/<scenario name>`; results keep input order.
pub fn run_sweep(paths: &[PathBuf], root: &Path) -> CliResult<Vec<SweepItem>> {
    let setups: Vec<(PathBuf, CliResult<Setup>)> =
        paths.iter().map(|p| (p.clone(), Setup::load(p))).collect();
    let mut seen = BTreeSet::new();
    for (p, s) in &setups {
        if let Ok(s) = s {
            if !seen.insert(s.name().to_string()) {
                return Err(CliError::Validation(format!(
                    "{}: duplicate scenario name `{}` in sweep",
                    p.display(),
                    s.name()
                )));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count()?)
        .build()
        .map_err(|e| CliError::Validation(format!("worker pool: {e}")))?;
    Ok(pool.install(|| {
        setups
            .into_par_iter()
            .map(|(path, setup)| {
                let (dir, result) = match setup {
                    Ok(s) => {
                        let dir = root.join(s.name());
                        let r = simulate(&s)
                            .and_then(|o| write_outcome(&s, &o, &dir).map(|_| o.summary));
                        (dir, r)
                    }
                    Err(e) => (root.to_path_buf(), Err(e)),
                };
                SweepItem { path, dir, result }
            })
            .collect()
    }))
}
