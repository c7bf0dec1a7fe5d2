//! `sbda dump-qubo` and `sbda gen-instance`.

use std::path::{Path, PathBuf};

use anyhow::Result;

use sbda_core::{PortfolioInstance, QuboMatrix};

use crate::config::ExperimentConfig;
use crate::files::{create_dir, write_atomic};
use crate::run::LoadedProblem;

/// Writes `B.txt` (risk), `D.txt` (negated return) and `G.txt`
/// (constraints, with its constant as a `# offset` line) into `cfg.output`.
pub fn cmd_dump_qubo(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let problem = LoadedProblem::load(cfg)?;
    create_dir(&cfg.output)?;
    let q = &problem.qubos;
    let mut written = Vec::new();
    for (name, m) in [
        ("B.txt", &q.risk),
        ("D.txt", &q.neg_return),
        ("G.txt", &q.constraint),
    ] {
        let path = cfg.output.join(name);
        write_atomic(&path, triplets(m))?;
        written.push(path);
    }
    Ok(written)
}

fn triplets(m: &QuboMatrix) -> Vec<u8> {
    let mut buf = Vec::new();
    m.write_triplets(&mut buf)
        .expect("writing to memory cannot fail");
    buf
}

/// Writes a reproducible synthetic instance in the benchmark text format.
pub fn cmd_gen_instance(name: &str, n_assets: usize, seed: u64, out: &Path) -> Result<()> {
    let inst = PortfolioInstance::synthetic(name, n_assets, seed);
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    write_atomic(out, inst.to_orlib())
}
