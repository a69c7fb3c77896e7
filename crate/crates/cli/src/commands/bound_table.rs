use std::path::PathBuf;

use clap::{Args, ValueEnum};
use effdim::bounds::{bound_rhs_log, bound_rhs_log_loglip, BoundInputs, REFERENCE_BOUND_D, REFERENCE_BOUND_ROWS};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::manifest::ManifestBuilder;
use crate::output::{csv_bytes, num, parse_list, write_atomic};

pub const BOUND_HEADER: [&str; 5] = ["n", "d_eff", "xi_n", "log_rhs", "vacuous"];
pub const REFERENCE_COLUMN: &str = "paper_reference";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantArg {
    Lip,
    Loglip,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BoundTableArgs {
    /// Comma-separated sample sizes.
    #[arg(long)]
    pub n_list: Option<String>,
    /// Comma-separated local effective dimensions, paired with --n-list.
    #[arg(long)]
    pub deff_list: Option<String>,
    /// Use the built-in five-row reference table, with its log-RHS values as a reference column.
    #[arg(long, conflicts_with_all = ["n_list", "deff_list"])]
    pub table2: bool,
    #[arg(long, default_value_t = 0.003)]
    pub gamma: f64,
    /// Parameter count d.
    #[arg(long, default_value_t = REFERENCE_BOUND_D)]
    pub d: usize,
    /// Lipschitz constant M.
    #[arg(long = "M", default_value_t = 1.0)]
    pub lipschitz: f64,
    /// Loss range B.
    #[arg(long = "B", default_value_t = 1.0)]
    pub loss_range: f64,
    /// Dimensional constant; defaults to 2√d.
    #[arg(long)]
    pub cd: Option<f64>,
    #[arg(long = "Lambda", default_value_t = 0.0)]
    pub lambda: f64,
    /// Log-Lipschitz constant of the loss (loglip variant).
    #[arg(long = "M2")]
    pub m2: Option<f64>,
    /// Ball radius; defaults to 1/√n per row.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, value_enum, default_value = "lip")]
    pub variant: VariantArg,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: BoundTableArgs) -> CliResult<()> {
    let manifest = ManifestBuilder::start("bound-table", &args);
    let (ns, deffs, reference): (Vec<u64>, Vec<f64>, Option<Vec<f64>>) = if args.table2 {
        (
            REFERENCE_BOUND_ROWS.iter().map(|r| r.0).collect(),
            REFERENCE_BOUND_ROWS.iter().map(|r| r.1).collect(),
            Some(REFERENCE_BOUND_ROWS.iter().map(|r| r.3).collect()),
        )
    } else {
        let ns = parse_list("n-list", args.n_list.as_deref().unwrap_or(""))?;
        let deffs = parse_list("deff-list", args.deff_list.as_deref().unwrap_or(""))?;
        (ns, deffs, None)
    };
    if ns.len() != deffs.len() {
        return Err(CliError::Usage(format!(
            "--n-list has {} entries but --deff-list has {}",
            ns.len(),
            deffs.len()
        )));
    }
    let mut rows = Vec::with_capacity(ns.len());
    for (i, (&n, &d_eff)) in ns.iter().zip(&deffs).enumerate() {
        let mut inputs = BoundInputs::new(n, args.gamma, args.d, d_eff);
        inputs.lipschitz = args.lipschitz;
        inputs.loss_range = args.loss_range;
        inputs.lambda = args.lambda;
        inputs.m2 = args.m2;
        if let Some(cd) = args.cd {
            inputs.c_d = cd;
        }
        if let Some(eps) = args.epsilon {
            inputs.epsilon = eps;
        }
        let report = match args.variant {
            VariantArg::Lip => bound_rhs_log(&inputs)?,
            VariantArg::Loglip => bound_rhs_log_loglip(&inputs)?,
        };
        let mut row = vec![n.to_string(), num(d_eff), num(report.xi), num(report.log_rhs), report.vacuous.to_string()];
        if let Some(r) = &reference {
            row.push(num(r[i]));
        }
        rows.push(row);
    }
    let mut header = BOUND_HEADER.to_vec();
    if reference.is_some() {
        header.push(REFERENCE_COLUMN);
    }
    write_atomic(&args.out, &csv_bytes(&header, &rows)?)?;
    let mut manifest = manifest;
    manifest.output(&args.out);
    manifest.finish(&args.out)?;
    Ok(())
}
