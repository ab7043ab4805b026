use std::path::PathBuf;

use clap::Args;
use serde::Deserialize;

use qbayes::dutch_book::{audit_with, check_axioms, Arithmetic, Assignment, BookJson, PROBABILITY_TOLERANCE};

use super::Status;
use crate::config::{kebab, load, pick, read_json, rebase, Relocate};
use crate::output::{show, Failure, OutDir};
use crate::Common;

#[derive(Debug, Args)]
pub struct AuditArgs {
    /// Book JSON
    book: Option<PathBuf>,
    /// exact or float
    #[arg(long, value_parser = kebab::<Arithmetic>)]
    arithmetic: Option<Arithmetic>,
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct AuditConfig {
    book: Option<PathBuf>,
    arithmetic: Option<Arithmetic>,
    tolerance: Option<f64>,
    out: Option<PathBuf>,
}

impl Relocate for AuditConfig {
    fn relocate(&mut self, base: &std::path::Path) {
        rebase(&mut self.book, base);
        rebase(&mut self.out, base);
    }
}

pub fn run(common: &Common, args: AuditArgs) -> Result<Status, Failure> {
    let cfg: AuditConfig = load(common.config.as_deref())?;
    let path = pick(args.book, cfg.book).ok_or_else(|| Failure::new("no book given"))?;
    let arithmetic = pick(args.arithmetic, cfg.arithmetic).unwrap_or_default();
    let tolerance = pick(args.tolerance, cfg.tolerance).unwrap_or(PROBABILITY_TOLERANCE);
    let out = OutDir::create(pick(common.out.clone(), cfg.out))?;

    let book: BookJson = read_json(&path)?;
    let (space, quotes) = book
        .quotes()
        .map_err(|e| Failure::new(format!("{}: {e}", path.display())))?;
    if common.verify {
        let violations = check_axioms(&Assignment::new(space.clone(), quotes.clone()))?;
        for v in &violations {
            eprintln!("axiom {:?} fails on quotes {:?} (residual {:.3e})", v.rule, v.quotes, v.residual);
        }
    }
    let verdict = audit_with(&space, &quotes, arithmetic, tolerance)?;
    let written = out.write_json("verdict.json", &verdict)?;
    if verdict.coherent {
        println!("coherent (mismatch {:e}); verdict in {}", verdict.mismatch, show(&written));
        Ok(Status::Success)
    } else {
        println!(
            "incoherent: sure loss {:e} with unit-bounded payoffs; verdict in {}",
            verdict.mismatch,
            show(&written)
        );
        Ok(Status::Verdict)
    }
}
