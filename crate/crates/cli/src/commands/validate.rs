use std::path::PathBuf;

use clap::{Args, ValueEnum};

use qbayes::definetti::{check_exchangeable, ExchangeableFamily};
use qbayes::dutch_book::BookJson;
use qbayes::gleason::{FrameAssignment, FrameAssignmentJson};
use qbayes::iid::OutcomeRecord;

use super::{load_prior, load_state, Status};
use crate::config::{composite_cap, read_json, read_text};
use crate::output::Failure;
use crate::Common;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    State,
    Book,
    Frames,
    Prior,
    Record,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    file: PathBuf,
    #[arg(long, value_enum)]
    kind: Kind,
    /// Outcome dimension of a record file
    #[arg(long)]
    dim: Option<usize>,
    /// For priors: also check the N-copy exchangeable states for N up to this
    #[arg(long)]
    copies: Option<usize>,
}

pub fn run(common: &Common, args: ValidateArgs) -> Result<Status, Failure> {
    if common.config.is_some() || common.seed.is_some() || common.out.is_some() {
        return Err(Failure::new("validate takes no --config, --seed or --out"));
    }
    let path = &args.file;
    let located = |e: qbayes::Error| Failure::new(format!("{}: {e}", path.display()));
    match args.kind {
        Kind::State => {
            let rho = load_state(path, true)?;
            println!("valid state, dim {}, purity {}", rho.dim(), rho.purity());
        }
        Kind::Book => {
            let book: BookJson = read_json(path)?;
            let (space, quotes) = book.quotes().map_err(located)?;
            if book.bets.iter().all(|b| b.x.is_some()) {
                book.book().map_err(located)?;
            }
            println!("valid book: {} outcomes, {} bets", space.len(), quotes.len());
        }
        Kind::Frames => {
            let json: FrameAssignmentJson = read_json(path)?;
            let a: FrameAssignment = json.to_assignment(true).map_err(located)?;
            println!("valid frame assignment: dim {}, {} frames", a.dim(), a.frames().len());
        }
        Kind::Prior => {
            let gen = load_prior(path, common.verify)?;
            println!("valid prior: dim {}, {} particles", gen.dim(), gen.particles().len());
            if let Some(n) = args.copies {
                let family = ExchangeableFamily::from_generator(gen, n, composite_cap()?).map_err(located)?;
                let report = check_exchangeable(&family).map_err(located)?;
                let worst = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
                println!(
                    "exchangeable up to N = {n}: symmetry residual {:e}, consistency residual {:e}",
                    worst(&report.symmetry),
                    worst(&report.consistency)
                );
                if !report.passed {
                    return Ok(Status::Verdict);
                }
            }
        }
        Kind::Record => {
            let dim = args
                .dim
                .ok_or_else(|| Failure::new("--dim is required for records"))?;
            let record = OutcomeRecord::from_csv(dim, &read_text(path)?).map_err(located)?;
            println!("valid record: {} trials, counts {:?}", record.len(), record.counts());
        }
    }
    Ok(Status::Success)
}
