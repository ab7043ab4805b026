use std::path::PathBuf;

use clap::Args;
use serde::Deserialize;

use qbayes::gleason::{fit_density, FitJson, FrameAssignment, FrameAssignmentJson};

use super::Status;
use crate::config::{load, pick, read_json, rebase, Relocate};
use crate::output::{show, Failure, OutDir};
use crate::Common;

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Frame assignment JSON
    frames: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FitConfig {
    frames: Option<PathBuf>,
    out: Option<PathBuf>,
}

impl Relocate for FitConfig {
    fn relocate(&mut self, base: &std::path::Path) {
        rebase(&mut self.frames, base);
        rebase(&mut self.out, base);
    }
}

pub fn run(common: &Common, args: FitArgs) -> Result<Status, Failure> {
    let cfg: FitConfig = load(common.config.as_deref())?;
    let path = pick(args.frames, cfg.frames).ok_or_else(|| Failure::new("no frame assignment given"))?;
    let out = OutDir::create(pick(common.out.clone(), cfg.out))?;

    let json: FrameAssignmentJson = read_json(&path)?;
    // Unverified input may be contextual; the fit residual then shows it.
    let assignment: FrameAssignment = json
        .to_assignment(common.verify)
        .map_err(|e| Failure::new(format!("{}: {e}", path.display())))?;
    let fit = fit_density(&assignment)?;
    let written = out.write_json("fit.json", &FitJson::from(&fit))?;
    println!(
        "fit residual {:e}, spanning rank {}; written to {}",
        fit.residual,
        fit.spanning_rank,
        show(&written)
    );
    Ok(Status::Success)
}
