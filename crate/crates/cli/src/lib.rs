//! Command implementations for the `rhocover` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // NaN-rejecting comparisons

pub mod commands;
pub mod config;
pub mod error;
pub mod verify;

pub use config::{Cli, Command, RunConfig};
pub use error::{CliError, Result};

use config::{VerifyArgs, DEFAULT_RHO, DEFAULT_SWEEP_RHOS};

/// Runs one parsed command line, printing a short report to stdout.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenMdp(args) => {
            let file = commands::gen_mdp(&args)?;
            println!(
                "wrote {} ({} states, {} actions)",
                args.out.display(),
                file.num_states,
                file.num_actions
            );
        }
        Command::Solve(args) => {
            let config = RunConfig::resolve(&args, &[DEFAULT_RHO])?;
            let summary = commands::solve(&config)?;
            println!("rho {}  eta {:.6e}", summary.rho, summary.eta);
            println!("U*            {:.12e}", summary.value);
            println!("U* (eta = 0)  {:.12e}", summary.unrestricted_value);
            println!("max ratio     {:.12e}", summary.max_ratio);
            println!("minimax       {:.12e}", summary.minimax_value);
            println!("d*            {:?}", summary.d_star);
            if !summary.converged {
                eprintln!("warning: iteration cap reached before the gap tolerance");
            }
        }
        Command::Explore(args) => {
            let config = RunConfig::resolve(&args, &[DEFAULT_RHO])?;
            let output = commands::explore(&config)?;
            let s = &output.summary;
            println!(
                "episodes {}  steps {}",
                output.trace.records.len(),
                s.total_steps
            );
            println!("final xi      {:.6e}", s.final_xi);
            match s.fitted_slope {
                Some(slope) => println!("fitted slope  {slope:.4}"),
                None => println!("fitted slope  n/a"),
            }
            println!(
                "trace         {}",
                config.out.join(commands::TRACE_FILE).display()
            );
        }
        Command::SweepRho(args) => {
            let config = RunConfig::resolve(&args, &DEFAULT_SWEEP_RHOS)?;
            let summary = commands::sweep_rho(&config)?;
            println!("minimax value {:.12e}", summary.minimax_value);
            println!("{:>10}  {:>20}  {:>14}", "rho", "max_ratio", "gap");
            for row in &summary.rows {
                println!(
                    "{:>10}  {:>20.12e}  {:>14.6e}",
                    row.rho, row.max_ratio, row.gap_to_minimax
                );
            }
        }
        Command::Verify(VerifyArgs { run, fd_tolerance }) => {
            let config = RunConfig::resolve(&run, &[DEFAULT_RHO])?;
            let report = verify::verify(&config, fd_tolerance)?;
            for check in &report.checks {
                println!("{check}");
            }
            report.into_result()?;
        }
    }
    Ok(())
}
