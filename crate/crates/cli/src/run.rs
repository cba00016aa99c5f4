use std::io::Write;

use magicsq::experiment::run_batch;
use magicsq::quantum::Party;
use magicsq::square::Setting;
use magicsq::wire::{triple_label, BatchReportJson};

use crate::{Format, RunArgs};

/// Runs the batch; returns whether it was violation-free.
pub fn run(args: &RunArgs, out: &mut impl Write) -> anyhow::Result<bool> {
    let variant = args.common.variant;
    let report = run_batch(
        args.rounds,
        args.policy,
        variant,
        args.seed,
        args.common.format == Format::Json,
    )?;
    let t = &report.tallies;

    match args.common.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &BatchReportJson::from(&report))?;
            writeln!(out)?;
        }
        Format::Table => {
            writeln!(
                out,
                "rounds {}  seed {}  policy {}  variant {}",
                t.rounds, args.seed, args.policy, variant
            )?;
            writeln!(out, "parity violations:         {}", t.parity_violations)?;
            writeln!(
                out,
                "correlation violations:    {}",
                t.correlation_violations
            )?;
            writeln!(
                out,
                "rounds with common panels: {}",
                t.rounds_with_common_panels
            )?;
            writeln!(out)?;
            writeln!(
                out,
                "{:<6} {:<7} {:>6}  outcome frequencies",
                "party", "setting", "uses"
            )?;
            for party in Party::BOTH {
                for s in Setting::ALL {
                    let tally = t.tally(party, s);
                    let cells: Vec<String> = magicsq::experiment::valid_triples(s, variant)
                        .iter()
                        .enumerate()
                        .map(|(k, &tr)| format!("{} {:.4}", triple_label(tr), tally.frequency(k)))
                        .collect();
                    writeln!(
                        out,
                        "{:<6} {:<7} {:>6}  {}",
                        party.to_string(),
                        s.to_string(),
                        tally.uses,
                        cells.join("  ")
                    )?;
                }
            }
        }
    }
    Ok(t.violations() == 0)
}
