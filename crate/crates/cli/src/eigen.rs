use std::io::Write;

use magicsq::quantum::Party;
use magicsq::square::{square, Setting};
use serde::Serialize;

use crate::{CommonArgs, Format};

#[derive(Serialize)]
struct VectorJson {
    eigenvalues: [i8; 3],
    /// Real parts of the coefficients on |00>, |01>, |10>, |11>.
    coefficients: [f64; 4],
    max_imaginary: f64,
}

#[derive(Serialize)]
struct BasisJson {
    setting: Setting,
    observables: Vec<String>,
    vectors: Vec<VectorJson>,
}

pub fn eigen(args: &CommonArgs, out: &mut impl Write) -> anyhow::Result<bool> {
    let sq = square(args.variant, Party::Alice);
    let bases: Vec<BasisJson> = Setting::ALL
        .iter()
        .map(|&s| {
            let basis = sq.simultaneous_eigenbasis(s);
            BasisJson {
                setting: s,
                observables: sq
                    .setting_observables(s)
                    .iter()
                    .map(ToString::to_string)
                    .collect(),
                vectors: basis
                    .vectors
                    .iter()
                    .map(|v| VectorJson {
                        eigenvalues: v.eigenvalues.map(|o| o.value()),
                        coefficients: std::array::from_fn(|i| clean(v.coefficients[i].re)),
                        max_imaginary: v
                            .coefficients
                            .iter()
                            .map(|c| c.im.abs())
                            .fold(0.0, f64::max),
                    })
                    .collect(),
            }
        })
        .collect();

    match args.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &bases)?;
            writeln!(out)?;
        }
        Format::Table => {
            writeln!(
                out,
                "variant {}; coefficients on |00>,|01>,|10>,|11> of the party's two qubits",
                args.variant
            )?;
            for b in &bases {
                writeln!(out, "{}  ({})", b.setting, b.observables.join(", "))?;
                for v in &b.vectors {
                    let ev: Vec<String> = v.eigenvalues.iter().map(|e| format!("{e:+}")).collect();
                    let co: Vec<String> =
                        v.coefficients.iter().map(|c| format!("{c:+.6}")).collect();
                    writeln!(out, "  [{}]  {}", ev.join(" "), co.join("  "))?;
                }
            }
        }
    }
    Ok(true)
}

/// Drops signed zeros and rounding dust so output is stable.
fn clean(x: f64) -> f64 {
    if x.abs() < 1e-15 {
        0.0
    } else {
        x
    }
}
