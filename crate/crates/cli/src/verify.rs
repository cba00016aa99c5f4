use std::io::Write;

use magicsq::experiment::{no_signaling_check, order_independence_check, party_order_check};
use magicsq::quantum::{commutes, commutes_by_matrix, LocalOperator, Party, Sign};
use magicsq::square::{
    biorthogonal_decomposition_check, last_row_pair_report, square, Setting, Variant,
};
use magicsq::TOLERANCE;
use serde::Serialize;

use crate::{CommonArgs, Format};

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Check {
    Check {
        name: name.into(),
        passed,
        detail: detail.into(),
    }
}

fn sign_str(s: Sign) -> &'static str {
    match s {
        Sign::Plus => "+I",
        Sign::Minus => "-I",
    }
}

/// Every identity the experiment depends on, for one variant.
pub fn checks(variant: Variant) -> anyhow::Result<Vec<Check>> {
    let mut out = Vec::new();

    for party in Party::BOTH {
        let sq = square(variant, party);
        let products = sq.product_check()?;
        for s in Setting::ALL {
            let expected = variant.setting_sign(s);
            out.push(check(
                format!("product {party} {s}"),
                products.sign(s) == expected,
                format!(
                    "{} (expected {}), residual {:.1e}",
                    sign_str(products.sign(s)),
                    sign_str(expected),
                    products.max_residual
                ),
            ));
        }
        for s in Setting::ALL {
            let obs = sq.setting_observables(s);
            let pairs = [(0, 1), (0, 2), (1, 2)];
            let by_count = pairs.iter().all(|&(i, j)| commutes(&obs[i], &obs[j]));
            let by_matrix = pairs
                .iter()
                .all(|&(i, j)| commutes_by_matrix(&obs[i], &obs[j]));
            out.push(check(
                format!("commute {party} {s}"),
                by_count && by_matrix,
                format!("pauli count {by_count}, matrix {by_matrix}"),
            ));
        }
    }

    let sq = square(variant, Party::Alice);
    for s in Setting::ALL {
        let basis = sq.simultaneous_eigenbasis(s);
        let gram = (basis.gram() - LocalOperator::identity()).norm();
        let complete = (basis.projector_sum() - LocalOperator::identity()).norm();
        let imag = basis.max_imaginary();
        out.push(check(
            format!("eigenbasis {s}"),
            gram < TOLERANCE && complete < TOLERANCE && imag < TOLERANCE,
            format!("gram {gram:.1e}, completeness {complete:.1e}, max imaginary {imag:.1e}"),
        ));
        let err = biorthogonal_decomposition_check(variant, s);
        out.push(check(
            format!("biorthogonal {s}"),
            err < TOLERANCE,
            format!("reconstruction error {err:.1e}"),
        ));
    }

    for s in Setting::ALL {
        let dev = no_signaling_check(variant, s)?;
        out.push(check(
            format!("no-signaling Bob {s}"),
            dev < TOLERANCE,
            format!("max deviation {dev:.1e}"),
        ));
    }

    for party in Party::BOTH {
        let mut worst = 0.0f64;
        for s in Setting::ALL {
            worst = worst.max(order_independence_check(variant, party, s)?);
        }
        out.push(check(
            format!("triple order {party}"),
            worst < TOLERANCE,
            format!("max deviation over 6 orderings x 6 settings {worst:.1e}"),
        ));
    }

    let mut worst = 0.0f64;
    for a in Setting::ALL {
        for b in Setting::ALL {
            worst = worst.max(party_order_check(variant, a, b)?);
        }
    }
    out.push(check(
        "party order",
        worst < TOLERANCE,
        format!("max deviation over 36 setting pairs {worst:.1e}"),
    ));

    Ok(out)
}

/// Which pair of bottom-row negations gives rows +I and columns -I.
fn sign_mask_notes() -> Vec<String> {
    last_row_pair_report()
        .iter()
        .map(|r| {
            let signs: Vec<String> = r
                .check
                .signs()
                .map(|(s, sign)| format!("{s}{}", if sign == Sign::Plus { '+' } else { '-' }))
                .collect();
            format!(
                "negating bottom-row cells (3,{}) and (3,{}): {}{}",
                r.columns.0 + 1,
                r.columns.1 + 1,
                signs.join(" "),
                if r.symmetric() {
                    "  <- rows +I, columns -I (used for `signed`)"
                } else {
                    ""
                }
            )
        })
        .collect()
}

#[derive(Serialize)]
struct VerifyJson {
    variant: Variant,
    passed: bool,
    checks: Vec<Check>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    sign_mask_notes: Vec<String>,
}

pub fn verify(args: &CommonArgs, out: &mut impl Write) -> anyhow::Result<bool> {
    let checks = checks(args.variant)?;
    let passed = checks.iter().all(|c| c.passed);
    let notes = if args.variant == Variant::SignedSymmetric {
        sign_mask_notes()
    } else {
        Vec::new()
    };

    match args.format {
        Format::Json => {
            let body = VerifyJson {
                variant: args.variant,
                passed,
                checks,
                sign_mask_notes: notes,
            };
            serde_json::to_writer_pretty(&mut *out, &body)?;
            writeln!(out)?;
        }
        Format::Table => {
            writeln!(out, "variant {}", args.variant)?;
            for c in &checks {
                writeln!(
                    out,
                    "{}  {:<22} {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                )?;
            }
            for n in &notes {
                writeln!(out, "note  {n}")?;
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            writeln!(out, "{} checks, {} failed", checks.len(), failed)?;
        }
    }
    Ok(passed)
}
