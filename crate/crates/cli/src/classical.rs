use std::io::Write;

use magicsq::classical::{classical_game_value, enumerate_colorings, Game};
use magicsq::wire::{CensusJson, GameValueJson};
use serde::Serialize;

use crate::{CommonArgs, Format};

#[derive(Serialize)]
struct ClassicalJson {
    colorings: CensusJson,
    games: Vec<GameValueJson>,
}

pub fn classical(args: &CommonArgs, out: &mut impl Write) -> anyhow::Result<bool> {
    let census = enumerate_colorings(args.variant);
    let games: Vec<_> = Game::ALL
        .iter()
        .map(|&g| classical_game_value(g, args.variant))
        .collect();

    match args.format {
        Format::Json => {
            let body = ClassicalJson {
                colorings: CensusJson::new(&census, args.variant),
                games: games.iter().map(GameValueJson::from).collect(),
            };
            serde_json::to_writer_pretty(&mut *out, &body)?;
            writeln!(out)?;
        }
        Format::Table => {
            writeln!(out, "variant {}", args.variant)?;
            writeln!(
                out,
                "{} colorings, {} satisfy all constraints, max satisfied {}",
                census.total, census.fully_satisfying, census.max_satisfied
            )?;
            let hist: Vec<String> = census
                .histogram
                .iter()
                .enumerate()
                .filter(|(_, n)| **n > 0)
                .map(|(k, n)| format!("{k}:{n}"))
                .collect();
            writeln!(out, "satisfied-count histogram {}", hist.join(" "))?;
            for r in &games {
                let v = r.classical_value;
                // show raw counts when the reduced fraction hides them
                let counts = if *v.ratio().denom() == v.total {
                    String::new()
                } else {
                    format!(" ({}/{} wins)", v.wins, v.total)
                };
                writeln!(
                    out,
                    "{} game: classical {v}{counts}, quantum {}",
                    r.game, r.quantum_value
                )?;
                writeln!(out, "  optimal strategy pairs {}", r.optimal_strategy_count)?;
            }
        }
    }
    Ok(census.fully_satisfying == 0
        && games
            .iter()
            .all(|r| r.classical_value.wins < r.classical_value.total))
}
