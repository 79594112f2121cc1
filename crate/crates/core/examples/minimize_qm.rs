//! Two-level minimization with Quine-McCluskey, including don't-cares.

use gatesmith::boolopt::{quine_mccluskey, BoolFunction, Cube};

fn show(c: &Cube, inputs: u32) -> String {
    (0..inputs)
        .rev()
        .map(|i| match (c.care >> i & 1, c.value >> i & 1) {
            (0, _) => '-',
            (_, 1) => '1',
            _ => '0',
        })
        .collect()
}

fn main() {
    // Segment "a" of a BCD seven-segment decoder; codes 10..15 never occur.
    let on = [0, 2, 3, 5, 6, 7, 8, 9];
    let dc = [10, 11, 12, 13, 14, 15];
    let f = BoolFunction::from_minterms(4, &on, &dc).unwrap();
    let cover = quine_mccluskey(&f).unwrap();
    println!("{} terms, {} literals", cover.terms(), cover.literals());
    for c in &cover.cubes {
        println!("  {}", show(c, 4));
    }

    // Majority of three.
    let maj = BoolFunction::from_fn(3, 1, |r| vec![r.count_ones() >= 2]).unwrap();
    let cover = quine_mccluskey(&maj).unwrap();
    println!("majority: {:?}", cover.cubes.iter().map(|c| show(c, 3)).collect::<Vec<_>>());
}
