//! The coined walk in position space: exact amplitude recursion, ballistic
//! spreading, and CSV emission.
//!
//! Run with `cargo run --example hadamard_walk`.

use qhorn::qwalk::WalkState;

fn main() {
    let steps = 100;
    let walk = WalkState::localized_right().steps(steps);
    println!("{} steps, norm {:.15}", steps, walk.norm());
    println!("σ({}) = {:.4}", steps, walk.position_std());
    let half = WalkState::localized_right().steps(steps / 2);
    println!(
        "ballistic ratio σ({})/σ({}) = {:.4} (a diffusive walk gives √2 ≈ 1.414)",
        steps,
        steps / 2,
        walk.position_std() / half.position_std()
    );

    println!("\nmost likely positions:");
    let mut dist = walk.position_distribution();
    dist.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    for (x, p) in dist.iter().take(5) {
        println!("  P({x:>4}) = {p:.5}");
    }

    let mut csv = Vec::new();
    walk.write_csv(&mut csv).unwrap();
    println!(
        "\nCSV head:\n{}",
        String::from_utf8(csv)
            .unwrap()
            .lines()
            .take(4)
            .collect::<Vec<_>>()
            .join("\n")
    );
}
