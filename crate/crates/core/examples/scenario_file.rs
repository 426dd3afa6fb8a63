//! Parse a scenario from text, print its canonical form and run it.

use collapse_sim::harness::{chi_square_test, run_trials};
use collapse_sim::scenario::parse_scenario;

const TEXT: &str = "
[scenario]
name = pipeline

[particle e]
type = electron
row = 0.6 0 | pos 0 0 0 mom 0 0 0 spin +1/2 z
row = 0 0.8 | pos 0 0 0 mom 0 0 0 spin -1/2 z

[stage 1]
kind = field
axis = z
strength = 1

[stage 2]
kind = screen
axis = z
distance = 1

[detector]
observable = position z
bins = halves

[harness]
seed = 12
";

fn main() {
    let file = parse_scenario(TEXT).unwrap();
    print!("{}", file.render());
    let exp = file.experiment().unwrap();
    let h = run_trials(&exp, 20_000, file.harness.seed.unwrap_or(0)).unwrap();
    let expected = exp.expected().unwrap().unwrap();
    for ((label, count), p) in h.bins.iter().zip(&expected) {
        println!("{label}\t{count}\texpected {:.0}", p * h.total as f64);
    }
    let c = chi_square_test(&h, &expected, file.alpha()).unwrap();
    println!("chi-square {:.3} (critical {:.3}): {}", c.statistic, c.critical, if c.pass { "pass" } else { "fail" });

    match parse_scenario("[scenario]\nname = born\n[particle e]\ntype = electron\nrow = 0 0 | pos 0 0 0\n") {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!(),
    }
}
