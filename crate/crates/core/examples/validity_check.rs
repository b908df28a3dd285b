//! Lamb-Dicke and detuning margins plus truncation advice, the same report the
//! `lsgate check` command prints.

use lightshift::cli::check_report;
use lightshift::model::ChainConfig;

fn main() {
    let cfg = ChainConfig::thermal_benchmark();
    for factor in [10.0, 8.0] {
        let (text, ok) = check_report(&cfg, factor, 1100.0);
        println!("--- factor {factor} (ok = {ok})\n{text}");
    }
}
