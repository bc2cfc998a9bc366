//! Prints the report contract: JSON layout, CSV columns, config keys with
//! defaults, exit codes, and the environment override.

use crate::cmd;
use crate::config::{KeySpec, OUTPUT_KEYS};
use std::fmt::Write as _;

fn push_keys(out: &mut String, name: &str, schema: &[KeySpec], columns: &[&str]) {
    let _ = writeln!(out, "{name}");
    for spec in schema.iter().chain(OUTPUT_KEYS.iter()) {
        let _ = writeln!(out, "  {:<12} (default {:<14}) {}", spec.key, spec.default, spec.help);
    }
    let _ = writeln!(out, "  csv columns: {}", columns.join(","));
    let _ = writeln!(out);
}

pub fn render() -> String {
    let mut out = String::new();
    out.push_str(concat!(
        "Report contract\n",
        "===============\n",
        "\n",
        "JSON reports are objects with the fields:\n",
        "  schema     format version, currently 1\n",
        "  command    the subcommand that produced the report\n",
        "  timestamp  RFC 3339 wall-clock time; the only field excluded from\n",
        "             byte-for-byte reproducibility\n",
        "  config     the fully resolved key=value configuration; feeding these\n",
        "             lines back through --config reproduces the report\n",
        "  seeds      every RNG seed the run consumed, empty when deterministic\n",
        "  results    command-specific results, documented per command below\n",
        "\n",
        "CSV reports carry the same header material as `# key=value` comment\n",
        "lines (config keys prefixed `config.`, scalar results `result.`),\n",
        "then one table with the columns listed below.\n",
        "\n",
        "Exit codes: 0 success, 1 usage or configuration error (config-file\n",
        "problems carry path:line), 2 a requested certificate was refused.\n",
        "HOLDERCOVER_SEED overrides the `seed` key of any command that has one.\n",
        "\n",
        "Set specs: cantor1d:RATIO, cornerdust:DIM:RATIO, densedir:DIM:COUNT,\n",
        "grid:DIM:LEVEL, with RATIO written `a/b` or as a decimal.\n",
        "\n",
    ));
    push_keys(&mut out, "boxdim", &cmd::boxdim::schema(), cmd::boxdim::COLUMNS);
    push_keys(&mut out, "cover", &cmd::cover::schema(), cmd::cover::COLUMNS);
    let _ = writeln!(out, "percolate (columns depend on `experiment`)");
    for spec in cmd::percolate::schema().iter().chain(OUTPUT_KEYS.iter()) {
        let _ = writeln!(out, "  {:<12} (default {:<14}) {}", spec.key, spec.default, spec.help);
    }
    let _ = writeln!(out, "  csv columns (slope):    {}", cmd::percolate::SLOPE_COLUMNS.join(","));
    let _ = writeln!(out, "  csv columns (coverage): {}", cmd::percolate::COVERAGE_COLUMNS.join(","));
    let _ = writeln!(out, "  csv columns (counts):   {}", cmd::percolate::COUNTS_COLUMNS.join(","));
    let _ = writeln!(out);
    push_keys(&mut out, "visibility", &cmd::visibility::schema(), cmd::visibility::COLUMNS);
    push_keys(&mut out, "doubling", &cmd::doubling::schema(), cmd::doubling::COLUMNS);
    push_keys(&mut out, "netaudit", &cmd::netaudit::schema(), cmd::netaudit::COLUMNS);
    out
}

pub fn run() {
    // A closed pipe (e.g. `holdercover describe | head`) is not an error.
    use std::io::Write as _;
    let _ = std::io::stdout().write_all(render().as_bytes());
}
