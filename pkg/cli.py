# cli.py
"""
Command line entry point.

    python cli.py test data.csv --tests SLR --tests U_N -B 1000
    python cli.py simulate data/scenarios/table1.scenarios --preset desk --out table1.csv
    python cli.py diagnose data/scenarios/table1.scenarios --scenario table1-l1.6-a1.0
    python cli.py tables --preset desk
    python cli.py curves --scenario-file data/scenarios/table5.scenarios --out curves.csv
"""
import logging
from pathlib import Path
from typing import Optional

import click

from pipeline import TwoSampleTester
from src.config.config import (
    ALL_TESTS,
    DEFAULT_BOOTSTRAP,
    DEFAULT_LEVEL,
    DEFAULT_N_JOBS,
    DEFAULT_PRESET,
    DEFAULT_SEED,
    DIAGNOSE_JUMP_SAMPLE_SIZE,
    DIAGNOSE_SAMPLE_SIZES,
    LOG_LEVEL,
    OUTPUT_DIR,
    PRESETS,
    SCENARIO_DIR,
)
from src.errors import CurrentStatusError
from src.simulation.parser import ScenarioParser
from src.simulation.runner import curve_table, diagnose, run_scenarios, simulate_samples
from src.simulation.schema import Scenario
from src.testing.ingest import load_samples
from src.testing.schema import BootstrapPlan, TestConfig

logging.basicConfig(
    level=LOG_LEVEL,
    format="%(asctime)s | %(levelname)s | %(message)s",
    datefmt="%H:%M:%S"
)
logger = logging.getLogger(__name__)

# domain errors and pydantic validation errors are both ValueErrors
INPUT_ERRORS = (ValueError, FileNotFoundError)


def _fail(message: str) -> None:
    click.echo(f"Error: {message}", err=True)
    raise SystemExit(1)


def _pick_scenario(path: Path, name: Optional[str], preset: str, seed: int) -> Scenario:
    scenarios = ScenarioParser(preset=preset, seed=seed).parse_file(path)
    if not scenarios:
        raise CurrentStatusError(f"{path} contains no scenarios")
    if name is None:
        return scenarios[0]
    for scenario in scenarios:
        if scenario.name == name:
            return scenario
    raise CurrentStatusError(f"no scenario named {name!r} in {path}")


seed_option = click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True,
                           help="Master seed of all random substreams.")
preset_option = click.option("--preset", type=click.Choice(sorted(PRESETS)), default=DEFAULT_PRESET,
                             show_default=True, help="Replications R and resamples B (desk or full).")
jobs_option = click.option("--n-jobs", type=int, default=DEFAULT_N_JOBS, envvar="CSSTAT_N_JOBS",
                           show_default=True, help="Parallel workers.")
progress_option = click.option("--progress/--no-progress", default=True, help="Progress bars on stderr.")


@click.group()
@click.option("--log-level", default=LOG_LEVEL, show_default=True, help="Root logging level.")
def cli(log_level: str):
    """Two-sample tests for current status data."""
    logging.getLogger().setLevel(log_level.upper())


# ------------------ TEST ------------------
@cli.command("test")
@click.argument("input_csv", type=click.Path(path_type=Path))
@click.option("--tests", "tests", multiple=True, type=click.Choice(ALL_TESTS), help="Tests to run (default: all).")
@click.option("-B", "--bootstrap", "n_resamples", type=int, default=DEFAULT_BOOTSTRAP, show_default=True)
@click.option("--level", type=float, default=DEFAULT_LEVEL, show_default=True)
@click.option("--a", "a", type=float, default=TestConfig().a, show_default=True, help="Window start.")
@click.option("--b", "b", type=float, default=TestConfig().b, show_default=True, help="Window end.")
@click.option("--M", "M", type=float, default=TestConfig().M, show_default=True, help="Observation range [0, M].")
@click.option("--bandwidth-constant", type=float, default=TestConfig().bandwidth_constant, show_default=True)
@click.option("--bandwidth-exponent", type=float, default=TestConfig().bandwidth_exponent, show_default=True)
@click.option("--bias-correct", is_flag=True, help="Subtract the estimated bias D_N from the SLR pivot.")
@click.option("--exit-on-reject", is_flag=True, help="Exit with status 2 when any selected test rejects.")
@click.option("--out", type=click.Path(path_type=Path), default=None, help="Write the outcome table as CSV.")
@seed_option
@jobs_option
def cmd_test(input_csv, tests, n_resamples, level, a, b, M, bandwidth_constant, bandwidth_exponent,
             bias_correct, exit_on_reject, out, seed, n_jobs):
    """Run the tests on a CSV with columns sample,t,delta."""
    try:
        config = TestConfig(a=a, b=b, M=M, bandwidth_constant=bandwidth_constant,
                            bandwidth_exponent=bandwidth_exponent)
        plan = BootstrapPlan(n_resamples=n_resamples, level=level, rng_seed=seed)
        tester = TwoSampleTester(config=config, plan=plan, n_jobs=n_jobs, bias_correct=bias_correct)
        narrative, table, outcomes = tester.process_file(input_csv, tests or ALL_TESTS)
    except INPUT_ERRORS as e:
        _fail(str(e))

    click.echo(narrative)
    if out is not None:
        out.parent.mkdir(parents=True, exist_ok=True)
        table.to_csv(out, index=False, float_format="%.6g")
        click.echo(f"Outcome table written to {out}")
    if exit_on_reject and any(o.reject for o in outcomes):
        raise SystemExit(2)


# ------------------ SIMULATE ------------------
@cli.command("simulate")
@click.argument("scenario_file", type=click.Path(path_type=Path))
@click.option("--out", type=click.Path(path_type=Path), default=None,
              help="Output CSV (default: OUTPUT_DIR/<scenario file stem>.csv).")
@seed_option
@preset_option
@jobs_option
@progress_option
def cmd_simulate(scenario_file, out, seed, preset, n_jobs, progress):
    """Rejection table for every scenario block of a scenario file."""
    try:
        scenarios = ScenarioParser(preset=preset, seed=seed).parse_file(scenario_file)
    except INPUT_ERRORS as e:
        _fail(str(e))
    table = run_scenarios(scenarios, n_jobs=n_jobs, progress=progress)
    path = table.to_csv(out or OUTPUT_DIR / f"{scenario_file.stem}.csv")
    click.echo(f"Rejection table written to {path}")


# ------------------ DIAGNOSE ------------------
@cli.command("diagnose")
@click.argument("scenario_file", type=click.Path(path_type=Path))
@click.option("--scenario", "name", default=None, help="Scenario name (default: first block).")
@click.option("--sizes", default=",".join(str(n) for n in DIAGNOSE_SAMPLE_SIZES), show_default=True,
              help="Comma-separated pooled sample sizes N.")
@click.option("--replications", type=int, default=100, show_default=True)
@click.option("--jump-size", type=int, default=DIAGNOSE_JUMP_SAMPLE_SIZE, show_default=True)
@click.option("--jump-replications", type=int, default=20, show_default=True)
@click.option("--out", type=click.Path(path_type=Path), default=None,
              help="Summary CSV; the per-replication detail goes next to it with suffix _detail.")
@seed_option
@preset_option
@jobs_option
@progress_option
def cmd_diagnose(scenario_file, name, sizes, replications, jump_size, jump_replications, out,
                 seed, preset, n_jobs, progress):
    """Decomposition residuals and jump-count constant for a null scenario."""
    try:
        scenario = _pick_scenario(scenario_file, name, preset, seed)
        sizes = [int(s) for s in sizes.split(",") if s.strip()]
        detail, summary = diagnose(scenario, sizes=sizes, replications=replications, jump_size=jump_size,
                                   jump_replications=jump_replications, n_jobs=n_jobs, progress=progress)
    except INPUT_ERRORS as e:
        _fail(str(e))

    out = out or OUTPUT_DIR / f"{scenario.name}_diagnose.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    summary.to_csv(out, index=False, float_format="%.6g")
    detail.to_csv(out.with_name(f"{out.stem}_detail.csv"), index=False, float_format="%.6g")
    click.echo(summary.to_string(index=False))
    click.echo(f"Diagnostics written to {out}")


# ------------------ TABLES ------------------
@cli.command("tables")
@click.option("--scenario-dir", type=click.Path(path_type=Path), default=SCENARIO_DIR, show_default=True)
@click.option("--out", "out_dir", type=click.Path(path_type=Path), default=OUTPUT_DIR, show_default=True)
@seed_option
@preset_option
@jobs_option
@progress_option
def cmd_tables(scenario_dir, out_dir, seed, preset, n_jobs, progress):
    """Regenerate the rejection table of every bundled scenario file."""
    files = sorted(Path(scenario_dir).glob("*.scenarios"))
    if not files:
        _fail(f"no .scenarios files in {scenario_dir}")
    parser = ScenarioParser(preset=preset, seed=seed)
    for path in files:
        try:
            scenarios = parser.parse_file(path)
        except INPUT_ERRORS as e:
            _fail(f"{path.name}: {e}")
        written = run_scenarios(scenarios, n_jobs=n_jobs, progress=progress).to_csv(out_dir / f"{path.stem}.csv")
        click.echo(f"{path.name} -> {written}")


# ------------------ CURVES ------------------
@cli.command("curves")
@click.option("--input", "input_csv", type=click.Path(path_type=Path), default=None,
              help="User data (sample,t,delta); alternatively --scenario-file.")
@click.option("--scenario-file", type=click.Path(path_type=Path), default=None)
@click.option("--scenario", "name", default=None, help="Scenario name (default: first block).")
@click.option("--replication", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(path_type=Path), required=True)
@seed_option
@preset_option
def cmd_curves(input_csv, scenario_file, name, replication, out, seed, preset):
    """MLE and MSLE curves (per sample and pooled) on the window grid, as CSV."""
    if (input_csv is None) == (scenario_file is None):
        _fail("give exactly one of --input or --scenario-file")
    try:
        if input_csv is not None:
            config = TestConfig()
            sample1, sample2 = load_samples(input_csv, config.M)
            frame = curve_table(sample1, sample2, config)
        else:
            scenario = _pick_scenario(scenario_file, name, preset, seed)
            sample1, sample2 = simulate_samples(scenario, replication)
            frame = curve_table(sample1, sample2, scenario.config, scenario)
    except INPUT_ERRORS as e:
        _fail(str(e))

    out.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(out, index=False, float_format="%.6g")
    click.echo(f"Curves written to {out}")


if __name__ == "__main__":
    cli()
