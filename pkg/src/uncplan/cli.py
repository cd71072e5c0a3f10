"""Command-line front end: generate scenario suites, evaluate selection with
metric reports, and run the five-preset ablation.

Exit codes: 0 success, 2 config error, 3 scenario parse error, 4 invariant
violation, 5 oracle mismatch, 6 I/O failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .metrics import MetricsRow, ScenarioMetrics, aggregate, dacr_flags, evaluate_trajectory
from .oracles import oracle_dacr_flags, oracle_select
from .scenario import (
    GeneratorParams,
    Scenario,
    ScenarioFormatError,
    ScenarioInvariantError,
    generate_suite,
    load_scenario,
    load_suite,
)
from .selection import CandidateSet, SelectionConfig, ucas_select

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PARSE = 3
EXIT_INVARIANT = 4
EXIT_ORACLE = 5
EXIT_IO = 6

PRESETS = ("baseline", "unc-only", "multimodal", "cas", "ucas")


class ConfigError(Exception):
    pass


class OracleMismatch(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    suite: Path
    preset: str
    selection: SelectionConfig
    convention: str
    verify: bool


def preset_selection(preset: str, base: SelectionConfig) -> tuple[SelectionConfig, int | None]:
    """Filter toggles and candidate-count cap implied by an ablation preset."""
    if preset == "baseline" or preset == "unc-only":
        cfg = dataclasses.replace(
            base,
            enable_uncertainty_filter=False,
            enable_agent_filter=False,
            enable_boundary_filter=False,
        )
        return cfg, 1
    if preset == "multimodal":
        cfg = dataclasses.replace(
            base,
            enable_uncertainty_filter=False,
            enable_agent_filter=False,
            enable_boundary_filter=False,
        )
        return cfg, None
    if preset == "cas":
        cfg = dataclasses.replace(
            base,
            enable_uncertainty_filter=False,
            enable_agent_filter=True,
            enable_boundary_filter=True,
        )
        return cfg, None
    if preset == "ucas":
        cfg = dataclasses.replace(
            base,
            enable_uncertainty_filter=True,
            enable_agent_filter=True,
            enable_boundary_filter=True,
        )
        return cfg, None
    raise ConfigError(f"unknown preset {preset!r}, expected one of {PRESETS}")


def _truncate_candidates(cands: CandidateSet, limit: int | None) -> CandidateSet:
    if limit is None:
        return cands
    return CandidateSet(
        turn_left=cands.turn_left[:limit],
        turn_right=cands.turn_right[:limit],
        go_straight=cands.go_straight[:limit],
    )


def _verify_scenario(s: Scenario, cfg: SelectionConfig, report, candidates) -> None:
    """Differential checks of selection and containment against the oracles."""
    oracle_idx = oracle_select(
        candidates,
        s.command,
        cfg,
        risks=[r.risk_nll for r in report.records],
        agent_flags=[r.agent_collision for r in report.records],
        boundary_flags=[r.boundary_collision for r in report.records],
    )
    if oracle_idx != report.chosen_index:
        raise OracleMismatch(
            f"scenario {s.scenario_id}: selection chose index {report.chosen_index}, "
            f"oracle says {oracle_idx}"
        )
    da = s.map.drivable_area
    primary = dacr_flags(report.chosen, s.ego_dims, da)
    reference = oracle_dacr_flags(report.chosen, s.ego_dims, da)
    if primary != reference:
        raise OracleMismatch(
            f"scenario {s.scenario_id}: drivable-area conflict flags {primary} "
            f"disagree with oracle {reference}"
        )


def evaluate_suite(run: RunConfig) -> tuple[dict, list[MetricsRow], list[ScenarioMetrics]]:
    """Select and score every scenario of a suite under one preset."""
    manifest, paths = load_suite(run.suite)
    cfg, limit = preset_selection(run.preset, run.selection)

    entries = sorted(zip(manifest["scenarios"], paths), key=lambda e: e[0]["id"])
    per_scenario: list[ScenarioMetrics] = []
    for entry, path in entries:
        try:
            s = load_scenario(path)
        except (ScenarioFormatError, ScenarioInvariantError, OSError) as e:
            raise type(e)(f"scenario {entry['id']}: {e}") from None
        candidates = _truncate_candidates(s.candidates, limit)
        report = ucas_select(candidates, s.command, s.map, s.agents, s.ego_dims, cfg)
        if run.verify:
            _verify_scenario(s, cfg, report, candidates)
        per_scenario.append(
            evaluate_trajectory(
                report.chosen,
                s.ego_dims,
                s.ground_truth(),
                s.scenario_id,
                s.scenario_class,
                run.convention,
            )
        )
    rows = aggregate(per_scenario, stratify=True)
    return manifest, rows, per_scenario


# ---------------------------------------------------------------------------
# report rendering


def _header_lines(pairs: list[tuple[str, object]]) -> list[str]:
    lines = [f"# uncplan-version: {__version__}"]
    lines.extend(f"# {key}: {value}" for key, value in pairs)
    return lines


_ROW_FIELDS = (
    "de_1s", "de_2s", "de_3s", "de_avg",
    "cr_1s", "cr_2s", "cr_3s", "cr_avg",
    "dacr_1s", "dacr_2s", "dacr_3s", "dacr_avg",
)


def render_rows_csv(rows: list[MetricsRow], header_pairs: list[tuple[str, object]]) -> str:
    lines = _header_lines(header_pairs)
    lines.append("stratum,n," + ",".join(_ROW_FIELDS))
    for row in rows:
        values = [repr(getattr(row, f)) for f in _ROW_FIELDS]
        lines.append(f"{row.scenario_class},{row.n_scenarios}," + ",".join(values))
    return "\n".join(lines) + "\n"


def render_scenarios_csv(per_scenario: list[ScenarioMetrics], header_pairs) -> str:
    lines = _header_lines(header_pairs)
    lines.append("scenario_id,class,de_1s,de_2s,de_3s,cr_1s,cr_2s,cr_3s,dacr_1s,dacr_2s,dacr_3s")
    for r in sorted(per_scenario, key=lambda r: r.scenario_id):
        cells = [r.scenario_id, r.scenario_class]
        cells += [repr(v) for v in r.de]
        cells += [str(int(v)) for v in r.cr]
        cells += [repr(v) for v in r.dacr]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def render_rows_table(rows: list[MetricsRow], title: str) -> str:
    out = [title]
    head = (
        f"{'Stratum':<10} {'N':>5} | {'DE (m)':>7} {'1s':>6} {'2s':>6} {'3s':>6} {'Avg.':>6} |"
        f" {'CR (%)':>7} {'1s':>6} {'2s':>6} {'3s':>6} {'Avg.':>6} |"
        f" {'DACR (%)':>9} {'1s':>6} {'2s':>6} {'3s':>6} {'Avg.':>6}"
    )
    out.append(head)
    out.append("-" * len(head))
    for r in rows:
        out.append(
            f"{r.scenario_class:<10} {r.n_scenarios:>5} | {'':>7} {r.de_1s:>6.3f} {r.de_2s:>6.3f} {r.de_3s:>6.3f} {r.de_avg:>6.3f} |"
            f" {'':>7} {100 * r.cr_1s:>6.2f} {100 * r.cr_2s:>6.2f} {100 * r.cr_3s:>6.2f} {100 * r.cr_avg:>6.2f} |"
            f" {'':>9} {100 * r.dacr_1s:>6.2f} {100 * r.dacr_2s:>6.2f} {100 * r.dacr_3s:>6.2f} {100 * r.dacr_avg:>6.2f}"
        )
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# subcommands


def _parse_mix(raw: str) -> float:
    if raw == "turn-only":
        return 1.0
    if raw == "straight-only":
        return 0.0
    try:
        frac = float(raw)
    except ValueError:
        raise ConfigError(
            f"--mix must be 'turn-only', 'straight-only' or a turn fraction in [0, 1], got {raw!r}"
        ) from None
    if not 0.0 <= frac <= 1.0:
        raise ConfigError(f"--mix fraction must be in [0, 1], got {frac}")
    return frac


def cmd_generate(args) -> int:
    if args.count < 1:
        raise ConfigError(f"--count must be >= 1, got {args.count}")
    turn_fraction = _parse_mix(args.mix)
    try:
        params = GeneratorParams(noise_scale=args.noise, n_candidates=args.candidates)
    except ValueError as e:
        raise ConfigError(str(e)) from None
    manifest = generate_suite(args.out, args.count, turn_fraction, params, args.seed)
    print(f"wrote {args.count} scenarios, manifest {manifest}")
    return EXIT_OK


def _base_selection(args) -> SelectionConfig:
    try:
        return SelectionConfig(
            nll_threshold=args.nll_threshold,
            boundary_clearance=args.clearance,
        )
    except ValueError as e:
        raise ConfigError(str(e)) from None


def cmd_eval(args) -> int:
    run = RunConfig(
        suite=Path(args.suite),
        preset=args.preset,
        selection=_base_selection(args),
        convention=args.convention,
        verify=args.verify,
    )
    manifest, rows, per_scenario = evaluate_suite(run)
    header = [
        ("command", "eval"),
        ("suite", args.suite),
        ("master-seed", manifest.get("master_seed")),
        ("preset", args.preset),
        ("nll-threshold", repr(run.selection.nll_threshold)),
        ("clearance", repr(run.selection.boundary_clearance)),
        ("agent-margin", repr(run.selection.agent_margin)),
        ("risk-aggregator", run.selection.risk_aggregator),
        ("convention", args.convention),
        ("verify", str(args.verify).lower()),
    ]
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    csv_path = Path(str(out) + ".csv")
    csv_path.write_text(render_rows_csv(rows, header), encoding="utf-8")
    Path(str(out) + ".scenarios.csv").write_text(
        render_scenarios_csv(per_scenario, header), encoding="utf-8"
    )
    title = f"preset={args.preset} convention={args.convention} suite={args.suite}"
    Path(str(out) + ".txt").write_text(render_rows_table(rows, title), encoding="utf-8")
    print(render_rows_table(rows, title), end="")
    print(f"reports written to {csv_path} (+ .scenarios.csv, .txt)")
    return EXIT_OK


def cmd_ablate(args) -> int:
    base = _base_selection(args)
    overall: list[tuple[str, MetricsRow]] = []
    for preset in PRESETS:
        run = RunConfig(
            suite=Path(args.suite),
            preset=preset,
            selection=base,
            convention=args.convention,
            verify=False,
        )
        manifest, rows, _ = evaluate_suite(run)
        overall.append((preset, rows[0]))

    header = [
        ("command", "ablate"),
        ("suite", args.suite),
        ("master-seed", manifest.get("master_seed")),
        ("nll-threshold", repr(base.nll_threshold)),
        ("clearance", repr(base.boundary_clearance)),
        ("convention", args.convention),
    ]
    lines = _header_lines(header)
    lines.append("preset,n,cr_avg,dacr_avg")
    for preset, row in overall:
        lines.append(f"{preset},{row.n_scenarios},{repr(row.cr_avg)},{repr(row.dacr_avg)}")
    csv_text = "\n".join(lines) + "\n"

    table = [f"ablation on {args.suite} (convention={args.convention})"]
    head = f"{'preset':<12} {'N':>5} {'CR (%)':>9} {'DACR (%)':>10}"
    table.append(head)
    table.append("-" * len(head))
    for preset, row in overall:
        table.append(f"{preset:<12} {row.n_scenarios:>5} {100 * row.cr_avg:>9.2f} {100 * row.dacr_avg:>10.2f}")
    table_text = "\n".join(table) + "\n"

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    csv_path = Path(str(out) + ".csv")
    csv_path.write_text(csv_text, encoding="utf-8")
    Path(str(out) + ".txt").write_text(table_text, encoding="utf-8")
    print(table_text, end="")
    print(f"reports written to {csv_path} (+ .txt)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uncplan",
        description="Uncertainty-aware trajectory selection on synthetic driving scenario suites.",
    )
    parser.add_argument("--version", action="version", version=f"uncplan {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    g = sub.add_parser("generate", help="write a deterministic scenario suite")
    g.add_argument("--count", type=int, required=True, help="number of scenarios")
    g.add_argument("--mix", default="0.5", help="turn fraction in [0,1], or turn-only/straight-only")
    g.add_argument("--noise", type=float, default=0.5, help="map perturbation Laplace scale (m)")
    g.add_argument("--seed", type=int, default=0, help="master seed")
    g.add_argument("--candidates", type=int, default=5, help="planning modes per command")
    g.add_argument("--out", required=True, help="output directory")
    g.set_defaults(func=cmd_generate)

    e = sub.add_parser("eval", help="run selection and metrics over a suite")
    e.add_argument("--suite", required=True, help="suite manifest path")
    e.add_argument("--preset", choices=PRESETS, default="ucas")
    e.add_argument("--nll-threshold", type=float, default=2.0)
    e.add_argument("--clearance", type=float, default=0.3)
    e.add_argument("--convention", choices=("cumulative", "instantaneous"), default="cumulative")
    e.add_argument("--verify", action="store_true", help="differential-check against the oracles")
    e.add_argument("--out", required=True, help="output path prefix for reports")
    e.set_defaults(func=cmd_eval)

    a = sub.add_parser("ablate", help="evaluate all five presets on one suite")
    a.add_argument("--suite", required=True, help="suite manifest path")
    a.add_argument("--nll-threshold", type=float, default=2.0)
    a.add_argument("--clearance", type=float, default=0.3)
    a.add_argument("--convention", choices=("cumulative", "instantaneous"), default="cumulative")
    a.add_argument("--out", required=True, help="output path prefix for reports")
    a.set_defaults(func=cmd_ablate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OracleMismatch as e:
        print(f"oracle mismatch: {e}", file=sys.stderr)
        return EXIT_ORACLE
    except ScenarioInvariantError as e:
        print(f"invariant violation: {e}", file=sys.stderr)
        return EXIT_INVARIANT
    except ScenarioFormatError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except ValueError as e:
        print(f"invariant violation: {e}", file=sys.stderr)
        return EXIT_INVARIANT
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
