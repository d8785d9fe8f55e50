"""Command-line front end.

``bemrank verify``
    feasibility, design, assembly, rank suite; exit 0 iff full column rank
``bemrank scan``
    the same for every point of a one-parameter sweep, as CSV
``bemrank simulate``
    verify, then Monte-Carlo LS estimation

Exit codes: 0 full column rank, 1 a rank condition or counting bound
failed, 2 configuration error (no report is written).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .bem import BemKind, build_bem
from .channel import ChannelModel, simulate
from .config import (
    SCHEMA_VERSION,
    ConfigError,
    RunConfig,
    complex_pair,
    load_document,
    parse_config,
)
from .estimation import assemble_P, rank_report
from .geometry import Mode, check_feasibility
from .pilots import PilotPattern, design_patterns, harmonic_pattern

OUTPUT_DIR_ENV = "BEMRANK_OUTPUT_DIR"

EXIT_OK, EXIT_RANK, EXIT_CONFIG = 0, 1, 2

#: Parameters accepted by ``scan --sweep`` and how they map onto the config.
SWEEPABLE = {"N_T": "N_T", "nt": "N_T", "Q": "Q", "L_P": "L_P", "bem": "bem"}

CSV_COLUMNS = [
    "preset", "mode", "bem", "N", "N_P", "P_sep", "L_P", "B_c", "L", "Q", "N_T",
    "feasible", "violated", "bemc", "theta_orthogonal", "phi_full", "rnc_bem",
    "rank", "columns", "full_column_rank", "verdict",
]


# ---------------------------------------------------------------------------
# pipeline
# ---------------------------------------------------------------------------

def build_patterns(cfg: RunConfig) -> List[PilotPattern]:
    geo = cfg.geometry
    if cfg.patterns is None:
        return design_patterns(geo, cfg.mode, n_tx=cfg.n_tx)
    out = []
    for tx, pc in enumerate(cfg.patterns):
        if pc.matrix is not None:
            matrix = np.array(pc.matrix, dtype=complex)
            out.append(PilotPattern(matrix, None, tx, None, 1.0))
        else:
            out.append(harmonic_pattern(geo, pc.harmonics, pc.chi, tx))
    return out


def _pattern_summary(pattern: PilotPattern, verbose: bool) -> Dict[str, Any]:
    out = {
        "tx": pattern.tx_index,
        "harmonics": None if pattern.harmonics is None else list(pattern.harmonics),
        "chi": complex_pair(complex(pattern.chi)),
        "energy": pattern.energy,
    }
    if verbose:
        out["matrix"] = [[complex_pair(z) for z in row] for row in pattern.matrix]
    return out


def verify(cfg: RunConfig, verbose: bool = False) -> Tuple[int, Dict[str, Any]]:
    """Run the rank pipeline; return the exit code and report sections."""
    geo = cfg.geometry
    feas = check_feasibility(geo, cfg.mode, cfg.n_tx)
    sections: Dict[str, Any] = {"feasibility": feas.as_dict()}
    enforce = cfg.patterns is None
    if enforce and not feas.passed:
        sections.update(design=None, rank=None, verdict="infeasible",
                        violated=[c.name for c in feas.violated])
        return EXIT_RANK, sections

    patterns = build_patterns(cfg)
    bem = build_bem(cfg.bem)
    est = assemble_P(geo, patterns, bem)
    report = rank_report(est)
    full = report.full_column_rank
    sections.update(
        design={"mode": cfg.mode.value if enforce else "custom",
                "patterns": [_pattern_summary(p, verbose) for p in patterns],
                "matrix_shape": list(est.P.shape)},
        rank=report.as_dict(verbose),
        verdict="full-rank" if full else "rank-deficient",
        violated=[c.name for c in feas.violated],
    )
    return (EXIT_OK if full else EXIT_RANK), sections


def scenario_row(cfg: RunConfig, sections: Dict[str, Any]) -> Dict[str, Any]:
    """Flat summary of one run; also the CSV row of ``scan``."""
    geo = cfg.geometry
    rank = sections.get("rank")
    row = {
        "preset": cfg.preset or "",
        "mode": cfg.mode.value if cfg.patterns is None else "custom",
        "bem": cfg.bem.kind.value,
        **{k: getattr(geo, k) for k in ("N", "N_P", "P_sep", "L_P", "B_c", "L", "Q", "N_T")},
        "feasible": sections["feasibility"]["passed"],
        "violated": ";".join(sections.get("violated") or []),
        "bemc": None, "theta_orthogonal": None, "phi_full": None, "rnc_bem": None,
        "rank": None, "columns": cfg.n_tx * geo.L * geo.Q,
        "full_column_rank": False,
        "verdict": sections["verdict"],
    }
    if rank is not None:
        row.update(
            bemc=rank["bemc"]["passed"],
            theta_orthogonal=rank["theta_orthogonality"]["passed"],
            phi_full=all(p["rank"] == geo.Q for p in rank["phi_ranks"]),
            rnc_bem=rank["rnc_bem"]["passed"],
            rank=rank["final"]["rank"],
            columns=rank["final"]["columns"],
            full_column_rank=rank["final"]["full_column_rank"],
        )
    return row


def _jsonable(obj):
    """Replace non-finite floats by ``None`` and numpy scalars by Python ones."""
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def _document(command: str, cfg: RunConfig, sections: Dict[str, Any],
              exit_code: int) -> Dict[str, Any]:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": "bemrank", "version": __version__},
        "command": command,
        "config": cfg.as_dict(),
        **sections,
        "scenario": scenario_row(cfg, sections),
        "exit_code": exit_code,
    }
    return _jsonable(doc)


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------

def _parse_values(text: str) -> List[str]:
    """``a,b,c`` or an inclusive integer range ``lo..hi``."""
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        try:
            return [str(v) for v in range(int(lo), int(hi) + 1)]
        except ValueError:
            raise ConfigError(f"bad range {text!r}") from None
    return [v.strip() for v in text.split(",") if v.strip()]


def parse_sweep(text: Optional[str]) -> Tuple[str, List[Any]]:
    if not text or "=" not in text:
        raise ConfigError("scan needs --sweep NAME=v1,v2,... (or NAME=lo..hi)")
    name, values = text.split("=", 1)
    name = name.strip()
    if name not in SWEEPABLE:
        raise ConfigError(f"cannot sweep {name!r}; choose from {', '.join(sorted(SWEEPABLE))}")
    key = SWEEPABLE[name]
    raw = _parse_values(values)
    if not raw:
        raise ConfigError("empty sweep")
    if key == "bem":
        return key, [v.lower() for v in raw]
    try:
        return key, [int(v) for v in raw]
    except ValueError:
        raise ConfigError(f"sweep values for {name} must be integers") from None


def _parse_snr_list(text: str) -> List[Optional[float]]:
    out = []
    for item in (v.strip() for v in text.split(",") if v.strip()):
        if item.lower() in ("none", "inf", "noiseless"):
            out.append(None)
        else:
            try:
                out.append(float(item))
            except ValueError:
                raise ConfigError(f"bad SNR {item!r}") from None
    return out


def config_from_args(args) -> RunConfig:
    if args.config is None and args.preset is None:
        raise ConfigError("give --config PATH or --preset NAME")
    doc = load_document(args.config) if args.config else {}
    if args.preset is not None:
        doc["preset"] = args.preset
    if args.bem is not None:
        doc.setdefault("bem", {})["kind"] = args.bem
    if args.mode is not None:
        doc["mode"] = args.mode
    if args.nt is not None:
        doc["n_tx"] = args.nt
    sim = doc.setdefault("simulation", {})
    if not isinstance(sim, dict):
        raise ConfigError("simulation must be an object")
    if args.seed is not None:
        sim["seed"] = args.seed
    if getattr(args, "trials", None) is not None:
        sim["trials"] = args.trials
    if getattr(args, "snr", None) is not None:
        sim["snr_db"] = _parse_snr_list(args.snr)
    if getattr(args, "model", None) is not None:
        sim["model"] = args.model
    if getattr(args, "data", False):
        sim["data"] = True
    return parse_config(doc)


def _default_name(command: str, cfg: RunConfig, suffix: str) -> str:
    return f"{command}-{cfg.preset or 'custom'}-{cfg.mode.value}-{cfg.bem.kind.value}.{suffix}"


def _emit(text: str, out: Optional[str], default_name: str, summary: str):
    """Write to ``out``, else into ``$BEMRANK_OUTPUT_DIR``, else stdout."""
    target = None
    if out:
        target = Path(out)
    elif os.environ.get(OUTPUT_DIR_ENV):
        target = Path(os.environ[OUTPUT_DIR_ENV]) / default_name
    if target is None:
        sys.stdout.write(text)
        return
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(text)
    print(f"{summary} -> {target}")


def _dump(doc: Dict[str, Any]) -> str:
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def _summary_line(sections: Dict[str, Any]) -> str:
    rank = sections.get("rank")
    if rank is None:
        return f"infeasible: {', '.join(sections['violated'])}"
    final = rank["final"]
    return f"{sections['verdict']}: rank {final['rank']} / {final['columns']}"


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_verify(args) -> int:
    cfg = config_from_args(args)
    start = time.perf_counter()
    code, sections = verify(cfg, args.verbose)
    doc = _document("verify", cfg, sections, code)
    if args.timing:
        doc["wall_clock_s"] = time.perf_counter() - start
    _emit(_dump(doc), args.out, _default_name("verify", cfg, "json"), _summary_line(sections))
    if code != EXIT_OK:
        print(_summary_line(sections), file=sys.stderr)
    return code


def cmd_scan(args) -> int:
    base = config_from_args(args)
    key, values = parse_sweep(args.sweep)
    # validate every point before computing any
    configs = []
    for v in values:
        changes = {"bem": v} if key == "bem" else {key: v}
        configs.append(base.with_changes(**changes))
    rows, worst = [], EXIT_OK
    for cfg in configs:
        code, sections = verify(cfg)
        worst = max(worst, code)
        rows.append(scenario_row(cfg, sections))
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: ("" if row[k] is None else row[k]) for k in CSV_COLUMNS})
    n_full = sum(bool(r["full_column_rank"]) for r in rows)
    _emit(buf.getvalue(), args.out, _default_name("scan", base, "csv"),
          f"{n_full}/{len(rows)} points full rank")
    return worst


def cmd_simulate(args) -> int:
    cfg = config_from_args(args)
    start = time.perf_counter()
    code, sections = verify(cfg, args.verbose)
    if code != EXIT_OK:
        sections["simulation"] = None
        doc = _document("simulate", cfg, sections, code)
        _emit(_dump(doc), args.out, _default_name("simulate", cfg, "json"),
              _summary_line(sections))
        print(f"{_summary_line(sections)}; not simulating", file=sys.stderr)
        return code
    sim_cfg = cfg.simulation
    est = assemble_P(cfg.geometry, build_patterns(cfg), build_bem(cfg.bem))
    result = simulate(est, sim_cfg.snr_db, sim_cfg.trials, seed=sim_cfg.seed,
                      model=sim_cfg.model, data=sim_cfg.data, profile=sim_cfg.profile)
    metrics = {"per_snr": result.summary()}
    if args.verbose:
        metrics["trials"] = [
            {"snr_db": s, "nmse_coeff": result.nmse_coeff[s], "nmse_taps": result.nmse_taps[s]}
            for s in result.snr_db
        ]
    sections["simulation"] = metrics
    doc = _document("simulate", cfg, sections, code)
    if args.timing:
        doc["wall_clock_s"] = time.perf_counter() - start
    _emit(_dump(doc), args.out, _default_name("simulate", cfg, "json"),
          f"simulated {sim_cfg.trials} trials")
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bemrank",
        description="Full-column-rank certification of BEM channel-estimation matrices.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON run configuration")
    common.add_argument("--preset", choices=["s1", "s2", "s3", "s4"],
                        help="named parameter set (overrides the config's preset)")
    common.add_argument("--bem", choices=[k.value for k in BemKind], help="BEM family")
    common.add_argument("--mode", choices=[m.value for m in Mode], help="pilot design")
    common.add_argument("--nt", type=int, metavar="K", help="number of transmitters")
    common.add_argument("--seed", type=int, metavar="S", help="base RNG seed")
    common.add_argument("--out", metavar="PATH",
                        help=f"output file (default: ${OUTPUT_DIR_ENV}/<name>, else stdout)")
    common.add_argument("--verbose", action="store_true",
                        help="include Lambda tables, pattern matrices and per-trial values")
    common.add_argument("--timing", action="store_true",
                        help="record wall-clock time (makes reports non-reproducible)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", parents=[common], help="certify one configuration")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("scan", parents=[common], help="sweep one parameter, CSV out")
    p.add_argument("--sweep", metavar="NAME=VALUES",
                   help="N_T, Q, L_P or bem; values as a,b,c or lo..hi")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("simulate", parents=[common], help="verify, then LS Monte-Carlo")
    p.add_argument("--trials", type=int, help="number of trials")
    p.add_argument("--snr", metavar="LIST", help="SNRs in dB, e.g. 10,30 or none")
    p.add_argument("--model", choices=[m.value for m in ChannelModel], help="channel model")
    p.add_argument("--data", action="store_true", help="fill data subcarriers with QPSK")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors already; keep --help/--version at 0
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        # inputs that parse but cannot be built, e.g. a pattern colliding on a subcarrier
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
