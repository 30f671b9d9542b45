"""Command-line front end.

Subcommands: kb-build (stage 1), scan (stage 2), modify (fixture
modification harness). Exit codes are a stable contract:

  kb-build: 0 at least one entry built, 1 none buildable, 2 unreadable input
  scan:     0 completed with zero findings, 3 completed with findings,
            1 operational failure, 2 usage/unreadable input
  modify:   0 written, 1 relocation collision or bad input, 2 usage

Threshold flags override the shipped defaults; every flag mirrors an
environment variable with the JARSCAN_ prefix (e.g. JARSCAN_THETA_PT).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import subprocess
import sys
from pathlib import Path

from . import __version__
from .errors import JarscanError, KbFormatError, RelocationCollision
from .kb import build_from_manifest, load as load_kb, save as save_kb
from .scanner import (
    DEFAULT_THETA_CC,
    DEFAULT_THETA_CT,
    DEFAULT_THETA_PT,
    ScanConfig,
    VULNERABLE,
    render_table,
    report_to_json,
    retrieve_dependencies,
    scan,
)

log = logging.getLogger("jarscan")


def _env_default(name: str, fallback, cast=float):
    raw = os.environ.get(f"JARSCAN_{name}")
    if raw is None:
        return fallback
    try:
        return cast(raw)
    except ValueError:
        log.warning("ignoring bad JARSCAN_%s=%r", name, raw)
        return fallback


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jarscan",
        description="Bytecode-centric scanner for known-vulnerable JVM dependencies.")
    parser.add_argument("--version", action="version", version=f"jarscan {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="log progress and skip reasons to stderr")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    kb = sub.add_parser("kb-build", help="build a knowledge base from a manifest")
    kb.add_argument("manifest", help="lines: cve_id pre_dir post_dir [provenance]")
    kb.add_argument("-o", "--out", required=True, help="knowledge-base output path")

    sc = sub.add_parser("scan", help="scan JARs against a knowledge base")
    sc.add_argument("--kb", required=True, help="knowledge-base file")
    sc.add_argument("jars", nargs="*", help="explicit JAR paths")
    sc.add_argument("--dir", help="directory searched recursively for *.jar")
    sc.add_argument("--list", dest="list_file", help="text file of JAR paths")
    sc.add_argument("--command", help="external command whose stdout lists JAR paths")
    sc.add_argument("--mode", default=_env_default("MODE", "default,repack", str),
                    help="comma-separated subset of: default,repack")
    sc.add_argument("--theta-pt", type=float,
                    default=_env_default("THETA_PT", DEFAULT_THETA_PT))
    sc.add_argument("--theta-cc", type=float,
                    default=_env_default("THETA_CC", DEFAULT_THETA_CC))
    sc.add_argument("--theta-ct", type=float,
                    default=_env_default("THETA_CT", DEFAULT_THETA_CT))
    sc.add_argument("--format", choices=("json", "table"), default="table")
    sc.add_argument("--out", help="write the report here instead of stdout")
    sc.add_argument("--jobs", type=int,
                    default=_env_default("JOBS", 1, int),
                    help="parallel JAR scans")

    mo = sub.add_parser("modify", help="produce type 1-4 modified JAR variants")
    mo.add_argument("--kind", type=int, required=True, choices=(1, 2, 3, 4))
    mo.add_argument("inputs", nargs="+", help="input JAR paths")
    mo.add_argument("-o", "--out", required=True, help="output JAR path")
    mo.add_argument("--prefix", default="r.", help="relocation prefix for type 4")
    mo.add_argument("--seed", type=int, default=0, help="type-1 transform seed")
    return parser


def cmd_kb_build(args) -> int:
    try:
        kb, stats = build_from_manifest(args.manifest)
    except (OSError, KbFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for cve, msg in stats.errors:
        print(f"{cve}: {msg}", file=sys.stderr)
    for cve in stats.empty_diff:
        print(f"{cve}: rejected, empty diff after normalization", file=sys.stderr)
    print(f"built {len(stats.built)} entries "
          f"({len(stats.empty_diff)} empty-diff rejects, "
          f"{len(stats.errors)} errors)", file=sys.stderr)
    if not stats.built:
        return 1
    save_kb(kb, args.out)
    return 0


def cmd_scan(args) -> int:
    try:
        kb = load_kb(args.kb)
    except (OSError, KbFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    modes = tuple(m.strip() for m in args.mode.split(",") if m.strip())
    bad = [m for m in modes if m not in ("default", "repack")]
    if bad or not modes:
        print(f"error: unknown mode(s) {bad}", file=sys.stderr)
        return 2
    try:
        jars = retrieve_dependencies(directory=args.dir, list_file=args.list_file,
                                     command=args.command, paths=args.jars)
    except (OSError, subprocess.CalledProcessError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    config = ScanConfig(theta_pt=args.theta_pt, theta_cc=args.theta_cc,
                        theta_ct=args.theta_ct, modes=modes)
    report = scan(jars, kb, config, jobs=max(1, args.jobs))

    if args.format == "json":
        text = json.dumps(report_to_json(report), indent=2, sort_keys=True) + "\n"
    else:
        text = render_table(report) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    findings = sum(1 for j in report.jars for f in j.findings
                   if f.verdict == VULNERABLE)
    errors = sum(1 for j in report.jars if j.error)
    if errors and not report.jars:
        return 1
    return 3 if findings else 0


def cmd_modify(args) -> int:
    try:
        inputs = [Path(p).read_bytes() for p in args.inputs]
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    from .modharness import modify
    try:
        out = modify(inputs, args.kind, prefix=args.prefix, seed=args.seed)
    except (RelocationCollision, JarscanError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    Path(args.out).write_bytes(out)
    print(f"wrote {args.out}", file=sys.stderr)
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if args.subcommand == "kb-build":
        return cmd_kb_build(args)
    if args.subcommand == "scan":
        return cmd_scan(args)
    return cmd_modify(args)


if __name__ == "__main__":
    sys.exit(main())
