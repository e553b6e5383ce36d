"""Command-line interface.

Subcommands:
    mine       filter a commit corpus and emit per-task JSONL samples
    eval       score a sample file, optionally with CSV and figures
    ablation   compare selective vs random prior choice on gen samples
    serve      run the HTTP session service
    replay     rebuild a session from its event log and print its digest
    recommend  one-shot recommendations for a project plus one edit
    report     re-render an existing report as CSV and figures
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .backends import Backends
from .config import EngineConfig
from .errors import EditRecError
from .evaluation import DEFAULT_KS, evaluate, run_ablation
from .mining import TASKS, mine, read_samples
from .model import Edit
from .reporting import render_figures, write_report_csv, write_report_json
from .session import EditSession

logger = logging.getLogger(__name__)


def _load_config(path: str | None) -> EngineConfig:
    if path:
        return EngineConfig.from_file(path)
    return EngineConfig()


def _parse_ks(raw: str) -> list[int]:
    try:
        ks = [int(part) for part in raw.split(",") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad k list {raw!r}") from exc
    if not ks:
        raise argparse.ArgumentTypeError("k list is empty")
    return ks


def _read_project(root: Path, max_file_bytes: int = 200_000) -> dict[str, list[str]]:
    files = {}
    for path in sorted(root.rglob("*")):
        if not path.is_file() or ".git" in path.parts:
            continue
        blob = path.read_bytes()
        if len(blob) > max_file_bytes or b"\x00" in blob[:1024]:
            continue
        rel = path.relative_to(root).as_posix()
        files[rel] = blob.decode("utf-8", errors="replace").splitlines()
    return files


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="editrec",
        description="Edit recommendation engine: mining, evaluation, serving.",
    )
    parser.add_argument("--verbose", "-v", action="store_true",
                        help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p_mine = sub.add_parser("mine", help="mine a commit corpus into samples")
    source = p_mine.add_mutually_exclusive_group(required=True)
    source.add_argument("--repo", help="git repository to walk")
    source.add_argument("--commits", help="directory of per-commit JSON files")
    p_mine.add_argument("--out", required=True, help="output directory")
    p_mine.add_argument("--task", default="all",
                        choices=("all", *TASKS), help="which sample sets")
    p_mine.add_argument("--seed", type=int, default=42)
    p_mine.add_argument("--negatives", type=int, default=10)

    p_eval = sub.add_parser("eval", help="evaluate a JSONL sample file")
    p_eval.add_argument("--dataset", required=True)
    p_eval.add_argument("--task", required=True, choices=TASKS)
    p_eval.add_argument("--k", type=_parse_ks, default=list(DEFAULT_KS),
                        help="comma-separated candidate counts (gen only)")
    p_eval.add_argument("--priors", default="selective",
                        choices=("selective", "random"))
    p_eval.add_argument("--seed", type=int, default=42)
    p_eval.add_argument("--split", default=None,
                        choices=("train", "valid", "test"),
                        help="restrict to one split")
    p_eval.add_argument("--config", default=None, help="engine config JSON")
    p_eval.add_argument("--out", required=True, help="report JSON path")
    p_eval.add_argument("--csv", default=None, help="also write CSV here")
    p_eval.add_argument("--figures", default=None,
                        help="also render figures into this directory")

    p_abl = sub.add_parser("ablation",
                           help="selective vs random prior comparison")
    p_abl.add_argument("--dataset", required=True, help="gen JSONL samples")
    p_abl.add_argument("--k", type=_parse_ks, default=list(DEFAULT_KS))
    p_abl.add_argument("--seed", type=int, default=42)
    p_abl.add_argument("--split", default=None,
                       choices=("train", "valid", "test"))
    p_abl.add_argument("--config", default=None)
    p_abl.add_argument("--out", required=True)
    p_abl.add_argument("--csv", default=None)
    p_abl.add_argument("--figures", default=None)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8940)
    p_serve.add_argument("--config", default=None)
    p_serve.add_argument("--log-dir", default=None,
                         help="write per-session event logs here")

    p_replay = sub.add_parser("replay", help="rebuild a session from its log")
    p_replay.add_argument("--log", required=True)
    p_replay.add_argument("--config", default=None)

    p_rec = sub.add_parser("recommend", help="one-shot recommendations")
    p_rec.add_argument("--project", required=True, help="project directory")
    p_rec.add_argument("--edit", required=True,
                       help="edit JSON (inline or @file)")
    p_rec.add_argument("--prompt", default="")
    p_rec.add_argument("--candidates", default=None, metavar="REF",
                       help="also print candidates for this region ref")
    p_rec.add_argument("--k", type=int, default=3)
    p_rec.add_argument("--config", default=None)

    p_report = sub.add_parser("report", help="re-render an existing report")
    p_report.add_argument("--input", required=True, help="report JSON")
    p_report.add_argument("--csv", default=None)
    p_report.add_argument("--figures", default=None)

    return parser


def _cmd_mine(args) -> int:
    tasks = TASKS if args.task == "all" else (args.task,)
    source = args.repo or args.commits
    report = mine(source, args.out, tasks=tasks, seed=args.seed,
                  negatives=args.negatives)
    print(json.dumps(report, sort_keys=True, indent=2))
    return 0


def _filtered_samples(path: str, split: str | None, task: str) -> list[dict]:
    # A mined output directory stands in for its per-task sample file.
    candidate = Path(path)
    if candidate.is_dir():
        candidate = candidate / f"{task}.jsonl"
    samples = read_samples(candidate)
    if split:
        samples = [s for s in samples if s.get("split") == split]
    return samples


def _emit_report(report, out: str, csv_path: str | None,
                 figures: str | None) -> None:
    write_report_json(report, out)
    print(f"report: {out}")
    if csv_path:
        write_report_csv(report, csv_path)
        print(f"csv: {csv_path}")
    if figures:
        for fig in render_figures(report, figures):
            print(f"figure: {fig}")


def _cmd_eval(args) -> int:
    samples = _filtered_samples(args.dataset, args.split, args.task)
    config = _load_config(args.config)
    report = evaluate(samples, args.task, config, Backends.lexical(),
                      ks=args.k, policy=args.priors, seed=args.seed)
    _emit_report(report, args.out, args.csv, args.figures)
    return 0


def _cmd_ablation(args) -> int:
    samples = _filtered_samples(args.dataset, args.split, "gen")
    config = _load_config(args.config)
    result = run_ablation(samples, config, Backends.lexical(), ks=args.k,
                          seed=args.seed)
    _emit_report(result, args.out, args.csv, args.figures)
    return 0


def _cmd_serve(args) -> int:
    from .server import serve

    serve(host=args.host, port=args.port,
          config=_load_config(args.config), log_dir=args.log_dir)
    return 0


def _cmd_replay(args) -> int:
    config = _load_config(args.config)
    session = EditSession.replay_log(args.log, config, Backends.lexical())
    print(json.dumps({
        "session_id": session.session_id,
        "revision": session.revision,
        "edits": len(session.history),
        "state_digest": session.state_digest(),
    }, sort_keys=True, indent=2))
    return 0


def _cmd_recommend(args) -> int:
    raw = args.edit
    if raw.startswith("@"):
        raw = Path(raw[1:]).read_text(encoding="utf-8")
    edit = Edit.from_dict(json.loads(raw))
    files = _read_project(Path(args.project))
    config = _load_config(args.config)
    session = EditSession.create("cli", files, config, Backends.lexical(),
                                 prompt=args.prompt)
    session.record_edit(edit, revision=0)
    report = session.recommend_locations()
    if args.candidates:
        report = session.candidates_for(args.candidates, args.k)
    print(json.dumps(report, sort_keys=True, indent=2))
    return 0


def _cmd_report(args) -> int:
    with open(args.input, "r", encoding="utf-8") as fh:
        report = json.load(fh)
    if not args.csv and not args.figures:
        print("nothing to do: pass --csv and/or --figures", file=sys.stderr)
        return 2
    if args.csv:
        write_report_csv(report, args.csv)
        print(f"csv: {args.csv}")
    if args.figures:
        for fig in render_figures(report, args.figures):
            print(f"figure: {fig}")
    return 0


_COMMANDS = {
    "mine": _cmd_mine,
    "eval": _cmd_eval,
    "ablation": _cmd_ablation,
    "serve": _cmd_serve,
    "replay": _cmd_replay,
    "recommend": _cmd_recommend,
    "report": _cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _COMMANDS[args.command](args)
    except (EditRecError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
