"""Command-line front end: ``prestigerank {gen,stats,rank,eval,compare,terms}``.

Each command reads files, calls one library routine and writes its CSV
output.  Exit status is 0 on success, 2 for bad input or usage and 1 for
anything unexpected.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import evalkit, graph, ranking, synthgen, textfeat
from .errors import InputError

log = logging.getLogger("prestigerank")

RANK_SETTINGS = {
    "tolerance": float,
    "max_iterations": int,
    "damping": float,
    "retweet_p": float,
    "gamma": float,
}


def read_config(path) -> dict[str, str]:
    """Flat ``key=value`` file; blank lines and ``#`` comments are ignored."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc.strerror}") from None
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise InputError(f"{path}:{lineno}: expected key=value")
        values[key.strip()] = value.strip()
    return values


def _rank_options(path) -> tuple[ranking.IterationConfig, dict]:
    if path is None:
        return ranking.IterationConfig(), {}
    raw = read_config(path)
    parsed = {}
    for key, value in raw.items():
        if key not in RANK_SETTINGS:
            raise InputError(f"unknown ranking setting {key!r}")
        try:
            parsed[key] = RANK_SETTINGS[key](value)
        except ValueError:
            raise InputError(f"bad value for {key}: {value!r}") from None
    iteration = {k: parsed.pop(k) for k in ("tolerance", "max_iterations", "damping") if k in parsed}
    try:
        cfg = ranking.IterationConfig(**iteration)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    return cfg, parsed


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _need_file(path: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"no such file: {p}")
    return p


# --------------------------------------------------------------------------
# commands

def cmd_gen(args) -> None:
    cfg = synthgen.GenConfig.from_mapping(read_config(args.config)) if args.config else synthgen.GenConfig()
    cfg.validate()
    lg = synthgen.generate(cfg)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    graph.write_edge_list(lg.graph, out / "edges.tsv")
    (out / "labels.csv").write_text(evalkit.format_labels(lg.labels), encoding="utf-8")
    if lg.tweets is not None:
        (out / "tweets.jsonl").write_text(textfeat.format_tweets(lg.tweets), encoding="utf-8")


def cmd_stats(args) -> None:
    g = graph.read_edge_list(_need_file(args.edges))
    _emit(graph.format_graph_stats(graph.graph_stats(g, args.diameter_cap)), args.out)


def cmd_rank(args) -> None:
    if args.method not in ranking.METHODS:
        raise InputError(f"unknown method {args.method!r}; choose from {', '.join(ranking.METHODS)}")
    if args.method == "twitterrank" and args.tweets is None:
        raise InputError("twitterrank needs --tweets")
    cfg, extra = _rank_options(args.config)
    g = graph.read_edge_list(_need_file(args.edges))
    counts = vectors = None
    if args.tweets is not None:
        counts, vectors = textfeat.corpus_by_user(textfeat.read_tweets(_need_file(args.tweets)), g.node_count)
    sv = ranking.rank(g, args.method, cfg, tweet_counts=counts, term_vectors=vectors, **extra)
    if not sv.converged:
        log.warning("%s stopped after %d iterations without converging", sv.method, sv.iterations_used)
    _emit(ranking.format_scores(sv), args.out)


def cmd_eval(args) -> None:
    sv = ranking.read_scores(_need_file(args.scores))
    labels = evalkit.read_labels(_need_file(args.labels))
    unknown = [u for u in labels if not 0 <= u < len(sv)]
    if unknown:
        raise InputError(f"label for user {unknown[0]} outside the score file")
    groups = evalkit.groups_from_labels(labels)
    rt = evalkit.rank_table(sv)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "deciles.csv").write_text(evalkit.format_decile_report(evalkit.decile_report(rt, groups)), encoding="utf-8")
    curves = {name: evalkit.found_curve(rt, members, args.resolution) for name, members in groups.items()}
    (out / "found.csv").write_text(evalkit.format_found_curves(curves), encoding="utf-8")
    shares = {name: evalkit.prestige_share(sv, members) for name, members in groups.items()}
    (out / "shares.csv").write_text(evalkit.format_shares(shares), encoding="utf-8")


def _parse_ks(text: str) -> list[int]:
    try:
        ks = [int(k) for k in text.split(",") if k.strip()]
    except ValueError:
        raise InputError(f"--ks expects comma-separated integers, got {text!r}") from None
    if not ks:
        raise InputError("--ks is empty")
    return ks


def cmd_compare(args) -> None:
    a = ranking.read_scores(_need_file(args.scores_a))
    b = ranking.read_scores(_need_file(args.scores_b))
    if len(a) != len(b):
        raise InputError(f"score files cover different user sets ({len(a)} vs {len(b)} users)")
    curve = evalkit.agreement_curve(a, b, _parse_ks(args.ks), args.penalty)
    _emit(evalkit.format_agreement(curve), args.out)


def cmd_terms(args) -> None:
    tweets = textfeat.read_tweets(_need_file(args.tweets))
    labels = evalkit.read_labels(_need_file(args.labels))
    inside = [t.text for t in tweets if labels.get(t.author) == args.group]
    outside = [t.text for t in tweets if labels.get(t.author) != args.group]
    if not inside or not outside:
        raise InputError(f"group {args.group!r} must have tweets on both sides of the comparison")
    terms = textfeat.distinctive_terms(textfeat.count_terms(inside), textfeat.count_terms(outside), args.top)
    _emit(textfeat.format_terms(terms), args.out)


# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="prestigerank", description="Rank prestige on follower graphs and audit it against labelled abusers.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gen", help="generate a labelled synthetic graph")
    s.add_argument("--config", help="key=value generator settings")
    s.add_argument("--out-dir", required=True)
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("stats", help="structural statistics of an edge list")
    s.add_argument("edges")
    s.add_argument("--diameter-cap", type=int, default=graph.DEFAULT_DIAMETER_CAP,
                   help="skip the diameter above this many users")
    s.add_argument("--out")
    s.set_defaults(func=cmd_stats)

    s = sub.add_parser("rank", help="score every user with one method")
    s.add_argument("edges")
    s.add_argument("--method", required=True, help=", ".join(ranking.METHODS))
    s.add_argument("--tweets", help="JSONL corpus (required by twitterrank)")
    s.add_argument("--config", help="key=value iteration settings")
    s.add_argument("--out")
    s.set_defaults(func=cmd_rank)

    s = sub.add_parser("eval", help="decile report, found curves and prestige shares")
    s.add_argument("scores")
    s.add_argument("labels")
    s.add_argument("--out-dir", required=True)
    s.add_argument("--resolution", type=int, default=100)
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("compare", help="top-k Kendall distance between two score files")
    s.add_argument("scores_a")
    s.add_argument("scores_b")
    s.add_argument("--ks", default="10,50,100")
    s.add_argument("--penalty", type=float, default=0.0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("terms", help="terms distinguishing one labelled group's tweets")
    s.add_argument("tweets")
    s.add_argument("labels")
    s.add_argument("--group", default=synthgen.SPAMMER)
    s.add_argument("--top", type=int, default=60)
    s.add_argument("--out")
    s.set_defaults(func=cmd_terms)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        args.func(args)
    except InputError as exc:
        print(f"prestigerank: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"prestigerank: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        log.debug("internal failure", exc_info=True)
        print(f"prestigerank: internal error: {exc!r}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
