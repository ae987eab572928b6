"""Command-line front end.

Exit codes: 0 ok, 1 a cross-check failed, 2 invalid input, 3 a cap was
exceeded, 4 no winning move at the queried configuration.  Data goes to
files under ``--out`` (or standard output); a JSON run report goes to
``<out>/report.json``, or to standard error without ``--out``.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import random
import sys
import time
from pathlib import Path
from typing import Any

from . import automata as fa
from . import kernels
from .automata import AutomatonCapExceeded
from .corpus import exhaustive, ladder, random_corpus
from .game import GameFormatError, InvalidGame, MemorylessStrategy, Region, format_game, load_game
from .lcs import (
    LcsFormatError,
    TooLarge,
    all_configs,
    format_config,
    load_lcs,
    loss_distribution,
    parse_config,
    player_successors,
)
from .oracle import EnumerationCap, classify
from .parity import solve
from .regions import SymbolicUniverse, pre_exists_sym, pre_forall_sym
from .scheme import CNode, DNode, RankMismatch, TerminationCap
from .simulate import RNG_NAME, simulate_explicit, simulate_lcs
from .symbolic import (
    DEFAULT_ITER_CAP,
    NotWinningHere,
    WrongPhase,
    all_nodes,
    force_step,
    read_bundle,
    strategy_step,
    sym_solve,
    write_bundle,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INVALID = 2
EXIT_CAP = 3
EXIT_NOT_WINNING = 4

STATUS = {
    EXIT_OK: "ok",
    EXIT_CHECK_FAILED: "check-failed",
    EXIT_INVALID: "invalid-input",
    EXIT_CAP: "cap-exceeded",
    EXIT_NOT_WINNING: "not-winning-here",
}


class Report:
    def __init__(self, command: str, args: argparse.Namespace):
        self.command = command
        self.inputs: dict[str, str] = {}
        self.settings: dict[str, Any] = {}
        self.outputs: list[str] = []
        self.metrics: dict[str, Any] = {}
        self.error: str | None = None
        self.out_dir = Path(args.out) if getattr(args, "out", None) else None
        self.started = time.perf_counter()

    def add_input(self, path: str | Path) -> None:
        p = Path(path)
        if p.is_file():
            self.inputs[str(path)] = hashlib.sha256(p.read_bytes()).hexdigest()
        elif p.is_dir():
            h = hashlib.sha256()
            for f in sorted(p.iterdir()):
                if f.is_file() and f.name != "report.json":
                    h.update(f.name.encode())
                    h.update(f.read_bytes())
            self.inputs[str(path)] = h.hexdigest()

    def write_output(self, name: str, text: str) -> Path:
        assert self.out_dir is not None
        self.out_dir.mkdir(parents=True, exist_ok=True)
        path = self.out_dir / name
        path.write_text(text)
        self.outputs.append(name)
        return path

    def finish(self, code: int) -> int:
        data = {
            "command": self.command,
            "inputs": self.inputs,
            "settings": self.settings,
            "outputs": sorted(self.outputs),
            "metrics": dict(self.metrics, wall_time=round(time.perf_counter() - self.started, 6)),
            "status": STATUS[code],
        }
        if self.error:
            data["error"] = self.error
        text = json.dumps(data, sort_keys=True, indent=1) + "\n"
        if self.out_dir is not None:
            self.out_dir.mkdir(parents=True, exist_ok=True)
            (self.out_dir / "report.json").write_text(text)
        else:
            sys.stderr.write(text)
        return code


def _dumps(data: Any) -> str:
    return json.dumps(data, sort_keys=True, indent=1) + "\n"


# -- commands ----------------------------------------------------------------------


def cmd_solve_explicit(args, rep: Report) -> int:
    rep.add_input(args.path)
    g = load_game(args.path)
    part = solve(g)
    rep.metrics.update(states=len(g), rank=part.rank, nodes=len(part.certificate.nodes()))
    data = part.to_json()
    if args.format == "text":
        text = "".join(
            f"{k}: {' '.join(data[k])}\n" for k in ("as_winner0", "as_winner1", "both_wpp")
        )
    else:
        text = _dumps(data)
    if rep.out_dir is not None:
        rep.write_output("partition.json" if args.format == "json" else "partition.txt", text)
        rep.write_output("certificate.json", _dumps(part.certificate.to_json()))
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_solve_lcs(args, rep: Report) -> int:
    rep.add_input(args.path)
    rep.settings.update(dfa_cap=args.dfa_cap, iter_cap=args.iter_cap)
    system = load_lcs(args.path)
    res = sym_solve(system, iteration_cap=args.iter_cap, state_cap=args.dfa_cap)
    rep.metrics.update(res.metrics)
    if rep.out_dir is None:
        sys.stdout.write(_dumps({n: res.region(n).to_json() for n in ("as_winner0", "as_winner1", "both_wpp")}))
        return EXIT_OK
    meta = {"dfa_cap": args.dfa_cap, "iter_cap": args.iter_cap, "kernel_backend": kernels.BACKEND}
    rep.outputs.extend(write_bundle(res, rep.out_dir, meta))
    return EXIT_OK


def cmd_member(args, rep: Report) -> int:
    rep.add_input(args.result)
    rep.settings.update(region=args.region)
    res = read_bundle(args.result)
    cfg = parse_config(res.system, args.config)
    verdict = res.region(args.region).member(cfg)
    print("true" if verdict else "false")
    rep.metrics["member"] = verdict
    return EXIT_OK


def cmd_strategy_step(args, rep: Report) -> int:
    rep.add_input(args.result)
    res = read_bundle(args.result)
    cfg = parse_config(res.system, args.config)
    nxt = strategy_step(res, cfg)
    lit = format_config(res.system, nxt)
    print(lit)
    rep.metrics["successor"] = lit
    return EXIT_OK


def _tally(checks: dict, name: str, ok: bool, detail: str | None = None) -> None:
    entry = checks.setdefault(name, {"pass": 0, "fail": 0, "examples": []})
    if ok:
        entry["pass"] += 1
    else:
        entry["fail"] += 1
        if detail and len(entry["examples"]) < 5:
            entry["examples"].append(detail)


def crosscheck_lcs(path: str, k: int, samples: int, seed: int, result: str | None = None,
                   iter_cap: int = DEFAULT_ITER_CAP, dfa_cap: int = fa.DEFAULT_STATE_CAP) -> dict:
    """Run the one-step, fixpoint, and play-closure batteries; returns per-check tallies."""
    system = load_lcs(path)
    checks: dict[str, dict] = {}
    rng = random.Random(seed)
    u = SymbolicUniverse(system, dfa_cap)
    cfgs = list(all_configs(system, k))

    def successors(c):
        if c.phase == 1:
            return [x for _, x in player_successors(system, c)]
        return [o.config(c.ctrl) for o in loss_distribution(system, c)]

    succ = {c: successors(c) for c in cfgs}
    pool = list(all_configs(system, max(k, 1)))
    for i in range(samples):
        picks = rng.sample(pool, min(len(pool), rng.randint(1, 6)))
        r = u.from_configs(picks)
        if i % 2:
            r = r.up_closure()
        restr = None
        if i % 3 == 2:
            restr = ~u.from_configs(rng.sample(pool, min(len(pool), 3)))
        pe = pre_exists_sym(r, restr)
        pf = pre_forall_sym(r, restr)
        for c in cfgs:
            inside = restr is None or restr.member(c)
            ss = [s for s in succ[c] if restr is None or restr.member(s)]
            want_e = inside and any(r.member(s) for s in ss)
            want_a = inside and all(r.member(s) for s in ss)
            _tally(checks, "pointwise-pre-exists", pe.member(c) == want_e, format_config(system, c))
            _tally(checks, "pointwise-pre-forall", pf.member(c) == want_a, format_config(system, c))

    try:
        res = read_bundle(result, dfa_cap) if result else sym_solve(system, iter_cap, dfa_cap)
        _tally(checks, "bundle-consistency", True)
    except ValueError as exc:
        _tally(checks, "bundle-consistency", False, str(exc))
        return checks
    whole = res.universe.full()
    parts = [res.as_winner0, res.as_winner1, res.both_wpp]
    union = parts[0] | parts[1] | parts[2]
    disjoint = all((parts[a] & parts[b]).is_empty() for a, b in ((0, 1), (0, 2), (1, 2)))
    _tally(checks, "partition", union.equals(whole) and disjoint)
    for node in all_nodes(res.root_c, res.root_d):
        certs = node.X + node.Z if isinstance(node, CNode) else node.U if isinstance(node, DNode) else []
        for cert in certs:
            ok = force_step(cert.force, cert.player, cert.restriction).equals(cert.force)
            _tally(checks, "fixpoint-equation", ok, f"{node.kind}{node.rank}")

    starts = [c for c in cfgs if c.phase == 1]
    rng.shuffle(starts)
    for player in (0, 1):
        region = res.as_winner(player)
        for c in [c for c in starts if region.member(c)][:3]:
            st = simulate_lcs(
                system, c, {player: lambda cfg: strategy_step(res, cfg)},
                horizon=40, trials=20, seed=seed, region=region,
            )
            _tally(checks, "play-closure", st.region_exits == 0, format_config(system, c))
    return checks


def crosscheck_explicit(path: str) -> dict:
    g = load_game(path)
    checks: dict[str, dict] = {}
    part = solve(g)
    verdict = classify(g)
    a0, a1, both = verdict.partition()
    same = (part.as_winner0, part.as_winner1, part.both_wpp) == (a0, a1, both)
    _tally(checks, "oracle-partition", same)
    fc = part.strategies["fc_x"]
    c = part.c_region
    closed = all(
        fc.choice.get(s) in c if g.owners[s].player == part.favored else all(t in c for t in g.succ[s])
        for s in c
    )
    _tally(checks, "strategy-closure", closed)
    return checks


def cmd_crosscheck(args, rep: Report) -> int:
    rep.add_input(args.path)
    rep.settings.update(k=args.k, samples=args.samples, seed=args.seed)
    if args.k < 0 or args.k > args.max_k:
        raise ValueError(f"k must be in 0..{args.max_k}")
    if str(args.path).endswith((".game", ".json")):
        checks = crosscheck_explicit(args.path)
    else:
        if args.result:
            rep.add_input(args.result)
        checks = crosscheck_lcs(args.path, args.k, args.samples, args.seed, args.result, args.iter_cap, args.dfa_cap)
    for entry in checks.values():
        if not entry["examples"]:
            del entry["examples"]
    rep.metrics["checks"] = checks
    failed = sorted(n for n, e in checks.items() if e["fail"])
    if rep.out_dir is not None:
        rep.write_output("crosscheck.json", _dumps(checks))
    for name in failed:
        sys.stderr.write(f"FAIL {name}: {checks[name]['fail']} failures\n")
    if failed:
        rep.error = "failed invariants: " + ", ".join(failed)
        return EXIT_CHECK_FAILED
    return EXIT_OK


def cmd_simulate(args, rep: Report) -> int:
    rep.add_input(args.path)
    rep.settings.update(seed=args.seed, trials=args.trials, horizon=args.horizon, rng=RNG_NAME,
                        p0=args.p0, p1=args.p1)
    policies = {0: args.p0, 1: args.p1}
    if str(args.path).endswith((".game", ".json")):
        g = load_game(args.path)
        start = g.state_id(args.start)
        strategies = {}
        if "solver" in policies.values():
            part = solve(g)
            for p, pol in policies.items():
                if pol == "solver":
                    merged = {}
                    # almost-sure choices take precedence over positive-probability ones
                    for name in ("fd_x", "fc_opp", "fc_x", "fd_opp"):
                        st = part.strategies[name]
                        if st.player == p:
                            merged.update(st.choice)
                    strategies[p] = MemorylessStrategy(p, merged)
        target = Region.of(g, args.target.split(",")) if args.target else None
        stats = simulate_explicit(g, start, strategies, args.horizon, args.trials, args.seed,
                                  target=target, stop_at_target=args.stop_at_target)
    else:
        system = load_lcs(args.path)
        start = parse_config(system, args.start)
        strategies = {}
        if "solver" in policies.values():
            res = sym_solve(system)

            def chooser(cfg):
                try:
                    return strategy_step(res, cfg)
                except NotWinningHere:
                    return None

            strategies = {p: chooser for p, pol in policies.items() if pol == "solver"}
        target = None
        if args.target:
            names = set(args.target.split(","))
            unknown = names - set(system.states)
            if unknown:
                raise ValueError(f"unknown control state {sorted(unknown)[0]!r}")
            target = lambda cfg: system.states[cfg.ctrl] in names
        stats = simulate_lcs(system, start, strategies, args.horizon, args.trials, args.seed,
                             target=target, stop_at_target=args.stop_at_target)
    rep.metrics.update(hit_frequency=stats.hit_frequency, steps=stats.steps)
    if rep.out_dir is not None:
        rep.write_output("playstats.json", stats.dumps())
    else:
        sys.stdout.write(stats.dumps())
    return EXIT_OK


def cmd_corpus(args, rep: Report) -> int:
    rep.settings.update(kind=args.kind, seed=args.seed, count=args.count)
    if args.kind == "exhaustive":
        games = exhaustive()
    elif args.kind == "random":
        games = random_corpus(args.count, args.seed)
    elif args.kind == "deterministic":
        games = random_corpus(args.count, args.seed, allow_random=False, min_random=0, max_states=8)
    else:
        games = (ladder(n) for n in range(2, 2 + args.count))
    if rep.out_dir is None:
        raise ValueError("corpus needs --out")
    n = 0
    for i, g in enumerate(games):
        if args.kind == "exhaustive" and i >= args.count:
            break
        rep.write_output(f"{args.kind}-{i:06d}.game", format_game(g))
        n += 1
    rep.metrics["games"] = n
    return EXIT_OK


# -- argument parsing ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lossyparity", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out=True):
        if out:
            sp.add_argument("--out", help="output directory (report.json goes here)")
        sp.add_argument("--format", choices=("json", "text"), default="json")

    sp = sub.add_parser("solve-explicit", help="solve an explicit game file")
    sp.add_argument("path")
    common(sp)

    sp = sub.add_parser("solve-lcs", help="solve a lossy channel game symbolically")
    sp.add_argument("path")
    sp.add_argument("--dfa-cap", type=int, default=fa.DEFAULT_STATE_CAP)
    sp.add_argument("--iter-cap", type=int, default=DEFAULT_ITER_CAP)
    common(sp)

    sp = sub.add_parser("member", help="test a configuration against a solved region")
    sp.add_argument("result", help="directory written by solve-lcs")
    sp.add_argument("config", help="literal such as 'q0 | c=ab | phase=1'")
    sp.add_argument("--region", default="as_winner0", choices=("as_winner0", "as_winner1", "both_wpp"))
    common(sp)

    sp = sub.add_parser("strategy-step", help="winning move at a phase-1 configuration")
    sp.add_argument("result")
    sp.add_argument("config")
    common(sp)

    sp = sub.add_parser("crosscheck", help="run the validation batteries")
    sp.add_argument("path")
    sp.add_argument("--k", type=int, default=3)
    sp.add_argument("--max-k", type=int, default=5, help=argparse.SUPPRESS)
    sp.add_argument("--samples", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--result", help="check a stored solve-lcs bundle instead of solving")
    sp.add_argument("--dfa-cap", type=int, default=fa.DEFAULT_STATE_CAP)
    sp.add_argument("--iter-cap", type=int, default=DEFAULT_ITER_CAP)
    common(sp)

    sp = sub.add_parser("simulate", help="Monte Carlo plays")
    sp.add_argument("path")
    sp.add_argument("--start", required=True, help="state name or configuration literal")
    sp.add_argument("--p0", choices=("solver", "random"), default="random")
    sp.add_argument("--p1", choices=("solver", "random"), default="random")
    sp.add_argument("--target", help="comma-separated state (or control state) names")
    sp.add_argument("--stop-at-target", action="store_true")
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--horizon", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    common(sp)

    sp = sub.add_parser("corpus", help="write generated games")
    sp.add_argument("--kind", choices=("exhaustive", "random", "deterministic", "ladder"), default="random")
    sp.add_argument("--count", type=int, default=10)
    sp.add_argument("--seed", type=int, default=0)
    common(sp)
    return p


COMMANDS = {
    "solve-explicit": cmd_solve_explicit,
    "solve-lcs": cmd_solve_lcs,
    "member": cmd_member,
    "strategy-step": cmd_strategy_step,
    "crosscheck": cmd_crosscheck,
    "simulate": cmd_simulate,
    "corpus": cmd_corpus,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    rep = Report(args.command, args)
    try:
        code = COMMANDS[args.command](args, rep)
    except (AutomatonCapExceeded, TerminationCap, EnumerationCap, TooLarge) as exc:
        rep.error = str(exc)
        code = EXIT_CAP
    except (NotWinningHere, WrongPhase) as exc:
        rep.error = str(exc)
        code = EXIT_NOT_WINNING
    except (GameFormatError, LcsFormatError, InvalidGame, RankMismatch, OSError, ValueError, KeyError) as exc:
        rep.error = str(exc)
        code = EXIT_INVALID
    if rep.error:
        sys.stderr.write(f"error: {rep.error}\n")
    return rep.finish(code)


if __name__ == "__main__":
    sys.exit(main())
