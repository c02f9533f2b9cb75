"""Command-line front end.

    tokenmarket solve    --scenario FILE [--fiscal]
    tokenmarket demand   --scenario FILE --p P --q Q
    tokenmarket contours --scenario FILE [--rect PLO PHI QLO QHI]
    tokenmarket edgeworth --scenario FILE [--start X,Y]
    tokenmarket settle   --scenario FILE [--credit]
    tokenmarket report   --scenario FILE

``--scenario`` accepts a path or the name of a bundled scenario
(example1, example2, fiscal, edgeworth, no-eq). ``--r`` and ``--n`` override
the scenario's policy. Files go to ``--out`` (default: current directory).
Exit codes: 0 success, 2 parse error, 3 no equilibrium, 4 convergence failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import os
import sys
import tempfile
from dataclasses import replace
from pathlib import Path

from . import edgeworth as ew
from .demand import best_response
from .equilibrium import SolverConfig, balance_sheets, contour_grid, solve_equilibrium
from .fiscal import fiscal_best_response
from .model import DomainError, PricePair, Scenario, balance_sheet, wealth_and_utility_report
from .scenarios import BUNDLED, ScenarioError, bundled, load_scenario
from .settlement import ConvergenceError, simulate_credit, simulate_debit

EXIT_OK, EXIT_PARSE, EXIT_NO_EQ, EXIT_CONVERGENCE = 0, 2, 3, 4
GOOD_NAMES = ("Apples", "Pears")


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def format_table(header, rows, digits=2) -> str:
    def cell(v):
        if isinstance(v, float):
            v = 0.0 if abs(v) < 0.5 * 10 ** -digits else v
            return f"{v:.{digits}f}"
        return str(v)

    cells = [[cell(v) for v in row] for row in [header, *rows]]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = []
    for j, r in enumerate(cells):
        lines.append("  ".join(c.rjust(w) if i else c.ljust(w) for i, (c, w) in enumerate(zip(r, widths))))
        if j == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)


def sheet_table(ids, sheets, fiscal: bool):
    header = ["", *ids, "Total"]
    rows = [["Initial", *[s.initial for s in sheets]]]
    for g, name in enumerate(GOOD_NAMES):
        rows.append([name, *[s.goods[g] for s in sheets]])
    if fiscal:
        rows.append(["Poll tax", *[s.poll_tax for s in sheets]])
    rows.append(["Purchase tax" if fiscal else "Tax", *[s.tax for s in sheets]])
    rows.append(["Final", *[s.final for s in sheets]])
    return header, [[*r, float(sum(r[1:]))] for r in rows]


def _scenario(args) -> Scenario:
    src = args.scenario
    sc = bundled(src) if src in BUNDLED and not Path(src).exists() else load_scenario(src)
    changes = {k: getattr(args, k) for k in ("r", "n") if getattr(args, k, None) is not None}
    if changes:
        sc = sc.with_policy(**changes)
    if not getattr(args, "fiscal", False):
        sc = Scenario(sc.traders, sc.policy, None)
    elif sc.fiscal is None:
        raise ScenarioError("$.fiscal", "--fiscal needs a scenario with a fiscal block")
    return sc


def _config(args) -> SolverConfig:
    cfg = SolverConfig()
    if args.grid is not None:
        cfg = replace(cfg, resolution=args.grid)
    if args.tol is not None:
        cfg = replace(cfg, tol=args.tol)
    return cfg


def _emit(args, name, header, rows, out):
    text = to_csv(header, rows)
    write_atomic(Path(args.out) / name, text)
    if args.format == "csv":
        out.write(text)


def _human(args, out):
    # in csv mode stdout carries only the csv
    return out if args.format == "table" else io.StringIO()


def cmd_solve(args, out) -> int:
    sc = _scenario(args)
    res = solve_equilibrium(sc, _config(args))
    out, raw = _human(args, out), out
    out.write(f"status: {res.status.value}\n")
    out.write(f"p = {res.prices.p:.3f}  q = {res.prices.q:.3f}  residual = {res.residual:.3g}\n")
    if res.ray:
        out.write("prices are determined only up to scale; q is fixed at 1\n")
    if not res.found:
        out.write("no market-clearing prices detected in the search region\n")
        return EXIT_NO_EQ
    ids = [tr.id for tr in sc.traders] + (["G"] if res.government else [])
    header, rows = sheet_table(ids, balance_sheets(sc, res), sc.fiscal is not None)
    out.write(format_table(header, rows) + "\n")
    strategies = "  ".join(f"{tr.id}:{o.strategy.value}" for tr, o in zip(sc.traders, res.outcomes))
    out.write(f"strategies: {strategies}\n")
    _emit(args, "solve.csv", ["row", *ids, "Total"], rows, raw)
    return EXIT_OK


def cmd_demand(args, out) -> int:
    sc = _scenario(args)
    prices = PricePair(args.p, args.q)
    if sc.fiscal is None:
        outcomes = [best_response(tr, prices, sc.policy) for tr in sc.traders]
        poll = 0.0
    else:
        poll = sc.fiscal.poll_tax
        outcomes = [fiscal_best_response(tr, prices, sc.policy, poll) for tr in sc.traders]
    ids = [tr.id for tr in sc.traders]
    out, raw = _human(args, out), out
    units = [[GOOD_NAMES[0], *[o.holdings.x - tr.s for tr, o in zip(sc.traders, outcomes)]],
             [GOOD_NAMES[1], *[o.holdings.y - tr.t for tr, o in zip(sc.traders, outcomes)]]]
    units = [[*r, float(sum(r[1:]))] for r in units]
    out.write("Demand (units)\n" + format_table(["", *ids, "Total"], units) + "\n\n")
    sheets = [balance_sheet(tr, o.holdings, prices, sc.policy, poll) for tr, o in zip(sc.traders, outcomes)]
    header, rows = sheet_table(ids, sheets, sc.fiscal is not None)
    out.write("Balance sheets (crowns)\n" + format_table(header, rows) + "\n")
    out.write("strategies: " + "  ".join(f"{i}:{o.strategy.value}" for i, o in zip(ids, outcomes)) + "\n")
    _emit(args, "demand.csv", ["good", *ids, "Total"], units, raw)
    return EXIT_OK


def cmd_contours(args, out) -> int:
    sc = _scenario(args)
    cfg = SolverConfig()
    rect = args.rect or (*cfg.p_bounds, *cfg.q_bounds)
    grid = contour_grid(sc, rect, args.grid or 101)
    _emit(args, "contours.csv", ["p", "q", "z1", "z2", "zm"], grid.rows(), out)
    if args.format != "csv":
        out.write(f"wrote {grid.p.size} grid points to {Path(args.out) / 'contours.csv'}\n")
    return EXIT_OK


def cmd_edgeworth(args, out) -> int:
    sc = _scenario(args)
    if sc.k != 2:
        raise ScenarioError("$.traders", "the Edgeworth box needs exactly two traders")
    totals = tuple(float(v) for v in sc.endowments.sum(axis=0))
    a = sc.traders[0]
    start = ew.BoxPoint(a.s, a.t, *totals)
    if args.start:
        try:
            sx, sy = (float(v) for v in args.start.split(","))
        except ValueError:
            raise ScenarioError("--start", f"expected X,Y, got {args.start!r}") from None
        start = ew.BoxPoint(sx, sy, *totals)
    r, n = sc.policy.r, sc.policy.n
    base = Path(args.out)
    write_atomic(base / "contract.csv", to_csv(["x", "y", "g", "h"],
                                               ((p.x, p.y, p.g, p.h) for p in ew.contract_curve(totals))))
    for side in ew.SIDES:
        curve = ew.revised_contract_curve(totals, r, side)
        write_atomic(base / f"revised_{side}.csv", to_csv(["x", "y", "g", "h"], curve.rows()))
    write_atomic(base / "lens.csv", to_csv(["x", "y", "in_lens"],
                                           ((x, y, int(v)) for x, y, v in ew.lens_grid(totals, r, args.grid or 50))))
    sol = ew.theorem1_solve(start, r, n)
    out.write(f"start S = ({start.x:.2f}, {start.y:.2f}) in a {totals[0]:g} x {totals[1]:g} box, r = {r:g}, n = {n:g}\n")
    if sol is None:
        out.write("S lies in the no-equilibrium lens\n")
        return EXIT_NO_EQ
    F, prices = sol
    out.write(f"F = ({F.x:.2f}, {F.y:.2f})  g = {F.g:.3f}  h = {F.h:.3f}  h/g = {F.h / F.g:.3f}\n")
    out.write(f"p = {prices.p:.2f}  q = {prices.q:.2f}  corollary holds: {ew.corollary_check(F, start, prices, r, n)}\n")
    return EXIT_OK


def cmd_settle(args, out) -> int:
    sc = _scenario(args)
    if args.p is not None and args.q is not None:
        prices = PricePair(args.p, args.q)
    else:
        res = solve_equilibrium(sc, _config(args))
        if not res.found:
            out.write(f"no equilibrium to settle (status {res.status.value})\n")
            return EXIT_NO_EQ
        prices = res.prices
    ledger = simulate_credit(sc, prices) if args.credit else simulate_debit(sc, prices)
    rows = ((t.round, t.payer, t.payee, t.amount, t.kind) for t in ledger.history)
    _emit(args, "transfers.csv", ["round", "payer", "payee", "amount", "kind"], rows, out)
    if args.format != "csv":
        tot = ledger.totals()
        agents = list(ledger.initial)
        bal = ledger.balances
        table = [[a, ledger.initial[a], tot[a]["goods_received"], -tot[a]["goods_spent"], -tot[a]["tax"],
                  ledger.min_balance[a], bal[a]] for a in agents]
        out.write(f"{ledger.mode} settlement at p = {prices.p:.3f}, q = {prices.q:.3f}; "
                  f"{len(ledger.history)} transfers\n")
        out.write(format_table(["agent", "initial", "sales", "purchases", "tax", "lowest", "final"], table, 4) + "\n")
    return EXIT_OK


def cmd_report(args, out) -> int:
    sc = _scenario(args)
    cfg = _config(args)
    token = solve_equilibrium(sc, cfg)
    walras = solve_equilibrium(sc.with_policy(n=0.0, r=0.0), cfg)
    ids = [tr.id for tr in sc.traders]
    wealth, util = [], []
    label = f"At end when n = {sc.policy.n:g} and r = {sc.policy.r:.0%}"
    for name, res in (("At end when n = r = 0", walras), (label, token)):
        if not res.found:
            out.write(f"{name}: no equilibrium (status {res.status.value})\n")
            return EXIT_NO_EQ
        rep = wealth_and_utility_report(sc, [o.holdings for o in res.outcomes])
        if not wealth:
            wealth.append(["At start", *[r.wealth_start for r in rep]])
            util.append(["At start", *[r.utility_start for r in rep]])
        wealth.append([name, *[r.wealth_end for r in rep]])
        util.append([name, *[r.utility_end for r in rep]])
    out.write("Total holdings of goods\n" + format_table(["Situation", *ids], wealth, 1) + "\n\n")
    out.write("Utility\n" + format_table(["Situation", *ids], util, 2) + "\n")
    base = Path(args.out)
    write_atomic(base / "wealth.csv", to_csv(["situation", *ids], wealth))
    write_atomic(base / "utility.csv", to_csv(["situation", *ids], util))
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "demand": cmd_demand,
    "contours": cmd_contours,
    "edgeworth": cmd_edgeworth,
    "settle": cmd_settle,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tokenmarket", description="Token-economy equilibrium tools")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--scenario", default="example2", help="scenario file or bundled name")
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--r", type=float)
        sp.add_argument("--n", type=float)
        sp.add_argument("--grid", type=int, help="grid resolution")
        sp.add_argument("--tol", type=float, help="polish tolerance on z1^2 + z2^2")
        sp.add_argument("--fiscal", action="store_true", help="apply the scenario's poll tax")
        sp.add_argument("--format", choices=("table", "csv"), default="table")
        if name in ("demand", "settle"):
            sp.add_argument("--p", type=float, required=name == "demand")
            sp.add_argument("--q", type=float, required=name == "demand")
        if name == "contours":
            sp.add_argument("--rect", type=float, nargs=4, metavar=("PLO", "PHI", "QLO", "QHI"))
        if name == "edgeworth":
            sp.add_argument("--start", help="start point X,Y (defaults to the first trader)")
        if name == "settle":
            sp.add_argument("--credit", action="store_true", help="allow overdrafts")
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args, out)
    except (ScenarioError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
