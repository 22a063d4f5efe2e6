#!/usr/bin/env python3
"""Solve an LP file written by `wdrmsvm export-lp` with scipy's HiGHS.

Usage: solve_lp.py model.lp [--values]

Prints the optimal objective with 17 significant digits; --values also
prints every variable as `name value`.
"""

import argparse
import re
import sys

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import lil_matrix

TERM = re.compile(r"([+-])?\s*([0-9.eE+-]+)?\s*([A-Za-z_][A-Za-z0-9_.]*)")


def parse_expr(text):
    terms = []
    text = text.strip()
    pos = 0
    while pos < len(text):
        m = TERM.match(text, pos)
        if not m:
            raise ValueError(f"cannot parse expression near: {text[pos:pos + 30]!r}")
        sign = -1.0 if m.group(1) == "-" else 1.0
        coef = float(m.group(2)) if m.group(2) else 1.0
        terms.append((m.group(3), sign * coef))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return terms


def parse_number(tok):
    t = tok.strip().lower()
    if t in ("+inf", "inf", "infinity", "+infinity"):
        return np.inf
    if t in ("-inf", "-infinity"):
        return -np.inf
    return float(tok)


def read_lp(path):
    sections = {"obj": [], "st": [], "bounds": []}
    current = None
    with open(path) as f:
        for raw in f:
            line = raw.split("\\", 1)[0].rstrip()
            key = line.strip().lower()
            if key == "minimize":
                current = "obj"
            elif key == "subject to":
                current = "st"
            elif key == "bounds":
                current = "bounds"
            elif key == "end":
                break
            elif key and current:
                if line.startswith("    ") and sections[current]:
                    sections[current][-1] += " " + line.strip()
                else:
                    sections[current].append(line.strip())

    names, index, lower, upper = [], {}, [], []

    def var(name):
        if name not in index:
            index[name] = len(names)
            names.append(name)
            lower.append(0.0)
            upper.append(np.inf)
        return index[name]

    for b in sections["bounds"]:
        parts = b.split()
        if len(parts) == 2 and parts[1] == "free":
            j = var(parts[0])
            lower[j], upper[j] = -np.inf, np.inf
        elif len(parts) == 3 and parts[1] == ">=":
            j = var(parts[0])
            lower[j] = parse_number(parts[2])
        elif len(parts) == 3 and parts[1] == "=":
            j = var(parts[0])
            lower[j] = upper[j] = parse_number(parts[2])
        elif len(parts) == 5:
            j = var(parts[2])
            lower[j], upper[j] = parse_number(parts[0]), parse_number(parts[4])
        else:
            raise ValueError(f"bad bound line: {b}")

    obj_text = " ".join(sections["obj"]).split(":", 1)[1]
    objective = parse_expr(obj_text)
    rows = []
    for c in sections["st"]:
        body = c.split(":", 1)[1]
        m = re.search(r"(<=|>=|=)\s*(\S+)\s*$", body)
        rows.append((parse_expr(body[: m.start()]), m.group(1), parse_number(m.group(2))))
    for terms, _, _ in rows:
        for name, _ in terms:
            var(name)
    for name, _ in objective:
        var(name)

    n = len(names)
    cost = np.zeros(n)
    for name, coef in objective:
        cost[index[name]] += coef
    ub_rows = [(t, rhs) for t, s, rhs in rows if s == "<="]
    ub_rows += [([(nm, -c) for nm, c in t], -rhs) for t, s, rhs in rows if s == ">="]
    eq_rows = [(t, rhs) for t, s, rhs in rows if s == "="]

    def build(rs):
        if not rs:
            return None, None
        A = lil_matrix((len(rs), n))
        b = np.zeros(len(rs))
        for i, (terms, rhs) in enumerate(rs):
            for name, coef in terms:
                A[i, index[name]] += coef
            b[i] = rhs
        return A.tocsr(), b

    A_ub, b_ub = build(ub_rows)
    A_eq, b_eq = build(eq_rows)
    bounds = [(None if np.isinf(l) else l, None if np.isinf(u) else u)
              for l, u in zip(lower, upper)]
    return names, cost, A_ub, b_ub, A_eq, b_eq, bounds


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("path")
    ap.add_argument("--values", action="store_true")
    args = ap.parse_args()
    names, cost, A_ub, b_ub, A_eq, b_eq, bounds = read_lp(args.path)
    res = linprog(cost, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                  bounds=bounds, method="highs",
                  options={"primal_feasibility_tolerance": 1e-10,
                           "dual_feasibility_tolerance": 1e-10})
    if res.status != 0:
        print(f"solver status {res.status}: {res.message}", file=sys.stderr)
        return 1
    print(f"{res.fun:.17g}")
    if args.values:
        for name, v in zip(names, res.x):
            print(f"{name} {v:.17g}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
