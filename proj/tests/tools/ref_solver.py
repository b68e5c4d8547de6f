#!/usr/bin/env python3
"""Reference DIMACS solver for exercising the external-solver protocol.

Exhaustive with early exit; only meant for small formulas (<= 26 vars).
Prints the s/v line protocol the adapter expects.
"""
import sys


def main() -> int:
    path = sys.argv[1]
    num_vars = 0
    clauses = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith(("c", "#")):
                continue
            if line.startswith("p"):
                parts = line.split()
                num_vars = int(parts[2])
                continue
            lits = [int(x) for x in line.split()]
            if lits and lits[-1] == 0:
                lits.pop()
            if lits:
                clauses.append(lits)

    if num_vars > 26:
        print("s UNKNOWN")
        return 0

    # Propagate obvious units first so the exhaustive core sees fewer vars.
    forced = {}
    changed = True
    while changed:
        changed = False
        for c in clauses:
            unassigned = [l for l in c if abs(l) not in forced]
            satisfied = any(forced.get(abs(l)) == (l > 0) for l in c)
            if satisfied:
                continue
            if not unassigned:
                print("s UNSATISFIABLE")
                return 0
            if len(unassigned) == 1:
                lit = unassigned[0]
                forced[abs(lit)] = lit > 0
                changed = True

    free = [v for v in range(1, num_vars + 1) if v not in forced]
    for pattern in range(1 << len(free)):
        model = dict(forced)
        for i, v in enumerate(free):
            model[v] = bool((pattern >> i) & 1)
        if all(any(model[abs(l)] == (l > 0) for l in c) for c in clauses):
            print("s SATISFIABLE")
            lits = [v if model[v] else -v for v in range(1, num_vars + 1)]
            print("v " + " ".join(str(l) for l in lits) + " 0")
            return 0
    print("s UNSATISFIABLE")
    return 0


if __name__ == "__main__":
    sys.exit(main())
