"""Solve SDPA sparse files with an external solver (cvxpy + Clarabel).

Usage: python tools/sdpa_crosscheck.py FILE.dat-s [FILE.dat-s ...]

Prints one line per file: name, SDPA objective, objective offset (from the
`* objective_offset = ` comment written by `pfkit moment --export`) and
their sum, the relaxation bound. Used to produce the golden objectives in
crates/core/tests/external_golden.rs.
"""

import sys

import cvxpy as cp
import numpy as np
import scipy.sparse as sp

OFFSET_TAG = "* objective_offset = "


def read_sdpa(path):
    offset = 0.0
    body = []
    for line in open(path):
        if line.startswith(OFFSET_TAG):
            offset = float(line[len(OFFSET_TAG):])
        s = line.strip()
        if s and s[0] not in "\"*":
            body.append(s.translate(str.maketrans("{}(),", "     ")))
    m = int(body[0].split()[0])
    nb = int(body[1].split()[0])
    sizes = [int(t) for t in body[2].split()[:nb]]
    c = np.array([float(t) for t in body[3].split()[:m]])
    mats = {}
    for s in body[4:]:
        k, b, i, j, v = s.split()[:5]
        mats.setdefault((int(k), int(b) - 1), []).append((int(i) - 1, int(j) - 1, float(v)))
    return m, sizes, c, mats, offset


def block_matrix(entries, n):
    rows, cols, vals = [], [], []
    for i, j, v in entries:
        rows.append(i)
        cols.append(j)
        vals.append(v)
        if i != j:
            rows.append(j)
            cols.append(i)
            vals.append(v)
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def solve(path):
    m, sizes, c, mats, offset = read_sdpa(path)
    x = cp.Variable(m)
    cons = []
    for b, size in enumerate(sizes):
        n = abs(size)
        expr = -block_matrix(mats.get((0, b), []), n)
        for k in range(1, m + 1):
            if (k, b) in mats:
                expr = expr + x[k - 1] * block_matrix(mats[(k, b)], n)
        if size < 0:
            cons.append(cp.diag(expr) >= 0)
        elif n == 1:
            cons.append(expr >= 0)
        else:
            cons.append(expr >> 0)
    prob = cp.Problem(cp.Minimize(c @ x), cons)
    prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-10, tol_gap_rel=1e-10, tol_feas=1e-10)
    return prob.status, prob.value, offset


if __name__ == "__main__":
    for path in sys.argv[1:]:
        status, value, offset = solve(path)
        print(f"{path} {status} {value:.10f} {offset:.10f} {value + offset:.10f}")
