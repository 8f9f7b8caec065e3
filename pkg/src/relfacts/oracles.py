"""Brute-force reference computations.

Everything here is written with explicit index loops over plain Python
numbers and shares no code with the fast paths in :mod:`relfacts.linalg`
or :mod:`relfacts.facts`. Tests and the ``oracle`` CLI use these to check
the library independently.
"""
from __future__ import annotations

import itertools
from typing import Sequence


def _index(digits: Sequence[int], dims: Sequence[int]) -> int:
    idx = 0
    for k, d in zip(digits, dims):
        idx = idx * d + k
    return idx


def kron(a, b) -> list[list[complex]]:
    ra, ca, rb, cb = len(a), len(a[0]), len(b), len(b[0])
    out = [[0j] * (ca * cb) for _ in range(ra * rb)]
    for i in range(ra):
        for j in range(ca):
            for k in range(rb):
                for l in range(cb):
                    out[i * rb + k][j * cb + l] = complex(a[i][j]) * complex(b[k][l])
    return out


def partial_trace(rho, dims: Sequence[int], keep: Sequence[int]) -> list[list[complex]]:
    """Sum ``rho[(k, e), (k', e)]`` over every basis label ``e`` of the dropped subsystems."""
    keep = sorted(set(keep))
    drop = [i for i in range(len(dims)) if i not in keep]
    kdims = [dims[i] for i in keep]
    ddims = [dims[i] for i in drop]
    side = 1
    for d in kdims:
        side *= d
    out = [[0j] * side for _ in range(side)]
    for r in itertools.product(*[range(d) for d in kdims]):
        for c in itertools.product(*[range(d) for d in kdims]):
            total = 0j
            for e in itertools.product(*[range(d) for d in ddims]):
                row = [0] * len(dims)
                col = [0] * len(dims)
                for pos, i in enumerate(keep):
                    row[i], col[i] = r[pos], c[pos]
                for pos, i in enumerate(drop):
                    row[i] = col[i] = e[pos]
                total += complex(rho[_index(row, dims)][_index(col, dims)])
            out[_index(r, kdims)][_index(c, kdims)] = total
    return out


def chain(w_ba: Sequence[complex], w_cb: Sequence[complex]) -> dict[str, float]:
    """Collapse and unitary probabilities of an amplitude chain, with the explicit cross terms."""
    paths = [complex(c) * complex(b) for b, c in zip(w_ba, w_cb)]
    collapse = 0.0
    for b, c in zip(w_ba, w_cb):
        collapse += (abs(complex(c)) ** 2) * (abs(complex(b)) ** 2)
    diagonal = 0.0
    cross = 0j
    for i, x in enumerate(paths):
        for j, y in enumerate(paths):
            term = x * y.conjugate()
            if i == j:
                diagonal += term.real
            else:
                cross += term
    unitary = diagonal + cross.real
    return {
        "p_unitary": unitary,
        "p_collapse": collapse,
        "deficit": abs(cross),
        "cross_terms": cross.real,
    }


def _matmul(a, b):
    n, m, p = len(a), len(b), len(b[0])
    return [[sum(a[i][k] * b[k][j] for k in range(m)) for j in range(p)] for i in range(n)]


def _trace(a) -> complex:
    return sum(a[i][i] for i in range(len(a)))


def stability(rho, projectors, target) -> dict[str, float]:
    """``P(b)`` directly and through conditional probabilities ``P(b|a_i) P(a_i)``."""
    rho = [[complex(x) for x in row] for row in rho]
    target = [[complex(x) for x in row] for row in target]
    direct = _trace(_matmul(target, rho)).real
    composed = 0.0
    for a in projectors:
        a = [[complex(x) for x in row] for row in a]
        branch = _matmul(_matmul(a, rho), a)
        p_a = _trace(branch).real
        if p_a < 1e-14:
            continue
        conditional = _trace(_matmul(target, branch)).real / p_a
        composed += conditional * p_a
    return {"p_direct": direct, "p_composed": composed, "deviation": abs(direct - composed)}


def outer(ket: Sequence[complex]) -> list[list[complex]]:
    return [[complex(x) * complex(y).conjugate() for y in ket] for x in ket]
