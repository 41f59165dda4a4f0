"""Independent reference computations used to check the library.

None of these call into the Jacobi solver or the occupation code.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np


def charpoly(matrix) -> list[Fraction]:
    """Exact characteristic polynomial det(xI - A), highest degree first (Faddeev-LeVerrier)."""
    a = [[Fraction(x).limit_denominator(10**9) for x in row] for row in matrix]
    n = len(a)
    coeffs = [Fraction(1)]
    m = [[Fraction(0)] * n for _ in range(n)]
    for k in range(1, n + 1):
        # M_k = A M_{k-1} + c_{k-1} I
        am = [[sum(a[i][t] * m[t][j] for t in range(n)) for j in range(n)] for i in range(n)]
        m = [[am[i][j] + (coeffs[-1] if i == j else 0) for j in range(n)] for i in range(n)]
        am = [[sum(a[i][t] * m[t][j] for t in range(n)) for j in range(n)] for i in range(n)]
        coeffs.append(-sum(am[i][i] for i in range(n)) / k)
    return coeffs


def poly_from_roots(roots) -> np.ndarray:
    return np.poly(np.asarray(roots, dtype=float))


def charpoly_roots(matrix) -> np.ndarray:
    """Real roots of the exact characteristic polynomial, Newton-polished, ascending."""
    c = [float(x) for x in charpoly(matrix)]
    roots = np.sort(np.roots(c).real)
    p, dp = np.poly1d(c), np.poly1d(c).deriv()
    out = []
    for r in roots:
        for _ in range(50):
            d = dp(r)
            if abs(d) < 1e-14:
                break
            step = p(r) / d
            r -= step
            if abs(step) < 1e-15:
                break
        out.append(r)
    return np.sort(np.array(out))


def chain_spectrum(n: int) -> np.ndarray:
    """Analytic levels x_j = 2 cos(j pi / (n + 1)) of an n-site chain, as E = -x with beta = -1."""
    j = np.arange(1, n + 1)
    return np.sort(-2.0 * np.cos(j * np.pi / (n + 1)))


def ring_spectrum(n: int) -> np.ndarray:
    k = np.arange(n)
    return np.sort(-2.0 * np.cos(2.0 * np.pi * k / n))


def min_occupation_energy(energies, n_electrons: int):
    """Minimum of sum occ_j E_j over every Pauli-feasible assignment, plus all minimisers."""
    best, winners = None, []
    for occ in itertools.product((0, 1, 2), repeat=len(energies)):
        if sum(occ) != n_electrons:
            continue
        e = sum(o * x for o, x in zip(occ, energies))
        if best is None or e < best - 1e-12:
            best, winners = e, [occ]
        elif abs(e - best) <= 1e-12:
            winners.append(occ)
    return best, winners


def flood_sp2(g) -> list[set[int]]:
    """Connected components of sp2 atoms by plain breadth-first search."""
    sp2 = {a.site_index for a in g.atoms if a.hybridization == "sp2"}
    comps, seen = [], set()
    for s in sorted(sp2):
        if s in seen:
            continue
        comp, queue = set(), [s]
        while queue:
            cur = queue.pop()
            if cur in comp:
                continue
            comp.add(cur)
            queue += [j for j in g.neighbors(cur) if j in sp2 and j not in comp]
        seen |= comp
        comps.append(comp)
    return comps


def to_networkx(g, with_h: bool = True):
    import networkx as nx

    G = nx.Graph()
    for a in g.atoms:
        if with_h or a.element != "H":
            G.add_node(a.site_index, element=a.element)
    for b in g.bonds:
        if b.a in G and b.b in G:
            G.add_edge(b.a, b.b, order=b.order)
    return G


def isomorphic(g1, g2) -> bool:
    import networkx as nx
    from networkx.algorithms.isomorphism import categorical_edge_match, categorical_node_match

    return nx.is_isomorphic(to_networkx(g1), to_networkx(g2),
                            node_match=categorical_node_match("element", None),
                            edge_match=categorical_edge_match("order", None))
