"""Built-in polynomial library.

Names accepted by :func:`get_builtin`:

* ``p<d>``       sum of d involution letters; random signed d-regular graphs
                 (``p3`` is the flagship case).
* ``p333``       nine Z letters with 3x3 coefficients; random signed 6-regular
                 graphs in which every vertex lies in 3 triangles.
* ``k23``        one Z per edge of K_{2,3} with 5x5 elementary-matrix
                 coefficients; random signed (2,3)-biregular graphs.
* ``bipartite3`` three Z letters with 2x2 off-diagonal coefficients; random
                 signed 3-regular bipartite graphs.
"""

from __future__ import annotations

import re

import numpy as np

from .errors import InputError
from .polynomials import MatrixPolynomial, make_polynomial
from .words import Kind, Letter


def p_regular(d: int) -> MatrixPolynomial:
    if d < 1:
        raise InputError("p_d needs d >= 1")
    terms = {(Letter(Kind.Y, k),): np.ones((1, 1)) for k in range(1, d + 1)}
    return make_polynomial(d, 0, 1, terms, name=f"p{d}")


def _unit(r, i, j):
    a = np.zeros((r, r))
    a[i, j] = 1.0
    return a


def p333() -> MatrixPolynomial:
    """Degree-2 polynomial with 3x3 coefficients; 18 terms Z_{a,b} Z_{a,b'}*.

    Z letters are indexed Z_{3(a-1)+b} for row a and column b of the 3x3
    scheme, a, b in 1..3.
    """
    terms = {}
    for a in range(3):
        for b in range(3):
            for bp in range(3):
                if b == bp:
                    continue
                word = (Letter(Kind.Z, 3 * a + b + 1), Letter(Kind.ZSTAR, 3 * a + bp + 1))
                terms[word] = terms.get(word, 0) + _unit(3, b, bp)
    return make_polynomial(0, 9, 3, terms, name="p333")


def k23() -> MatrixPolynomial:
    """One Z per edge of K_{2,3}: base vertices 1,2 (left) and 3,4,5 (right)."""
    terms = {}
    edge = 0
    for a in range(2):
        for b in range(2, 5):
            edge += 1
            terms[(Letter(Kind.Z, edge),)] = _unit(5, a, b)
            terms[(Letter(Kind.ZSTAR, edge),)] = _unit(5, b, a)
    return make_polynomial(0, 6, 5, terms, name="k23")


def bipartite3() -> MatrixPolynomial:
    """Three Z letters with 2x2 coefficients; random 3-regular bipartite graphs."""
    up = np.array([[0.0, 1.0], [0.0, 0.0]])
    terms = {}
    for k in range(1, 4):
        terms[(Letter(Kind.Z, k),)] = up
        terms[(Letter(Kind.ZSTAR, k),)] = up.T
    return make_polynomial(0, 3, 2, terms, name="bipartite3")


_FIXED = {"p333": p333, "k23": k23, "bipartite3": bipartite3}


def get_builtin(name: str) -> MatrixPolynomial:
    key = name.strip().lower()
    if key in _FIXED:
        return _FIXED[key]()
    match = re.fullmatch(r"p(\d+)", key)
    if match:
        return p_regular(int(match.group(1)))
    raise InputError(
        f"unknown builtin polynomial {name!r}; expected p<d>, p333, k23 or bipartite3"
    )


def builtin_names() -> list[str]:
    return ["p3", "p<d>", "p333", "k23", "bipartite3"]
