"""Matrix polynomials: finitely many (reduced word, r x r coefficient) terms.

The text format is line based:

    # comment
    signature d=3 e=0 r=1
    term word="Y1" coeff=[[1]]
    term word="Z2 Z1*" coeff=[[0,(0,1)],[(0,-1),0]]

The header may carry ``symmetrize=true`` to accept non-self-adjoint input,
in which case (p + p*)/2 is stored.  Coefficients are row-major nested
brackets; entries are reals or complex ``(re,im)`` pairs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DslSyntaxError, InputError
from .words import (
    IDENTITY,
    Word,
    format_word,
    is_reduced,
    parse_word,
    reduce_word,
    validate_word,
    word_adjoint,
    word_key,
)

SELF_ADJOINT_TOL = 1e-12
ZERO_COEFF_TOL = 1e-15


@dataclass(frozen=True)
class MatrixPolynomial:
    """Formal sum of reduced words with r x r complex coefficients.

    Instances are immutable and canonical: words reduced, like terms merged,
    zero terms dropped, and for self-adjoint polynomials the coefficient of
    w* is stored bitwise equal to the adjoint of the coefficient of w.
    """

    d: int
    e: int
    r: int
    terms: dict = field(repr=False)  # Word -> np.ndarray (r, r)
    name: str | None = None

    @property
    def signature(self) -> tuple[int, int]:
        return (self.d, self.e)

    def degree(self) -> int:
        return max((len(w) for w in self.terms), default=0)

    def term_words(self) -> list[Word]:
        return sorted(self.terms, key=word_key)

    def coefficient(self, word: Word) -> np.ndarray:
        zero = np.zeros((self.r, self.r), dtype=complex)
        return self.terms.get(reduce_word(word), zero)

    def coefficient_norm_sum(self) -> float:
        """Sum of coefficient operator norms; upper bound for any evaluation."""
        return float(sum(np.linalg.norm(a, 2) for a in self.terms.values()))

    def is_real(self) -> bool:
        return all(np.all(a.imag == 0.0) for a in self.terms.values())

    def scaled(self, factor: float) -> "MatrixPolynomial":
        return make_polynomial(
            self.d, self.e, self.r,
            {w: factor * a for w, a in self.terms.items()},
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, MatrixPolynomial):
            return NotImplemented
        if (self.d, self.e, self.r) != (other.d, other.e, other.r):
            return False
        if set(self.terms) != set(other.terms):
            return False
        return all(np.array_equal(self.terms[w], other.terms[w]) for w in self.terms)


def _as_coeff(a, r: int) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.shape != (r, r):
        raise InputError(f"coefficient shape {a.shape} does not match r={r}")
    return a


def _canonicalize(d, e, r, raw_terms) -> dict:
    merged: dict[Word, np.ndarray] = {}
    for word, coeff in raw_terms.items():
        word = reduce_word(word)
        validate_word(word, d, e)
        coeff = _as_coeff(coeff, r)
        if word in merged:
            merged[word] = merged[word] + coeff
        else:
            merged[word] = coeff
    return {
        w: a for w, a in merged.items() if np.abs(a).max(initial=0.0) > ZERO_COEFF_TOL
    }


def self_adjoint_defect(terms: dict) -> float:
    """Largest entrywise deviation between a_{w*} and (a_w)*."""
    worst = 0.0
    seen = set()
    for word, coeff in terms.items():
        adj = word_adjoint(word)
        if (word, adj) in seen:
            continue
        seen.add((adj, word))
        other = terms.get(adj)
        if other is None:
            worst = max(worst, float(np.abs(coeff).max()))
        else:
            worst = max(worst, float(np.abs(other - coeff.conj().T).max()))
    return worst


def make_polynomial(d, e, r, terms, symmetrize=False, name=None) -> MatrixPolynomial:
    """Validate, canonicalize and wrap a term map.

    With ``symmetrize`` the polynomial (p + p*)/2 is built; otherwise a
    self-adjointness defect beyond tolerance raises.  Coefficients are then
    re-paired so that a_{w*} equals the adjoint of a_w exactly, which makes
    every downstream evaluation Hermitian without further care.
    """
    if d < 0 or e < 0 or r < 1:
        raise InputError(f"bad signature d={d} e={e} r={r}")
    terms = _canonicalize(d, e, r, terms)
    if symmetrize:
        sym: dict[Word, np.ndarray] = {}
        for word, coeff in terms.items():
            sym[word] = sym.get(word, 0) + coeff / 2
            adj = word_adjoint(word)
            sym[adj] = sym.get(adj, 0) + coeff.conj().T / 2
        terms = _canonicalize(d, e, r, sym)
    else:
        defect = self_adjoint_defect(terms)
        if defect > SELF_ADJOINT_TOL:
            raise InputError(
                f"polynomial is not self-adjoint (defect {defect:.3g}); "
                "set symmetrize=true to accept (p + p*)/2"
            )
    paired: dict[Word, np.ndarray] = {}
    for word in sorted(terms, key=word_key):
        adj = word_adjoint(word)
        if adj in paired:
            paired[word] = paired[adj].conj().T
        elif adj == word:
            paired[word] = (terms[word] + terms[word].conj().T) / 2
        else:
            paired[word] = terms[word]
    return MatrixPolynomial(d=d, e=e, r=r, terms=paired, name=name)


def poly_adjoint(p: MatrixPolynomial) -> MatrixPolynomial:
    """p* = sum over terms of (a_w)* w*."""
    return make_polynomial(
        p.d, p.e, p.r,
        {word_adjoint(w): a.conj().T for w, a in p.terms.items()},
        name=p.name,
    )


def is_self_adjoint(p: MatrixPolynomial, tol=SELF_ADJOINT_TOL) -> bool:
    return self_adjoint_defect(p.terms) <= tol


# ---------------------------------------------------------------------------
# DSL parsing
# ---------------------------------------------------------------------------


def _parse_number(text: str, line: int, col: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise DslSyntaxError(f"expected a number, got {text!r}", line, col) from None


class _MatrixScanner:
    """Recursive-descent scanner for row-major bracketed matrices."""

    def __init__(self, text: str, line: int, offset: int):
        self.text = text
        self.line = line
        self.offset = offset  # column of text[0] in the original line
        self.pos = 0

    def error(self, message):
        raise DslSyntaxError(message, self.line, self.offset + self.pos + 1)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1

    def peek(self):
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch):
        if self.peek() != ch:
            self.error(f"expected {ch!r}")
        self.pos += 1

    def scan_scalar(self) -> complex:
        if self.peek() == "(":
            self.expect("(")
            re = self.scan_bare_number()
            self.expect(",")
            im = self.scan_bare_number()
            self.expect(")")
            return complex(re, im)
        return complex(self.scan_bare_number(), 0.0)

    def scan_bare_number(self) -> float:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos] in "+-0123456789.eE":
            self.pos += 1
        if start == self.pos:
            self.error("expected a number")
        return _parse_number(self.text[start:self.pos], self.line, self.offset + start + 1)

    def scan_row(self) -> list[complex]:
        self.expect("[")
        row = [self.scan_scalar()]
        while self.peek() == ",":
            self.expect(",")
            row.append(self.scan_scalar())
        self.expect("]")
        return row

    def scan_matrix(self) -> np.ndarray:
        self.expect("[")
        if self.peek() == "[":
            rows = [self.scan_row()]
            while self.peek() == ",":
                self.expect(",")
                rows.append(self.scan_row())
            self.expect("]")
            if len({len(r) for r in rows}) != 1:
                self.error("ragged matrix rows")
            out = np.array(rows, dtype=complex)
        else:
            # [a] shorthand for a 1x1 matrix
            out = np.array([[self.scan_scalar()]], dtype=complex)
            self.expect("]")
        self.skip_ws()
        if self.pos != len(self.text):
            self.error("trailing characters after matrix")
        return out


def _split_fields(body: str, line: int):
    """Split ``key=value`` fields; values may be quoted or bracketed."""
    fields = {}
    i = 0
    n = len(body)
    while i < n:
        while i < n and body[i] in " \t":
            i += 1
        if i >= n:
            break
        start = i
        while i < n and body[i] not in "= \t":
            i += 1
        key = body[start:i]
        if i >= n or body[i] != "=":
            raise DslSyntaxError(f"expected '=' after {key!r}", line, i + 1)
        i += 1
        if i < n and body[i] == '"':
            i += 1
            vstart = i
            while i < n and body[i] != '"':
                i += 1
            if i >= n:
                raise DslSyntaxError("unterminated string", line, vstart)
            value, vcol = body[vstart:i], vstart
            i += 1
        elif i < n and body[i] == "[":
            depth = 0
            vstart = i
            while i < n:
                if body[i] == "[":
                    depth += 1
                elif body[i] == "]":
                    depth -= 1
                    if depth == 0:
                        i += 1
                        break
                i += 1
            if depth != 0:
                raise DslSyntaxError("unbalanced brackets", line, vstart + 1)
            value, vcol = body[vstart:i], vstart
        else:
            vstart = i
            while i < n and body[i] not in " \t":
                i += 1
            value, vcol = body[vstart:i], vstart
        fields[key] = (value, vcol)
    return fields


def parse_poly(text: str, name: str | None = None) -> MatrixPolynomial:
    """Parse DSL text into a canonical polynomial."""
    signature = None
    symmetrize = False
    raw_terms: list[tuple[Word, np.ndarray]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        stripped = line.lstrip()
        indent = len(line) - len(stripped)
        keyword, _, body = stripped.partition(" ")
        fields = _split_fields(body, lineno)
        if keyword == "signature":
            if signature is not None:
                raise DslSyntaxError("duplicate signature line", lineno, indent + 1)
            try:
                d = int(fields["d"][0])
                e = int(fields["e"][0])
                r = int(fields["r"][0])
            except KeyError as missing:
                raise DslSyntaxError(f"signature missing field {missing}", lineno, indent + 1)
            except ValueError:
                raise DslSyntaxError("signature fields must be integers", lineno, indent + 1)
            if "symmetrize" in fields:
                symmetrize = fields["symmetrize"][0].lower() in ("true", "1", "yes")
            signature = (d, e, r)
        elif keyword == "term":
            if signature is None:
                raise DslSyntaxError("term before signature line", lineno, indent + 1)
            if "word" not in fields or "coeff" not in fields:
                raise DslSyntaxError("term needs word=\"...\" and coeff=[...]", lineno, indent + 1)
            word_text, word_col = fields["word"]
            try:
                word = parse_word(word_text)
            except InputError as exc:
                raise DslSyntaxError(str(exc), lineno, indent + word_col + 1) from None
            coeff_text, coeff_col = fields["coeff"]
            coeff = _MatrixScanner(coeff_text, lineno, indent + coeff_col).scan_matrix()
            raw_terms.append((word, coeff))
        else:
            raise DslSyntaxError(f"unknown directive {keyword!r}", lineno, indent + 1)
    if signature is None:
        raise DslSyntaxError("missing signature line", 1, 1)
    d, e, r = signature
    merged: dict[Word, np.ndarray] = {}
    for word, coeff in raw_terms:
        coeff = _as_coeff(coeff, r)
        word = reduce_word(word)
        merged[word] = merged.get(word, 0) + coeff
    return make_polynomial(d, e, r, merged, symmetrize=symmetrize, name=name)


def _format_scalar(value: complex) -> str:
    if value.imag == 0.0:
        return repr(float(value.real))
    return f"({float(value.real)!r},{float(value.imag)!r})"


def serialize_poly(p: MatrixPolynomial) -> str:
    """Canonical DSL text; parse(serialize(p)) reproduces p exactly."""
    lines = [f"signature d={p.d} e={p.e} r={p.r}"]
    for word in p.term_words():
        coeff = p.terms[word]
        rows = ",".join(
            "[" + ",".join(_format_scalar(v) for v in row) + "]" for row in coeff
        )
        lines.append(f'term word="{format_word(word)}" coeff=[{rows}]')
    return "\n".join(lines) + "\n"
