"""Tokenizer for first-order logic strings produced by LLM translators.

Splits a formula into lexical tokens (connectives, quantifiers, predicates,
terms, punctuation) without enforcing well-formedness: downstream scoring
consumes a flat token stream, not a parse tree, so malformed but tokenizable
output is accepted.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum


class FolError(Exception):
    """Base class for tokenizer and response-extraction failures."""


class EmptyFormulaError(FolError):
    pass


class UnknownSymbolError(FolError):
    def __init__(self, position: int, char: str):
        super().__init__(f"unknown symbol {char!r} at byte offset {position}")
        self.position = position
        self.char = char


class NoFormulaFoundError(FolError):
    pass


class EmptyFormulaListError(FolError):
    pass


class TokenClass(Enum):
    NEGATION = "negation"
    BINARY_CONNECTIVE = "binary_connective"
    QUANTIFIER = "quantifier"
    PREDICATE = "predicate"
    TERM = "term"
    PUNCTUATION = "punctuation"


NEGATION = "¬"  # ¬
BINARY_CONNECTIVES = frozenset({"→", "↔", "∧", "∨", "⊕"})  # → ↔ ∧ ∨ ⊕
QUANTIFIERS = frozenset({"∀", "∃"})  # ∀ ∃
CONNECTIVES = frozenset({NEGATION}) | BINARY_CONNECTIVES

_SINGLE_CHAR = {
    "¬": NEGATION,
    "~": NEGATION,
    "∧": "∧",
    "&": "∧",
    "∨": "∨",
    "|": "∨",
    "→": "→",
    "↔": "↔",
    "⊕": "⊕",
    "∀": "∀",
    "∃": "∃",
}

_WORD_ALIASES = {
    "not": NEGATION,
    "xor": "⊕",
    "forall": "∀",
    "exists": "∃",
}

_PUNCTUATION = frozenset("(),.[]{}:;")

_IDENT_RE = re.compile(r"[A-Za-z0-9_]+")


def _classify_symbol(canonical: str) -> TokenClass:
    if canonical == NEGATION:
        return TokenClass.NEGATION
    if canonical in BINARY_CONNECTIVES:
        return TokenClass.BINARY_CONNECTIVE
    return TokenClass.QUANTIFIER


@dataclass(frozen=True)
class FolToken:
    surface: str  # canonical form; ASCII aliases are normalized
    kind: TokenClass
    char_span: tuple[int, int]  # byte offsets into the UTF-8 source

    @property
    def is_connective(self) -> bool:
        return self.surface in CONNECTIVES


@dataclass(frozen=True)
class FolTokenSeq:
    tokens: tuple[FolToken, ...]
    source: str

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    @property
    def surfaces(self) -> list[str]:
        return [t.surface for t in self.tokens]

    def normalized(self) -> str:
        """Canonical single-spaced rendering of the token stream."""
        return " ".join(self.surfaces)


def tokenize_fol(formula: str) -> FolTokenSeq:
    """Split a formula into classified tokens.

    ASCII aliases (~, &, |, ->, <->, not, xor, forall, exists) are
    normalized to their canonical Unicode surfaces. An identifier run
    immediately followed by "(" is a predicate; other identifier runs
    are terms.

    Raises EmptyFormulaError for blank input and UnknownSymbolError for
    characters outside the accepted alphabet.
    """
    if not formula or not formula.strip():
        raise EmptyFormulaError("formula is empty")

    tokens: list[FolToken] = []
    i = 0
    byte_pos = 0
    n = len(formula)

    def advance(text: str) -> None:
        nonlocal i, byte_pos
        i += len(text)
        byte_pos += len(text.encode("utf-8"))

    while i < n:
        ch = formula[i]
        if ch.isspace():
            advance(ch)
            continue
        start_byte = byte_pos
        if formula.startswith("<->", i):
            tokens.append(FolToken("↔", TokenClass.BINARY_CONNECTIVE, (start_byte, start_byte + 3)))
            advance("<->")
            continue
        if formula.startswith("->", i):
            tokens.append(FolToken("→", TokenClass.BINARY_CONNECTIVE, (start_byte, start_byte + 2)))
            advance("->")
            continue
        if ch in _SINGLE_CHAR:
            canonical = _SINGLE_CHAR[ch]
            end_byte = start_byte + len(ch.encode("utf-8"))
            tokens.append(FolToken(canonical, _classify_symbol(canonical), (start_byte, end_byte)))
            advance(ch)
            continue
        match = _IDENT_RE.match(formula, i)
        if match:
            run = match.group(0)
            end_byte = start_byte + len(run.encode("utf-8"))
            alias = _WORD_ALIASES.get(run)
            if alias is not None:
                tokens.append(FolToken(alias, _classify_symbol(alias), (start_byte, end_byte)))
            elif formula.startswith("(", match.end()):
                tokens.append(FolToken(run, TokenClass.PREDICATE, (start_byte, end_byte)))
            else:
                tokens.append(FolToken(run, TokenClass.TERM, (start_byte, end_byte)))
            advance(run)
            continue
        if ch in _PUNCTUATION:
            end_byte = start_byte + len(ch.encode("utf-8"))
            tokens.append(FolToken(ch, TokenClass.PUNCTUATION, (start_byte, end_byte)))
            advance(ch)
            continue
        raise UnknownSymbolError(byte_pos, ch)

    return FolTokenSeq(tokens=tuple(tokens), source=formula)


_CONCLUSION_RE = re.compile(r"^\s*Conclusion:\s*$")


def extract_fol_from_llm_response(response: str) -> list[str]:
    """Pull formula lines out of a translator response.

    Formulas live after the last "Conclusion:" header, one per line in
    the form "FORMULA ::: explanation"; the explanation suffix is
    stripped. Predicate declarations before the header are ignored.

    Raises NoFormulaFoundError when there is no Conclusion block or it
    contains no ":::" line.
    """
    lines = response.splitlines()
    last_header = None
    for idx, line in enumerate(lines):
        if _CONCLUSION_RE.match(line):
            last_header = idx
    if last_header is None:
        raise NoFormulaFoundError("no Conclusion: block in response")
    formulas = []
    for line in lines[last_header + 1:]:
        if ":::" not in line:
            continue
        formula = line.split(":::", 1)[0].strip()
        if formula:
            formulas.append(formula)
    if not formulas:
        raise NoFormulaFoundError("Conclusion: block has no ::: formula line")
    return formulas


def join_formulas(formulas: list[str]) -> str:
    """Concatenate formulas into one newline-separated FOL text."""
    if not formulas:
        raise EmptyFormulaListError("no formulas to join")
    return "\n".join(formulas)
