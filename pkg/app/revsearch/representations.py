"""
Token-stream representations of a method body.

    r0  raw lexical tokens
    r1  r0 over the canonical layout; the Type-1 view (same tokens as r0,
        since layout and comments are already erased upstream)
    r2  identifiers -> ID, literals -> LIT; the Type-2 view
    r3  r2 plus type keywords and type-position identifiers -> TY

Type positions are found heuristically: an identifier directly followed by
another identifier (``String name``), by a generic argument list or array
brackets that are then followed by an identifier (``List<X> xs``,
``int[] a``), an identifier right after ``new``, and identifiers inside a
generic argument list that belongs to a type position.
"""

from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Sequence, Tuple

from .extractor import TYPE_KEYWORDS, Token, TokenKind, code_tokens

GRAM_SEPARATOR = "\x1f"
LITERAL_KINDS = frozenset((TokenKind.STRING, TokenKind.CHAR, TokenKind.NUMBER, TokenKind.CONSTANT))


class Representation(str, Enum):
    R0 = "r0"
    R1 = "r1"
    R2 = "r2"
    R3 = "r3"

    @property
    def index(self) -> int:
        return int(self.value[1])


REPRESENTATIONS: Tuple[Representation, ...] = tuple(Representation)


@dataclass(frozen=True)
class TokenStream:
    representation: Representation
    tokens: Tuple[str, ...]

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class NgramSet:
    """Multiset of n-grams; each gram is n tokens joined by GRAM_SEPARATOR."""
    representation: Representation
    n: int
    grams: Counter = field(default_factory=Counter)

    @property
    def total(self) -> int:
        return sum(self.grams.values())


def _token_text(token: Token) -> str:
    return token.text.replace(GRAM_SEPARATOR, "\\u001f")


def _body_tokens(body: Sequence[str]) -> List[Token]:
    return code_tokens("\n".join(body))


def _close_generic(tokens: Sequence[Token], open_index: int) -> int:
    """Index just past the '>' closing the generic list opened at open_index, or -1."""
    depth = 0
    for i in range(open_index, len(tokens)):
        text = tokens[i].text
        if text == "<":
            depth += 1
        elif text == ">":
            depth -= 1
            if depth == 0:
                return i + 1
        elif text == "?" or text == "," or text == "." or text == "&" or text in ("[", "]"):
            continue
        elif tokens[i].kind not in (TokenKind.IDENT, TokenKind.KEYWORD):
            return -1
    return -1


def _skip_brackets(tokens: Sequence[Token], index: int) -> int:
    while index + 1 < len(tokens) and tokens[index].text == "[" and tokens[index + 1].text == "]":
        index += 2
    return index


def type_positions(tokens: Sequence[Token]) -> set:
    """Indexes of identifiers that sit in a type position."""
    positions = set()
    for i, token in enumerate(tokens):
        if token.kind is not TokenKind.IDENT:
            continue
        if i > 0 and tokens[i - 1].text == "new":
            positions.add(i)
        following = i + 1
        generic_args = []
        if following < len(tokens) and tokens[following].text == "<":
            after = _close_generic(tokens, following)
            if after == -1:
                continue
            generic_args = [j for j in range(following, after) if tokens[j].kind is TokenKind.IDENT]
            following = after
        following = _skip_brackets(tokens, following)
        if following < len(tokens) and tokens[following].kind is TokenKind.IDENT:
            positions.add(i)
            positions.update(generic_args)
        elif i in positions:
            positions.update(generic_args)
    return positions


def _stream(rep: Representation, tokens: Sequence[Token]) -> TokenStream:
    if rep in (Representation.R0, Representation.R1):
        return TokenStream(rep, tuple(_token_text(t) for t in tokens))
    types = type_positions(tokens) if rep is Representation.R3 else set()
    out = []
    for i, token in enumerate(tokens):
        if rep is Representation.R3 and (i in types or token.text in TYPE_KEYWORDS):
            out.append("TY")
        elif token.kind is TokenKind.IDENT:
            out.append("ID")
        elif token.kind in LITERAL_KINDS:
            out.append("LIT")
        else:
            out.append(_token_text(token))
    return TokenStream(rep, tuple(out))


def tokenize_r0(body: Sequence[str]) -> TokenStream:
    return _stream(Representation.R0, _body_tokens(body))


def tokenize_r1(body: Sequence[str]) -> TokenStream:
    return _stream(Representation.R1, _body_tokens(body))


def tokenize_r2(body: Sequence[str]) -> TokenStream:
    return _stream(Representation.R2, _body_tokens(body))


def tokenize_r3(body: Sequence[str]) -> TokenStream:
    return _stream(Representation.R3, _body_tokens(body))


def tokenize_all(body: Sequence[str]) -> Dict[Representation, TokenStream]:
    """All four streams from a single lexing pass."""
    tokens = _body_tokens(body)
    return {rep: _stream(rep, tokens) for rep in REPRESENTATIONS}


def ngrams(stream: TokenStream, n: int) -> NgramSet:
    """Contiguous n-token windows with multiplicity."""
    if n < 1:
        raise ValueError(f"n-gram size must be positive, got {n}")
    tokens = stream.tokens
    grams = Counter(
        GRAM_SEPARATOR.join(tokens[i:i + n]) for i in range(len(tokens) - n + 1)
    )
    return NgramSet(stream.representation, n, grams)


def ngram_sets(body: Sequence[str], sizes: Sequence[int]) -> Dict[Representation, NgramSet]:
    """One NgramSet per representation, using sizes[rep.index]."""
    streams = tokenize_all(body)
    return {rep: ngrams(streams[rep], sizes[rep.index]) for rep in REPRESENTATIONS}
