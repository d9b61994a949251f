"""
Tolerant Java-syntax scanner: comment stripping, canonical layout and
method extraction by brace matching.

No grammar is involved. Q&A snippets are frequently incomplete, so the
scanner only needs tokens, brace pairs and a header heuristic to find
method and constructor bodies.

Canonical layout style table (normalize_layout):
    - one statement per line; ``;`` inside parentheses does not break a line
    - ``{`` closes its line, K&R style, preceded by one space
    - ``}`` starts its own line and ends it, except when followed by
      ``else``, ``catch``, ``finally``, ``while``, ``)``, ``;``, ``,`` or ``.``
    - four spaces of indentation per open brace
    - tokens separated by one space; no space before ``) ] ; , . ::`` or ``[``,
      none after ``( [ . @ ::``, and none before ``(`` following a name
      (``foo(x)``) unless the name is a control keyword (``if (x)``)
    - a space is kept wherever gluing two tokens would re-lex differently,
      as in ``x. 5`` or ``: ::``

Initializer blocks (``static { }`` and bare ``{ }`` in a class body) are not
methods and produce no records.
"""

import re
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

from .exceptions import UnparsableFile


class TokenKind(str, Enum):
    COMMENT = "comment"
    STRING = "string"
    CHAR = "char"
    NUMBER = "number"
    CONSTANT = "constant"
    IDENT = "ident"
    KEYWORD = "keyword"
    OPERATOR = "operator"
    PUNCT = "punct"
    OTHER = "other"


KEYWORDS = frozenset("""
    abstract assert boolean break byte case catch char class const continue
    default do double else enum extends final finally float for goto if
    implements import instanceof int interface long native new package private
    protected public return short static strictfp super switch synchronized
    this throw throws transient try void volatile while
""".split())

TYPE_KEYWORDS = frozenset("boolean byte char short int long float double void".split())
CONSTANTS = frozenset(("true", "false", "null"))

TOKEN_PATTERN = re.compile(r"""
    (?P<ws>[ \t\f\r\v]+|\n)
  | (?P<comment>/\*.*?(?:\*/|\Z)|//[^\n]*)
  | (?P<textblock>\"\"\".*?(?:\"\"\"|\Z))
  | (?P<string>"(?:\\.|[^"\\\n])*"?)
  | (?P<char>'(?:\\.|[^'\\\n])*'?)
  | (?P<number>(?:0[xX][0-9a-fA-F_]+|0[bB][01_]+|(?:\d[\d_]*)?\.?\d[\d_]*(?:[eE][+-]?\d+)?)[lLfFdD]?)
  | (?P<word>(?:[^\W\d]|\$)[\w$]*)
  | (?P<operator>>>>=|<<=|>>=|->|::|\+\+|--|&&|\|\||[=!<>+\-*/%&|^]=|[=<>!~?:+\-*/%&|^@])
  | (?P<punct>[{}()\[\];,.])
  | (?P<other>.)
""", re.VERBOSE | re.DOTALL)


@dataclass(frozen=True)
class Token:
    """One lexical token with its 1-based line span and character offsets."""
    kind: TokenKind
    text: str
    line: int
    end_line: int
    start: int
    end: int


def lex(text: str) -> List[Token]:
    """Split source text into tokens; never fails, unknown characters become OTHER."""
    tokens = []
    line = 1
    for match in TOKEN_PATTERN.finditer(text):
        group = match.lastgroup
        value = match.group()
        newlines = value.count("\n")
        if group != "ws":
            if group == "word":
                if value in CONSTANTS:
                    kind = TokenKind.CONSTANT
                elif value in KEYWORDS:
                    kind = TokenKind.KEYWORD
                else:
                    kind = TokenKind.IDENT
            elif group == "textblock":
                kind = TokenKind.STRING
            else:
                kind = TokenKind(group)
            tokens.append(Token(kind, value, line, line + newlines, match.start(), match.end()))
        line += newlines
    return tokens


def code_tokens(text: str) -> List[Token]:
    return [t for t in lex(text) if t.kind is not TokenKind.COMMENT]


# ---------------------------------------------------------------------------
# Comment stripping
# ---------------------------------------------------------------------------

def strip_comments(lines: Sequence[str]) -> List[str]:
    """Remove line and block comments; string and char literals are untouched.

    Lines that held nothing but comment text disappear. Lines that kept code
    keep their original indentation and lose trailing whitespace.
    """
    if not lines:
        return []
    text = "\n".join(lines)
    pieces = []
    touched = set()
    pos = 0
    for token in lex(text):
        if token.kind is not TokenKind.COMMENT:
            continue
        pieces.append(text[pos:token.start])
        pieces.append("\n" * token.text.count("\n"))
        touched.update(range(token.line, token.end_line + 1))
        pos = token.end
    pieces.append(text[pos:])

    result = []
    for number, (original, stripped) in enumerate(zip(lines, "".join(pieces).split("\n")), start=1):
        if number not in touched:
            result.append(stripped)
            continue
        code = stripped.strip()
        if code:
            indent = original[: len(original) - len(original.lstrip())]
            result.append(indent + code)
    return result


# ---------------------------------------------------------------------------
# Canonical layout
# ---------------------------------------------------------------------------

INDENT = "    "
NO_SPACE_BEFORE = frozenset((")", "]", ";", ",", ".", "::", "["))
NO_SPACE_AFTER = frozenset(("(", "[", ".", "@", "::"))
SPACED_PAREN_KEYWORDS = frozenset((
    "if", "for", "while", "switch", "catch", "synchronized", "return", "try",
    "throw", "case", "else", "do", "assert",
))
CLOSE_CONTINUATIONS = frozenset(("else", "catch", "finally", "while", ")", ";", ",", "."))


def _join(parts: Sequence[str]) -> str:
    out = []
    prev = None
    for part in parts:
        if prev is not None and glued_tokens_merge(prev, part):
            out.append(" " + part)
        elif prev is None or part in NO_SPACE_BEFORE or prev in NO_SPACE_AFTER:
            out.append(part)
        elif part == "(" and re.match(r"[\w$]", prev[-1]) and prev not in SPACED_PAREN_KEYWORDS:
            out.append(part)
        else:
            out.append(" " + part)
        prev = part
    return "".join(out)


def glued_tokens_merge(prev: str, part: str) -> bool:
    """True when writing part directly after prev would lex as different tokens."""
    # ". 5" would become the number ".5"; ": ::" would become ":: :"
    return (prev == "." and part[:1].isdigit()) or (prev == ":" and part[:1] == ":")


def layout_tokens(tokens: Sequence[Token]) -> List[str]:
    """Render comment-free tokens in the canonical layout."""
    lines: List[str] = []
    current: List[str] = []
    line_depth = 0
    depth = 0
    paren = 0
    paren_stack: List[int] = []

    def flush():
        if current:
            lines.append(INDENT * line_depth + _join(current))
            current.clear()

    def put(text):
        nonlocal line_depth
        if not current:
            line_depth = depth
        current.append(text)

    texts = [t.text for t in tokens if t.kind is not TokenKind.COMMENT]
    for i, text in enumerate(texts):
        following = texts[i + 1] if i + 1 < len(texts) else None
        if text == "}":
            flush()
            depth = max(0, depth - 1)
            paren = paren_stack.pop() if paren_stack else 0
            put(text)
            if following not in CLOSE_CONTINUATIONS:
                flush()
            continue
        put(text)
        if text == "{":
            depth += 1
            paren_stack.append(paren)
            paren = 0
            flush()
        elif text == "(":
            paren += 1
        elif text == ")":
            paren = max(0, paren - 1)
        elif text == ";" and paren == 0:
            flush()
    flush()
    return lines


def normalize_layout(lines: Sequence[str]) -> List[str]:
    """Deterministic, idempotent pretty printing of comment-free source lines."""
    return layout_tokens(lex("\n".join(lines)))


def canonical_lines(lines: Sequence[str]) -> List[str]:
    """Comment removal followed by layout normalization."""
    return normalize_layout(strip_comments(lines))


# ---------------------------------------------------------------------------
# Method extraction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SourceFile:
    project_id: str
    path: str
    lines: Tuple[str, ...]

    @classmethod
    def from_text(cls, project_id: str, path: str, text: str) -> "SourceFile":
        return cls(project_id, path, tuple(text.splitlines()))


@dataclass(frozen=True)
class MethodRecord:
    """A method or constructor found in a project file.

    start_line and end_line refer to the original file; body is the
    comment-free canonical rendering of the declaration.
    """
    project_id: str
    path: str
    method_name: str
    start_line: int
    end_line: int
    body: Tuple[str, ...]

    @property
    def line_count(self) -> int:
        return len(self.body)

    @property
    def text(self) -> str:
        return "\n".join(self.body)


HEADER_MODIFIERS = frozenset((
    "public", "private", "protected", "static", "final", "abstract",
    "synchronized", "native", "strictfp", "default", "transient", "volatile",
)) | TYPE_KEYWORDS
TYPE_DECLARATORS = frozenset(("class", "interface", "enum", "record"))
THROWS_CLAUSE_PUNCT = frozenset((".", ",", "<", ">", "?", "&"))
BOUNDARIES = frozenset((";", "{", "}"))


def match_braces(tokens: Sequence[Token]) -> Dict[int, int]:
    """Map each '{' index to its matching '}' index."""
    pairs = {}
    stack = []
    for index, token in enumerate(tokens):
        if token.text == "{":
            stack.append(index)
        elif token.text == "}":
            if not stack:
                raise UnparsableFile(f"unmatched '}}' at line {token.line}")
            pairs[stack.pop()] = index
    if stack:
        raise UnparsableFile(f"unclosed '{{' opened at line {tokens[stack[-1]].line}")
    return pairs


def method_header(tokens: Sequence[Token], open_index: int) -> Optional[Tuple[int, int]]:
    """Return (declaration start index, name index) if the brace opens a method body."""
    close_paren = open_index - 1
    if close_paren < 0:
        return None
    if tokens[close_paren].text != ")":
        # throws clause between the parameter list and the body
        j = close_paren
        while j >= 0 and (tokens[j].kind is TokenKind.IDENT or tokens[j].text in THROWS_CLAUSE_PUNCT):
            j -= 1
        if j < 1 or tokens[j].text != "throws" or tokens[j - 1].text != ")":
            return None
        close_paren = j - 1

    depth = 0
    k = close_paren
    while k >= 0:
        if tokens[k].text == ")":
            depth += 1
        elif tokens[k].text == "(":
            depth -= 1
            if depth == 0:
                break
        k -= 1
    name_index = k - 1
    if k < 0 or name_index < 0 or tokens[name_index].kind is not TokenKind.IDENT:
        return None

    if name_index > 0:
        before = tokens[name_index - 1]
        if before.kind is TokenKind.KEYWORD:
            if before.text not in HEADER_MODIFIERS:
                return None
        elif before.kind is TokenKind.IDENT:
            if before.text in TYPE_DECLARATORS:
                return None
        elif before.text not in BOUNDARIES and before.text not in (">", "]", ")"):
            return None

    start = name_index
    while start > 0 and tokens[start - 1].text not in BOUNDARIES:
        start -= 1
    return start, name_index


def enclosing_braces(tokens: Sequence[Token]) -> Dict[int, Optional[int]]:
    """Map each '{' index to the index of the '{' that directly encloses it."""
    parents: Dict[int, Optional[int]] = {}
    stack: List[int] = []
    for index, token in enumerate(tokens):
        if token.text == "{":
            parents[index] = stack[-1] if stack else None
            stack.append(index)
        elif token.text == "}" and stack:
            stack.pop()
    return parents


def in_enum_constants(tokens: Sequence[Token], body_open: int, index: int) -> bool:
    """True when index lies in the constant list of the enum whose body opens at body_open."""
    k = body_open - 1
    while k >= 0 and tokens[k].text not in BOUNDARIES:
        if tokens[k].text == "enum":
            break
        k -= 1
    if k < 0 or tokens[k].text != "enum":
        return False
    depth = 0
    for token in tokens[body_open + 1:index]:
        if token.text in ("(", "{", "["):
            depth += 1
        elif token.text in (")", "}", "]"):
            depth -= 1
        elif token.text == ";" and depth == 0:
            return False
    return True


def find_methods(tokens: Sequence[Token]) -> List[Tuple[int, int, int]]:
    """(start, name, close) token indexes of every method body, outermost first.

    Enum constants with arguments and a class body (``PLUS(1) { ... }``) are
    not methods; the methods inside their bodies are.
    """
    parents = enclosing_braces(tokens)
    found = []
    for open_index, close_index in sorted(match_braces(tokens).items()):
        header = method_header(tokens, open_index)
        if header is None:
            continue
        parent = parents.get(open_index)
        if parent is not None and in_enum_constants(tokens, parent, header[1]):
            continue
        found.append((header[0], header[1], close_index))
    return found


def extract_methods(file: SourceFile, min_lines: int = 1) -> List[MethodRecord]:
    """Method-level records for one file.

    Raises UnparsableFile when the braces of the file do not balance.
    """
    tokens = code_tokens("\n".join(file.lines))
    records = []
    seen_start_lines = set()
    for start, name, close in find_methods(tokens):
        start_line = tokens[start].line
        if start_line in seen_start_lines:
            continue
        body = layout_tokens(tokens[start:close + 1])
        if len(body) < min_lines:
            continue
        seen_start_lines.add(start_line)
        records.append(MethodRecord(
            project_id=file.project_id,
            path=file.path,
            method_name=tokens[name].text,
            start_line=start_line,
            end_line=tokens[close].end_line,
            body=tuple(body),
        ))
    return records


# ---------------------------------------------------------------------------
# Snippet units
# ---------------------------------------------------------------------------

SNIPPET_SHELL = ("void snippet() {", "}")


def _drop_imports(tokens: Sequence[Token]) -> List[Token]:
    kept = []
    skipping = False
    for token in tokens:
        if not skipping and token.text in ("package", "import") and not kept:
            skipping = True
        elif not skipping and token.text in ("package", "import") and kept[-1].text in BOUNDARIES:
            skipping = True
        if skipping:
            if token.text == ";":
                skipping = False
            continue
        kept.append(token)
    return kept


def wrap_snippet(lines: Sequence[str]) -> List[str]:
    """Canonical body of a Q&A code block.

    Blocks holding at least one method or type declaration are kept as they
    are; bare statement sequences are wrapped in a synthetic method shell so
    that snippets and project methods share one search unit.
    """
    tokens = _drop_imports(code_tokens("\n".join(lines)))
    if not tokens:
        return []
    try:
        has_declaration = bool(find_methods(tokens))
    except UnparsableFile:
        has_declaration = False
    if not has_declaration:
        has_declaration = any(t.text in ("class", "interface", "enum") for t in tokens)
    if has_declaration:
        return layout_tokens(tokens)
    opening, closing = (code_tokens(part) for part in SNIPPET_SHELL)
    return layout_tokens(opening + tokens + closing)
