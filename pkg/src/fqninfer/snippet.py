"""Lenient, lossless Java-ish lexing plus API element identification and
context augmentation for incomplete snippets.

The lexer never fails: every byte of input lands in exactly one token, so
concatenating the lexemes reproduces the source exactly. Snippets are
allowed to be broken code; structure recognition downstream has to cope.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence


class TokenKind(Enum):
    IDENTIFIER = "identifier"
    KEYWORD = "keyword"
    LITERAL = "literal"
    PUNCT = "punct"
    COMMENT = "comment"
    WHITESPACE = "whitespace"


# Reserved words of the language, plus the three literal words which are
# reserved just the same for our purposes: none of them can name a type.
JAVA_KEYWORDS = frozenset(
    """
    abstract assert boolean break byte case catch char class const continue
    default do double else enum extends final finally float for goto if
    implements import instanceof int interface long native new package
    private protected public return short static strictfp super switch
    synchronized this throw throws transient try void volatile while
    true false null var record sealed permits yield
    """.split()
)


@dataclass(frozen=True)
class Token:
    lexeme: str
    kind: TokenKind
    line: int  # 1-based line where the token starts
    column: int  # 1-based column where the token starts


@dataclass(frozen=True)
class Snippet:
    raw: str
    tokens: tuple[Token, ...]

    @property
    def line_count(self) -> int:
        """Lines as an editor counts them: a trailing newline ends the last
        line instead of opening an empty extra one."""
        if not self.raw:
            return 1
        n = self.raw.count("\n")
        return n if self.raw.endswith("\n") else n + 1


_TOKEN_RE = re.compile(
    r"""
    (?P<comment>//[^\n]*|/\*.*?\*/|/\*.*)           # line, block, unterminated block
    |(?P<whitespace>\s+)
    |(?P<string>"(?:\\.|[^"\\\n])*(?:"|(?=\n)|$))    # string, unterminated stops at EOL
    |(?P<char>'(?:\\.|[^'\\\n])*(?:'|(?=\n)|$))
    |(?P<number>
        0[xX][0-9a-fA-F_]+[lL]?
        |0[bB][01_]+[lL]?
        |\d[\d_]*\.\d[\d_]*(?:[eE][+-]?\d+)?[fFdD]?
        |\.\d[\d_]*(?:[eE][+-]?\d+)?[fFdD]?
        |\d[\d_]*(?:[eE][+-]?\d+)?[fFdDlL]?
     )
    |(?P<identifier>[A-Za-z_$][A-Za-z0-9_$]*)
    """,
    re.VERBOSE | re.DOTALL,
)


def tokenize(text: str) -> Snippet:
    """Lossless total lexing: identifiers, keywords, literals, punctuation,
    comments and whitespace runs. Bytes that fit nothing become single-char
    punctuation tokens.
    """
    tokens: list[Token] = []
    pos = 0
    line = 1
    col = 1
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m and m.end() > pos:
            lexeme = m.group(0)
            group = m.lastgroup
            if group == "comment":
                kind = TokenKind.COMMENT
            elif group == "whitespace":
                kind = TokenKind.WHITESPACE
            elif group in ("string", "char", "number"):
                kind = TokenKind.LITERAL
            else:
                kind = (
                    TokenKind.KEYWORD
                    if lexeme in JAVA_KEYWORDS
                    else TokenKind.IDENTIFIER
                )
        else:
            lexeme = text[pos]
            kind = TokenKind.PUNCT
        tokens.append(Token(lexeme, kind, line, col))
        newlines = lexeme.count("\n")
        if newlines:
            line += newlines
            col = len(lexeme) - lexeme.rfind("\n")
        else:
            col += len(lexeme)
        pos += len(lexeme)
    return Snippet(raw=text, tokens=tuple(tokens))


def detokenize(snippet: Snippet) -> str:
    return "".join(t.lexeme for t in snippet.tokens)


# ---------------------------------------------------------------------------
# API element identification

class ElementRole(Enum):
    OBJECT_CREATION = "object_creation"
    DECLARED_TYPE = "declared_type"
    STATIC_RECEIVER = "static_receiver"
    EXTENDS_CLAUSE = "extends_clause"
    IMPLEMENTS_CLAUSE = "implements_clause"
    CAST = "cast"
    ANNOTATION = "annotation"
    OTHER = "other"


@dataclass(frozen=True)
class ApiElement:
    """One occurrence of an API class or interface name in a snippet.

    Occurrences are numbered from 1 within (simple_name, line), so the key
    Name[line,occurrence] is stable and human-readable.
    """

    simple_name: str
    line: int
    occurrence: int
    token_index: int
    role: ElementRole

    @property
    def key(self) -> str:
        return f"{self.simple_name}[{self.line},{self.occurrence}]"


def element_key(e: ApiElement) -> str:
    return e.key


_KEY_RE = re.compile(r"^(.+)\[(\d+),(\d+)\]$")


def parse_element_key(key: str) -> tuple[str, int, int]:
    m = _KEY_RE.match(key)
    if not m:
        raise ValueError(f"bad element key {key!r}")
    return m.group(1), int(m.group(2)), int(m.group(3))


# Boxed primitives never need FQN inference; String is ubiquitous enough
# that asking for it is noise, though callers can opt back in.
BOXED_NAMES = frozenset(
    ["Integer", "Long", "Double", "Float", "Boolean", "Character", "Byte", "Short", "Void"]
)


def _significant(snippet: Snippet) -> list[tuple[int, Token]]:
    return [
        (i, t)
        for i, t in enumerate(snippet.tokens)
        if t.kind not in (TokenKind.WHITESPACE, TokenKind.COMMENT)
    ]


def identify_api_elements(
    snippet: Snippet,
    kb=None,
    *,
    exclude_string: bool = True,
    extra_exclusions: Iterable[str] = (),
) -> list[ApiElement]:
    """Heuristic identification of API type occurrences, in token order.

    An uppercase-initial identifier becomes an element when it sits in a
    type-usage position: after `new`, as a declared type before another
    identifier, as the receiver of a static member access, in an extends or
    implements clause, as a cast, as an annotation name, or (when a kb is
    given) when its simple name matches a KB entry. Names declared by the
    snippet itself (class/interface/enum declarations) are excluded, as are
    boxed primitives and, by default, String.
    """
    excluded = set(BOXED_NAMES) | set(extra_exclusions)
    if exclude_string:
        excluded.add("String")

    sig = _significant(snippet)
    nsig = len(sig)

    def tok(j: int) -> Token | None:
        return sig[j][1] if 0 <= j < nsig else None

    local_decls: set[str] = set()
    for j, (_, t) in enumerate(sig):
        if t.kind == TokenKind.KEYWORD and t.lexeme in ("class", "interface", "enum"):
            nxt = tok(j + 1)
            if nxt is not None and nxt.kind == TokenKind.IDENTIFIER:
                local_decls.add(nxt.lexeme)

    # extends/implements zones: map sig index -> clause kind
    zone: dict[int, ElementRole] = {}
    j = 0
    while j < nsig:
        t = tok(j)
        if t.kind == TokenKind.KEYWORD and t.lexeme in ("class", "interface", "enum"):
            k = j + 1
            current: ElementRole | None = None
            while k < nsig:
                tk = tok(k)
                if tk.lexeme == "{" or tk.lexeme == ";":
                    break
                if tk.kind == TokenKind.KEYWORD and tk.lexeme == "extends":
                    current = ElementRole.EXTENDS_CLAUSE
                elif tk.kind == TokenKind.KEYWORD and tk.lexeme == "implements":
                    current = ElementRole.IMPLEMENTS_CLAUSE
                elif current is not None and tk.kind == TokenKind.IDENTIFIER:
                    zone[k] = current
                k += 1
            j = k
        else:
            j += 1

    occurrence_counter: dict[tuple[str, int], int] = {}
    elements: list[ApiElement] = []

    for j, (orig_index, t) in enumerate(sig):
        if t.kind != TokenKind.IDENTIFIER or not t.lexeme[:1].isupper():
            continue
        name = t.lexeme
        if name in excluded or name in local_decls:
            continue
        prev = tok(j - 1)
        nxt = tok(j + 1)
        nxt2 = tok(j + 2)
        if prev is not None and prev.lexeme == ".":
            continue  # mid-qualified-name segment or member access

        role: ElementRole | None = None
        if prev is not None and prev.lexeme == "@":
            role = ElementRole.ANNOTATION
        elif prev is not None and prev.kind == TokenKind.KEYWORD and prev.lexeme == "new":
            role = ElementRole.OBJECT_CREATION
        elif j in zone:
            role = zone[j]
        elif nxt is not None and nxt.lexeme == ".":
            member = nxt2
            if member is not None and member.kind == TokenKind.IDENTIFIER:
                role = ElementRole.STATIC_RECEIVER
        elif nxt is not None and nxt.kind == TokenKind.IDENTIFIER:
            role = ElementRole.DECLARED_TYPE
        elif (
            nxt is not None
            and nxt.lexeme == "["
            and nxt2 is not None
            and nxt2.lexeme == "]"
        ):
            after = tok(j + 3)
            if after is not None and after.kind == TokenKind.IDENTIFIER:
                role = ElementRole.DECLARED_TYPE
        elif (
            prev is not None
            and prev.lexeme == "("
            and nxt is not None
            and nxt.lexeme == ")"
            and nxt2 is not None
            and (
                nxt2.kind in (TokenKind.IDENTIFIER, TokenKind.LITERAL)
                or nxt2.lexeme in ("(", "new", "this")
            )
        ):
            role = ElementRole.CAST
        elif kb is not None and kb.candidates_for(name):
            role = ElementRole.OTHER

        if role is None:
            continue
        count = occurrence_counter.get((name, t.line), 0) + 1
        occurrence_counter[(name, t.line)] = count
        elements.append(ApiElement(name, t.line, count, orig_index, role))

    return elements


# ---------------------------------------------------------------------------
# augmentation

class AugmentError(ValueError):
    """A substitution key does not line up with the snippet's tokens."""


@dataclass(frozen=True)
class AugmentedSnippet:
    """The source snippet with some element tokens replaced by FQN lexemes.

    Token count, ordering and line numbers are unchanged; only the lexeme at
    each substituted index differs. Substituted FQNs keep IDENTIFIER kind so
    they participate in context windows as single tokens.
    """

    source: Snippet
    tokens: tuple[Token, ...]
    substitutions: Mapping[int, str]

    def text(self) -> str:
        return "".join(t.lexeme for t in self.tokens)


def augment(snippet: Snippet, typed: Mapping[ApiElement, str]) -> AugmentedSnippet:
    """Replace each typed element's token with its inferred FQN.

    The FQN's simple name does not have to match the element name: wrong
    inferences are substituted as-is. Raises AugmentError when a key does
    not point at a matching identifier token of this snippet.
    """
    subs: dict[int, str] = {}
    for e, fqn in typed.items():
        idx = e.token_index
        if idx < 0 or idx >= len(snippet.tokens):
            raise AugmentError(f"{e.key}: token index {idx} out of range")
        t = snippet.tokens[idx]
        if t.kind != TokenKind.IDENTIFIER or t.lexeme != e.simple_name:
            raise AugmentError(
                f"{e.key}: token at index {idx} is {t.lexeme!r}, not an "
                f"occurrence of {e.simple_name!r}"
            )
        if not fqn:
            raise AugmentError(f"{e.key}: empty FQN")
        subs[idx] = fqn
    new_tokens = list(snippet.tokens)
    for idx, fqn in subs.items():
        old = snippet.tokens[idx]
        new_tokens[idx] = Token(fqn, TokenKind.IDENTIFIER, old.line, old.column)
    return AugmentedSnippet(
        source=snippet, tokens=tuple(new_tokens), substitutions=dict(subs)
    )


def plain(snippet: Snippet) -> AugmentedSnippet:
    """The snippet viewed as an augmentation with no substitutions."""
    return augment(snippet, {})
