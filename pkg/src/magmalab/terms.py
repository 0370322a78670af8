"""Terms and identities over the signature {*, \\, /}.

Concrete syntax::

    identity := NAME ":" term "=" term
    term     := atom (OP atom)*        # one operator per chain, left-assoc
    atom     := VARIABLE | "(" term ")"

All three operators share one precedence level.  A chain such as
``x * y * z`` associates to the left; ``x * y \\ z`` is rejected because
the grouping would be a silent convention.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Optional, Union

from .errors import AmbiguityError, InvalidPositionError, ParseError


class Operator(enum.Enum):
    MUL = "*"
    LDIV = "\\"
    RDIV = "/"

    @property
    def symbol(self) -> str:
        return self.value

    @property
    def mirror(self) -> "Operator":
        return _MIRROR_OP[self]


_MIRROR_OP = {
    Operator.MUL: Operator.MUL,
    Operator.LDIV: Operator.RDIV,
    Operator.RDIV: Operator.LDIV,
}
_SYMBOLS = {"*": Operator.MUL, "·": Operator.MUL, "\\": Operator.LDIV, "/": Operator.RDIV}


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class App:
    op: Operator
    left: "Term"
    right: "Term"

    def __str__(self):
        return format_term(self)


Term = Union[Var, App]
Position = tuple  # tuple[int, ...]; 0 = left child, 1 = right child


class Direction(enum.Enum):
    L2R = "lr"
    R2L = "rl"

    @property
    def reverse(self) -> "Direction":
        return Direction.R2L if self is Direction.L2R else Direction.L2R

    @classmethod
    def parse(cls, text) -> "Direction":
        if isinstance(text, Direction):
            return text
        key = str(text).strip().lower()
        aliases = {"lr": cls.L2R, "l2r": cls.L2R, "rl": cls.R2L, "r2l": cls.R2L}
        if key not in aliases:
            raise ValueError(f"unknown direction {text!r}; expected 'lr' or 'rl'")
        return aliases[key]


def mul(a: Term, b: Term) -> App:
    return App(Operator.MUL, a, b)


def ldiv(a: Term, b: Term) -> App:
    return App(Operator.LDIV, a, b)


def rdiv(a: Term, b: Term) -> App:
    return App(Operator.RDIV, a, b)


# ---------------------------------------------------------------- structure


def size(t: Term) -> int:
    if isinstance(t, Var):
        return 1
    return 1 + size(t.left) + size(t.right)


def depth(t: Term) -> int:
    if isinstance(t, Var):
        return 0
    return 1 + max(depth(t.left), depth(t.right))


def variables(t: Term) -> list[str]:
    """Distinct variable names in left-to-right first-occurrence order."""
    seen: dict[str, None] = {}
    stack = [t]
    while stack:
        node = stack.pop()
        if isinstance(node, Var):
            seen.setdefault(node.name)
        else:
            stack.append(node.right)
            stack.append(node.left)
    return list(seen)


def positions(t: Term) -> Iterator[Position]:
    """All valid positions of ``t`` in pre-order (root first)."""
    stack: list[tuple[Term, Position]] = [(t, ())]
    while stack:
        node, pos = stack.pop()
        yield pos
        if isinstance(node, App):
            stack.append((node.right, pos + (1,)))
            stack.append((node.left, pos + (0,)))


def subterm_at(t: Term, p: Iterable[int]) -> Term:
    node = t
    for k, step in enumerate(p):
        if not isinstance(node, App) or step not in (0, 1):
            raise InvalidPositionError(
                f"position {format_position(p)} is not valid in {format_term(t)} "
                f"(fails at depth {k})"
            )
        node = node.left if step == 0 else node.right
    return node


def replace_at(t: Term, p: Iterable[int], s: Term) -> Term:
    p = tuple(p)
    if not p:
        return s
    if not isinstance(t, App) or p[0] not in (0, 1):
        raise InvalidPositionError(f"position {format_position(p)} is not valid")
    if p[0] == 0:
        return App(t.op, replace_at(t.left, p[1:], s), t.right)
    return App(t.op, t.left, replace_at(t.right, p[1:], s))


def is_valid_position(t: Term, p: Iterable[int]) -> bool:
    try:
        subterm_at(t, p)
    except InvalidPositionError:
        return False
    return True


def format_position(p: Iterable[int]) -> str:
    return ".".join(str(i) for i in p)


def parse_position(text: str) -> Position:
    text = text.strip()
    if text in ("", "root"):
        return ()
    try:
        steps = tuple(int(s) for s in text.split("."))
    except ValueError:
        raise ParseError(f"bad position {text!r}") from None
    if any(s not in (0, 1) for s in steps):
        raise ParseError(f"bad position {text!r}: steps must be 0 or 1")
    return steps


# ----------------------------------------------------- substitution/matching


def substitute(t: Term, binding: Mapping[str, Term]) -> Term:
    """Simultaneous substitution; unbound variables are left in place."""
    if isinstance(t, Var):
        return binding.get(t.name, t)
    left = substitute(t.left, binding)
    right = substitute(t.right, binding)
    if left is t.left and right is t.right:
        return t
    return App(t.op, left, right)


def match(pattern: Term, t: Term, binding: Optional[Mapping[str, Term]] = None):
    """One-sided syntactic matching.

    Returns the binding ``s`` (extending ``binding``) with
    ``substitute(pattern, s) == t``, or None.
    """
    out = dict(binding) if binding else {}
    stack = [(pattern, t)]
    while stack:
        pat, node = stack.pop()
        if isinstance(pat, Var):
            bound = out.get(pat.name)
            if bound is None:
                out[pat.name] = node
            elif bound != node:
                return None
        elif isinstance(node, App) and node.op is pat.op:
            stack.append((pat.right, node.right))
            stack.append((pat.left, node.left))
        else:
            return None
    return out


def match_at(t: Term, pattern: Term, p: Iterable[int]):
    return match(pattern, subterm_at(t, p))


# ------------------------------------------------------------- identities


_NAME_RE = re.compile(r"[A-Za-z0-9_][A-Za-z0-9_.'~+-]*")


@dataclass(frozen=True)
class Identity:
    name: str
    lhs: Term
    rhs: Term

    def sides(self, direction: Direction) -> tuple[Term, Term]:
        """(source, target) for rewriting in ``direction``."""
        if Direction.parse(direction) is Direction.L2R:
            return self.lhs, self.rhs
        return self.rhs, self.lhs

    def variables(self) -> list[str]:
        seen = dict.fromkeys(variables(self.lhs))
        seen.update(dict.fromkeys(variables(self.rhs)))
        return list(seen)

    def renamed(self, name: str) -> "Identity":
        return Identity(name, self.lhs, self.rhs)

    def swapped(self) -> "Identity":
        return Identity(self.name, self.rhs, self.lhs)

    def __str__(self):
        return format_identity(self)


class Theory(tuple):
    """An ordered tuple of identities with pairwise distinct names."""

    def __new__(cls, identities: Iterable[Identity] = ()):
        items = tuple(identities)
        seen = set()
        for ident in items:
            if ident.name in seen:
                raise ValueError(f"duplicate identity name {ident.name!r} in theory")
            seen.add(ident.name)
        return super().__new__(cls, items)

    @property
    def names(self) -> list[str]:
        return [i.name for i in self]

    def __getitem__(self, key):
        if isinstance(key, str):
            for ident in self:
                if ident.name == key:
                    return ident
            raise KeyError(key)
        result = super().__getitem__(key)
        return Theory(result) if isinstance(key, slice) else result

    def __contains__(self, item):
        if isinstance(item, str):
            return any(i.name == item for i in self)
        return super().__contains__(item)

    def without(self, name: str) -> "Theory":
        return Theory(i for i in self if i.name != name)

    def select(self, names: Iterable[str]) -> "Theory":
        return Theory(self[n] for n in names)

    def __add__(self, other):
        return Theory(tuple(self) + tuple(other))

    def __repr__(self):
        return f"Theory({self.names})"


# ------------------------------------------------------------------ parsing


_TOKEN_RE = re.compile(r"\s*(?:(?P<var>[A-Za-z][A-Za-z0-9_]*)|(?P<sym>[()*·\\/=:]))")


def _tokenize(text: str, start: int = 0):
    tokens = []
    pos = start
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        kind = "var" if m.group("var") else "sym"
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _TermParser:
    def __init__(self, text: str, tokens):
        self.text = text
        self.tokens = tokens
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message, tok=None):
        tok = tok or self.peek()
        return ParseError(message, tok[2], self.text)

    def term(self) -> Term:
        result = self.atom()
        chain_op = None
        while True:
            kind, value, pos = self.peek()
            if kind != "sym" or value not in _SYMBOLS:
                return result
            op = _SYMBOLS[value]
            if chain_op is not None and op is not chain_op:
                raise AmbiguityError(
                    f"operators {chain_op.symbol!r} and {op.symbol!r} mixed without "
                    "parentheses",
                    pos,
                    self.text,
                )
            chain_op = op
            self.take()
            result = App(op, result, self.atom())

    def atom(self) -> Term:
        tok = self.take()
        kind, value, _ = tok
        if kind == "var":
            return Var(value)
        if value == "(":
            inner = self.term()
            if self.peek()[1] != ")":
                raise self.error("expected ')'")
            self.take()
            return inner
        if kind == "end":
            raise self.error("unexpected end of input", tok)
        raise self.error(f"unexpected {value!r}", tok)

    def expect_end(self):
        if self.peek()[0] != "end":
            raise self.error(f"unexpected {self.peek()[1]!r}")


def parse_term(text: str) -> Term:
    parser = _TermParser(text, _tokenize(text))
    t = parser.term()
    parser.expect_end()
    return t


def parse_identity(text: str) -> Identity:
    """Parse ``NAME: term = term``."""
    colon = text.find(":")
    if colon < 0:
        raise ParseError("expected 'NAME:' prefix", 0, text)
    name = text[:colon].strip()
    if not _NAME_RE.fullmatch(name):
        raise ParseError(f"bad identity name {name!r}", 0, text)
    parser = _TermParser(text, _tokenize(text, colon + 1))
    lhs = parser.term()
    if parser.peek()[1] != "=":
        raise parser.error("expected '='")
    parser.take()
    rhs = parser.term()
    parser.expect_end()
    return Identity(name, lhs, rhs)


def parse_theory(text: str) -> Theory:
    """Parse ``.eq`` text: one identity per line, ``#`` comments."""
    identities = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            identities.append(parse_identity(line))
        except ParseError as exc:
            raise type(exc)(f"line {lineno}: {exc}") from None
    try:
        return Theory(identities)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


# ----------------------------------------------------------------- printing


def format_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    left = format_term(t.left)
    if isinstance(t.left, App) and t.left.op is not t.op:
        left = f"({left})"
    right = format_term(t.right)
    if isinstance(t.right, App):
        right = f"({right})"
    return f"{left} {t.op.symbol} {right}"


def format_identity(ident: Identity) -> str:
    return f"{ident.name}: {format_term(ident.lhs)} = {format_term(ident.rhs)}"


def format_theory(theory: Iterable[Identity]) -> str:
    return "".join(format_identity(i) + "\n" for i in theory)


# ---------------------------------------------------------------- rewriting


def rewrite_at(t: Term, ident: Identity, direction, p: Iterable[int] = ()):
    """Rewrite the subterm at ``p`` with ``ident`` oriented by ``direction``.

    Returns the new term, or None when the source side does not match there.
    Target-only variables are left unbound.
    """
    p = tuple(p)
    source, target = ident.sides(direction)
    binding = match(source, subterm_at(t, p))
    if binding is None:
        return None
    return replace_at(t, p, substitute(target, binding))


# ------------------------------------------------------------------- mirror


def mirror_term(t: Term) -> Term:
    if isinstance(t, Var):
        return t
    return App(t.op.mirror, mirror_term(t.right), mirror_term(t.left))


def mirror_identity(ident: Identity, name: Optional[str] = None) -> Identity:
    return Identity(
        name if name is not None else f"{ident.name}~mirror",
        mirror_term(ident.lhs),
        mirror_term(ident.rhs),
    )


def mirror_position(p: Iterable[int]) -> Position:
    return tuple(1 - s for s in p)


# ------------------------------------------------------ renaming equivalence


def canonical(ident: Identity) -> tuple[Term, Term]:
    """Both sides with variables renamed to v0, v1, ... by first occurrence."""
    ren = {v: Var(f"v{k}") for k, v in enumerate(ident.variables())}
    return substitute(ident.lhs, ren), substitute(ident.rhs, ren)


def equivalent(a: Identity, b: Identity, allow_swap: bool = True) -> bool:
    """True if ``a`` and ``b`` agree up to variable renaming.

    With ``allow_swap`` the sides of ``b`` may also be exchanged.
    """
    ca = canonical(a)
    if ca == canonical(b):
        return True
    return allow_swap and ca == canonical(b.swapped())
