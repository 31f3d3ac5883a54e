"""The function sequence P = (phi_0, phi_1, ...) behind a Perron expansion.

A program is a positive integer ``phi0`` plus a rule giving
``r_n = phi_n(x_1, ..., x_n)`` for n >= 1. Rules are either one of the
built-in families or an expression in a small language:

    expr   := term (('+' | '-') term)*
    term   := factor ('*' factor)*
    factor := atom ('^' atom)?
    atom   := INT | 'n' | 'x' '(' expr ')' | '(' expr ')'

``n`` is the current index and ``x(e)`` the e-th digit of the prefix
(1 <= e <= n). Whitespace is insignificant. Values are unbounded integers;
every evaluation must come out >= 1.

Built-in families (all with phi0 = 1):

* ``luroth``                 phi_n = 1
* ``modified-engel``         phi_n = x(n)          (positive side)
* ``pierce``                 phi_n = x(n)          (alternating side)
* ``alternating-engel``      phi_n = x(n)-1
* ``alternating-sylvester``  phi_n = (x(n)-1)*x(n)

``modified-engel`` and ``pierce`` are the same program; the name only
records the side on which it is usually read.
"""

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Union

import config
from exceptions import (
    EmptyInput, ExponentError, IndexOutOfRange, NonPositivePhi,
    PhiSyntaxError, UnknownFamily, ValidationError,
)
from logger import setup_logger

logger = setup_logger(__name__)


# ============================================================================
# SYNTAX TREE
# ============================================================================
@dataclass(frozen=True)
class Num:
    value: int


@dataclass(frozen=True)
class IndexVar:
    pass


@dataclass(frozen=True)
class Digit:
    index: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


Node = Union[Num, IndexVar, Digit, BinOp]

_PRECEDENCE = {'+': 1, '-': 1, '*': 2, '^': 3}
_ATOM_PRECEDENCE = 4


# ============================================================================
# TOKENIZER
# ============================================================================
_TOKEN_RE = re.compile(r"\s*(?:(\d+)|(\S))")


@dataclass(frozen=True)
class Token:
    kind: str
    position: int
    value: Optional[int] = None


def tokenize(text: str) -> List[Token]:
    """Split ``text`` into tokens; positions are 0-based character offsets."""
    tokens: List[Token] = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            # trailing whitespace
            break
        if match.group(1) is not None:
            tokens.append(Token('INT', match.start(1), int(match.group(1))))
        elif match.group(2) is not None:
            char = match.group(2)
            if char not in "+-*^()nx":
                raise PhiSyntaxError(
                    f"unexpected character {char!r}", match.start(2),
                    ('INT', 'n', 'x', '(', ')', '+', '-', '*', '^'),
                )
            tokens.append(Token(char, match.start(2)))
        pos = match.end()
    tokens.append(Token('EOF', len(text)))
    return tokens


# ============================================================================
# PARSER
# ============================================================================
_ATOM_START = ('INT', 'n', 'x', '(')


class Parser:
    """Recursive-descent parser over the token list, one method per rule."""

    def __init__(self, tokens: List[Token]):
        self.tokens = tokens
        self.current = 0

    def next(self) -> Token:
        return self.tokens[self.current]

    def advance(self) -> Token:
        token = self.tokens[self.current]
        if token.kind != 'EOF':
            self.current += 1
        return token

    def check(self, kinds: Sequence[str]) -> bool:
        return self.next().kind in kinds

    def expect(self, kind: str, expected: Sequence[str]) -> Token:
        if not self.check([kind]):
            token = self.next()
            found = 'end of input' if token.kind == 'EOF' else repr(token.kind)
            raise PhiSyntaxError(f"unexpected {found}", token.position, expected)
        return self.advance()

    def parse(self) -> Node:
        tree = self.expression()
        if not self.check(['EOF']):
            token = self.next()
            raise PhiSyntaxError(
                f"unexpected {token.kind!r}", token.position,
                ('+', '-', '*', '^', 'EOF'),
            )
        return tree

    def expression(self) -> Node:
        left = self.term()
        while self.check(['+', '-']):
            op = self.advance().kind
            left = BinOp(op, left, self.term())
        return left

    def term(self) -> Node:
        left = self.factor()
        while self.check(['*']):
            self.advance()
            left = BinOp('*', left, self.factor())
        return left

    def factor(self) -> Node:
        base = self.atom()
        if self.check(['^']):
            self.advance()
            return BinOp('^', base, self.atom())
        return base

    def atom(self) -> Node:
        token = self.next()
        if token.kind == 'INT':
            self.advance()
            return Num(token.value)
        if token.kind == 'n':
            self.advance()
            return IndexVar()
        if token.kind == 'x':
            self.advance()
            self.expect('(', ('(',))
            index = self.expression()
            self.expect(')', (')', '+', '-', '*', '^'))
            return Digit(index)
        if token.kind == '(':
            self.advance()
            inner = self.expression()
            self.expect(')', (')', '+', '-', '*', '^'))
            return inner
        found = 'end of input' if token.kind == 'EOF' else repr(token.kind)
        raise PhiSyntaxError(f"unexpected {found}", token.position, _ATOM_START)


def parse_expression(text: str) -> Node:
    if text is None or not text.strip():
        raise EmptyInput("phi expression is empty")
    return Parser(tokenize(text)).parse()


# ============================================================================
# PRETTY PRINTER
# ============================================================================
def _precedence(node: Node) -> int:
    return _PRECEDENCE[node.op] if isinstance(node, BinOp) else _ATOM_PRECEDENCE


def format_expression(node: Node) -> str:
    """Canonical text for ``node``: no spaces, only the parentheses the
    grammar needs to rebuild the same tree."""
    if isinstance(node, Num):
        return str(node.value)
    if isinstance(node, IndexVar):
        return 'n'
    if isinstance(node, Digit):
        return f"x({format_expression(node.index)})"

    prec = _PRECEDENCE[node.op]
    left = format_expression(node.left)
    right = format_expression(node.right)
    if node.op == '^':
        # both operands of '^' are atoms
        if isinstance(node.left, BinOp):
            left = f"({left})"
        if isinstance(node.right, BinOp):
            right = f"({right})"
    else:
        if _precedence(node.left) < prec:
            left = f"({left})"
        if _precedence(node.right) <= prec:
            right = f"({right})"
    return f"{left}{node.op}{right}"


# ============================================================================
# EVALUATION
# ============================================================================
def _evaluate(node: Node, n: int, digits: Sequence[int]) -> int:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, IndexVar):
        return n
    if isinstance(node, Digit):
        index = _evaluate(node.index, n, digits)
        if not 1 <= index <= n:
            raise IndexOutOfRange(f"x({index}) is outside 1..{n}")
        return digits[index - 1]

    left = _evaluate(node.left, n, digits)
    right = _evaluate(node.right, n, digits)
    if node.op == '+':
        return left + right
    if node.op == '-':
        return left - right
    if node.op == '*':
        return left * right
    if right < 0:
        raise ExponentError(f"negative exponent {right} at n={n}")
    if right > config.MAX_PHI_EXPONENT:
        raise ExponentError(
            f"exponent {right} at n={n} exceeds the cap {config.MAX_PHI_EXPONENT}"
        )
    return left ** right


def _mentions_bare_index(node: Node, inside_digit_ref: bool = False) -> bool:
    if isinstance(node, IndexVar):
        return not inside_digit_ref
    if isinstance(node, Digit):
        if isinstance(node.index, IndexVar):
            return False
        return True
    if isinstance(node, BinOp):
        return _mentions_bare_index(node.left) or _mentions_bare_index(node.right)
    return False


# ============================================================================
# BUILT-IN FAMILIES
# ============================================================================
class BuiltinFamily(str, Enum):
    LUROTH = 'luroth'
    MODIFIED_ENGEL = 'modified-engel'
    ALTERNATING_ENGEL = 'alternating-engel'
    PIERCE = 'pierce'
    ALTERNATING_SYLVESTER = 'alternating-sylvester'


_FAMILY_TEXT: Dict[BuiltinFamily, str] = {
    BuiltinFamily.LUROTH: '1',
    BuiltinFamily.MODIFIED_ENGEL: 'x(n)',
    BuiltinFamily.ALTERNATING_ENGEL: 'x(n)-1',
    BuiltinFamily.PIERCE: 'x(n)',
    BuiltinFamily.ALTERNATING_SYLVESTER: '(x(n)-1)*x(n)',
}

_FAMILY_RULE: Dict[BuiltinFamily, Callable[[int], int]] = {
    BuiltinFamily.LUROTH: lambda last: 1,
    BuiltinFamily.MODIFIED_ENGEL: lambda last: last,
    BuiltinFamily.ALTERNATING_ENGEL: lambda last: last - 1,
    BuiltinFamily.PIERCE: lambda last: last,
    BuiltinFamily.ALTERNATING_SYLVESTER: lambda last: (last - 1) * last,
}

FAMILY_SIDE: Dict[BuiltinFamily, str] = {
    BuiltinFamily.LUROTH: 'both',
    BuiltinFamily.MODIFIED_ENGEL: 'positive',
    BuiltinFamily.ALTERNATING_ENGEL: 'alternating',
    BuiltinFamily.PIERCE: 'alternating',
    BuiltinFamily.ALTERNATING_SYLVESTER: 'alternating',
}


@dataclass(frozen=True)
class BuiltinRule:
    family: BuiltinFamily


@dataclass(frozen=True)
class ExprRule:
    tree: Node


@dataclass(frozen=True, eq=False)
class PhiProgram:
    """phi0 plus a rule for phi_n, n >= 1.

    Two programs are equal when phi0 and the rule's syntax tree agree, so a
    built-in family equals the parsed text of its rule.
    """
    phi0: int
    rule: Union[BuiltinRule, ExprRule]
    source_text: str
    _tree: Node = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        if isinstance(self.phi0, bool) or not isinstance(self.phi0, int) or self.phi0 < 1:
            raise ValidationError(f"phi0 must be a positive integer, got {self.phi0!r}")
        if self._tree is None:
            tree = (self.rule.tree if isinstance(self.rule, ExprRule)
                    else parse_expression(_FAMILY_TEXT[self.rule.family]))
            object.__setattr__(self, '_tree', tree)

    @property
    def tree(self) -> Node:
        return self._tree

    @property
    def family(self) -> Optional[BuiltinFamily]:
        return self.rule.family if isinstance(self.rule, BuiltinRule) else None

    @property
    def label(self) -> str:
        if self.family is not None:
            return self.family.value
        return f"phi0={self.phi0};phi={self.source_text}"

    def __eq__(self, other) -> bool:
        if not isinstance(other, PhiProgram):
            return NotImplemented
        return self.phi0 == other.phi0 and self.tree == other.tree

    def __hash__(self) -> int:
        return hash((self.phi0, self.tree))

    def matching_families(self) -> List[BuiltinFamily]:
        return [family for family in BuiltinFamily if builtin_family(family.value) == self]

    def constant_value(self) -> Optional[int]:
        return self.tree.value if isinstance(self.tree, Num) else None

    def depends_on_last_digit_only(self) -> bool:
        """True when phi_n reads nothing but x(n), so the next r-value is a
        function of the last digit alone."""
        return not _mentions_bare_index(self.tree)

    def evaluate(self, n: int, prefix) -> int:
        return eval_phi(self, n, prefix)

    def to_dict(self) -> dict:
        return {
            'phi0': self.phi0,
            'phi': self.source_text,
            'family': self.family.value if self.family is not None else None,
        }


def eval_phi(program: PhiProgram, n: int, prefix) -> int:
    """
    Evaluate r_n = phi_n(x_1, ..., x_n).

    Args:
        program (PhiProgram): The function sequence
        n (int): Index, n >= 0; n = 0 returns phi0
        prefix: Digit sequence (a DigitSeq or any integer sequence) with at
            least n digits

    Returns:
        int: r_n >= 1

    Raises:
        NonPositivePhi: phi_n evaluates below 1
        IndexOutOfRange: the rule reads x(e) with e outside 1..n, or the
            prefix holds fewer than n digits
    """
    if n == 0:
        return program.phi0
    digits = getattr(prefix, 'digits', prefix)
    if n < 0 or len(digits) < n:
        raise IndexOutOfRange(f"phi_{n} needs {n} digits, prefix has {len(digits)}")

    if program.family is not None:
        value = _FAMILY_RULE[program.family](digits[n - 1])
    else:
        value = _evaluate(program.tree, n, digits)
    if value < 1:
        raise NonPositivePhi(n, digits[:n], value)
    return value


# ============================================================================
# CONSTRUCTORS
# ============================================================================
def parse_phi_spec(text: str, phi0: int = 1) -> PhiProgram:
    """Parse a rule written in the expression language into a program."""
    tree = parse_expression(text)
    canonical = format_expression(tree)
    logger.debug(f"Parsed phi rule {text!r} as {canonical!r}")
    return PhiProgram(phi0=phi0, rule=ExprRule(tree), source_text=canonical, _tree=tree)


def builtin_family(name) -> PhiProgram:
    key = name.value if isinstance(name, BuiltinFamily) else str(name).strip().lower().replace('_', '-')
    try:
        family = BuiltinFamily(key)
    except ValueError:
        catalog = ', '.join(f.value for f in BuiltinFamily)
        raise UnknownFamily(f"unknown family {name!r}; known families: {catalog}")
    return PhiProgram(phi0=1, rule=BuiltinRule(family), source_text=_FAMILY_TEXT[family])


def family_catalog() -> List[dict]:
    return [
        {
            'name': family.value,
            'phi0': 1,
            'phi': _FAMILY_TEXT[family],
            'natural_side': FAMILY_SIDE[family],
        }
        for family in BuiltinFamily
    ]


def load_program(family: Optional[str] = None, phi: Optional[str] = None,
                 phi0: Optional[int] = None) -> PhiProgram:
    """Build a program from exactly one of a family name or a phi expression."""
    if (family is None) == (phi is None):
        raise ValidationError("give exactly one of a family name or a phi expression")
    if family is not None:
        if phi0 not in (None, 1):
            raise ValidationError("built-in families fix phi0 = 1")
        return builtin_family(family)
    return parse_phi_spec(phi, 1 if phi0 is None else phi0)
