"""A small expression language for defining finitary gambles.

Grammar (EBNF, left-associative operators)::

    expression  = term { ("+" | "-") term } ;
    term        = factor { "*" factor } ;
    factor      = number
                | "ind" "(" bool ")"
                | ("min" | "max") "(" expression "," expression ")"
                | "sum" "(" ident "=" int ".." int "," expression ")"
                | "(" expression ")" ;
    bool        = bool_and { "||" bool_and } ;
    bool_and    = bool_not { "&&" bool_not } ;
    bool_not    = "!" bool_not | bool_atom ;
    bool_atom   = "X" "[" index "]" "==" label | "(" bool ")" ;
    index       = int | ident ;            (* ident must be a bound sum variable *)

State indices are 1-based: ``X[1]`` is the first state of the path.  The
depth of an expression is the largest index it can reference (sum variables
count with the upper end of their range), so compiled gambles are exactly
n-measurable for that n.

Example: ``sum(i=1..3, ind(X[i]==H))`` counts heads among the first three
states of a coin process.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ExprError, ResourceLimitError
from .gambles import DEFAULT_TABLE_CAP, FinitaryGamble
from .local import StateSpace

_TOKEN_RE = re.compile(
    r"""
    (?P<number>\d+(\.\d+)?([eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>\.\.|==|&&|\|\||[-+*=(),!\[\]])
  | (?P<ws>[ \t]+)
  | (?P<newline>\n)
  | (?P<bad>.)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # 'number' | 'name' | 'op' | 'end'
    text: str
    line: int
    column: int


def _tokenize(source: str) -> list[Token]:
    tokens = []
    line, col = 1, 1
    for match in _TOKEN_RE.finditer(source):
        kind = match.lastgroup
        text = match.group()
        if kind == "ws":
            col += len(text)
            continue
        if kind == "newline":
            line += 1
            col = 1
            continue
        if kind == "bad":
            raise ExprError(f"unexpected character {text!r}", line, col)
        tokens.append(Token(kind, text, line, col))
        col += len(text)
    tokens.append(Token("end", "", line, col))
    return tokens


# --- abstract syntax ---------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Add:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Sub:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Mul:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class MinOf:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class MaxOf:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Ind:
    condition: "BoolExpr"


@dataclass(frozen=True)
class SumOver:
    var: str
    lo: int
    hi: int
    body: "Expr"


@dataclass(frozen=True)
class StateIs:
    index: Union[int, str]  # literal position or bound sum variable
    state: int  # resolved state index


@dataclass(frozen=True)
class BoolAnd:
    left: "BoolExpr"
    right: "BoolExpr"


@dataclass(frozen=True)
class BoolOr:
    left: "BoolExpr"
    right: "BoolExpr"


@dataclass(frozen=True)
class BoolNot:
    inner: "BoolExpr"


Expr = Union[Num, Add, Sub, Mul, MinOf, MaxOf, Ind, SumOver]
BoolExpr = Union[StateIs, BoolAnd, BoolOr, BoolNot]


@dataclass(frozen=True)
class GambleExpr:
    """A parsed expression with its state space and inferred depth."""

    root: Expr
    space: StateSpace
    depth: int


class _Parser:
    def __init__(self, tokens: list[Token], space: StateSpace):
        self.tokens = tokens
        self.pos = 0
        self.space = space
        self.bound: dict[str, tuple[int, int]] = {}  # sum var -> (lo, hi)
        self.max_index = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, message: str, tok: Token | None = None):
        tok = tok or self.peek()
        raise ExprError(message, tok.line, tok.column)

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if tok.text != text:
            got = tok.text or "end of input"
            self.fail(f"expected {text!r}, found {got!r}")
        return self.advance()

    def parse(self) -> Expr:
        expr = self.expression()
        if self.peek().kind != "end":
            self.fail(f"unexpected trailing input {self.peek().text!r}")
        return expr

    def expression(self) -> Expr:
        node = self.term()
        while self.peek().text in ("+", "-"):
            op = self.advance().text
            rhs = self.term()
            node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self.peek().text == "*":
            self.advance()
            node = Mul(node, self.factor())
        return node

    def factor(self) -> Expr:
        tok = self.peek()
        if tok.kind == "number":
            self.advance()
            return Num(float(tok.text))
        if tok.text == "(":
            self.advance()
            node = self.expression()
            self.expect(")")
            return node
        if tok.text == "-":
            # Unary minus as 0 - factor keeps the grammar tiny.
            self.advance()
            return Sub(Num(0.0), self.factor())
        if tok.kind == "name":
            if tok.text == "ind":
                self.advance()
                self.expect("(")
                cond = self.bool_or()
                self.expect(")")
                return Ind(cond)
            if tok.text in ("min", "max"):
                self.advance()
                self.expect("(")
                a = self.expression()
                self.expect(",")
                b = self.expression()
                self.expect(")")
                return MinOf(a, b) if tok.text == "min" else MaxOf(a, b)
            if tok.text == "sum":
                return self.sum_over()
        self.fail(f"expected a factor, found {tok.text or 'end of input'!r}", tok)

    def sum_over(self) -> Expr:
        self.expect("sum")
        self.expect("(")
        var_tok = self.peek()
        if var_tok.kind != "name":
            self.fail("expected a sum variable name")
        var = self.advance().text
        if var in self.bound:
            self.fail(f"sum variable {var!r} shadows an enclosing one", var_tok)
        self.expect("=")
        lo = self.int_literal()
        self.expect("..")
        hi = self.int_literal()
        if lo <= 0:
            self.fail(f"state positions are 1-based; sum starts at {lo}", var_tok)
        if hi < lo:
            self.fail(f"empty sum range {lo}..{hi}", var_tok)
        self.expect(",")
        self.bound[var] = (lo, hi)
        self.max_index = max(self.max_index, hi)
        body = self.expression()
        del self.bound[var]
        self.expect(")")
        return SumOver(var, lo, hi, body)

    def int_literal(self) -> int:
        tok = self.peek()
        if tok.kind != "number" or not tok.text.isdigit():
            self.fail("expected an integer")
        self.advance()
        return int(tok.text)

    def bool_or(self) -> BoolExpr:
        node = self.bool_and()
        while self.peek().text == "||":
            self.advance()
            node = BoolOr(node, self.bool_and())
        return node

    def bool_and(self) -> BoolExpr:
        node = self.bool_not()
        while self.peek().text == "&&":
            self.advance()
            node = BoolAnd(node, self.bool_not())
        return node

    def bool_not(self) -> BoolExpr:
        if self.peek().text == "!":
            self.advance()
            return BoolNot(self.bool_not())
        return self.bool_atom()

    def bool_atom(self) -> BoolExpr:
        tok = self.peek()
        if tok.text == "(":
            self.advance()
            node = self.bool_or()
            self.expect(")")
            return node
        if tok.text != "X":
            self.fail(f"expected a state test, found {tok.text or 'end of input'!r}", tok)
        self.advance()
        self.expect("[")
        idx_tok = self.peek()
        if idx_tok.kind == "number":
            self.advance()
            if not idx_tok.text.isdigit():
                self.fail("state position must be an integer", idx_tok)
            index: Union[int, str] = int(idx_tok.text)
            if index <= 0:
                self.fail(f"state positions are 1-based, got {index}", idx_tok)
            self.max_index = max(self.max_index, index)
        elif idx_tok.kind == "name":
            self.advance()
            if idx_tok.text not in self.bound:
                self.fail(f"unbound index variable {idx_tok.text!r}", idx_tok)
            index = idx_tok.text
        else:
            self.fail("expected a state position", idx_tok)
        self.expect("]")
        self.expect("==")
        label_tok = self.peek()
        if label_tok.kind != "name":
            self.fail("expected a state label", label_tok)
        self.advance()
        if label_tok.text not in self.space.labels:
            self.fail(
                f"unknown state label {label_tok.text!r}; states are {list(self.space.labels)}",
                label_tok,
            )
        return StateIs(index, self.space.index(label_tok.text))


def parse_gamble(source: str, space: StateSpace) -> GambleExpr:
    """Parse ``source`` into an expression over ``space``.

    Raises :class:`~iptree.errors.ExprError` with line/column on syntax
    errors, unknown labels, non-positive positions, and unbound variables.
    """
    parser = _Parser(_tokenize(source), space)
    root = parser.parse()
    return GambleExpr(root, space, parser.max_index)


def compile_gamble(
    expr: GambleExpr, depth: int | None = None, cap: int = DEFAULT_TABLE_CAP
) -> FinitaryGamble:
    """Tabulate an expression into a dense finitary gamble.

    ``depth`` may lift the gamble beyond its inferred depth (never below).
    The dense table of ``k**depth`` payoffs is subject to ``cap``.
    """
    n = expr.depth if depth is None else depth
    if n < expr.depth:
        raise ExprError(
            f"depth override {n} is below the inferred depth {expr.depth}", 1, 1
        )
    k = expr.space.size
    cells = k**n
    if cells > cap:
        raise ResourceLimitError(f"table would need {cells} cells, cap is {cap}")

    shape = (k,) * n

    def eval_num(node: Expr, env: dict[str, int]) -> np.ndarray:
        if isinstance(node, Num):
            return np.broadcast_to(np.float64(node.value), shape)
        if isinstance(node, Add):
            return eval_num(node.left, env) + eval_num(node.right, env)
        if isinstance(node, Sub):
            return eval_num(node.left, env) - eval_num(node.right, env)
        if isinstance(node, Mul):
            return eval_num(node.left, env) * eval_num(node.right, env)
        if isinstance(node, MinOf):
            return np.minimum(eval_num(node.left, env), eval_num(node.right, env))
        if isinstance(node, MaxOf):
            return np.maximum(eval_num(node.left, env), eval_num(node.right, env))
        if isinstance(node, Ind):
            return eval_bool(node.condition, env).astype(float)
        if isinstance(node, SumOver):
            total = np.zeros(shape)
            for i in range(node.lo, node.hi + 1):
                total = total + eval_num(node.body, {**env, node.var: i})
            return total
        raise TypeError(f"unknown node {node!r}")

    def eval_bool(node: BoolExpr, env: dict[str, int]) -> np.ndarray:
        if isinstance(node, StateIs):
            pos = env[node.index] if isinstance(node.index, str) else node.index
            axis_shape = [1] * n
            axis_shape[pos - 1] = k
            mask = (np.arange(k) == node.state).reshape(axis_shape)
            return np.broadcast_to(mask, shape)
        if isinstance(node, BoolAnd):
            return eval_bool(node.left, env) & eval_bool(node.right, env)
        if isinstance(node, BoolOr):
            return eval_bool(node.left, env) | eval_bool(node.right, env)
        if isinstance(node, BoolNot):
            return ~eval_bool(node.inner, env)
        raise TypeError(f"unknown node {node!r}")

    table = np.array(eval_num(expr.root, {}), dtype=float).reshape(shape)
    return FinitaryGamble(k, table)


def unparse(expr: GambleExpr) -> str:
    """Render an expression back to source the parser accepts."""

    def num(node: Expr) -> str:
        if isinstance(node, Num):
            return repr(node.value)
        if isinstance(node, Add):
            return f"({num(node.left)} + {num(node.right)})"
        if isinstance(node, Sub):
            return f"({num(node.left)} - {num(node.right)})"
        if isinstance(node, Mul):
            return f"({num(node.left)} * {num(node.right)})"
        if isinstance(node, MinOf):
            return f"min({num(node.left)}, {num(node.right)})"
        if isinstance(node, MaxOf):
            return f"max({num(node.left)}, {num(node.right)})"
        if isinstance(node, Ind):
            return f"ind({boolean(node.condition)})"
        if isinstance(node, SumOver):
            return f"sum({node.var}={node.lo}..{node.hi}, {num(node.body)})"
        raise TypeError(f"unknown node {node!r}")

    def boolean(node: BoolExpr) -> str:
        if isinstance(node, StateIs):
            pos = node.index if isinstance(node.index, str) else str(node.index)
            return f"X[{pos}] == {expr.space.labels[node.state]}"
        if isinstance(node, BoolAnd):
            return f"({boolean(node.left)} && {boolean(node.right)})"
        if isinstance(node, BoolOr):
            return f"({boolean(node.left)} || {boolean(node.right)})"
        if isinstance(node, BoolNot):
            return f"!({boolean(node.inner)})"
        raise TypeError(f"unknown node {node!r}")

    return num(expr.root)


def alpha_canonical(expr: GambleExpr) -> Expr:
    """The AST with sum variables renamed to positional names.

    Two expressions are alpha-equivalent exactly when their canonical forms
    are equal.
    """

    def walk(node, env: dict[str, str], counter: list[int]):
        if isinstance(node, Num):
            return node
        if isinstance(node, (Add, Sub, Mul, MinOf, MaxOf)):
            return type(node)(
                walk(node.left, env, counter), walk(node.right, env, counter)
            )
        if isinstance(node, Ind):
            return Ind(walk(node.condition, env, counter))
        if isinstance(node, SumOver):
            fresh = f"_{counter[0]}"
            counter[0] += 1
            body = walk(node.body, {**env, node.var: fresh}, counter)
            return SumOver(fresh, node.lo, node.hi, body)
        if isinstance(node, StateIs):
            idx = env[node.index] if isinstance(node.index, str) else node.index
            return StateIs(idx, node.state)
        if isinstance(node, (BoolAnd, BoolOr)):
            return type(node)(
                walk(node.left, env, counter), walk(node.right, env, counter)
            )
        if isinstance(node, BoolNot):
            return BoolNot(walk(node.inner, env, counter))
        raise TypeError(f"unknown node {node!r}")

    return walk(expr.root, {}, [0])
