"""Parser/evaluator for scalar functions of one variable.

Used for the time-varying delay and for per-coordinate initial functions,
both of which arrive as text in scenario configs.  The grammar is fixed:

    expr   := term (("+"|"-") term)*
    term   := factor (("*"|"/") factor)*
    factor := "-" factor | base ("^" number)?
    base   := number | ident | "(" expr ")" | func "(" expr ")"
    func   := "sin" | "cos" | "exp" | "ln" | "abs"

`pi` and `e` are reserved constants; the single free variable name is chosen
by the caller.  Exponents must be numeric literals, so evaluation stays
real-valued.  Operators are left-associative with the usual precedence
(power > unary minus > mul/div > add/sub); whitespace is ignored.

Parsed expressions are immutable and safe to evaluate concurrently.  Each
expression also carries a flat postfix program (`ops`/`args`/`consts`
arrays) consumed by the integration kernels, so the hot loops never walk
the tree.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ExprEvalError, ExprSyntaxError

FUNCS = ("sin", "cos", "exp", "ln", "abs")
CONSTANTS = {"pi": math.pi, "e": math.e}

# Postfix opcodes shared with the kernels (_kernel.pyx / _kernel_py.py).
OP_CONST = 0   # push consts[arg]
OP_VAR = 1     # push the free variable
OP_ADD = 2
OP_SUB = 3
OP_MUL = 4
OP_DIV = 5
OP_NEG = 6
OP_POW = 7     # exponent is consts[arg]
OP_SIN = 8
OP_COS = 9
OP_EXP = 10
OP_LN = 11
OP_ABS = 12

_FUNC_OPS = {"sin": OP_SIN, "cos": OP_COS, "exp": OP_EXP, "ln": OP_LN, "abs": OP_ABS}
_FUNC_EVAL = {"sin": math.sin, "cos": math.cos, "exp": math.exp}


# --- AST nodes ---

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    name: str
    value: float


@dataclass(frozen=True)
class Bin:
    op: str  # one of + - * /
    left: object
    right: object


@dataclass(frozen=True)
class Neg:
    child: object


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: float


@dataclass(frozen=True)
class Call:
    func: str
    arg: object


class _Tokenizer:
    def __init__(self, src):
        self.src = src
        self.pos = 0
        self.tokens = []
        self._scan()
        self.idx = 0

    def _scan(self):
        s, i, n = self.src, 0, len(self.src)
        while i < n:
            c = s[i]
            if c.isspace():
                i += 1
                continue
            if c in "+-*/^()":
                self.tokens.append((c, c, i))
                i += 1
                continue
            if c.isdigit() or c == ".":
                j = i
                while j < n and (s[j].isdigit() or s[j] == "."):
                    j += 1
                if j < n and s[j] in "eE":
                    k = j + 1
                    if k < n and s[k] in "+-":
                        k += 1
                    if k < n and s[k].isdigit():
                        j = k
                        while j < n and s[j].isdigit():
                            j += 1
                try:
                    value = float(s[i:j])
                except ValueError:
                    raise ExprSyntaxError(f"malformed number '{s[i:j]}'", i) from None
                self.tokens.append(("num", value, i))
                i = j
                continue
            if c.isalpha() or c == "_":
                j = i
                while j < n and (s[j].isalnum() or s[j] == "_"):
                    j += 1
                self.tokens.append(("ident", s[i:j], i))
                i = j
                continue
            raise ExprSyntaxError(f"unexpected character '{c}'", i)
        self.tokens.append(("end", None, n))

    def peek(self):
        return self.tokens[self.idx]

    def advance(self):
        tok = self.tokens[self.idx]
        self.idx += 1
        return tok


class _Parser:
    def __init__(self, src, var_name):
        self.toks = _Tokenizer(src)
        self.var_name = var_name

    def parse(self):
        node = self.expr()
        kind, _, pos = self.toks.peek()
        if kind != "end":
            raise ExprSyntaxError("unexpected trailing input", pos)
        return node

    def expr(self):
        node = self.term()
        while self.toks.peek()[0] in "+-":
            op = self.toks.advance()[0]
            node = Bin(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.toks.peek()[0] in "*/":
            op = self.toks.advance()[0]
            node = Bin(op, node, self.factor())
        return node

    def factor(self):
        if self.toks.peek()[0] == "-":
            self.toks.advance()
            return Neg(self.factor())
        node = self.base()
        if self.toks.peek()[0] == "^":
            self.toks.advance()
            kind, value, pos = self.toks.advance()
            if kind != "num":
                raise ExprSyntaxError("exponent must be a numeric literal", pos)
            node = Pow(node, value)
        return node

    def base(self):
        kind, value, pos = self.toks.advance()
        if kind == "num":
            return Num(value)
        if kind == "(":
            node = self.expr()
            return self._expect_close(node)
        if kind == "ident":
            if value in FUNCS:
                k2, _, p2 = self.toks.advance()
                if k2 != "(":
                    raise ExprSyntaxError(f"'{value}' must be called as {value}(...)", p2)
                node = Call(value, self.expr())
                self._expect_close(None)
                return node
            if value == self.var_name:
                return Var(value)
            if value in CONSTANTS:
                return Const(value, CONSTANTS[value])
            raise ExprSyntaxError(f"unknown identifier '{value}'", pos)
        raise ExprSyntaxError("expected a number, identifier or '('", pos)

    def _expect_close(self, node):
        kind, _, pos = self.toks.advance()
        if kind != ")":
            raise ExprSyntaxError("expected ')'", pos)
        return node


# --- evaluation / printing ---

def _eval_node(node, x):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return x
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Neg):
        return -_eval_node(node.child, x)
    if isinstance(node, Bin):
        a = _eval_node(node.left, x)
        b = _eval_node(node.right, x)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if b == 0.0:
            raise ExprEvalError("division by zero", _print_node(node))
        return a / b
    if isinstance(node, Pow):
        base = _eval_node(node.base, x)
        try:
            v = math.pow(base, node.exponent)
        except (ValueError, OverflowError):
            raise ExprEvalError("invalid power", _print_node(node)) from None
        return _finite_or_raise(v, node)
    if isinstance(node, Call):
        v = _eval_node(node.arg, x)
        if node.func == "ln":
            if v <= 0.0:
                raise ExprEvalError("log of non-positive value", _print_node(node))
            return math.log(v)
        if node.func == "abs":
            return abs(v)
        try:
            return _finite_or_raise(_FUNC_EVAL[node.func](v), node)
        except OverflowError:
            raise ExprEvalError("overflow", _print_node(node)) from None
    raise TypeError(f"unknown node {node!r}")


def _finite_or_raise(v, node):
    if not math.isfinite(v):
        raise ExprEvalError("overflow", _print_node(node))
    return v


# Precedence levels for parenthesis-minimal printing.
_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _node_prec(node):
    if isinstance(node, Bin):
        return _PREC_ADD if node.op in "+-" else _PREC_MUL
    if isinstance(node, Neg):
        return _PREC_NEG
    if isinstance(node, Pow):
        return _PREC_POW
    if isinstance(node, Num) and node.value < 0:
        return _PREC_NEG  # prints with a leading minus, binds like unary minus
    return _PREC_ATOM


def _print_node(node, parent_prec=0, right_side=False):
    prec = _node_prec(node)
    if isinstance(node, Num):
        text = repr(node.value)
    elif isinstance(node, (Var, Const)):
        text = node.name
    elif isinstance(node, Neg):
        text = "-" + _print_node(node.child, _PREC_NEG)
    elif isinstance(node, Bin):
        # left-associative: the right operand needs strictly higher precedence
        text = (
            _print_node(node.left, prec)
            + f" {node.op} "
            + _print_node(node.right, prec, right_side=True)
        )
    elif isinstance(node, Pow):
        text = _print_node(node.base, _PREC_ATOM) + "^" + repr(node.exponent)
    elif isinstance(node, Call):
        return f"{node.func}({_print_node(node.arg)})"
    else:
        raise TypeError(f"unknown node {node!r}")
    if prec < parent_prec or (right_side and prec == parent_prec):
        return f"({text})"
    return text


def _compile_node(node, ops, args, consts):
    if isinstance(node, (Num, Const)):
        ops.append(OP_CONST)
        args.append(len(consts))
        consts.append(node.value)
    elif isinstance(node, Var):
        ops.append(OP_VAR)
        args.append(-1)
    elif isinstance(node, Neg):
        _compile_node(node.child, ops, args, consts)
        ops.append(OP_NEG)
        args.append(-1)
    elif isinstance(node, Bin):
        _compile_node(node.left, ops, args, consts)
        _compile_node(node.right, ops, args, consts)
        ops.append({"+": OP_ADD, "-": OP_SUB, "*": OP_MUL, "/": OP_DIV}[node.op])
        args.append(-1)
    elif isinstance(node, Pow):
        _compile_node(node.base, ops, args, consts)
        ops.append(OP_POW)
        args.append(len(consts))
        consts.append(node.exponent)
    elif isinstance(node, Call):
        _compile_node(node.arg, ops, args, consts)
        ops.append(_FUNC_OPS[node.func])
        args.append(-1)
    else:
        raise TypeError(f"unknown node {node!r}")


class ScalarExpr:
    """An immutable parsed expression of one variable.

    Evaluation is plain IEEE-double arithmetic over the tree.  The compiled
    postfix program (`ops`, `args`, `consts`) performs the identical
    operation sequence and is what the integration kernels execute.
    """

    __slots__ = ("root", "var_name", "source", "ops", "args", "consts")

    def __init__(self, root, var_name, source=None):
        self.root = root
        self.var_name = var_name
        self.source = source if source is not None else _print_node(root)
        ops, args, consts = [], [], []
        _compile_node(root, ops, args, consts)
        self.ops = np.asarray(ops, dtype=np.int32)
        self.args = np.asarray(args, dtype=np.int32)
        self.consts = np.asarray(consts if consts else [0.0], dtype=np.float64)

    def __call__(self, x):
        return _eval_node(self.root, float(x))

    def to_text(self):
        """Render back to parseable text (minimal parentheses)."""
        return _print_node(self.root)

    def __repr__(self):
        return f"ScalarExpr({self.to_text()!r}, var={self.var_name!r})"


def parse_expr(src, var_name):
    """Parse `src` into a ScalarExpr whose free variable is `var_name`."""
    if not src or not src.strip():
        raise ExprSyntaxError("empty expression", 0)
    if not var_name.isidentifier():
        raise ValueError(f"variable name {var_name!r} is not a valid identifier")
    if var_name in FUNCS or var_name in CONSTANTS:
        raise ValueError(f"variable name {var_name!r} shadows a reserved name")
    root = _Parser(src, var_name).parse()
    return ScalarExpr(root, var_name, source=src)


def eval_expr(e, x):
    """Evaluate a ScalarExpr at a finite real point."""
    if not math.isfinite(x):
        raise ValueError(f"evaluation point must be finite, got {x}")
    return e(x)
