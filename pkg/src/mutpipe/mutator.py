"""Statement-level parsing of C-like source and first-order mutant generation.

The parser is deliberately pragmatic: it tokenizes preprocessed C-like code,
splits it into statements, classifies them, and records which statements fall
inside which function body. Constructs it cannot classify become
``kind="other"`` and only receive statement-deletion mutants. Full grammar
fidelity is not a goal; uncompilable mutants are caught downstream by the
build stage.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, replace

# Closed operator catalog. Order here fixes the generation order.
OPERATOR_IDS = (
    "ABS", "AOR", "ICR", "LCR", "ROR", "SDL", "UOI",
    "AOD", "LOD", "ROD", "BOD", "SOD", "LVR",
)

MUTANT_STATUSES = (
    "generated", "compiled", "compile-failed", "trivially-equivalent",
    "trivially-duplicate", "sampled", "killed", "live",
    "discarded-equivalent", "discarded-duplicate",
)

STATEMENT_KINDS = (
    "assignment", "call", "return", "condition", "declaration", "other",
)

_TOKEN_RE = re.compile(
    r"""
    (?P<comment>//[^\n]*|/\*.*?\*/)
  | (?P<pp>\#[^\n]*(?:\\\n[^\n]*)*)
  | (?P<string>"(?:\\.|[^"\\\n])*"|'(?:\\.|[^'\\\n])*')
  | (?P<float>(?:\d+\.\d*|\.\d+)(?:[eE][+-]?\d+)?[fFlL]?|\d+[eE][+-]?\d+[fFlL]?)
  | (?P<int>0[xX][0-9a-fA-F]+[uUlL]*|\d+[uUlL]*)
  | (?P<ident>[A-Za-z_]\w*)
  | (?P<op><<=|>>=|<<|>>|<=|>=|==|!=|&&|\|\||\+\+|--|->|[-+*/%&|^]=|[-+*/%<>=!&|^~?:;,.{}()\[\]])
  | (?P<ws>\s+)
    """,
    re.S | re.X,
)

_CONTROL_KEYWORDS = {"if", "while", "for", "switch"}
_NONVALUE_KEYWORDS = {
    "if", "else", "while", "for", "do", "switch", "case", "default",
    "return", "break", "continue", "goto", "sizeof", "struct", "union",
    "enum", "typedef", "static", "const", "extern", "volatile", "register",
    "unsigned", "signed", "void", "int", "char", "short", "long", "float",
    "double", "inline",
}
_TYPE_KEYWORDS = {
    "void", "int", "char", "short", "long", "float", "double", "unsigned",
    "signed", "const", "static", "extern", "volatile", "register", "struct",
    "union", "enum", "inline", "bool", "size_t", "int8_t", "int16_t",
    "int32_t", "int64_t", "uint8_t", "uint16_t", "uint32_t", "uint64_t",
}

_RELATIONAL = ("<", "<=", ">", ">=", "==", "!=")
_ARITHMETIC = ("+", "-", "*", "/", "%")
_LOGICAL = ("&&", "||")
_BITWISE = ("&", "|", "^")
_SHIFT = ("<<", ">>")
_ASSIGN_OPS = {"=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>="}


class ParseError(Exception):
    """Source could not be tokenized/split; carries file and line."""

    def __init__(self, path: str, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line


class StaleMutantError(Exception):
    """Mutant's recorded original fragment no longer matches the source."""


@dataclass(frozen=True)
class Token:
    kind: str  # ident | int | float | string | op
    text: str
    offset: int  # absolute char offset in file text
    line: int  # 1-based

    @property
    def end(self) -> int:
        return self.offset + len(self.text)


@dataclass(frozen=True)
class Statement:
    id: int
    line_span: tuple[int, int]
    tokens: tuple[Token, ...]
    kind: str
    span: tuple[int, int]  # absolute char span [start, end)


@dataclass(frozen=True)
class SourceUnit:
    path: str
    text: str
    statements: tuple[Statement, ...]
    functions: tuple[tuple[str, tuple[int, int]], ...]  # (name, [first, last] stmt ids)

    def function_of(self, statement_id: int) -> str | None:
        for name, (lo, hi) in self.functions:
            if lo <= statement_id <= hi:
                return name
        return None


@dataclass
class Mutant:
    id: str
    operator: str
    file: str
    statement_id: int
    span: tuple[int, int]  # char span of the replaced fragment
    original: str
    mutated: str
    status: str = "generated"
    function: str | None = None
    line_span: tuple[int, int] = (0, 0)

    def __post_init__(self):
        if self.operator not in OPERATOR_IDS:
            raise ValueError(f"unknown operator {self.operator!r}")
        if self.original == self.mutated:
            raise ValueError("mutant must change the text")


def tokenize(text: str, path: str = "<memory>") -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    line = 1
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(path, line, f"unrecognized character {text[pos]!r}")
        kind = m.lastgroup
        value = m.group()
        if kind not in ("ws", "comment", "pp"):
            tokens.append(Token(kind, value, pos, line))
        line += value.count("\n")
        pos = m.end()
    return tokens


def parse_unit(text: str, path: str) -> SourceUnit:
    """Parse C-like source into an ordered statement model.

    Statements are split on top-level ``;`` and control-structure headers;
    function bodies are tracked so each statement can be attributed to at
    most one function.
    """
    tokens = tokenize(text, path)
    statements: list[Statement] = []
    functions: list[tuple[str, tuple[int, int]]] = []

    n = len(tokens)
    i = 0
    brace_depth = 0
    # stack of (name, first_stmt_id, entry_brace_depth) for open functions
    func_stack: list[tuple[str, int, int]] = []

    def flush(start_i: int, end_i: int, kind: str) -> None:
        toks = tuple(tokens[start_i:end_i])
        if not toks:
            return
        statements.append(
            Statement(
                id=len(statements),
                line_span=(toks[0].line, toks[-1].line),
                tokens=toks,
                kind=kind,
                span=(toks[0].offset, toks[-1].end),
            )
        )

    def classify(start_i: int, end_i: int) -> str:
        toks = tokens[start_i:end_i]
        if not toks:
            return "other"
        first = toks[0]
        if first.text == "return":
            return "return"
        body = toks[:-1] if toks[-1].text == ";" else toks
        depth = 0
        has_assign = False
        for t in body:
            if t.text in "([":
                depth += 1
            elif t.text in ")]":
                depth -= 1
            elif depth == 0 and t.kind == "op" and t.text in _ASSIGN_OPS:
                has_assign = True
                break
        is_decl = first.kind == "ident" and (
            first.text in _TYPE_KEYWORDS
            or (
                len(body) >= 2
                and body[1].kind == "ident"
                and first.text not in _NONVALUE_KEYWORDS
            )
        )
        # "ident ident" openings are declarations with unknown typedef names;
        # "ident (" openings are calls.
        if is_decl and not (len(body) >= 2 and body[1].text == "("):
            return "declaration"
        if has_assign:
            return "assignment"
        if (
            first.kind == "ident"
            and first.text not in _NONVALUE_KEYWORDS
            and len(body) >= 2
            and body[1].text == "("
        ):
            return "call"
        return "other"

    while i < n:
        t = tokens[i]
        if t.text == "{":
            brace_depth += 1
            i += 1
            continue
        if t.text == "}":
            brace_depth -= 1
            if func_stack and brace_depth == func_stack[-1][2]:
                name, first_id, _ = func_stack.pop()
                if len(statements) > first_id:
                    functions.append((name, (first_id, len(statements) - 1)))
            i += 1
            continue
        if t.kind == "ident" and t.text in _CONTROL_KEYWORDS:
            # header: keyword ( ... )
            j = i + 1
            if j < n and tokens[j].text == "(":
                depth = 0
                while j < n:
                    if tokens[j].text == "(":
                        depth += 1
                    elif tokens[j].text == ")":
                        depth -= 1
                        if depth == 0:
                            break
                    j += 1
                if depth != 0:
                    raise ParseError(path, t.line, "unbalanced parentheses in header")
                kind = "condition" if t.text != "switch" else "other"
                flush(i, j + 1, kind)
                i = j + 1
                continue
            flush(i, i + 1, "other")
            i = i + 1
            continue
        if t.kind == "ident" and t.text in ("else", "do"):
            i += 1
            continue
        if t.kind == "ident" and t.text in ("case", "default"):
            j = i
            while j < n and tokens[j].text != ":":
                j += 1
            flush(i, min(j + 1, n), "other")
            i = min(j + 1, n)
            continue
        # generic run up to ';' at paren depth 0, or a '{' (function head)
        j = i
        depth = 0
        is_func_head = False
        while j < n:
            tj = tokens[j]
            if tj.text in "([":
                depth += 1
            elif tj.text in ")]":
                depth -= 1
            elif depth == 0 and tj.text == ";":
                break
            elif depth == 0 and tj.text in "{}":
                is_func_head = tj.text == "{"
                break
            j += 1
        if is_func_head:
            # pattern: ... name ( params ) {  -> function definition
            name = None
            k = j - 1
            if k >= 0 and tokens[k].text == ")":
                depth2 = 0
                while k >= i:
                    if tokens[k].text == ")":
                        depth2 += 1
                    elif tokens[k].text == "(":
                        depth2 -= 1
                        if depth2 == 0:
                            break
                    k -= 1
                if k - 1 >= i and tokens[k - 1].kind == "ident":
                    name = tokens[k - 1].text
            if name is not None:
                func_stack.append((name, len(statements), brace_depth))
                i = j  # leave '{' for the depth tracker
                continue
            # struct/enum body or initializer block: treat head as other
            flush(i, j, "other")
            i = j
            continue
        end = min(j + 1, n)
        flush(i, end, classify(i, end))
        i = end

    return SourceUnit(path=path, text=text, statements=tuple(statements),
                      functions=tuple(functions))


# ---------------------------------------------------------------------------
# Operator implementations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Edit:
    span: tuple[int, int]
    original: str
    mutated: str


def _is_value_end(tok: Token) -> bool:
    return tok.kind in ("ident", "int", "float", "string") or tok.text in (")", "]")


def _is_binary_at(toks: tuple[Token, ...], idx: int) -> bool:
    return idx > 0 and _is_value_end(toks[idx - 1])


def _expression_region(stmt: Statement) -> tuple[int, int]:
    """Index range (into stmt.tokens) holding the statement's rvalue
    expression: rhs of an assignment, condition inside parens, return value,
    call arguments, or declaration initializer."""
    toks = stmt.tokens
    if stmt.kind == "condition":
        # keyword ( expr )
        return 2, len(toks) - 1
    if stmt.kind == "return":
        end = len(toks) - 1 if toks and toks[-1].text == ";" else len(toks)
        return 1, end
    if stmt.kind in ("assignment", "declaration"):
        depth = 0
        for i, t in enumerate(toks):
            if t.text in "([":
                depth += 1
            elif t.text in ")]":
                depth -= 1
            elif depth == 0 and t.kind == "op" and t.text in _ASSIGN_OPS:
                end = len(toks) - 1 if toks[-1].text == ";" else len(toks)
                return i + 1, end
        return len(toks), len(toks)  # bare declaration: empty region
    if stmt.kind == "call":
        end = len(toks) - 1 if toks[-1].text == ";" else len(toks)
        return 2, end - 1 if end > 2 and toks[end - 1].text == ")" else end
    return len(toks), len(toks)


def _replace_ops(stmt: Statement, table: dict[str, tuple[str, ...]],
                 binary_only: bool = False) -> list[_Edit]:
    edits = []
    for i, t in enumerate(stmt.tokens):
        if t.kind != "op" or t.text not in table:
            continue
        if binary_only and not _is_binary_at(stmt.tokens, i):
            continue
        for alt in table[t.text]:
            edits.append(_Edit((t.offset, t.end), t.text, alt))
    return edits


def _mut_ror(stmt: Statement, unit: SourceUnit) -> list[_Edit]:
    table = {op: tuple(o for o in _RELATIONAL if o != op) for op in _RELATIONAL}
    return _replace_ops(stmt, table)


def _mut_aor(stmt: Statement, unit: SourceUnit) -> list[_Edit]:
    table = {op: tuple(o for o in _ARITHMETIC if o != op) for op in _ARITHMETIC}
    return _replace_ops(stmt, table, binary_only=True)


def _mut_lcr(stmt: Statement, unit: SourceUnit) -> list[_Edit]:
    return _replace_ops(stmt, {"&&": ("||",), "||": ("&&",)})


def _int_literal_value(text: str) -> int | None:
    body = text.rstrip("uUlL")
    if not body or not body.isdigit():
        return None
    return int(body)


def _mut_icr(stmt: Statement, unit: SourceUnit) -> list[_Edit]:
    edits = []
    for t in stmt.tokens:
        if t.kind != "int":
            continue
        c = _int_literal_value(t.text)
        if c is None:
            continue
        seen = set()
        for v in (0, 1, -1, c + 1, c - 1):
            if v == c or v in seen:
                continue
            seen.add(v)
            edits.append(_Edit((t.offset, t.end), t.text, str(v)))
    return edits


def _mut_lvr(stmt: Statement, unit: SourceUnit) -> list[_Edit]:
    # literal tokens are unsigned; the literal's value class is zero or
    # positive, and each other class contributes one representative
    edits = []
    for t in stmt.tokens:
        if t.kind not in ("int", "float"):
            continue
        if t.kind == "int" and _int_literal_value(t.text) is None:
            continue
        body = t.text.rstrip("uUlLfF")
        is_zero = float(body) == 0.0
        if is_zero:
            reps = ("-1", "1")  # negative, positive
        else:
            reps = ("-" + body, "0")  # negative, zero
        for rep in reps:
            if rep != t.text:
                edits.append(_Edit((t.offset, t.end), t.text, rep))
    return edits


def _rvalue_operands(stmt: Statement) -> list[int]:
    """Token indices of identifier/literal operands in the expression
    region, excluding called function names."""
    lo, hi = _expression_region(stmt)
    toks = stmt.tokens
    out = []
    for i in range(lo, min(hi, len(toks))):
        t = toks[i]
        if t.kind in ("ident", "int", "float"):
            if t.kind == "ident" and t.text in _NONVALUE_KEYWORDS:
                continue
            if i + 1 < len(toks) and toks[i + 1].text == "(":
                continue  # function name
            out.append(i)
    return out


def _literal_is_zero(t: Token) -> bool:
    body = t.text.rstrip("uUlLfF")
    try:
        return float(body) == 0.0
    except ValueError:  # hex and friends
        return False


def _mut_abs(stmt: Statement, unit: SourceUnit) -> list[_Edit]:
    # invert the sign of each rvalue operand; an operand already under a
    # unary minus has the minus removed instead
    edits = []
    toks = stmt.tokens
    for i in _rvalue_operands(stmt):
        t = toks[i]
        if t.kind in ("int", "float") and _literal_is_zero(t):
            continue  # -0 is no change in value
        prev = toks[i - 1] if i > 0 else None
        if prev is not None and prev.text == "-" and not _is_binary_at(toks, i - 1):
            frag = unit.text[prev.offset:t.end]
            edits.append(_Edit((prev.offset, t.end), frag, t.text))
        else:
            edits.append(_Edit((t.offset, t.end), t.text, f"(-{t.text})"))
    return edits


def _mut_uoi(stmt: Statement, unit: SourceUnit) -> list[_Edit]:
    # post-increment at the last use of each distinct variable
    toks = stmt.tokens
    last: dict[str, int] = {}
    for i in _rvalue_operands(stmt):
        if toks[i].kind == "ident":
            last[toks[i].text] = i
    edits = []
    for name in sorted(last):
        i = last[name]
        t = toks[i]
        nxt = toks[i + 1] if i + 1 < len(toks) else None
        if nxt is not None and nxt.text in ("++", "--"):
            continue
        edits.append(_Edit((t.offset, t.end), t.text, f"{t.text}++"))
    return edits


def _mut_sdl(stmt: Statement, unit: SourceUnit) -> list[_Edit]:
    start, end = stmt.span
    frag = unit.text[start:end]
    if stmt.kind == "declaration":
        return []  # deleting a declaration breaks later uses
    if stmt.kind == "condition":
        # neutralize the guard so the controlled block is skipped
        kw = stmt.tokens[0].text
        if kw == "for":
            inner = [t for t in stmt.tokens]
            semis = [t for t in inner if t.text == ";"]
            if len(semis) != 2:
                return []
            a, b = semis[0], semis[1]
            cond_span = (a.end, b.offset)
            orig = unit.text[cond_span[0]:cond_span[1]]
            if orig.strip() == "0":
                return []
            return [_Edit(cond_span, orig, "0")]
        replacement = f"{kw} (0)" + "\n" * frag.count("\n")
        if frag == replacement:
            return []
        return [_Edit((start, end), frag, replacement)]
    if frag.strip() == ";":
        return []
    replacement = ";" + "\n" * frag.count("\n")
    return [_Edit((start, end), frag, replacement)]


def _operand_span(toks: tuple[Token, ...], idx: int, direction: int
                  ) -> tuple[int, int] | None:
    """Char span of the single-token or parenthesized operand adjacent to the
    operator at ``idx`` (direction -1 = left, +1 = right)."""
    if direction < 0:
        j = idx - 1
        if j < 0:
            return None
        t = toks[j]
        if t.kind in ("ident", "int", "float"):
            return (t.offset, t.end)
        if t.text == ")":
            depth = 0
            while j >= 0:
                if toks[j].text == ")":
                    depth += 1
                elif toks[j].text == "(":
                    depth -= 1
                    if depth == 0:
                        return (toks[j].offset, t.end)
                j -= 1
        return None
    j = idx + 1
    if j >= len(toks):
        return None
    t = toks[j]
    if t.kind in ("ident", "int", "float"):
        return (t.offset, t.end)
    if t.text == "(":
        depth = 0
        while j < len(toks):
            if toks[j].text == "(":
                depth += 1
            elif toks[j].text == ")":
                depth -= 1
                if depth == 0:
                    return (t.offset, toks[j].end)
            j += 1
    return None


def _make_deletion(ops: tuple[str, ...], binary_only: bool = True):
    def gen(stmt: Statement, unit: SourceUnit) -> list[_Edit]:
        edits = []
        toks = stmt.tokens
        for i, t in enumerate(toks):
            if t.kind != "op" or t.text not in ops:
                continue
            if binary_only and not _is_binary_at(toks, i):
                continue
            left = _operand_span(toks, i, -1)
            right = _operand_span(toks, i, +1)
            if left is None or right is None:
                continue
            whole = (left[0], right[1])
            frag = unit.text[whole[0]:whole[1]]
            # delete op + left operand (keep right), then op + right (keep left)
            edits.append(_Edit(whole, frag, unit.text[right[0]:right[1]]))
            edits.append(_Edit(whole, frag, unit.text[left[0]:left[1]]))
        return edits

    return gen


_OPERATOR_FUNCS = {
    "ABS": _mut_abs,
    "AOR": _mut_aor,
    "ICR": _mut_icr,
    "LCR": _mut_lcr,
    "ROR": _mut_ror,
    "SDL": _mut_sdl,
    "UOI": _mut_uoi,
    "AOD": _make_deletion(_ARITHMETIC),
    "LOD": _make_deletion(_LOGICAL),
    "ROD": _make_deletion(_RELATIONAL),
    "BOD": _make_deletion(_BITWISE),
    "SOD": _make_deletion(_SHIFT),
    "LVR": _mut_lvr,
}


def generate_mutants(
    unit: SourceUnit,
    operators: set[str] | None = None,
    covered_statements: set[int] | None = None,
) -> list[Mutant]:
    """Generate all first-order mutants for a unit.

    ``covered_statements`` restricts generation to those statement ids; an
    empty set yields no mutants. Ordering is deterministic:
    (statement id, operator catalog order, alternative index).
    """
    if operators is None:
        operators = set(OPERATOR_IDS)
    unknown = operators - set(OPERATOR_IDS)
    if unknown:
        raise ValueError(f"unknown operators: {sorted(unknown)}")
    mutants: list[Mutant] = []
    for stmt in unit.statements:
        if covered_statements is not None and stmt.id not in covered_statements:
            continue
        if stmt.kind == "declaration" and not _has_initializer(stmt):
            continue
        func = unit.function_of(stmt.id)
        for op in OPERATOR_IDS:
            if op not in operators:
                continue
            if stmt.kind == "other" and op != "SDL":
                continue
            for alt, edit in enumerate(_OPERATOR_FUNCS[op](stmt, unit)):
                if edit.original == edit.mutated:
                    continue
                mid = f"{_stem(unit.path)}_s{stmt.id:04d}_{op}_{alt:02d}"
                mutants.append(
                    Mutant(
                        id=mid,
                        operator=op,
                        file=unit.path,
                        statement_id=stmt.id,
                        span=edit.span,
                        original=edit.original,
                        mutated=edit.mutated,
                        function=func,
                        line_span=stmt.line_span,
                    )
                )
    return mutants


def _has_initializer(stmt: Statement) -> bool:
    depth = 0
    for t in stmt.tokens:
        if t.text in "([":
            depth += 1
        elif t.text in ")]":
            depth -= 1
        elif depth == 0 and t.text == "=":
            return True
    return False


def _stem(path: str) -> str:
    base = path.replace("\\", "/").rsplit("/", 1)[-1]
    return base.rsplit(".", 1)[0]


def render_mutant(unit: SourceUnit, mutant: Mutant) -> str:
    """Full mutated file text; raises StaleMutantError if the unit no longer
    matches the mutant's recorded original fragment."""
    start, end = mutant.span
    if unit.text[start:end] != mutant.original:
        raise StaleMutantError(
            f"{mutant.id}: fragment at {mutant.span} does not match source"
        )
    return unit.text[:start] + mutant.mutated + unit.text[end:]


# ---------------------------------------------------------------------------
# Manifest persistence (line-delimited JSON, stable field order)
# ---------------------------------------------------------------------------

_MANIFEST_FIELDS = (
    "id", "operator", "file", "statement_id", "span", "original", "mutated",
    "status", "function", "line_span",
)


def mutant_to_record(m: Mutant) -> dict:
    d = {f: getattr(m, f) for f in _MANIFEST_FIELDS}
    d["span"] = list(m.span)
    d["line_span"] = list(m.line_span)
    return d


def write_manifest(mutants: list[Mutant], path) -> None:
    with open(path, "w") as fh:
        for m in mutants:
            fh.write(json.dumps(mutant_to_record(m)) + "\n")


def read_manifest(path) -> list[Mutant]:
    out = []
    with open(path) as fh:
        for line in fh:
            if not line.strip():
                continue
            d = json.loads(line)
            d["span"] = tuple(d["span"])
            d["line_span"] = tuple(d["line_span"])
            out.append(Mutant(**d))
    return out


def with_status(m: Mutant, status: str) -> Mutant:
    if status not in MUTANT_STATUSES:
        raise ValueError(f"unknown status {status!r}")
    return replace(m, status=status)
