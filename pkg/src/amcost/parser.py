"""Tokenizer, recursive-descent parser and pretty printer.

Concrete grammar::

    file   := { import } { stmt } { export }
    import := "import" "{" ident { "," ident } "}" "from" string ";"
            | "import" "*" "as" ident "from" string ";"
    export := "export" ident ";"
    stmt   := "let" ident "=" expr ";" | ident "=" expr ";"
            | "if" "(" expr ")" block "else" block [";"]
            | "while" "(" expr ")" block [";"]
            | "for" "(" ident "in" num ".." num ")" block [";"]
            | "comp" expr "(" [ expr { "," expr } ] ")" ";"
    block  := "{" { stmt } "}"
    expr   := num | ident [ "." ident ] | ("+"|"-"|"*") expr expr
            | "(" expr ")" | "<" { ident } ">" { stmt } "</>"
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import List, Optional

from .errors import ParseError
from .syntax import (
    Assign, BinOp, BinOpKind, CompCall, CompDef, Export, For, If, ImportAll,
    ImportSelected, Let, Num, Proj, SourceFile, Var, While,
    preorder_while_labels,
)

KEYWORDS = frozenset(
    {"let", "if", "else", "while", "for", "in", "comp", "import", "from", "as", "export"}
)

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>//[^\n]*)
  | (?P<num>[0-9]+)
  | (?P<ident>[A-Za-z][A-Za-z0-9_]*)
  | (?P<string>"[^"\n]*")
  | (?P<punct></>|\.\.|[{}();,=.<>+\-*])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str      # "num", "ident", "kw", "string", "punct", "eof"
    text: str
    line: int
    col: int

    def describe(self) -> str:
        if self.kind == "eof":
            return "end of input"
        return repr(self.text)


def tokenize(text: str, path: Optional[str] = None) -> List[Token]:
    tokens = []
    i = 0
    line, col = 1, 1
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if m is None:
            raise ParseError(line, col, f"unexpected character {text[i]!r}", path=path)
        kind = m.lastgroup
        chunk = m.group()
        if kind not in ("ws", "comment"):
            if kind == "ident" and chunk in KEYWORDS:
                kind = "kw"
            tokens.append(Token(kind, chunk, line, col))
        nl = chunk.count("\n")
        if nl:
            line += nl
            col = len(chunk) - chunk.rfind("\n")
        else:
            col += len(chunk)
        i = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


_BINOPS = {"+": BinOpKind.ADD, "-": BinOpKind.SUB, "*": BinOpKind.MUL}


class _Parser:
    def __init__(self, text: str, path: Optional[str]):
        self.path = path
        self.toks = tokenize(text, path)
        self.i = 0

    # -- token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("kw", "punct") and t.text == text

    def error(self, message: str, expected=()):
        t = self.tok
        raise ParseError(t.line, t.col, message, expected, path=self.path)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"unexpected {self.tok.describe()}", [repr(text)])
        t = self.tok
        self.i += 1
        return t

    def ident(self) -> Token:
        t = self.tok
        if t.kind != "ident":
            self.error(f"unexpected {t.describe()}", ["identifier"])
        self.i += 1
        return t

    def number(self) -> int:
        t = self.tok
        if t.kind != "num":
            self.error(f"unexpected {t.describe()}", ["number"])
        self.i += 1
        return int(t.text)

    # -- file
    def file(self) -> SourceFile:
        imports = []
        while self.at("import"):
            imports.append(self.import_decl())
        stmts = []
        while not self.at("export") and self.tok.kind != "eof":
            if self.at("import"):
                self.error("imports must precede all statements")
            stmts.append(self.stmt())
        exports = []
        while self.at("export"):
            t = self.expect("export")
            name = self.ident().text
            self.expect(";")
            exports.append(Export(name, pos=(t.line, t.col)))
        if self.tok.kind != "eof":
            if self.at("import"):
                self.error("imports must precede all statements")
            self.error("exports must follow all statements", ["'export'", "end of input"])
        return SourceFile(tuple(imports), tuple(stmts), tuple(exports))

    def import_decl(self):
        t = self.expect("import")
        pos = (t.line, t.col)
        if self.at("*"):
            self.i += 1
            self.expect("as")
            alias = self.ident().text
            self.expect("from")
            path = self.string()
            self.expect(";")
            return ImportAll(alias, path, pos=pos)
        if not self.at("{"):
            self.error(f"unexpected {self.tok.describe()}", ["'{'", "'*'"])
        self.i += 1
        names = [self.ident().text]
        while self.at(","):
            self.i += 1
            names.append(self.ident().text)
        self.expect("}")
        self.expect("from")
        path = self.string()
        self.expect(";")
        if len(set(names)) != len(names):
            raise ParseError(t.line, t.col, "duplicate names in import", path=self.path)
        return ImportSelected(tuple(names), path, pos=pos)

    def string(self) -> str:
        t = self.tok
        if t.kind != "string":
            self.error(f"unexpected {t.describe()}", ["string"])
        self.i += 1
        value = t.text[1:-1]
        if not value:
            raise ParseError(t.line, t.col, "empty file name", path=self.path)
        return value

    # -- statements
    def block(self):
        self.expect("{")
        stmts = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                self.error("unterminated block", ["'}'"])
            stmts.append(self.stmt())
        self.expect("}")
        if self.at(";"):
            self.i += 1
        return tuple(stmts)

    def stmt(self):
        t = self.tok
        pos = (t.line, t.col)
        if self.at("let"):
            self.i += 1
            name = self.ident().text
            self.expect("=")
            e = self.expr()
            self.expect(";")
            return Let(name, e, pos=pos)
        if t.kind == "ident":
            self.i += 1
            self.expect("=")
            e = self.expr()
            self.expect(";")
            return Assign(t.text, e, pos=pos)
        if self.at("if"):
            self.i += 1
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            then = self.block()
            self.expect("else")
            orelse = self.block()
            return If(cond, then, orelse, pos=pos)
        if self.at("while"):
            self.i += 1
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            return While(None, cond, self.block(), pos=pos)
        if self.at("for"):
            self.i += 1
            self.expect("(")
            name = self.ident().text
            self.expect("in")
            bound = self.tok
            lo = self.number()
            self.expect("..")
            hi = self.number()
            self.expect(")")
            if lo > hi:
                raise ParseError(bound.line, bound.col,
                                 f"for-loop bounds inverted ({lo} > {hi})", path=self.path)
            return For(name, lo, hi, self.block(), pos=pos)
        if self.at("comp"):
            self.i += 1
            callee = self.expr()
            self.expect("(")
            args = []
            if not self.at(")"):
                args.append(self.expr())
                while self.at(","):
                    self.i += 1
                    args.append(self.expr())
            self.expect(")")
            self.expect(";")
            return CompCall(callee, tuple(args), pos=pos)
        self.error(f"unexpected {t.describe()}",
                   ["'let'", "identifier", "'if'", "'while'", "'for'", "'comp'"])

    # -- expressions
    def expr(self):
        t = self.tok
        pos = (t.line, t.col)
        if t.kind == "num":
            self.i += 1
            return Num(int(t.text), pos=pos)
        if t.kind == "ident":
            self.i += 1
            if self.at("."):
                self.i += 1
                return Proj(t.text, self.ident().text, pos=pos)
            return Var(t.text, pos=pos)
        if t.kind == "punct" and t.text in _BINOPS:
            self.i += 1
            left = self.expr()
            right = self.expr()
            return BinOp(_BINOPS[t.text], left, right, pos=pos)
        if self.at("("):
            self.i += 1
            e = self.expr()
            self.expect(")")
            return e
        if self.at("<"):
            self.i += 1
            params = []
            while not self.at(">"):
                params.append(self.ident().text)
            self.expect(">")
            if len(set(params)) != len(params):
                raise ParseError(t.line, t.col, "duplicate component parameters", path=self.path)
            body = []
            while not self.at("</>"):
                if self.tok.kind == "eof":
                    self.error("unterminated component", ["'</>'"])
                body.append(self.stmt())
            self.expect("</>")
            return CompDef(tuple(params), tuple(body), pos=pos)
        self.error(f"unexpected {t.describe()}",
                   ["number", "identifier", "operator", "'('", "'<'"])


def parse_file(text: str, file_id: str) -> SourceFile:
    """Parse ``text`` as the file ``file_id`` and label its while loops."""
    src = _Parser(text, file_id).file()
    return preorder_while_labels(src, file_id)


# -- pretty printing ---------------------------------------------------------

def format_expr(e) -> str:
    if isinstance(e, Num):
        return str(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Proj):
        return f"{e.record}.{e.field}"
    if isinstance(e, BinOp):
        return f"({e.op.value} {format_expr(e.left)} {format_expr(e.right)})"
    if isinstance(e, CompDef):
        head = "<" + " ".join(e.params) + ">"
        if not e.body:
            return head + " </>"
        inner = " ".join(format_stmt(s) for s in e.body)
        return f"{head} {inner} </>"
    raise TypeError(f"not an expression: {e!r}")


def _block(stmts, indent: int) -> str:
    if not stmts:
        return "{ }"
    pad = "  " * (indent + 1)
    lines = [pad + format_stmt(s, indent + 1) for s in stmts]
    return "{\n" + "\n".join(lines) + "\n" + "  " * indent + "}"


def format_stmt(s, indent: int = 0) -> str:
    if isinstance(s, Let):
        return f"let {s.name} = {format_expr(s.expr)};"
    if isinstance(s, Assign):
        return f"{s.name} = {format_expr(s.expr)};"
    if isinstance(s, If):
        return (f"if ({format_expr(s.cond)}) {_block(s.then, indent)}"
                f" else {_block(s.orelse, indent)};")
    if isinstance(s, While):
        return f"while ({format_expr(s.cond)}) {_block(s.body, indent)};"
    if isinstance(s, For):
        return f"for ({s.name} in {s.start}..{s.stop}) {_block(s.body, indent)};"
    if isinstance(s, CompCall):
        args = ", ".join(format_expr(a) for a in s.args)
        return f"comp {format_expr(s.callee)} ({args});"
    raise TypeError(f"not a statement: {s!r}")


def format_file(src: SourceFile) -> str:
    lines = []
    for imp in src.imports:
        if isinstance(imp, ImportAll):
            lines.append(f'import * as {imp.alias} from "{imp.file}";')
        else:
            lines.append(f'import {{ {", ".join(imp.names)} }} from "{imp.file}";')
    lines.extend(format_stmt(s) for s in src.stmts)
    lines.extend(f"export {e.name};" for e in src.exports)
    return "\n".join(lines) + ("\n" if lines else "")
