"""Parser and canonical pretty-printer for the ``.sqir`` DSL.

A program is a list of modules:

    module fun1(qbit in[3], qbit out[1]) {
      qbit anc[1];
      Allocate(anc, 1);
      Compute {
        Toffoli(in[0], in[1], in[2]);
        CNOT(in[2], anc[0]);
        Toffoli(in[1], in[0], anc[0]);
      }
      Store {
        CNOT(anc[0], out[0]);
      }
      Uncompute { auto }
      Free(anc, 1);
    }

Blocks are optional.  A module may instead hold bare gate/call statements,
which are treated as its Compute block (the entry module in small programs is
usually written that way).  ``//`` starts a line comment.  Call arguments may
be whole arrays (``a``), single wires (``a[2]``) or half-open slices
(``a[1:4]``).
"""

from __future__ import annotations

from dataclasses import dataclass

from sqir.errors import ParseError, ProgramError
from sqir.ir import (
    ArgSlice,
    Block,
    BlockKind,
    Call,
    CallGraph,
    FuncDef,
    Gate,
    GateKind,
    Program,
    QubitRef,
    UncomputeMode,
    validate_program,
)

_GATE_NAMES = {k.value: k for k in GateKind}
_KEYWORDS = {"module", "qbit", "Allocate", "Free", "Compute", "Store", "Uncompute", "auto"}
_PUNCT = ("[", "]", "(", ")", "{", "}", ",", ";", ":")


@dataclass(frozen=True)
class _Tok:
    kind: str  # 'ident', 'int', 'punct', 'eof'
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch.isdigit():
            start = i
            while i < n and text[i].isdigit():
                i += 1
            toks.append(_Tok("int", text[start:i], line, col))
            col += i - start
            continue
        if ch.isalpha() or ch == "_":
            start = i
            while i < n and (text[i].isalnum() or text[i] == "_"):
                i += 1
            toks.append(_Tok("ident", text[start:i], line, col))
            col += i - start
            continue
        if ch in _PUNCT:
            toks.append(_Tok("punct", ch, line, col))
            i += 1
            col += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    toks.append(_Tok("eof", "", line, col))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.pos = 0

    # --- token helpers -----------------------------------------------------

    def peek(self) -> _Tok:
        return self.toks[self.pos]

    def next(self) -> _Tok:
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def fail(self, msg: str, tok: _Tok | None = None) -> None:
        tok = tok or self.peek()
        raise ParseError(msg, tok.line, tok.col)

    def expect(self, kind: str, text: str | None = None) -> _Tok:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text if text is not None else kind
            self.fail(f"expected {want!r}, found {tok.text or 'end of input'!r}")
        return self.next()

    def at_punct(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind == "punct" and tok.text == text

    def eat_punct(self, text: str) -> bool:
        if self.at_punct(text):
            self.next()
            return True
        return False

    # --- grammar -----------------------------------------------------------

    def program(self) -> Program:
        functions: dict[str, FuncDef] = {}
        while self.peek().kind != "eof":
            tok = self.peek()
            fn = self.module()
            if fn.name in functions:
                raise ParseError(f"duplicate module {fn.name!r}", tok.line, tok.col)
            functions[fn.name] = fn
        if "main" not in functions:
            self.fail("program has no main module")
        return Program(functions=functions)

    def module(self) -> FuncDef:
        self.expect("ident", "module")
        name = self.ident("module name")
        params = self.param_list()
        self.expect("punct", "{")

        decls: dict[str, int] = {}
        decl_order: list[str] = []
        allocated: dict[str, _Tok] = {}
        freed: dict[str, _Tok] = {}
        bare_items: list = []
        blocks: dict[BlockKind, Block] = {}
        mode = UncomputeMode.EXPLICIT

        declared = dict(params)

        while not self.at_punct("}"):
            tok = self.peek()
            if tok.kind != "ident":
                self.fail(f"expected statement, found {tok.text!r}")
            word = tok.text
            if word == "qbit":
                self.next()
                qname = self.ident("wire array name")
                if qname in declared or qname in decls:
                    self.fail(f"duplicate declaration of {qname!r}", tok)
                width = self.bracket_width()
                self.expect("punct", ";")
                decls[qname] = width
                decl_order.append(qname)
            elif word == "Allocate":
                self.next()
                self.expect("punct", "(")
                qname = self.ident("wire array name")
                self.expect("punct", ",")
                count = self.int_lit()
                self.expect("punct", ")")
                self.expect("punct", ";")
                if qname not in decls:
                    self.fail(f"Allocate of undeclared array {qname!r}", tok)
                if qname in allocated:
                    self.fail(f"second Allocate of {qname!r}", tok)
                if count != decls[qname]:
                    self.fail(
                        f"Allocate({qname}, {count}) does not match declared width "
                        f"{decls[qname]}",
                        tok,
                    )
                allocated[qname] = tok
            elif word == "Free":
                self.next()
                self.expect("punct", "(")
                qname = self.ident("wire array name")
                self.expect("punct", ",")
                count = self.int_lit()
                self.expect("punct", ")")
                self.expect("punct", ";")
                if qname not in allocated:
                    self.fail(f"unmatched Free of {qname!r}", tok)
                if qname in freed:
                    self.fail(f"second Free of {qname!r}", tok)
                if count != decls[qname]:
                    self.fail(
                        f"Free({qname}, {count}) does not match declared width {decls[qname]}",
                        tok,
                    )
                freed[qname] = tok
            elif word in ("Compute", "Store", "Uncompute"):
                kind = BlockKind(word)
                if kind in blocks:
                    self.fail(f"duplicate {word} block", tok)
                if bare_items:
                    self.fail("cannot mix bare statements with structured blocks", tok)
                self.next()
                if kind is BlockKind.UNCOMPUTE:
                    block, mode = self.uncompute_block()
                else:
                    block = Block(kind, tuple(self.item_list()))
                blocks[kind] = block
            else:
                if blocks:
                    self.fail("bare statements must come before structured blocks", tok)
                bare_items.append(self.item())
        self.expect("punct", "}")

        for qname in allocated:
            if qname not in freed:
                raise ParseError(
                    f"{name}: ancilla {qname!r} allocated but never freed",
                    allocated[qname].line,
                    allocated[qname].col,
                )
        for qname in decls:
            if qname not in allocated:
                raise ParseError(
                    f"{name}: declared array {qname!r} has no Allocate",
                    self.peek().line,
                    self.peek().col,
                )

        if bare_items:
            compute = Block(BlockKind.COMPUTE, tuple(bare_items))
        else:
            compute = blocks.get(BlockKind.COMPUTE, Block(BlockKind.COMPUTE))
        store = blocks.get(BlockKind.STORE, Block(BlockKind.STORE))
        uncompute = blocks.get(BlockKind.UNCOMPUTE, Block(BlockKind.UNCOMPUTE))

        return FuncDef(
            name=name,
            params=tuple(params),
            ancillas=tuple((q, decls[q]) for q in decl_order),
            compute=compute,
            store=store,
            uncompute=uncompute,
            uncompute_mode=mode,
        )

    def param_list(self) -> list[tuple[str, int]]:
        self.expect("punct", "(")
        params: list[tuple[str, int]] = []
        if not self.at_punct(")"):
            while True:
                self.expect("ident", "qbit")
                pname = self.ident("parameter name")
                width = self.bracket_width()
                if any(p == pname for p, _ in params):
                    self.fail(f"duplicate parameter {pname!r}")
                params.append((pname, width))
                if not self.eat_punct(","):
                    break
        self.expect("punct", ")")
        return params

    def uncompute_block(self) -> tuple[Block, UncomputeMode]:
        self.expect("punct", "{")
        if self.peek().kind == "ident" and self.peek().text == "auto":
            self.next()
            self.expect("punct", "}")
            return Block(BlockKind.UNCOMPUTE), UncomputeMode.AUTO
        items = []
        while not self.at_punct("}"):
            items.append(self.item())
        self.expect("punct", "}")
        return Block(BlockKind.UNCOMPUTE, tuple(items)), UncomputeMode.EXPLICIT

    def item_list(self) -> list:
        self.expect("punct", "{")
        items = []
        while not self.at_punct("}"):
            items.append(self.item())
        self.expect("punct", "}")
        return items

    def item(self):
        tok = self.peek()
        name = self.ident("gate or call")
        if name in _GATE_NAMES:
            gate = self.gate(_GATE_NAMES[name], tok)
            self.expect("punct", ";")
            return gate
        if name in _KEYWORDS:
            self.fail(f"{name!r} not allowed here", tok)
        call = self.call(name)
        self.expect("punct", ";")
        return call

    def gate(self, kind: GateKind, tok: _Tok) -> Gate:
        self.expect("punct", "(")
        ops: list[QubitRef] = []
        while True:
            ops.append(self.operand())
            if not self.eat_punct(","):
                break
        self.expect("punct", ")")
        try:
            return Gate(kind, tuple(ops))
        except ProgramError as exc:
            raise ParseError(str(exc), tok.line, tok.col) from None

    def operand(self) -> QubitRef:
        name = self.ident("wire reference")
        if self.at_punct("["):
            self.next()
            idx = self.int_lit()
            self.expect("punct", "]")
            return QubitRef(name, idx)
        # bare name: sugar for element 0 of a width-1 array
        return QubitRef(name, 0)

    def call(self, callee: str) -> Call:
        self.expect("punct", "(")
        args: list[ArgSlice] = []
        if not self.at_punct(")"):
            while True:
                args.append(self.arg())
                if not self.eat_punct(","):
                    break
        self.expect("punct", ")")
        return Call(callee, tuple(args))

    def arg(self) -> ArgSlice:
        name = self.ident("argument")
        if self.at_punct("["):
            self.next()
            lo = self.int_lit()
            if self.eat_punct(":"):
                hi = self.int_lit()
            else:
                hi = lo + 1
            self.expect("punct", "]")
            return ArgSlice(name, lo, hi)
        return ArgSlice(name, 0, -1)  # whole array, width resolved later

    def ident(self, what: str) -> str:
        tok = self.peek()
        if tok.kind != "ident":
            self.fail(f"expected {what}, found {tok.text or 'end of input'!r}")
        return self.next().text

    def int_lit(self) -> int:
        tok = self.expect("int")
        return int(tok.text)

    def bracket_width(self) -> int:
        self.expect("punct", "[")
        width = self.int_lit()
        self.expect("punct", "]")
        if width < 1:
            self.fail("array width must be >= 1")
        return width


def _resolve_whole_arrays(program: Program) -> Program:
    """Replace whole-array argument markers with explicit [0:width) slices."""
    functions = {}
    for name, fn in program.functions.items():
        def fix_block(block: Block) -> Block:
            items = []
            for item in block.items:
                if isinstance(item, Call):
                    args = []
                    for a in item.args:
                        if a.hi == -1:
                            if not fn.declares(a.name):
                                raise ProgramError(f"{fn.name}: undeclared wire array {a.name!r}")
                            args.append(ArgSlice(a.name, 0, fn.width(a.name)))
                        else:
                            args.append(a)
                    items.append(Call(item.callee, tuple(args)))
                else:
                    items.append(item)
            return Block(block.kind, tuple(items))

        functions[name] = FuncDef(
            name=fn.name,
            params=fn.params,
            ancillas=fn.ancillas,
            compute=fix_block(fn.compute),
            store=fix_block(fn.store),
            uncompute=fix_block(fn.uncompute),
            uncompute_mode=fn.uncompute_mode,
        )
    return Program(functions=functions, entry=program.entry)


def parse_program(text: str) -> Program:
    """Parse and validate DSL source into a Program.

    Raises ParseError with line/column on syntax problems and ProgramError on
    structural ones (recursion, arity mismatches, unmatched Free, ...).
    """
    program = _Parser(text).program()
    program = _resolve_whole_arrays(program)
    validate_program(program)
    return program


def parse_file(path) -> Program:
    with open(path, encoding="utf-8") as fh:
        return parse_program(fh.read())


# --- pretty printer ---------------------------------------------------------


def _fmt_item(item) -> str:
    return f"{item};"


def pretty_print(program: Program) -> str:
    """Canonical textual form; parsing it back yields a structurally identical
    Program."""
    out: list[str] = []
    for name in program.functions:
        fn = program.functions[name]
        params = ", ".join(f"qbit {p}[{w}]" for p, w in fn.params)
        out.append(f"module {name}({params}) {{")
        for aname, width in fn.ancillas:
            out.append(f"  qbit {aname}[{width}];")
        for aname, width in fn.ancillas:
            out.append(f"  Allocate({aname}, {width});")
        for block, header in ((fn.compute, "Compute"), (fn.store, "Store")):
            if block.items:
                out.append(f"  {header} {{")
                for item in block.items:
                    out.append(f"    {_fmt_item(item)}")
                out.append("  }")
        if fn.uncompute_mode is UncomputeMode.AUTO:
            out.append("  Uncompute { auto }")
        elif fn.uncompute.items:
            out.append("  Uncompute {")
            for item in fn.uncompute.items:
                out.append(f"    {_fmt_item(item)}")
            out.append("  }")
        for aname, width in fn.ancillas:
            out.append(f"  Free({aname}, {width});")
        out.append("}")
        out.append("")
    return "\n".join(out)


def write_sqir(program: Program, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(pretty_print(program))


def analyze(program: Program) -> CallGraph:
    """Re-run validation on an already-built Program and return its call graph."""
    return validate_program(program)
