"""Statement syntax: formulas, obligations, oughts, parser and printer.

Three layers of abstract syntax:

* ``Formula`` -- CTL*-style path/state formulas extended with agentive
  see-to-it operators (``[a cstit: ...]``, ``[a dstit: ...]``).
* ``Obligation`` -- the restricted grammar ``A ::= phi | [a dstit: A] | !A``
  where ``phi`` is a pure (stit-free) formula.
* ``OughtStatement`` -- ``O[a cstit: A]`` and the conditional form
  ``O[a cstit: A / B]``; the agent slot may name a group.

The concrete grammar is documented in docs/grammar.ebnf.  Precedence, from
tightest to loosest: ``!`` and the unary temporal operators, ``BR[n]``,
``U``/``R``, ``&``, ``|``, ``->``.  The path quantifiers ``A`` and ``E``
swallow the longest formula to their right.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import GrammarError, ParseError


# ---------------------------------------------------------------------------
# Abstract syntax
# ---------------------------------------------------------------------------

class Formula:
    """Base class for path/state formulas."""

    def __str__(self):
        return render(self)


@dataclass(frozen=True)
class Atom(Formula):
    name: str


@dataclass(frozen=True)
class TrueFormula(Formula):
    pass


@dataclass(frozen=True)
class FalseFormula(Formula):
    pass


@dataclass(frozen=True)
class Not(Formula):
    operand: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Next(Formula):
    operand: Formula


@dataclass(frozen=True)
class NextPow(Formula):
    """``X^t f``: t-fold repetition of the next operator."""

    steps: int
    operand: Formula

    def __post_init__(self):
        if self.steps < 0:
            raise GrammarError("X^t needs t >= 0", production="next-pow")


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Release(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Eventually(Formula):
    operand: Formula


@dataclass(frozen=True)
class EventuallyBounded(Formula):
    """``F[lo:hi] f``: f within lo..hi steps from now."""

    lo: int
    hi: int
    operand: Formula

    def __post_init__(self):
        if self.lo < 0 or self.lo > self.hi:
            raise GrammarError(
                f"F[{self.lo}:{self.hi}] needs 0 <= lo <= hi",
                production="bounded-eventually")


@dataclass(frozen=True)
class Always(Formula):
    operand: Formula


@dataclass(frozen=True)
class BoundedRelease(Formula):
    """``l BR[n] r``: within n steps, l now, or r continuously until l."""

    bound: int
    left: Formula
    right: Formula

    def __post_init__(self):
        if self.bound < 0:
            raise GrammarError("BR[n] needs n >= 0", production="bounded-release")


@dataclass(frozen=True)
class ForallPaths(Formula):
    operand: Formula


@dataclass(frozen=True)
class ExistsPaths(Formula):
    operand: Formula


@dataclass(frozen=True)
class Cstit(Formula):
    """``[agent cstit: body]``: the agent's current choice guarantees body."""

    agent: str
    body: "Obligation"


@dataclass(frozen=True)
class Dstit(Formula):
    """``[agent dstit: body]``: cstit plus a genuinely open alternative."""

    agent: str
    body: "Obligation"


TRUE = TrueFormula()
FALSE = FalseFormula()


class Obligation:
    """Base class for the obligation grammar ``A ::= phi | [a dstit: A] | !A``."""

    def __str__(self):
        return render(self)


@dataclass(frozen=True)
class Plain(Obligation):
    """A pure formula used as an obligation; must be stit-free."""

    formula: Formula

    def __post_init__(self):
        if contains_stit(self.formula):
            raise GrammarError(
                "the formula leaf of an obligation must be stit-free",
                production="obligation-plain")


@dataclass(frozen=True)
class DstitOf(Obligation):
    agent: str
    body: Obligation


@dataclass(frozen=True)
class NegatedObligation(Obligation):
    body: Obligation


@dataclass(frozen=True)
class OughtStatement:
    """``O[agents cstit: body]``, optionally conditioned: ``... / condition``."""

    agents: tuple[str, ...]
    body: Obligation
    condition: Obligation | None = None

    def __post_init__(self):
        if not self.agents:
            raise GrammarError("ought needs at least one agent", production="ought")
        if len(set(self.agents)) != len(self.agents):
            raise GrammarError("duplicate agent in ought", production="ought")

    def __str__(self):
        return render(self)


def ought(agent, body, condition=None):
    """Build an OughtStatement; `agent` is a name or an iterable of names."""
    agents = (agent,) if isinstance(agent, str) else tuple(agent)
    return OughtStatement(agents, body, condition)


# ---------------------------------------------------------------------------
# Structural helpers
# ---------------------------------------------------------------------------

_UNARY = (Not, Next, Eventually, Always, ForallPaths, ExistsPaths)
_BINARY = (And, Or, Implies, Until, Release)


def children(f):
    """Immediate subterms of a formula/obligation node."""
    if isinstance(f, _UNARY):
        return (f.operand,)
    if isinstance(f, _BINARY):
        return (f.left, f.right)
    if isinstance(f, (NextPow, EventuallyBounded)):
        return (f.operand,)
    if isinstance(f, BoundedRelease):
        return (f.left, f.right)
    if isinstance(f, (Cstit, Dstit, DstitOf, NegatedObligation)):
        return (f.body,)
    if isinstance(f, Plain):
        return (f.formula,)
    if isinstance(f, OughtStatement):
        return (f.body,) + ((f.condition,) if f.condition is not None else ())
    return ()


def walk(f):
    """All nodes of f, preorder."""
    yield f
    for c in children(f):
        yield from walk(c)


def contains_stit(f):
    return any(isinstance(g, (Cstit, Dstit, DstitOf)) for g in walk(f))


def contains_quantifier(f):
    return any(isinstance(g, (ForallPaths, ExistsPaths)) for g in walk(f))


def atoms_of(f):
    """Names of all atoms occurring in f."""
    return {g.name for g in walk(f) if isinstance(g, Atom)}


def is_pure_ctls(f):
    """True iff f is a Formula without stit operators."""
    return isinstance(f, Formula) and not contains_stit(f)


def or_all(parts):
    parts = list(parts)
    if not parts:
        return FALSE
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


def and_all(parts):
    parts = list(parts)
    if not parts:
        return TRUE
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def next_pow(steps, f):
    """steps-fold application of Next."""
    for _ in range(steps):
        f = Next(f)
    return f


# ---------------------------------------------------------------------------
# Printer
# ---------------------------------------------------------------------------

def render(x) -> str:
    """Canonical re-parsable text for a formula, obligation, or ought."""
    if isinstance(x, OughtStatement):
        head = ",".join(x.agents)
        if x.condition is None:
            return f"O[{head} cstit: {render(x.body)}]"
        return f"O[{head} cstit: {render(x.body)} / {render(x.condition)}]"
    if isinstance(x, Plain):
        return render(x.formula)
    if isinstance(x, DstitOf):
        return f"[{x.agent} dstit: {render(x.body)}]"
    if isinstance(x, NegatedObligation):
        return f"!{render(x.body)}"
    if isinstance(x, Atom):
        return x.name
    if isinstance(x, TrueFormula):
        return "true"
    if isinstance(x, FalseFormula):
        return "false"
    if isinstance(x, Not):
        return f"!{_tight(x.operand)}"
    if isinstance(x, And):
        return f"({render(x.left)} & {render(x.right)})"
    if isinstance(x, Or):
        return f"({render(x.left)} | {render(x.right)})"
    if isinstance(x, Implies):
        return f"({render(x.left)} -> {render(x.right)})"
    if isinstance(x, Next):
        return f"X {_tight(x.operand)}"
    if isinstance(x, NextPow):
        return f"X^{x.steps} {_tight(x.operand)}"
    if isinstance(x, Until):
        return f"({render(x.left)} U {render(x.right)})"
    if isinstance(x, Release):
        return f"({render(x.left)} R {render(x.right)})"
    if isinstance(x, Eventually):
        return f"F {_tight(x.operand)}"
    if isinstance(x, EventuallyBounded):
        return f"F[{x.lo}:{x.hi}] {_tight(x.operand)}"
    if isinstance(x, Always):
        return f"G {_tight(x.operand)}"
    if isinstance(x, BoundedRelease):
        return f"{_tight(x.left)} BR[{x.bound}] {_tight(x.right)}"
    if isinstance(x, ForallPaths):
        return f"(A {render(x.operand)})"
    if isinstance(x, ExistsPaths):
        return f"(E {render(x.operand)})"
    if isinstance(x, Cstit):
        return f"[{x.agent} cstit: {render(x.body)}]"
    if isinstance(x, Dstit):
        return f"[{x.agent} dstit: {render(x.body)}]"
    raise TypeError(f"cannot render {type(x).__name__}")


def _tight(f):
    # operand position of a unary operator: BR is the only construct whose
    # rendering is not self-delimiting
    if isinstance(f, BoundedRelease):
        return f"({render(f)})"
    return render(f)


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

_SYMBOLS = ("->", "(", ")", "[", "]", "{", "}", ",", ":", "/", "!", "&", "|", "^")


@dataclass(frozen=True)
class _Token:
    kind: str  # "ident", "int", "sym", "eof"
    text: str
    line: int
    column: int


def _tokenize(text):
    toks = []
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch.isspace():
            col += 1
            i += 1
            continue
        if text.startswith("->", i):
            toks.append(_Token("sym", "->", line, col))
            i += 2
            col += 2
            continue
        if ch in "()[]{},:/!&|^":
            toks.append(_Token("sym", ch, line, col))
            i += 1
            col += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(_Token("int", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] in "_."):
                j += 1
            toks.append(_Token("ident", text[i:j], line, col))
            col += j - i
            i = j
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    toks.append(_Token("eof", "", line, col))
    return toks


_RESERVED = {"true", "false", "cstit", "dstit", "X", "F", "G", "U", "R", "BR", "O"}
# "A" and "E" double as path quantifiers and as plain atom names; the parser
# disambiguates on one token of lookahead.
_FORMULA_START_SYMS = {"(", "[", "!"}


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.pos = 0

    def peek(self, ahead=0):
        return self.toks[min(self.pos + ahead, len(self.toks) - 1)]

    def next(self):
        tok = self.toks[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def error(self, message, tok=None):
        tok = tok or self.peek()
        raise ParseError(message, tok.line, tok.column)

    def expect_sym(self, sym):
        tok = self.next()
        if tok.kind != "sym" or tok.text != sym:
            self.error(f"expected {sym!r}, found {tok.text or 'end of input'!r}", tok)
        return tok

    def expect_ident(self, what="identifier"):
        tok = self.next()
        if tok.kind != "ident":
            self.error(f"expected {what}, found {tok.text or 'end of input'!r}", tok)
        return tok

    def expect_int(self):
        tok = self.next()
        if tok.kind != "int":
            self.error(f"expected integer, found {tok.text or 'end of input'!r}", tok)
        return int(tok.text)

    # statement = ought | obligation | formula
    def statement(self):
        if self._at_ought():
            node = self.ought()
        else:
            f = self.formula()
            node = _classify(f)
        tok = self.peek()
        if tok.kind != "eof":
            self.error(f"unexpected trailing input {tok.text!r}", tok)
        return node

    def _at_ought(self):
        tok = self.peek()
        return tok.kind == "ident" and tok.text == "O" and \
            self.peek(1).kind == "sym" and self.peek(1).text == "["

    def ought(self):
        self.expect_ident()  # the O
        self.expect_sym("[")
        agents = [self.expect_ident("agent name").text]
        while self.peek().text == ",":
            self.next()
            agents.append(self.expect_ident("agent name").text)
        kw = self.expect_ident("'cstit'")
        if kw.text != "cstit":
            if kw.text == "dstit":
                self.error("oughts are built with cstit, not dstit", kw)
            self.error(f"expected 'cstit', found {kw.text!r}", kw)
        self.expect_sym(":")
        body = self.obligation()
        condition = None
        if self.peek().text == "/":
            self.next()
            condition = self.obligation()
        self.expect_sym("]")
        return OughtStatement(tuple(agents), body, condition)

    def obligation(self):
        tok = self.peek()
        f = self.formula()
        try:
            return formula_to_obligation(f)
        except GrammarError as exc:
            self.error(str(exc), tok)

    # formula = implied
    def formula(self):
        return self._implies()

    def _implies(self):
        left = self._or()
        if self.peek().text == "->":
            self.next()
            return Implies(left, self._implies())
        return left

    def _or(self):
        out = self._and()
        while self.peek().text == "|":
            self.next()
            out = Or(out, self._and())
        return out

    def _and(self):
        out = self._until()
        while self.peek().text == "&":
            self.next()
            out = And(out, self._until())
        return out

    def _until(self):
        left = self._brelease()
        tok = self.peek()
        if tok.kind == "ident" and tok.text in ("U", "R"):
            self.next()
            right = self._until()
            return Until(left, right) if tok.text == "U" else Release(left, right)
        return left

    def _brelease(self):
        left = self._unary()
        tok = self.peek()
        if tok.kind == "ident" and tok.text == "BR":
            self.next()
            self.expect_sym("[")
            bound = self.expect_int()
            self.expect_sym("]")
            right = self._brelease()
            return BoundedRelease(bound, left, right)
        return left

    def _unary(self):
        tok = self.peek()
        if tok.text == "!":
            self.next()
            return Not(self._unary())
        if tok.text == "(":
            self.next()
            f = self.formula()
            self.expect_sym(")")
            return f
        if tok.text == "[":
            return self._stit_bracket()
        if tok.kind == "ident":
            return self._ident_formula()
        self.error(f"expected a formula, found {tok.text or 'end of input'!r}", tok)

    def _stit_bracket(self):
        self.expect_sym("[")
        agent = self.expect_ident("agent name").text
        kw = self.expect_ident("'cstit' or 'dstit'")
        if kw.text not in ("cstit", "dstit"):
            self.error(f"expected 'cstit' or 'dstit', found {kw.text!r}", kw)
        self.expect_sym(":")
        body = self.obligation()
        self.expect_sym("]")
        return (Cstit if kw.text == "cstit" else Dstit)(agent, body)

    def _ident_formula(self):
        tok = self.next()
        name = tok.text
        if name == "true":
            return TRUE
        if name == "false":
            return FALSE
        if name == "O":
            raise GrammarError(
                "an ought operator cannot appear inside a formula",
                production="formula")
        if name == "X":
            if self.peek().text == "^":
                self.next()
                steps = self.expect_int()
                return NextPow(steps, self._unary())
            return Next(self._unary())
        if name == "F":
            if self.peek().text == "[":
                self.next()
                lo = self.expect_int()
                self.expect_sym(":")
                hi = self.expect_int()
                self.expect_sym("]")
                if lo > hi:
                    self.error(f"F[{lo}:{hi}] needs lo <= hi", tok)
                return EventuallyBounded(lo, hi, self._unary())
            return Eventually(self._unary())
        if name == "G":
            return Always(self._unary())
        if name in ("A", "E") and self._starts_formula():
            inner = self.formula()
            return ForallPaths(inner) if name == "A" else ExistsPaths(inner)
        if name in ("U", "R", "BR", "cstit", "dstit"):
            self.error(f"{name!r} is an operator, not an atom", tok)
        return Atom(name)

    def _starts_formula(self):
        tok = self.peek()
        if tok.kind == "ident":
            return tok.text not in ("U", "R", "BR", "cstit", "dstit")
        return tok.kind == "sym" and tok.text in _FORMULA_START_SYMS


def formula_to_obligation(f) -> Obligation:
    """Coerce a parsed formula into the obligation grammar.

    ``[a dstit: ...]`` maps to a dstit obligation, negation folds into the
    formula when the body is plain, and anything embedding a stit operator
    inside boolean/temporal structure is rejected.
    """
    if isinstance(f, Dstit):
        return DstitOf(f.agent, f.body)
    if isinstance(f, Not):
        inner = formula_to_obligation(f.operand)
        if isinstance(inner, Plain):
            return Plain(Not(inner.formula))
        return NegatedObligation(inner)
    if isinstance(f, Cstit):
        raise GrammarError(
            "cstit is not part of the obligation grammar (phi | [a dstit: A] | !A)",
            production="obligation")
    if contains_stit(f):
        raise GrammarError(
            "a stit operator may not be embedded in formula structure inside "
            "an obligation (grammar: phi | [a dstit: A] | !A)",
            production="obligation")
    return Plain(f)


def _classify(f):
    """Most specific reading of a top-level formula parse."""
    try:
        ob = formula_to_obligation(f)
    except GrammarError:
        return f
    if isinstance(ob, (DstitOf, NegatedObligation)):
        return ob
    return f


def parse(text: str):
    """Parse text into the most specific of OughtStatement/Obligation/Formula."""
    return _Parser(text).statement()


def parse_formula(text: str) -> Formula:
    node = parse(text)
    if isinstance(node, OughtStatement):
        raise GrammarError("expected a formula, parsed an ought statement",
                           production="formula")
    if isinstance(node, Obligation):
        node = obligation_to_formula(node)
    return node


def parse_obligation(text: str) -> Obligation:
    node = parse(text)
    if isinstance(node, OughtStatement):
        raise GrammarError("expected an obligation, parsed an ought statement",
                           production="obligation")
    if isinstance(node, Formula):
        return formula_to_obligation(node)
    return node


def parse_ought(text: str) -> OughtStatement:
    node = parse(text)
    if not isinstance(node, OughtStatement):
        raise GrammarError("expected an ought statement", production="ought")
    return node


def obligation_to_formula(ob) -> Formula:
    """View an obligation as a formula (dstit obligations become Dstit nodes)."""
    if isinstance(ob, Plain):
        return ob.formula
    if isinstance(ob, DstitOf):
        return Dstit(ob.agent, ob.body)
    if isinstance(ob, NegatedObligation):
        return Not(obligation_to_formula(ob.body))
    raise TypeError(f"not an obligation: {type(ob).__name__}")


# ---------------------------------------------------------------------------
# Transformations
# ---------------------------------------------------------------------------

def expand_bounded(f: Formula) -> Formula:
    """Rewrite X^t, F[n:m] and BR[N] into X / and / or structure.

    F[n:m] f  =  X^n f | ... | X^m f
    l BR[N] r =  l | (r & X l) | (r & X r & X^2 l) | ...
                   | (r & ... & X^(N-1) r & X^N l) | (r & X r & ... & X^N r)
    """
    if isinstance(f, NextPow):
        return next_pow(f.steps, expand_bounded(f.operand))
    if isinstance(f, EventuallyBounded):
        inner = expand_bounded(f.operand)
        return or_all(next_pow(t, inner) for t in range(f.lo, f.hi + 1))
    if isinstance(f, BoundedRelease):
        left = expand_bounded(f.left)
        right = expand_bounded(f.right)
        disjuncts = [left]
        for k in range(1, f.bound + 1):
            parts = [next_pow(j, right) for j in range(k)] + [next_pow(k, left)]
            disjuncts.append(and_all(parts))
        disjuncts.append(and_all(next_pow(j, right) for j in range(f.bound + 1)))
        return or_all(disjuncts)
    if isinstance(f, _UNARY):
        return type(f)(expand_bounded(f.operand))
    if isinstance(f, _BINARY):
        return type(f)(expand_bounded(f.left), expand_bounded(f.right))
    if isinstance(f, (Cstit, Dstit)):
        return type(f)(f.agent, expand_bounded_obligation(f.body))
    return f


def expand_bounded_obligation(ob: Obligation) -> Obligation:
    if isinstance(ob, Plain):
        return Plain(expand_bounded(ob.formula))
    if isinstance(ob, DstitOf):
        return DstitOf(ob.agent, expand_bounded_obligation(ob.body))
    if isinstance(ob, NegatedObligation):
        return NegatedObligation(expand_bounded_obligation(ob.body))
    raise TypeError(f"not an obligation: {type(ob).__name__}")


def nnf(f: Formula, negated: bool = False) -> Formula:
    """Negation normal form over atoms, X, U and R.

    Bounded operators must be expanded first; F and G normalize to
    ``true U .`` and ``false R .``.  Negation survives only on atoms.
    """
    if isinstance(f, Atom):
        return Not(f) if negated else f
    if isinstance(f, TrueFormula):
        return FALSE if negated else TRUE
    if isinstance(f, FalseFormula):
        return TRUE if negated else FALSE
    if isinstance(f, Not):
        return nnf(f.operand, not negated)
    if isinstance(f, And):
        parts = (nnf(f.left, negated), nnf(f.right, negated))
        return Or(*parts) if negated else And(*parts)
    if isinstance(f, Or):
        parts = (nnf(f.left, negated), nnf(f.right, negated))
        return And(*parts) if negated else Or(*parts)
    if isinstance(f, Implies):
        return nnf(Or(Not(f.left), f.right), negated)
    if isinstance(f, Next):
        return Next(nnf(f.operand, negated))
    if isinstance(f, Until):
        parts = (nnf(f.left, negated), nnf(f.right, negated))
        return Release(*parts) if negated else Until(*parts)
    if isinstance(f, Release):
        parts = (nnf(f.left, negated), nnf(f.right, negated))
        return Until(*parts) if negated else Release(*parts)
    if isinstance(f, Eventually):
        return nnf(Until(TRUE, f.operand), negated)
    if isinstance(f, Always):
        return nnf(Release(FALSE, f.operand), negated)
    raise GrammarError(f"cannot normalize {type(f).__name__}; expand bounded "
                       f"operators and strip quantifiers first",
                       production="nnf")


def rewrite_dstit_idempotent(ob: Obligation) -> Obligation:
    """Collapse stacked same-agent dstits.

    ``[a dstit: [a dstit: A]]`` collapses to ``[a dstit: A]`` and the
    refrain-from-refraining form ``[a dstit: ![a dstit: ![a dstit: A]]]``
    collapses to ``[a dstit: A]``; different agents are left alone.
    """
    if isinstance(ob, Plain):
        return ob
    if isinstance(ob, NegatedObligation):
        return NegatedObligation(rewrite_dstit_idempotent(ob.body))
    if isinstance(ob, DstitOf):
        body = rewrite_dstit_idempotent(ob.body)
        if isinstance(body, DstitOf) and body.agent == ob.agent:
            return body
        if (isinstance(body, NegatedObligation)
                and isinstance(body.body, DstitOf)
                and body.body.agent == ob.agent
                and isinstance(body.body.body, NegatedObligation)
                and isinstance(body.body.body.body, DstitOf)
                and body.body.body.body.agent == ob.agent):
            return body.body.body.body
        return DstitOf(ob.agent, body)
    raise TypeError(f"not an obligation: {type(ob).__name__}")


def normalize_obligation(ob: Obligation) -> Obligation:
    """Fold negations (double negation, negated plain formulas) and apply
    the dstit collapses, to fixpoint."""
    def strip(a):
        if isinstance(a, NegatedObligation):
            inner = strip(a.body)
            if isinstance(inner, NegatedObligation):
                return inner.body
            if isinstance(inner, Plain):
                if isinstance(inner.formula, Not):
                    return Plain(inner.formula.operand)
                return Plain(Not(inner.formula))
            return NegatedObligation(inner)
        if isinstance(a, DstitOf):
            return DstitOf(a.agent, strip(a.body))
        return a

    previous = None
    while previous != ob:
        previous = ob
        ob = rewrite_dstit_idempotent(strip(ob))
    return ob
