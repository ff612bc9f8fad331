"Tokenizer and grammar for scenario files."

import ast

from funcparserlib.lexer import LexerError, TokenSpec, make_tokenizer
from funcparserlib.parser import NoParseError, finished, forward_decl, many, maybe, skip, some

from otcells.scenario.exceptions import LexException, PrematureEndOfInput
from otcells.scenario.models import Entry, Float, Integer, Key, List, Section, String, Word

TOKEN_SPECS = [
    TokenSpec("comment", r"#[^\r\n]*"),
    TokenSpec("newline", r"\r?\n"),
    TokenSpec("space", r"[ \t]+"),
    TokenSpec("number", r"[-+]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][-+]?\d+)?"),
    TokenSpec("string", r'"(?:[^"\\\r\n]|\\.)*"'),
    TokenSpec("name", r"[A-Za-z_][A-Za-z0-9_\-]*(?:\.[A-Za-z0-9_\-]+)*"),
    TokenSpec("op", r"[\[\]=,]"),
]
IGNORED = frozenset({"comment", "space"})

_tokenizer = make_tokenizer(TOKEN_SPECS)


def tokenize(source, filename="<string>"):
    "Significant tokens of `source`, which always ends with a newline token."
    if not source.endswith("\n"):
        source += "\n"
    try:
        return [t for t in _tokenizer(source) if t.type not in IGNORED]
    except LexerError as e:
        raise LexException.from_place(
            f"unexpected character: {e.msg}", e.place, filename, source
        ) from None


def _type(name):
    return some(lambda t: t.type == name).named(name)


def _is_op(value):
    return some(lambda t: t.type == "op" and t.value == value).named(f"`{value}`")


def _op(value):
    return skip(_is_op(value))


def _number(tok):
    try:
        value = Integer(int(tok.value))
    except ValueError:
        value = Float(float(tok.value))
    return value.at(*tok.start)


def _string(tok):
    return String(ast.literal_eval(tok.value)).at(*tok.start)


def _word(tok):
    return Word(tok.value).at(*tok.start)


def _key(tok):
    return Key(tok.value).at(*tok.start)


def _list(parsed):
    bracket, items = parsed
    values = [] if items is None else [items[0], *items[1]]
    return List(values).at(*bracket.start)


def _grammar():
    value = forward_decl().named("value")
    items = maybe(value + many(_op(",") + value) + skip(maybe(_is_op(","))))
    brackets = _is_op("[") + items + _op("]") >> _list
    value.define(
        (_type("number") >> _number)
        | (_type("string") >> _string)
        | (_type("name") >> _word)
        | brackets
    )

    newline = skip(_type("newline"))
    section = (
        _op("[") + (_type("name") >> _key) + _op("]") + newline >> Section
    ).named("section header")
    entry = (
        (_type("name") >> _key) + _op("=") + value + newline
        >> (lambda kv: Entry(*kv))
    ).named("entry")
    blank = _type("newline") >> (lambda _: None)
    return many(section | entry | blank) + skip(finished)


DOCUMENT = _grammar()


def parse(source, filename="<string>"):
    """Parse `source` into its `Section` and `Entry` statements, in file
    order. Entry keys are joined to the section they appear in.

    Raises:
        ScenarioSyntaxError: with the line and column of the offending token.
    """
    tokens = tokenize(source, filename)
    try:
        statements = DOCUMENT.parse(tokens)
    except NoParseError as e:
        # The final token is the newline closing the last line.
        if e.state.max >= len(tokens) - 1:
            raise PrematureEndOfInput.from_place(
                "premature end of input",
                tokens[-1].start,
                filename,
                source,
            ) from None
        tok = tokens[e.state.max]
        raise LexException.from_place(
            f"unexpected {tok.type} {tok.value!r}", tok.start, filename, source
        ) from None

    out = []
    section = None
    for statement in statements:
        if statement is None:
            continue
        if isinstance(statement, Section):
            section = statement.name
            out.append(statement)
        else:
            if section is not None:
                statement.key = Key(f"{section}.{statement.key}").replace(statement.key)
            out.append(statement)
    return out


def read_file(path):
    "Parse the scenario file at `path`; also returns its source text."
    with open(path, encoding="utf-8") as f:
        source = f.read()
    return parse(source, str(path)), source
