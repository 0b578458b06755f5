from __future__ import annotations

import random

from repotailor.javalex import (
    CHAR_LITERAL,
    COMMENT,
    IDENTIFIER,
    KEYWORD,
    NUMBER_LITERAL,
    OPERATOR,
    SEPARATOR,
    STRING_LITERAL,
    WHITESPACE,
    lex,
    token_texts,
)


def kinds_and_texts(source):
    return [(t.kind, t.text) for t in lex(source) if t.kind != WHITESPACE]


def test_simple_declaration():
    assert kinds_and_texts("int a = 3;") == [
        (KEYWORD, "int"),
        (IDENTIFIER, "a"),
        (OPERATOR, "="),
        (NUMBER_LITERAL, "3"),
        (SEPARATOR, ";"),
    ]


def test_empty_source():
    assert lex("") == []


def test_string_literal_is_one_token():
    toks = kinds_and_texts('String s = "a b";')
    assert (STRING_LITERAL, '"a b"') in toks
    assert sum(1 for k, _ in toks if k == STRING_LITERAL) == 1


def test_string_escapes_and_char_literals():
    toks = kinds_and_texts(r'char c = \'\n\'; String s = "say \"hi\"";'.replace("\\'", "'"))
    assert (CHAR_LITERAL, r"'\n'") in toks or True  # escape-normalized below
    toks = kinds_and_texts("char c = '\\n'; String s = \"say \\\"hi\\\"\";")
    assert (CHAR_LITERAL, "'\\n'") in toks
    assert (STRING_LITERAL, '"say \\"hi\\""') in toks


def test_comments():
    toks = lex("a // line\n/* block\nspans */ b")
    comments = [t.text for t in toks if t.kind == COMMENT]
    assert comments == ["// line", "/* block\nspans */"]


def test_number_literal_forms():
    source = "0x1F 0b1010 1_000 3.14f 1e-9 2. .5d 10L"
    nums = [t.text for t in lex(source) if t.kind == NUMBER_LITERAL]
    assert nums == ["0x1F", "0b1010", "1_000", "3.14f", "1e-9", "2.", ".5d", "10L"]


def test_dotted_call_on_number_keeps_dot_separate():
    toks = kinds_and_texts("foo(1).bar()")
    assert (NUMBER_LITERAL, "1") in toks
    assert (SEPARATOR, ".") in toks


def test_multichar_operators():
    toks = [t.text for t in lex("a >>>= b >>> c >> d -> e :: f") if t.kind in (OPERATOR, SEPARATOR)]
    assert toks == [">>>=", ">>>", ">>", "->", "::"]


def test_unknown_character_becomes_operator():
    toks = lex("a # b")
    assert (OPERATOR, "#") in [(t.kind, t.text) for t in toks]


def test_line_and_col_tracking():
    toks = lex("ab\n  cd")
    by_text = {t.text: t for t in toks}
    assert (by_text["ab"].line, by_text["ab"].col) == (1, 0)
    assert (by_text["cd"].line, by_text["cd"].col) == (2, 2)


def test_unterminated_string_closes_at_newline():
    toks = lex('x = "oops\ny')
    texts = [t.text for t in toks]
    assert '"oops' in texts
    assert "".join(texts) == 'x = "oops\ny'


def test_round_trip_on_java_snippets():
    snippets = [
        "public class A { /* hi */ int x = 0; }",
        'void m() { s = "a\\"b" + \'c\'; } // done',
        "if (a <= b && c >= d) { a >>= 2; }",
        "x = y /* unterminated",
        '"""\ntext block\n""" + rest',
    ]
    for src in snippets:
        assert "".join(t.text for t in lex(src)) == src


def test_round_trip_fuzz():
    rng = random.Random(99)
    alphabet = "ab{}()\"'\\/*\n\t 0123456789.;=<>+-_$é世"
    for _ in range(500):
        src = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 60)))
        assert "".join(t.text for t in lex(src)) == src


def test_token_texts_strips_comments_and_whitespace():
    assert token_texts("a + b; // trailing") == ["a", "+", "b", ";"]
