"""Small regex-driven tokenizer shared by the text front-ends."""

from dataclasses import dataclass

EOF = "eof"


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text, rules, error):
    """Split ``text`` into tokens.

    ``rules`` is an ordered list of ``(kind, compiled_regex)`` pairs tried at
    each position (put longer operators before their prefixes).  ``error`` is
    a callable ``(line, col, message) -> Exception``.  Whitespace and ``//``
    line comments are skipped.  A trailing EOF token is always appended.
    """
    out = []
    pos, line, col = 0, 1, 1
    n = len(text)
    while pos < n:
        ch = text[pos]
        if ch == "\n":
            pos += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            pos += 1
            col += 1
            continue
        if text.startswith("//", pos):
            nl = text.find("\n", pos)
            pos = n if nl < 0 else nl
            continue
        for kind, rx in rules:
            m = rx.match(text, pos)
            if m:
                t = m.group()
                out.append(Token(kind, t, line, col))
                pos = m.end()
                col += len(t)
                break
        else:
            raise error(line, col, f"unexpected character {ch!r}")
    out.append(Token(EOF, "", line, col))
    return out
