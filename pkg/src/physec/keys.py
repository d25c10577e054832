"""Key file I/O.

Five lines, one generator each: bank lanes 0-3, then the header (sync)
generator. Each line holds ``gamma x0 y0`` as 16-digit hex fields; y0 is a
61-bit value, so its top three bits must be zero. Blank lines and ``#``
comments are ignored.
"""

from __future__ import annotations

from pathlib import Path

from .chaos import MASK61, ChaosError, GeneratorKey
from .cipher import CipherKey

FIELDS = ("gamma", "x0", "y0")


class KeyFileError(ValueError):
    pass


def parse_key_text(text: str) -> CipherKey:
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise KeyFileError(f"line {lineno}: expected 3 fields (gamma x0 y0), got {len(parts)}")
        vals = []
        for name, tok in zip(FIELDS, parts):
            if len(tok) != 16:
                raise KeyFileError(f"line {lineno}: field {name}: expected 16 hex digits, got {tok!r}")
            try:
                vals.append(int(tok, 16))
            except ValueError:
                raise KeyFileError(f"line {lineno}: field {name}: not hex: {tok!r}") from None
        if vals[2] > MASK61:
            raise KeyFileError(f"line {lineno}: field y0: top 3 bits must be zero")
        try:
            rows.append(GeneratorKey(*vals))
        except ChaosError as e:
            raise KeyFileError(f"line {lineno}: {e}") from None
    if len(rows) != 5:
        raise KeyFileError(f"expected 5 key lines, found {len(rows)}")
    return CipherKey(tuple(rows[:4]), rows[4])


def load_key(path) -> CipherKey:
    return parse_key_text(Path(path).read_text())


def format_key(key: CipherKey) -> str:
    return "".join(k.hexline() + "\n" for k in key.generator_keys())
