#!/usr/bin/env python3
"""Regenerates src/unicode_ranges.inc from the Python unicodedata database.

Emits sorted [lo, hi] codepoint ranges for the three character classes the
pre-tokenizer cares about: letters (L*), numbers (N*), and whitespace.
"""

import sys
import unicodedata

MAX_CP = 0x110000

# White_Space property members (PropList.txt); unicodedata exposes category
# only, so the non-Zs entries are listed explicitly.
WHITESPACE = set(
    [0x09, 0x0A, 0x0B, 0x0C, 0x0D, 0x20, 0x85, 0xA0, 0x1680, 0x2028, 0x2029, 0x202F, 0x205F, 0x3000]
    + list(range(0x2000, 0x200B))
)


def ranges(pred):
    out = []
    lo = None
    for cp in range(MAX_CP):
        if pred(cp):
            if lo is None:
                lo = cp
        elif lo is not None:
            out.append((lo, cp - 1))
            lo = None
    if lo is not None:
        out.append((lo, MAX_CP - 1))
    return out


def is_letter(cp):
    return unicodedata.category(chr(cp)).startswith("L")


def is_number(cp):
    return unicodedata.category(chr(cp)).startswith("N")


def is_space(cp):
    return cp in WHITESPACE or unicodedata.category(chr(cp)) == "Zs"


def emit(name, rs, f):
    f.write(f"inline constexpr uint32_t {name}[][2] = {{\n")
    for lo, hi in rs:
        f.write(f"    {{0x{lo:X}, 0x{hi:X}}},\n")
    f.write("};\n")
    f.write(f"inline constexpr size_t {name}_count = {len(rs)};\n\n")


def main(out_path):
    with open(out_path, "w") as f:
        f.write("// Generated by tests/fixtures/make_unicode_tables.py; do not edit.\n")
        f.write("#pragma once\n#include <cstdint>\n#include <cstddef>\n\n")
        f.write("namespace tops::detail {\n\n")
        emit("kLetterRanges", ranges(is_letter), f)
        emit("kNumberRanges", ranges(is_number), f)
        emit("kSpaceRanges", ranges(is_space), f)
        f.write("}  // namespace tops::detail\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "unicode_ranges.inc")
