#!/usr/bin/env python3
# Copyright 2026 The weaklabel Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Regenerates include/weaklabel/detail/unicode_tables.hpp from unicodedata."""

import sys
import unicodedata


def ranges(pred):
    out = []
    start = None
    for cp in range(0x110000):
        if 0xD800 <= cp <= 0xDFFF:
            hit = False
        else:
            hit = pred(chr(cp))
        if hit and start is None:
            start = cp
        elif not hit and start is not None:
            out.append((start, cp - 1))
            start = None
    if start is not None:
        out.append((start, 0x10FFFF))
    return out


def emit(name, rs):
    lines = [f"inline constexpr CodepointRange {name}[] = {{"]
    row = []
    for lo, hi in rs:
        row.append(f"{{0x{lo:04X}, 0x{hi:04X}}}")
        if len(row) == 4:
            lines.append("    " + ", ".join(row) + ",")
            row = []
    if row:
        lines.append("    " + ", ".join(row) + ",")
    lines.append("};")
    return "\n".join(lines)


def main():
    marks = ranges(lambda c: unicodedata.category(c) in ("Mn", "Me"))
    punct = ranges(lambda c: unicodedata.category(c).startswith("P"))
    out = [
        '// Copyright 2026 The weaklabel Authors.',
        '//',
        '// Licensed under the Apache License, Version 2.0 (the "License");',
        '// you may not use this file except in compliance with the License.',
        '// You may obtain a copy of the License at',
        '//',
        '//     http://www.apache.org/licenses/LICENSE-2.0',
        '//',
        '// Unless required by applicable law or agreed to in writing, software',
        '// distributed under the License is distributed on an "AS IS" BASIS,',
        '// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.',
        '// See the License for the specific language governing permissions and',
        '// limitations under the License.',
        "",
        "// Generated by tools/gen_unicode_tables.py -- do not edit.",
        f"// Unicode {unicodedata.unidata_version}",
        "#pragma once",
        "",
        "#include <cstdint>",
        "",
        "namespace weaklabel::detail {",
        "",
        "struct CodepointRange {",
        "  char32_t lo;",
        "  char32_t hi;",
        "};",
        "",
        "// General categories Mn and Me.",
        emit("kCombiningMarks", marks),
        "",
        "// General categories Pc, Pd, Ps, Pe, Pi, Pf, Po.",
        emit("kPunctuation", punct),
        "",
        "}  // namespace weaklabel::detail",
        "",
    ]
    sys.stdout.write("\n".join(out))


if __name__ == "__main__":
    main()
