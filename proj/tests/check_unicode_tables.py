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
"""Checks the generated code point tables against Python's unicodedata."""

import re
import sys
import unicodedata


def parse(text, name):
    body = re.search(name + r"\[\] = \{(.*?)\};", text, re.S).group(1)
    covered = set()
    for lo, hi in re.findall(r"\{0x([0-9A-F]+), 0x([0-9A-F]+)\}", body):
        covered.update(range(int(lo, 16), int(hi, 16) + 1))
    return covered


def main(path):
    text = open(path, encoding="utf-8").read()
    version = re.search(r"Unicode (\S+)", text).group(1)
    if version != unicodedata.unidata_version:
        print(f"skipping: tables are Unicode {version}, Python has {unicodedata.unidata_version}")
        return 0
    checks = {
        "kCombiningMarks": lambda c: unicodedata.category(c) in ("Mn", "Me"),
        "kPunctuation": lambda c: unicodedata.category(c).startswith("P"),
    }
    failed = 0
    for name, pred in checks.items():
        table = parse(text, name)
        expected = {cp for cp in range(0x110000) if not 0xD800 <= cp <= 0xDFFF and pred(chr(cp))}
        if table != expected:
            diff = sorted(table ^ expected)[:10]
            print(f"{name}: {len(table ^ expected)} code points differ, e.g. {[hex(d) for d in diff]}")
            failed += 1
        else:
            print(f"{name}: {len(table)} code points match")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1]))
