#!/usr/bin/env python3
"""Smoke test for the basecrypt_py extension module.

Builds are not triggered here; compile the module first:

    cargo build -p basecrypt-py

then run

    python3 python/smoke_test.py

The script copies the produced cdylib next to itself under the importable
name if needed, imports it, and exercises each binding once, including
the bundled reference fixture.
"""

import shutil
import sys
from fractions import Fraction
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def ensure_importable() -> None:
    staging = ROOT / "target" / "python"
    staging.mkdir(parents=True, exist_ok=True)
    for profile in ("debug", "release"):
        built = ROOT / "target" / profile / "libbasecrypt_py.so"
        if built.exists():
            target = staging / "basecrypt_py.so"
            if not target.exists() or built.stat().st_mtime > target.stat().st_mtime:
                shutil.copy2(built, target)
            sys.path.insert(0, str(staging))
            return
    raise SystemExit("build the module first: cargo build -p basecrypt-py")


ensure_importable()
import basecrypt_py as bc  # noqa: E402


def check(name: str, condition: bool) -> None:
    status = "ok" if condition else "FAIL"
    print(f"{status:4} {name}")
    if not condition:
        raise SystemExit(1)


# alphabets and conversion
hex16 = bc.Alphabet.builtin(16)
dec10 = bc.Alphabet.builtin(10)
check("builtin roster", hex16.glyphs == "0123456789abcdef")
check("hex f parses to 15", bc.parse_value("f", hex16) == (15, 1))
check("hex f converts to 15", bc.convert("f", hex16, dec10) == ("15", "terminating"))

base7 = bc.Alphabet.builtin(7)
text, expansion = bc.convert("2.3", base7, dec10, precision=12)
check("base-7 2.3 repeats in decimal", text == "2.428571428571")
check("period 6 detected", "period 6" in expansion)
check(
    "classification matches",
    "period 6" in bc.classify_expansion(17, 7, 10),
)

# exact values round-trip through Python integers
num, den = bc.parse_value("-4.3", dec10)
check("exact fractions cross the boundary", Fraction(num, den) == Fraction(-43, 10))

# remapping
small = bc.Alphabet.inline("abcde")
moved = bc.Alphabet.inline("aebcd")
remap = bc.Remapping(small, moved)
check("deed remaps to cddc", remap.apply("deed") == "cddc")
check("remap inverts", remap.inverted().apply("cddc") == "deed")

# expressions: left-to-right, base-sensitive literals, inversion
b36 = bc.Alphabet.builtin(36)
chain = bc.Expr.parse("+33*6/4.5", b36)
check("implicit X head prints", str(chain) == "X+33*6/4.5")
check("left-to-right evaluation", bc.Expr.parse("X+2*3", dec10).evaluate((4, 1)) == (18, 1))
inverse = chain.invert()
check("chain inverts", str(inverse) == "X*4.5/6-33")
passed, report = chain.verify_inverse(inverse, trials=50, seed=7)
check(f"inverse verified ({report})", passed)

# the bundled worked example, end to end
decrypt = bc.Pipeline.from_file_text((ROOT / "fixtures" / "decrypt.pipeline").read_text())
encrypt = bc.Pipeline.from_file_text((ROOT / "fixtures" / "encrypt.pipeline").read_text())
ciphertext = (ROOT / "fixtures" / "ciphertext.txt").read_text().strip()
plaintext = decrypt.run(ciphertext)
print(f"     recovered plaintext: {plaintext}")
check("fixture pipelines invert", encrypt.invert() == decrypt)
check("fixture roundtrips", encrypt.run(plaintext) == ciphertext)

# segmented mode
schedule = """
precision 32
alphabet b10 builtin 10
alphabet b16 builtin 16
pipeline head
input b10
step convert b10 b16
pipeline tail
input b10
step eval b10 "X*7+11"
segment 5 head
segment 5 tail
"""
envelope = bc.run_segmented(schedule, "0304200567")
check("segmented roundtrip", bc.run_segmented_inverse(schedule, envelope) == "0304200567")

# a desk-scale crack
space = """
radices 10
templates affine
affine-ops +
constants max-num 99 max-den 1
max-steps 1
"""
matches, tested, elapsed = bc.crack_known_pair(space, "5", dec10, "12", dec10)
check(
    f"planted X+7 recovered ({tested} candidates, {elapsed:.3f}s)",
    [d for _, d in matches] == ['builtin:10 | eval "X+7"'],
)
check("cost report counts", "steps 1: 100" in bc.cost_report(space))

print("smoke test passed")
