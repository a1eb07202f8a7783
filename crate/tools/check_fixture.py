#!/usr/bin/env python3
"""Independent cross-check of the reference fixture arithmetic.

Recomputes the decrypt and encrypt pipelines from fixtures/ with Python's
exact fractions, with no code shared with the Rust implementation:

    value(ciphertext, base 36)  ->  (v + 111) * 6 / (149/36)  ->  base 62

where 111, 6 and 149/36 are the constants "33", "6" and "4.5" read as
base-36 numerals. Prints the recovered plaintext and verifies that
re-encrypting reproduces the ciphertext byte for byte.

Usage: python3 tools/check_fixture.py
"""

import sys
from fractions import Fraction
from pathlib import Path

B36 = "0123456789abcdefghijklmnopqrstuvwxyz"
B62 = B36 + "ABCDEFGHIJKLMNOPQRSTUVWXYZ"


def parse(text: str, alphabet: str) -> Fraction:
    radix = len(alphabet)
    negative = text.startswith("-")
    if negative:
        text = text[1:]
    int_part, _, frac_part = text.partition(".")
    value = Fraction(0)
    for glyph in int_part:
        value = value * radix + alphabet.index(glyph)
    scale = Fraction(1)
    for glyph in frac_part:
        scale /= radix
        value += alphabet.index(glyph) * scale
    return -value if negative else value


def render(value: Fraction, alphabet: str, precision: int = 64) -> str:
    radix = len(alphabet)
    sign = "-" if value < 0 else ""
    value = abs(value)
    int_part = int(value)
    rem = value - int_part
    digits = alphabet[0] if int_part == 0 else ""
    while int_part > 0:
        digits = alphabet[int_part % radix] + digits
        int_part //= radix
    frac = ""
    for _ in range(precision):
        if rem == 0:
            break
        rem *= radix
        digit = int(rem)
        frac += alphabet[digit]
        rem -= digit
    if rem != 0:
        raise SystemExit("expansion did not terminate within precision")
    frac = frac.rstrip(alphabet[0])
    return sign + digits + ("." + frac if frac else "")


def main() -> int:
    fixtures = Path(__file__).resolve().parent.parent / "fixtures"
    ciphertext = (fixtures / "ciphertext.txt").read_text().strip()

    c = parse(ciphertext, B36)
    plus_33 = parse("33", B36)      # 111
    times_6 = parse("6", B36)       # 6
    div_45 = parse("4.5", B36)      # 149/36
    plain_value = (c + plus_33) * times_6 / div_45

    if plain_value.denominator != 1:
        print("FAIL: decrypted value is not an integer", file=sys.stderr)
        return 1
    plaintext = render(plain_value, B62)
    print(f"plaintext value: {plain_value}")
    print(f"plaintext (base 62): {plaintext}")

    re_encrypted = render(((parse(plaintext, B62) * div_45) / times_6) - plus_33, B36)
    if re_encrypted != ciphertext:
        print("FAIL: re-encryption does not reproduce the ciphertext", file=sys.stderr)
        print(f"  got:  {re_encrypted}", file=sys.stderr)
        print(f"  want: {ciphertext}", file=sys.stderr)
        return 1
    print("roundtrip OK")
    return 0


if __name__ == "__main__":
    sys.exit(main())
