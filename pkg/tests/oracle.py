"""Slow, independent reference for the indexed hash.

Works on Python strings of '0'/'1' and touches nothing from the package,
so agreement with it is evidence rather than a tautology.
"""

import hashlib


def bits_of_int(v, width):
    return format(v, f"0{width}b")


def mask(key, i, b):
    raw = hashlib.shake_256(b"PVC-PRNG" + key + i.to_bytes(4, "big")).digest((b + 7) // 8)
    return "".join(format(byte, "08b") for byte in raw)[:b]


def d1(i_bits, block):
    return sum(a == "1" and c == "1" for a, c in zip(i_bits, block)) % 2


def d2(i_bits, block):
    y = ["1" if a != c else "0" for a, c in zip(i_bits, block)]
    return sum(y[k] == "1" and y[k + 1] == "1" for k in range(0, len(y), 2)) % 2


def digest_string(construction, n, b, i, x, key=bytes(16)):
    x = x + "0" * (n - len(x))
    if construction == 0:
        return x
    x = x + "0" * (-len(x) % b)
    blocks = [x[k:k + b] for k in range(0, len(x), b)]
    if construction == 1:
        return "".join(str(d1(bits_of_int(i, b), blk)) for blk in blocks)
    key_bits = bits_of_int(i, b) if construction == 2 else mask(key, i, b)
    return "".join(str(d2(key_bits, blk)) for blk in blocks)


def pack(bit_string):
    s = bit_string + "0" * (-len(bit_string) % 8)
    return bytes(int(s[k:k + 8], 2) for k in range(0, len(s), 8))


def H(construction, n, b, i, r, x, key=bytes(16)):
    dig = digest_string(construction, n, b, i, x, key)
    pre = key + r + i.to_bytes(4, "big") + pack(dig) + len(dig).to_bytes(8, "big")
    return hashlib.sha3_256(pre).hexdigest()


def index_count(q_num, q_den, sigma, b):
    # |I| = ceil((sigma+b+1) / (2 (q-1/2)^2)) in integers
    num = (sigma + b + 1) * 4 * q_den * q_den
    den = 2 * (2 * q_num - q_den) ** 2
    return -(-num // den)
