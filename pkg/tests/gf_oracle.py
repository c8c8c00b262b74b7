"""Slow, independent GF(2^8) and polynomial reference arithmetic.

Everything here is computed the obvious way: multiplication by
shift-and-xor reduction, inverses by exhaustive search, interpolation by
building the Lagrange polynomial coefficient-by-coefficient and then
evaluating it with Horner-free brute force. No lookup tables, and no
imports from the package under test; tests compare the fast codec
against these functions.
"""

REDUCTION = 0x11D


def mul(a: int, b: int) -> int:
    """Carry-less product reduced modulo x^8 + x^4 + x^3 + x^2 + 1."""
    acc = 0
    for bit in range(8):
        if (b >> bit) & 1:
            acc ^= a << bit
    for bit in range(15, 7, -1):
        if (acc >> bit) & 1:
            acc ^= REDUCTION << (bit - 8)
    return acc


def inv(a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("0 has no inverse")
    for b in range(1, 256):
        if mul(a, b) == 1:
            return b
    raise AssertionError("unreachable in a field")


def poly_add(p: list[int], q: list[int]) -> list[int]:
    size = max(len(p), len(q))
    p = list(p) + [0] * (size - len(p))
    q = list(q) + [0] * (size - len(q))
    return [x ^ y for x, y in zip(p, q)]


def poly_scale(p: list[int], c: int) -> list[int]:
    return [mul(coeff, c) for coeff in p]


def poly_mul(p: list[int], q: list[int]) -> list[int]:
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] ^= mul(a, b)
    return out


def poly_eval(p: list[int], x: int) -> int:
    acc = 0
    power = 1
    for coeff in p:
        acc ^= mul(coeff, power)
        power = mul(power, x)
    return acc


def lagrange_poly(points: list[tuple[int, int]]) -> list[int]:
    """Coefficients (ascending powers) of the interpolant through points."""
    poly = [0]
    for i, (xi, yi) in enumerate(points):
        basis = [1]
        denom = 1
        for j, (xj, _) in enumerate(points):
            if i == j:
                continue
            # (x - xj) == (x + xj): characteristic 2
            basis = poly_mul(basis, [xj, 1])
            denom = mul(denom, xi ^ xj)
        poly = poly_add(poly, poly_scale(basis, mul(yi, inv(denom))))
    return poly


def codeword(n: int, k: int, data: list[int]) -> list[int]:
    """Evaluations at 1..n of the interpolant through (1..k, data)."""
    points = list(zip(range(1, k + 1), data))
    poly = lagrange_poly(points)
    return [poly_eval(poly, x) for x in range(1, n + 1)]
