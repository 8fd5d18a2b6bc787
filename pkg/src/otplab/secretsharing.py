"""One-time pad and Shamir (t, n)-threshold sharing with exact secrecy checks."""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass
from itertools import combinations, product
from typing import Iterable, NamedTuple, Sequence

from .strings import BitString, xor


@dataclass(frozen=True)
class OtpShares:
    share1: BitString
    share2: BitString

    def __post_init__(self):
        if self.share1.length != self.share2.length:
            raise ValueError("shares must have equal length")


def otp_split(secret: BitString, pad: BitString) -> OtpShares:
    return OtpShares(pad, xor(pad, secret))


def otp_share(secret: BitString, rng: random.Random) -> OtpShares:
    return otp_split(secret, BitString(rng.getrandbits(secret.length) if secret.length else 0, secret.length))


def otp_reconstruct(s: OtpShares) -> BitString:
    return xor(s.share1, s.share2)


class ShamirShare(NamedTuple):
    index: int
    value: int

    def __str__(self) -> str:
        return f"{self.index}:{self.value}"

    @classmethod
    def parse(cls, text: str) -> "ShamirShare":
        j, sep, v = text.partition(":")
        if not sep:
            raise ValueError(f"malformed share {text!r}; expected j:value")
        return cls(int(j), int(v))


class InconsistentSharesError(ValueError):
    pass


def is_prime(q: int) -> bool:
    if q < 2:
        return False
    f = 2
    while f * f <= q:
        if q % f == 0:
            return False
        f += 1
    return True


def _check_params(t: int, n: int, q: int) -> None:
    if not is_prime(q):
        raise ValueError(f"q = {q} is not prime")
    if q <= n:
        raise ValueError(f"q = {q} must exceed n = {n}")
    if not 1 <= t <= n:
        raise ValueError(f"need 1 <= t <= n, got t = {t}, n = {n}")


def poly_eval(coeffs: Sequence[int], x: int, q: int) -> int:
    y = 0
    for a in reversed(coeffs):
        y = (y * x + a) % q
    return y


def shamir_share(k: int, t: int, n: int, q: int, rng: random.Random | None = None,
                 coefficients: Sequence[int] | None = None) -> list[ShamirShare]:
    """Shares (j, P(j)) for j = 1..n with P(x) = k + a_1 x + ... + a_{t-1} x^{t-1} mod q."""
    _check_params(t, n, q)
    if not 0 <= k < q:
        raise ValueError(f"secret {k} outside 0..{q - 1}")
    if coefficients is None:
        rng = rng or random.Random()
        coefficients = [rng.randrange(q) for _ in range(t - 1)]
    elif len(coefficients) != t - 1:
        raise ValueError(f"need {t - 1} coefficients, got {len(coefficients)}")
    poly = [k, *(a % q for a in coefficients)]
    return [ShamirShare(j, poly_eval(poly, j, q)) for j in range(1, n + 1)]


def lagrange_basis_at(nodes: Sequence[int], i: int, x: int, q: int) -> int:
    """Value at ``x`` of the basis polynomial that is 1 at nodes[i] and 0 at the other nodes."""
    num = den = 1
    xi = nodes[i]
    for j, xj in enumerate(nodes):
        if j != i:
            num = num * (x - xj) % q
            den = den * (xi - xj) % q
    return num * pow(den, -1, q) % q


def interpolate_at(shares: Sequence[ShamirShare], x: int, q: int) -> int:
    nodes = [s.index for s in shares]
    return sum(s.value * lagrange_basis_at(nodes, i, x, q) for i, s in enumerate(shares)) % q


def shamir_reconstruct(shares: Iterable[ShamirShare], t: int, q: int) -> int:
    shares = [ShamirShare(*s) for s in shares]
    if not is_prime(q):
        raise ValueError(f"q = {q} is not prime")
    if len(shares) < t:
        raise ValueError(f"need at least {t} shares, got {len(shares)}")
    if len({s.index for s in shares}) != len(shares):
        raise ValueError("duplicate share indices")
    if any(s.index % q == 0 for s in shares):
        raise ValueError("share index 0 mod q would reveal the secret directly")
    base = shares[:t]
    for extra in shares[t:]:
        if interpolate_at(base, extra.index, q) != extra.value % q:
            raise InconsistentSharesError(
                f"share {extra} does not lie on the degree-{t - 1} polynomial through the first {t}"
            )
    return interpolate_at(base, 0, q)


@dataclass
class SecrecyReport:
    t: int
    n: int
    q: int
    subsets: int
    holds: bool
    first_leak: tuple | None = None  # (subset, secret) whose counts differ from secret 0

    def to_json(self) -> dict:
        return {"t": self.t, "n": self.n, "q": self.q, "subsets": self.subsets, "holds": self.holds,
                "first_leak": None if self.first_leak is None else
                {"players": list(self.first_leak[0]), "secret": self.first_leak[1]}}


def verify_secrecy(t: int, n: int, q: int, coefficient_values: Sequence[int] | None = None) -> SecrecyReport:
    """Exact perfect-secrecy check for every (t-1)-subset of players.

    For each secret, counts observed share tuples over every coefficient
    vector; secrecy holds when every secret gives the same counts.
    ``coefficient_values`` restricts the coefficient range (used to build
    deliberately broken schemes).
    """
    _check_params(t, n, q)
    values = range(q) if coefficient_values is None else list(coefficient_values)
    subsets = list(combinations(range(1, n + 1), t - 1))
    for subset in subsets:
        reference = None
        for k in range(q):
            counts = Counter()
            for coeffs in product(values, repeat=t - 1):
                poly = [k, *coeffs]
                counts[tuple(poly_eval(poly, j, q) for j in subset)] += 1
            if reference is None:
                reference = counts
            elif counts != reference:
                return SecrecyReport(t, n, q, len(subsets), False, (subset, k))
    return SecrecyReport(t, n, q, len(subsets), True)
