"""Built-in code constructions, runnable with no external files."""
from __future__ import annotations

from fractions import Fraction

from .numfield import Automorphism, cyclotomic_real, quadratic
from .radicals import RadicalTower, mat_zeros
from .stcode import (STCode, SimoTower, alamouti, build_counterexample_code, build_mimo_code,
                     build_simo_code, code_from_exact, mac_user_weights)


def example1() -> STCode:
    # The residue test at q = 3 cannot certify this algebra: -2/sqrt5 reduces to a
    # square in F_9. It is kept as a worked example behind an explicit override.
    K = quadratic(5)
    r5 = K.gen
    tower = SimoTower(K, Automorphism(K, -r5, "eta"), m=1, a=-3, gamma=K([0, Fraction(-2, 5)]),
                      certify_q=3, allow_unverified=True,
                      override_reason="residue test at q=3 inconclusive (gamma is a square in F_9)",
                      label="example1")
    return build_simo_code(2, tower)


def example2() -> STCode:
    K = cyclotomic_real(7)
    xi = K.gen
    tower = SimoTower(K, Automorphism(K, xi * xi - 2, "eta"), m=7, a=-1, gamma=K(-11),
                      certify_q=11, label="example2")
    return build_simo_code(3, tower)


def simo_n2() -> STCode:
    """Single-antenna two-relay code with rational gamma over Q(sqrt5, sqrt-2)."""
    K = quadratic(5)
    tower = SimoTower(K, Automorphism(K, -K.gen, "eta"), m=2, a=-11, gamma=K(-1),
                      certify_q=11, label="simo_n2")
    return build_simo_code(2, tower)


def example3_code1() -> STCode:
    K = cyclotomic_real(7)
    xi = K.gen
    return build_mimo_code(7, -3, K(-1), 1 - xi, label="example3-code1")


def example3_code2() -> STCode:
    K = cyclotomic_real(7)
    xi = K.gen
    return build_mimo_code(7, -5, -2 / (1 + xi), 3 * (1 - xi), label="example3-code2")


def relay5() -> STCode:
    K = cyclotomic_real(11)
    return build_mimo_code(11, -3, K(-1), 1 - K.gen, label="relay5")


def mimo_p7() -> STCode:
    """Two-antenna three-relay code with rational gamma and theta."""
    K = cyclotomic_real(7)
    return build_mimo_code(7, -3, K(-1), K(-7), label="mimo_p7")


def example5() -> STCode:
    return build_counterexample_code()


def mac_user_codes(K_users: int = 2, m: int = 2):
    """Per-user exact weights [X, tau(X)] for the two-user quaternion MAC example."""
    base = quadratic(5)
    r5 = base.gen
    T = RadicalTower(base, [-1, -2, -3, r5 * Fraction(2, 5)], ["i", "r2", "a", "s"])
    i, r2, sa, s = T.radical("i"), T.radical("r2"), T.radical("a"), T.radical("s")
    one, zero = T.elem(1), T.elem(0)
    half = Fraction(1, 2)
    omega = T.elem(half) + sa * half
    sig = lambda e: e.flip("a")
    tau = lambda e: e.flip("i")
    basis = [one, i, r2, i * r2]

    def X(pos, b):
        x = [zero] * 4
        x[pos] = b
        c, cs = x[0] + x[1] * omega, x[0] + x[1] * sig(omega)
        d, ds = x[2] + x[3] * omega, x[2] + x[3] * sig(omega)
        return [[c, -(s * ds)], [s * d, cs]]

    weights = [X(pos, b) for pos in range(4) for b in basis]
    return T, mac_user_weights(T, weights, tau, m)


def mac_example() -> STCode:
    from .chansim import MacScenario, mac_assemble
    T, user = mac_user_codes()
    users = [code_from_exact(T, user, {"construction": "mac-user", "user": u}) for u in range(2)]
    return mac_assemble(MacScenario(K=2, n_s=2, n_d=4, m=2), users)


PRESETS = {
    "alamouti": alamouti,
    "example1": example1,
    "example2": example2,
    "example3-code1": example3_code1,
    "example3-code2": example3_code2,
    "relay5": relay5,
    "5-relay": relay5,
    "example5": example5,
    "mac_example": mac_example,
    "simo_n2": simo_n2,
    "mimo_p7": mimo_p7,
}

EXPECTED_EXPONENTS = {
    "alamouti": (1, 4), "example1": (10, 16), "example2": (15, 24),
    "example3-code1": (12, 24), "example3-code2": (6, 24), "relay5": (20, 40),
    "example5": (30, 32),
}


def build(name: str) -> STCode:
    try:
        fn = PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return fn()
