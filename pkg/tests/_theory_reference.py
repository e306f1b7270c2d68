"""Literal re-evaluation of the rate constants, budgets and feasibility
conditions, sharing no code with the package's theory module.

Each function spells its formula out in one expression, in display
order, so a transcription mistake on either side shows up as a mismatch
on random parameter tuples.  Integer-valued quantities (epoch counts)
are recomputed by an independent strategy (direct powers instead of a
running product).
"""

from __future__ import annotations


def rho_single(eta, L, gamma, K, s):
    return 1.0 / (eta * (1.0 - 4.0 * L * eta) * K * gamma) + (
        4.0 * L * eta * (1.0 + 1.0 / s)
    ) / (1.0 - 4.0 * L * eta)


def rho_batch(eta, L, gamma, K, s, q):
    return q / (eta * (q - 4.0 * L * eta) * K * gamma) + (
        4.0 * L * eta * (s + q)
    ) / ((q - 4.0 * L * eta) * s)


def rho_block(eta, L, gamma, K, s, p, b):
    return 1.0 / (eta * (1.0 - 4.0 * L * eta * (p / b)) * K * gamma) + (
        4.0 * L * eta * (p / b + 1.0 / s)
    ) / (1.0 - 4.0 * L * eta * (p / b))


def kappa_single(eta, L, s, K, zeta, xi, rho):
    return (
        (1.0 / (1.0 - 4.0 * L * eta))
        * (2.0 * eta / s + zeta / K)
        * max(xi, xi * xi)
        * (1.0 / (1.0 - rho))
    )


def kappa_batch(eta, L, s, K, zeta, xi, rho, q):
    return (
        (q / (q - 4.0 * L * eta))
        * (2.0 * eta / s + zeta / K)
        * max(xi, xi * xi)
        * (1.0 / (1.0 - rho))
    )


def kappa_block(eta, L, s, K, zeta, xi, rho, p, b):
    return (
        (1.0 / (1.0 - 4.0 * L * eta * (p / b)))
        * (2.0 * eta / s + zeta / K)
        * max(xi, xi * xi)
        * (1.0 / (1.0 - rho))
    )


def epochs_by_powers(rho, phi0, eps):
    """Smallest T >= 0 with rho**T * phi0 <= eps / 2, each power
    evaluated from scratch."""
    t = 0
    while rho**t * phi0 > eps / 2.0:
        t += 1
    return t


def budget_exact(K, s, q, T):
    return T * (s + 2 * q * (K - 1))


def budget_asymptotic(K, s, q, T):
    return T * (2 * q * K + s)


def conditions(eta, L, gamma, K, s, q):
    """C1 and C2 evaluated as bare inequalities."""
    c1 = eta < q / (4.0 * L) and eta <= (q * s) / (4.0 * L * (3.0 * s + 2.0 * q))
    c2 = eta < q / (4.0 * L) and K > (2.0 * q) / (
        gamma * eta * (q - 4.0 * L * eta)
    )
    return c1, c2
