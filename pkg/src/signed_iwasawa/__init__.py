"""Exact p-adic tools for signed Iwasawa theory at supersingular primes.

Submodules:

* ``dvr``: DVRs at finite precision, valuations, Smith normal form.
* ``cyclotomic``: the fields Q_p(mu_{p^n}), Galois action and traces.
* ``iwasawa``: truncated power series over O, omega_n, Phi_n, mu/lambda.
* ``formal_group``: Euler data, logarithms, Honda checks, group laws.
* ``local_points``: logarithms of the points c_n, d_n and their traces.
* ``coleman``: the logarithmic matrices H_n and their identities.
* ``kobayashi``: Kobayashi ranks of projective systems.
* ``growth``: the F_v table and Sha growth increments.
"""

from .dvr import INF, DvrElement, DvrRing, ElementaryDivisors, make_ring, smith_normal_form, valuation
from .errors import InputError, NotExact, NotFinite, NotInField, PrecisionExhausted

__version__ = "0.1.0"

__all__ = [
    "INF",
    "DvrElement",
    "DvrRing",
    "ElementaryDivisors",
    "make_ring",
    "smith_normal_form",
    "valuation",
    "InputError",
    "NotExact",
    "NotFinite",
    "NotInField",
    "PrecisionExhausted",
]
