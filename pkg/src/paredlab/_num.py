"""Scalar helpers that work on both Python floats/complex and mpmath numbers.

Most of the library runs in double precision.  Degenerating families push
points to within 1e-30 of the unit circle, so the geometry and map routines
accept mpmath values and dispatch on type.
"""

from __future__ import annotations

import cmath
import math

import mpmath

MP_TYPES = (mpmath.mpf, mpmath.mpc)


def is_mp(*xs) -> bool:
    return any(isinstance(x, MP_TYPES) for x in xs)


def conj(z):
    return z.conjugate()


def absval(z):
    return abs(z)


def sqrt(x):
    return mpmath.sqrt(x) if is_mp(x) else math.sqrt(x)


def atanh(x):
    return mpmath.atanh(x) if is_mp(x) else math.atanh(x)


def tanh(x):
    return mpmath.tanh(x) if is_mp(x) else math.tanh(x)


def log(x):
    return mpmath.log(x) if is_mp(x) else math.log(x)


def exp(x):
    return mpmath.exp(x) if is_mp(x) else math.exp(x)


def arg(z):
    if is_mp(z):
        return mpmath.arg(z)
    return cmath.phase(z)


def pi_like(x):
    return +mpmath.pi if is_mp(x) else math.pi


def expi(theta):
    """e^{i theta}."""
    if is_mp(theta):
        return mpmath.expj(theta)
    return cmath.exp(1j * theta)


def turn(theta):
    """e^{2 pi i theta} for an angle in turns."""
    if is_mp(theta):
        return mpmath.expjpi(2 * theta)
    return cmath.exp(2j * math.pi * theta)


def tocomplex(z):
    return complex(z)


def eps_of(x) -> float:
    """Machine epsilon of the representation carrying x."""
    if is_mp(x):
        return float(mpmath.mpf(2) ** (-mpmath.mp.prec))
    return 2.0 ** -52


def real_of(x):
    return x.real if isinstance(x, (complex, mpmath.mpc)) else x


def mpc(z):
    return mpmath.mpc(z)
