"""Bundled example diagrams and parameterized Cartan matrix templates."""
from __future__ import annotations

import math
from importlib import resources

import numpy as np

from .cartan import CartanMatrix, cartan_from_json
from .coxeter import CoxeterMatrix, parse_coxeter

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)

NAMES = ("ex31", "ex91", "ex92", "ex93", "fig5")


def data_text(filename: str) -> str:
    return resources.files("coxcc").joinpath("data", filename).read_text()


def coxeter(name: str) -> CoxeterMatrix:
    if name == "ex31":
        return cartan("ex31").coxeter
    return parse_coxeter(data_text(f"{name}.cox"))


def cartan(name: str, **params) -> CartanMatrix:
    """Cartan matrix of a bundled example.

    ``ex91`` takes x, y, z, u; ``ex92`` and ``ex93`` take x, y.  Missing
    parameters default to 1.
    """
    if name in ("ex31", "fig5"):
        if params:
            raise ValueError(f"{name} has no parameters")
        return cartan_from_json(data_text(f"{name}.cartan"))
    if name == "ex91":
        return ex91_cartan(*(params.get(k, 1.0) for k in "xyzu"))
    if name == "ex92":
        return ex92_cartan(params.get("x", 1.0), params.get("y", 1.0))
    if name == "ex93":
        return ex93_cartan(params.get("x", 1.0), params.get("y", 1.0))
    raise KeyError(f"unknown example {name!r}")


def ex91_cartan(x, y, z, u) -> CartanMatrix:
    a = np.array([[2, -2 * x, 0, 0, 0],
                  [-2, 2, -2 * y, 0, 0],
                  [0, -2, 2, -2 * z, 0],
                  [0, 0, -2, 2, -2 * u],
                  [0, 0, 0, -2, 2]], float)
    return CartanMatrix(a, coxeter("ex91"))


def ex91_det(x, y, z, u) -> float:
    return 32 * (x * u + x * z + y * u - x - y - z - u + 1)


def ex92_cartan(x, y) -> CartanMatrix:
    s = SQRT3
    a = np.array([[2, -s, 0, -s * x, 0, 0],
                  [-s, 2, -s, 0, 0, 0],
                  [0, -s, 2, -s, 0, 0],
                  [-s / x, 0, -s, 2, -2 * y, 0],
                  [0, 0, 0, -2 * y, 2, -s],
                  [0, 0, 0, 0, -s, 2]], float)
    return CartanMatrix(a, coxeter("ex92"))


def ex92_det(x, y) -> float:
    return 32 * y * y - 9 * (x + 1 / x) - 14


def ex92_minor11(y) -> float:
    return -4 * (2 * y * y + 1)


def ex92_curve_y(x) -> float:
    """The y > 0 with ex92_det(x, y) = 0."""
    return math.sqrt((9 * (x + 1 / x) + 14) / 32)


def ex93_cartan(x, y) -> CartanMatrix:
    r = SQRT2
    a = np.array([[2, -1, -1, -r],
                  [-1, 2, -x, 0],
                  [-1, -1 / x, 2, -y],
                  [-r, 0, -1 / y, 2]], float)
    return CartanMatrix(a, coxeter("ex93"))


def ex93_det(x, y) -> float:
    r = SQRT2
    return -(2 * (x + 1 / x) + 2 * r * (y + 1 / y) + r * (x * y + 1 / (x * y)) + 5)


def minor(a: np.ndarray, i: int, j: int) -> float:
    """Determinant with row i and column j removed (1-based)."""
    return float(np.linalg.det(np.delete(np.delete(a, i - 1, 0), j - 1, 1)))
