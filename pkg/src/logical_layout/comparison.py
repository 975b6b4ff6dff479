"""
Comparison operators of rule conditions.

Every operator propagates the no-data value None: if any operand is None the result is None, which rule evaluation
treats as a failed condition.
"""
import math

import numpy as np


def _is_number(x):
    return isinstance(x, (int, float, np.integer, np.floating)) and not isinstance(x, (bool, np.bool_))


def eq(x, y, delta=None, case_sensitive=True):
    """
    Compares whether `x` is equal to `y`.

    Parameters
    ----------
    x : float or int or str or bool
        First operand.
    y : float or int or str or bool
        Second operand.
    delta : float, optional
        Only applicable for comparing two numbers: tolerance of the comparison.
    case_sensitive : bool, optional
        Only applicable for comparing two strings. Case sensitive comparison can be disabled by setting this
        parameter to False.

    Returns
    -------
    bool :
        True if `x` is equal to `y`, None if any operand is None, otherwise False.

    """
    if x is None or y is None:
        return None

    if _is_number(x) and _is_number(y):
        if delta is not None:
            return bool(abs(x - y) <= delta)
        return bool(x == y)
    elif isinstance(x, str) and isinstance(y, str):
        if case_sensitive:
            return x == y
        return x.lower() == y.lower()
    elif isinstance(x, (bool, np.bool_)) and isinstance(y, (bool, np.bool_)):
        return bool(x) == bool(y)
    else:
        return False


def neq(x, y, delta=None, case_sensitive=True):
    """ Negation of `eq`; None if any operand is None. """
    result = eq(x, y, delta=delta, case_sensitive=case_sensitive)
    return None if result is None else not result


def _ordered(x, y, op):
    if x is None or y is None:
        return None
    if not (_is_number(x) and _is_number(y)):
        return False
    if math.isnan(x) or math.isnan(y):
        return False
    return bool(op(x, y))


def gt(x, y):
    """ True if `x` is strictly greater than `y`; False for non-numeric operands, None if any operand is None. """
    return _ordered(x, y, lambda a, b: a > b)


def gte(x, y):
    """ True if `x` is greater than or equal to `y`. """
    return _ordered(x, y, lambda a, b: a >= b)


def lt(x, y):
    """ True if `x` is strictly lower than `y`. """
    return _ordered(x, y, lambda a, b: a < b)


def lte(x, y):
    """ True if `x` is lower than or equal to `y`. """
    return _ordered(x, y, lambda a, b: a <= b)


def between(x, min, max):
    """
    Checks whether `x` lies in the half-open interval (`min`, `max`], the interval form of discretised features.
    An unbounded side is given as -inf or inf. `min` must be lower than `max`, otherwise the result is always False.

    Parameters
    ----------
    x : float or int
        The value to check.
    min : float
        Lower boundary (exclusive).
    max : float
        Upper boundary (inclusive).

    Returns
    -------
    bool :
        True if `x` is in the interval, None if any operand is None, otherwise False.

    """
    if x is None or min is None or max is None:
        return None
    if lte(max, min):
        return False
    return gt(x, min) and lte(x, max)


def is_true(x):
    """ True if `x` is a true boolean, None for None. """
    return None if x is None else bool(x)


def is_false(x):
    return None if x is None else not bool(x)


# Operator symbols of the rule file grammar.
COMPARATORS = {
    "<": lt,
    "<=": lte,
    ">": gt,
    ">=": gte,
    "=": eq,
    "!=": neq,
}
