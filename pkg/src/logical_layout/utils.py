import functools
import os
import tempfile
from typing import Callable

import numpy as np


########################################################################################################################
# Statistics
########################################################################################################################

def median(values, empty=0.0):
    """
    The statistical median of a sequence of numbers. For an even number of values the median is the arithmetic mean
    of the two middle values.

    Parameters
    ----------
    values : list or np.ndarray
        Numbers to compute the median of.
    empty : float, optional
        Value returned for an empty sequence (default is 0.0, so that degenerate blocks yield all-zero features).

    Returns
    -------
    float :
        The median.

    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return float(empty)
    return float(np.median(values))


def quantile(values, probability, empty=0.0):
    """
    Computes a quantile by linear interpolation between the two closest order statistics.

    Parameters
    ----------
    values : list or np.ndarray
        Numbers to compute the quantile of.
    probability : float
        Probability between 0 and 1, e.g. 0.75 for the third quartile.
    empty : float, optional
        Value returned for an empty sequence (default is 0.0).

    Returns
    -------
    float :
        The interpolated quantile.

    """
    if not 0 <= probability <= 1:
        raise ValueError("Quantile probabilities must be between 0 and 1, got {}.".format(probability))
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return float(empty)
    return float(np.percentile(values, probability * 100.))


########################################################################################################################
# Output writers
########################################################################################################################

# Registry of output writers (dict mapping format name to writer function).
_writers = {}


def writer(fmt):
    """
    Decorator registering a function as the writer of the output format `fmt`.

    Parameters
    ----------
    fmt : str
        Format name, e.g. "alto", "json" or "csv".

    Returns
    -------
    callable :
        Decorator returning the function unchanged.

    """
    def register(fun):
        @functools.wraps(fun)
        def fun_wrapper(*args, **kwargs):
            return fun(*args, **kwargs)

        _writers[fmt] = fun_wrapper
        return fun_wrapper

    return register


def has_writer(fmt: str) -> bool:
    """
    Check if a writer is registered for the given format.

    Parameters
    ----------
    fmt : str
           Format name

    Returns
    -------
    True if the format can be written, False otherwise
    """
    return fmt in _writers


def get_writer(fmt: str) -> Callable:
    """
    Get the writer function registered for the given format.

    Parameters
    ----------
    fmt : str
           Format name

    Returns
    -------
    Python function (callable) writing that format
    """
    return _writers[fmt]


def writer_formats():
    return sorted(_writers)


########################################################################################################################
# Files
########################################################################################################################

def atomic_write(path, data):
    """
    Writes `data` to `path` through a temporary file in the same directory followed by a rename, so that readers
    never observe a partially written file.

    Parameters
    ----------
    path : str or os.PathLike
        Destination file.
    data : bytes or str
        Content to write. Strings are encoded as UTF-8.

    """
    if isinstance(data, str):
        data = data.encode("utf-8")
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise
