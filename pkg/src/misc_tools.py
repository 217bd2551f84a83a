"""Collection of miscelaneous tools useful in a variety of situations
(not specific to the current project)
"""

import json
import os
import tempfile
from pathlib import Path

import numpy as np
import pandas as pd

########################################################################################
## Pandas Helpers
########################################################################################


def move_columns_to_front(df, cols=()):
    """Reorder `df` in place so that `cols` come first, in the given order.

    >>> df = pd.DataFrame({"a": [1], "b": [2], "t": [0.0]})
    >>> move_columns_to_front(df, ["t", "b"])
    >>> list(df.columns)
    ['t', 'b', 'a']
    """
    for col in reversed(list(cols)):
        df.insert(0, col, df.pop(col))


def pairwise_ratios(series):
    """Ratio of each entry to the one before it.

    Parameters
    ----------
    series : pandas.Series or array_like
        Values in sweep order.

    Returns
    -------
    numpy.ndarray
        Same length as `series`, NaN in the first slot and wherever the
        previous value is zero or missing.

    Examples
    --------
    >>> pairwise_ratios(pd.Series([8.0, 4.0, 1.0])).tolist()
    [nan, 0.5, 0.25]
    """
    values = np.asarray(series, dtype=float)
    ratios = np.full(values.shape, np.nan)
    previous = values[:-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios[1:] = np.where(previous != 0, values[1:] / previous, np.nan)
    return ratios


def scaling_prefactors(n_values, errors, power):
    """C(N) = error(N) * N**power; stable C means the error scales as N**-power.

    >>> scaling_prefactors([10, 20], [0.01, 0.0025], 2).tolist()
    [1.0, 1.0]
    """
    n_values = np.asarray(n_values, dtype=float)
    return np.asarray(errors, dtype=float) * n_values**power


########################################################################################
## File output
########################################################################################


def df_to_csv_text(df):
    """CSV text with 17 significant digits, ',' separators and '\\n' line ends.

    >>> print(df_to_csv_text(pd.DataFrame({"t": [0.0, 0.1]})), end="")
    t
    0
    0.10000000000000001
    """
    return df.to_csv(index=False, float_format="%.17g", lineterminator="\n")


def _write_atomic(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    return path


def write_csv_atomic(df, path):
    """Write `df` via a temporary file in the same directory, then rename."""
    return _write_atomic(path, df_to_csv_text(df))


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"Object of type {type(obj).__name__} is not JSON serializable")


def _finite_or_none(obj):
    """Replace NaN and infinities, which JSON cannot hold, by None."""
    if isinstance(obj, dict):
        return {k: _finite_or_none(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite_or_none(v) for v in obj]
    if isinstance(obj, (float, np.floating)) and not np.isfinite(obj):
        return None
    return obj


def write_json_atomic(data, path):
    text = json.dumps(
        _finite_or_none(data), indent=2, sort_keys=True, default=_json_default, allow_nan=False
    )
    text += "\n"
    return _write_atomic(path, text)
