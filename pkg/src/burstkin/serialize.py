"""Plain CSV emitters for the batch front end.

Every writer produces the same bytes for the same inputs: fixed headers,
17 significant digits for floats, LF line endings, rows in the natural
order of the data.  That is what makes rerun-diffing of artifacts a
meaningful check.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "format_float",
    "write_csv",
    "write_pmf_csv",
    "write_trace_csv",
    "write_density_csv",
    "write_trajectory_csv",
    "write_modes_csv",
    "write_pairs_csv",
]


def format_float(x: float) -> str:
    """Shortest-ish decimal form that still round-trips a double."""
    return "%.17g" % float(x)


def write_csv(path, header: str, rows: Iterable[Sequence[str]]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def write_pmf_csv(path, values: np.ndarray) -> None:
    """States 0..n_max with their probabilities; header ``n,p``."""
    write_csv(path, "n,p",
              ((str(n), format_float(p)) for n, p in enumerate(values)))


def write_trace_csv(path, times: np.ndarray, l1: np.ndarray) -> None:
    """Distance-to-stationarity trace; header ``t,l1_distance``."""
    write_csv(path, "t,l1_distance",
              ((format_float(t), format_float(d)) for t, d in zip(times, l1)))


def write_density_csv(path, grid: np.ndarray, values: np.ndarray) -> None:
    """Grid density; header ``x,u``."""
    write_csv(path, "x,u",
              ((format_float(x), format_float(u)) for x, u in zip(grid, values)))


def write_trajectory_csv(path, times: np.ndarray,
                         y_pre: np.ndarray, y_post: np.ndarray) -> None:
    """Jump skeleton, one row per jump; header ``k,t,y_pre,y_post``.

    ``times`` carries the extra leading t = 0 entry, so jump k pairs
    times[k] with y_pre[k-1]/y_post[k-1].
    """
    write_csv(path, "k,t,y_pre,y_post",
              ((str(k + 1), format_float(times[k + 1]),
                format_float(y_pre[k]), format_float(y_post[k]))
               for k in range(len(y_pre))))


def write_modes_csv(path, roots: Sequence[float], kinds: Sequence[str]) -> None:
    """Mode census; header ``x_root,kind``."""
    write_csv(path, "x_root,kind",
              ((format_float(x), k) for x, k in zip(roots, kinds)))


def write_pairs_csv(path, header: str, xs: np.ndarray, ys: np.ndarray) -> None:
    """Two float columns under a caller-chosen header."""
    write_csv(path, header,
              ((format_float(x), format_float(y)) for x, y in zip(xs, ys)))
