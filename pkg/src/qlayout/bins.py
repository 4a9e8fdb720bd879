"""Row-organised free-space index with nearest-free-cell queries.

Each substrate row keeps its free cells as sorted, disjoint half-open
x-intervals.  A query bisects the interval list of the rows around the
target, walking outward in y only while a row could still beat the best
candidate, so a lookup touches a handful of rows and O(log k) intervals per
row.
"""

from __future__ import annotations

import bisect
import math
from typing import Iterable, List, Optional, Tuple

import numpy as np

from .errors import EmptyIndexError
from .layout import FREE, Layout


class BinIndex:
    def __init__(self, free: np.ndarray):
        """``free`` is a boolean (height, width) mask of available cells."""
        free = np.asarray(free, dtype=bool)
        self.height, self.width = free.shape
        self.starts: List[List[int]] = []
        self.ends: List[List[int]] = []
        self.count = 0
        self.probes = 0  # rows inspected by queries, for scaling studies
        for y in range(self.height):
            row = np.r_[False, free[y], False].astype(np.int8)
            d = np.diff(row)
            s = np.flatnonzero(d == 1).tolist()
            e = np.flatnonzero(d == -1).tolist()
            self.starts.append(s)
            self.ends.append(e)
            self.count += sum(b - a for a, b in zip(s, e))

    @classmethod
    def from_layout(cls, layout: Layout) -> "BinIndex":
        return cls(layout.owner == FREE)

    def __len__(self):
        return self.count

    def intervals(self, y: int) -> List[Tuple[int, int]]:
        return list(zip(self.starts[y], self.ends[y]))

    def contains(self, x: int, y: int) -> bool:
        if not (0 <= y < self.height):
            return False
        s = self.starts[y]
        k = bisect.bisect_right(s, x) - 1
        return k >= 0 and x < self.ends[y][k]

    def remove(self, x: int, y: int):
        """Mark cell (x, y) occupied; splits the interval that holds it."""
        s, e = self.starts[y], self.ends[y]
        k = bisect.bisect_right(s, x) - 1
        if k < 0 or x >= e[k]:
            raise KeyError((x, y))
        a, b = s[k], e[k]
        if a == x and b == x + 1:
            del s[k], e[k]
        elif a == x:
            s[k] = x + 1
        elif b == x + 1:
            e[k] = x
        else:
            e[k] = x
            s.insert(k + 1, x + 1)
            e.insert(k + 1, b)
        self.count -= 1

    def add(self, x: int, y: int):
        """Return cell (x, y) to the free set, merging with neighbours."""
        s, e = self.starts[y], self.ends[y]
        k = bisect.bisect_right(s, x)
        if k > 0 and x < e[k - 1]:
            raise KeyError((x, y))
        left = k > 0 and e[k - 1] == x
        right = k < len(s) and s[k] == x + 1
        if left and right:
            e[k - 1] = e[k]
            del s[k], e[k]
        elif left:
            e[k - 1] = x + 1
        elif right:
            s[k] = x
        else:
            s.insert(k, x)
            e.insert(k, x + 1)
        self.count += 1

    def _row_best(self, y: int, px: float) -> Optional[int]:
        s, e = self.starts[y], self.ends[y]
        if not s:
            return None
        k = bisect.bisect_right(s, px) - 1
        best = None
        best_d = math.inf
        for j in (k, k + 1):
            if 0 <= j < len(s):
                a, b = s[j], e[j] - 1
                if px <= a:
                    x = a
                elif px >= b:
                    x = b
                else:
                    f = math.floor(px)
                    x = f if px - f <= f + 1 - px else f + 1
                d = abs(x - px)
                if d < best_d or (d == best_d and x < best):
                    best, best_d = x, d
        return best

    def nearest(self, px: float, py: float) -> Tuple[int, int]:
        """Free cell minimising squared distance to (px, py); ties -> smaller y, then x."""
        if self.count == 0:
            raise EmptyIndexError("no free cells left")
        y0 = min(max(int(math.floor(py + 0.5)), 0), self.height - 1)
        best_key = None
        best = None
        up, down = y0, y0 - 1
        # visit rows in order of |y - py|
        while up < self.height or down >= 0:
            du = abs(up - py) if up < self.height else math.inf
            dd = abs(down - py) if down >= 0 else math.inf
            if dd <= du:
                y, dy = down, dd
                down -= 1
            else:
                y, dy = up, du
                up += 1
            if best_key is not None and dy * dy > best_key[0]:
                break
            self.probes += 1
            x = self._row_best(y, px)
            if x is None:
                continue
            key = ((x - px) ** 2 + dy * dy, y, x)
            if best_key is None or key < best_key:
                best_key, best = key, (x, y)
        return best

    def free_mask(self) -> np.ndarray:
        mask = np.zeros((self.height, self.width), dtype=bool)
        for y in range(self.height):
            for a, b in zip(self.starts[y], self.ends[y]):
                mask[y, a:b] = True
        return mask


def nearest_linear(free: np.ndarray, px: float, py: float) -> Tuple[int, int]:
    """Reference nearest-free-cell search scanning every cell."""
    ys, xs = np.nonzero(free)
    if xs.size == 0:
        raise EmptyIndexError("no free cells left")
    d = (xs - px) ** 2 + (ys - py) ** 2
    order = np.lexsort((xs, ys, d))
    k = order[0]
    return int(xs[k]), int(ys[k])


def nearest_in(cells: Iterable[Tuple[int, int]], px: float, py: float) -> Optional[Tuple[int, int]]:
    """Nearest member of a small explicit cell set (same key as the index)."""
    best = None
    best_key = None
    for x, y in cells:
        key = ((x - px) ** 2 + (y - py) ** 2, y, x)
        if best_key is None or key < best_key:
            best_key, best = key, (x, y)
    return best
