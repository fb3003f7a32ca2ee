"""Dense cubic boxes around the origin, flat-indexed for the numba kernels.

A ``BoxGrid`` covers the sites with every coordinate in [-radius, radius].
Flat index of a site is sum_i (x_i + radius) * stride_i with stride_{d-1}=1,
so moving one step along axis i is just adding or subtracting stride_i.
"""

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class BoxGrid:
    d: int
    radius: int
    strides: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.d < 1 or self.radius < 0:
            raise ValueError("need d >= 1 and radius >= 0")
        side = 2 * self.radius + 1
        strides = np.empty(self.d, dtype=np.int64)
        s = 1
        for i in range(self.d - 1, -1, -1):
            strides[i] = s
            s *= side
        strides.setflags(write=False)
        object.__setattr__(self, "strides", strides)

    @property
    def side(self) -> int:
        return 2 * self.radius + 1

    @property
    def size(self) -> int:
        return self.side**self.d

    @property
    def origin_index(self) -> int:
        return int(self.strides.sum()) * self.radius

    def index(self, site) -> int:
        idx = 0
        for c, s in zip(site, self.strides):
            c = int(c)
            if abs(c) > self.radius:
                raise IndexError(f"site {tuple(site)} outside box of radius {self.radius}")
            idx += (c + self.radius) * int(s)
        return idx

    def contains(self, site) -> bool:
        return all(abs(int(c)) <= self.radius for c in site)

    def site(self, idx: int):
        out = []
        for s in self.strides:
            q, idx = divmod(int(idx), int(s))
            out.append(q - self.radius)
        return tuple(out)

    def coordinate_arrays(self) -> np.ndarray:
        """(size, d) array of site coordinates in flat-index order."""
        side = self.side
        grids = np.indices((side,) * self.d) - self.radius
        return grids.reshape(self.d, -1).T.astype(np.int64)

    def norm_sq_array(self) -> np.ndarray:
        """norm^2 of every site, flat-index order."""
        coords = self.coordinate_arrays()
        return (coords * coords).sum(axis=1)

    def step_deltas(self) -> np.ndarray:
        """Flat-index increments of the 2d neighbor moves, in the documented
        order (axis ascending, minus before plus)."""
        deltas = np.empty(2 * self.d, dtype=np.int64)
        for i in range(self.d):
            deltas[2 * i] = -self.strides[i]
            deltas[2 * i + 1] = self.strides[i]
        return deltas

    def grow(self, new_radius: int, *arrays):
        """Copy flat ``arrays`` into a larger concentric box.

        Returns ``(bigger_grid, new_arrays...)``; contents are preserved
        site-for-site.
        """
        if new_radius <= self.radius:
            raise ValueError("new radius must exceed the current one")
        big = BoxGrid(self.d, new_radius)
        out = []
        pad = new_radius - self.radius
        src_shape = (self.side,) * self.d
        sel = tuple(slice(pad, pad + self.side) for _ in range(self.d))
        for a in arrays:
            b = np.zeros((big.side,) * self.d, dtype=a.dtype)
            b[sel] = a.reshape(src_shape)
            out.append(b.reshape(-1))
        return (big, *out)
