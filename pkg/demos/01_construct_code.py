"""Build a random (3,15)-regular code, check it and save it as alist."""

import numpy as np

from spikebp import construct_regular_code, has_four_cycle, load_alist, save_alist, syndrome

g = construct_regular_code(1500, 3, 15, seed=1)
print(g)

# every column has weight 3, every row weight 15
print("column weights:", np.unique(g.vn_degrees), "row weights:", np.unique(g.cn_degrees))

# two rows share at most one column, so there is no 4-cycle
H = g.to_dense().astype(int)
overlap = H @ H.T
np.fill_diagonal(overlap, 0)
print("largest row overlap:", overlap.max(), "four-cycle:", has_four_cycle(g))

# flipping a single bit lights up exactly its three checks
bits = np.zeros(g.n_vns, dtype=np.uint8)
bits[7] = 1
print("checks of bit 7:", g.vn_neighbors(7), "syndrome support:", np.flatnonzero(syndrome(g, bits)))

text = save_alist(g)
print("alist round trip ok:", load_alist(text) == g)
print(text.splitlines()[0], "/", text.splitlines()[1])
