"""Kernel backend selection.

The compiled module (Cython over gmpy2 rationals) is used when it was built;
otherwise the pure-Python mirror is imported.  Both expose the same names and
return identical Fractions, so callers never branch on the backend.
"""

try:
    from aplab import _kernels as _impl
except ImportError:  # extension not built
    from aplab import _kernels_py as _impl

BACKEND = _impl.BACKEND

PLTable = _impl.PLTable
Mixture = _impl.Mixture
ref_density = _impl.ref_density
ref_cdf = _impl.ref_cdf
ref_cdf_inv = _impl.ref_cdf_inv
ref_density_bounds = _impl.ref_density_bounds
flow_sup_distance = _impl.flow_sup_distance


def table_of(h):
    """Kernel table for a :class:`~aplab.pl_homeo.PLFunction`."""
    return PLTable(h.xs, h.ys, h.left_slope, h.right_slope, h.intercept)
