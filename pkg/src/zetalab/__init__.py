"""zetalab: a numerical laboratory for multiscale barrier estimates on large
values of the Riemann zeta function on the critical line."""

__version__ = "0.1.0"
