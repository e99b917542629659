"""stratlab: symbolic-numeric Glaeser bundles of polynomial maps.

Computes the minimal closed covector bundle containing the differentials of a
polynomial map, classifies the singular locus into quasistrata by fiber
dimension, tests the Lagrangian (orthogonal-complement) condition per
quasistratum, and renders a universality verdict for Thom-Whitney-a
Gauss-regular stratifications.  An exact Hermite interpolation routine with
value and first-derivative data completes the toolkit.
"""

__version__ = "0.1.0"
