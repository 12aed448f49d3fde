"""Truncated multivariate power series, germ decompositions, Gevrey growth fits
and Borel-Laplace sums."""

from germsum.coeffs import GaussRational, I, gauss
from germsum.kernels import BACKEND
from germsum.mseries import Germ, MultiSeries, euler_compose

__all__ = ["BACKEND", "GaussRational", "Germ", "I", "MultiSeries", "euler_compose", "gauss"]
__version__ = "0.1.0"
