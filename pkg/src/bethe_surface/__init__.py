"""Numerical toolkit for monodromy-free second-order ODEs on Riemann surfaces.

Submodules
----------
numkit        series, rational maps, contour quadrature, Newton solvers
schwarz       Schwarzian derivatives and potentials of developing maps
genus0        Stieltjes-Bethe systems and tau-functions on the sphere
elliptic      the genus-1 theory on a torus
riemanntheta  Riemann theta functions with characteristics
hypersurface  hyperelliptic curves: periods, Abel map, prime form
genusg        the genus ``g >= 2`` theory
monodromy     ODE transport and monodromy classification
cli           command-line interface
"""
import os

_threads = os.environ.get("BETHE_SURFACE_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

__version__ = "0.1.0"

from . import errors  # noqa: E402,F401
