"""Numerical certification of cyclic representations of the 6-vertex reflection algebra.

Dense exact diagonalization of the open tau2 (Bazhanov-Stroganov) chain at a
root of unity serves as the oracle for the algebraic identities, the
separation-of-variables basis, the characterization of the transfer-matrix
spectrum by determinant conditions, the Baxter TQ functional equation and
the reductions to sine-Gordon, spin-s XXZ and chiral Potts.

Modules
-------
numerics        dense linear-algebra primitives and tolerances
representation  root of unity, Weyl pair, site/boundary parameters, configurations
bulk            R-matrix, Lax operator, monodromy, quantum determinant
boundary        K-matrices, reflection algebra, boundary transfer matrix
sov_basis       left/right eigenbases of B_- and separate states
spectrum        ED oracle, determinant conditions, Q tables, eigenstates
tq              functional equation, Q polynomials, Bethe-like states
reductions      sine-Gordon, spin-s XXZ, chiral Potts, general B_-
suites, report, cli   verification suites, JSON reports and command line
"""

__version__ = "0.1.0"

from .numerics import ToleranceProfile  # noqa: E402
from .representation import (ChainConfig, ConfigError, GenericityError, ParameterError,  # noqa: E402
                             RootOfUnity, random_generic_config, root_of_unity)

__all__ = [
    "__version__", "ToleranceProfile", "ChainConfig", "ConfigError", "GenericityError",
    "ParameterError", "RootOfUnity", "random_generic_config", "root_of_unity",
]
