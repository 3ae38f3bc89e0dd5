"""Six-vertex model with domain wall boundary conditions in the antiferroelectric phase.

Modules:
    theta         Jacobi theta functions and a catalogue of theta identities
    elliptic      Jacobi elliptic functions via theta ratios, quadrature oracles
    equilibrium   constrained equilibrium measure of the associated log-gas
    exact         exact Z_n through the Hankel moment determinant
    enumerate     brute-force enumeration of DWBC configurations
    asymptotics   large-n formulas for Z_n and the orthogonal-polynomial norms
    subleading    the subleading constant of the norm ratio
    cli           command-line front end
"""

__version__ = "0.1.0"
