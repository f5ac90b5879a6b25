"""Interpolating Bose-Fermi statistics for particles with an internal exchange state.

Submodules
----------
exchange_algebra
    Symmetrizer, symmetrized states, truncated Fock-like space, ladder
    operators and their deformed commutators; brute-force grand traces.
thermo_discrete
    Partition function, occupations, admissible chemical potentials and
    state functions on a discrete spectrum.
bose_integrals
    g_n(z) by series and by quadrature.
thermo_continuum
    3D ideal-gas equation of state, fugacity solver and virial expansion.
cli
    The ``qgas`` command.
"""

__version__ = "0.1.0"
