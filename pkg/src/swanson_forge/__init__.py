"""Pseudo-supersymmetric partners of the generalized Swanson model.

Builds partner Hamiltonians for eight shape-invariant potential families and
checks the closed-form partner parameters, spectra, waveforms and operator
identities against finite-difference discretizations.
"""

from .catalog import ModelId, instantiate, reference_spec
from .params import SwansonCouple, hermitian_limit, new_couple
from .riccati import PartnerParameters, solve_partner

__all__ = [
    "ModelId",
    "PartnerParameters",
    "SwansonCouple",
    "hermitian_limit",
    "instantiate",
    "new_couple",
    "reference_spec",
    "solve_partner",
]
