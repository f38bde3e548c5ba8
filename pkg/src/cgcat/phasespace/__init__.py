"""Phase-space representations: Wigner bases and symbolic P-distributions."""
from .wigner import (
    FockWignerBasis,
    TwoModeWigner,
    WignerBasis,
    assemble_two_mode,
    wigner_basis_cat,
    wigner_basis_noon,
    wigner_basis_pasv,
)
