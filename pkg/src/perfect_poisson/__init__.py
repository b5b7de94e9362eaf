"""Perfectness of Poisson manifolds, computed on Fourier-truncated models.

Models are constant Poisson bivectors on tori (symplectic and cosymplectic
examples, and their products) and the mapping torus T^3_A of a hyperbolic
toral automorphism.  The zeroth Poisson homology is obtained from the top
leafwise cohomology of the symplectic foliation; together with the modular
class it decides perfectness.
"""

__version__ = "0.1.0"

from .fourier import TrigPolynomial, box_modes, mean  # noqa: E402
from .models import (  # noqa: E402
    ConstantTorusModel,
    CosymplecticTorusModel,
    MappingTorusModel,
    ProductModel,
    bracket,
    build_model,
    cat_mapping_torus,
    fibration_cosymplectic_t3,
    kronecker_cosymplectic_t3,
    symplectic_t2,
)
from .homology import (  # noqa: E402
    decompose_commutators,
    kunneth_compose,
    modular_class,
    perfectness_verdict,
    top_poisson_cohomology_dim,
    zeroth_homology,
)

__all__ = [
    "TrigPolynomial", "box_modes", "mean",
    "ConstantTorusModel", "CosymplecticTorusModel", "MappingTorusModel", "ProductModel",
    "bracket", "build_model", "cat_mapping_torus", "fibration_cosymplectic_t3",
    "kronecker_cosymplectic_t3", "symplectic_t2",
    "decompose_commutators", "kunneth_compose", "modular_class", "perfectness_verdict",
    "top_poisson_cohomology_dim", "zeroth_homology",
]
