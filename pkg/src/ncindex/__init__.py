"""Index pairings of covariant tight-binding models on finite tori."""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # pragma: no cover
    __version__ = "0.1.0"

from .errors import (  # noqa: E402
    AnalysisError,
    CommensurabilityError,
    ConfigError,
    ConvergenceError,
    DecayError,
    GapError,
    GaplessError,
    NCIndexError,
    NotChiralError,
    ParityError,
    RangeError,
    RepresentationError,
    SingularError,
    ValidationError,
)
from .lattice import (  # noqa: E402
    CovariantOperator,
    DisorderLaw,
    ModelSpec,
    TorusGeometry,
    TwistCocycle,
    build_hamiltonian,
    magnetic_translation,
    twisted_shift,
)
from .calculus import derivation, fermi_projection, fermi_unitary, trace_per_volume  # noqa: E402
from .pairings import (  # noqa: E402
    constant_even,
    constant_odd,
    disorder_averaged_pairing,
    even_pairing,
    odd_pairing,
)
from .boundary import CylinderGeometry, build_halfspace, bulk_edge_check  # noqa: E402

__all__ = [
    "__version__",
    "AnalysisError",
    "CommensurabilityError",
    "ConfigError",
    "ConvergenceError",
    "CovariantOperator",
    "CylinderGeometry",
    "DecayError",
    "DisorderLaw",
    "GapError",
    "GaplessError",
    "ModelSpec",
    "NCIndexError",
    "NotChiralError",
    "ParityError",
    "RangeError",
    "RepresentationError",
    "SingularError",
    "TorusGeometry",
    "TwistCocycle",
    "ValidationError",
    "build_halfspace",
    "build_hamiltonian",
    "bulk_edge_check",
    "constant_even",
    "constant_odd",
    "derivation",
    "disorder_averaged_pairing",
    "even_pairing",
    "fermi_projection",
    "fermi_unitary",
    "magnetic_translation",
    "odd_pairing",
    "trace_per_volume",
    "twisted_shift",
]
