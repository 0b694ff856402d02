"""Discrete Morrey–Campanato seminorms, maximal operators, Calderón–Zygmund
generations and Muckenhoupt weights on uniform grids."""
from .czd import (
    CZDecomposition,
    DecayFit,
    DecayFitError,
    DecayProfile,
    JNGenerations,
    constructive_bound,
    cz_decompose,
    distribution,
    exp_integrability,
    fit_exponential_decay,
    jn_generations,
)
from .generators import generate, indicator
from .grid import (
    Cube,
    CubeFamily,
    Domain,
    GridError,
    GridFunction,
    Sliding,
    cube_at,
    default_family,
    enumerate_cubes,
    make_cube,
)
from .io import FormatError, emit, ingest
from .maximal import (
    CharStatistic,
    bilinear_commutator,
    bilinear_maximal,
    char_statistic,
    commutator,
    global_maximal,
    local_maximal,
    maximal_deviation,
)
from .seminorms import (
    SeminormReport,
    SeminormSpec,
    holder_seminorm,
    minimizing_constant,
    seminorm,
    variant_equivalence_ratio,
)
from .weights import (
    Weight,
    WeightClass,
    measure_comparison_exponents,
    muckenhoupt_constant,
    reverse_holder_exponent,
    rubio_de_francia,
    weighted_char_statistic,
)

__version__ = "0.1.0"
