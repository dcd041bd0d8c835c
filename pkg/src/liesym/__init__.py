r'''# liesym
This package finds the Lie point symmetries of a differential equation from
scattered samples of its solutions: the samples are lifted into jet space,
a polynomial ansatz for the generator is prolonged, and the generators are
read off the numerical nullspace of the discretised invariance condition.
'''

from .errors import (LiesymError, DegenerateStencilError,
                     DegenerateFractionError, LevelExhaustedError,
                     OrderOverflowError, CSVFormatError)
from .jetspace import (JetLayout, multi_indices, jet_dimension,
                       coordinate_offset, coordinate_at, coordinate_names)
from .pointcloud import (PointCloud, FamilySpec, family_spec, sample_system,
                         save_csv, load_csv)
from .neighbors import NeighborTable, knn, knn_bruteforce
from .tangent import GmlsParams, TangentFrame, LocalChart, gmls_refine
from .prolong import ProlongedCloud, prolongate, prolongate_once
from .ansatz import (JetPolynomial, AnsatzBasis, monomial_ansatz,
                     prolong_ansatz, render_generator)
from .invariance import (NullityPolicy, SpectralReport, SubspaceAngle,
                         normals, build_system, nullspace, principal_angles)
from .experiments import (Benchmark, get_benchmark, run_benchmark,
                          convergence_sweep, reference_nullspace)
from .config import RunConfig
from . import systems
