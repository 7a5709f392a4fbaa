"""Vector-valued neural networks over real algebras given by structure constants."""

from .algebra import (
    Algebra,
    AlgebraError,
    AlgebraReport,
    abs_value,
    algebra_from_table,
    analyze_algebra,
    bilinear_matrices,
    builtin_algebra,
    left_mult_matrix,
    multiply,
    parametrized_algebra,
)
from .linalg import (
    ComponentStack,
    VMatrix,
    big_left_matrix,
    component_stack,
    kron,
    phi_matrix,
    unphi_matrix,
    vmat_mul_direct,
    vmat_mul_emulated,
)
from .layers import (
    VMLP,
    DenseLayer,
    SplitActivation,
    component_output_layer,
    dense_forward,
    dense_forward_emulated,
    dense_param_counts,
)
from .conv import ConvLayer, conv_forward_direct, conv_forward_emulated, split_maxpool
from .training import (
    FitReport,
    TrainConfig,
    TrainingDiverged,
    approximation_demo,
    loss_and_grad,
    train,
    vmlp_forward,
)

__version__ = "0.1.0"
