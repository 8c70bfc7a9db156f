"""Monte Carlo study of time-reversal precoding on a maximum-diversity channel."""

__version__ = "0.1.0"

from .analytic import (  # noqa: E402
    GammaParams,
    Tail,
    gamma_ccdf,
    gamma_cdf,
    gamma_quantile,
    table1_moments,
)
from .channel import (  # noqa: E402
    ChannelDims,
    ChannelRealization,
    channel_energy,
    generate_channel,
    per_antenna_energy,
)
from .montecarlo import (  # noqa: E402
    EmpiricalDistribution,
    SimConfig,
    run_ensemble,
    scaling_sweep,
)
from .powers import Measure, relative_powers, to_decibel  # noqa: E402
from .precoder import (  # noqa: E402
    NormalizationKind,
    compute_weights,
    effective_channel,
    normalization_coefficient,
    zero_delay_tap,
)
