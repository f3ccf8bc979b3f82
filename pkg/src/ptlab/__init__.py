"""Dense-model property testing lab: exact 4-vertex censuses, the weighted
density property, quasirandomness checks and tester simulation."""

from .density import (
    ClassFamily,
    DensityEstimate,
    FourProfile,
    four_profile,
    kst_defect,
    p_induced,
    p_via_intermediate,
    rho_expected,
    sample_density,
    t_ind,
    t_inj,
)
from .graph_core import (
    BlowupStructure,
    Four,
    Graph,
    GraphFormatError,
    aut_count,
    blowup,
    classify4,
    complement,
    format_graph,
    named_graph,
    parse_graph,
    random_graph,
)
from .property_pi import (
    BUILTIN_PROPERTY,
    PotSpec,
    WeightedDensityProperty,
    distance_to_property,
    integerize,
    is_member,
    load_property,
    nonmember_gap,
    phi_value,
    pot_from_property,
    z_average_check,
    z_value,
)
from .quasirandom import cgw_check, f_window, is_delta_quasirandom, member_quasirandomness_audit
from .tester_sim import (
    TesterSpec,
    amplify,
    double_sampling,
    indistinguishability_experiment,
    run_canonical,
    run_pot,
)

__version__ = "0.1.0"
