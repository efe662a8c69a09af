"""Green functions on flat tori: critical points, degeneracy geometry, and
explicit solutions of the curvature equation with two opposite singular
sources.
"""

from .elliptic import (
    DomainError,
    LatticeData,
    LatticePoleError,
    TorusPoint,
    decompose_rs,
    make_lattice,
    modular_transform_check,
    sigma_w,
    torus_distance,
    wp,
    wp_prime,
    zeta_w,
)
from .green import (
    GreenGradient,
    HessianData,
    grad_G,
    grad_Gp,
    green_value_rel,
    hessian_G,
    hessian_Gp,
)
from .critpoints import (
    CriticalPoint,
    CriticalSet,
    FinderOptions,
    classify,
    find_critical_points_G,
    find_critical_points_Gp,
    seed_grid,
    verify_degree,
)
from .degeneracy import (
    AlphaBeta,
    DiskOrHalfPlane,
    RegionClassification,
    alpha_beta,
    classify_region,
    disk_B0,
    disk_Bk,
    half_period_sign,
)
from .hitchin import (
    HitchinSample,
    f_rs,
    hessian_via_hitchin,
    jacobian_f,
    pvi_residual,
    wp_inverse,
)
from .dynamics import (
    AntiMapParams,
    attracting_fixed_points,
    critical_points_of_g,
    dbar_g,
    g_map,
    j_phi,
    make_antimap,
    phi_degree_probe,
)
from .liouville import (
    DevelopingMap,
    SolutionField,
    developing_f,
    developing_f_prime,
    developing_maps_from,
    make_developing_map,
    pde_residual,
    u_beta,
)
from .scan import PhaseSample, ScanConfig, run_scan

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
