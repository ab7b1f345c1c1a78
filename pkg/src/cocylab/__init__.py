"""Computational lab for linear cocycles over mixing shifts of finite type."""

__version__ = "0.1.0"

from .errors import CocylabError, NoGapWarning  # noqa: E402
from .sft import (Metric, PeriodicOrbit, SftPoint, TransitionStructure, bracket, d_alpha,  # noqa: E402
                  enumerate_periodic_orbits, homoclinic_points, shift, validate_mixing)
from .cocycle import CocycleSystem, Generator, conjugate_system, evaluate, perturb, power_system  # noqa: E402
from .bunching import Verdict, certify, certify_direct, certify_periodic  # noqa: E402
from .holonomy import Kind, holonomy, stable_holonomy, unstable_holonomy, verify_holonomy_axioms  # noqa: E402
from .conjugacy import (build_conjugacy, check_condition_b, combine_relprime, match_periodic_data,  # noqa: E402
                        pcf, verify_cohomology, verify_pcf_closing_convergence)
from .centralizer import commutant_tower, coset_test  # noqa: E402
from .spectrum import MarkovSampler, measure_exponents, periodic_exponents  # noqa: E402
from .splitting import assemble_blockwise, cluster_constant, compute_splitting  # noqa: E402
from .scenarios import generate_scenario, load_config  # noqa: E402
from .runner import ReportBundle, run_config, run_scenario  # noqa: E402
